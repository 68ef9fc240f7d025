use serde::{Deserialize, Serialize};

use super::integrator::{minus_iz, propagate, solve, Generator, IntegratorOptions, Scheme};
use super::profile::{matrices_from, ArovProfile, Piece};
use crate::error::{Error, Result};
use crate::jalg::{jay, ComplexMatrix2, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gauge {
    Arov,
    PotapovDeBranges,
}

/// `𝔄(z, T)` with integrator metadata and structural diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferResult {
    pub matrix: ComplexMatrix2,
    pub z: C64,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub gauge: Gauge,
    pub step: f64,
    pub scheme: Scheme,
    pub error_estimate: f64,
    /// `|det 𝔄 − 1|`.
    pub det_defect: f64,
    /// `‖𝔄*j𝔄 − j‖`; zero on the real axis up to rounding.
    pub j_unitarity_defect: f64,
    /// Smallest eigenvalue of `𝔄j𝔄* − j`; nonnegative for `Im z ≥ 0`.
    pub expansion_min_eig: f64,
}

impl TransferResult {
    pub(crate) fn new(matrix: ComplexMatrix2, z: C64, t_end: f64, gauge: Gauge, opts: &IntegratorOptions, error_estimate: f64) -> Self {
        let j = jay();
        Self {
            matrix,
            z,
            t_end,
            gauge,
            step: opts.step,
            scheme: opts.scheme,
            error_estimate,
            det_defect: (matrix.det() - C64::new(1.0, 0.0)).norm(),
            j_unitarity_defect: (matrix.adjoint() * j * matrix - j).norm(),
            expansion_min_eig: (matrix * j * matrix.adjoint() - j).min_hermitian_eigenvalue(),
        }
    }

    /// `𝔄 ∈ SU(1,1)` up to `tol`.
    pub fn is_su11(&self, tol: f64) -> bool {
        self.det_defect <= tol && self.j_unitarity_defect <= tol
    }
}

/// `M(t) = (−izA(t) + B(t))·j` for an Arov-gauge profile.
pub struct ArovGenerator<'a> {
    pub profile: &'a ArovProfile,
    pub z: C64,
}

impl Generator for ArovGenerator<'_> {
    fn pieces(&self, t_end: f64) -> Vec<Piece> {
        self.profile.pieces(t_end)
    }

    fn eval(&self, t: f64, piece: &Piece) -> ComplexMatrix2 {
        let (a, b, c) = self.profile.coeffs(t, piece.side(t));
        let (am, bm) = matrices_from(a, b, c);
        (am * minus_iz(self.z) + bm) * jay()
    }
}

pub(crate) fn check_z(z: C64) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite()) || z.im < 0.0 {
        return Err(Error::InvalidArgument(format!("z must be finite with Im z ≥ 0, got {z}")));
    }
    Ok(())
}

pub(crate) fn check_t(t_end: f64) -> Result<()> {
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::InvalidArgument(format!("T must be finite and ≥ 0, got {t_end}")));
    }
    Ok(())
}

/// Solves `∂ₜ𝔄 = 𝔄(−izA + B)j` from `𝔄(z, 0) = I` up to `T`.
pub fn transfer(p: &ArovProfile, z: C64, t_end: f64, opts: &IntegratorOptions) -> Result<TransferResult> {
    check_z(z)?;
    check_t(t_end)?;
    let (m, est) = solve(&ArovGenerator { profile: p, z }, t_end, opts)?;
    Ok(TransferResult::new(m, z, t_end, Gauge::Arov, opts, est))
}

/// Transfer matrix without the error-estimate pass, for bulk evaluation.
pub(crate) fn transfer_matrix(p: &ArovProfile, z: C64, t_end: f64, opts: &IntegratorOptions) -> ComplexMatrix2 {
    let o = IntegratorOptions { estimate_error: false, ..*opts };
    propagate(&ArovGenerator { profile: p, z }, t_end, &o, |_, _| {})
}

/// Tolerance on `|𝔞₂₁(i, T)|`.
pub const TRIANGULARITY_TOL: f64 = 1e-7;
/// Tolerance on the relative error of `𝔞₂₂(i, T)` against `exp(∫a)`.
pub const LAMBDA_REL_TOL: f64 = 1e-6;

/// `𝔄(i, T)`, which must be `[[1/λ, h], [0, λ]]` with `λ = exp(∫₀ᵀ a)`.
pub fn transfer_at_i(p: &ArovProfile, t_end: f64, opts: &IntegratorOptions) -> Result<TransferResult> {
    let r = transfer(p, C64::new(0.0, 1.0), t_end, opts)?;
    let a21 = r.matrix.e21.norm();
    if a21 > TRIANGULARITY_TOL {
        return Err(Error::GaugeViolation(format!("|𝔞₂₁(i, {t_end})| = {a21:e}")));
    }
    let lambda = p.integral_a(t_end).exp();
    let rel = (r.matrix.e22 - C64::new(lambda, 0.0)).norm() / lambda;
    if rel > LAMBDA_REL_TOL {
        return Err(Error::GaugeViolation(format!("𝔞₂₂(i, {t_end}) = {} but exp(∫a) = {lambda}", r.matrix.e22)));
    }
    Ok(r)
}

/// Checks that `t ↦ 𝔄(z,t) j 𝔄(z,t)*` is nondecreasing over the sorted
/// `grid`, allowing `−tol·max(1, ‖·‖)` slack per increment.
pub fn monotonicity_check(p: &ArovProfile, z: C64, grid: &[f64], opts: &IntegratorOptions, tol: f64) -> Result<bool> {
    if !(z.im > 0.0) {
        return Err(Error::InvalidArgument(format!("monotonicity needs Im z > 0, got {z}")));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) || grid.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::InvalidArgument("grid must be sorted and nonnegative".into()));
    }
    let j = jay();
    let mut prev: Option<ComplexMatrix2> = None;
    let mut t_prev = 0.0;
    let mut y = ComplexMatrix2::identity();
    for &t in grid {
        let seg = SegmentGenerator { inner: ArovGenerator { profile: p, z }, from: t_prev };
        let o = IntegratorOptions { estimate_error: false, ..*opts };
        y = y * propagate(&seg, t - t_prev, &o, |_, _| {});
        t_prev = t;
        let d = y * j * y.adjoint();
        if let Some(prev) = prev {
            let inc = d - prev;
            if inc.min_hermitian_eigenvalue() < -tol * d.norm().max(1.0) {
                return Ok(false);
            }
        }
        prev = Some(d);
    }
    Ok(true)
}

/// The generator shifted to start at `from`.
struct SegmentGenerator<G> {
    inner: G,
    from: f64,
}

impl<G: Generator> Generator for SegmentGenerator<G> {
    fn pieces(&self, len: f64) -> Vec<Piece> {
        self.inner
            .pieces(self.from + len)
            .into_iter()
            .filter(|p| p.hi > self.from)
            .map(|p| Piece { lo: (p.lo - self.from).max(0.0), hi: p.hi - self.from, constant: p.constant })
            .collect()
    }

    fn eval(&self, t: f64, piece: &Piece) -> ComplexMatrix2 {
        let shifted = Piece { lo: piece.lo + self.from, hi: piece.hi + self.from, constant: piece.constant };
        self.inner.eval(t + self.from, &shifted)
    }
}
