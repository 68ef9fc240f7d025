use serde::{Deserialize, Serialize};

use super::matrix::{ComplexMatrix2, C64, ONE, ZERO};
use super::sample::phase;
use crate::error::{Error, Result};

/// Upper triangular factor `[[1/λ, h], [0, λ]]` of the Arov normalization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangularFactor {
    pub lambda: f64,
    pub h: C64,
}

impl TriangularFactor {
    /// `lambda` must be finite and positive. Whether the factor is
    /// j-expanding is a separate question, see [`triangular_expanding_check`].
    pub fn new(lambda: f64, h: C64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0 && h.is_finite()) {
            return Err(Error::InvalidArgument(format!("bad triangular factor λ = {lambda}, h = {h}")));
        }
        Ok(Self { lambda, h })
    }

    pub fn matrix(&self) -> ComplexMatrix2 {
        ComplexMatrix2::new(C64::new(1.0 / self.lambda, 0.0), self.h, ZERO, C64::new(self.lambda, 0.0))
    }
}

/// `true` iff `[[1/λ, h], [0, λ]]` is j-expanding, i.e. `|h| ≤ λ − 1/λ`
/// (equivalently `det(A*jA − j) = (λ² − 1)²/λ² − |h|² ≥ 0` with `λ ≥ 1`).
pub fn triangular_expanding_check(t: &TriangularFactor) -> bool {
    t.lambda >= 1.0 && t.h.norm() <= t.lambda - 1.0 / t.lambda
}

/// Factors a unimodular `B` as `B = A·U` with `A = [[1/λ, h], [0, λ]]`,
/// `λ > 0`, and `U ∈ SU(1,1)`.
///
/// The right factor is built as `(U₁U₂U₃)⁻¹`: a diagonal phase aligning the
/// arguments of `b21` and `b22`, a hyperbolic rotation killing the (2,1)
/// entry, and a diagonal phase making the diagonal positive. `λ² = |b22|² −
/// |b21|²` is invariant under right SU(1,1) multiplication, so `λ ≥ 1`
/// exactly when `B` is j-expanding and `λ ≤ 1` when it is j-contractive.
pub fn arov_normalize(b: &ComplexMatrix2, tol: f64) -> Result<(TriangularFactor, ComplexMatrix2)> {
    let scale = b.norm().powi(2).max(1.0);
    let defect = (b.det() - ONE).norm();
    if defect > tol * scale {
        return Err(Error::NotUnimodular { defect });
    }
    let r21 = b.e21.norm();
    let r22 = b.e22.norm();
    if r21 >= r22 {
        return Err(Error::HyperbolicOverflow { b21: r21, b22: r22 });
    }
    let arg21 = if r21 > 0.0 { b.e21.arg() } else { b.e22.arg() };
    let arg22 = b.e22.arg();
    let phi1 = 0.5 * (arg22 - arg21);
    let psi = 0.5 * (arg21 + arg22);
    let lambda = ((r22 - r21) * (r22 + r21)).sqrt();
    let c = r22 / lambda;
    let s = -r21 / lambda;
    let u1 = phase(phi1);
    let u2 = ComplexMatrix2::real(c, s, s, c);
    let u3 = phase(psi);
    let tri = *b * u1 * u2 * u3;
    let factor = TriangularFactor::new(lambda, tri.e12)?;
    let u = phase(-psi) * ComplexMatrix2::real(c, -s, -s, c) * phase(-phi1);
    Ok((factor, u))
}

/// Outcome of [`product_convergence_probe`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub converges: bool,
    pub matrices_cauchy: bool,
    pub lambdas_cauchy: bool,
    /// Cauchy(𝔅ₙ) ⇔ Cauchy(Λₙ) on the supplied prefix.
    pub equivalence_holds: bool,
    pub matrix_spread: f64,
    pub lambda_spread: f64,
    pub partial_products: Vec<ComplexMatrix2>,
    pub lambda_products: Vec<f64>,
}

/// Relative oscillation of the second half of a sequence around its last term.
fn tail_spread<T>(seq: &[T], dist: impl Fn(&T, &T) -> f64, size: impl Fn(&T) -> f64) -> f64 {
    let Some(last) = seq.last() else { return 0.0 };
    let start = seq.len() / 2;
    let denom = size(last).max(1.0);
    seq[start..].iter().map(|x| dist(x, last) / denom).fold(0.0, f64::max)
}

/// Partial products `𝔅ₙ = A₁⋯Aₙ` and `Λₙ = λ₁⋯λₙ` of a chain of j-expanding
/// triangular factors. Each sequence is declared Cauchy when its second half
/// stays within `tol` (relative) of the last term.
pub fn product_convergence_probe(factors: &[TriangularFactor], tol: f64) -> Result<ConvergenceReport> {
    if let Some(k) = factors.iter().position(|f| !triangular_expanding_check(f)) {
        return Err(Error::InvalidArgument(format!("factor {k} is not j-expanding")));
    }
    let mut partial_products = Vec::with_capacity(factors.len());
    let mut lambda_products = Vec::with_capacity(factors.len());
    let mut acc = ComplexMatrix2::identity();
    let mut lam = 1.0;
    for f in factors {
        acc = acc * f.matrix();
        lam *= f.lambda;
        partial_products.push(acc);
        lambda_products.push(lam);
    }
    let matrix_spread = tail_spread(&partial_products, |a, b| (*a - *b).norm(), |a| a.norm());
    let lambda_spread = tail_spread(&lambda_products, |a, b| (a - b).abs(), |a| a.abs());
    let matrices_cauchy = matrix_spread <= tol;
    let lambdas_cauchy = lambda_spread <= tol;
    Ok(ConvergenceReport {
        converges: matrices_cauchy && lambdas_cauchy,
        matrices_cauchy,
        lambdas_cauchy,
        equivalence_holds: matrices_cauchy == lambdas_cauchy,
        matrix_spread,
        lambda_spread,
        partial_products,
        lambda_products,
    })
}
