use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jalg::{jay, mobius, ComplexMatrix2, C64};
use crate::quadrature::{tan_rule, TanRule};
use crate::system::{pdb_transfer, transfer, transfer_matrix, ArovProfile, IntegratorOptions, PdBHamiltonian};

/// Values with modulus above `1 + SCHUR_TOL` are rejected as non-Schur.
pub const SCHUR_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchurOptions {
    pub integrator: IntegratorOptions,
    /// Schur parameter `E` with `|E| ≤ 1`.
    pub e_param: C64,
    /// Largest `T` tried when `E ≠ 0`.
    pub t_cap: f64,
    /// Successive Möbius values closer than this count as Cauchy.
    pub cauchy_tol: f64,
    /// Endpoint clustering of the θ-rule, see [`tan_rule`].
    pub clustering: u32,
}

/// Default endpoint clustering of the θ-rule.
pub const DEFAULT_CLUSTERING: u32 = 2;

impl Default for SchurOptions {
    fn default() -> Self {
        Self { integrator: IntegratorOptions::default(), e_param: C64::new(0.0, 0.0), t_cap: 1e4, cauchy_tol: 1e-8, clustering: DEFAULT_CLUSTERING }
    }
}

/// Consecutive Cauchy steps required before accepting a limit.
const CAUCHY_RUN: usize = 3;

/// Schur spectral function `w(z) = lim_T mobius(𝔄(z,T), E)`.
///
/// The free tail multiplies `𝔄(z,T0)` by `diag(e^{iz·a_tail·s}, e^{−iz·a_tail·s})`,
/// so `mobius(𝔄(z,T0+s), E) = mobius(𝔄(z,T0), E·e^{2iz·a_tail·s})`. For `E = 0`
/// this is exact at `T0`; otherwise `s` is doubled until the values settle,
/// which happens only for `Im z > 0`.
pub fn schur_at(p: &ArovProfile, z: C64, opts: &SchurOptions) -> Result<C64> {
    let e = opts.e_param;
    if !(e.norm() <= 1.0) {
        return Err(Error::InvalidArgument(format!("|E| must be ≤ 1, got {}", e.norm())));
    }
    let m = transfer(p, z, p.t0, &opts.integrator)?.matrix;
    limit_from(&m, z, p.t0, p.a_tail, opts)
}

fn limit_from(m: &ComplexMatrix2, z: C64, t0: f64, a_tail: f64, opts: &SchurOptions) -> Result<C64> {
    let e = opts.e_param;
    if e == C64::new(0.0, 0.0) {
        return mobius(m, e);
    }
    let rot = |s: f64| e * (C64::new(0.0, 2.0 * a_tail * s) * z).exp();
    let mut s = 1.0;
    let mut prev = mobius(m, rot(s))?;
    let mut run = 0;
    while t0 + 2.0 * s <= opts.t_cap {
        s *= 2.0;
        let next = mobius(m, rot(s))?;
        run = if (next - prev).norm() < opts.cauchy_tol { run + 1 } else { 0 };
        prev = next;
        if run >= CAUCHY_RUN {
            return Ok(prev);
        }
    }
    Err(Error::NoConvergence(format!("mobius(𝔄({z}, T), E) not Cauchy up to T = {}", opts.t_cap)))
}

/// Disk fixed point of the Möbius flow generated by `K = H·j`, i.e. the root
/// of `k21·e² + (k22 − k11)·e − k12 = 0` with `|e| < 1`.
fn tail_fixed_point(h_tail: &ComplexMatrix2) -> Result<C64> {
    let k = *h_tail * jay();
    let (a, b, c) = (k.e21, k.e22 - k.e11, -k.e12);
    let roots = if a.norm() <= 1e-14 * k.norm() {
        vec![-c / b]
    } else {
        let d = (b * b - a * c * 4.0).sqrt();
        vec![(-b + d) / (a * 2.0), (-b - d) / (a * 2.0)]
    };
    roots
        .into_iter()
        .filter(|r| r.is_finite() && r.norm() < 1.0)
        .min_by(|x, y| x.norm().total_cmp(&y.norm()))
        .ok_or_else(|| Error::InvalidHamiltonian("tail has no fixed point inside the disk".into()))
}

/// Schur function from the Potapov–de Branges chain: `mobius(𝔅(z,T), e*)`
/// with `e*` the disk fixed point of the tail Hamiltonian.
pub fn pdb_schur_at(h: &PdBHamiltonian, z: C64, opts: &IntegratorOptions) -> Result<C64> {
    let tail = h.tail.ok_or_else(|| Error::InvalidHamiltonian("a tail is required to evaluate the limit".into()))?;
    let e_star = tail_fixed_point(&tail)?;
    let b = pdb_transfer(h, z, h.t_end(), opts)?.matrix;
    mobius(&b, e_star)
}

/// Samples of `w` at `x = tan θ` on the nodes of [`tan_rule`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchurGrid {
    pub theta: Vec<f64>,
    pub x: Vec<f64>,
    /// Quadrature weights in `θ`.
    pub weights: Vec<f64>,
    pub values: Vec<C64>,
    /// `1 − |w|²`; near the unit circle taken as `1/|𝔞₂₂|²`, which is equal
    /// on the real axis and free of cancellation.
    pub defect: Vec<f64>,
    pub w_at_i: C64,
    pub e_param: C64,
}

fn check_schur(w: C64) -> Result<()> {
    let r = w.norm();
    if !(r <= 1.0 + SCHUR_TOL) {
        return Err(Error::NotSchur(r));
    }
    Ok(())
}

impl SchurGrid {
    /// Grid of a given function, for testing the quadrature in isolation.
    pub fn synthetic(n: usize, w: impl Fn(f64) -> C64, w_at_i: C64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument("a grid needs at least two nodes".into()));
        }
        let TanRule { theta, x, weights } = tan_rule(n, DEFAULT_CLUSTERING);
        let values: Vec<C64> = x.iter().map(|&x| w(x)).collect();
        for v in values.iter().chain([&w_at_i]) {
            check_schur(*v)?;
        }
        let defect = values.iter().map(|v| 1.0 - v.norm_sqr()).collect();
        Ok(Self { theta, x, weights, values, defect, w_at_i, e_param: C64::new(0.0, 0.0) })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Rows `theta, x, Re w, Im w`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("theta,x,re_w,im_w\n");
        for k in 0..self.len() {
            let _ = writeln!(s, "{:.17e},{:.17e},{:.17e},{:.17e}", self.theta[k], self.x[k], self.values[k].re, self.values[k].im);
        }
        s
    }
}

/// Evaluates the Schur function on an `n`-node grid and at `z = i`.
///
/// On the real axis `1 − |w|² = 1/|𝔞₂₂|²` exactly, which is stored as the
/// defect to avoid cancellation when `|w|` is close to 1.
pub fn schur_grid(p: &ArovProfile, n: usize, opts: &SchurOptions) -> Result<SchurGrid> {
    if n < 2 {
        return Err(Error::InvalidArgument("a grid needs at least two nodes".into()));
    }
    opts.integrator.validate()?;
    let TanRule { theta, x, weights } = tan_rule(n, opts.clustering);
    let evals: Vec<Result<(C64, f64)>> = x
        .par_iter()
        .map(|&x| {
            let z = C64::new(x, 0.0);
            let m = transfer_matrix(p, z, p.t0, &opts.integrator);
            let w = limit_from(&m, z, p.t0, p.a_tail, opts)?;
            check_schur(w)?;
            // both forms are exact; pick the one without cancellation
            let d = if w.norm_sqr() < 0.5 { 1.0 - w.norm_sqr() } else { 1.0 / m.e22.norm_sqr() };
            Ok((w, d))
        })
        .collect();
    let mut values = Vec::with_capacity(n);
    let mut defect = Vec::with_capacity(n);
    for r in evals {
        let (w, d) = r?;
        values.push(w);
        defect.push(d);
    }
    let w_at_i = schur_at(p, C64::new(0.0, 1.0), opts)?;
    check_schur(w_at_i)?;
    Ok(SchurGrid { theta, x, weights, values, defect, w_at_i, e_param: opts.e_param })
}
