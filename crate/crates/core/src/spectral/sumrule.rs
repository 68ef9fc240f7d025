use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::entropy::{entropy, entropy_of_grid, EntropyOptions, EntropyReport};
use super::schur::{schur_grid, SchurGrid, SchurOptions};
use crate::error::{Error, Result};
use crate::jalg::C64;
use crate::quadrature::tan_rule;
use crate::system::{transfer, transfer_at_i, transfer_matrix, ArovProfile, IntegratorOptions};

/// `σ_T = ∫₀ᵀ √(a² − b² − c²) dt`.
pub fn sigma_type(p: &ArovProfile, t_end: f64) -> Result<f64> {
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::InvalidProfile(format!("T must be finite and ≥ 0, got {t_end}")));
    }
    Ok(p.integrate(t_end, |a, b, c| (a * a - b * b - c * c).max(0.0).sqrt()))
}

/// `∫₀^∞ (tr A − 2√det A) dt`; the integrand vanishes on the free tail.
pub fn coefficient_integral(p: &ArovProfile) -> f64 {
    p.integrate(p.t0, |a, b, c| 2.0 * a - 2.0 * (a * a - b * b - c * c).max(0.0).sqrt())
}

/// `|(1/π)∫ log|𝔞₂₂(x,T)| dx/(1+x²) − (log 𝔞₂₂(i,T) − σ_T)|` with an
/// `n`-node tan-substitution rule.
pub fn mean_log_a22_check(p: &ArovProfile, t_end: f64, n: usize, opts: &SchurOptions) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two nodes".into()));
    }
    let rule = tan_rule(n, opts.clustering);
    let opts = &opts.integrator;
    let terms: Vec<f64> = rule
        .x
        .par_iter()
        .zip(&rule.weights)
        .map(|(&x, w)| w * transfer_matrix(p, C64::new(x, 0.0), t_end, opts).e22.norm().ln())
        .collect();
    let lhs = terms.iter().sum::<f64>() / PI;
    let at_i = transfer_at_i(p, t_end, opts)?;
    let rhs = at_i.matrix.e22.re.ln() - sigma_type(p, t_end)?;
    Ok((lhs - rhs).abs())
}

/// Density `(1 − |w|²)/|1 + w|²` of the absolutely continuous part of the
/// measure in the Herglotz representation of `(1 − w)/(1 + w)`.
pub fn herglotz_density(w: C64) -> Result<f64> {
    let den = (C64::new(1.0, 0.0) + w).norm_sqr();
    if den <= 1e-28 {
        return Err(Error::PoleHit { denominator: den.sqrt() });
    }
    Ok((1.0 - w.norm_sqr()) / den)
}

/// Imaginary parts of `w(i)` below this count as zero.
pub const REAL_W_TOL: f64 = 1e-10;

/// Residual of `−(1/π)∫ log μ′ dx/(1+x²) = ℐ(w) + 2 log(1 + w(i))`, both
/// sides on the same `n`-node grid.
pub fn herglotz_identity_check(p: &ArovProfile, n: usize, opts: &SchurOptions) -> Result<f64> {
    let g = schur_grid(p, n, opts)?;
    herglotz_residual(&g)
}

pub(crate) fn herglotz_residual(g: &SchurGrid) -> Result<f64> {
    let wi = g.w_at_i;
    if wi.im.abs() > REAL_W_TOL || wi.re <= -1.0 {
        return Err(Error::ComplexWAtI { re: wi.re, im: wi.im });
    }
    let mut lhs = 0.0;
    for ((wt, w), d) in g.weights.iter().zip(&g.values).zip(&g.defect) {
        // log μ′ = log(1 − |w|²) − 2 log|1 + w|
        let log_mu = d.ln() - 2.0 * (C64::new(1.0, 0.0) + w).norm().ln();
        lhs -= wt * log_mu;
    }
    lhs /= PI;
    let (ent, _) = entropy_of_grid(g, 0.0);
    let rhs = ent + 2.0 * (1.0 + wi.re).ln();
    Ok((lhs - rhs).abs())
}

/// One inequality evaluated at a point of the upper half-plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub z: C64,
    pub value: f64,
    pub holds: bool,
}

/// Slack allowed in the bound checks.
pub const BOUND_TOL: f64 = 1e-8;

/// `|𝔞₂₁/𝔞₂₂|² + |1/𝔞₂₂|² ≤ 1` at `i, 2i` and, with `v = 𝔞₁₂/𝔞₂₂` and
/// `φ = e^{−iσz}/𝔞₂₂`, `|v|² + |φ|² ≤ 1` at `i, 1 + i`; all at `T0`.
pub fn bound_checks(p: &ArovProfile, opts: &IntegratorOptions) -> Result<Vec<BoundCheck>> {
    let sigma = sigma_type(p, p.t0)?;
    let mut out = Vec::new();
    let mut push = |name: &str, z: C64, value: f64| {
        out.push(BoundCheck { name: name.into(), z, value, holds: value <= 1.0 + BOUND_TOL });
    };
    for z in [C64::new(0.0, 1.0), C64::new(0.0, 2.0)] {
        let m = transfer(p, z, p.t0, opts)?.matrix;
        push("a21_over_a22", z, (m.e21 / m.e22).norm_sqr() + m.e22.norm_sqr().recip());
    }
    for z in [C64::new(0.0, 1.0), C64::new(1.0, 1.0)] {
        let m = transfer(p, z, p.t0, opts)?.matrix;
        let phi = (C64::new(0.0, -sigma) * z).exp() / m.e22;
        push("v_and_phi", z, (m.e12 / m.e22).norm_sqr() + phi.norm_sqr());
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumRuleOptions {
    pub schur: SchurOptions,
    pub entropy: EntropyOptions,
    /// Points of the `σ_T` series on `[0, T0]`.
    pub sigma_points: usize,
    /// Extra points past `T0`, spaced by this length.
    pub tail_spacing: f64,
}

impl Default for SumRuleOptions {
    fn default() -> Self {
        Self { schur: SchurOptions::default(), entropy: EntropyOptions::default(), sigma_points: 11, tail_spacing: 1.0 }
    }
}

/// `2(∫₀ᵀ a − σ_T)`, which is constant once `T ≥ T0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaPoint {
    #[serde(rename = "T")]
    pub t: f64,
    pub sigma: f64,
    pub integral_a: f64,
    pub twice_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SumRuleReport {
    pub lhs_entropy: f64,
    pub rhs_coefficient_integral: f64,
    pub abs_diff: f64,
    pub rel_diff: f64,
    pub sigma_series: Vec<SigmaPoint>,
    pub w_at_i: C64,
    pub max_abs_w: f64,
    pub bounds: Vec<BoundCheck>,
    pub entropy: EntropyReport,
    pub options: SumRuleOptions,
    /// Finest grid used, kept for export.
    #[serde(skip)]
    pub grid: Option<SchurGrid>,
}

impl SumRuleReport {
    /// `|lhs − rhs| ≤ max(abs_tol, rel_tol·rhs)`.
    pub fn agrees(&self, abs_tol: f64, rel_tol: f64) -> bool {
        self.abs_diff <= abs_tol.max(rel_tol * self.rhs_coefficient_integral)
    }
}

/// Entropy of the Schur function against `∫ (tr A − 2√det A) dt`.
pub fn sumrule(p: &ArovProfile, opts: &SumRuleOptions) -> Result<SumRuleReport> {
    p.validate()?;
    let rhs = coefficient_integral(p);
    let mut finest: Option<SchurGrid> = None;
    let report = entropy(
        |n| {
            let g = schur_grid(p, n, &opts.schur)?;
            finest = Some(g.clone());
            Ok(g)
        },
        &opts.entropy,
    )?;
    let grid = finest.expect("entropy evaluates at least one grid");
    let lhs = report.value;
    let k = opts.sigma_points.max(2);
    let mut ts: Vec<f64> = (0..k).map(|i| p.t0 * i as f64 / (k - 1) as f64).collect();
    ts.extend([1.0, 2.0].map(|j| p.t0 + j * opts.tail_spacing));
    let sigma_series = ts
        .iter()
        .map(|&t| {
            let sigma = sigma_type(p, t)?;
            let integral_a = p.integral_a(t);
            Ok(SigmaPoint { t, sigma, integral_a, twice_gap: 2.0 * (integral_a - sigma) })
        })
        .collect::<Result<Vec<_>>>()?;
    let abs_diff = (lhs - rhs).abs();
    Ok(SumRuleReport {
        lhs_entropy: lhs,
        rhs_coefficient_integral: rhs,
        abs_diff,
        rel_diff: if rhs > 0.0 { abs_diff / rhs } else { abs_diff },
        sigma_series,
        w_at_i: grid.w_at_i,
        max_abs_w: grid.max_abs(),
        bounds: bound_checks(p, &opts.schur.integrator)?,
        entropy: report,
        options: *opts,
        grid: Some(grid),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::Coefficient;

    fn step_profile() -> ArovProfile {
        ArovProfile::new(Coefficient::constant(1.0), Coefficient::step(vec![0.0, 1.0], vec![0.6]), Coefficient::zero(), 1.0, 1.0).unwrap()
    }

    #[test]
    fn sigma_examples() {
        assert!((sigma_type(&ArovProfile::free(1.0, 1.0), 2.5).unwrap() - 2.5).abs() < 1e-14);
        let p = step_profile();
        assert!((sigma_type(&p, 1.0).unwrap() - 0.8).abs() < 1e-14);
        assert!(sigma_type(&p, 1.0).unwrap() <= p.integral_a(1.0));
    }

    #[test]
    fn herglotz_density_examples() {
        assert_eq!(herglotz_density(C64::new(0.0, 0.0)).unwrap(), 1.0);
        assert!((herglotz_density(C64::new(0.6, 0.0)).unwrap() - 0.25).abs() < 1e-15);
        assert!(herglotz_density(C64::new(0.0, 0.999_999)).unwrap() < 1e-5);
        assert!(matches!(herglotz_density(C64::new(-1.0, 0.0)), Err(Error::PoleHit { .. })));
    }

    #[test]
    fn free_profile_mean_log_is_exact() {
        let r = mean_log_a22_check(&ArovProfile::free(1.0, 1.0), 1.0, 64, &SchurOptions::default()).unwrap();
        assert!(r < 1e-12);
    }

    #[test]
    fn bounds_hold_for_step_profile() {
        for b in bound_checks(&step_profile(), &IntegratorOptions::default()).unwrap() {
            assert!(b.holds, "{b:?}");
        }
    }

    #[test]
    fn free_profile_sum_rule() {
        let o = SumRuleOptions { entropy: EntropyOptions { start_nodes: 64, ..Default::default() }, ..Default::default() };
        let r = sumrule(&ArovProfile::free(1.0, 1.0), &o).unwrap();
        assert_eq!(r.lhs_entropy, 0.0);
        assert_eq!(r.rhs_coefficient_integral, 0.0);
    }
}
