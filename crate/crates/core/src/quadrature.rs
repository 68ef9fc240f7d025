//! Gauss–Legendre rules and the tan-substitution quadrature for the Poisson
//! weight `dx/(1+x²)`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rayon::prelude::*;

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1].
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

impl GaussLegendre {
    /// Newton iteration on `P_n` from Tricomi's initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss–Legendre rule needs at least one node");
        let nf = n as f64;
        let half = n.div_ceil(2);
        let pairs: Vec<(f64, f64)> = (0..half)
            .into_par_iter()
            .map(|i| {
                let k = (i + 1) as f64;
                let theta = PI * (k - 0.25) / (nf + 0.5);
                let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
                for _ in 0..100 {
                    let (p, dp) = legendre(n, x);
                    let dx = p / dp;
                    x -= dx;
                    if dx.abs() <= 1e-16 {
                        break;
                    }
                }
                let (_, dp) = legendre(n, x);
                (x, 2.0 / ((1.0 - x * x) * dp * dp))
            })
            .collect();
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for (i, &(x, w)) in pairs.iter().enumerate() {
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = w;
            nodes[i] = -x;
            weights[i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫ₐᵇ f` with the rule mapped affinely onto [a, b].
    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(c + r * x))
            .sum::<f64>()
            * r
    }
}

/// Nodes of a quadrature rule in `θ ∈ (−π/2, π/2)` with `x = tan θ`.
#[derive(Clone, Debug, PartialEq)]
pub struct TanRule {
    pub theta: Vec<f64>,
    /// `tan θₖ`, computed as `cot(π/2 − |θₖ|)` near the ends so that nodes
    /// whose angle rounds to `±π/2` keep a finite, distinct abscissa.
    pub x: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Rule for `∫ g(θ) dθ` over `(−π/2, π/2)`; with `x = tan θ` this integrates
/// against `dx/(1+x²)` over the whole real line.
///
/// `clustering = p` composes Gauss–Legendre with `θ = (π/2)·φ(s)`, where
/// `φ' ∝ (1 − s²)^p` and `φ(±1) = ±1`. For `p ≥ 1` the Jacobian vanishes at
/// `θ = ±π/2`, damping integrands that oscillate without bound there
/// (`w(tan θ)` for coefficients with jumps). `p = 0` is plain Gauss–Legendre.
pub fn tan_rule(n: usize, clustering: u32) -> TanRule {
    let gl = GaussLegendre::new(n);
    let (co_phi, dphi) = sigmoid(clustering);
    let mut rule = TanRule { theta: Vec::with_capacity(n), x: Vec::with_capacity(n), weights: Vec::with_capacity(n) };
    for (&s, w) in gl.nodes.iter().zip(&gl.weights) {
        // gap = π/2 − |θ|, exact in 1 − |s|
        let gap = FRAC_PI_2 * co_phi(1.0 - s.abs());
        let theta = (FRAC_PI_2 - gap).copysign(s);
        let x = if gap < FRAC_PI_4 { (1.0 / gap.tan()).copysign(s) } else { theta.tan() };
        rule.theta.push(theta);
        rule.x.push(x);
        rule.weights.push(FRAC_PI_2 * w * dphi(s));
    }
    rule
}

type Map = fn(f64) -> f64;

/// `ψ(u) = 1 − φ(1 − u)` and `φ'`, where `φ'(s) = c_p (1 − s²)^p` and
/// `φ(1) = 1`. `ψ` is written in powers of `u` to keep relative accuracy
/// near the ends.
fn sigmoid(p: u32) -> (Map, Map) {
    match p {
        0 => (|u| u, |_| 1.0),
        1 => (|u| u * u * (3.0 - u) / 2.0, |s| 1.5 * (1.0 - s * s)),
        2 => (
            |u| u.powi(3) * (20.0 - 15.0 * u + 3.0 * u * u) / 8.0,
            |s| 15.0 / 8.0 * (1.0 - s * s).powi(2),
        ),
        _ => (
            |u| u.powi(4) * (70.0 - 84.0 * u + 35.0 * u * u - 5.0 * u.powi(3)) / 16.0,
            |s| 35.0 / 16.0 * (1.0 - s * s).powi(3),
        ),
    }
}

/// Adaptive composite 10-point Gauss–Legendre with bisection.
///
/// Returns the integral and the final error estimate.
pub fn integrate_adaptive(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let gl = GaussLegendre::new(10);
    fn recurse(gl: &GaussLegendre, f: &impl Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> (f64, f64) {
        let m = 0.5 * (a + b);
        let left = gl.integrate(a, m, f);
        let right = gl.integrate(m, b, f);
        let err = (left + right - whole).abs();
        if err <= tol || depth >= 40 {
            return (left + right, err);
        }
        let (l, el) = recurse(gl, f, a, m, left, 0.5 * tol, depth + 1);
        let (r, er) = recurse(gl, f, m, b, right, 0.5 * tol, depth + 1);
        (l + r, el + er)
    }
    if b <= a {
        return (0.0, 0.0);
    }
    let whole = gl.integrate(a, b, f);
    recurse(&gl, f, a, b, whole, tol, 0)
}

/// Adaptive integral over consecutive pieces `[p₀, p₁], [p₁, p₂], …` so that
/// jumps at the breakpoints do not spoil convergence. `f(t, lo, hi)` is
/// evaluated strictly inside `(lo, hi)`.
pub fn integrate_pieces(f: impl Fn(f64, f64, f64) -> f64, breaks: &[f64], tol: f64) -> (f64, f64) {
    let pieces = breaks.len().saturating_sub(1).max(1);
    breaks
        .windows(2)
        .map(|w| integrate_adaptive(&|t| f(t, w[0], w[1]), w[0], w[1], tol / pieces as f64))
        .fold((0.0, 0.0), |(s, e), (v, ev)| (s + v, e + ev))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_rules_match_tables() {
        let g = GaussLegendre::new(2);
        assert!((g.nodes[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((g.weights[0] - 1.0).abs() < 1e-15);
        let g = GaussLegendre::new(3);
        assert!((g.nodes[2] - 0.6f64.sqrt()).abs() < 1e-15);
        assert!(g.nodes[1].abs() < 1e-15);
        assert!((g.weights[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn exact_for_polynomials() {
        let g = GaussLegendre::new(8);
        // degree 15 is integrated exactly
        let v = g.integrate(-1.0, 2.0, |x| x.powi(15) + 3.0 * x.powi(4));
        let exact = (2f64.powi(16) - 1.0) / 16.0 + 3.0 * (32.0 + 1.0) / 5.0;
        assert!((v - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn large_rules_sum_to_two() {
        for n in [64, 1000, 4096] {
            let g = GaussLegendre::new(n);
            let s: f64 = g.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-12, "n={n} sum={s}");
            assert!(g.nodes.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn tan_rule_integrates_poisson_weight() {
        for p in 0..=3 {
            let TanRule { theta: th, x, weights: w } = tan_rule(256, p);
            // (1/π) ∫ dx/(1+x²) = 1 and (1/π) ∫ x²/(1+x²)² dx = 1/2
            let one: f64 = w.iter().sum::<f64>() / PI;
            assert!((one - 1.0).abs() < 1e-14, "p={p}");
            let half: f64 = th.iter().zip(&w).map(|(t, w)| w * t.sin().powi(2)).sum::<f64>() / PI;
            assert!((half - 0.5).abs() < 1e-14, "p={p}");
            assert!(th.iter().all(|t| t.abs() <= FRAC_PI_2));
            assert!(x.windows(2).all(|v| v[0] < v[1] && v[1].is_finite()));
            assert!(th.iter().zip(&x).all(|(t, x)| (x.atan() - t).abs() < 1e-15));
        }
    }

    #[test]
    fn sigmoid_maps_are_consistent() {
        for p in 0..=3 {
            let (co_phi, dphi) = sigmoid(p);
            assert!(co_phi(0.0) == 0.0 && (co_phi(1.0) - 1.0).abs() < 1e-15);
            let g = GaussLegendre::new(16);
            for s in [0.1, 0.7, 0.95] {
                assert!((g.integrate(s, 1.0, dphi) - co_phi(1.0 - s)).abs() < 1e-14, "p={p} s={s}");
            }
        }
    }

    #[test]
    fn adaptive_handles_kinks() {
        let (v, _) = integrate_adaptive(&|x: f64| x.abs().sqrt(), -1.0, 1.0, 1e-12);
        assert!((v - 4.0 / 3.0).abs() < 1e-10);
        let (v, _) = integrate_pieces(|t, _, _| if t < 0.5 { 1.0 } else { 3.0 }, &[0.0, 0.5, 1.0], 1e-13);
        assert!((v - 2.0).abs() < 1e-14);
    }
}
