use std::f64::consts::PI;

use serde::{Deserialize, Serialize, Serializer};

use super::schur::SchurGrid;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyOptions {
    pub start_nodes: usize,
    pub max_nodes: usize,
    /// Refinement stops once successive estimates differ by less than this.
    pub tol: f64,
    /// `1 − |w|²` below this is clamped and counted.
    pub floor: f64,
}

impl Default for EntropyOptions {
    fn default() -> Self {
        Self { start_nodes: 2048, max_nodes: 16384, tol: 1e-6, floor: 1e-15 }
    }
}

impl EntropyOptions {
    pub fn validate(&self) -> Result<()> {
        if self.start_nodes < 2 || self.max_nodes < self.start_nodes {
            return Err(Error::InvalidArgument(format!("need 2 ≤ start_nodes ≤ max_nodes, got {} and {}", self.start_nodes, self.max_nodes)));
        }
        if !(self.tol > 0.0 && self.floor > 0.0) {
            return Err(Error::InvalidArgument("entropy tolerances must be positive".into()));
        }
        Ok(())
    }
}

fn finite_or_null<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

/// Entropy `(1/π)∫ log(1/(1−|w|²)) dx/(1+x²)` with its refinement history.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyReport {
    /// `+∞` (serialized as `null`) when `infinite` is set.
    #[serde(serialize_with = "finite_or_null")]
    pub value: f64,
    pub infinite: bool,
    pub converged: bool,
    pub node_counts: Vec<usize>,
    pub estimates: Vec<f64>,
    pub clamp_counts: Vec<usize>,
    pub options: EntropyOptions,
}

/// One quadrature estimate on a fixed grid: `(value, clamped nodes)`.
pub fn entropy_of_grid(g: &SchurGrid, floor: f64) -> (f64, usize) {
    let mut clamps = 0;
    let mut sum = 0.0;
    for (w, d) in g.weights.iter().zip(&g.defect) {
        let d = if *d < floor {
            clamps += 1;
            floor
        } else {
            *d
        };
        sum += w * -d.ln();
    }
    ((sum / PI).max(0.0), clamps)
}

/// Doubles the node count from `start_nodes` until successive estimates
/// differ by less than `tol` or `max_nodes` is reached.
///
/// Without convergence the report is flagged infinite when the clamp count
/// grew at every refinement; otherwise it carries the last estimate with
/// `converged = false`.
pub fn entropy(mut grid_at: impl FnMut(usize) -> Result<SchurGrid>, opts: &EntropyOptions) -> Result<EntropyReport> {
    opts.validate()?;
    let mut report = EntropyReport {
        value: 0.0,
        infinite: false,
        converged: false,
        node_counts: vec![],
        estimates: vec![],
        clamp_counts: vec![],
        options: *opts,
    };
    let mut n = opts.start_nodes;
    loop {
        let g = grid_at(n)?;
        if g.is_empty() {
            return Err(Error::InvalidArgument("empty grid".into()));
        }
        let (v, clamps) = entropy_of_grid(&g, opts.floor);
        report.node_counts.push(n);
        report.estimates.push(v);
        report.clamp_counts.push(clamps);
        let k = report.estimates.len();
        if k >= 2 && (report.estimates[k - 1] - report.estimates[k - 2]).abs() < opts.tol {
            report.converged = true;
            break;
        }
        if n * 2 > opts.max_nodes {
            break;
        }
        n *= 2;
    }
    let last = *report.estimates.last().expect("at least one estimate");
    report.value = last;
    if !report.converged {
        let c = &report.clamp_counts;
        if c.len() >= 2 && c.windows(2).all(|w| w[1] > w[0]) {
            report.infinite = true;
            report.value = f64::INFINITY;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jalg::C64;

    fn opts(start: usize) -> EntropyOptions {
        EntropyOptions { start_nodes: start, max_nodes: 4096, ..Default::default() }
    }

    #[test]
    fn zero_function_has_zero_entropy() {
        let r = entropy(|n| SchurGrid::synthetic(n, |_| C64::new(0.0, 0.0), C64::new(0.0, 0.0)), &opts(64)).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.converged && !r.infinite);
    }

    #[test]
    fn constant_modulus() {
        let r = entropy(|n| SchurGrid::synthetic(n, |_| C64::new(0.6, 0.0), C64::new(0.6, 0.0)), &opts(64)).unwrap();
        assert!((r.value - (1.0f64 / 0.64).ln()).abs() < 1e-13);
    }

    #[test]
    fn rotation_invariance() {
        let f = |x: f64| C64::new(0.5 / (1.0 + x * x), 0.3 * x / (1.0 + x * x));
        let (a, _) = entropy_of_grid(&SchurGrid::synthetic(256, f, C64::new(0.0, 0.0)).unwrap(), 1e-15);
        let rot = C64::from_polar(1.0, 1.234);
        let (b, _) = entropy_of_grid(&SchurGrid::synthetic(256, |x| f(x) * rot, C64::new(0.0, 0.0)).unwrap(), 1e-15);
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn divergent_entropy_is_flagged() {
        // 1 − |w|² = exp(−1/x²), so the integrand behaves like 1/x² at 0
        let f = |x: f64| C64::new((1.0 - (-1.0 / (x * x)).exp()).sqrt(), 0.0);
        let r = entropy(|n| SchurGrid::synthetic(n, f, C64::new(0.0, 0.0)), &EntropyOptions { start_nodes: 64, max_nodes: 1024, ..Default::default() }).unwrap();
        assert!(r.infinite, "{r:?}");
        assert!(serde_json::to_string(&r).unwrap().contains("\"value\":null"));
    }
}
