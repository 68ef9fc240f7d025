use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jalg::{ComplexMatrix2, C64};
use crate::quadrature::integrate_pieces;

/// Tolerance below which a slightly negative `a² − b² − c²` is clamped to 0.
pub const PSD_CLAMP: f64 = 1e-12;

/// Which one-sided limit to take at a discontinuity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interp {
    /// `values[k]` on `[t[k], t[k+1])`; one value fewer than sample points.
    Constant,
    /// Linear between consecutive points; a repeated `t` encodes a jump.
    #[default]
    Linear,
}

/// A real coefficient function on `[0, T0]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Coefficient {
    Constant {
        value: f64,
    },
    /// `values[k]` on `[knots[k], knots[k+1])`, zero outside the knots.
    Step {
        knots: Vec<f64>,
        values: Vec<f64>,
    },
    /// Raised cosine `amplitude·(1 − cos(2π(t − start)/(end − start)))/2` on
    /// `[start, end]`, zero elsewhere.
    Bump {
        start: f64,
        end: f64,
        amplitude: f64,
    },
    /// Sampled values, zero outside `[t[0], t[last]]`.
    Samples {
        t: Vec<f64>,
        values: Vec<f64>,
        #[serde(default)]
        interp: Interp,
    },
}

/// Index `k` of the interval `[xs[k], xs[k+1]]` holding `t`, resolving
/// coincident points toward `side`. `None` outside the range.
fn locate(xs: &[f64], t: f64, side: Side) -> Option<usize> {
    if xs.len() < 2 {
        return None;
    }
    let n = xs.len();
    match side {
        Side::Right => {
            let k = xs.partition_point(|&x| x <= t);
            (k >= 1 && k < n).then(|| k - 1)
        }
        Side::Left => {
            let k = xs.partition_point(|&x| x < t);
            (k >= 1 && k < n).then(|| k - 1)
        }
    }
}

impl Coefficient {
    pub fn zero() -> Self {
        Coefficient::Constant { value: 0.0 }
    }

    pub fn constant(value: f64) -> Self {
        Coefficient::Constant { value }
    }

    pub fn step(knots: Vec<f64>, values: Vec<f64>) -> Self {
        Coefficient::Step { knots, values }
    }

    /// Samples on the uniform grid `t0, t0 + dt, …`.
    pub fn uniform(t0: f64, dt: f64, values: Vec<f64>, interp: Interp) -> Self {
        let n = match interp {
            Interp::Constant => values.len() + 1,
            Interp::Linear => values.len(),
        };
        let t = (0..n).map(|k| t0 + dt * k as f64).collect();
        Coefficient::Samples { t, values, interp }
    }

    /// Value at `t ∈ [0, T0]`, taking the `side` limit at jumps.
    pub fn eval(&self, t: f64, side: Side) -> f64 {
        match self {
            Coefficient::Constant { value } => *value,
            Coefficient::Step { knots, values } => locate(knots, t, side).map_or(0.0, |k| values[k]),
            Coefficient::Bump { start, end, amplitude } => {
                let inside = match side {
                    Side::Right => t >= *start && t < *end,
                    Side::Left => t > *start && t <= *end,
                };
                if inside {
                    amplitude * 0.5 * (1.0 - (2.0 * PI * (t - start) / (end - start)).cos())
                } else {
                    0.0
                }
            }
            Coefficient::Samples { t: ts, values, interp } => {
                let Some(k) = locate(ts, t, side) else { return 0.0 };
                match interp {
                    Interp::Constant => values[k],
                    Interp::Linear => {
                        let (t0, t1) = (ts[k], ts[k + 1]);
                        if t1 == t0 {
                            return if side == Side::Left { values[k] } else { values[k + 1] };
                        }
                        let s = (t - t0) / (t1 - t0);
                        values[k] + s * (values[k + 1] - values[k])
                    }
                }
            }
        }
    }

    /// Points where the coefficient may fail to be smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Coefficient::Constant { .. } => vec![],
            Coefficient::Step { knots, .. } => knots.clone(),
            Coefficient::Bump { start, end, .. } => vec![*start, *end],
            Coefficient::Samples { t, .. } => t.clone(),
        }
    }

    /// Constant between consecutive breakpoints.
    pub fn is_piecewise_constant(&self) -> bool {
        match self {
            Coefficient::Constant { .. } | Coefficient::Step { .. } => true,
            Coefficient::Bump { amplitude, .. } => *amplitude == 0.0,
            Coefficient::Samples { interp, .. } => *interp == Interp::Constant,
        }
    }

    fn check(&self, name: &str) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidProfile(format!("coefficient {name}: {msg}")));
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match self {
            Coefficient::Constant { value } if !value.is_finite() => bad("non-finite value".into()),
            Coefficient::Constant { .. } => Ok(()),
            Coefficient::Step { knots, values } => {
                if knots.len() < 2 || values.len() + 1 != knots.len() {
                    return bad(format!("{} knots need {} values, got {}", knots.len(), knots.len().saturating_sub(1), values.len()));
                }
                if !finite(knots) || !finite(values) {
                    return bad("non-finite entry".into());
                }
                if knots.windows(2).any(|w| w[1] <= w[0]) {
                    return bad("knots must be strictly increasing".into());
                }
                Ok(())
            }
            Coefficient::Bump { start, end, amplitude } => {
                if !(start.is_finite() && end.is_finite() && amplitude.is_finite()) || end <= start {
                    return bad(format!("bump needs finite start < end, got [{start}, {end}]"));
                }
                Ok(())
            }
            Coefficient::Samples { t, values, interp } => {
                let need = match interp {
                    Interp::Constant => t.len().saturating_sub(1),
                    Interp::Linear => t.len(),
                };
                if t.len() < 2 || values.len() != need {
                    return bad(format!("{} sample points need {need} values, got {}", t.len(), values.len()));
                }
                if !finite(t) || !finite(values) {
                    return bad("non-finite entry".into());
                }
                if t.windows(2).any(|w| w[1] < w[0]) {
                    return bad("sample times must be non-decreasing".into());
                }
                if t.windows(3).any(|w| w[0] == w[2]) {
                    return bad("a sample time may repeat at most twice".into());
                }
                if *interp == Interp::Constant && t.windows(2).any(|w| w[1] == w[0]) {
                    return bad("piecewise-constant samples need distinct times".into());
                }
                Ok(())
            }
        }
    }
}

/// A contiguous interval `[lo, hi]` on which the coefficients are smooth.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    /// All coefficients are constant on the interval.
    pub constant: bool,
}

impl Piece {
    /// Side to use when evaluating at `t ∈ [lo, hi]` so that endpoint values
    /// are the limits from inside the piece.
    pub fn side(&self, t: f64) -> Side {
        if t > 0.5 * (self.lo + self.hi) {
            Side::Left
        } else {
            Side::Right
        }
    }
}

/// Coefficients `(a, b, c)` of the canonical system in the Arov gauge on
/// `[0, T0]`, followed by the free tail `a = a_tail`, `b = c = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArovProfile {
    pub a: Coefficient,
    pub b: Coefficient,
    pub c: Coefficient,
    #[serde(rename = "T0")]
    pub t0: f64,
    pub a_tail: f64,
}

impl ArovProfile {
    pub fn new(a: Coefficient, b: Coefficient, c: Coefficient, t0: f64, a_tail: f64) -> Result<Self> {
        let p = Self { a, b, c, t0, a_tail };
        p.validate()?;
        Ok(p)
    }

    /// `a = a_tail` everywhere, `b = c = 0`, nontrivial part `[0, t0]`.
    pub fn free(a_tail: f64, t0: f64) -> Self {
        Self {
            a: Coefficient::constant(a_tail),
            b: Coefficient::zero(),
            c: Coefficient::zero(),
            t0,
            a_tail,
        }
    }

    /// Checks `a ≥ 0` and `a² − b² − c² ≥ −PSD_CLAMP` on a dense scan of
    /// every piece, including one-sided endpoint values.
    pub fn validate(&self) -> Result<()> {
        if !(self.t0.is_finite() && self.t0 >= 0.0) {
            return Err(Error::InvalidProfile(format!("T0 must be finite and ≥ 0, got {}", self.t0)));
        }
        if !(self.a_tail.is_finite() && self.a_tail > 0.0) {
            return Err(Error::InvalidProfile(format!("a_tail must be positive, got {}", self.a_tail)));
        }
        self.a.check("a")?;
        self.b.check("b")?;
        self.c.check("c")?;
        const SCAN: usize = 64;
        for piece in self.pieces(self.t0) {
            for k in 0..=SCAN {
                let t = piece.lo + (piece.hi - piece.lo) * k as f64 / SCAN as f64;
                let (a, b, c) = self.coeffs(t, piece.side(t));
                if a < 0.0 {
                    return Err(Error::InvalidProfile(format!("a({t}) = {a} < 0")));
                }
                let d = a * a - b * b - c * c;
                if d < -PSD_CLAMP {
                    return Err(Error::InvalidProfile(format!("A({t}) is not PSD: a² − b² − c² = {d:e}")));
                }
            }
        }
        Ok(())
    }

    /// `(a, b, c)` at `t ≥ 0`; the tail starts at `T0`.
    pub fn coeffs(&self, t: f64, side: Side) -> (f64, f64, f64) {
        let in_tail = match side {
            Side::Right => t >= self.t0,
            Side::Left => t > self.t0,
        };
        if in_tail {
            (self.a_tail, 0.0, 0.0)
        } else {
            (self.a.eval(t, side), self.b.eval(t, side), self.c.eval(t, side))
        }
    }

    /// `√(a² − b² − c²)` with tiny negatives clamped to 0.
    pub fn sqrt_det(&self, t: f64, side: Side) -> f64 {
        let (a, b, c) = self.coeffs(t, side);
        (a * a - b * b - c * c).max(0.0).sqrt()
    }

    /// Sorted breakpoints in `[0, T0]`, always containing both ends.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = [&self.a, &self.b, &self.c]
            .iter()
            .flat_map(|c| c.breakpoints())
            .filter(|&t| t > 0.0 && t < self.t0)
            .collect();
        pts.push(0.0);
        pts.push(self.t0);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Smooth pieces covering `[0, t_end]`; beyond `T0` a single constant piece.
    pub fn pieces(&self, t_end: f64) -> Vec<Piece> {
        let constant = self.a.is_piecewise_constant() && self.b.is_piecewise_constant() && self.c.is_piecewise_constant();
        let bp = self.breakpoints();
        let mut out: Vec<Piece> = bp
            .windows(2)
            .filter(|w| w[0] < t_end)
            .map(|w| Piece { lo: w[0], hi: w[1].min(t_end), constant })
            .collect();
        if t_end > self.t0 {
            out.push(Piece { lo: self.t0, hi: t_end, constant: true });
        }
        out
    }

    /// `∫₀ᵀ f(t) dt` for a pointwise function of the coefficients, split at
    /// the breakpoints; exact on the tail.
    pub fn integrate(&self, t_end: f64, f: impl Fn(f64, f64, f64) -> f64) -> f64 {
        let upto = t_end.min(self.t0);
        let mut bp: Vec<f64> = self.breakpoints().into_iter().filter(|&t| t < upto).collect();
        bp.push(upto);
        let (body, _) = integrate_pieces(
            |t, lo, hi| {
                let side = if t > 0.5 * (lo + hi) { Side::Left } else { Side::Right };
                let (a, b, c) = self.coeffs(t, side);
                f(a, b, c)
            },
            &bp,
            1e-13,
        );
        let tail = (t_end - self.t0).max(0.0) * f(self.a_tail, 0.0, 0.0);
        body + tail
    }

    /// `∫₀ᵀ a dt`.
    pub fn integral_a(&self, t_end: f64) -> f64 {
        self.integrate(t_end, |a, _, _| a)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json(&s)
    }
}

/// `A = [[a, b+ic], [b−ic, a]]` and `B = [[0, b+ic], [−b+ic, 0]]` at `t`.
pub fn coeff_matrices(p: &ArovProfile, t: f64) -> Result<(ComplexMatrix2, ComplexMatrix2)> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("t must be ≥ 0, got {t}")));
    }
    coeff_matrices_at(p, t, Side::Right)
}

pub(crate) fn coeff_matrices_at(p: &ArovProfile, t: f64, side: Side) -> Result<(ComplexMatrix2, ComplexMatrix2)> {
    let (a, b, c) = p.coeffs(t, side);
    let d = a * a - b * b - c * c;
    if a < 0.0 || d < -PSD_CLAMP {
        return Err(Error::InvalidProfile(format!("A({t}) is not PSD: a = {a}, a² − b² − c² = {d:e}")));
    }
    Ok(matrices_from(a, b, c))
}

pub(crate) fn matrices_from(a: f64, b: f64, c: f64) -> (ComplexMatrix2, ComplexMatrix2) {
    let bc = C64::new(b, c);
    let a_m = ComplexMatrix2::new(a.into(), bc, bc.conj(), a.into());
    let b_m = ComplexMatrix2::new(C64::new(0.0, 0.0), bc, -bc.conj(), C64::new(0.0, 0.0));
    (a_m, b_m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jalg::jay;

    fn step_profile() -> ArovProfile {
        ArovProfile::new(
            Coefficient::constant(1.0),
            Coefficient::step(vec![0.0, 1.0], vec![0.6]),
            Coefficient::zero(),
            1.0,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn coefficient_matrices_examples() {
        let (a, b) = coeff_matrices(&ArovProfile::free(1.0, 1.0), 0.5).unwrap();
        assert_eq!(a, ComplexMatrix2::identity());
        assert_eq!(b, ComplexMatrix2::zero());

        let (a, b) = coeff_matrices(&step_profile(), 0.5).unwrap();
        assert_eq!(a, ComplexMatrix2::real(1.0, 0.6, 0.6, 1.0));
        assert_eq!(b, ComplexMatrix2::real(0.0, 0.6, -0.6, 0.0));
        assert_eq!((a * jay()).trace(), C64::new(0.0, 0.0));
        assert_eq!((b * jay()).trace(), C64::new(0.0, 0.0));
        assert_eq!((a + b).e21, C64::new(0.0, 0.0));
    }

    #[test]
    fn tail_starts_at_t0() {
        let p = step_profile();
        assert_eq!(p.coeffs(1.0, Side::Left), (1.0, 0.6, 0.0));
        assert_eq!(p.coeffs(1.0, Side::Right), (1.0, 0.0, 0.0));
        assert_eq!(p.coeffs(7.0, Side::Right), (1.0, 0.0, 0.0));
    }

    #[test]
    fn psd_validation() {
        let bad = ArovProfile::new(
            Coefficient::constant(1.0),
            Coefficient::step(vec![0.0, 1.0], vec![1.2]),
            Coefficient::zero(),
            1.0,
            1.0,
        );
        assert!(matches!(bad, Err(Error::InvalidProfile(_))));
        // a² − b² = −1e−13 is clamped, not rejected
        let b = (1.0f64 + 1e-13).sqrt();
        let ok = ArovProfile::new(Coefficient::constant(1.0), Coefficient::constant(b), Coefficient::zero(), 1.0, 1.0).unwrap();
        assert_eq!(ok.sqrt_det(0.5, Side::Right), 0.0);
        assert!(ArovProfile::new(Coefficient::constant(1.0), Coefficient::zero(), Coefficient::zero(), 1.0, 0.0).is_err());
    }

    #[test]
    fn linear_samples_with_jump() {
        let c = Coefficient::Samples { t: vec![0.0, 1.0, 1.0, 2.0], values: vec![0.0, 1.0, 5.0, 7.0], interp: Interp::Linear };
        assert_eq!(c.eval(0.5, Side::Right), 0.5);
        assert_eq!(c.eval(1.0, Side::Left), 1.0);
        assert_eq!(c.eval(1.0, Side::Right), 5.0);
        assert_eq!(c.eval(1.5, Side::Left), 6.0);
        assert_eq!(c.eval(2.5, Side::Left), 0.0);
    }

    #[test]
    fn uniform_constant_samples() {
        let c = Coefficient::uniform(0.0, 0.5, vec![1.0, 2.0], Interp::Constant);
        assert_eq!(c.eval(0.25, Side::Right), 1.0);
        assert_eq!(c.eval(0.5, Side::Right), 2.0);
        assert_eq!(c.eval(0.5, Side::Left), 1.0);
        assert!(c.is_piecewise_constant());
    }

    #[test]
    fn bump_integral() {
        let p = ArovProfile::new(
            Coefficient::Bump { start: 0.0, end: 2.0, amplitude: 3.0 },
            Coefficient::zero(),
            Coefficient::zero(),
            2.0,
            1.0,
        )
        .unwrap();
        // mean of the raised cosine is amplitude/2
        assert!((p.integral_a(2.0) - 3.0).abs() < 1e-13);
        assert!((p.integral_a(3.5) - 4.5).abs() < 1e-13);
    }

    #[test]
    fn json_round_trip() {
        let p = step_profile();
        let s = p.to_json();
        assert!(s.contains("\"T0\""));
        assert!(s.contains("\"kind\": \"step\""));
        assert_eq!(ArovProfile::from_json(&s).unwrap(), p);
        assert!(matches!(ArovProfile::from_json("{"), Err(Error::Parse(_))));
    }

    #[test]
    fn pieces_cover_range() {
        let p = step_profile();
        let ps = p.pieces(3.0);
        assert_eq!(ps.len(), 2);
        assert_eq!((ps[0].lo, ps[0].hi), (0.0, 1.0));
        assert_eq!((ps[1].lo, ps[1].hi), (1.0, 3.0));
        let ps = p.pieces(0.5);
        assert_eq!(ps.len(), 1);
        assert_eq!(ps[0].hi, 0.5);
    }
}
