//! Fixed-step integration of right-acting linear systems `Y' = Y·M(t)` on
//! piecewise-smooth generators.

use serde::{Deserialize, Serialize};

use super::profile::Piece;
use crate::error::{Error, Result};
use crate::jalg::{ComplexMatrix2, C64};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Fourth-order Magnus with two Gauss points; each step is an exact
    /// exponential, so `det` and j-unitarity are preserved structurally.
    #[default]
    Magnus4,
    /// Classical fourth-order Runge–Kutta.
    Rk4,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOptions {
    pub step: f64,
    pub scheme: Scheme,
    /// Bound on the step-doubling estimate, relative to `max(1, ‖Y‖)`.
    pub tol: f64,
    /// On non-constant pieces the step is also capped so that `h·‖M‖`
    /// stays below this value.
    pub max_phase: f64,
    /// Largest factor by which `max_phase` may shrink the step. Beyond it
    /// the piece is integrated with frozen midpoint coefficients at the
    /// base step, which keeps the cost bounded at large `|z|`.
    pub max_refine: f64,
    /// Run the half-resolution pass needed for the error estimate.
    pub estimate_error: bool,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self { step: 1e-3, scheme: Scheme::Magnus4, tol: 1e-8, max_phase: 0.5, max_refine: 64.0, estimate_error: true }
    }
}

impl IntegratorOptions {
    pub fn with_step(step: f64) -> Self {
        Self { step, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::InvalidArgument(format!("step must be positive, got {}", self.step)));
        }
        if !(self.tol > 0.0 && self.max_phase > 0.0 && self.max_refine >= 1.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// A generator `M(t)` given on smooth pieces.
pub trait Generator: Sync {
    fn pieces(&self, t_end: f64) -> Vec<Piece>;
    /// `M(t)` for `t` in `piece`, with endpoint values taken from inside.
    fn eval(&self, t: f64, piece: &Piece) -> ComplexMatrix2;
}

const GAUSS_OFFSET: f64 = 0.288_675_134_594_812_9; // √3/6

/// One step from `t0` to `t1` inside `piece`.
pub fn step<G: Generator + ?Sized>(gen: &G, piece: &Piece, y: ComplexMatrix2, t0: f64, t1: f64, scheme: Scheme) -> ComplexMatrix2 {
    let h = t1 - t0;
    match scheme {
        Scheme::Magnus4 => {
            if piece.constant {
                let m = gen.eval(0.5 * (t0 + t1), piece);
                return y * (m * h).exp();
            }
            let mid = 0.5 * (t0 + t1);
            let m1 = gen.eval(mid - GAUSS_OFFSET * h, piece);
            let m2 = gen.eval(mid + GAUSS_OFFSET * h, piece);
            // right action reverses the commutator relative to Y' = M·Y
            let omega = (m1 + m2) * (0.5 * h) + m1.commutator(&m2) * (3f64.sqrt() / 12.0 * h * h);
            y * omega.exp()
        }
        Scheme::Rk4 => {
            let mid = 0.5 * (t0 + t1);
            let (ma, mm, mb) = (gen.eval(t0, piece), gen.eval(mid, piece), gen.eval(t1, piece));
            let k1 = y * ma;
            let k2 = (y + k1 * (0.5 * h)) * mm;
            let k3 = (y + k2 * (0.5 * h)) * mm;
            let k4 = (y + k3 * h) * mb;
            y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
        }
    }
}

/// Largest entry-norm of `M` at the ends and middle of a piece.
fn generator_scale<G: Generator + ?Sized>(gen: &G, piece: &Piece) -> f64 {
    let mid = 0.5 * (piece.lo + piece.hi);
    [piece.lo, mid, piece.hi].iter().map(|&t| gen.eval(t, piece).norm()).fold(0.0, f64::max)
}

/// One integration cell inside piece number `piece`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub t0: f64,
    pub t1: f64,
    pub piece: usize,
    /// Coefficients are frozen at the cell midpoint.
    pub frozen: bool,
}

impl Cell {
    /// The piece to hand to [`step`]; frozen cells step as constant.
    pub fn piece_for(&self, pieces: &[Piece]) -> Piece {
        let p = pieces[self.piece];
        Piece { constant: p.constant || self.frozen, ..p }
    }
}

/// Integration cells covering `[0, t_end]`, with every piece boundary a
/// cell boundary. `coarsen` multiplies the step.
pub fn cells<G: Generator + ?Sized>(gen: &G, t_end: f64, opts: &IntegratorOptions, coarsen: f64) -> Vec<Cell> {
    let pieces = gen.pieces(t_end);
    let mut out = Vec::new();
    for (idx, piece) in pieces.iter().enumerate() {
        let len = piece.hi - piece.lo;
        if len <= 0.0 {
            continue;
        }
        let mut h = opts.step;
        let mut frozen = false;
        if !piece.constant {
            let scale = generator_scale(gen, piece);
            if scale > 0.0 {
                let capped = opts.max_phase / scale;
                if capped * opts.max_refine < h {
                    frozen = true;
                } else {
                    h = h.min(capped);
                }
            }
        }
        h *= coarsen;
        let n = ((len / h).ceil() as usize).max(1);
        for k in 0..n {
            let t0 = piece.lo + len * k as f64 / n as f64;
            let t1 = if k + 1 == n { piece.hi } else { piece.lo + len * (k + 1) as f64 / n as f64 };
            out.push(Cell { t0, t1, piece: idx, frozen });
        }
    }
    out
}

/// Integrates `Y' = Y·M` from `Y(0) = I` to `t_end`, calling `visit(t, Y)`
/// after every cell.
pub fn propagate<G: Generator + ?Sized>(
    gen: &G,
    t_end: f64,
    opts: &IntegratorOptions,
    mut visit: impl FnMut(f64, &ComplexMatrix2),
) -> ComplexMatrix2 {
    let pieces = gen.pieces(t_end);
    let mut y = ComplexMatrix2::identity();
    for c in cells(gen, t_end, opts, 1.0) {
        y = step(gen, &c.piece_for(&pieces), y, c.t0, c.t1, opts.scheme);
        visit(c.t1, &y);
    }
    y
}

/// Solution at `t_end` with the step-doubling estimate `‖Y_h − Y_2h‖/15`
/// (0 when disabled). Fails with `StepTooLarge` when the estimate exceeds
/// `tol·max(1, ‖Y‖)`.
pub fn solve<G: Generator + ?Sized>(gen: &G, t_end: f64, opts: &IntegratorOptions) -> Result<(ComplexMatrix2, f64)> {
    opts.validate()?;
    let pieces = gen.pieces(t_end);
    let run = |coarsen: f64| {
        cells(gen, t_end, opts, coarsen)
            .into_iter()
            .fold(ComplexMatrix2::identity(), |y, c| step(gen, &c.piece_for(&pieces), y, c.t0, c.t1, opts.scheme))
    };
    let fine = run(1.0);
    if !fine.is_finite() {
        return Err(Error::NonFinite);
    }
    if !opts.estimate_error {
        return Ok((fine, 0.0));
    }
    let coarse = run(2.0);
    let estimate = (fine - coarse).norm() / 15.0;
    if estimate > opts.tol * fine.norm().max(1.0) {
        return Err(Error::StepTooLarge { estimate, tol: opts.tol });
    }
    Ok((fine, estimate))
}

/// `−iz·X` as a matrix scale factor.
pub(crate) fn minus_iz(z: C64) -> C64 {
    C64::new(0.0, -1.0) * z
}
