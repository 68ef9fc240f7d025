//! The Potapov–de Branges gauge: `B = 0`, Hamiltonian `H(t) = 𝔄(0,t)A(t)𝔄(0,t)*`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::integrator::{cells, minus_iz, solve, step, Generator, IntegratorOptions};
use super::profile::{coeff_matrices_at, ArovProfile, Coefficient, Interp, Piece, Side};
use super::transfer::{check_t, check_z, ArovGenerator, Gauge, TransferResult};
use crate::error::{Error, Result};
use crate::jalg::{arov_normalize, jay, ComplexMatrix2, C64};

/// Tolerance for Hermitian symmetry and positivity of samples.
pub const HAMILTONIAN_TOL: f64 = 1e-10;

/// `H(t)` on cells `[knots[k], knots[k+1]]`, each stored as its left limit,
/// midpoint value and right limit and interpolated quadratically, followed
/// by an optional constant tail for `t ≥ knots[last]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdBHamiltonian {
    pub knots: Vec<f64>,
    pub cells: Vec<[ComplexMatrix2; 3]>,
    pub tail: Option<ComplexMatrix2>,
}

fn check_sample(h: &ComplexMatrix2, t: f64) -> Result<()> {
    if !h.is_finite() {
        return Err(Error::InvalidHamiltonian(format!("non-finite sample at t = {t}")));
    }
    let scale = h.norm().max(1.0);
    if h.hermitian_defect() > HAMILTONIAN_TOL * scale {
        return Err(Error::InvalidHamiltonian(format!("H({t}) is not Hermitian")));
    }
    let lo = h.min_hermitian_eigenvalue();
    if lo < -HAMILTONIAN_TOL * scale {
        return Err(Error::InvalidHamiltonian(format!("H({t}) has eigenvalue {lo:e}")));
    }
    Ok(())
}

impl PdBHamiltonian {
    pub fn new(knots: Vec<f64>, cells: Vec<[ComplexMatrix2; 3]>, tail: Option<ComplexMatrix2>) -> Result<Self> {
        let h = Self { knots, cells, tail };
        h.validate()?;
        Ok(h)
    }

    /// `H ≡ h` on `[0, t_end]` split into `n` cells, with tail `h`.
    pub fn constant(h: ComplexMatrix2, t_end: f64, n: usize) -> Result<Self> {
        let n = n.max(1);
        let knots = (0..=n).map(|k| t_end * k as f64 / n as f64).collect();
        Self::new(knots, vec![[h; 3]; n], Some(h))
    }

    pub fn validate(&self) -> Result<()> {
        if self.knots.len() < 2 || self.cells.len() + 1 != self.knots.len() {
            return Err(Error::InvalidHamiltonian(format!("{} knots need {} cells", self.knots.len(), self.knots.len().saturating_sub(1))));
        }
        if self.knots[0] != 0.0 || self.knots.windows(2).any(|w| !(w[1] > w[0])) || !self.t_end().is_finite() {
            return Err(Error::InvalidHamiltonian("knots must start at 0 and increase strictly".into()));
        }
        for (k, cell) in self.cells.iter().enumerate() {
            for (h, t) in cell.iter().zip([self.knots[k], 0.5 * (self.knots[k] + self.knots[k + 1]), self.knots[k + 1]]) {
                check_sample(h, t)?;
            }
        }
        if let Some(t) = &self.tail {
            check_sample(t, self.t_end())?;
        }
        Ok(())
    }

    pub fn t_end(&self) -> f64 {
        *self.knots.last().expect("validated knots")
    }

    /// Widest cell.
    pub fn spacing(&self) -> f64 {
        self.knots.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Cell holding `t`, resolved toward `side`; `None` past the end.
    fn cell_index(&self, t: f64, side: Side) -> Option<usize> {
        let n = self.cells.len();
        let k = match side {
            Side::Right => self.knots.partition_point(|&x| x <= t),
            Side::Left => self.knots.partition_point(|&x| x < t),
        };
        match k {
            0 => Some(0),
            k if k <= n => Some(k - 1),
            _ => None,
        }
    }

    fn interpolate(&self, k: usize, t: f64) -> ComplexMatrix2 {
        let (lo, hi) = (self.knots[k], self.knots[k + 1]);
        let s = ((t - lo) / (hi - lo)).clamp(0.0, 1.0);
        let [l, m, r] = self.cells[k];
        l * (2.0 * (s - 0.5) * (s - 1.0)) + m * (-4.0 * s * (s - 1.0)) + r * (2.0 * s * (s - 0.5))
    }

    /// `H(t)`, taking the `side` limit at knots; the tail past the end.
    pub fn eval(&self, t: f64, side: Side) -> Result<ComplexMatrix2> {
        match self.cell_index(t, side) {
            Some(k) => Ok(self.interpolate(k, t)),
            None if t == self.t_end() && side == Side::Left => Ok(self.cells[self.cells.len() - 1][2]),
            None => self.tail.ok_or_else(|| Error::InvalidArgument(format!("t = {t} is past the last sample and no tail is set"))),
        }
    }

    /// Largest `|det H(t) − det A(t)|` over all stored samples, with `A` of
    /// the source profile.
    pub fn det_defect(&self, p: &ArovProfile) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, cell) in self.cells.iter().enumerate() {
            let (lo, hi) = (self.knots[k], self.knots[k + 1]);
            for (h, (t, side)) in cell.iter().zip([(lo, Side::Right), (0.5 * (lo + hi), Side::Right), (hi, Side::Left)]) {
                let (a, b, c) = p.coeffs(t, side);
                worst = worst.max((h.det().re - (a * a - b * b - c * c)).abs());
            }
        }
        worst
    }

    /// Rows `t, h11, Re h12, Im h12, h22`: three per cell (left, middle,
    /// right), so interior knots appear twice. A final row with `t = inf`
    /// carries the tail.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,h11,re_h12,im_h12,h22\n");
        let mut row = |t: f64, h: &ComplexMatrix2| {
            let _ = writeln!(s, "{t:.17e},{:.17e},{:.17e},{:.17e},{:.17e}", h.e11.re, h.e12.re, h.e12.im, h.e22.re);
        };
        for (k, cell) in self.cells.iter().enumerate() {
            let (lo, hi) = (self.knots[k], self.knots[k + 1]);
            row(lo, &cell[0]);
            row(0.5 * (lo + hi), &cell[1]);
            row(hi, &cell[2]);
        }
        if let Some(t) = &self.tail {
            row(f64::INFINITY, t);
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (n == 0 && line.starts_with(|c: char| c.is_alphabetic())) {
                continue;
            }
            let vals: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", n + 1)))?;
            if vals.len() != 5 {
                return Err(Error::Parse(format!("line {}: expected 5 columns, got {}", n + 1, vals.len())));
            }
            let h12 = C64::new(vals[2], vals[3]);
            rows.push((vals[0], ComplexMatrix2::new(vals[1].into(), h12, h12.conj(), vals[4].into())));
        }
        let tail = match rows.last() {
            Some((t, h)) if t.is_infinite() => {
                let h = *h;
                rows.pop();
                Some(h)
            }
            _ => None,
        };
        if rows.is_empty() || rows.len() % 3 != 0 {
            return Err(Error::Parse(format!("expected triples of rows per cell, got {} rows", rows.len())));
        }
        let mut knots = vec![rows[0].0];
        let mut cells = Vec::with_capacity(rows.len() / 3);
        for tri in rows.chunks(3) {
            if tri[0].0 != *knots.last().unwrap() {
                return Err(Error::Parse(format!("cell starting at {} does not continue the previous one", tri[0].0)));
            }
            knots.push(tri[2].0);
            cells.push([tri[0].1, tri[1].1, tri[2].1]);
        }
        Self::new(knots, cells, tail)
    }
}

/// `M(t) = −iz·H(t)·j`.
pub struct PdbGenerator<'a> {
    pub h: &'a PdBHamiltonian,
    pub z: C64,
}

impl Generator for PdbGenerator<'_> {
    fn pieces(&self, t_end: f64) -> Vec<Piece> {
        let mut out: Vec<Piece> = self
            .h
            .knots
            .windows(2)
            .zip(&self.h.cells)
            .filter(|(w, _)| w[0] < t_end)
            .map(|(w, c)| Piece { lo: w[0], hi: w[1].min(t_end), constant: c[0] == c[1] && c[1] == c[2] })
            .collect();
        if t_end > self.h.t_end() {
            out.push(Piece { lo: self.h.t_end(), hi: t_end, constant: true });
        }
        out
    }

    fn eval(&self, t: f64, piece: &Piece) -> ComplexMatrix2 {
        let k = self.h.knots.partition_point(|&x| x <= piece.lo);
        let hm = if k <= self.h.cells.len() {
            self.h.interpolate(k - 1, t)
        } else {
            self.h.tail.expect("tail checked by caller")
        };
        hm * minus_iz(self.z) * jay()
    }
}

fn check_reach(h: &PdBHamiltonian, t_end: f64) -> Result<()> {
    if t_end > h.t_end() && h.tail.is_none() {
        return Err(Error::InvalidArgument(format!("T = {t_end} exceeds the sampled range {} and no tail is set", h.t_end())));
    }
    Ok(())
}

/// Samples `H(t) = 𝔄(0,t)A(t)𝔄(0,t)*` on the integration cells of the
/// `z = 0` chain up to `T`; the tail is `a_tail·𝔄(0,T0)𝔄(0,T0)*` when `T ≥ T0`.
pub fn to_pdb(p: &ArovProfile, t_end: f64, opts: &IntegratorOptions) -> Result<PdBHamiltonian> {
    check_t(t_end)?;
    opts.validate()?;
    if t_end == 0.0 {
        return Err(Error::InvalidArgument("T must be positive to sample a Hamiltonian".into()));
    }
    let gen = ArovGenerator { profile: p, z: C64::new(0.0, 0.0) };
    let pieces = gen.pieces(t_end);
    let congruence = |y: &ComplexMatrix2, t: f64, side: Side| -> Result<ComplexMatrix2> {
        let (a, _) = coeff_matrices_at(p, t, side)?;
        Ok(*y * a * y.adjoint())
    };
    let mut knots = vec![0.0];
    let mut out = Vec::new();
    let mut y = ComplexMatrix2::identity();
    for c in cells(&gen, t_end, opts, 1.0) {
        let (lo, hi) = (c.t0, c.t1);
        let piece = &c.piece_for(&pieces);
        let mid = 0.5 * (lo + hi);
        let y_mid = step(&gen, piece, y, lo, mid, opts.scheme);
        let y_hi = step(&gen, piece, y_mid, mid, hi, opts.scheme);
        out.push([congruence(&y, lo, Side::Right)?, congruence(&y_mid, mid, Side::Right)?, congruence(&y_hi, hi, Side::Left)?]);
        knots.push(hi);
        y = y_hi;
    }
    let tail = (t_end >= p.t0).then(|| y * y.adjoint() * p.a_tail);
    // rounding can leave the samples a hair off Hermitian
    let sym = |h: ComplexMatrix2| h.hermitian_part();
    let cells: Vec<_> = out.into_iter().map(|c| c.map(sym)).collect();
    PdBHamiltonian::new(knots, cells, tail.map(sym))
}

/// Solves `∂ₜ𝔅 j = −iz𝔅H` from `𝔅(z, 0) = I`.
pub fn pdb_transfer(h: &PdBHamiltonian, z: C64, t_end: f64, opts: &IntegratorOptions) -> Result<TransferResult> {
    check_z(z)?;
    check_t(t_end)?;
    check_reach(h, t_end)?;
    let (m, est) = solve(&PdbGenerator { h, z }, t_end, opts)?;
    Ok(TransferResult::new(m, z, t_end, Gauge::PotapovDeBranges, opts, est))
}

/// Where in each partition interval `H` is sampled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tag {
    Left,
    #[default]
    Mid,
    Right,
}

/// Ordered product `∏ₖ exp(−iz H(τₖ) j Δₖ)` over a partition that refines
/// the sample grid.
pub fn mult_integral(h: &PdBHamiltonian, z: C64, partition: &[f64], tag: Tag) -> Result<ComplexMatrix2> {
    if partition.len() < 2 || partition.windows(2).any(|w| !(w[1] > w[0])) || partition[0] < 0.0 {
        return Err(Error::InvalidArgument("partition must be strictly increasing from t ≥ 0".into()));
    }
    check_reach(h, *partition.last().unwrap())?;
    let j = jay();
    let slack = 1e-12 * h.t_end().max(1.0);
    let mut acc = ComplexMatrix2::identity();
    for w in partition.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mid = 0.5 * (lo + hi);
        let hm = match h.cell_index(mid, Side::Right) {
            Some(k) => {
                if lo < h.knots[k] - slack || hi > h.knots[k + 1] + slack {
                    return Err(Error::InvalidArgument(format!("interval [{lo}, {hi}] straddles a sample knot")));
                }
                let tau = match tag {
                    Tag::Left => lo,
                    Tag::Mid => mid,
                    Tag::Right => hi,
                };
                h.interpolate(k, tau)
            }
            None => {
                if lo < h.t_end() - slack {
                    return Err(Error::InvalidArgument(format!("interval [{lo}, {hi}] straddles the tail start")));
                }
                h.tail.expect("reach checked")
            }
        };
        acc = acc * (hm * j * (minus_iz(z) * (hi - lo))).exp();
    }
    Ok(acc)
}

/// Tolerance on `|h₂₂ − h₁₁|` for a Hamiltonian to have an Arov-gauge form.
pub const TRACE_J_TOL: f64 = 1e-8;
/// Successive finite-difference extractions must agree to this.
pub const FD_TOL: f64 = 1e-6;
const MAX_HALVINGS: usize = 30;

/// Recovers `(a, b, c)` from a Hamiltonian by normalizing `𝔅(i, t) = 𝒜(t)U(t)`
/// with `𝒜 = [[1/λ, h], [0, λ]]` and differentiating:
/// `a = (log λ)'`, `b + ic = ½λ²(h/λ)'`.
///
/// Derivatives are second-order one-sided differences inside each cell,
/// halving the spacing until successive values agree to [`FD_TOL`]. The
/// result is linear samples at both ends of every cell.
pub fn arov_from_pdb(h: &PdBHamiltonian, opts: &IntegratorOptions) -> Result<ArovProfile> {
    h.validate()?;
    opts.validate()?;
    for (k, cell) in h.cells.iter().enumerate() {
        for m in cell.iter().chain(h.tail.iter()) {
            if (m.e22 - m.e11).norm() > TRACE_J_TOL * m.norm().max(1.0) {
                return Err(Error::InvalidHamiltonian(format!("tr(Hj) ≠ 0 in cell {k}: no Arov-gauge form exists")));
            }
        }
    }
    let gen = PdbGenerator { h, z: C64::new(0.0, 1.0) };
    let pieces = gen.pieces(h.t_end());
    let advance = |y: ComplexMatrix2, piece: &Piece, from: f64, to: f64| {
        let n = (((to - from) / opts.step).ceil() as usize).max(1);
        (0..n).fold(y, |y, k| {
            let t0 = from + (to - from) * k as f64 / n as f64;
            let t1 = from + (to - from) * (k + 1) as f64 / n as f64;
            step(&gen, piece, y, t0, t1, opts.scheme)
        })
    };
    let mut ts = Vec::with_capacity(2 * pieces.len());
    let (mut av, mut bv, mut cv) = (Vec::new(), Vec::new(), Vec::new());
    let mut y = ComplexMatrix2::identity();
    for piece in &pieces {
        let y0 = y;
        // (log λ, h/λ) at s ∈ [lo, hi]
        let sample = |s: f64| -> Result<(f64, C64)> {
            let ys = if s == piece.lo { y0 } else { advance(y0, piece, piece.lo, s) };
            let (tf, _) = arov_normalize(&ys, 1e-8).map_err(|e| Error::NormalizationFailure { t: s, reason: e.to_string() })?;
            Ok((tf.lambda.ln(), tf.h / tf.lambda))
        };
        for (s, dir) in [(piece.lo, 1.0), (piece.hi, -1.0)] {
            let (g1, g2) = sample(s)?;
            let lambda = g1.exp();
            let derive = |delta: f64| -> Result<(f64, C64)> {
                let (f1, q1) = sample(s + dir * delta)?;
                let (f2, q2) = sample(s + 2.0 * dir * delta)?;
                let d1 = dir * (-3.0 * g1 + 4.0 * f1 - f2) / (2.0 * delta);
                let d2 = (-3.0 * g2 + q1 * 4.0 - q2) * (dir / (2.0 * delta));
                Ok((d1, d2 * (0.5 * lambda * lambda)))
            };
            let mut delta = 0.5 * (piece.hi - piece.lo);
            let mut prev = derive(delta)?;
            let mut settled = false;
            let mut change = f64::INFINITY;
            for _ in 0..MAX_HALVINGS {
                delta *= 0.5;
                let next = derive(delta)?;
                change = (next.0 - prev.0).abs().max((next.1 - prev.1).norm());
                prev = next;
                if change < FD_TOL * prev.0.abs().max(prev.1.norm()).max(1.0) {
                    settled = true;
                    break;
                }
            }
            if !settled {
                return Err(Error::NonsmoothHamiltonian { change });
            }
            ts.push(s);
            av.push(prev.0);
            bv.push(prev.1.re);
            cv.push(prev.1.im);
        }
        y = advance(y0, piece, piece.lo, piece.hi);
    }
    let a_tail = h.tail.unwrap_or(h.cells[h.cells.len() - 1][2]).det().re.max(0.0).sqrt();
    let samples = |values: Vec<f64>| Coefficient::Samples { t: ts.clone(), values, interp: Interp::Linear };
    ArovProfile::new(samples(av), samples(bv), samples(cv), h.t_end(), a_tail)
}
