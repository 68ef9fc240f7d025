#![allow(dead_code)]

use szego::system::{ArovProfile, Coefficient};

pub fn step_b() -> ArovProfile {
    ArovProfile::new(Coefficient::constant(1.0), Coefficient::step(vec![0.0, 1.0], vec![0.6]), Coefficient::zero(), 1.0, 1.0).unwrap()
}

pub fn step_c() -> ArovProfile {
    ArovProfile::new(Coefficient::constant(1.0), Coefficient::zero(), Coefficient::step(vec![0.0, 1.0], vec![0.6]), 1.0, 1.0).unwrap()
}

pub const BUMP_AMPLITUDE: f64 = 0.8;

pub fn bump() -> ArovProfile {
    let b = Coefficient::Bump { start: 0.0, end: 1.0, amplitude: BUMP_AMPLITUDE };
    ArovProfile::new(Coefficient::constant(1.0), b, Coefficient::zero(), 1.0, 1.0).unwrap()
}

pub fn two_step() -> ArovProfile {
    let knots = vec![0.0, 0.5, 1.0];
    ArovProfile::new(
        Coefficient::constant(1.0),
        Coefficient::step(knots.clone(), vec![0.5, 0.2]),
        Coefficient::step(knots, vec![0.3, 0.6]),
        1.0,
        1.0,
    )
    .unwrap()
}

/// The four sum-rule battery profiles with a flag for `c ≡ 0`.
pub fn battery() -> Vec<(&'static str, ArovProfile, bool)> {
    vec![("step b", step_b(), true), ("step c", step_c(), false), ("bump b", bump(), true), ("two-step", two_step(), false)]
}

/// Composite Simpson rule with `n` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|k| f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (f(a) + f(b) + inner) * h / 3.0
}

/// `∫ 2(a − √(a² − b²)) dt` for the bump profile, by Simpson.
pub fn bump_rhs_oracle() -> f64 {
    let b = |t: f64| BUMP_AMPLITUDE * 0.5 * (1.0 - (2.0 * std::f64::consts::PI * t).cos());
    simpson(|t| 2.0 * (1.0 - (1.0 - b(t) * b(t)).sqrt()), 0.0, 1.0, 20_000)
}
