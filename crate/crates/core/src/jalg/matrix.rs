use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// A 2×2 complex matrix stored row-major.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix2 {
    pub e11: C64,
    pub e12: C64,
    pub e21: C64,
    pub e22: C64,
}

impl ComplexMatrix2 {
    pub const fn new(e11: C64, e12: C64, e21: C64, e22: C64) -> Self {
        Self { e11, e12, e21, e22 }
    }

    /// Checked constructor for externally supplied entries.
    pub fn try_new(e11: C64, e12: C64, e21: C64, e22: C64) -> Result<Self> {
        let m = Self::new(e11, e12, e21, e22);
        if m.is_finite() {
            Ok(m)
        } else {
            Err(Error::NonFinite)
        }
    }

    pub fn real(e11: f64, e12: f64, e21: f64, e22: f64) -> Self {
        Self::new(e11.into(), e12.into(), e21.into(), e22.into())
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub fn diag(d1: C64, d2: C64) -> Self {
        Self::new(d1, ZERO, ZERO, d2)
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|e| e.re.is_finite() && e.im.is_finite())
    }

    pub fn entries(&self) -> [C64; 4] {
        [self.e11, self.e12, self.e21, self.e22]
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.e11.conj(), self.e21.conj(), self.e12.conj(), self.e22.conj())
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.e11, self.e21, self.e12, self.e22)
    }

    pub fn conj(&self) -> Self {
        Self::new(self.e11.conj(), self.e12.conj(), self.e21.conj(), self.e22.conj())
    }

    pub fn det(&self) -> C64 {
        self.e11 * self.e22 - self.e12 * self.e21
    }

    pub fn trace(&self) -> C64 {
        self.e11 + self.e22
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d.norm() == 0.0 || !d.is_finite() {
            return None;
        }
        let r = d.inv();
        Some(Self::new(self.e22 * r, -self.e12 * r, -self.e21 * r, self.e11 * r))
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.entries().iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|e| e.norm()).fold(0.0, f64::max)
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        let g = self.adjoint() * *self;
        let (_, hi) = g.hermitian_eigenvalues();
        hi.max(0.0).sqrt()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.e11 * s, self.e12 * s, self.e21 * s, self.e22 * s)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    /// (M + M*)/2.
    pub fn hermitian_part(&self) -> Self {
        let a = self.adjoint();
        (*self + a).scale(C64::new(0.5, 0.0))
    }

    pub fn hermitian_defect(&self) -> f64 {
        (*self - self.adjoint()).norm()
    }

    /// Eigenvalues (min, max) of the Hermitian part.
    pub fn hermitian_eigenvalues(&self) -> (f64, f64) {
        let p = self.e11.re;
        let s = self.e22.re;
        let r = 0.5 * (self.e12 + self.e21.conj());
        let mean = 0.5 * (p + s);
        let rad = (0.5 * (p - s)).hypot(r.norm());
        (mean - rad, mean + rad)
    }

    pub fn min_hermitian_eigenvalue(&self) -> f64 {
        self.hermitian_eigenvalues().0
    }

    /// Matrix exponential via Cayley–Hamilton: for traceless Y, Y² = −det(Y)·I.
    pub fn exp(&self) -> Self {
        let mu = 0.5 * self.trace();
        let y = *self - Self::identity().scale(mu);
        let q2 = -y.det();
        let q = q2.sqrt();
        let (ch, shc) = if q.norm() < 1e-2 {
            // cosh q and sinh(q)/q from their even series in q²
            let ch = ONE + q2 / 2.0 + q2 * q2 / 24.0 + q2 * q2 * q2 / 720.0
                + q2 * q2 * q2 * q2 / 40320.0;
            let shc = ONE + q2 / 6.0 + q2 * q2 / 120.0 + q2 * q2 * q2 / 5040.0
                + q2 * q2 * q2 * q2 / 362880.0;
            (ch, shc)
        } else {
            (q.cosh(), q.sinh() / q)
        };
        let e = mu.exp();
        (Self::identity().scale(ch) + y.scale(shc)).scale(e)
    }
}

impl Default for ComplexMatrix2 {
    fn default() -> Self {
        Self::identity()
    }
}

impl Add for ComplexMatrix2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.e11 + o.e11, self.e12 + o.e12, self.e21 + o.e21, self.e22 + o.e22)
    }
}

impl AddAssign for ComplexMatrix2 {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sub for ComplexMatrix2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.e11 - o.e11, self.e12 - o.e12, self.e21 - o.e21, self.e22 - o.e22)
    }
}

impl Neg for ComplexMatrix2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.e11, -self.e12, -self.e21, -self.e22)
    }
}

impl Mul for ComplexMatrix2 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.e11 * o.e11 + self.e12 * o.e21,
            self.e11 * o.e12 + self.e12 * o.e22,
            self.e21 * o.e11 + self.e22 * o.e21,
            self.e21 * o.e12 + self.e22 * o.e22,
        )
    }
}

impl Mul<C64> for ComplexMatrix2 {
    type Output = Self;
    fn mul(self, s: C64) -> Self {
        self.scale(s)
    }
}

impl Mul<f64> for ComplexMatrix2 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }
}

impl fmt::Display for ComplexMatrix2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.e11, self.e12, self.e21, self.e22)
    }
}

/// The two indefinite metrics used throughout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Signature {
    /// diag(−1, 1)
    Jay,
    /// [[0, 1], [−1, 0]]
    CalJ,
}

impl Signature {
    pub fn matrix(self) -> ComplexMatrix2 {
        match self {
            Signature::Jay => ComplexMatrix2::real(-1.0, 0.0, 0.0, 1.0),
            Signature::CalJ => ComplexMatrix2::real(0.0, 1.0, -1.0, 0.0),
        }
    }
}

/// Shorthand for diag(−1, 1).
pub fn jay() -> ComplexMatrix2 {
    Signature::Jay.matrix()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signature_identities() {
        let j = Signature::Jay.matrix();
        let cj = Signature::CalJ.matrix();
        assert_eq!(j * j, ComplexMatrix2::identity());
        assert_eq!(cj.adjoint(), -cj);
        assert_eq!(cj * cj, -ComplexMatrix2::identity());
    }

    #[test]
    fn inverse_and_det() {
        let m = ComplexMatrix2::new(C64::new(1.0, 2.0), C64::new(0.5, 0.0), C64::new(-1.0, 1.0), C64::new(3.0, -1.0));
        let inv = m.inverse().unwrap();
        assert!((m * inv - ComplexMatrix2::identity()).norm() < 1e-14);
        assert!(ComplexMatrix2::zero().inverse().is_none());
    }

    #[test]
    fn exp_of_diagonal_and_nilpotent() {
        let d = ComplexMatrix2::diag(C64::new(0.3, 1.0), C64::new(-2.0, 0.5));
        let e = d.exp();
        assert!((e.e11 - C64::new(0.3, 1.0).exp()).norm() < 1e-14);
        assert!((e.e22 - C64::new(-2.0, 0.5).exp()).norm() < 1e-14);
        assert!(e.e12.norm() < 1e-15 && e.e21.norm() < 1e-15);

        let n = ComplexMatrix2::real(0.0, 2.5, 0.0, 0.0);
        assert!((n.exp() - ComplexMatrix2::real(1.0, 2.5, 0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn exp_of_hyperbolic_generator() {
        let phi = 0.7_f64;
        let g = ComplexMatrix2::real(0.0, phi, phi, 0.0);
        let want = ComplexMatrix2::real(phi.cosh(), phi.sinh(), phi.sinh(), phi.cosh());
        assert!((g.exp() - want).norm() < 1e-14);
    }

    #[test]
    fn try_new_rejects_nan() {
        assert_eq!(
            ComplexMatrix2::try_new(C64::new(f64::NAN, 0.0), ZERO, ZERO, ONE),
            Err(Error::NonFinite)
        );
    }

    #[test]
    fn hermitian_eigenvalues_of_diag() {
        let m = ComplexMatrix2::real(3.0, 0.0, 0.0, -1.0);
        assert_eq!(m.hermitian_eigenvalues(), (-1.0, 3.0));
        assert!((ComplexMatrix2::real(1.0, 2.0, 0.0, 0.0).spectral_norm() - 5f64.sqrt()).abs() < 1e-14);
    }
}
