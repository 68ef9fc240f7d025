//! 2×2 complex linear algebra in the indefinite metric j = diag(−1, 1).
//!
//! Everything here is a pure function of its arguments. Checked routines take
//! an explicit tolerance; [`ALGEBRAIC_TOL`] and [`CLASSIFY_TOL`] are the
//! defaults used by the rest of the crate.

mod matrix;
mod triangular;

pub use matrix::{jay, ComplexMatrix2, Signature, C64};
pub use triangular::{
    arov_normalize, product_convergence_probe, triangular_expanding_check, ConvergenceReport,
    TriangularFactor,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for algebraic identities and precondition checks.
pub const ALGEBRAIC_TOL: f64 = 1e-10;
/// Tolerance for j-classification by defect eigenvalues.
pub const CLASSIFY_TOL: f64 = 1e-8;

/// `M*·sig·M − sig`.
pub fn j_defect(m: &ComplexMatrix2, sig: Signature) -> ComplexMatrix2 {
    let s = sig.matrix();
    let d = m.adjoint() * s * *m - s;
    match sig {
        // conjugate-symmetric by construction; remove rounding asymmetry
        Signature::Jay => d.hermitian_part(),
        Signature::CalJ => d,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JClass {
    JUnitary,
    JExpanding,
    JContractive,
    Indefinite,
}

/// Classifies `M` by the sign of `M*jM − j`.
pub fn classify(m: &ComplexMatrix2, tol: f64) -> JClass {
    let d = j_defect(m, Signature::Jay);
    if d.norm() <= tol {
        return JClass::JUnitary;
    }
    let (lo, hi) = d.hermitian_eigenvalues();
    if lo >= -tol {
        JClass::JExpanding
    } else if hi <= tol {
        JClass::JContractive
    } else {
        JClass::Indefinite
    }
}

/// Positive semidefinite square root of a Hermitian 2×2 matrix.
///
/// Uses `(M + √det M · I) / √(tr M + 2√det M)`. Eigenvalues in `[−tol, 0)`
/// are treated as zero.
pub fn psd_sqrt2(m: &ComplexMatrix2, tol: f64) -> Result<ComplexMatrix2> {
    let h = m.hermitian_part();
    let (lo, hi) = h.hermitian_eigenvalues();
    let scale = hi.abs().max(1.0);
    if lo < -tol * scale {
        return Err(Error::NotPsd { min_eig: lo });
    }
    if hi <= 0.0 {
        return Ok(ComplexMatrix2::zero());
    }
    let id = ComplexMatrix2::identity();
    if lo < 0.0 {
        // clamped: √hi times the projector (M − lo·I)/(hi − lo)
        return Ok((h - id * lo) * (hi.sqrt() / (hi - lo)));
    }
    let sdet = (lo * hi).sqrt();
    // √(tr M + 2√det M) = √lo + √hi
    let denom = lo.sqrt() + hi.sqrt();
    let shifted = h + id * sdet;
    Ok(shifted.scale(C64::new(1.0 / denom, 0.0)))
}

/// Potapov j-modulus of a j-contractive matrix by Orlov's closed formula:
/// `R = I − j Γ^{1/2} (I + (I − Γ^{1/2} j Γ^{1/2})^{1/2})^{−1} Γ^{1/2}`,
/// where `Γ = j − W*jW ≥ 0`.
pub fn orlov_modulus(w: &ComplexMatrix2, tol: f64) -> Result<ComplexMatrix2> {
    let j = jay();
    if w.det().norm() <= f64::EPSILON * w.norm().powi(2) {
        return Err(Error::SingularModulus { det: w.det().norm() });
    }
    let gamma = (j - w.adjoint() * j * *w).hermitian_part();
    let (lo, hi) = gamma.hermitian_eigenvalues();
    if lo < -tol * hi.abs().max(1.0) {
        return Err(Error::NotContractive { min_eig: lo });
    }
    let g = psd_sqrt2(&gamma, tol)?;
    let inner = ComplexMatrix2::identity() - g * j * g;
    let s = psd_sqrt2(&inner, tol)?;
    let mid = (ComplexMatrix2::identity() + s)
        .inverse()
        .ok_or(Error::SingularModulus { det: 0.0 })?;
    Ok(ComplexMatrix2::identity() - j * g * mid * g)
}

/// Polar factorization `W = U·R` of a j-contractive matrix with `U`
/// j-unitary and `R` the j-modulus.
pub fn polar_ju(w: &ComplexMatrix2, tol: f64) -> Result<(ComplexMatrix2, ComplexMatrix2)> {
    let r = orlov_modulus(w, tol)?;
    let det = r.det().norm();
    if det <= f64::EPSILON * r.norm().powi(2) {
        return Err(Error::SingularModulus { det });
    }
    let r_inv = r.inverse().ok_or(Error::SingularModulus { det })?;
    Ok((*w * r_inv, r))
}

/// Polar factorization of a j-expanding matrix, obtained from the
/// factorization `W⁻¹ = U′R′` of its (j-contractive) inverse:
/// `W = U·R` with `U = U′⁻¹` and `R = U′ R′⁻¹ U′⁻¹`.
///
/// `R` is j-hermitian and satisfies `jR² = W*jW`.
pub fn polar_ju_expanding(w: &ComplexMatrix2, tol: f64) -> Result<(ComplexMatrix2, ComplexMatrix2)> {
    let w_inv = w
        .inverse()
        .ok_or(Error::SingularModulus { det: w.det().norm() })?;
    let (u1, r1) = polar_ju(&w_inv, tol)?;
    let u1_inv = u1.inverse().ok_or(Error::SingularModulus { det: 0.0 })?;
    let r1_inv = r1.inverse().ok_or(Error::SingularModulus { det: 0.0 })?;
    Ok((u1_inv, u1 * r1_inv * u1_inv))
}

/// Linear-fractional action `(m11 w + m12) / (m21 w + m22)`.
pub fn mobius(m: &ComplexMatrix2, w: C64) -> Result<C64> {
    let num = m.e11 * w + m.e12;
    let den = m.e21 * w + m.e22;
    let scale = (m.e21 * w).norm() + m.e22.norm() + num.norm();
    if den.norm() <= 1e-14 * scale || den.norm() == 0.0 {
        return Err(Error::PoleHit { denominator: den.norm() });
    }
    Ok(num / den)
}

/// A fixed unitary `U` with `i·U·𝒥·U* = j`.
pub fn signature_conjugator() -> ComplexMatrix2 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix2::new(C64::new(s, 0.0), C64::new(0.0, -s), C64::new(s, 0.0), C64::new(0.0, s))
}

/// Random sampling helpers shared by tests and the CLI demo.
pub mod sample {
    use super::*;
    use rand::Rng;

    /// `[[cosh φ, sinh φ], [sinh φ, cosh φ]]`.
    pub fn hyperbolic(phi: f64) -> ComplexMatrix2 {
        ComplexMatrix2::real(phi.cosh(), phi.sinh(), phi.sinh(), phi.cosh())
    }

    /// `diag(e^{iθ}, e^{−iθ})`.
    pub fn phase(theta: f64) -> ComplexMatrix2 {
        ComplexMatrix2::diag(C64::from_polar(1.0, theta), C64::from_polar(1.0, -theta))
    }

    /// Random element of SU(1,1) with hyperbolic angle bounded by `max_phi`.
    pub fn su11<R: Rng>(rng: &mut R, max_phi: f64) -> ComplexMatrix2 {
        let a = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        let b = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        let phi = rng.gen_range(-max_phi..max_phi);
        phase(a) * hyperbolic(phi) * phase(b)
    }

    /// Random j-contractive matrix `U·e^{−Hj}` with `U ∈ SU(1,1)` and `H ≥ 0`.
    pub fn j_contractive<R: Rng>(rng: &mut R) -> ComplexMatrix2 {
        let u = su11(rng, 1.5);
        let p: f64 = rng.gen_range(0.0..1.5);
        let q: f64 = rng.gen_range(0.0..1.5);
        let off = C64::from_polar(rng.gen_range(0.0..1.0) * (p * q).sqrt(), rng.gen_range(-3.0..3.0));
        let h = ComplexMatrix2::new(C64::new(p, 0.0), off, off.conj(), C64::new(q, 0.0));
        u * (-(h * jay())).exp()
    }
}
