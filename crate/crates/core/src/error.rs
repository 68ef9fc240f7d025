use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite matrix entry")]
    NonFinite,

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:e})")]
    NotPsd { min_eig: f64 },

    #[error("matrix is not j-contractive (min eigenvalue of j - W*jW is {min_eig:e})")]
    NotContractive { min_eig: f64 },

    #[error("j-modulus is numerically singular (det {det:e})")]
    SingularModulus { det: f64 },

    #[error("matrix is not unimodular (|det - 1| = {defect:e})")]
    NotUnimodular { defect: f64 },

    #[error("no hyperbolic rotation annihilates b21: |b21| = {b21:e} >= |b22| = {b22:e}")]
    HyperbolicOverflow { b21: f64, b22: f64 },

    #[error("linear-fractional map hits a pole (|denominator| = {denominator:e})")]
    PoleHit { denominator: f64 },

    #[error("triangular factor is not j-expanding")]
    NotExpanding,

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid Hamiltonian: {0}")]
    InvalidHamiltonian(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("step-doubling discrepancy {estimate:e} exceeds tolerance {tol:e}")]
    StepTooLarge { estimate: f64, tol: f64 },

    #[error("A-gauge violation: {0}")]
    GaugeViolation(String),

    #[error("Arov normalization failed at t = {t}: {reason}")]
    NormalizationFailure { t: f64, reason: String },

    #[error("finite differences did not settle under step halving (last change {change:e})")]
    NonsmoothHamiltonian { change: f64 },

    #[error("limit did not converge: {0}")]
    NoConvergence(String),

    #[error("w(i) = {re} + {im}i is not real and > -1")]
    ComplexWAtI { re: f64, im: f64 },

    #[error("value {0} escapes the closed unit disk")]
    NotSchur(f64),

    #[error("resolvent is singular")]
    SingularResolvent,

    #[error("defect dimensions mismatch: {0}")]
    DefectMismatch(String),

    #[error("resolvent condition number {0:e} too large")]
    IllConditioned(f64),

    #[error("s1 block is not invertible")]
    SingularS1,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
