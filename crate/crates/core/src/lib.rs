//! Two-dimensional canonical systems in the Arov gauge.
//!
//! The crate integrates the transfer-matrix chain `∂ₜ𝔄·j = 𝔄(−izA(t) + B(t))`,
//! evaluates the Schur spectral function and its entropy integral, and checks
//! the identity between the entropy and `∫ (tr A − 2√det A) dt`. Supporting
//! modules cover the 2×2 j-metric algebra ([`jalg`]) and finite-dimensional
//! unitary nodes with their Redheffer and Potapov–Ginzburg transforms
//! ([`nodes`]).

// negated comparisons are deliberate: they reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod jalg;
pub mod nodes;
pub mod quadrature;
pub mod spectral;
pub mod system;

pub use error::{Error, Result};
pub use jalg::{ComplexMatrix2, Signature, C64};
