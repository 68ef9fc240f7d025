//! Schur spectral function, entropy quadrature and the sum rule.

mod entropy;
mod schur;
mod sumrule;

pub use entropy::{entropy, entropy_of_grid, EntropyOptions, EntropyReport};
pub use schur::{pdb_schur_at, schur_at, schur_grid, SchurGrid, SchurOptions, DEFAULT_CLUSTERING, SCHUR_TOL};
pub use sumrule::{
    bound_checks, coefficient_integral, herglotz_density, herglotz_identity_check, mean_log_a22_check, sigma_type, sumrule, BoundCheck,
    SigmaPoint, SumRuleOptions, SumRuleReport, BOUND_TOL, REAL_W_TOL,
};
