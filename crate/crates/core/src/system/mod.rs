//! Coefficient model, transfer-matrix integration and gauge conversion.

mod integrator;
mod pdb;
mod profile;
mod transfer;

pub use integrator::{cells, propagate, solve, step, Cell, Generator, IntegratorOptions, Scheme};
pub use pdb::{arov_from_pdb, mult_integral, pdb_transfer, to_pdb, PdBHamiltonian, PdbGenerator, Tag, FD_TOL, HAMILTONIAN_TOL, TRACE_J_TOL};
pub use profile::{coeff_matrices, ArovProfile, Coefficient, Interp, Piece, Side, PSD_CLAMP};
pub use transfer::{monotonicity_check, transfer, transfer_at_i, ArovGenerator, Gauge, TransferResult, LAMBDA_REL_TOL, TRIANGULARITY_TOL};

pub(crate) use transfer::transfer_matrix;
