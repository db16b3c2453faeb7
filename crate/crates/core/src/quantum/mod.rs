//! Small dense complex linear algebra, Lindblad integration, Kraus maps and
//! steady states.

mod channel;
mod density;
mod expm;
mod lindblad;
mod matrix;

pub use channel::{apply_channel, apply_trace_decreasing, COMPLETENESS_TOL};
pub use density::{DensityMatrix, HERMITIAN_TOL, POSITIVITY_TOL, TRACE_TOL};
pub use expm::expm;
pub use lindblad::{
    evolve_lindblad, steady_state, LindbladGenerator, Trajectory, TRACE_DRIFT_LIMIT,
};
pub use matrix::{ops, ComplexMatrix};

/// Largest Hilbert-space dimension handled by the dense routines.
pub const MAX_DIM: usize = 16;
