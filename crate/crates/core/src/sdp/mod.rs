//! The vector relaxation of minimum balanced k-partition and the geometry of
//! its solutions.

mod diagnostics;
mod embedding;
mod solver;

pub use diagnostics::{compute_diagnostics, SdpDiagnostics};
pub use embedding::{
    check_feasibility, format_embedding, read_embedding, sdp_objective, Embedding,
    FeasibilityReport,
};
pub use solver::{solve_sdp, SdpSolution, SolverConfig};
