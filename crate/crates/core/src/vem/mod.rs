//! Lowest-order conforming virtual elements for `-Delta u = f` with
//! Dirichlet data.
//!
//! The unknowns are the vertex values. Every cell contributes
//! `|P| grad Pi u . grad Pi v + h_P (u - Pi u) . (v - Pi v)` where `Pi` is
//! the elliptic projection onto linears and the second product runs over
//! vertex values (the dofi-dofi stabilization).

pub mod assembly;
pub mod basis;
pub mod local;
pub mod projector;
pub mod sparse;

use thiserror::Error;

pub use assembly::{
    assemble, assemble_full, assemble_with_mask, local_systems, solve, DiscreteSolution, LinearSystem,
    LocalSystems,
};
pub use basis::{CellBasis, EdgeBasis, FaceBasis};
pub use local::{consistency_matrix, local_load, local_stiffness, stabilization_matrix, DenseMatrix};
pub use projector::{cell_projector, face_projector, face_projectors, CellProjector, FaceProjector};
pub use sparse::{estimate_condition, pcg, CgResult, CsrMatrix, CG_TOLERANCE};

#[derive(Debug, Error)]
pub enum VemError {
    #[error("singular projection system on {kind} {id}")]
    SingularGram { kind: &'static str, id: usize },
    #[error("cells without an interior kernel point: {cells:?}")]
    NoKernelPoint { cells: Vec<usize> },
    #[error("conjugate gradient stalled at relative residual {residual:e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },
    #[error("system is singular")]
    SingularSystem,
}

/// Condition number of the reduced system matrix.
pub fn system_condition(system: &LinearSystem) -> Result<f64, VemError> {
    estimate_condition(&system.matrix)
}
