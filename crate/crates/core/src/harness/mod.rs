//! Convergence and correlation studies on generated datasets.
//!
//! [`run_study`] evaluates the quality indicator of every mesh before it
//! solves anything, then reports relative errors, rates against `h` and the
//! rank correlation between quality and error.

pub mod convergence;
pub mod errors;
pub mod problem;
pub mod report;

use thiserror::Error;

pub use convergence::{
    average_ranks, correlate, ls_slope, quality_series, run_convergence, spearman, CorrelationReport,
    DatasetCorrelation, ErrorReport, LevelErrors, QualitySeries,
};
pub use errors::{compute_errors, ErrorRow};
pub use problem::{manufactured_problem, patch_problem, problem_by_name, Problem};
pub use report::{errors_svg, quality_svg, run_study, study_csv, write_report, ReportFormat, Study, StudyEntry, CSV_HEADER};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("unknown problem {0:?} (expected paper or patch)")]
    UnknownProblem(String),
    #[error(transparent)]
    Dataset(#[from] crate::meshing::DatasetError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
