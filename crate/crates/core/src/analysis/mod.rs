//! Validation mathematics: Kac ring statistics, Lucas zeros, cubic
//! discriminant structure.

mod cubic;
mod kac;
mod lucas;
pub mod report;

use thiserror::Error;

pub use cubic::{
    classify_regime, cubic_discriminant, discriminant_boundary, real_axis_feasibility, labeled_points_report, reference_roots,
    CubicPoint, Interval, ReferenceRoot, Regime, CLASSIFY_TOLERANCE,
};
pub use kac::{real_root_slope, KacAccumulator, KacStats, RADIAL_BINS, RADIAL_MAX};
pub use lucas::{lucas_max_error, lucas_reference_zeros, LucasError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("expected {expected} roots, got {got}")]
    CardinalityMismatch { expected: usize, got: usize },
    #[error("{0}")]
    Domain(&'static str),
    #[error(transparent)]
    Solver(#[from] crate::solver::SolverError),
    #[error(transparent)]
    Family(#[from] crate::family::FamilyError),
}
