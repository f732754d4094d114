//! Experiment configuration, regime sweeps over `ε`, the flat limit problems
//! and persistence of the gap tables.

mod checks;
mod config;
mod output;
mod sweep;

use std::path::PathBuf;

use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::cell::CellError;
use crate::eig::EigError;
use crate::forms::FormsError;
use crate::geometry::GeometryError;
use crate::spline::SplineError;

pub use checks::{
    average_check, cell_check, green_check, limit_check, oracle1d_check, unfold_check, CheckReport, AVERAGE_RATIO, DEFECT_TOL, DEPTH_TOL, GREEN_BOX_TOL, GREEN_STRIP_TOL,
    ORACLE_TOL, UNFOLD_TOL,
};
pub use config::{BcName, ChartKind, ExperimentConfig, K1Setting, Reference, Regime};
pub use output::{csv_bytes, emit_results, read_manifest, Manifest, CSV_HEADER};
pub use sweep::{
    resolve_k1, run_limit_problems, run_sweep, solve_epsilon, solve_flat, EpsilonResult, FlatSettings, K1Source, LimitSpectra, SweepResult, Timings, Verdict,
    VerdictStatus, DISCRIMINATION_FACTOR,
};

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error(transparent)]
    Spline(#[from] SplineError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Forms(#[from] FormsError),
    #[error(transparent)]
    Eig(#[from] EigError),
    #[error(transparent)]
    Cell(#[from] CellError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}
