//! Unfolding, averaging, the polynomial-defect projector, normal-trace
//! diagnostics and numerical checks of the triharmonic Green formula.

mod average;
mod defect;
mod green;
mod trace;
mod unfold;

use thiserror::Error;

pub use average::{average_error, average_error_sequence, local_average, AverageError};
pub use defect::{polynomial_defect, projector_coefficients};
pub use green::{green_1d, strip_corpus, verify_green, GreenCheck, GreenDomain, GreenPair};
pub use trace::{normal_trace_norms, strange_correlation, trace_identity_diagnostic, CorrelationReport, TraceNorms, TraceReport, TraceRow};
pub use unfold::{check_derivative_scaling, check_exact_integration, unfold, IntegrationCheck, UnfoldGrid, UnfoldKind, UnfoldedField};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("no whole cell of size {epsilon} fits in the width")]
    NoWholeCell { epsilon: f64 },
    #[error("field provides derivatives to order {available}, {needed} required")]
    InsufficientOrder { needed: usize, available: usize },
    #[error("unfolded field carries no second-derivative samples")]
    MissingDerivatives,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
