use serde::{Deserialize, Serialize};

use crate::fields::Field2D;
use crate::geometry::{Interval, PeriodicProfile};
use crate::spline::composite_gauss;

use super::{polynomial_defect, unfold, AnalysisError, UnfoldGrid, UnfoldKind};

/// `‖∂u/∂x_N(·, 0)‖_{L²(W)}` and `‖∂²u/∂x_N²(·, 0)‖_{L²(W)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceNorms {
    pub first: f64,
    pub second: f64,
}

pub fn normal_trace_norms(field: &dyn Field2D, width: Interval) -> TraceNorms {
    let (xs, ws) = composite_gauss(width.w0, width.w1, 64, 8);
    let (mut first, mut second) = (0.0, 0.0);
    for (&x, &w) in xs.iter().zip(&ws) {
        let j = field.jet2([x, 0.0]);
        first += w * j[2] * j[2];
        second += w * j[5] * j[5];
    }
    TraceNorms { first: first.sqrt(), second: second.sqrt() }
}

/// Agreement of `ε^{-5/2} ∂²_ȳ(û − 𝒫û)(·, 0)` with `−∂u/∂x_N(·, 0) b″(ȳ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    /// `‖A − B‖ / ‖B‖` over `Ŵ × Y`.
    pub residual: f64,
    /// `‖B‖`.
    pub reference_norm: f64,
    /// `‖D²_y(û − 𝒫û)‖ / ε^{5/2}` over `Ŵ × Y × (−1, 0)`.
    pub scaled_defect_norm: f64,
}

pub fn strange_correlation(field: &dyn Field2D, epsilon: f64, width: Interval, profile: &PeriodicProfile) -> Result<CorrelationReport, AnalysisError> {
    let grid = UnfoldGrid { depth: epsilon, ..UnfoldGrid::default() };
    let defect = polynomial_defect(&unfold(field, epsilon, width, UnfoldKind::Anisotropic, grid)?)?;
    let scale = epsilon.powf(2.5);
    let (mut diff, mut reference) = (0.0, 0.0);
    for c in 0..defect.cells.len() {
        for (iy, (&y, &w)) in defect.ybar.iter().zip(&defect.ybar_weights).enumerate() {
            let t = defect.trace_sample(c, iy);
            // the defect removes only the average of the normal derivative; add it back
            let un = field.partial([epsilon * (defect.cells[c] as f64 + y), 0.0], 0, 1);
            let a = t[3] / scale;
            let b = -un * profile.derivative(y, 2);
            diff += epsilon * w * (a - b).powi(2);
            reference += epsilon * w * b * b;
        }
    }
    let reference_norm = reference.sqrt();
    Ok(CorrelationReport {
        residual: if reference_norm > 0.0 { diff.sqrt() / reference_norm } else { diff.sqrt() },
        reference_norm,
        scaled_defect_norm: defect.second_derivative_norm() / scale,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub epsilon: f64,
    pub norms: TraceNorms,
    pub correlation: Option<CorrelationReport>,
}

/// Trends of the normal traces over a sweep (ε listed in decreasing order).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub alpha: f64,
    pub rows: Vec<TraceRow>,
    /// First-trace norms strictly decrease along the sweep.
    pub first_decreasing: bool,
    pub second_decreasing: bool,
}

/// Normal-trace norms for each `(ε, u_ε)`; at `α = 5/2` also the correlation report.
pub fn trace_identity_diagnostic(fields: &[(f64, &dyn Field2D)], alpha: f64, profile: &PeriodicProfile, width: Interval) -> Result<TraceReport, AnalysisError> {
    let mut rows = Vec::with_capacity(fields.len());
    for &(epsilon, field) in fields {
        let correlation = if (alpha - 2.5).abs() < 1e-12 { Some(strange_correlation(field, epsilon, width, profile)?) } else { None };
        rows.push(TraceRow { epsilon, norms: normal_trace_norms(field, width), correlation });
    }
    Ok(TraceReport::from_rows(alpha, rows))
}

impl TraceReport {
    /// Report for rows already computed, in sweep order.
    pub fn from_rows(alpha: f64, rows: Vec<TraceRow>) -> Self {
        let decreasing = |f: fn(&TraceRow) -> f64| rows.windows(2).all(|w| f(&w[1]) < f(&w[0]));
        TraceReport {
            alpha,
            first_decreasing: decreasing(|r| r.norms.first),
            second_decreasing: decreasing(|r| r.norms.second),
            rows,
        }
    }
}
