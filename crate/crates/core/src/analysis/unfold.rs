use serde::{Deserialize, Serialize};

use crate::fields::Field2D;
use crate::geometry::{Interval, PeriodicProfile};
use crate::spline::{composite_gauss, gauss_legendre};

use super::AnalysisError;

/// Which rescaling of the normal variable is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UnfoldKind {
    /// `û(x̄, y) = u(ε[x̄/ε] + εȳ, ε y_N)` on `Y × (−depth/ε, 0)`.
    Anisotropic,
    /// `û(x̄, y) = u(ε[x̄/ε] + εȳ, ε^α y_N)` on `Y × (−1, b(ȳ))`.
    AlphaScaled { alpha: f64, profile: PeriodicProfile },
}

/// Sampling grid per cell. `û` is constant in `x̄` on each cell, so only the
/// `(ȳ, y_N)` grid is stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UnfoldGrid {
    /// Gauss points in `ȳ ∈ Y`.
    pub ybar: usize,
    /// Composite Gauss in `y_N`: pieces × points.
    pub yn_pieces: usize,
    pub yn_points: usize,
    /// Anisotropic kind only: the strip is `x_N ∈ (−depth, 0)`.
    pub depth: f64,
}

impl Default for UnfoldGrid {
    fn default() -> Self {
        Self { ybar: 16, yn_pieces: 4, yn_points: 8, depth: 1.0 }
    }
}

/// Sampled unfolded field with derivatives of order `≤ 2` in `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnfoldedField {
    pub kind: UnfoldKind,
    pub epsilon: f64,
    /// Integer parts `k` of the whole cells `C^k = εk + εY` inside the width.
    pub cells: Vec<i64>,
    pub ybar: Vec<f64>,
    pub ybar_weights: Vec<f64>,
    /// Normal sample points and weights for each `ȳ` sample.
    pub yn: Vec<Vec<f64>>,
    pub yn_weights: Vec<Vec<f64>>,
    /// `D^β_y û` as `[1, ȳ, N, ȳȳ, ȳN, NN]`, indexed `(cell, ȳ, y_N)`.
    pub samples: Vec<[f64; 6]>,
    /// The same at `y_N = 0`, indexed `(cell, ȳ)`.
    pub trace: Vec<[f64; 6]>,
    /// Highest sampled derivative order (0 or 2).
    pub order: usize,
}

impl UnfoldedField {
    fn nz(&self) -> usize {
        self.yn[0].len()
    }

    pub fn sample(&self, cell: usize, iy: usize, iz: usize) -> &[f64; 6] {
        &self.samples[(cell * self.ybar.len() + iy) * self.nz() + iz]
    }

    pub fn trace_sample(&self, cell: usize, iy: usize) -> &[f64; 6] {
        &self.trace[cell * self.ybar.len() + iy]
    }

    /// `ε Σ_k ∫_Y ∫ g(D_y û)` over the sampled cells: the integral over `Ŵ × Y × (·)`.
    pub fn integral(&self, g: impl Fn(&[f64; 6]) -> f64) -> f64 {
        let (ny, nz) = (self.ybar.len(), self.nz());
        let mut total = 0.0;
        for c in 0..self.cells.len() {
            let mut cell = 0.0;
            for iy in 0..ny {
                let col: f64 = (0..nz).map(|iz| self.yn_weights[iy][iz] * g(&self.samples[(c * ny + iy) * nz + iz])).sum();
                cell += self.ybar_weights[iy] * col;
            }
            total += self.epsilon * cell;
        }
        total
    }

    /// Largest difference of sampled values between any cell and the first one.
    pub fn max_cross_cell_deviation(&self) -> f64 {
        let per_cell = self.ybar.len() * self.nz();
        (1..self.cells.len())
            .flat_map(|c| (0..per_cell).map(move |i| (c, i)))
            .map(|(c, i)| (self.samples[c * per_cell + i][0] - self.samples[i][0]).abs())
            .fold(0.0, f64::max)
    }

    /// `‖Σ_{|β|=2} |D^β_y û|²‖^{1/2}` over `Ŵ × Y × (·)`, mixed term counted twice.
    pub fn second_derivative_norm(&self) -> f64 {
        self.integral(|s| s[3] * s[3] + 2.0 * s[4] * s[4] + s[5] * s[5]).sqrt()
    }

    fn normal_scale(&self) -> f64 {
        match &self.kind {
            UnfoldKind::Anisotropic => self.epsilon,
            UnfoldKind::AlphaScaled { alpha, .. } => self.epsilon.powf(*alpha),
        }
    }
}

/// Integer parts of the whole cells `(ε(k − ½), ε(k + ½)) ⊂ W`.
pub(crate) fn whole_cells(width: Interval, epsilon: f64) -> Result<Vec<i64>, AnalysisError> {
    if !(epsilon > 0.0) {
        return Err(AnalysisError::InvalidParameter(format!("epsilon = {epsilon}")));
    }
    let first = (width.w0 / epsilon + 0.5 - 1e-9).ceil() as i64;
    let last = (width.w1 / epsilon - 0.5 + 1e-9).floor() as i64;
    if last < first {
        return Err(AnalysisError::NoWholeCell { epsilon });
    }
    Ok((first..=last).collect())
}

/// Samples `û` for every whole cell of `width`.
pub fn unfold(field: &dyn Field2D, epsilon: f64, width: Interval, kind: UnfoldKind, grid: UnfoldGrid) -> Result<UnfoldedField, AnalysisError> {
    if grid.ybar == 0 || grid.yn_pieces == 0 || grid.yn_points == 0 || !(grid.depth > 0.0) {
        return Err(AnalysisError::InvalidParameter(format!("{grid:?}")));
    }
    let cells = whole_cells(width, epsilon)?;
    let order = if field.max_order() >= 2 { 2 } else { 0 };
    let (gy, gw) = gauss_legendre(grid.ybar);
    let ybar: Vec<f64> = gy.iter().map(|t| t - 0.5).collect();
    let (scale, yn, yn_weights): (f64, Vec<Vec<f64>>, Vec<Vec<f64>>) = match &kind {
        UnfoldKind::Anisotropic => {
            let (p, w) = composite_gauss(-grid.depth / epsilon, 0.0, grid.yn_pieces, grid.yn_points);
            (epsilon, vec![p; ybar.len()], vec![w; ybar.len()])
        }
        UnfoldKind::AlphaScaled { alpha, profile } => {
            if !(*alpha > 0.0) {
                return Err(AnalysisError::InvalidParameter(format!("alpha = {alpha}")));
            }
            let (p, w): (Vec<_>, Vec<_>) = ybar
                .iter()
                .map(|&y| composite_gauss(-1.0, profile.derivative(y, 0), grid.yn_pieces, grid.yn_points))
                .unzip();
            (epsilon.powf(*alpha), p, w)
        }
    };
    let jet = |x: [f64; 2]| -> [f64; 6] {
        let d = if order >= 2 { field.jet2(x) } else { [field.value(x), 0.0, 0.0, 0.0, 0.0, 0.0] };
        // D^β_y û = ε^{β_ȳ} s^{β_N} D^β_x u
        [d[0], epsilon * d[1], scale * d[2], epsilon * epsilon * d[3], epsilon * scale * d[4], scale * scale * d[5]]
    };
    let mut samples = Vec::with_capacity(cells.len() * ybar.len() * yn[0].len());
    let mut trace = Vec::with_capacity(cells.len() * ybar.len());
    for &k in &cells {
        for (iy, &y) in ybar.iter().enumerate() {
            let xb = epsilon * (k as f64 + y);
            for &z in &yn[iy] {
                samples.push(jet([xb, scale * z]));
            }
            trace.push(jet([xb, 0.0]));
        }
    }
    Ok(UnfoldedField { kind, epsilon, cells, ybar, ybar_weights: gw, yn, yn_weights, samples, trace, order })
}

/// Both sides of an unfolding identity and their residual relative to the
/// larger of `|lhs|`, `|rhs|` and the integral of the absolute integrand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

impl IntegrationCheck {
    fn new(lhs: f64, rhs: f64, magnitude: f64) -> Self {
        let scale = lhs.abs().max(rhs.abs()).max(magnitude);
        let residual = if scale == 0.0 { 0.0 } else { (lhs - rhs).abs() / scale };
        Self { lhs, rhs, residual }
    }
}

/// `∫_{Ŵ×(lower(x̄), upper(x̄))} g(x) dx` with its own composite rule, independent of the unfolding grid.
fn physical_integral(cells: &[i64], epsilon: f64, lower: impl Fn(f64) -> f64, upper: impl Fn(f64) -> f64, g: impl Fn([f64; 2]) -> f64) -> f64 {
    let a = epsilon * (cells[0] as f64 - 0.5);
    let b = epsilon * (*cells.last().unwrap() as f64 + 0.5);
    let (xs, xw) = composite_gauss(a, b, 3 * cells.len(), 10);
    xs.iter()
        .zip(&xw)
        .map(|(&x, &wx)| {
            let (zs, zw) = composite_gauss(lower(x), upper(x), 6, 10);
            wx * zs.iter().zip(&zw).map(|(&z, &wz)| wz * g([x, z])).sum::<f64>()
        })
        .sum()
}

/// `∫_{Ŵ×(a,0)} u` against `ε ∫_{Ŵ×Y×(a/ε,0)} û` (anisotropic kind, `a ∈ [−1, 0)`),
/// or the layer `x_N ∈ (−ε^α, g_ε(x̄))` against `ε^α ∫ û` for the α-scaled kind.
pub fn check_exact_integration(field: &dyn Field2D, epsilon: f64, a: f64, width: Interval, kind: UnfoldKind, grid: UnfoldGrid) -> Result<IntegrationCheck, AnalysisError> {
    if !(-1.0..0.0).contains(&a) {
        return Err(AnalysisError::InvalidParameter(format!("a = {a} not in [-1, 0)")));
    }
    let u = unfold(field, epsilon, width, kind, UnfoldGrid { depth: -a, ..grid })?;
    let rhs = u.normal_scale() * u.integral(|s| s[0]);
    let integrate = |g: &dyn Fn([f64; 2]) -> f64| match &u.kind {
        UnfoldKind::Anisotropic => physical_integral(&u.cells, epsilon, |_| a, |_| 0.0, g),
        UnfoldKind::AlphaScaled { alpha, profile } => {
            let s = epsilon.powf(*alpha);
            physical_integral(&u.cells, epsilon, |_| -s, |x| s * profile.derivative(x / epsilon, 0), g)
        }
    };
    let lhs = integrate(&|x| field.value(x));
    let magnitude = integrate(&|x| field.value(x).abs());
    Ok(IntegrationCheck::new(lhs, rhs, magnitude))
}

/// `∫_{Ŵ×(a,0)} |∂²u/∂x̄∂x_N|²` against `ε^{1−4} ∫ |∂²û/∂ȳ∂y_N|²` (anisotropic kind).
pub fn check_derivative_scaling(field: &dyn Field2D, epsilon: f64, a: f64, width: Interval, grid: UnfoldGrid) -> Result<IntegrationCheck, AnalysisError> {
    if field.max_order() < 2 {
        return Err(AnalysisError::InsufficientOrder { needed: 2, available: field.max_order() });
    }
    if !(-1.0..0.0).contains(&a) {
        return Err(AnalysisError::InvalidParameter(format!("a = {a} not in [-1, 0)")));
    }
    let u = unfold(field, epsilon, width, UnfoldKind::Anisotropic, UnfoldGrid { depth: -a, ..grid })?;
    let rhs = epsilon.powi(1 - 4) * u.integral(|s| s[4] * s[4]);
    let lhs = physical_integral(&u.cells, epsilon, |_| a, |_| 0.0, |x| field.partial(x, 1, 1).powi(2));
    Ok(IntegrationCheck::new(lhs, rhs, lhs))
}
