use super::{AnalysisError, UnfoldedField};

/// Cell averages over `Y` of the trace samples `D^β_y û(·, 0)`, `|β| ≤ 2`,
/// in the order `[1, ȳ, N, ȳȳ, ȳN, NN]`.
pub fn projector_coefficients(u: &UnfoldedField, cell: usize) -> [f64; 6] {
    let mut avg = [0.0; 6];
    for (iy, w) in u.ybar_weights.iter().enumerate() {
        for (a, s) in avg.iter_mut().zip(u.trace_sample(cell, iy)) {
            *a += w * s;
        }
    }
    avg
}

/// `D^β_y 𝒫ψ` at `y` for `|β| ≤ 2`, given the averages `A`.
///
/// With `Q₂ = P₂`, `Q₁ = P₁(I − Q₂)`, `Q₀ = P₀(I − Q₁ − Q₂)` and `∫_Y ȳ² = 1/12`:
/// `𝒫ψ = A₀ − A_ȳȳ/24 + A_ȳ ȳ + A_N y_N + A_ȳȳ ȳ²/2 + A_ȳN ȳ y_N + A_NN y_N²/2`.
fn projected_jet(a: &[f64; 6], y: f64, z: f64) -> [f64; 6] {
    let [a0, ay, an, ayy, ayn, ann] = *a;
    [
        a0 - ayy / 24.0 + ay * y + an * z + 0.5 * ayy * y * y + ayn * y * z + 0.5 * ann * z * z,
        ay + ayy * y + ayn * z,
        an + ayn * y + ann * z,
        ayy,
        ayn,
        ann,
    ]
}

/// The defect `û − 𝒫(û)` sampled on the same grid.
pub fn polynomial_defect(u: &UnfoldedField) -> Result<UnfoldedField, AnalysisError> {
    if u.order < 2 {
        return Err(AnalysisError::MissingDerivatives);
    }
    let mut out = u.clone();
    let (ny, nz) = (u.ybar.len(), u.yn[0].len());
    for c in 0..u.cells.len() {
        let a = projector_coefficients(u, c);
        for (iy, &y) in u.ybar.iter().enumerate() {
            let p = projected_jet(&a, y, 0.0);
            for (t, q) in out.trace[c * ny + iy].iter_mut().zip(p) {
                *t -= q;
            }
            for (iz, &z) in u.yn[iy].iter().enumerate() {
                let p = projected_jet(&a, y, z);
                for (s, q) in out.samples[(c * ny + iy) * nz + iz].iter_mut().zip(p) {
                    *s -= q;
                }
            }
        }
    }
    Ok(out)
}
