use serde::{Deserialize, Serialize};

use crate::fields::Field2D;
use crate::spline::{composite_gauss, gauss_legendre};

use super::AnalysisError;

/// `x ↦ ε^{-2} ∫_{C_ε(x)} v` over the square of side `ε` centred at `x`.
pub fn local_average<'a>(field: &'a dyn Field2D, epsilon: f64) -> impl Fn([f64; 2]) -> f64 + 'a {
    let (g, w) = gauss_legendre(8);
    move |x| {
        let mut acc = 0.0;
        for (s, ws) in g.iter().zip(&w) {
            for (t, wt) in g.iter().zip(&w) {
                acc += ws * wt * field.value([x[0] + epsilon * (s - 0.5), x[1] + epsilon * (t - 0.5)]);
            }
        }
        acc
    }
}

/// `‖v̄_ε − v‖` on the points of a rectangle whose averaging square stays inside it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AverageError {
    pub epsilon: f64,
    pub error: f64,
}

/// `L²` error of [`local_average`] over `Θ^ε = {x : C_ε(x) ⊂ Θ}` for the rectangle `Θ = x × z`.
pub fn average_error(field: &dyn Field2D, epsilon: f64, theta: [[f64; 2]; 2]) -> Result<AverageError, AnalysisError> {
    average_error_on(field, epsilon, theta, epsilon)
}

/// Errors for a sequence of `ε`, all measured on the common set `Θ^{max ε}` so
/// the ratios reflect the averaging error alone.
pub fn average_error_sequence(field: &dyn Field2D, epsilons: &[f64], theta: [[f64; 2]; 2]) -> Result<Vec<AverageError>, AnalysisError> {
    let largest = epsilons.iter().copied().fold(0.0, f64::max);
    epsilons.iter().map(|&e| average_error_on(field, e, theta, largest)).collect()
}

fn average_error_on(field: &dyn Field2D, epsilon: f64, theta: [[f64; 2]; 2], margin: f64) -> Result<AverageError, AnalysisError> {
    let [[x0, x1], [z0, z1]] = theta;
    let h = 0.5 * margin;
    if !(epsilon > 0.0) || epsilon > margin || x1 - x0 <= margin || z1 - z0 <= margin {
        return Err(AnalysisError::InvalidParameter(format!("epsilon {epsilon} does not fit in {theta:?}")));
    }
    let avg = local_average(field, epsilon);
    let (xs, xw) = composite_gauss(x0 + h, x1 - h, 16, 8);
    let (zs, zw) = composite_gauss(z0 + h, z1 - h, 4, 8);
    let mut acc = 0.0;
    for (x, wx) in xs.iter().zip(&xw) {
        for (z, wz) in zs.iter().zip(&zw) {
            let d = avg([*x, *z]) - field.value([*x, *z]);
            acc += wx * wz * d * d;
        }
    }
    Ok(AverageError { epsilon, error: acc.sqrt() })
}
