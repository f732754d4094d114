//! Transport of fields on `Ω` to `Ω_ε` by composition with `Φ_ε`.

use crate::geometry::{OscillatingDomain, Region};
use crate::spline::{QuadratureRule, TensorSplineSpace};

use super::{DiscreteField, FormsError};

/// Exact sampler of `T_ε u = u ∘ Φ_ε` on `Ω̄_ε`.
pub fn pullback_sampler<'a, F>(domain: &'a OscillatingDomain, u: F) -> impl Fn([f64; 2]) -> Result<f64, FormsError> + 'a
where
    F: Fn([f64; 2]) -> f64 + 'a,
{
    move |x| Ok(u(domain.eval_phi(x)?.value))
}

/// `L²` projection (reference measure) of `u ∘ Φ_ε` onto the free coefficients
/// of `target`, a space on `Ω_ε` parametrised by the graph chart.
///
/// Constrained coefficients are exactly zero, so boundary traces eliminated by
/// the mask vanish identically.
pub fn pullback_t<F>(domain: &OscillatingDomain, u: F, target: &TensorSplineSpace, rule: &QuadratureRule) -> Result<Vec<f64>, FormsError>
where
    F: Fn([f64; 2]) -> f64,
{
    let region = Region::Oscillating(domain.clone());
    target
        .project(rule, |st| {
            let x = region.chart(st).value;
            // clamp against roundoff in the chart so x stays in the closed domain
            let x = [x[0], x[1].min(domain.g_derivative(x[0], 0))];
            u(domain.phi_unchecked(x).value)
        })
        .map_err(|_| FormsError::IllConditionedProjection)
}

/// [`pullback_t`] for a spline field on the flat domain.
pub fn pullback_t_field(domain: &OscillatingDomain, field: &DiscreteField<'_>, target: &TensorSplineSpace, rule: &QuadratureRule) -> Result<Vec<f64>, FormsError> {
    pullback_t(domain, |x| field.value(x), target, rule)
}
