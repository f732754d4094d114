//! Assembly of the triharmonic form `Q(u, v) = ∫ D³u : D³v + uv`, the mass
//! form, the boundary-condition families and the `K1` boundary term on `Γ`.

mod assemble;
mod chain;
mod pullback;

pub use assemble::{assemble, assemble_1d, AssembledPencil};
pub use chain::{physical_third_derivatives, PhysicalJetMap};
pub use pullback::{pullback_t, pullback_t_field, pullback_sampler};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fields::Field2D;
use crate::geometry::{GeometryError, Region, ScalarJet3};
use crate::spline::{Side, SplineError, SplineSpace1D, TensorSplineSpace};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormsError {
    #[error("chart jacobian is singular (det = {0:.3e})")]
    DegenerateChart(f64),
    #[error("constraint mask does not match the form specification: {0}")]
    InconsistentMask(String),
    #[error("the strange boundary term is only defined on the flat domain")]
    StrangeOnOscillating,
    #[error("K1 must be finite and nonnegative, got {0}")]
    InvalidK1(f64),
    #[error("quadrature rule has {0} points per span; need at least 1")]
    Quadrature(usize),
    #[error("projection system is ill conditioned (Cholesky failed)")]
    IllConditionedProjection,
    #[error(transparent)]
    Spline(#[from] SplineError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Boundary-condition family on `Γ` (the top side).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum BcFamily {
    /// `u = 0` essential; the remaining conditions are natural.
    Wbc,
    /// `u = ∂u/∂n = 0` essential on `Γ`.
    Sbc,
    /// `u = ∂u/∂n = ∂²u/∂n² = 0` essential on `Γ`.
    Dbc,
    /// Weak conditions plus `K1 ∫_Γ ∂u/∂x_N ∂v/∂x_N`.
    Strange { k1: f64 },
}

impl BcFamily {
    /// Coefficient layers eliminated on `Γ`.
    pub fn top_layers(self) -> usize {
        match self {
            BcFamily::Wbc | BcFamily::Strange { .. } => 1,
            BcFamily::Sbc => 2,
            BcFamily::Dbc => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BcFamily::Wbc => "wbc",
            BcFamily::Sbc => "sbc",
            BcFamily::Dbc => "dbc",
            BcFamily::Strange { .. } => "strange",
        }
    }
}

/// What to assemble: the family on `Γ` and the layer count on the other sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormSpec {
    pub bc: BcFamily,
    pub other_layers: usize,
}

impl FormSpec {
    pub fn new(bc: BcFamily) -> Self {
        Self { bc, other_layers: 1 }
    }

    pub fn layers(&self, side: Side) -> usize {
        match side {
            Side::Top => self.bc.top_layers(),
            _ => self.other_layers,
        }
    }

    /// Applies the masks of this specification to an unconstrained space.
    pub fn constrain(&self, x: SplineSpace1D, y: SplineSpace1D) -> Result<TensorSplineSpace, FormsError> {
        let mut space = TensorSplineSpace::new(x, y);
        for side in Side::ALL {
            space.constrain(side, self.layers(side))?;
        }
        Ok(space)
    }

    fn validate(&self, space: &TensorSplineSpace, region: &Region) -> Result<(), FormsError> {
        if let BcFamily::Strange { k1 } = self.bc {
            if !(k1.is_finite() && k1 >= 0.0) {
                return Err(FormsError::InvalidK1(k1));
            }
            if !matches!(region, Region::Flat(_)) {
                return Err(FormsError::StrangeOnOscillating);
            }
        }
        for side in Side::ALL {
            let (want, have) = (self.layers(side), space.side_layers(side));
            if want != have {
                return Err(FormsError::InconsistentMask(format!("side {side:?}: expected {want} layers, mask has {have}")));
            }
        }
        Ok(())
    }
}

/// A spline function on a region, evaluated in physical coordinates.
#[derive(Debug, Clone)]
pub struct DiscreteField<'a> {
    pub space: &'a TensorSplineSpace,
    pub region: &'a Region,
    /// Full coefficient vector (constrained entries included).
    pub coeffs: Vec<f64>,
}

impl<'a> DiscreteField<'a> {
    pub fn from_free(space: &'a TensorSplineSpace, region: &'a Region, free: &[f64]) -> Self {
        Self { space, region, coeffs: space.expand(free) }
    }

    /// Physical jet to order three at `x ∈ Ω̄`.
    pub fn jet(&self, x: [f64; 2]) -> Result<ScalarJet3, FormsError> {
        let st = self.region.chart_inverse(x).map(|v| v.clamp(0.0, 1.0));
        let chart = self.region.chart(st);
        let map = PhysicalJetMap::new(&chart)?;
        let p = map.apply(&self.space.eval_function(&self.coeffs, st, 3));
        Ok(ScalarJet3::from_partials(|a, b| p[crate::spline::jet_index(a, b)]))
    }

    pub fn value(&self, x: [f64; 2]) -> f64 {
        let st = self.region.chart_inverse(x).map(|v| v.clamp(0.0, 1.0));
        self.space.eval_function(&self.coeffs, st, 0)[0]
    }
}

/// Partials above order three are reported as NaN.
impl Field2D for DiscreteField<'_> {
    fn partial(&self, x: [f64; 2], a: usize, b: usize) -> f64 {
        if a + b > 3 {
            return f64::NAN;
        }
        self.jet(x).map_or(f64::NAN, |j| j.components(a + b)[b])
    }

    fn max_order(&self) -> usize {
        3
    }

    fn jet2(&self, x: [f64; 2]) -> [f64; 6] {
        match self.jet(x) {
            Ok(j) => [j.value, j.grad[0], j.grad[1], j.hess[0][0], j.hess[0][1], j.hess[1][1]],
            Err(_) => [f64::NAN; 6],
        }
    }
}
