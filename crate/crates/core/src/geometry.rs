//! Periodic profiles, the oscillating domain `Ω_ε`, the vertical shift `h_ε`,
//! the diffeomorphism `Φ_ε` and the graph charts used for assembly.
//!
//! Everything here is two-dimensional: `x = (x̄, x_N)` with `x̄` in an
//! interval `W` and the reference cell `Y = (-1/2, 1/2)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Highest profile derivative exposed through the checked API.
pub const MAX_PROFILE_ORDER: usize = 4;

const POSITIVITY_SAMPLES: usize = 10_000;
const POSITIVITY_MARGIN: f64 = 1e-9;
/// Slack used when deciding whether a point lies in the closure of a domain.
const DOMAIN_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("derivative order {0} is not supported (max {1})")]
    UnsupportedOrder(usize, usize),
    #[error("profile is not positive: minimum sampled value {0:.3e}")]
    NonPositiveProfile(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("point ({0}, {1}) lies outside the closed domain")]
    OutsideDomain(f64, f64),
}

/// One trigonometric mode `a cos(2πk y) + c sin(2πk y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode(pub u32, pub f64, pub f64);

/// A positive, 1-periodic trigonometric polynomial `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileSpec", into = "ProfileSpec")]
pub struct PeriodicProfile {
    offset: f64,
    modes: Vec<Mode>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ProfileSpec {
    offset: f64,
    #[serde(default)]
    modes: Vec<(u32, f64, f64)>,
}

impl TryFrom<ProfileSpec> for PeriodicProfile {
    type Error = GeometryError;
    fn try_from(spec: ProfileSpec) -> Result<Self, Self::Error> {
        let modes = spec.modes.into_iter().map(|(k, a, c)| Mode(k, a, c)).collect();
        PeriodicProfile::new(spec.offset, modes)
    }
}

impl From<PeriodicProfile> for ProfileSpec {
    fn from(p: PeriodicProfile) -> Self {
        ProfileSpec {
            offset: p.offset,
            modes: p.modes.iter().map(|m| (m.0, m.1, m.2)).collect(),
        }
    }
}

impl PeriodicProfile {
    /// Builds the profile and rejects it unless it is positive on a fine sample grid.
    pub fn new(offset: f64, modes: Vec<Mode>) -> Result<Self, GeometryError> {
        if !offset.is_finite() || modes.iter().any(|m| !m.1.is_finite() || !m.2.is_finite()) {
            return Err(GeometryError::InvalidParameter("non-finite profile coefficient".into()));
        }
        let profile = Self { offset, modes };
        let min = profile.sampled_min();
        if min <= POSITIVITY_MARGIN {
            return Err(GeometryError::NonPositiveProfile(min));
        }
        Ok(profile)
    }

    pub fn constant(value: f64) -> Result<Self, GeometryError> {
        Self::new(value, Vec::new())
    }

    /// `offset + amplitude·cos(2π y)`.
    pub fn cosine(offset: f64, amplitude: f64) -> Result<Self, GeometryError> {
        Self::new(offset, vec![Mode(1, amplitude, 0.0)])
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn is_constant(&self) -> bool {
        self.modes.iter().all(|m| m.0 == 0 || (m.1 == 0.0 && m.2 == 0.0))
    }

    /// Largest frequency carrying a nonzero amplitude.
    pub fn max_frequency(&self) -> u32 {
        self.modes
            .iter()
            .filter(|m| m.1 != 0.0 || m.2 != 0.0)
            .map(|m| m.0)
            .max()
            .unwrap_or(0)
    }

    /// The profile multiplied by `t` (not revalidated: `t > 0` keeps positivity).
    pub fn scaled(&self, t: f64) -> Result<Self, GeometryError> {
        Self::new(
            self.offset * t,
            self.modes.iter().map(|m| Mode(m.0, m.1 * t, m.2 * t)).collect(),
        )
    }

    /// The translated profile `y ↦ b(y + s)`.
    pub fn shifted(&self, s: f64) -> Self {
        let modes = self
            .modes
            .iter()
            .map(|&Mode(k, a, c)| {
                let th = 2.0 * PI * k as f64 * s;
                let (sn, cs) = th.sin_cos();
                Mode(k, a * cs + c * sn, c * cs - a * sn)
            })
            .collect();
        Self { offset: self.offset, modes }
    }

    fn sampled_min(&self) -> f64 {
        (0..POSITIVITY_SAMPLES)
            .map(|i| self.derivative(-0.5 + i as f64 / POSITIVITY_SAMPLES as f64, 0))
            .fold(f64::INFINITY, f64::min)
    }

    /// `d^order b / dy^order` at `y`, checked against [`MAX_PROFILE_ORDER`].
    pub fn eval(&self, y: f64, order: usize) -> Result<f64, GeometryError> {
        if order > MAX_PROFILE_ORDER {
            return Err(GeometryError::UnsupportedOrder(order, MAX_PROFILE_ORDER));
        }
        Ok(self.derivative(y, order))
    }

    /// Unchecked derivative of any order; exact for the trigonometric form.
    pub fn derivative(&self, y: f64, order: usize) -> f64 {
        let shift = order as f64 * PI / 2.0;
        let mut acc = if order == 0 { self.offset } else { 0.0 };
        for &Mode(k, a, c) in &self.modes {
            if k == 0 {
                if order == 0 {
                    acc += a;
                }
                continue;
            }
            let w = 2.0 * PI * k as f64;
            let th = w * y + shift;
            acc += w.powi(order as i32) * (a * th.cos() + c * th.sin());
        }
        acc
    }

    /// Values of `b, b', b'', b'''` at `y`.
    pub fn jet3(&self, y: f64) -> [f64; 4] {
        [0, 1, 2, 3].map(|m| self.derivative(y, m))
    }
}

/// Derivatives of a scalar function of two variables up to order three.
/// Indices run over `(x̄, x_N)`; all tensors are stored in full symmetric form.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ScalarJet3 {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: [[f64; 2]; 2],
    pub third: [[[f64; 2]; 2]; 2],
}

impl ScalarJet3 {
    /// Builds the jet from mixed partials `d(a, b) = ∂^a_x̄ ∂^b_xN`.
    pub fn from_partials(d: impl Fn(usize, usize) -> f64) -> Self {
        let mut jet = ScalarJet3 { value: d(0, 0), ..Default::default() };
        for i in 0..2 {
            jet.grad[i] = d(1 - i, i);
            for j in 0..2 {
                let nz = i + j;
                jet.hess[i][j] = d(2 - nz, nz);
                for k in 0..2 {
                    let nz = i + j + k;
                    jet.third[i][j][k] = d(3 - nz, nz);
                }
            }
        }
        jet
    }

    /// Symmetric components of the derivative of the given order, listed as
    /// `∂^{order-j}_x̄ ∂^j_xN` for `j = 0..=order`.
    pub fn components(&self, order: usize) -> Vec<f64> {
        match order {
            0 => vec![self.value],
            1 => self.grad.to_vec(),
            2 => vec![self.hess[0][0], self.hess[0][1], self.hess[1][1]],
            3 => vec![self.third[0][0][0], self.third[0][0][1], self.third[0][1][1], self.third[1][1][1]],
            _ => Vec::new(),
        }
    }

    /// Frobenius norm of the full derivative tensor of the given order.
    pub fn tensor_norm(&self, order: usize) -> f64 {
        // multiplicity of ∂^{order-j}_x̄ ∂^j_xN in the full tensor is C(order, j)
        let binom = [[1.0, 0.0, 0.0, 0.0], [1.0, 1.0, 0.0, 0.0], [1.0, 2.0, 1.0, 0.0], [1.0, 3.0, 3.0, 1.0]];
        self.components(order)
            .iter()
            .enumerate()
            .map(|(j, c)| binom[order][j] * c * c)
            .sum::<f64>()
            .sqrt()
    }
}

/// Value and derivatives to order three of a map `R² → R²`.
///
/// `jac[k][i] = ∂F^k/∂ξ_i`, `hess[k][i][j] = ∂²F^k/∂ξ_i∂ξ_j`, and so on.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MapJet3 {
    pub value: [f64; 2],
    pub jac: [[f64; 2]; 2],
    pub hess: [[[f64; 2]; 2]; 2],
    pub third: [[[[f64; 2]; 2]; 2]; 2],
}

impl MapJet3 {
    pub fn identity(at: [f64; 2]) -> Self {
        MapJet3 { value: at, jac: [[1.0, 0.0], [0.0, 1.0]], ..Default::default() }
    }

    pub fn det(&self) -> f64 {
        self.jac[0][0] * self.jac[1][1] - self.jac[0][1] * self.jac[1][0]
    }

    /// Builds a jet whose components are given by two scalar jets.
    pub fn from_components(first: &ScalarJet3, second: &ScalarJet3) -> Self {
        let mut m = MapJet3::default();
        for (k, c) in [first, second].into_iter().enumerate() {
            m.value[k] = c.value;
            m.jac[k] = c.grad;
            m.hess[k] = c.hess;
            m.third[k] = c.third;
        }
        m
    }
}

/// Closed interval `[w0, w1]` carrying the lateral variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub w0: f64,
    pub w1: f64,
}

impl Interval {
    pub fn new(w0: f64, w1: f64) -> Result<Self, GeometryError> {
        if !(w0.is_finite() && w1.is_finite() && w1 > w0) {
            return Err(GeometryError::InvalidParameter(format!("empty interval [{w0}, {w1}]")));
        }
        Ok(Self { w0, w1 })
    }

    pub fn unit() -> Self {
        Self { w0: 0.0, w1: 1.0 }
    }

    pub fn length(&self) -> f64 {
        self.w1 - self.w0
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.w0 - DOMAIN_TOL && x <= self.w1 + DOMAIN_TOL
    }
}

impl Default for Interval {
    fn default() -> Self {
        Self::unit()
    }
}

/// `Ω_ε = {x̄ ∈ W, -1 < x_N < g_ε(x̄) = ε^α b(x̄/ε)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatingDomain {
    width: Interval,
    alpha: f64,
    epsilon: f64,
    profile: PeriodicProfile,
    eps_alpha: f64,
    chart_layer: Option<f64>,
}

impl OscillatingDomain {
    pub fn new(width: Interval, alpha: f64, epsilon: f64, profile: PeriodicProfile) -> Result<Self, GeometryError> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(GeometryError::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(GeometryError::InvalidParameter(format!("epsilon must lie in (0, 1], got {epsilon}")));
        }
        Ok(Self { width, alpha, epsilon, eps_alpha: epsilon.powf(alpha), profile, chart_layer: None })
    }

    /// Switches [`Region::chart`] to the layered chart whose oscillation is
    /// confined to the reference band `t ∈ (1 − layer, 1)`.
    pub fn with_chart_layer(mut self, layer: f64) -> Result<Self, GeometryError> {
        if !(layer > 0.0 && layer <= 1.0) {
            return Err(GeometryError::InvalidParameter(format!("chart layer must lie in (0, 1], got {layer}")));
        }
        self.chart_layer = Some(layer);
        Ok(self)
    }

    pub fn chart_layer(&self) -> Option<f64> {
        self.chart_layer
    }

    pub fn width(&self) -> Interval {
        self.width
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn profile(&self) -> &PeriodicProfile {
        &self.profile
    }

    /// `g_ε(x̄)`; rejects `x̄ ∉ W`.
    pub fn eval_g(&self, xbar: f64) -> Result<f64, GeometryError> {
        if !self.width.contains(xbar) {
            return Err(GeometryError::OutsideDomain(xbar, 0.0));
        }
        Ok(self.g(xbar))
    }

    pub(crate) fn g(&self, xbar: f64) -> f64 {
        self.eps_alpha * self.profile.derivative(xbar / self.epsilon, 0)
    }

    /// `g_ε^{(m)}(x̄) = ε^{α-m} b^{(m)}(x̄/ε)`.
    pub fn g_derivative(&self, xbar: f64, order: usize) -> f64 {
        self.eps_alpha * self.epsilon.powi(-(order as i32)) * self.profile.derivative(xbar / self.epsilon, order)
    }

    pub fn contains(&self, x: [f64; 2]) -> bool {
        self.width.contains(x[0]) && x[1] >= -1.0 - DOMAIN_TOL && x[1] <= self.g(x[0].clamp(self.width.w0, self.width.w1)) + DOMAIN_TOL
    }

    fn check(&self, x: [f64; 2]) -> Result<(), GeometryError> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(GeometryError::OutsideDomain(x[0], x[1]))
        }
    }

    /// Full third-order jet of `h_ε` at `x`.
    ///
    /// Above `x_N = -ε`, `h_ε = F(x̄)·s⁴` with `s = x_N + ε` and
    /// `F = G∘g_ε`, `G(u) = u (u + ε)^{-4}`, so every mixed partial factors as
    /// `F^{(a)}(x̄) · ∂^b_s s⁴`.
    pub fn h_jet(&self, x: [f64; 2]) -> Result<ScalarJet3, GeometryError> {
        self.check(x)?;
        Ok(self.h_jet_unchecked(x))
    }

    pub(crate) fn h_jet_unchecked(&self, x: [f64; 2]) -> ScalarJet3 {
        let eps = self.epsilon;
        let s = x[1] + eps;
        if s <= 0.0 {
            return ScalarJet3::default();
        }
        let g = [0, 1, 2, 3].map(|m| self.g_derivative(x[0], m));
        let d = g[0] + eps;
        // derivatives of G(u) = u (u+ε)^{-4} at u = g
        let g1 = (eps - 3.0 * g[0]) * d.powi(-5);
        let g2 = (12.0 * g[0] - 8.0 * eps) * d.powi(-6);
        let g3 = 60.0 * (eps - g[0]) * d.powi(-7);
        let f = [
            g[0] * d.powi(-4),
            g1 * g[1],
            g2 * g[1] * g[1] + g1 * g[2],
            g3 * g[1].powi(3) + 3.0 * g2 * g[1] * g[2] + g1 * g[3],
        ];
        let sp = [s.powi(4), 4.0 * s.powi(3), 12.0 * s * s, 24.0 * s];
        ScalarJet3::from_partials(|a, b| f[a] * sp[b])
    }

    /// Symmetric components of `D^order h_ε(x)`, ordered as in [`ScalarJet3::components`].
    pub fn eval_h(&self, x: [f64; 2], order: usize) -> Result<Vec<f64>, GeometryError> {
        if order > 3 {
            return Err(GeometryError::UnsupportedOrder(order, 3));
        }
        Ok(self.h_jet(x)?.components(order))
    }

    /// `Φ_ε(x̄, x_N) = (x̄, x_N - h_ε(x̄, x_N))` with derivatives to order three.
    /// Largest Frobenius norm of `D^l h_ε`, `l = 0..=3`, over an `n × n` grid of
    /// `W × (−ε, g_ε(x̄))`, where `h_ε` is supported.
    pub fn h_grid_maxima(&self, n: usize) -> [f64; 4] {
        let mut out = [0.0f64; 4];
        let w = self.width;
        for i in 0..n {
            let xbar = w.w0 + w.length() * i as f64 / (n - 1).max(1) as f64;
            let top = self.g(xbar);
            for j in 0..n {
                let xn = -self.epsilon + (top + self.epsilon) * j as f64 / (n - 1).max(1) as f64;
                let jet = self.h_jet_unchecked([xbar, xn]);
                for (l, m) in out.iter_mut().enumerate() {
                    *m = m.max(jet.tensor_norm(l));
                }
            }
        }
        out
    }

    pub fn eval_phi(&self, x: [f64; 2]) -> Result<MapJet3, GeometryError> {
        self.check(x)?;
        Ok(self.phi_unchecked(x))
    }

    pub(crate) fn phi_unchecked(&self, x: [f64; 2]) -> MapJet3 {
        let h = self.h_jet_unchecked(x);
        let mut m = MapJet3::identity([x[0], x[1] - h.value]);
        for i in 0..2 {
            m.jac[1][i] -= h.grad[i];
            for j in 0..2 {
                m.hess[1][i][j] = -h.hess[i][j];
                for k in 0..2 {
                    m.third[1][i][j][k] = -h.third[i][j][k];
                }
            }
        }
        m
    }
}

/// A computational region described by a vertical graph over `W`.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    /// `Ω = W × (-1, 0)`.
    Flat(Interval),
    /// `Ω_ε`.
    Oscillating(OscillatingDomain),
}

impl Region {
    pub fn width(&self) -> Interval {
        match self {
            Region::Flat(w) => *w,
            Region::Oscillating(d) => d.width(),
        }
    }

    /// Height of the top boundary over `x̄`.
    pub fn top(&self, xbar: f64) -> f64 {
        match self {
            Region::Flat(_) => 0.0,
            Region::Oscillating(d) => d.g(xbar),
        }
    }

    fn top_jet(&self, xbar: f64) -> [f64; 4] {
        match self {
            Region::Flat(_) => [0.0; 4],
            Region::Oscillating(d) => [0, 1, 2, 3].map(|m| d.g_derivative(xbar, m)),
        }
    }

    /// Blend `ψ` and its first three derivatives at `t`.
    fn blend(&self, t: f64) -> [f64; 4] {
        match self {
            Region::Oscillating(d) if d.chart_layer.is_some() => {
                let l = d.chart_layer.unwrap();
                let r = (t - 1.0 + l) / l;
                if r <= 0.0 {
                    return [0.0; 4];
                }
                [r.powi(4), 4.0 * r.powi(3) / l, 12.0 * r * r / (l * l), 24.0 * r / l.powi(3)]
            }
            _ => [t, 1.0, 0.0, 0.0],
        }
    }

    /// Chart `(s, t) ↦ (w0 + s|W|, -1 + t + ψ(t) g(x̄))` from the unit square,
    /// with derivatives to order three.
    ///
    /// By default `ψ(t) = t`, the vertical graph chart `-1 + t (g + 1)`. With
    /// [`OscillatingDomain::with_chart_layer`] it is `ψ = ((t − 1 + ℓ)/ℓ)⁴` on
    /// the top band and zero below, so the chart is the identity shift in the
    /// bulk and `C³` across `t = 1 − ℓ`.
    pub fn chart(&self, st: [f64; 2]) -> MapJet3 {
        let w = self.width();
        let lw = w.length();
        let xbar = w.w0 + st[0] * lw;
        let t = st[1];
        let g = self.top_jet(xbar);
        let gs = [g[0], lw * g[1], lw * lw * g[2], lw.powi(3) * g[3]];
        let p = self.blend(t);
        let mut m = MapJet3::default();
        m.value = [xbar, -1.0 + t + p[0] * gs[0]];
        m.jac[0] = [lw, 0.0];
        m.jac[1] = [p[0] * gs[1], 1.0 + p[1] * gs[0]];
        m.hess[1][0][0] = p[0] * gs[2];
        m.hess[1][0][1] = p[1] * gs[1];
        m.hess[1][1][0] = p[1] * gs[1];
        m.hess[1][1][1] = p[2] * gs[0];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    // a = number of t-derivatives
                    let a = i + j + k;
                    m.third[1][i][j][k] = p[a] * gs[3 - a];
                }
            }
        }
        m
    }

    /// Inverse of [`Region::chart`]: reference coordinates of a physical point.
    pub fn chart_inverse(&self, x: [f64; 2]) -> [f64; 2] {
        let w = self.width();
        let s = (x[0] - w.w0) / w.length();
        let g = self.top(x[0]);
        let graph = (x[1] + 1.0) / (g + 1.0);
        let Region::Oscillating(d) = self else { return [s, graph] };
        let Some(l) = d.chart_layer else { return [s, graph] };
        let z = x[1] + 1.0;
        if z <= 1.0 - l {
            return [s, z];
        }
        // -1 + t + ψ(t) g is increasing in t for g ≥ 0; bisection then Newton
        let f = |t: f64| t + self.blend(t)[0] * g - z;
        let (mut lo, mut hi) = (1.0 - l, 1.0);
        if f(hi) <= 0.0 {
            return [s, 1.0];
        }
        for _ in 0..30 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let mut t = 0.5 * (lo + hi);
        for _ in 0..4 {
            let b = self.blend(t);
            t -= (t + b[0] * g - z) / (1.0 + b[1] * g);
        }
        [s, t]
    }

    pub fn contains(&self, x: [f64; 2]) -> bool {
        let w = self.width();
        w.contains(x[0]) && x[1] >= -1.0 - DOMAIN_TOL && x[1] <= self.top(x[0].clamp(w.w0, w.w1)) + DOMAIN_TOL
    }
}
