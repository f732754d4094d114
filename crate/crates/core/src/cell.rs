//! Periodic half-strip cell problem and the strange constant `K1`.
//!
//! On `Y × (−L, 0)` with `Y = (−1/2, 1/2)`, `V = φ + w` where
//! `φ(y) = b(ȳ)(1 + y_N)⁴` on `−1 ≤ y_N ≤ 0` (zero below) carries the trace
//! `V(·, 0) = b`, and the correction `w` is `Y`-periodic, vanishes at `y_N = 0`
//! and minimises `∫ |D³V|²`. `K1` is the minimal energy.
//!
//! The lateral basis is periodic; the vertical one is clamped with a `C³`
//! breakpoint at `y_N = −1` so the kink of `φ` is representable.

use faer::linalg::solvers::Solve;
use faer::Mat;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::PeriodicProfile;
use crate::par::{map_slice, Parallelism};
use crate::spline::{build_quadrature, gauss_legendre, Side, SplineError, SplineSpace1D, TensorSplineSpace};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CellError {
    #[error("depth must exceed 1, got {0}")]
    DepthTooSmall(f64),
    #[error("flux diagnostic needs fifth derivatives: degree {0} < 5")]
    DegreeTooLow(usize),
    #[error("cell system is singular after constraints")]
    Singular,
    #[error("invalid resolution: {0}")]
    Resolution(String),
    #[error(transparent)]
    Spline(#[from] SplineError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BottomMode {
    /// No condition at `y_N = −L`; the kernel `span{y_N, y_N²}` is fixed by
    /// zero mean of `∂w/∂y_N` and `∂²w/∂y_N²`.
    Free,
    /// Three coefficient layers eliminated at `y_N = −L`.
    Clamped,
}

/// Discretisation parameters of the strip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CellResolution {
    pub degree: usize,
    /// Lateral elements per period of the highest profile mode.
    pub elements_per_mode: usize,
    /// Vertical elements per unit depth on `(−1, 0)`.
    pub top_density: usize,
    /// Vertical elements per unit depth below `y_N = −1`.
    pub deep_density: usize,
    pub quad_points: usize,
}

impl Default for CellResolution {
    fn default() -> Self {
        Self { degree: 5, elements_per_mode: 16, top_density: 32, deep_density: 4, quad_points: 8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellProblem {
    pub profile: PeriodicProfile,
    pub depth: f64,
    pub bottom: BottomMode,
    pub resolution: CellResolution,
}

impl CellProblem {
    pub fn new(profile: PeriodicProfile, depth: f64, bottom: BottomMode) -> Self {
        Self { profile, depth, bottom, resolution: CellResolution::default() }
    }

    fn validate(&self) -> Result<(), CellError> {
        if !(self.depth > 1.0 && self.depth.is_finite()) {
            return Err(CellError::DepthTooSmall(self.depth));
        }
        let r = &self.resolution;
        if r.top_density == 0 || r.deep_density == 0 || r.quad_points == 0 {
            return Err(CellError::Resolution("densities and quadrature must be positive".into()));
        }
        // at least eight lateral elements per period of the highest mode
        if r.elements_per_mode < 8 {
            return Err(CellError::Resolution(format!("elements_per_mode {} < 8", r.elements_per_mode)));
        }
        Ok(())
    }

    /// Breakpoints of the vertical mesh on `[−L, 0]`; `−1` is always one of them.
    fn vertical_breaks(&self) -> Vec<f64> {
        let r = &self.resolution;
        let deep = self.depth - 1.0;
        let n_deep = ((deep * r.deep_density as f64).ceil() as usize).max(1);
        let mut b: Vec<f64> = (0..n_deep).map(|i| -self.depth + deep * i as f64 / n_deep as f64).collect();
        b.extend((0..=r.top_density).map(|i| -1.0 + i as f64 / r.top_density as f64));
        *b.last_mut().unwrap() = 0.0;
        b
    }

    fn space(&self) -> Result<TensorSplineSpace, CellError> {
        let r = &self.resolution;
        let kmax = self.profile.max_frequency().max(1) as usize;
        let sx = SplineSpace1D::periodic(r.degree, r.elements_per_mode * kmax, -0.5, 0.5)?;
        let breaks = self.vertical_breaks();
        let smooth = r.degree - 1;
        let continuity: Vec<usize> = breaks[1..breaks.len() - 1]
            .iter()
            .map(|&y| if (y + 1.0).abs() < 1e-12 { smooth.min(3) } else { smooth })
            .collect();
        let sy = SplineSpace1D::with_continuity(r.degree, &breaks, &continuity)?;
        let mut space = TensorSplineSpace::new(sx, sy);
        space.constrain(Side::Top, 1)?;
        if self.bottom == BottomMode::Clamped {
            space.constrain(Side::Bottom, 3)?;
        }
        Ok(space)
    }
}

/// `∂^a_ȳ ∂^b_yN φ` for `φ = b(ȳ)(1 + y_N)⁴` on `[−1, 0]`, zero below.
pub fn lifting_partial(profile: &PeriodicProfile, y: [f64; 2], a: usize, b: usize) -> f64 {
    let s = 1.0 + y[1];
    if s <= 0.0 || b > 4 {
        return 0.0;
    }
    let falling: f64 = ((4 - b + 1)..=4).map(|v| v as f64).product();
    profile.derivative(y[0], a) * falling * s.powi((4 - b) as i32)
}

/// Discrete minimiser `V = φ + w` on one strip.
#[derive(Debug, Clone)]
pub struct CellField {
    pub problem: CellProblem,
    pub space: TensorSplineSpace,
    /// Full coefficient vector of the correction `w`.
    pub correction: Vec<f64>,
}

/// Third derivatives weighted so that the Euclidean product is `D³u : D³v`.
fn weighted_third(d: [f64; 4]) -> [f64; 4] {
    let r3 = 3f64.sqrt();
    [d[0], r3 * d[1], r3 * d[2], d[3]]
}

const THIRD_ORDERS: [(usize, usize); 4] = [(3, 0), (2, 1), (1, 2), (0, 3)];

impl CellField {
    /// `∂^a_ȳ ∂^b_yN V` at `y` for any `a + b ≤ degree`.
    pub fn partial(&self, y: [f64; 2], a: usize, b: usize) -> f64 {
        lifting_partial(&self.problem.profile, y, a, b) + self.space.eval_partial(&self.correction, y, a, b)
    }

    fn third_at(&self, y: [f64; 2]) -> [f64; 4] {
        weighted_third(THIRD_ORDERS.map(|(a, b)| self.partial(y, a, b)))
    }

    /// `∫_{Y×(lo,hi)} F(D³V)` by tensor Gauss quadrature on the mesh.
    fn integrate(&self, lo: f64, f: impl Fn([f64; 2], [f64; 4]) -> f64) -> f64 {
        let n = self.problem.resolution.quad_points;
        let (gx, gw) = gauss_legendre(n);
        let mut acc = 0.0;
        for (xa, xb) in self.space.factor(0).elements() {
            for (ya, yb) in self.space.factor(1).elements() {
                if yb <= lo + 1e-14 {
                    continue;
                }
                let (hx, hy) = (xb - xa, yb - ya);
                for (px, wx) in gx.iter().zip(&gw) {
                    for (py, wy) in gx.iter().zip(&gw) {
                        let y = [xa + hx * px, ya + hy * py];
                        acc += wx * wy * hx * hy * f(y, self.third_at(y));
                    }
                }
            }
        }
        acc
    }

    /// `∫ |D³V|²` over the whole strip.
    pub fn k1_energy(&self) -> f64 {
        self.integrate(-self.problem.depth, |_, d| d.iter().map(|v| v * v).sum())
    }

    /// `∫_{Y×(−1,0)} D³V : D³φ`.
    pub fn k1_pairing(&self) -> f64 {
        let b = &self.problem.profile;
        self.integrate(-1.0, |y, d| {
            let dphi = weighted_third(THIRD_ORDERS.map(|(a, k)| lifting_partial(b, y, a, k)));
            d.iter().zip(&dphi).map(|(u, v)| u * v).sum()
        })
    }

    /// Boundary-flux form `∫_Y (3V_ȳȳȳȳN + 3V_ȳȳNNN + V_NNNNN) b dȳ` at `y_N = 0`.
    pub fn k1_flux(&self) -> Result<f64, CellError> {
        let p = self.problem.resolution.degree;
        if p < 5 {
            return Err(CellError::DegreeTooLow(p));
        }
        Ok(self.top_integral(|y| {
            let flux = 3.0 * self.partial(y, 4, 1) + 3.0 * self.partial(y, 2, 3) + self.partial(y, 0, 5);
            flux * self.problem.profile.derivative(y[0], 0)
        }))
    }

    fn top_integral(&self, f: impl Fn([f64; 2]) -> f64) -> f64 {
        let n = self.problem.resolution.quad_points;
        let (gx, gw) = gauss_legendre(n);
        self.space
            .factor(0)
            .elements()
            .iter()
            .map(|(a, b)| gx.iter().zip(&gw).map(|(x, w)| w * (b - a) * f([a + (b - a) * x, 0.0])).sum::<f64>())
            .sum()
    }

    /// Residuals of the two printed forms of the second natural condition at
    /// `y_N = 0`, and of `V_NNN = 0`, as `L²(Y)` norms.
    pub fn natural_conditions(&self) -> NaturalConditions {
        let norm = |f: &dyn Fn([f64; 2]) -> f64| self.top_integral(|y| f(y).powi(2)).sqrt();
        let lap_zz = |y| self.partial(y, 2, 2) + self.partial(y, 0, 4);
        NaturalConditions {
            third_normal: norm(&|y| self.partial(y, 0, 3)),
            plus_form: norm(&|y| lap_zz(y) + 2.0 * self.partial(y, 2, 2)),
            minus_form: norm(&|y| -lap_zz(y) + 2.0 * self.partial(y, 2, 2)),
            scale: norm(&|y| self.partial(y, 0, 4).abs() + 3.0 * self.partial(y, 2, 2).abs()),
        }
    }
}

/// `L²(Y)` norms of natural-condition residuals at `y_N = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NaturalConditions {
    /// `‖∂³V/∂y_N³‖`.
    pub third_normal: f64,
    /// `‖∂²ΔV/∂y_N² + 2 ∂²_ȳ ∂²_N V‖`.
    pub plus_form: f64,
    /// `‖−∂²ΔV/∂y_N² + 2 ∂²_ȳ ∂²_N V‖`.
    pub minus_form: f64,
    /// `‖|V_NNNN| + 3|V_ȳȳNN|‖`, a magnitude reference.
    pub scale: f64,
}

/// Solves one strip problem.
pub fn solve_strip(problem: &CellProblem) -> Result<CellField, CellError> {
    problem.validate()?;
    let space = problem.space()?;
    let rule = build_quadrature(&space, problem.resolution.quad_points)?;
    let (sx, sy) = (space.factor(0), space.factor(1));
    let tx = sx.tabulate(&rule.x, 3);
    let ty = sy.tabulate(&rule.y, 3);
    let dof = space.dof_map();
    let n = space.free_count();
    let (px, py) = (sx.degree(), sy.degree());
    let free_mode = problem.bottom == BottomMode::Free;
    let extra = if free_mode { 2 } else { 0 };
    let mut a = Mat::<f64>::zeros(n + extra, n + extra);
    let mut rhs = Mat::<f64>::zeros(n + extra, 1);
    for ex in 0..sx.num_elements() {
        for ey in 0..sy.num_elements() {
            for (qx, (&yb, &wx)) in rule.x.points[ex].iter().zip(&rule.x.weights[ex]).enumerate() {
                for (qy, (&yn, &wy)) in rule.y.points[ey].iter().zip(&rule.y.weights[ey]).enumerate() {
                    let w = wx * wy;
                    let (bx, by) = (&tx.values[ex][qx], &ty.values[ey][qy]);
                    let dphi = weighted_third(THIRD_ORDERS.map(|(a, b)| lifting_partial(&problem.profile, [yb, yn], a, b)));
                    let mut local = Vec::with_capacity((px + 1) * (py + 1));
                    for i in 0..=px {
                        for j in 0..=py {
                            let g = space.index(sx.wrap(tx.first[ex] + i), ty.first[ey] + j);
                            let Some(k) = dof[g] else { continue };
                            let d3 = weighted_third(THIRD_ORDERS.map(|(a, b)| bx[a][i] * by[b][j]));
                            local.push((k, d3, by[1][j] * bx[0][i], by[2][j] * bx[0][i]));
                        }
                    }
                    for &(k, dk, d1, d2) in &local {
                        rhs[(k, 0)] -= w * dk.iter().zip(&dphi).map(|(u, v)| u * v).sum::<f64>();
                        for &(l, dl, _, _) in &local {
                            a[(k, l)] += w * dk.iter().zip(&dl).map(|(u, v)| u * v).sum::<f64>();
                        }
                        if free_mode {
                            a[(n, k)] += w * d1;
                            a[(k, n)] += w * d1;
                            a[(n + 1, k)] += w * d2;
                            a[(k, n + 1)] += w * d2;
                        }
                    }
                }
            }
        }
    }
    let lu = a.partial_piv_lu();
    let sol = lu.solve(&rhs);
    let x: Vec<f64> = (0..n).map(|i| sol[(i, 0)]).collect();
    if x.iter().any(|v| !v.is_finite()) {
        return Err(CellError::Singular);
    }
    let correction = space.expand(&x);
    Ok(CellField { problem: problem.clone(), space, correction })
}

/// Result of [`solve_cell`]: the solved field and the `K1` evaluations.
#[derive(Debug, Clone)]
pub struct CellSolution {
    pub field: CellField,
    pub k1_energy: f64,
    pub k1_pairing: f64,
    /// `|K1(free, L) − K1(clamped, L)|`.
    pub truncation_gap: f64,
    /// `|K1(L) − K1(2L)|` in the same bottom mode.
    pub depth_sensitivity: f64,
    /// `K1` for (free L, clamped L, same mode 2L).
    pub k1_free: f64,
    pub k1_clamped: f64,
    pub k1_double_depth: f64,
}

impl CellSolution {
    /// The value handed to the limit problems: free mode at the largest computed depth.
    pub fn k1_for_forms(&self) -> f64 {
        if self.field.problem.bottom == BottomMode::Free {
            self.k1_double_depth
        } else {
            self.k1_free
        }
    }
}

/// Solves the requested problem plus the opposite bottom mode and the doubled depth.
pub fn solve_cell(problem: &CellProblem, mode: Parallelism) -> Result<CellSolution, CellError> {
    let other = match problem.bottom {
        BottomMode::Free => BottomMode::Clamped,
        BottomMode::Clamped => BottomMode::Free,
    };
    let variants = [
        problem.clone(),
        CellProblem { bottom: other, ..problem.clone() },
        CellProblem { depth: 2.0 * problem.depth, ..problem.clone() },
    ];
    let solved = map_slice(mode, &variants, |p| solve_strip(p).map(|f| (f.k1_energy(), f)));
    let mut solved = solved.into_iter().collect::<Result<Vec<_>, _>>()?;
    let (k1_double, _) = solved.pop().unwrap();
    let (k1_other, _) = solved.pop().unwrap();
    let (k1_energy, field) = solved.pop().unwrap();
    let k1_pairing = field.k1_pairing();
    let (k1_free, k1_clamped) = match problem.bottom {
        BottomMode::Free => (k1_energy, k1_other),
        BottomMode::Clamped => (k1_other, k1_energy),
    };
    Ok(CellSolution {
        field,
        k1_energy,
        k1_pairing,
        truncation_gap: (k1_free - k1_clamped).abs(),
        depth_sensitivity: (k1_energy - k1_double).abs(),
        k1_free,
        k1_clamped,
        k1_double_depth: k1_double,
    })
}

/// Default cell solve: free bottom at depth 4, doubled to 8 for the sensitivity.
pub fn default_k1(profile: &PeriodicProfile, mode: Parallelism) -> Result<CellSolution, CellError> {
    solve_cell(&CellProblem::new(profile.clone(), 4.0, BottomMode::Free), mode)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lifting_matches_trace_and_vanishes_below() {
        let b = PeriodicProfile::cosine(1.5, 1.0).unwrap();
        assert_eq!(lifting_partial(&b, [0.2, 0.0], 0, 0), b.derivative(0.2, 0));
        assert_eq!(lifting_partial(&b, [0.2, -1.5], 0, 0), 0.0);
        assert_eq!(lifting_partial(&b, [0.2, -0.5], 0, 5), 0.0);
        // C³ at y_N = −1
        for k in 0..4 {
            assert!(lifting_partial(&b, [0.2, -1.0 + 1e-9], 0, k).abs() < 1e-7);
        }
    }

    #[test]
    fn depth_and_degree_are_validated() {
        let b = PeriodicProfile::constant(1.0).unwrap();
        let p = CellProblem::new(b.clone(), 1.0, BottomMode::Free);
        assert_eq!(solve_strip(&p).unwrap_err(), CellError::DepthTooSmall(1.0));
        let mut p = CellProblem::new(b, 2.0, BottomMode::Free);
        p.resolution.degree = 4;
        let f = solve_strip(&p).unwrap();
        assert_eq!(f.k1_flux().unwrap_err(), CellError::DegreeTooLow(4));
    }

    #[test]
    fn vertical_mesh_contains_minus_one() {
        let p = CellProblem::new(PeriodicProfile::constant(1.0).unwrap(), 2.5, BottomMode::Free);
        let b = p.vertical_breaks();
        assert!(b.iter().any(|&y| (y + 1.0).abs() < 1e-14));
        assert_eq!(b[0], -2.5);
        assert_eq!(*b.last().unwrap(), 0.0);
    }
}
