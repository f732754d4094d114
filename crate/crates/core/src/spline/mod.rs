//! B-spline spaces for H³-conforming Galerkin discretisations.
//!
//! A [`SplineSpace1D`] is either clamped (open knot vector, end multiplicity
//! `p + 1`) or periodic on a uniform mesh. [`TensorSplineSpace`] combines two
//! of them on a rectangle and carries the mask of coefficients eliminated by
//! essential boundary conditions.

mod quadrature;

pub use quadrature::{build_quadrature, composite_gauss, gauss_legendre, QuadratureRule, QuadratureRule1D};

use faer::linalg::solvers::Solve;
use faer::Mat;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of partial derivatives of order `≤ 3` in two variables.
pub const JET_LEN: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SplineError {
    #[error("degree {0} is below 3; third derivatives would not be square integrable")]
    DegreeTooLow(usize),
    #[error("breakpoints must be finite and strictly increasing")]
    InvalidBreakpoints,
    #[error("continuity C^{0} at an interior breakpoint is not allowed for degree {1} (need 2 <= k < degree)")]
    InvalidContinuity(usize, usize),
    #[error("periodic space needs at least degree + 1 = {0} elements, got {1}")]
    TooFewPeriodicElements(usize, usize),
    #[error("constraint layers must lie in 1..=3, got {0}")]
    InvalidLayers(usize),
    #[error("cannot constrain side {0:?}: the factor in that direction is periodic")]
    PeriodicSide(Side),
    #[error("quadrature needs at least one point per span, got {0}")]
    InvalidQuadrature(usize),
    #[error("derivative order {0} exceeds degree {1}")]
    OrderTooHigh(usize, usize),
    #[error("projection system is singular")]
    SingularProjection,
}

/// Index of `∂^a_s ∂^b_t` (with `a + b ≤ 3`) inside a jet of length [`JET_LEN`].
///
/// Order: `1, s, t, ss, st, tt, sss, sst, stt, ttt`.
pub const fn jet_index(a: usize, b: usize) -> usize {
    let n = a + b;
    n * (n + 1) / 2 + b
}

/// Values and derivatives of the `p + 1` basis functions active at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisEval {
    /// Index of the first active function before periodic wrapping.
    pub first: usize,
    /// `ders[k][j]`: k-th derivative of active function `j`.
    pub ders: Vec<Vec<f64>>,
}

/// Univariate spline space on `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineSpace1D {
    degree: usize,
    breaks: Vec<f64>,
    knots: Vec<f64>,
    periodic: bool,
    count: usize,
    /// Knot span index of each element.
    spans: Vec<usize>,
}

impl SplineSpace1D {
    /// Clamped space on `[0, 1]` with `elements` uniform elements and maximal smoothness.
    pub fn uniform(degree: usize, elements: usize) -> Result<Self, SplineError> {
        Self::uniform_on(degree, elements, 0.0, 1.0)
    }

    pub fn uniform_on(degree: usize, elements: usize, a: f64, b: f64) -> Result<Self, SplineError> {
        Self::with_breaks(degree, &uniform_breaks(a, b, elements))
    }

    /// Clamped space with `C^{p-1}` continuity at every interior breakpoint.
    pub fn with_breaks(degree: usize, breaks: &[f64]) -> Result<Self, SplineError> {
        let n = breaks.len().saturating_sub(2);
        Self::with_continuity(degree, breaks, &vec![degree.saturating_sub(1); n])
    }

    /// Clamped space with continuity `C^{continuity[i]}` at interior breakpoint `i + 1`.
    pub fn with_continuity(degree: usize, breaks: &[f64], continuity: &[usize]) -> Result<Self, SplineError> {
        if degree < 3 {
            return Err(SplineError::DegreeTooLow(degree));
        }
        check_breaks(breaks)?;
        if continuity.len() != breaks.len() - 2 {
            return Err(SplineError::InvalidBreakpoints);
        }
        let mut knots = vec![breaks[0]; degree + 1];
        let mut spans = vec![degree];
        for (i, &c) in continuity.iter().enumerate() {
            if c < 2 || c >= degree {
                return Err(SplineError::InvalidContinuity(c, degree));
            }
            knots.extend(std::iter::repeat_n(breaks[i + 1], degree - c));
            spans.push(knots.len() - 1);
        }
        knots.extend(std::iter::repeat_n(*breaks.last().unwrap(), degree + 1));
        let count = knots.len() - degree - 1;
        Ok(Self { degree, breaks: breaks.to_vec(), knots, periodic: false, count, spans })
    }

    /// Periodic space on `[a, b)` with uniform elements; functions `i` and
    /// `i + elements` of the extended knot vector are identified.
    pub fn periodic(degree: usize, elements: usize, a: f64, b: f64) -> Result<Self, SplineError> {
        if degree < 3 {
            return Err(SplineError::DegreeTooLow(degree));
        }
        if elements < degree + 1 {
            return Err(SplineError::TooFewPeriodicElements(degree + 1, elements));
        }
        let breaks = uniform_breaks(a, b, elements);
        check_breaks(&breaks)?;
        let h = (b - a) / elements as f64;
        let knots = (0..elements + 2 * degree + 1)
            .map(|k| a + h * (k as f64 - degree as f64))
            .collect();
        let spans = (0..elements).map(|e| e + degree).collect();
        Ok(Self { degree, breaks, knots, periodic: true, count: elements, spans })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn basis_count(&self) -> usize {
        self.count
    }

    pub fn num_elements(&self) -> usize {
        self.breaks.len() - 1
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.breaks[0], *self.breaks.last().unwrap())
    }

    pub fn elements(&self) -> Vec<(f64, f64)> {
        self.breaks.windows(2).map(|w| (w[0], w[1])).collect()
    }

    /// Maps an extended index to a basis index (wraps in the periodic case).
    pub fn wrap(&self, i: usize) -> usize {
        if self.periodic {
            i % self.count
        } else {
            i
        }
    }

    /// Element containing `x`; the right end belongs to the last element.
    pub fn element_of(&self, x: f64) -> usize {
        let x = self.reduce(x);
        let n = self.num_elements();
        match self.breaks.partition_point(|&b| b <= x) {
            0 => 0,
            k if k > n => n - 1,
            k => k - 1,
        }
    }

    fn reduce(&self, x: f64) -> f64 {
        if self.periodic {
            let (a, b) = self.bounds();
            a + (x - a).rem_euclid(b - a)
        } else {
            x
        }
    }

    /// Evaluates derivatives `0..=nd` of the active functions at `x`.
    pub fn eval(&self, x: f64, nd: usize) -> BasisEval {
        self.eval_in_element(self.element_of(x), x, nd)
    }

    /// As [`Self::eval`] but using the polynomial pieces of element `e`.
    pub fn eval_in_element(&self, e: usize, x: f64, nd: usize) -> BasisEval {
        let x = if self.periodic {
            // keep x next to the element it is evaluated in
            let (a, b) = self.bounds();
            let lo = self.breaks[e];
            let shifted = self.reduce(x);
            if shifted + 0.5 * (b - a) < lo {
                shifted + (b - a)
            } else {
                shifted
            }
        } else {
            x
        };
        let span = self.spans[e];
        BasisEval { first: span - self.degree, ders: ders_basis_funs(span, x, self.degree, nd, &self.knots) }
    }

    /// Value of `Σ c_i B_i^{(k)}(x)` for `k = 0..=nd`.
    pub fn eval_function(&self, coeffs: &[f64], x: f64, nd: usize) -> Vec<f64> {
        let be = self.eval(x, nd);
        (0..=nd)
            .map(|k| (0..=self.degree).map(|j| coeffs[self.wrap(be.first + j)] * be.ders[k][j]).sum())
            .collect()
    }

    /// Basis tables at all quadrature points of `rule`.
    pub fn tabulate(&self, rule: &QuadratureRule1D, nd: usize) -> BasisTable1D {
        let mut first = Vec::with_capacity(self.num_elements());
        let mut values = Vec::with_capacity(self.num_elements());
        for (e, pts) in rule.points.iter().enumerate() {
            let evals: Vec<BasisEval> = pts.iter().map(|&x| self.eval_in_element(e, x, nd)).collect();
            first.push(evals[0].first);
            values.push(evals.into_iter().map(|b| b.ders).collect());
        }
        BasisTable1D { first, values }
    }
}

/// Basis values on every quadrature point, indexed `[element][point][deriv][local]`.
#[derive(Debug, Clone)]
pub struct BasisTable1D {
    pub first: Vec<usize>,
    pub values: Vec<Vec<Vec<Vec<f64>>>>,
}

fn uniform_breaks(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| if i == n { b } else { a + (b - a) * i as f64 / n as f64 }).collect()
}

fn check_breaks(breaks: &[f64]) -> Result<(), SplineError> {
    if breaks.len() < 2 || breaks.iter().any(|b| !b.is_finite()) || breaks.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SplineError::InvalidBreakpoints);
    }
    Ok(())
}

/// Cox–de Boor derivatives of the `p + 1` nonzero functions on knot span `span`
/// (Piegl & Tiller, algorithm A2.3).
fn ders_basis_funs(span: usize, x: f64, p: usize, nd: usize, knots: &[f64]) -> Vec<Vec<f64>> {
    let mut ndu = vec![vec![0.0; p + 1]; p + 1];
    let mut left = vec![0.0; p + 1];
    let mut right = vec![0.0; p + 1];
    ndu[0][0] = 1.0;
    for j in 1..=p {
        left[j] = x - knots[span + 1 - j];
        right[j] = knots[span + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            ndu[j][r] = right[r + 1] + left[j - r];
            let temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }
    let mut ders = vec![vec![0.0; p + 1]; nd + 1];
    for j in 0..=p {
        ders[0][j] = ndu[j][p];
    }
    let mut a = [vec![0.0; p + 1], vec![0.0; p + 1]];
    for r in 0..=p {
        let (mut s1, mut s2) = (0usize, 1usize);
        a[0][0] = 1.0;
        for k in 1..=nd.min(p) {
            let mut d = 0.0;
            let rk = r as isize - k as isize;
            let pk = p - k;
            if r >= k {
                a[s2][0] = a[s1][0] / ndu[pk + 1][rk as usize];
                d = a[s2][0] * ndu[rk as usize][pk];
            }
            let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
            let j2 = if r as isize - 1 <= pk as isize { k - 1 } else { p - r };
            for j in j1..=j2 {
                let idx = (rk + j as isize) as usize;
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][idx];
                d += a[s2][j] * ndu[idx][pk];
            }
            if r <= pk {
                a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                d += a[s2][k] * ndu[r][pk];
            }
            ders[k][r] = d;
            std::mem::swap(&mut s1, &mut s2);
        }
    }
    let mut fac = p as f64;
    for k in 1..=nd.min(p) {
        for v in ders[k].iter_mut() {
            *v *= fac;
        }
        fac *= (p - k) as f64;
    }
    ders
}

/// A side of the reference square; `Top` carries `Γ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Left, Side::Right, Side::Bottom, Side::Top];

    fn slot(self) -> usize {
        self as usize
    }
}

/// Tensor-product space on a rectangle with a constraint mask.
///
/// Coefficient `(i, j)` has global index `i * n_y + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorSplineSpace {
    factors: [SplineSpace1D; 2],
    constrained: Vec<bool>,
    side_layers: [usize; 4],
}

impl TensorSplineSpace {
    pub fn new(x: SplineSpace1D, y: SplineSpace1D) -> Self {
        let n = x.basis_count() * y.basis_count();
        Self { factors: [x, y], constrained: vec![false; n], side_layers: [0; 4] }
    }

    pub fn factor(&self, dir: usize) -> &SplineSpace1D {
        &self.factors[dir]
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.factors[0].basis_count(), self.factors[1].basis_count())
    }

    pub fn total_count(&self) -> usize {
        self.constrained.len()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.factors[1].basis_count() + j
    }

    pub fn is_constrained(&self, idx: usize) -> bool {
        self.constrained[idx]
    }

    pub fn constraint_mask(&self) -> &[bool] {
        &self.constrained
    }

    /// Number of layers currently constrained on each side.
    pub fn side_layers(&self, side: Side) -> usize {
        self.side_layers[side.slot()]
    }

    /// Zeroes the first `layers` coefficient rows adjacent to `side`.
    ///
    /// Masks only grow, so corners keep the larger of the two adjacent counts.
    pub fn constrain(&mut self, side: Side, layers: usize) -> Result<(), SplineError> {
        if !(1..=3).contains(&layers) {
            return Err(SplineError::InvalidLayers(layers));
        }
        let dir = match side {
            Side::Left | Side::Right => 0,
            Side::Bottom | Side::Top => 1,
        };
        if self.factors[dir].is_periodic() {
            return Err(SplineError::PeriodicSide(side));
        }
        let (nx, ny) = self.shape();
        for i in 0..nx {
            for j in 0..ny {
                let hit = match side {
                    Side::Left => i < layers,
                    Side::Right => i + layers >= nx,
                    Side::Bottom => j < layers,
                    Side::Top => j + layers >= ny,
                };
                if hit {
                    let idx = self.index(i, j);
                    self.constrained[idx] = true;
                }
            }
        }
        let slot = &mut self.side_layers[side.slot()];
        *slot = (*slot).max(layers);
        Ok(())
    }

    /// Builder form of [`Self::constrain`].
    pub fn constrained(mut self, side: Side, layers: usize) -> Result<Self, SplineError> {
        self.constrain(side, layers)?;
        Ok(self)
    }

    /// Global indices of the free coefficients, ascending.
    pub fn free_indices(&self) -> Vec<usize> {
        (0..self.total_count()).filter(|&i| !self.constrained[i]).collect()
    }

    /// Map from global index to free index.
    pub fn dof_map(&self) -> Vec<Option<usize>> {
        let mut next = 0;
        self.constrained
            .iter()
            .map(|&c| {
                if c {
                    None
                } else {
                    next += 1;
                    Some(next - 1)
                }
            })
            .collect()
    }

    pub fn free_count(&self) -> usize {
        self.constrained.iter().filter(|c| !**c).count()
    }

    /// Expands free coefficients to a full coefficient vector (zeros on constrained entries).
    pub fn expand(&self, free: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.total_count()];
        for (g, f) in self.free_indices().into_iter().zip(free) {
            full[g] = *f;
        }
        full
    }

    /// Nonzero basis functions at `st` with all partials of order `≤ max_order`
    /// (entries above `max_order` are zero). Indices are global.
    pub fn eval_basis(&self, st: [f64; 2], max_order: usize) -> Vec<(usize, [f64; JET_LEN])> {
        let mo = max_order.min(3);
        let bx = self.factors[0].eval(st[0], mo);
        let by = self.factors[1].eval(st[1], mo);
        self.combine(&bx, &by, mo)
    }

    /// As [`Self::eval_basis`] inside a given element (for points on element edges).
    pub fn eval_basis_in_element(&self, el: (usize, usize), st: [f64; 2], max_order: usize) -> Vec<(usize, [f64; JET_LEN])> {
        let mo = max_order.min(3);
        let bx = self.factors[0].eval_in_element(el.0, st[0], mo);
        let by = self.factors[1].eval_in_element(el.1, st[1], mo);
        self.combine(&bx, &by, mo)
    }

    fn combine(&self, bx: &BasisEval, by: &BasisEval, mo: usize) -> Vec<(usize, [f64; JET_LEN])> {
        let px = self.factors[0].degree();
        let py = self.factors[1].degree();
        let mut out = Vec::with_capacity((px + 1) * (py + 1));
        for a in 0..=px {
            let gi = self.factors[0].wrap(bx.first + a);
            for b in 0..=py {
                let gj = self.factors[1].wrap(by.first + b);
                let mut jet = [0.0; JET_LEN];
                for n in 0..=mo {
                    for k in 0..=n {
                        jet[jet_index(n - k, k)] = bx.ders[n - k][a] * by.ders[k][b];
                    }
                }
                out.push((self.index(gi, gj), jet));
            }
        }
        out
    }

    /// Partials of `Σ c_i B_i` at `st` from a full coefficient vector.
    pub fn eval_function(&self, coeffs: &[f64], st: [f64; 2], max_order: usize) -> [f64; JET_LEN] {
        let mut out = [0.0; JET_LEN];
        for (idx, jet) in self.eval_basis(st, max_order) {
            for (o, j) in out.iter_mut().zip(jet) {
                *o += coeffs[idx] * j;
            }
        }
        out
    }

    /// Mixed partial `∂^a_s ∂^b_t` of `Σ c_i B_i` for arbitrary orders `a, b ≤ p`.
    pub fn eval_partial(&self, coeffs: &[f64], st: [f64; 2], a: usize, b: usize) -> f64 {
        let bx = self.factors[0].eval(st[0], a);
        let by = self.factors[1].eval(st[1], b);
        let mut acc = 0.0;
        for i in 0..=self.factors[0].degree() {
            let gi = self.factors[0].wrap(bx.first + i);
            for j in 0..=self.factors[1].degree() {
                let gj = self.factors[1].wrap(by.first + j);
                acc += coeffs[self.index(gi, gj)] * bx.ders[a][i] * by.ders[b][j];
            }
        }
        acc
    }

    /// `L²` projection of `f` onto the free coefficients (constrained ones are zero).
    /// Returns the full coefficient vector.
    pub fn project(&self, rule: &QuadratureRule, f: impl Fn([f64; 2]) -> f64) -> Result<Vec<f64>, SplineError> {
        let dof = self.dof_map();
        let n = self.free_count();
        let mut mass = Mat::<f64>::zeros(n, n);
        let mut rhs = Mat::<f64>::zeros(n, 1);
        for (ex, (px, wx)) in rule.x.points.iter().zip(&rule.x.weights).enumerate() {
            for (ey, (py, wy)) in rule.y.points.iter().zip(&rule.y.weights).enumerate() {
                for (xq, wxq) in px.iter().zip(wx) {
                    for (yq, wyq) in py.iter().zip(wy) {
                        let w = wxq * wyq;
                        let basis = self.eval_basis_in_element((ex, ey), [*xq, *yq], 0);
                        let fv = f([*xq, *yq]);
                        for (gi, ji) in &basis {
                            let Some(i) = dof[*gi] else { continue };
                            rhs[(i, 0)] += w * ji[0] * fv;
                            for (gj, jj) in &basis {
                                if let Some(j) = dof[*gj] {
                                    mass[(i, j)] += w * ji[0] * jj[0];
                                }
                            }
                        }
                    }
                }
            }
        }
        let llt = mass.llt(faer::Side::Lower).map_err(|_| SplineError::SingularProjection)?;
        let sol = llt.solve(&rhs);
        Ok(self.expand(&(0..n).map(|i| sol[(i, 0)]).collect::<Vec<_>>()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn jet_indices_are_dense() {
        let mut seen = [false; JET_LEN];
        for n in 0..=3 {
            for b in 0..=n {
                seen[jet_index(n - b, b)] = true;
            }
        }
        assert!(seen.iter().all(|s| *s));
        assert_eq!(jet_index(0, 3), 9);
    }

    #[test]
    fn rejects_bad_spaces() {
        assert_eq!(SplineSpace1D::uniform(2, 4), Err(SplineError::DegreeTooLow(2)));
        assert_eq!(SplineSpace1D::with_breaks(5, &[0.0, 0.5, 0.5, 1.0]), Err(SplineError::InvalidBreakpoints));
        assert!(SplineSpace1D::with_continuity(5, &[0.0, 0.5, 1.0], &[1]).is_err());
        assert!(SplineSpace1D::periodic(5, 5, 0.0, 1.0).is_err());
    }

    #[test]
    fn clamped_count_and_multiplicities() {
        let s = SplineSpace1D::uniform(5, 8).unwrap();
        assert_eq!(s.basis_count(), 13);
        let s = SplineSpace1D::with_continuity(5, &[0.0, 0.5, 1.0], &[3]).unwrap();
        assert_eq!(s.basis_count(), 8);
    }

    fn sums(space: &SplineSpace1D, x: f64) -> Vec<f64> {
        let be = space.eval(x, 3);
        be.ders.iter().map(|d| d.iter().sum()).collect()
    }

    #[test]
    fn partition_of_unity_clamped_and_periodic() {
        let spaces = [
            SplineSpace1D::uniform(5, 7).unwrap(),
            SplineSpace1D::with_continuity(5, &[-2.0, -1.0, -0.3, 0.0], &[3, 4]).unwrap(),
            SplineSpace1D::periodic(5, 9, -0.5, 0.5).unwrap(),
        ];
        for s in &spaces {
            let (a, b) = s.bounds();
            for i in 0..=40 {
                let x = a + (b - a) * i as f64 / 40.0;
                let v = sums(s, x);
                assert_relative_eq!(v[0], 1.0, epsilon = 1e-13);
                for d in &v[1..] {
                    assert!(d.abs() < 1e-8 * (1.0 + 1.0 / (b - a)).powi(3), "derivative sum {d}");
                }
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let s = SplineSpace1D::with_breaks(5, &[0.0, 0.2, 0.45, 0.7, 1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let c: Vec<f64> = (0..s.basis_count()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let h = 1e-4;
        for &x in &[0.1, 0.33, 0.5, 0.81] {
            let v = s.eval_function(&c, x, 3);
            let vp = s.eval_function(&c, x + h, 3);
            let vm = s.eval_function(&c, x - h, 3);
            for k in 0..3 {
                let fd = (vp[k] - vm[k]) / (2.0 * h);
                assert!((fd - v[k + 1]).abs() <= 1e-5 * v[k + 1].abs().max(1.0));
            }
        }
    }

    #[test]
    fn periodic_functions_wrap() {
        let s = SplineSpace1D::periodic(5, 8, -0.5, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c: Vec<f64> = (0..s.basis_count()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let left = s.eval_function(&c, -0.5, 5);
        let right = s.eval_function(&c, 0.5 - 1e-15, 5);
        let shifted = s.eval_function(&c, 0.3 + 1.0, 5);
        let base = s.eval_function(&c, 0.3, 5);
        for k in 0..=4 {
            assert!((left[k] - right[k]).abs() <= 1e-9 * (1.0 + left[k].abs()), "order {k}");
            assert!((shifted[k] - base[k]).abs() <= 1e-9 * (1.0 + base[k].abs()));
        }
    }

    #[test]
    fn constrain_masks_are_nested_and_idempotent() {
        let base = TensorSplineSpace::new(SplineSpace1D::uniform(5, 4).unwrap(), SplineSpace1D::uniform(5, 4).unwrap());
        let masks: Vec<Vec<bool>> = (1..=3)
            .map(|l| base.clone().constrained(Side::Top, l).unwrap().constraint_mask().to_vec())
            .collect();
        for w in masks.windows(2) {
            assert!(w[0].iter().zip(&w[1]).all(|(a, b)| !*a || *b));
        }
        let once = base.clone().constrained(Side::Left, 2).unwrap();
        let twice = once.clone().constrained(Side::Left, 2).unwrap();
        assert_eq!(once, twice);
        assert_eq!(base.clone().constrain(Side::Left, 4), Err(SplineError::InvalidLayers(4)));
        let mut per = TensorSplineSpace::new(SplineSpace1D::periodic(5, 8, 0.0, 1.0).unwrap(), SplineSpace1D::uniform(5, 4).unwrap());
        assert!(per.constrain(Side::Left, 1).is_err());
        assert!(per.constrain(Side::Top, 1).is_ok());
    }

    #[test]
    fn dimension_is_total_minus_constrained() {
        let mut s = TensorSplineSpace::new(SplineSpace1D::uniform(5, 3).unwrap(), SplineSpace1D::uniform(5, 4).unwrap());
        for side in Side::ALL {
            s.constrain(side, 1).unwrap();
        }
        assert_eq!(s.free_count(), (8 - 2) * (9 - 2));
        assert_eq!(s.dof_map().iter().flatten().count(), s.free_count());
    }
}
