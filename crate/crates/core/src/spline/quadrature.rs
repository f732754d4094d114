//! Gauss–Legendre rules aligned with knot spans.

use super::{SplineError, SplineSpace1D, TensorSplineSpace};

/// Gauss–Legendre nodes and weights on `[0, 1]`, computed by Newton iteration
/// on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "a Gauss rule needs at least one point");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map from [-1, 1] to [0, 1], ascending order
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Composite Gauss rule on `[a, b]` split into `pieces` equal subintervals.
pub fn composite_gauss(a: f64, b: f64, pieces: usize, points: usize) -> (Vec<f64>, Vec<f64>) {
    let (gx, gw) = gauss_legendre(points);
    let h = (b - a) / pieces as f64;
    let mut x = Vec::with_capacity(pieces * points);
    let mut w = Vec::with_capacity(pieces * points);
    for k in 0..pieces {
        let lo = a + k as f64 * h;
        for (xi, wi) in gx.iter().zip(&gw) {
            x.push(lo + xi * h);
            w.push(wi * h);
        }
    }
    (x, w)
}

/// Gauss points and weights for each knot span of a 1D space.
#[derive(Debug, Clone)]
pub struct QuadratureRule1D {
    /// `points[e][q]`, `weights[e][q]` for element `e`.
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<Vec<f64>>,
}

impl QuadratureRule1D {
    pub fn new(space: &SplineSpace1D, points_per_span: usize) -> Result<Self, SplineError> {
        if points_per_span == 0 {
            return Err(SplineError::InvalidQuadrature(points_per_span));
        }
        let (gx, gw) = gauss_legendre(points_per_span);
        let mut points = Vec::with_capacity(space.num_elements());
        let mut weights = Vec::with_capacity(space.num_elements());
        for (a, b) in space.elements() {
            let h = b - a;
            points.push(gx.iter().map(|x| a + h * x).collect());
            weights.push(gw.iter().map(|w| h * w).collect());
        }
        Ok(Self { points, weights })
    }

    pub fn points_per_span(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }
}

/// Tensor-product Gauss rule over the elements of a [`TensorSplineSpace`].
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub x: QuadratureRule1D,
    pub y: QuadratureRule1D,
}

impl QuadratureRule {
    pub fn points_per_span(&self) -> usize {
        self.x.points_per_span()
    }

    /// Sum of weights of element `(ex, ey)`.
    pub fn element_weight(&self, ex: usize, ey: usize) -> f64 {
        let sx: f64 = self.x.weights[ex].iter().sum();
        let sy: f64 = self.y.weights[ey].iter().sum();
        sx * sy
    }
}

/// Gauss rule with `points_per_span` points per direction on every element.
pub fn build_quadrature(space: &TensorSplineSpace, points_per_span: usize) -> Result<QuadratureRule, SplineError> {
    Ok(QuadratureRule {
        x: QuadratureRule1D::new(space.factor(0), points_per_span)?,
        y: QuadratureRule1D::new(space.factor(1), points_per_span)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn three_point_rule_integrates_quartic() {
        let (x, w) = gauss_legendre(3);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        assert_relative_eq!(s, 0.2, epsilon = 1e-15);
    }

    #[test]
    fn rules_are_exact_to_degree_2n_minus_1() {
        for n in 1..=20 {
            let (x, w) = gauss_legendre(n);
            assert!(w.iter().all(|&w| w > 0.0));
            for d in 0..2 * n {
                let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(d as i32)).sum();
                assert_relative_eq!(s, 1.0 / (d as f64 + 1.0), max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn element_weights_are_element_areas() {
        let sx = SplineSpace1D::with_breaks(5, &[0.0, 0.1, 0.35, 1.0]).unwrap();
        let sy = SplineSpace1D::uniform(5, 3).unwrap();
        let space = TensorSplineSpace::new(sx, sy);
        let q = build_quadrature(&space, 4).unwrap();
        let xe = space.factor(0).elements();
        let ye = space.factor(1).elements();
        for (i, (a, b)) in xe.iter().enumerate() {
            for (j, (c, d)) in ye.iter().enumerate() {
                assert_relative_eq!(q.element_weight(i, j), (b - a) * (d - c), max_relative = 1e-14);
            }
        }
        assert!(build_quadrature(&space, 0).is_err());
    }
}
