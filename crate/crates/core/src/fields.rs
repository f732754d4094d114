//! Closed-form smooth fields with exact partial derivatives of any order.
//!
//! Fields are sums of separable terms `X(x̄)·Z(x_N)` where each factor is a
//! polynomial times a single trigonometric mode.

use serde::{Deserialize, Serialize};

/// A field on the plane with mixed partials `∂^a_x̄ ∂^b_xN`.
pub trait Field2D: Sync {
    fn partial(&self, x: [f64; 2], a: usize, b: usize) -> f64;

    fn value(&self, x: [f64; 2]) -> f64 {
        self.partial(x, 0, 0)
    }

    /// Highest total derivative order the field provides.
    fn max_order(&self) -> usize {
        usize::MAX
    }

    /// Partials of order `≤ 2` as `[1, x̄, N, x̄x̄, x̄N, NN]`.
    fn jet2(&self, x: [f64; 2]) -> [f64; 6] {
        JET2_ORDERS.map(|(a, b)| self.partial(x, a, b))
    }

    /// Laplacian applied `k` times, then `∂^a_x̄ ∂^b_xN`.
    fn laplace_power(&self, x: [f64; 2], k: usize, a: usize, b: usize) -> f64 {
        // Δ^k = Σ_j C(k, j) ∂^{2j}_x̄ ∂^{2(k-j)}_xN
        (0..=k).map(|j| binom(k, j) * self.partial(x, a + 2 * j, b + 2 * (k - j))).sum()
    }
}

/// `(a, b)` exponents of the entries returned by [`Field2D::jet2`].
pub const JET2_ORDERS: [(usize, usize); 6] = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)];

/// Wraps a closure `(x, a, b) ↦ ∂^a_x̄ ∂^b_xN f(x)`.
pub struct FnField<F>(pub F);

impl<F: Fn([f64; 2], usize, usize) -> f64 + Sync> Field2D for FnField<F> {
    fn partial(&self, x: [f64; 2], a: usize, b: usize) -> f64 {
        (self.0)(x, a, b)
    }
}

pub fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `p(x)·(a cos ωx + c sin ωx)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factor1D {
    /// Ascending polynomial coefficients.
    pub poly: Vec<f64>,
    pub omega: f64,
    pub cos: f64,
    pub sin: f64,
}

impl Factor1D {
    pub fn poly(coeffs: &[f64]) -> Self {
        Self { poly: coeffs.to_vec(), omega: 0.0, cos: 1.0, sin: 0.0 }
    }

    pub fn trig(omega: f64, cos: f64, sin: f64) -> Self {
        Self { poly: vec![1.0], omega, cos, sin }
    }

    /// `(x − x0)^n`.
    pub fn shifted_power(x0: f64, n: usize) -> Self {
        let coeffs = (0..=n).map(|k| binom(n, k) * (-x0).powi((n - k) as i32)).collect::<Vec<_>>();
        Self::poly(&coeffs)
    }

    pub fn times_poly(mut self, coeffs: &[f64]) -> Self {
        let mut out = vec![0.0; self.poly.len() + coeffs.len() - 1];
        for (i, a) in self.poly.iter().enumerate() {
            for (j, b) in coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        self.poly = out;
        self
    }

    fn poly_derivative(&self, x: f64, k: usize) -> f64 {
        // Horner on the coefficients of the k-th derivative
        let mut h = 0.0;
        for i in (k..self.poly.len()).rev() {
            let falling: f64 = ((i - k + 1)..=i).map(|v| v as f64).product();
            h = h * x + self.poly[i] * falling;
        }
        h
    }

    fn trig_derivative(&self, x: f64, k: usize) -> f64 {
        if self.omega == 0.0 {
            return if k == 0 { self.cos } else { 0.0 };
        }
        let th = self.omega * x + k as f64 * std::f64::consts::FRAC_PI_2;
        self.omega.powi(k as i32) * (self.cos * th.cos() + self.sin * th.sin())
    }

    pub fn derivative(&self, x: f64, n: usize) -> f64 {
        (0..=n).map(|k| binom(n, k) * self.poly_derivative(x, k) * self.trig_derivative(x, n - k)).sum()
    }
}

/// `coef · X(x̄) · Z(x_N)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparableTerm {
    pub coef: f64,
    pub x: Factor1D,
    pub z: Factor1D,
}

/// A finite sum of separable terms.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SmoothField {
    pub terms: Vec<SeparableTerm>,
}

impl SmoothField {
    pub fn term(coef: f64, x: Factor1D, z: Factor1D) -> Self {
        Self { terms: vec![SeparableTerm { coef, x, z }] }
    }

    pub fn plus(mut self, other: SmoothField) -> Self {
        self.terms.extend(other.terms);
        self
    }

    /// Polynomial `Σ c_ab x̄^a x_N^b` from `(a, b, c_ab)` triples.
    pub fn polynomial(monomials: &[(usize, usize, f64)]) -> Self {
        let mut f = SmoothField::default();
        for &(a, b, c) in monomials {
            let mut px = vec![0.0; a + 1];
            px[a] = 1.0;
            let mut pz = vec![0.0; b + 1];
            pz[b] = 1.0;
            f.terms.push(SeparableTerm { coef: c, x: Factor1D::poly(&px), z: Factor1D::poly(&pz) });
        }
        f
    }
}

impl Field2D for SmoothField {
    fn partial(&self, x: [f64; 2], a: usize, b: usize) -> f64 {
        self.terms.iter().map(|t| t.coef * t.x.derivative(x[0], a) * t.z.derivative(x[1], b)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn product_rule_matches_closed_form() {
        // x² sin(3x), checked against finite differences of the previous order
        let f = Factor1D::trig(3.0, 0.0, 1.0).times_poly(&[0.0, 0.0, 1.0]);
        let x = 0.7;
        let h = 1e-4;
        for n in 0..4 {
            let fd = (f.derivative(x + h, n) - f.derivative(x - h, n)) / (2.0 * h);
            assert_relative_eq!(fd, f.derivative(x, n + 1), max_relative = 1e-6);
        }
        assert_relative_eq!(f.derivative(x, 0), x * x * (3.0 * x).sin(), epsilon = 1e-15);
    }

    #[test]
    fn shifted_power_and_laplacian() {
        let p = Factor1D::shifted_power(-1.0, 4);
        assert_relative_eq!(p.derivative(-0.5, 0), 0.0625, epsilon = 1e-15);
        assert_relative_eq!(p.derivative(-0.5, 4), 24.0, epsilon = 1e-12);
        let f = SmoothField::polynomial(&[(2, 0, 1.0), (0, 2, 3.0)]);
        assert_relative_eq!(f.laplace_power([0.3, 0.1], 1, 0, 0), 8.0, epsilon = 1e-14);
        assert_eq!(f.laplace_power([0.3, 0.1], 2, 0, 0), 0.0);
    }
}
