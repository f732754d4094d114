//! Independent eigenvalues of the 1D problem `∫ u‴v‴ + uv = λ ∫ uv` on `(−1, 0)`.
//!
//! Integrating by parts three times,
//! `∫ u‴v‴ = [u‴v″ − u⁗v′ + u⁽⁵⁾v] − ∫ u⁽⁶⁾v`,
//! so eigenfunctions solve `u⁽⁶⁾ = −(λ − 1) u`. Boundary conditions at each
//! end follow from which of `v, v′, v″` the trial space leaves free:
//!
//! * weak (`v = 0` only): `u = 0`, and `u‴ = u⁗ = 0` are natural;
//! * strong (`v = v′ = 0`): `u = u′ = 0`, and `u‴ = 0` is natural;
//! * Dirichlet (`v = v′ = v″ = 0`): `u = u′ = u″ = 0`, all essential.
//!
//! With `ω = (λ − 1)^{1/6}` the characteristic roots are `ω e^{iπ(2k+1)/6}`,
//! i.e. `±iω` and `ω(±√3/2 ± i/2)`. The real basis
//! `cos ωx, sin ωx, e^{aωx} cos bωx, e^{aωx} sin bωx, e^{−aω(x+1)} cos bωx, e^{−aω(x+1)} sin bωx`
//! (`a = √3/2`, `b = 1/2`) keeps every entry bounded by one on `[−1, 0]`.
//! Eigenvalues are the zeros of the 6×6 boundary determinant, bracketed by
//! sign changes on a uniform `ω` grid and refined by bisection.
//!
//! At `λ = 1` the solutions are quintic polynomials and the boundary system is
//! rank-tested directly: in the weak family `x(x + 1)` has `u‴ ≡ 0` and is an
//! eigenfunction with `λ = 1`.

use serde::{Deserialize, Serialize};

use super::EigError;

const SCAN_STEP: f64 = 0.01;
const SCAN_LIMIT: f64 = 400.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleBc {
    Wbc,
    Sbc,
    Dbc,
}

impl OracleBc {
    /// Derivative orders set to zero at each endpoint.
    pub fn orders(self) -> [usize; 3] {
        match self {
            OracleBc::Wbc => [0, 3, 4],
            OracleBc::Sbc => [0, 1, 3],
            OracleBc::Dbc => [0, 1, 2],
        }
    }

    /// Clamped spline layers eliminated at each end for the Galerkin analogue.
    pub fn layers(self) -> usize {
        match self {
            OracleBc::Wbc => 1,
            OracleBc::Sbc => 2,
            OracleBc::Dbc => 3,
        }
    }
}

#[derive(Clone, Copy)]
struct C(f64, f64);

impl C {
    fn mul(self, o: C) -> C {
        C(self.0 * o.0 - self.1 * o.1, self.0 * o.1 + self.1 * o.0)
    }
    fn exp(self) -> C {
        let r = self.0.exp();
        C(r * self.1.cos(), r * self.1.sin())
    }
}

/// `d^k/dx^k` of the six real basis functions at `x`.
fn basis_derivative(omega: f64, x: f64, k: usize) -> [f64; 6] {
    let a = 3f64.sqrt() / 2.0;
    let b = 0.5;
    // (exponent μ, prefactor) with each basis function = Re/Im of prefactor·e^{μx}
    let roots = [(C(0.0, omega), C(1.0, 0.0)), (C(a * omega, b * omega), C(1.0, 0.0)), (C(-a * omega, b * omega), C((-a * omega).exp(), 0.0))];
    let mut out = [0.0; 6];
    for (r, (mu, pre)) in roots.iter().enumerate() {
        let mut pk = C(1.0, 0.0);
        for _ in 0..k {
            pk = pk.mul(*mu);
        }
        let v = pre.mul(pk).mul(C(mu.0 * x, mu.1 * x).exp());
        out[2 * r] = v.0;
        out[2 * r + 1] = v.1;
    }
    out
}

/// Determinant of the boundary matrix at `ω`, scaled by row norms.
pub fn characteristic_determinant(bc: OracleBc, omega: f64) -> f64 {
    let mut m = [[0.0; 6]; 6];
    let mut row = 0;
    for x in [-1.0, 0.0] {
        for k in bc.orders() {
            let r = basis_derivative(omega, x, k);
            let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
            for j in 0..6 {
                m[row][j] = r[j] / norm;
            }
            row += 1;
        }
    }
    det6(m)
}

fn det6(mut m: [[f64; 6]; 6]) -> f64 {
    let mut det = 1.0;
    for c in 0..6 {
        let p = (c..6).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        if m[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det *= m[c][c];
        for r in c + 1..6 {
            let f = m[r][c] / m[c][c];
            for k in c..6 {
                m[r][k] -= f * m[c][k];
            }
        }
    }
    det
}

/// The `count` smallest eigenvalues for the given boundary family.
pub fn oracle_eigen_1d(bc: OracleBc, count: usize) -> Result<Vec<f64>, EigError> {
    let mut roots = vec![0.0; polynomial_nullity(bc).min(count)];
    let mut lo = SCAN_STEP;
    let mut f_lo = characteristic_determinant(bc, lo);
    while roots.len() < count && lo < SCAN_LIMIT {
        let hi = lo + SCAN_STEP;
        let f_hi = characteristic_determinant(bc, hi);
        if f_lo == 0.0 || f_lo.signum() != f_hi.signum() {
            roots.push(bisect(bc, lo, hi, f_lo));
        }
        lo = hi;
        f_lo = f_hi;
    }
    if roots.len() < count {
        return Err(EigError::RootCount { found: roots.len(), requested: count, limit: SCAN_LIMIT });
    }
    Ok(roots.into_iter().map(|w| 1.0 + w.powi(6)).collect())
}

/// Dimension of the quintic solutions of `u⁽⁶⁾ = 0` meeting the boundary conditions.
fn polynomial_nullity(bc: OracleBc) -> usize {
    let mut m = [[0.0; 6]; 6];
    let mut row = 0;
    for x in [-1.0f64, 0.0] {
        for k in bc.orders() {
            for j in k..6 {
                let falling: f64 = ((j - k + 1)..=j).map(|v| v as f64).product();
                m[row][j] = falling * x.powi((j - k) as i32);
            }
            row += 1;
        }
    }
    6 - rank6(m)
}

fn rank6(mut m: [[f64; 6]; 6]) -> usize {
    let mut rank = 0;
    for c in 0..6 {
        let Some(p) = (rank..6).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())) else { break };
        if m[p][c].abs() <= 1e-12 {
            continue;
        }
        m.swap(p, rank);
        for r in rank + 1..6 {
            let f = m[r][c] / m[rank][c];
            for k in c..6 {
                m[r][k] -= f * m[rank][k];
            }
        }
        rank += 1;
    }
    rank
}

fn bisect(bc: OracleBc, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    if fa == 0.0 {
        return a;
    }
    while b - a > 1e-15 * b {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = characteristic_determinant(bc, mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_satisfies_the_ode() {
        let omega = 2.7;
        for x in [-1.0, -0.4, 0.0] {
            let u = basis_derivative(omega, x, 0);
            let u6 = basis_derivative(omega, x, 6);
            for j in 0..6 {
                assert!((u6[j] + omega.powi(6) * u[j]).abs() <= 1e-10 * omega.powi(6));
            }
        }
    }

    #[test]
    fn only_the_weak_family_has_the_unit_eigenvalue() {
        assert_eq!(polynomial_nullity(OracleBc::Wbc), 1);
        assert_eq!(polynomial_nullity(OracleBc::Sbc), 0);
        assert_eq!(polynomial_nullity(OracleBc::Dbc), 0);
        assert_eq!(oracle_eigen_1d(OracleBc::Wbc, 1).unwrap(), vec![1.0]);
    }

    #[test]
    fn eigenvalues_are_ordered_across_families() {
        let w = oracle_eigen_1d(OracleBc::Wbc, 4).unwrap();
        let s = oracle_eigen_1d(OracleBc::Sbc, 4).unwrap();
        let d = oracle_eigen_1d(OracleBc::Dbc, 4).unwrap();
        for i in 0..4 {
            assert!(w[i] >= 1.0);
            assert!(d[i] >= s[i] && s[i] >= w[i]);
        }
        assert!(w.windows(2).all(|p| p[1] > p[0]));
    }

    #[test]
    fn dirichlet_fundamental_respects_poincare_bound() {
        // u, u', u'' all vanish at both ends, so three Poincaré steps give ∫u‴² ≥ π⁶ ∫u²
        let d = oracle_eigen_1d(OracleBc::Dbc, 1).unwrap();
        assert!(d[0] > 1.0 + std::f64::consts::PI.powi(6));
    }
}
