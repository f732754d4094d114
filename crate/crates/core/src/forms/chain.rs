//! Chain rule to third order: reference-coordinate jets to physical jets.

use crate::geometry::MapJet3;
use crate::spline::{jet_index, JET_LEN};

use super::FormsError;

/// Jacobian determinants below this (relative to the jacobian scale) count as singular.
const SINGULAR_TOL: f64 = 1e-14;

/// Linear map from a reference jet `(u, u_s, ..., u_ttt)` to the physical jet
/// `(U, U_x, ..., U_zzz)` at one point of a chart, plus the jacobian determinant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalJetMap {
    /// `lin[k][i]`: coefficient of reference component `i + 1` in physical component `k + 1`.
    lin: [[f64; JET_LEN - 1]; JET_LEN - 1],
    pub det: f64,
}

impl PhysicalJetMap {
    pub fn new(map: &MapJet3) -> Result<Self, FormsError> {
        let det = map.det();
        let scale = map.jac.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
        if !(det.abs() > SINGULAR_TOL * scale * scale) {
            return Err(FormsError::DegenerateChart(det));
        }
        let mut lin = [[0.0; JET_LEN - 1]; JET_LEN - 1];
        for i in 0..JET_LEN - 1 {
            let mut unit = [0.0; JET_LEN];
            unit[i + 1] = 1.0;
            let out = apply_chain_rule(map, det, &unit);
            for k in 0..JET_LEN - 1 {
                lin[k][i] = out[k + 1];
            }
        }
        Ok(Self { lin, det })
    }

    /// Physical jet of a function whose reference jet is `r`.
    #[inline]
    pub fn apply(&self, r: &[f64; JET_LEN]) -> [f64; JET_LEN] {
        let mut out = [0.0; JET_LEN];
        out[0] = r[0];
        // first derivatives only see first derivatives, second see orders 1-2
        for k in 0..2 {
            out[k + 1] = self.lin[k][0] * r[1] + self.lin[k][1] * r[2];
        }
        for k in 2..5 {
            out[k + 1] = (0..5).map(|i| self.lin[k][i] * r[i + 1]).sum();
        }
        for k in 5..9 {
            out[k + 1] = (0..9).map(|i| self.lin[k][i] * r[i + 1]).sum();
        }
        out
    }
}

fn sym2(j: &[f64; JET_LEN]) -> [[f64; 2]; 2] {
    let mut h = [[0.0; 2]; 2];
    for i in 0..2 {
        for k in 0..2 {
            let nz = i + k;
            h[i][k] = j[jet_index(2 - nz, nz)];
        }
    }
    h
}

fn sym3(j: &[f64; JET_LEN]) -> [[[f64; 2]; 2]; 2] {
    let mut t = [[[0.0; 2]; 2]; 2];
    for i in 0..2 {
        for k in 0..2 {
            for l in 0..2 {
                let nz = i + k + l;
                t[i][k][l] = j[jet_index(3 - nz, nz)];
            }
        }
    }
    t
}

/// Inverts `u(ξ) = U(X(ξ))` to third order.
///
/// With `J = DX`, `H = D²X`, `T = D³X` and `K = J⁻¹`:
/// `U_k = u_i K_ik`,
/// `U_kl = (u_ij − U_m H^m_ij) K_ik K_jl`,
/// `U_klm = (u_ijh − U_ab (H^a_ih J^b_j + J^a_i H^b_jh + H^a_ij J^b_h) − U_a T^a_ijh) K_ik K_jl K_hm`.
fn apply_chain_rule(map: &MapJet3, det: f64, r: &[f64; JET_LEN]) -> [f64; JET_LEN] {
    let jm = &map.jac;
    let k = [[jm[1][1] / det, -jm[0][1] / det], [-jm[1][0] / det, jm[0][0] / det]];
    let (hm, tm) = (&map.hess, &map.third);
    let u1 = [r[1], r[2]];
    let u2 = sym2(r);
    let u3 = sym3(r);

    let mut g = [0.0; 2];
    for a in 0..2 {
        for i in 0..2 {
            g[a] += u1[i] * k[i][a];
        }
    }
    let mut v2 = u2;
    for i in 0..2 {
        for j in 0..2 {
            for m in 0..2 {
                v2[i][j] -= g[m] * hm[m][i][j];
            }
        }
    }
    let mut h = [[0.0; 2]; 2];
    for p in 0..2 {
        for q in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    h[p][q] += v2[i][j] * k[i][p] * k[j][q];
                }
            }
        }
    }
    let mut v3 = u3;
    for i in 0..2 {
        for j in 0..2 {
            for l in 0..2 {
                let mut s = 0.0;
                for a in 0..2 {
                    s += g[a] * tm[a][i][j][l];
                    for b in 0..2 {
                        s += h[a][b] * (hm[a][i][l] * jm[b][j] + jm[a][i] * hm[b][j][l] + hm[a][i][j] * jm[b][l]);
                    }
                }
                v3[i][j][l] -= s;
            }
        }
    }
    let mut t = [[[0.0; 2]; 2]; 2];
    for p in 0..2 {
        for q in 0..2 {
            for s in 0..2 {
                let mut acc = 0.0;
                for i in 0..2 {
                    for j in 0..2 {
                        for l in 0..2 {
                            acc += v3[i][j][l] * k[i][p] * k[j][q] * k[l][s];
                        }
                    }
                }
                t[p][q][s] = acc;
            }
        }
    }
    let mut out = [0.0; JET_LEN];
    out[0] = r[0];
    out[1] = g[0];
    out[2] = g[1];
    out[jet_index(2, 0)] = h[0][0];
    out[jet_index(1, 1)] = h[0][1];
    out[jet_index(0, 2)] = h[1][1];
    out[jet_index(3, 0)] = t[0][0][0];
    out[jet_index(2, 1)] = t[0][0][1];
    out[jet_index(1, 2)] = t[0][1][1];
    out[jet_index(0, 3)] = t[1][1][1];
    out
}

/// Physical third partials `(U_xxx, U_xxz, U_xzz, U_zzz)` for each reference jet.
pub fn physical_third_derivatives(reference: &[[f64; JET_LEN]], chart: &MapJet3) -> Result<Vec<[f64; 4]>, FormsError> {
    let map = PhysicalJetMap::new(chart)?;
    Ok(reference
        .iter()
        .map(|r| {
            let p = map.apply(r);
            [p[6], p[7], p[8], p[9]]
        })
        .collect())
}
