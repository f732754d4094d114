//! Dense symmetric-definite generalized eigensolver and a 1D transcendental oracle.

mod oracle1d;

pub use oracle1d::{oracle_eigen_1d, characteristic_determinant, OracleBc};

use faer::linalg::triangular_solve::{solve_lower_triangular_in_place, solve_upper_triangular_in_place};
use faer::{Mat, Par, Side};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forms::AssembledPencil;

/// Eigenvalues closer than this (relative) are reported as one cluster.
pub const CLUSTER_TOL: f64 = 1e-8;
/// Residual above which a pair carries an accuracy warning.
pub const RESIDUAL_WARN: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigError {
    #[error("mass matrix is not positive definite (Cholesky failed)")]
    IndefiniteMass,
    #[error("form matrix is not positive definite (Cholesky failed)")]
    IndefiniteForm,
    #[error("requested {requested} eigenpairs from a pencil of dimension {dim}")]
    TooMany { requested: usize, dim: usize },
    #[error("dense eigensolver failed to converge")]
    NoConvergence,
    #[error("oracle found {found} roots below omega = {limit}, {requested} requested")]
    RootCount { found: usize, requested: usize, limit: f64 },
}

/// Smallest eigenpairs of `Qu = λMu`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// `M`-orthonormal eigenvectors over the free coefficients.
    pub eigenvectors: Vec<Vec<f64>>,
    /// `‖Qu − λMu‖ / ‖Qu‖`.
    pub residuals: Vec<f64>,
    /// `‖Qu − λMu‖ / (‖Q‖_F ‖u‖)`.
    pub scaled_residuals: Vec<f64>,
    /// Cluster label of each eigenvalue (consecutive, starting at 0).
    pub clusters: Vec<usize>,
    pub warnings: Vec<String>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Mean eigenvalue of each cluster, ascending.
    pub fn cluster_means(&self) -> Vec<f64> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for (&l, &c) in self.eigenvalues.iter().zip(&self.clusters) {
            if c == out.len() {
                out.push((0.0, 0));
            }
            out[c].0 += l;
            out[c].1 += 1;
        }
        out.into_iter().map(|(s, n)| s / n as f64).collect()
    }
}

/// Labels ascending values so that neighbours within `tol` (relative) share a label.
pub fn cluster_labels(values: &[f64], tol: f64) -> Vec<usize> {
    let mut labels = Vec::with_capacity(values.len());
    let mut current = 0;
    for (i, v) in values.iter().enumerate() {
        if i > 0 && (v - values[i - 1]).abs() > tol * v.abs().max(values[i - 1].abs()) {
            current += 1;
        }
        labels.push(current);
    }
    labels
}

fn frobenius(a: &Mat<f64>) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a[(i, j)] * a[(i, j)];
        }
    }
    s.sqrt()
}

/// The `count` smallest eigenpairs.
///
/// The pencil is reduced with the Cholesky factor of `Q` rather than `M`:
/// with `Q = LLᵀ` the matrix `C = L⁻¹ M L⁻ᵀ` has eigenvalues `μ = 1/λ ∈ (0, 1]`,
/// so the wanted end of the spectrum is the well-resolved one. `M` is still
/// factorised to confirm it is positive definite.
pub fn solve(pencil: &AssembledPencil, count: usize) -> Result<Spectrum, EigError> {
    let n = pencil.dim();
    if count > n {
        return Err(EigError::TooMany { requested: count, dim: n });
    }
    let q = &pencil.q;
    let m = &pencil.m;
    let m_llt = m.llt(Side::Lower).map_err(|_| EigError::IndefiniteMass)?;
    if let Some(root) = &pencil.energy_root {
        return solve_root(pencil, root, m_llt.L(), count);
    }
    let llt = q.llt(Side::Lower).map_err(|_| EigError::IndefiniteForm)?;
    let l = llt.L();

    // C = L⁻¹ M L⁻ᵀ, formed as L⁻¹ (L⁻¹ M)ᵀ using the symmetry of M
    let mut x = m.clone();
    solve_lower_triangular_in_place(l, x.as_mut(), Par::Seq);
    let mut c = x.transpose().to_owned();
    solve_lower_triangular_in_place(l, c.as_mut(), Par::Seq);
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (c[(i, j)] + c[(j, i)]);
            c[(i, j)] = avg;
            c[(j, i)] = avg;
        }
    }
    let eig = c.self_adjoint_eigen(Side::Lower).map_err(|_| EigError::NoConvergence)?;
    let mu = eig.S();
    let y = eig.U();

    let mut vecs = Mat::<f64>::zeros(n, count);
    let mut lambdas = Vec::with_capacity(count);
    for k in 0..count {
        let src = n - 1 - k;
        lambdas.push(1.0 / mu[src]);
        for i in 0..n {
            vecs[(i, k)] = y[(i, src)];
        }
    }
    solve_upper_triangular_in_place(l.transpose(), vecs.as_mut(), Par::Seq);
    finish(pencil, lambdas, vecs, |u| mat_vec(q, u))
}

/// Square-root variant: with `Q = RᵀR + M` and `M = L Lᵀ`, the singular values
/// `σ` of `R L⁻ᵀ` give `λ = 1 + σ²` with absolute accuracy in `σ`.
fn solve_root(pencil: &AssembledPencil, root: &Mat<f64>, l: faer::MatRef<'_, f64>, count: usize) -> Result<Spectrum, EigError> {
    let n = pencil.dim();
    let mut bt = root.transpose().to_owned();
    solve_lower_triangular_in_place(l, bt.as_mut(), Par::Seq);
    let svd = bt.transpose().to_owned().thin_svd().map_err(|_| EigError::NoConvergence)?;
    let sv = svd.S();
    let v = svd.V();
    let k = sv.dim();
    let mut vecs = Mat::<f64>::zeros(n, count);
    let mut lambdas = Vec::with_capacity(count);
    // singular values come in descending order; zero-padded if R has fewer rows
    let mut order: Vec<(f64, Option<usize>)> = (0..k).map(|i| (sv[i], Some(i))).collect();
    order.extend((k..n).map(|_| (0.0, None)));
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (c, &(s, idx)) in order.iter().take(count).enumerate() {
        let Some(i) = idx else { return Err(EigError::NoConvergence) };
        lambdas.push(1.0 + s * s);
        for r in 0..n {
            vecs[(r, c)] = v[(r, i)];
        }
    }
    solve_upper_triangular_in_place(l.transpose(), vecs.as_mut(), Par::Seq);
    let m = &pencil.m;
    finish(pencil, lambdas, vecs, |u| {
        let ru = mat_vec(root, u);
        let mut out = mat_vec(&root.transpose().to_owned(), &ru);
        for (o, mu) in out.iter_mut().zip(mat_vec(m, u)) {
            *o += mu;
        }
        out
    })
}

fn finish(pencil: &AssembledPencil, lambdas: Vec<f64>, vecs: Mat<f64>, apply_q: impl Fn(&[f64]) -> Vec<f64>) -> Result<Spectrum, EigError> {
    let (n, count) = (vecs.nrows(), vecs.ncols());
    let m = &pencil.m;
    let q_norm = frobenius(&pencil.q);
    let mut eigenvectors = Vec::with_capacity(count);
    let mut residuals = Vec::with_capacity(count);
    let mut scaled_residuals = Vec::with_capacity(count);
    let mut warnings = Vec::new();
    for k in 0..count {
        let mut u: Vec<f64> = (0..n).map(|i| vecs[(i, k)]).collect();
        let mu_ = mat_vec(m, &u);
        let norm = dot(&u, &mu_).sqrt();
        // deterministic sign: largest-magnitude entry positive
        let pivot = u.iter().copied().fold(0.0_f64, |a, b| if b.abs() > a.abs() { b } else { a });
        let s = if pivot < 0.0 { -1.0 / norm } else { 1.0 / norm };
        u.iter_mut().for_each(|v| *v *= s);
        let qu = apply_q(&u);
        let mu_ = mat_vec(m, &u);
        let lambda = lambdas[k];
        let r: f64 = qu.iter().zip(&mu_).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt();
        let res = r / dot(&qu, &qu).sqrt();
        let unorm = dot(&u, &u).sqrt();
        if res > RESIDUAL_WARN {
            warnings.push(format!("pair {k}: residual {res:.3e} exceeds {RESIDUAL_WARN:.0e}"));
        }
        residuals.push(res);
        scaled_residuals.push(r / (q_norm * unorm));
        eigenvectors.push(u);
    }
    let clusters = cluster_labels(&lambdas, CLUSTER_TOL);
    Ok(Spectrum { eigenvalues: lambdas, eigenvectors, residuals, scaled_residuals, clusters, warnings })
}

fn mat_vec(a: &Mat<f64>, x: &[f64]) -> Vec<f64> {
    let n = a.nrows();
    let mut y = vec![0.0; n];
    for (j, xj) in x.iter().enumerate() {
        let col = a.col(j);
        for i in 0..n {
            y[i] += col[i] * xj;
        }
    }
    y
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
