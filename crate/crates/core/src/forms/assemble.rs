use faer::Mat;

use crate::geometry::Region;
use crate::par::{map_range, Parallelism};
use crate::spline::{QuadratureRule, QuadratureRule1D, SplineSpace1D, TensorSplineSpace, JET_LEN};

use super::{BcFamily, FormSpec, FormsError, PhysicalJetMap};

/// Multiplicities of `xxx, xxz, xzz, zzz` in the full contraction `D³u : D³v`.
const THIRD_MULT: [f64; 4] = [1.0, 3.0, 3.0, 1.0];
/// Elements handled per parallel batch; scattering happens batch by batch in order.
const BATCH: usize = 256;

/// The pencil `(Q, M)` restricted to free coefficients.
#[derive(Debug, Clone)]
pub struct AssembledPencil {
    pub q: Mat<f64>,
    pub m: Mat<f64>,
    /// Global coefficient index of each free unknown.
    pub free: Vec<usize>,
    /// Optional factor `R` with `RᵀR = Q − M`, formed without squaring.
    pub energy_root: Option<Mat<f64>>,
}

impl AssembledPencil {
    pub fn dim(&self) -> usize {
        self.free.len()
    }

    /// Largest `|A_ij − A_ji| / max|A|` over both matrices.
    pub fn symmetry_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in [&self.q, &self.m] {
            let scale = (0..a.nrows()).flat_map(|i| (0..a.ncols()).map(move |j| (i, j))).map(|(i, j)| a[(i, j)].abs()).fold(0.0, f64::max);
            for i in 0..a.nrows() {
                for j in 0..i {
                    worst = worst.max((a[(i, j)] - a[(j, i)]).abs() / scale.max(f64::MIN_POSITIVE));
                }
            }
        }
        worst
    }
}

struct LocalBlock {
    dofs: Vec<Option<usize>>,
    q: Vec<f64>,
    m: Vec<f64>,
}

/// Assembles `Q` and `M` on `region` through its graph chart.
pub fn assemble(
    space: &TensorSplineSpace,
    region: &Region,
    spec: &FormSpec,
    rule: &QuadratureRule,
    mode: Parallelism,
) -> Result<AssembledPencil, FormsError> {
    spec.validate(space, region)?;
    if rule.points_per_span() == 0 {
        return Err(FormsError::Quadrature(0));
    }
    let (sx, sy) = (space.factor(0), space.factor(1));
    let tx = sx.tabulate(&rule.x, 3);
    let ty = sy.tabulate(&rule.y, 3);
    let dof = space.dof_map();
    let free = space.free_indices();
    let n = free.len();
    let (nex, ney) = (sx.num_elements(), sy.num_elements());
    let (px, py) = (sx.degree(), sy.degree());
    let nloc = (px + 1) * (py + 1);

    let local = |e: usize| -> Result<LocalBlock, FormsError> {
        let (ex, ey) = (e / ney, e % ney);
        let dofs: Vec<Option<usize>> = (0..=px)
            .flat_map(|a| (0..=py).map(move |b| (a, b)))
            .map(|(a, b)| dof[space.index(sx.wrap(tx.first[ex] + a), sy.wrap(ty.first[ey] + b))])
            .collect();
        let mut q = vec![0.0; nloc * nloc];
        let mut m = vec![0.0; nloc * nloc];
        let mut rows = vec![[0.0; 5]; nloc];
        for (qx, (&s, &wx)) in rule.x.points[ex].iter().zip(&rule.x.weights[ex]).enumerate() {
            let bx = &tx.values[ex][qx];
            for (qy, (&t, &wy)) in rule.y.points[ey].iter().zip(&rule.y.weights[ey]).enumerate() {
                let by = &ty.values[ey][qy];
                let map = PhysicalJetMap::new(&region.chart([s, t]))?;
                let w = wx * wy * map.det.abs();
                for a in 0..=px {
                    for b in 0..=py {
                        let mut r = [0.0; JET_LEN];
                        for order in 0..=3 {
                            for k in 0..=order {
                                r[crate::spline::jet_index(order - k, k)] = bx[order - k][a] * by[k][b];
                            }
                        }
                        let p = map.apply(&r);
                        let row = &mut rows[a * (py + 1) + b];
                        for c in 0..4 {
                            row[c] = p[6 + c] * THIRD_MULT[c].sqrt();
                        }
                        row[4] = p[0];
                    }
                }
                for i in 0..nloc {
                    if dofs[i].is_none() {
                        continue;
                    }
                    let ri = rows[i];
                    for j in i..nloc {
                        let rj = &rows[j];
                        let mass = ri[4] * rj[4];
                        let third = ri[0] * rj[0] + ri[1] * rj[1] + ri[2] * rj[2] + ri[3] * rj[3];
                        q[i * nloc + j] += w * (third + mass);
                        m[i * nloc + j] += w * mass;
                    }
                }
            }
        }
        if let BcFamily::Strange { k1 } = spec.bc {
            if ey == ney - 1 && k1 != 0.0 {
                add_top_term(region, space, ex, k1, &rule.x, &mut q, nloc);
            }
        }
        Ok(LocalBlock { dofs, q, m })
    };

    let mut qg = Mat::<f64>::zeros(n, n);
    let mut mg = Mat::<f64>::zeros(n, n);
    let total = nex * ney;
    for start in (0..total).step_by(BATCH) {
        let len = BATCH.min(total - start);
        let blocks = map_range(mode, len, |k| local(start + k));
        for block in blocks {
            let block = block?;
            for i in 0..nloc {
                let Some(gi) = block.dofs[i] else { continue };
                for j in i..nloc {
                    let Some(gj) = block.dofs[j] else { continue };
                    let (vq, vm) = (block.q[i * nloc + j], block.m[i * nloc + j]);
                    qg[(gi, gj)] += vq;
                    mg[(gi, gj)] += vm;
                    if gi != gj {
                        qg[(gj, gi)] += vq;
                        mg[(gj, gi)] += vm;
                    }
                }
            }
        }
    }
    Ok(AssembledPencil { q: qg, m: mg, free, energy_root: None })
}

/// Adds `K1 ∫ ∂u/∂x_N ∂v/∂x_N` over the top edge of element column `ex`.
fn add_top_term(region: &Region, space: &TensorSplineSpace, ex: usize, k1: f64, rule: &QuadratureRule1D, q: &mut [f64], nloc: usize) {
    let ey = space.factor(1).num_elements() - 1;
    for (&s, &w) in rule.points[ex].iter().zip(&rule.weights[ex]) {
        let chart = region.chart([s, 1.0]);
        let Ok(map) = PhysicalJetMap::new(&chart) else { continue };
        // arc length element of the (flat) top edge
        let ds = chart.jac[0][0].hypot(chart.jac[1][0]);
        let basis = space.eval_basis_in_element((ex, ey), [s, 1.0], 1);
        let dn: Vec<f64> = basis.iter().map(|(_, r)| map.apply(r)[2]).collect();
        for i in 0..nloc {
            for j in i..nloc {
                q[i * nloc + j] += k1 * w * ds * dn[i] * dn[j];
            }
        }
    }
}

/// One-dimensional analogue on an interval: `∫ u‴v‴ + uv` and `∫ uv`, with
/// `left`/`right` clamped layers eliminated at the ends.
///
/// Also returns the triangular factor of the weighted third-derivative
/// sampling matrix, so `∫ u‴v‴` is available in square-root form. Entries of
/// `Q` reach `h^{-5}`; forming them loses the energy of modes with `u‴ ≈ 0`,
/// which the factor keeps.
pub fn assemble_1d(space: &SplineSpace1D, left: usize, right: usize, rule: &QuadratureRule1D) -> Result<AssembledPencil, FormsError> {
    if left > 3 || right > 3 {
        return Err(FormsError::InconsistentMask(format!("layers ({left}, {right}) exceed 3")));
    }
    let nb = space.basis_count();
    let free: Vec<usize> = (left..nb - right).collect();
    let n = free.len();
    let mut qg = Mat::<f64>::zeros(n, n);
    let mut mg = Mat::<f64>::zeros(n, n);
    let tab = space.tabulate(rule, 3);
    let p = space.degree();
    let rows: usize = rule.weights.iter().map(Vec::len).sum();
    let mut sampled = Mat::<f64>::zeros(rows, n);
    let mut row = 0;
    for e in 0..space.num_elements() {
        for (qi, &w) in rule.weights[e].iter().enumerate() {
            let v = &tab.values[e][qi];
            for a in 0..=p {
                let ga = tab.first[e] + a;
                if ga >= left && ga < nb - right {
                    sampled[(row, ga - left)] = w.sqrt() * v[3][a];
                }
            }
            row += 1;
            for a in 0..=p {
                let ga = tab.first[e] + a;
                if ga < left || ga >= nb - right {
                    continue;
                }
                for b in 0..=p {
                    let gb = tab.first[e] + b;
                    if gb < left || gb >= nb - right {
                        continue;
                    }
                    let mass = w * v[0][a] * v[0][b];
                    qg[(ga - left, gb - left)] += w * v[3][a] * v[3][b] + mass;
                    mg[(ga - left, gb - left)] += mass;
                }
            }
        }
    }
    let energy_root = (rows >= n).then(|| sampled.qr().thin_R().to_owned());
    Ok(AssembledPencil { q: qg, m: mg, free, energy_root })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Interval;
    use crate::spline::build_quadrature;

    fn flat_space(spec: &FormSpec) -> TensorSplineSpace {
        spec.constrain(SplineSpace1D::uniform(5, 3).unwrap(), SplineSpace1D::uniform(5, 3).unwrap()).unwrap()
    }

    #[test]
    fn pencil_is_symmetric_and_mask_is_checked() {
        let spec = FormSpec::new(BcFamily::Wbc);
        let space = flat_space(&spec);
        let rule = build_quadrature(&space, 8).unwrap();
        let region = Region::Flat(Interval::unit());
        let p = assemble(&space, &region, &spec, &rule, Parallelism::Sequential).unwrap();
        assert!(p.symmetry_residual() <= 1e-12);
        let sbc = FormSpec::new(BcFamily::Sbc);
        assert!(matches!(assemble(&space, &region, &sbc, &rule, Parallelism::Sequential), Err(FormsError::InconsistentMask(_))));
    }

    #[test]
    fn strange_term_requires_flat_domain() {
        use crate::geometry::{OscillatingDomain, PeriodicProfile};
        let spec = FormSpec::new(BcFamily::Strange { k1: 1.0 });
        let space = flat_space(&spec);
        let rule = build_quadrature(&space, 8).unwrap();
        let dom = OscillatingDomain::new(Interval::unit(), 3.0, 0.5, PeriodicProfile::cosine(1.5, 1.0).unwrap()).unwrap();
        let r = assemble(&space, &Region::Oscillating(dom), &spec, &rule, Parallelism::Sequential);
        assert_eq!(r.unwrap_err(), FormsError::StrangeOnOscillating);
        let neg = FormSpec::new(BcFamily::Strange { k1: -1.0 });
        let r = assemble(&space, &Region::Flat(Interval::unit()), &neg, &rule, Parallelism::Sequential);
        assert_eq!(r.unwrap_err(), FormsError::InvalidK1(-1.0));
    }

    #[test]
    fn parallel_and_sequential_assembly_are_bitwise_equal() {
        use crate::geometry::{OscillatingDomain, PeriodicProfile};
        let spec = FormSpec::new(BcFamily::Wbc);
        let space = spec.constrain(SplineSpace1D::uniform(5, 8).unwrap(), SplineSpace1D::uniform(5, 4).unwrap()).unwrap();
        let rule = build_quadrature(&space, 6).unwrap();
        let dom = OscillatingDomain::new(Interval::unit(), 2.0, 0.25, PeriodicProfile::cosine(1.5, 1.0).unwrap()).unwrap();
        let region = Region::Oscillating(dom);
        let a = assemble(&space, &region, &spec, &rule, Parallelism::Parallel).unwrap();
        let b = assemble(&space, &region, &spec, &rule, Parallelism::Sequential).unwrap();
        assert!(a.q == b.q && a.m == b.m);
    }
}
