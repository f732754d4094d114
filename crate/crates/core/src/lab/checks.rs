//! Self-contained numerical checks behind the CLI's `*-check` and `oracle1d` commands.

use serde::{Deserialize, Serialize};

use crate::analysis::{
    average_error_sequence, check_derivative_scaling, check_exact_integration, polynomial_defect, projector_coefficients, strip_corpus, unfold, verify_green,
    GreenDomain, UnfoldGrid, UnfoldKind, UnfoldedField,
};
use crate::cell::{solve_cell, BottomMode, CellProblem, CellResolution};
use crate::eig::{self, oracle_eigen_1d, OracleBc};
use crate::fields::{Factor1D, SmoothField};
use crate::forms::assemble_1d;
use crate::geometry::{Interval, PeriodicProfile};
use crate::par::Parallelism;
use crate::spline::{QuadratureRule1D, SplineSpace1D};

use super::sweep::{run_limit_problems, FlatSettings, LimitSpectra};
use super::LabError;

pub const GREEN_STRIP_TOL: f64 = 1e-8;
pub const GREEN_BOX_TOL: f64 = 1e-12;
pub const ORACLE_TOL: f64 = 1e-6;
pub const UNFOLD_TOL: f64 = 1e-10;
pub const DEFECT_TOL: f64 = 1e-12;
pub const AVERAGE_RATIO: (f64, f64) = (3.5, 4.5);
pub const DEPTH_TOL: f64 = 0.01;

/// Outcome of one check with human-readable detail lines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub lines: Vec<String>,
}

impl CheckReport {
    fn new(name: &str) -> Self {
        Self { name: name.into(), passed: true, lines: Vec::new() }
    }

    fn record(&mut self, ok: bool, line: String) {
        self.passed &= ok;
        self.lines.push(format!("{} {line}", if ok { "ok  " } else { "FAIL" }));
    }
}

/// The strip corpus at `GREEN_STRIP_TOL` and degree-≤2 polynomials on a box,
/// where every boundary term must vanish to `GREEN_BOX_TOL`.
pub fn green_check() -> Result<CheckReport, LabError> {
    let mut r = CheckReport::new("green");
    for pair in strip_corpus() {
        let c = verify_green(&pair.f, &pair.phi, GreenDomain::Strip { depth: pair.depth })?;
        r.record(c.residual <= GREEN_STRIP_TOL, format!("strip {:32} lhs {:+.6e} residual {:.2e}", pair.name, c.lhs, c.residual));
    }
    let quadratics = [
        SmoothField::polynomial(&[(0, 0, 1.0), (1, 0, 2.0), (0, 1, -1.0), (2, 0, 0.5), (1, 1, 3.0), (0, 2, -2.0)]),
        SmoothField::polynomial(&[(0, 2, 1.0), (1, 0, -0.25)]),
    ];
    let phi = SmoothField::term(1.0, Factor1D::trig(2.0, 1.0, 0.3), Factor1D::poly(&[1.0, 0.5, 0.0, 1.0]));
    for (i, f) in quadratics.iter().enumerate() {
        let c = verify_green(f, &phi, GreenDomain::Box { x: [0.0, 1.0], z: [-1.0, 0.0] })?;
        let worst = c.max_term().max(c.lhs.abs());
        r.record(worst <= GREEN_BOX_TOL, format!("box quadratic {i}: largest term {worst:.2e}"));
    }
    Ok(r)
}

fn unfold_corpus() -> Vec<(&'static str, SmoothField)> {
    vec![
        ("cubic", SmoothField::polynomial(&[(0, 0, 1.0), (1, 0, -0.5), (2, 1, 2.0), (0, 3, 1.0), (3, 0, 0.25)])),
        ("trig-poly", SmoothField::term(1.0, Factor1D::trig(3.0, 1.0, 0.5).times_poly(&[1.0, 2.0, 0.0, 1.0]), Factor1D::poly(&[0.5, 1.0, 0.0, 0.0, 2.0, 1.0]))),
        ("fast-mode", SmoothField::term(1.0, Factor1D::trig(40.0, 0.0, 1.0), Factor1D::trig(2.0, 1.0, 0.0))),
    ]
}

fn max_abs(u: &UnfoldedField) -> f64 {
    u.samples.iter().chain(&u.trace).flat_map(|s| s.iter()).fold(0.0, |m, v| m.max(v.abs()))
}

/// Exact-integration identities of the unfolding and the projector properties.
pub fn unfold_check() -> Result<CheckReport, LabError> {
    let mut r = CheckReport::new("unfold");
    let width = Interval::unit();
    let grid = UnfoldGrid::default();
    let profile = PeriodicProfile::cosine(1.5, 1.0)?;
    for (name, f) in unfold_corpus() {
        for eps in [0.25, 0.125, 0.0625] {
            let a = check_exact_integration(&f, eps, -1.0, width, UnfoldKind::Anisotropic, grid)?;
            r.record(a.residual <= UNFOLD_TOL, format!("{name:10} eps {eps:<7} anisotropic residual {:.2e}", a.residual));
            let s = check_exact_integration(&f, eps, -1.0, width, UnfoldKind::AlphaScaled { alpha: 2.5, profile: profile.clone() }, grid)?;
            r.record(s.residual <= UNFOLD_TOL, format!("{name:10} eps {eps:<7} alpha-scaled residual {:.2e}", s.residual));
            let d = check_derivative_scaling(&f, eps, -0.5, width, grid)?;
            r.record(d.residual <= UNFOLD_TOL, format!("{name:10} eps {eps:<7} derivative scaling residual {:.2e}", d.residual));
        }
    }
    let quadratic = SmoothField::polynomial(&[(0, 0, 0.3), (1, 0, -1.0), (0, 1, 2.0), (2, 0, 1.5), (1, 1, -0.7), (0, 2, 0.4)]);
    let u = unfold(&quadratic, 0.125, width, UnfoldKind::Anisotropic, grid)?;
    let k = max_abs(&polynomial_defect(&u)?);
    r.record(k <= DEFECT_TOL, format!("defect of a quadratic {k:.2e}"));
    let (_, f) = &unfold_corpus()[1];
    let d = polynomial_defect(&unfold(f, 0.125, width, UnfoldKind::Anisotropic, grid)?)?;
    let dd = polynomial_defect(&d)?;
    let diff = d.samples.iter().chain(&d.trace).zip(dd.samples.iter().chain(&dd.trace)).flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs())).fold(0.0, f64::max);
    r.record(diff <= DEFECT_TOL, format!("defect idempotence {diff:.2e}"));
    let avg = (0..d.cells.len()).flat_map(|c| projector_coefficients(&d, c)).fold(0.0, |m: f64, v| m.max(v.abs()));
    r.record(avg <= DEFECT_TOL, format!("trace averages of the defect {avg:.2e}"));
    Ok(r)
}

/// `‖v̄_ε − v‖` for `v = sin(2πx̄)` over `ε ∈ {1/4, 1/8, 1/16}`; ratios must lie in `AVERAGE_RATIO`.
pub fn average_check() -> Result<CheckReport, LabError> {
    let mut r = CheckReport::new("average");
    let v = SmoothField::term(1.0, Factor1D::trig(2.0 * std::f64::consts::PI, 0.0, 1.0), Factor1D::poly(&[1.0]));
    let errs = average_error_sequence(&v, &[0.25, 0.125, 0.0625], [[0.0, 1.0], [-1.0, 0.0]])?;
    for e in &errs {
        r.lines.push(format!("     eps {:<7} error {:.6e}", e.epsilon, e.error));
    }
    for w in errs.windows(2) {
        let ratio = w[0].error / w[1].error;
        r.record((AVERAGE_RATIO.0..=AVERAGE_RATIO.1).contains(&ratio), format!("ratio eps {} -> {}: {ratio:.4}", w[0].epsilon, w[1].epsilon));
    }
    Ok(r)
}

/// Spline Galerkin eigenvalues on `(−1, 0)` against the determinant oracle.
pub fn oracle1d_check(bc: OracleBc, degree: usize, elements: usize, count: usize) -> Result<CheckReport, LabError> {
    let mut r = CheckReport::new("oracle1d");
    let space = SplineSpace1D::uniform_on(degree, elements, -1.0, 0.0)?;
    let rule = QuadratureRule1D::new(&space, degree + 2)?;
    let pencil = assemble_1d(&space, bc.layers(), bc.layers(), &rule)?;
    let galerkin = eig::solve(&pencil, count)?;
    let oracle = oracle_eigen_1d(bc, count)?;
    for (j, (g, o)) in galerkin.eigenvalues.iter().zip(&oracle).enumerate() {
        let rel = (g - o).abs() / o;
        r.record(rel <= ORACLE_TOL, format!("{bc:?} j={} galerkin {g:.10} oracle {o:.10} rel {rel:.2e}", j + 1));
    }
    Ok(r)
}

/// Cell solve with the depth-doubling and free/clamped bracket checks.
pub fn cell_check(profile: &PeriodicProfile, depth: f64, resolution: CellResolution, mode: Parallelism) -> Result<(f64, CheckReport), LabError> {
    let mut r = CheckReport::new("cell");
    let problem = CellProblem { resolution, ..CellProblem::new(profile.clone(), depth, BottomMode::Free) };
    let sol = solve_cell(&problem, mode)?;
    let k1 = sol.k1_for_forms();
    r.lines.push(format!("     K1 (free, L={depth}) {:.10}", sol.k1_free));
    r.lines.push(format!("     K1 (free, L={}) {:.10}", 2.0 * depth, sol.k1_double_depth));
    r.lines.push(format!("     K1 (clamped, L={depth}) {:.10}", sol.k1_clamped));
    let rel = |a: f64, b: f64| if b.abs() > 0.0 { (a - b).abs() / b.abs() } else { (a - b).abs() };
    let pairing = rel(sol.k1_pairing, sol.k1_energy);
    r.record(pairing <= ORACLE_TOL, format!("energy vs pairing rel {pairing:.2e}"));
    let sens = rel(sol.k1_energy, sol.k1_double_depth);
    r.record(sens <= DEPTH_TOL || sol.depth_sensitivity <= 1e-10, format!("depth doubling rel change {sens:.2e}"));
    r.record(sol.k1_free <= sol.k1_clamped * (1.0 + 1e-12) + 1e-12, "free <= clamped bracket".into());
    Ok((k1, r))
}

/// The four limit spectra and the ordering `D ≥ S ≥ Â ≥ A`.
pub fn limit_check(settings: &FlatSettings, k1: f64, count: usize, mode: Parallelism) -> Result<(LimitSpectra, CheckReport), LabError> {
    let mut r = CheckReport::new("limit");
    let spectra = run_limit_problems(settings, k1, count, mode)?;
    for j in 0..count {
        r.lines.push(format!(
            "     j={} A {:.6} Ahat {:.6} S {:.6} D {:.6}",
            j + 1,
            spectra.a.eigenvalues[j],
            spectra.ahat.eigenvalues[j],
            spectra.s.eigenvalues[j],
            spectra.d.eigenvalues[j]
        ));
    }
    r.record(spectra.ordered(count, 1e-12), format!("ordering D >= S >= Ahat >= A for j <= {count}"));
    let min = [&spectra.a, &spectra.ahat, &spectra.s, &spectra.d].iter().map(|s| s.eigenvalues[0]).fold(f64::INFINITY, f64::min);
    r.record(min >= 1.0 - 1e-10, format!("smallest eigenvalue {min:.6} >= 1"));
    Ok((spectra, r))
}
