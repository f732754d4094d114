use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::analysis::{normal_trace_norms, strange_correlation, TraceReport, TraceRow};
use crate::cell::{solve_cell, BottomMode, CellProblem};
use crate::eig::{self, Spectrum};
use crate::forms::{assemble, BcFamily, DiscreteField, FormSpec};
use crate::geometry::{Interval, OscillatingDomain, Region};
use crate::par::{map_slice, Parallelism};
use crate::spline::{build_quadrature, SplineSpace1D};

use super::config::{BcName, ChartKind, ExperimentConfig, K1Setting, Reference, Regime};
use super::LabError;

/// Extra reference eigenpairs beyond `num_eigenvalues`, so split clusters stay matched.
const REFERENCE_EXTRA: usize = 2;
/// Required ratio between the verdict gap and every other gap at the smallest `ε`.
pub const DISCRIMINATION_FACTOR: f64 = 0.5;

/// Mesh of the flat limit problems on `W × (−1, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlatSettings {
    pub width: Interval,
    pub degree: usize,
    pub elements_x: usize,
    pub elements_y: usize,
    pub quad_points: usize,
}

impl FlatSettings {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self, LabError> {
        Ok(Self { width: cfg.interval()?, degree: cfg.degree, elements_x: cfg.elements_x, elements_y: cfg.elements_y, quad_points: cfg.quad_points })
    }
}

/// Spectra of the four flat limit operators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSpectra {
    pub k1: f64,
    pub a: Spectrum,
    pub ahat: Spectrum,
    pub s: Spectrum,
    pub d: Spectrum,
}

impl LimitSpectra {
    pub fn get(&self, r: Reference) -> &Spectrum {
        match r {
            Reference::A => &self.a,
            Reference::Ahat => &self.ahat,
            Reference::S => &self.s,
            Reference::D => &self.d,
        }
    }

    /// Whether `λ_j(D) ≥ λ_j(S) ≥ λ_j(Â) ≥ λ_j(A)` holds for the first `count` indices,
    /// up to `tol` relative.
    pub fn ordered(&self, count: usize, tol: f64) -> bool {
        (0..count.min(self.a.len())).all(|j| {
            let v = [self.d.eigenvalues[j], self.s.eigenvalues[j], self.ahat.eigenvalues[j], self.a.eigenvalues[j]];
            v.windows(2).all(|w| w[0] >= w[1] * (1.0 - tol))
        })
    }
}

/// Solves one flat problem with the given family on `Γ` (one layer elsewhere).
pub fn solve_flat(settings: &FlatSettings, bc: BcFamily, count: usize, mode: Parallelism) -> Result<Spectrum, LabError> {
    let spec = FormSpec::new(bc);
    let space = spec.constrain(SplineSpace1D::uniform(settings.degree, settings.elements_x)?, SplineSpace1D::uniform(settings.degree, settings.elements_y)?)?;
    let region = Region::Flat(settings.width);
    let rule = build_quadrature(&space, settings.quad_points)?;
    let pencil = assemble(&space, &region, &spec, &rule, mode)?;
    Ok(eig::solve(&pencil, count)?)
}

/// `A_Ω`, `Â_Ω(K1)`, `A_{Ω,S}` and `A_{Ω,D}` on the flat mesh, solved concurrently.
pub fn run_limit_problems(settings: &FlatSettings, k1: f64, count: usize, mode: Parallelism) -> Result<LimitSpectra, LabError> {
    if !(k1.is_finite() && k1 >= 0.0) {
        return Err(LabError::Config(format!("K1 must be finite and nonnegative, got {k1}")));
    }
    let families = [BcFamily::Wbc, BcFamily::Strange { k1 }, BcFamily::Sbc, BcFamily::Dbc];
    // each solve is sequential inside; the four run side by side
    let inner = Parallelism::Sequential;
    let mut out = map_slice(mode, &families, |&bc| solve_flat(settings, bc, count, inner)).into_iter().collect::<Result<Vec<_>, _>>()?;
    let d = out.pop().unwrap();
    let s = out.pop().unwrap();
    let ahat = out.pop().unwrap();
    let a = out.pop().unwrap();
    Ok(LimitSpectra { k1, a, ahat, s, d })
}

/// How `K1` was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum K1Source {
    Given,
    Cell { k1_depth: f64, k1_double_depth: f64, k1_clamped: f64, k1_pairing: f64 },
}

/// Resolves the configured `K1`, solving the cell problem for `"auto"`.
pub fn resolve_k1(cfg: &ExperimentConfig, mode: Parallelism) -> Result<(f64, K1Source), LabError> {
    match cfg.k1 {
        K1Setting::Value(v) => Ok((v, K1Source::Given)),
        K1Setting::Auto => {
            let problem = CellProblem { resolution: cfg.cell, ..CellProblem::new(cfg.profile.clone(), cfg.cell_depth, BottomMode::Free) };
            let sol = solve_cell(&problem, mode)?;
            Ok((
                sol.k1_for_forms(),
                K1Source::Cell { k1_depth: sol.k1_free, k1_double_depth: sol.k1_double_depth, k1_clamped: sol.k1_clamped, k1_pairing: sol.k1_pairing },
            ))
        }
    }
}

/// Solution on `Ω_ε` for one `ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonResult {
    pub epsilon: f64,
    pub elements_x: usize,
    pub elements_t: usize,
    pub dofs: usize,
    pub spectrum: Spectrum,
    /// `|λ̄_c(Ω_ε) − λ̄_c(X)| / λ̄_c(X)` per eigenpair, through its cluster `c`,
    /// for `X` in the order A, Â, S, D.
    pub gaps: Vec<[f64; 4]>,
    pub traces: TraceRow,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictStatus {
    Pass,
    Fail,
    /// Exploratory exponent: data only.
    Open,
    /// No `ε` in the sweep.
    Empty,
}

/// Which limit the first cluster approaches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub expected: Option<Reference>,
    /// Closest reference for `λ₁` at the smallest `ε`.
    pub closest: Option<Reference>,
    /// `λ₁` gaps at the smallest `ε` (A, Â, S, D).
    pub gaps_at_smallest: Option<[f64; 4]>,
    /// Gap to the closest reference is below `DISCRIMINATION_FACTOR` times every other gap.
    pub discriminated: bool,
    /// `λ₁` gaps to the closest reference strictly decrease along the sweep.
    pub monotone: bool,
    pub status: VerdictStatus,
}

impl Verdict {
    pub fn label(&self) -> String {
        match (self.status, self.closest) {
            (VerdictStatus::Open, Some(r)) => format!("open (closest {})", r.label()),
            (VerdictStatus::Open, None) | (VerdictStatus::Empty, _) => "open".into(),
            (_, Some(r)) => r.label().into(),
            (_, None) => "none".into(),
        }
    }

    /// Judges the sweep from the `λ₁` gaps, one row per `ε` in sweep order.
    pub fn judge(regime: Regime, first_gaps: &[[f64; 4]]) -> Verdict {
        let expected = regime.expected();
        let Some(last) = first_gaps.last().copied() else {
            let status = if expected.is_none() { VerdictStatus::Open } else { VerdictStatus::Empty };
            return Verdict { expected, closest: None, gaps_at_smallest: None, discriminated: false, monotone: false, status };
        };
        let best = (0..4).min_by(|&a, &b| last[a].total_cmp(&last[b])).unwrap();
        let closest = Reference::ALL[best];
        let discriminated = (0..4).filter(|&i| i != best).all(|i| last[best] < DISCRIMINATION_FACTOR * last[i]);
        let monotone = first_gaps.windows(2).all(|w| w[1][best] < w[0][best]);
        let status = match expected {
            None => VerdictStatus::Open,
            Some(e) if e == closest && discriminated && monotone => VerdictStatus::Pass,
            Some(_) => VerdictStatus::Fail,
        };
        Verdict { expected, closest: Some(closest), gaps_at_smallest: Some(last), discriminated, monotone, status }
    }
}

/// Wall-clock seconds per stage.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub cell: f64,
    pub limit: f64,
    pub epsilons: Vec<f64>,
    pub total: f64,
}

/// Everything a sweep produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: ExperimentConfig,
    pub regime: Regime,
    pub k1: f64,
    pub k1_source: K1Source,
    pub references: LimitSpectra,
    pub points: Vec<EpsilonResult>,
    pub verdict: Verdict,
    pub traces: TraceReport,
    pub reference_ordering: bool,
    /// Eigensolver warnings, prefixed with the problem they came from.
    pub warnings: Vec<String>,
    pub timings: Timings,
}

/// Solves the `Ω_ε` problem with the configured family on `Γ_ε`.
pub fn solve_epsilon(cfg: &ExperimentConfig, epsilon: f64, references: &LimitSpectra, mode: Parallelism) -> Result<EpsilonResult, LabError> {
    let start = Instant::now();
    let bc = match cfg.bc {
        BcName::Strange => return Err(LabError::Config("the strange family is a limit operator; use wbc, sbc or dbc on the oscillating domain".into())),
        other => other.family(0.0),
    };
    let width = cfg.interval()?;
    let (nx, breaks) = (cfg.elements_x_for(epsilon), cfg.t_breaks_for(epsilon));
    let spec = FormSpec::new(bc);
    let space = spec.constrain(SplineSpace1D::uniform(cfg.degree, nx)?, SplineSpace1D::with_breaks(cfg.degree, &breaks)?)?;
    let layer = 1.0 - breaks[breaks.len() - 1 - cfg.layer_elements];
    let mut domain = OscillatingDomain::new(width, cfg.alpha, epsilon, cfg.profile.clone())?;
    if cfg.chart == ChartKind::Layered {
        domain = domain.with_chart_layer(layer)?;
    }
    let region = Region::Oscillating(domain);
    let rule = build_quadrature(&space, cfg.quad_points)?;
    let pencil = assemble(&space, &region, &spec, &rule, mode)?;
    let spectrum = eig::solve(&pencil, cfg.num_eigenvalues)?;

    let means = spectrum.cluster_means();
    let gaps = spectrum
        .clusters
        .iter()
        .map(|&c| {
            let mut g = [f64::NAN; 4];
            for (slot, r) in g.iter_mut().zip(Reference::ALL) {
                if let Some(&x) = references.get(r).cluster_means().get(c) {
                    *slot = (means[c] - x).abs() / x;
                }
            }
            g
        })
        .collect();

    let field = DiscreteField::from_free(&space, &region, &spectrum.eigenvectors[0]);
    let correlation = if cfg.regime() == Regime::Strange { Some(strange_correlation(&field, epsilon, width, &cfg.profile)?) } else { None };
    let traces = TraceRow { epsilon, norms: normal_trace_norms(&field, width), correlation };
    Ok(EpsilonResult { epsilon, elements_x: nx, elements_t: breaks.len() - 1, dofs: pencil.dim(), spectrum, gaps, traces, seconds: start.elapsed().as_secs_f64() })
}

/// Runs the full sweep: `K1`, the four limit spectra, every `ε`, gaps and verdict.
pub fn run_sweep(cfg: &ExperimentConfig, mode: Parallelism) -> Result<SweepResult, LabError> {
    cfg.validate()?;
    let start = Instant::now();
    let regime = cfg.regime();
    let (k1, k1_source) = resolve_k1(cfg, mode)?;
    let cell_time = start.elapsed().as_secs_f64();

    let flat = FlatSettings::from_config(cfg)?;
    let count = cfg.num_eigenvalues + REFERENCE_EXTRA;
    let t = Instant::now();
    let references = run_limit_problems(&flat, k1, count, mode)?;
    let limit_time = t.elapsed().as_secs_f64();

    let points = map_slice(mode, &cfg.epsilons, |&e| solve_epsilon(cfg, e, &references, Parallelism::Sequential)).into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut warnings = Vec::new();
    for r in Reference::ALL {
        warnings.extend(references.get(r).warnings.iter().map(|w| format!("limit {}: {w}", r.label())));
    }
    for p in &points {
        warnings.extend(p.spectrum.warnings.iter().map(|w| format!("epsilon {}: {w}", p.epsilon)));
    }
    let first_gaps: Vec<[f64; 4]> = points.iter().map(|p| p.gaps[0]).collect();
    let verdict = Verdict::judge(regime, &first_gaps);
    let traces = TraceReport::from_rows(cfg.alpha, points.iter().map(|p| p.traces.clone()).collect());
    let timings = Timings { cell: cell_time, limit: limit_time, epsilons: points.iter().map(|p| p.seconds).collect(), total: start.elapsed().as_secs_f64() };
    Ok(SweepResult {
        config: cfg.clone(),
        regime,
        k1,
        k1_source,
        reference_ordering: references.ordered(count, 1e-12),
        references,
        points,
        verdict,
        traces,
        warnings,
        timings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_requires_discrimination_and_monotonicity() {
        let rows = [[0.3, 0.5, 0.6, 0.9], [0.1, 0.4, 0.5, 0.9]];
        let v = Verdict::judge(Regime::Stability, &rows);
        assert_eq!(v.status, VerdictStatus::Pass);
        assert_eq!(v.label(), "A");
        let v = Verdict::judge(Regime::Mild, &rows);
        assert_eq!(v.status, VerdictStatus::Fail);
        let close = [[0.3, 0.5, 0.6, 0.9], [0.1, 0.15, 0.5, 0.9]];
        assert!(!Verdict::judge(Regime::Stability, &close).discriminated);
        let growing = [[0.05, 0.5, 0.6, 0.9], [0.1, 0.4, 0.5, 0.9]];
        assert!(!Verdict::judge(Regime::Stability, &growing).monotone);
        assert_eq!(Verdict::judge(Regime::Exploratory, &rows).status, VerdictStatus::Open);
        assert_eq!(Verdict::judge(Regime::Strong, &[]).status, VerdictStatus::Empty);
    }
}
