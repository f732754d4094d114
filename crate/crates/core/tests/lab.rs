use trihlab_core::geometry::{Interval, PeriodicProfile};
use trihlab_core::lab::{
    csv_bytes, emit_results, read_manifest, run_limit_problems, run_sweep, ExperimentConfig, FlatSettings, K1Setting, LabError, VerdictStatus, CSV_HEADER,
};
use trihlab_core::Parallelism;

fn small(alpha: f64, epsilons: &[f64]) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::canonical(alpha);
    cfg.epsilons = epsilons.to_vec();
    cfg.k1 = K1Setting::Value(9139.79);
    cfg.elements_x = 8;
    cfg.elements_y = 8;
    cfg
}

fn flat() -> FlatSettings {
    FlatSettings { width: Interval::unit(), degree: 5, elements_x: 8, elements_y: 8, quad_points: 6 }
}

#[test]
fn reruns_are_byte_identical_in_both_modes() {
    let cfg = small(2.0, &[0.5, 0.25]);
    let a = run_sweep(&cfg, Parallelism::Parallel).unwrap();
    let b = run_sweep(&cfg, Parallelism::Sequential).unwrap();
    assert_eq!(csv_bytes(&a), csv_bytes(&b));
    let dir = tempfile::tempdir().unwrap();
    let (c1, _) = emit_results(&a, &dir.path().join("one.csv")).unwrap();
    let (c2, _) = emit_results(&b, &dir.path().join("nested/two.csv")).unwrap();
    assert_eq!(std::fs::read(c1).unwrap(), std::fs::read(c2).unwrap());
    let rows = String::from_utf8(csv_bytes(&a)).unwrap();
    assert_eq!(rows.lines().count(), 1 + 2 * 3);
}

#[test]
fn empty_sweep_writes_only_the_header() {
    let cfg = small(3.0, &[]);
    let r = run_sweep(&cfg, Parallelism::Sequential).unwrap();
    assert_eq!(String::from_utf8(csv_bytes(&r)).unwrap(), format!("{}\n", CSV_HEADER.join(",")));
    assert_eq!(r.verdict.status, VerdictStatus::Empty);
}

#[test]
fn manifest_round_trips_the_config() {
    let text = r#"
        alpha = 2.5
        epsilon = 0.5
        profile = { offset = 1.5, modes = [[1, 1.0, 0.0], [2, 0.1, -0.2]] }
        W = [0.0, 1.0]
        k1 = 1234.5678901234567
        elements_x = 8
        elements_y = 8
        layer_width = 1.7
        output = "out/strange"
    "#;
    let cfg = ExperimentConfig::from_toml(text).unwrap();
    let r = run_sweep(&cfg, Parallelism::Sequential).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (_, json) = emit_results(&r, &dir.path().join("m.csv")).unwrap();
    let m = read_manifest(&json).unwrap();
    assert_eq!(m.config, cfg);
    assert_eq!(m.code_version, env!("CARGO_PKG_VERSION"));
    assert_eq!(m.k1, 1234.5678901234567);
}

#[test]
fn vanishing_perturbation_reproduces_the_flat_problem() {
    let mut cfg = small(14.0, &[0.25, 0.125]);
    cfg.profile = PeriodicProfile::constant(1.0).unwrap();
    cfg.k1 = K1Setting::Auto;
    cfg.elements_x = 16;
    cfg.elements_y = 16;
    assert!(0.25f64.powf(cfg.alpha) <= 1e-8);
    let r = run_sweep(&cfg, Parallelism::Parallel).unwrap();
    assert!(r.k1.abs() <= 1e-10);
    for p in &r.points {
        for j in 0..cfg.num_eigenvalues {
            let (l, a) = (p.spectrum.eigenvalues[j], r.references.a.eigenvalues[j]);
            assert!((l - a).abs() <= 1e-4 * a, "eps {} j {j}: {l} vs {a}", p.epsilon);
        }
    }
}

#[test]
fn zero_k1_collapses_the_strange_operator() {
    let s = run_limit_problems(&flat(), 0.0, 5, Parallelism::Parallel).unwrap();
    for (x, y) in s.ahat.eigenvalues.iter().zip(&s.a.eigenvalues) {
        assert!((x - y).abs() <= 1e-12 * y);
    }
    assert!(s.ordered(5, 1e-12));
}

#[test]
fn large_k1_approaches_the_strong_conditions_from_below() {
    let s = run_limit_problems(&flat(), 1e6, 5, Parallelism::Parallel).unwrap();
    let (ahat, sbc) = (s.ahat.eigenvalues[0], s.s.eigenvalues[0]);
    assert!(ahat <= sbc && ahat >= 0.99 * sbc, "{ahat} vs {sbc}");
    assert!(s.ordered(5, 1e-12));
    assert!(run_limit_problems(&flat(), -1.0, 1, Parallelism::Sequential).is_err());
}

#[test]
fn exploratory_sweeps_never_fail() {
    let r = run_sweep(&small(1.25, &[0.5]), Parallelism::Sequential).unwrap();
    assert_eq!(r.verdict.status, VerdictStatus::Open);
    assert!(r.verdict.label().starts_with("open"));
}

#[test]
fn bad_inputs_surface_as_errors() {
    assert!(matches!(ExperimentConfig::from_toml("alpha = 2.0\nprofile = { offset = 1.5 }\nbogus = 1"), Err(LabError::Config(_))));
    let r = run_sweep(&small(3.0, &[]), Parallelism::Sequential).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, b"").unwrap();
    match emit_results(&r, &blocker.join("out.csv")) {
        Err(LabError::Io { path, .. }) => assert!(path.starts_with(&blocker)),
        other => panic!("expected an I/O error, got {other:?}"),
    }
}
