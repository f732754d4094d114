use proptest::prelude::*;
use trihlab_core::analysis::{
    average_error, check_exact_integration, local_average, polynomial_defect, unfold, verify_green, GreenDomain, UnfoldGrid, UnfoldKind,
};
use trihlab_core::fields::{Factor1D, SmoothField};
use trihlab_core::geometry::{Interval, PeriodicProfile};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

fn trig_poly(m: u32, c: f64, s: f64, poly: &[f64]) -> SmoothField {
    SmoothField::term(1.0, Factor1D::trig(TWO_PI * m as f64, c, s), Factor1D::poly(poly))
}

fn max_abs(rows: &[[f64; 6]]) -> f64 {
    rows.iter().flat_map(|r| r.iter()).fold(0.0, |m, v| m.max(v.abs()))
}

#[test]
fn unit_field_integrates_to_the_measure_for_both_kinds() {
    let one = SmoothField::polynomial(&[(0, 0, 1.0)]);
    let profile = PeriodicProfile::cosine(1.5, 1.0).unwrap();
    for eps in [0.25, 0.1] {
        for kind in [UnfoldKind::Anisotropic, UnfoldKind::AlphaScaled { alpha: 2.5, profile: profile.clone() }] {
            let c = check_exact_integration(&one, eps, -0.7, Interval::unit(), kind, UnfoldGrid::default()).unwrap();
            assert!(c.residual <= 1e-14, "{c:?}");
        }
    }
}

#[test]
fn averages_fix_constants_and_affine_fields() {
    let f = SmoothField::polynomial(&[(0, 0, 2.0), (1, 0, -1.5), (0, 1, 0.25)]);
    let avg = local_average(&f, 0.1);
    for x in [[0.3, -0.4], [0.5, -0.5], [0.71, -0.2]] {
        let want = 2.0 - 1.5 * x[0] + 0.25 * x[1];
        assert!((avg(x) - want).abs() <= 1e-14);
    }
    assert!(average_error(&f, 0.1, [[0.0, 1.0], [-1.0, 0.0]]).unwrap().error <= 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn green_identity_on_random_strip_pairs(
        m in 1u32..4, n in 1u32..4,
        a in prop::array::uniform4(-1.0..1.0f64),
        b in prop::array::uniform4(-1.0..1.0f64),
    ) {
        let f = trig_poly(m, a[0], a[1], &[a[2], 0.0, a[3], 1.0, 0.0, 0.5, 0.2]);
        let phi = trig_poly(n, b[0], b[1], &[b[2], b[3], 1.0, 0.3]);
        let c = verify_green(&f, &phi, GreenDomain::Strip { depth: -1.0 }).unwrap();
        prop_assert!(c.residual <= 1e-8, "{:?}", c);
    }

    #[test]
    fn exact_integration_on_random_fields(
        m in 0u32..5, c in -1.0..1.0f64, s in -1.0..1.0f64,
        p in prop::array::uniform4(-1.0..1.0f64),
        eps in prop::sample::select(vec![0.25, 0.125, 0.0625]),
    ) {
        let f = trig_poly(m, c, s, &p);
        let r = check_exact_integration(&f, eps, -1.0, Interval::unit(), UnfoldKind::Anisotropic, UnfoldGrid::default()).unwrap();
        prop_assert!(r.residual <= 1e-10, "{:?}", r);
    }

    #[test]
    fn quadratics_lie_in_the_defect_kernel(q in prop::array::uniform6(-2.0..2.0f64)) {
        let f = SmoothField::polynomial(&[(0, 0, q[0]), (1, 0, q[1]), (0, 1, q[2]), (2, 0, q[3]), (1, 1, q[4]), (0, 2, q[5])]);
        let u = unfold(&f, 0.125, Interval::unit(), UnfoldKind::Anisotropic, UnfoldGrid::default()).unwrap();
        let d = polynomial_defect(&u).unwrap();
        prop_assert!(max_abs(&d.samples) <= 1e-12 && max_abs(&d.trace) <= 1e-12);
    }

    #[test]
    fn defect_is_idempotent(m in 1u32..6, c in -1.0..1.0f64, p in prop::array::uniform4(-1.0..1.0f64)) {
        let f = trig_poly(m, c, 1.0, &[p[0], p[1], p[2], p[3], 1.0]);
        let u = unfold(&f, 0.125, Interval::unit(), UnfoldKind::Anisotropic, UnfoldGrid::default()).unwrap();
        let d = polynomial_defect(&u).unwrap();
        let dd = polynomial_defect(&d).unwrap();
        let diff = d.samples.iter().zip(&dd.samples).flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs())).fold(0.0, f64::max);
        prop_assert!(diff <= 1e-12 * (1.0 + max_abs(&d.samples)), "{:e}", diff);
    }
}
