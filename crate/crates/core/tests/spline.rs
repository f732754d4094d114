use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trihlab_core::spline::{build_quadrature, gauss_legendre, jet_index, QuadratureRule1D, Side, SplineSpace1D, TensorSplineSpace};

fn square(p: usize, n: usize) -> TensorSplineSpace {
    TensorSplineSpace::new(SplineSpace1D::uniform(p, n).unwrap(), SplineSpace1D::uniform(p, n).unwrap())
}

#[test]
fn projection_reproduces_s3_t2() {
    let space = square(5, 4);
    let rule = build_quadrature(&space, 8).unwrap();
    let f = |x: [f64; 2]| x[0].powi(3) * x[1].powi(2);
    let c = space.project(&rule, f).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let st = [rng.random::<f64>(), rng.random::<f64>()];
        let v = space.eval_function(&c, st, 0)[0];
        assert!((v - f(st)).abs() <= 1e-10, "{st:?}: {v} vs {}", f(st));
    }
}

#[test]
fn all_monomials_up_to_degree_five_are_reproduced() {
    let space = square(5, 3);
    let rule = build_quadrature(&space, 8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pts: Vec<[f64; 2]> = (0..40).map(|_| [rng.random(), rng.random()]).collect();
    for a in 0..=5 {
        for b in 0..=5 - a {
            let f = |x: [f64; 2]| x[0].powi(a) * x[1].powi(b);
            let c = space.project(&rule, f).unwrap();
            let err = pts.iter().map(|&st| (space.eval_function(&c, st, 0)[0] - f(st)).abs()).fold(0.0, f64::max);
            assert!(err <= 1e-9, "s^{a} t^{b}: {err:e}");
        }
    }
}

fn random_member(space: &TensorSplineSpace, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let free: Vec<f64> = (0..space.free_count()).map(|_| rng.random_range(-1.0..1.0)).collect();
    space.expand(&free)
}

#[test]
fn one_layer_everywhere_vanishes_on_the_boundary() {
    let mut space = square(5, 5);
    for side in Side::ALL {
        space.constrain(side, 1).unwrap();
    }
    let c = random_member(&space, 3);
    for k in 0..=50 {
        let s = k as f64 / 50.0;
        for st in [[s, 0.0], [s, 1.0], [0.0, s], [1.0, s]] {
            let v = space.eval_function(&c, st, 0)[0];
            assert!(v.abs() <= 1e-14, "{st:?}: {v:e}");
        }
    }
}

#[test]
fn bottom_layers_kill_normal_derivatives() {
    for (layers, tol) in [(2, 1e-12), (3, 1e-10)] {
        let space = square(5, 6).constrained(Side::Bottom, layers).unwrap();
        let c = random_member(&space, layers as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..50 {
            let st = [rng.random::<f64>(), 0.0];
            let jet = space.eval_function(&c, st, 2);
            for b in 0..layers {
                let d = jet[jet_index(0, b)];
                assert!(d.abs() <= tol, "layers {layers}, order {b}: {d:e}");
            }
        }
    }
}

#[test]
fn constrain_is_idempotent() {
    let once = square(5, 4).constrained(Side::Top, 2).unwrap();
    let twice = once.clone().constrained(Side::Top, 2).unwrap();
    assert_eq!(once.constraint_mask(), twice.constraint_mask());
    assert!(square(5, 4).constrained(Side::Top, 4).is_err());
    assert!(square(5, 4).constrained(Side::Top, 0).is_err());
}

#[test]
fn gauss_three_points_integrates_s4() {
    let (x, w) = gauss_legendre(3);
    let v: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
    assert!((v - 0.2).abs() <= 1e-15);
}

#[test]
fn basis_products_match_an_oversampled_rule() {
    let s = SplineSpace1D::uniform(5, 4).unwrap();
    let integrate = |pts: usize| {
        let rule = QuadratureRule1D::new(&s, pts).unwrap();
        let n = s.basis_count();
        let mut m = vec![0.0; n * n];
        for (xs, ws) in rule.points.iter().zip(&rule.weights) {
            for (x, w) in xs.iter().zip(ws) {
                let b = s.eval(*x, 0);
                for i in 0..=5 {
                    for j in 0..=5 {
                        m[(b.first + i) * n + b.first + j] += w * b.ders[0][i] * b.ders[0][j];
                    }
                }
            }
        }
        m
    };
    // p + 3 points per span against 10x oversampling
    let (a, b) = (integrate(8), integrate(80));
    let err = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(err <= 1e-12, "{err:e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partition_of_unity_and_derivative_sums(s in 0.0..=1.0f64, t in 0.0..=1.0f64, p in 3usize..=6, n in 1usize..=7) {
        let space = square(p, n);
        let mut sums = [0.0; 10];
        for (_, jet) in space.eval_basis([s, t], 3) {
            for (acc, v) in sums.iter_mut().zip(jet) {
                *acc += v;
            }
        }
        prop_assert!((sums[0] - 1.0).abs() <= 1e-13);
        for (k, v) in sums.iter().enumerate().skip(1) {
            prop_assert!(v.abs() <= 1e-8 * (n as f64).powi(3), "jet entry {} sums to {:e}", k, v);
        }
    }

    #[test]
    fn masks_are_nested(side in prop::sample::select(Side::ALL.to_vec()), n in 6usize..=9) {
        let masks: Vec<Vec<bool>> = (1..=3).map(|l| square(5, n).constrained(side, l).unwrap().constraint_mask().to_vec()).collect();
        for w in masks.windows(2) {
            prop_assert!(w[0].iter().zip(&w[1]).all(|(small, big)| !small || *big));
        }
    }

    #[test]
    fn element_weights_sum_to_areas(n in 1usize..=6, pts in 1usize..=8) {
        let space = square(4, n);
        let rule = build_quadrature(&space, pts).unwrap();
        let area = 1.0 / (n * n) as f64;
        for ex in 0..n {
            for ey in 0..n {
                prop_assert!((rule.element_weight(ex, ey) - area).abs() <= 1e-15);
            }
        }
    }
}
