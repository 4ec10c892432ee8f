use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use umd_core::divergence::max_divergence;
use umd_core::geometry::project_simplex;
use umd_core::online::compute_regret;
use umd_core::problems::{check_gradient, make_least_squares, make_logistic, synthetic_least_squares};
use umd_core::solvers::{certify_umd_step, umd_step, CERT_TOL};
use umd_core::{
    conjugate_bregman, fenchel_residual, generalized_bregman, ConstraintSet, Dataset, DualChoice, Matrix, Problem,
    Regularizer, UmdState, Vector,
};

fn vec_in(n: usize, scale: f64) -> impl Strategy<Value = Vector> {
    prop::collection::vec(-scale..scale, n).prop_map(Vector::from_vec)
}

fn regularizer() -> impl Strategy<Value = Regularizer> {
    prop_oneof![
        (vec_in(3, 2.0), 0.1f64..3.0).prop_map(|(c, r)| Regularizer::euclidean_ball(c, r).unwrap()),
        (vec_in(3, 1.0), 0.1f64..2.0).prop_map(|(lo, w)| {
            let hi = lo.map(|v| v + w);
            Regularizer::euclidean(ConstraintSet::boxed(lo, hi).unwrap())
        }),
        Just(Regularizer::euclidean(ConstraintSet::simplex(3).unwrap())),
        Just(Regularizer::euclidean_free(3)),
        Just(Regularizer::entropy_simplex(3).unwrap()),
        Just(Regularizer::elastic_net(3)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn grad_conjugate_is_feasible_and_fenchel_tight(h in regularizer(), zeta in vec_in(3, 50.0)) {
        let x = h.grad_conjugate(&zeta);
        prop_assert!(h.domain().contains(&x, 1e-9));
        prop_assert!(fenchel_residual(&h, &x, &zeta).unwrap().abs() <= 1e-9 * (1.0 + zeta.norm_inf()));
    }

    #[test]
    fn divergences_are_nonnegative(h in regularizer(), a in vec_in(3, 5.0), b in vec_in(3, 5.0)) {
        prop_assert!(conjugate_bregman(&h, &a, &b).unwrap() >= -1e-9);
        let x = h.grad_conjugate(&b);
        let xp = h.grad_conjugate(&a);
        prop_assert!(generalized_bregman(&h, &xp, &x, &b).unwrap() >= -1e-9);
    }

    #[test]
    fn steps_certify_and_corrupted_duals_do_not(
        h in regularizer(),
        theta in vec_in(3, 3.0),
        xi in vec_in(3, 3.0),
        seed in any::<u64>(),
    ) {
        let set = h.domain();
        let s = UmdState { t: 1, x: h.grad_conjugate(&theta), theta };
        let choices: &[DualChoice] = if h.has_mirror_map() {
            &[DualChoice::DualAveraging, DualChoice::MirrorDescent]
        } else {
            &[DualChoice::DualAveraging]
        };
        for &c in choices {
            let next = umd_step(&h, &s, &xi, c).unwrap();
            let cert = certify_umd_step(&h, &set, &s, &xi, &next, CERT_TOL).unwrap();
            prop_assert!(cert.ok, "{c:?}: {cert:?}");
        }
        // Breaking condition (I) is always caught.
        let mut bad = umd_step(&h, &s, &xi, DualChoice::DualAveraging).unwrap();
        let far = set.sample(&mut ChaCha8Rng::seed_from_u64(seed));
        if far.distance(&bad.x) > 1e-3 {
            bad.x = far;
            prop_assert!(!certify_umd_step(&h, &set, &s, &xi, &bad, CERT_TOL).unwrap().ok);
        }
    }

    #[test]
    fn simplex_projection_is_a_projection(y in vec_in(5, 10.0), z in prop::collection::vec(0.0f64..1.0, 5)) {
        let p = project_simplex(&y);
        prop_assert!((p.sum() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|v| *v >= 0.0));
        prop_assert!(project_simplex(&p).distance(&p) < 1e-12);
        // Variational characterization against any simplex point q.
        let s: f64 = z.iter().sum::<f64>().max(1e-12);
        let q = Vector::from_vec(z.iter().map(|v| v / s).collect());
        prop_assert!((&y - &p).dot(&(&q - &p)) <= 1e-9);
    }

    #[test]
    fn max_divergence_dominates_samples(h in regularizer(), theta in vec_in(3, 2.0), seed in any::<u64>()) {
        let set = h.domain();
        prop_assume!(set.is_compact());
        let x1 = h.grad_conjugate(&theta);
        let top = max_divergence(&h, &x1, &theta).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..50 {
            let x = set.sample(&mut rng);
            prop_assert!(generalized_bregman(&h, &x, &x1, &theta).unwrap() <= top + 1e-9);
        }
    }

    #[test]
    fn regret_is_invariant_to_constant_payoff_shifts_on_the_simplex(
        plays in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 3), 1..6),
        pays in prop::collection::vec(vec_in(3, 1.0), 6),
        shift in -3.0f64..3.0,
    ) {
        let set = ConstraintSet::simplex(3).unwrap();
        let plays: Vec<Vector> = plays
            .iter()
            .map(|p| {
                let s: f64 = p.iter().sum::<f64>().max(1e-12);
                Vector::from_vec(p.iter().map(|v| v / s).collect())
            })
            .collect();
        let pays = &pays[..plays.len()];
        let r = compute_regret(&plays, pays, &set).unwrap();
        let shifted: Vec<Vector> = pays.iter().map(|z| z.map(|v| v + shift)).collect();
        let r2 = compute_regret(&plays, &shifted, &set).unwrap();
        prop_assert!((r - r2).abs() < 1e-9);
    }

    #[test]
    fn least_squares_gradient_and_smoothness(seed in 0u64..1000, x in vec_in(4, 2.0), y in vec_in(4, 2.0)) {
        let (data, _) = synthetic_least_squares(seed, 12, 4, 10.0);
        let f = make_least_squares(data);
        prop_assert!(check_gradient(&f, &x, 1e-5) <= 1e-5);
        let l = f.smoothness().unwrap().value;
        let lhs = (&f.gradient(&x) - &f.gradient(&y)).norm2();
        prop_assert!(lhs <= l * x.distance(&y) + 1e-7);
    }

    #[test]
    fn logistic_gradient_matches_finite_differences(
        rows in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 3), 2..8),
        signs in prop::collection::vec(any::<bool>(), 8),
        x in vec_in(3, 3.0),
    ) {
        let a = Matrix::from_rows(&rows).unwrap();
        let y = Vector::from_vec(signs[..rows.len()].iter().map(|s| if *s { 1.0 } else { -1.0 }).collect());
        let f = make_logistic(Dataset::new(a, y).unwrap()).unwrap();
        prop_assert!(check_gradient(&f, &x, 1e-5) <= 1e-5);
    }
}
