use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use torusflow_core::diagnostics::{
    check_inequality, f1, fit_decay, random_pair, weighted_norm_accumulator, InequalityId,
    Reduction, TimeSeries,
};
use torusflow_core::linear::acoustic_eigenvalues;
use torusflow_core::spectral::{
    div, grad, grad_norm, leray_project, make_grid, poincare_constant, strip_nyquist, ScalarField,
    TorusGrid, VectorField,
};

fn grid_strategy() -> impl Strategy<Value = Arc<TorusGrid>> {
    (
        prop::sample::select(vec![8usize, 12, 16, 32]),
        prop::sample::select(vec![8usize, 16, 24]),
        0.5f64..3.0,
        0.5f64..3.0,
    )
        .prop_map(|(n0, n1, a, b)| make_grid([2.0 * PI * a, 2.0 * PI * b], [n0, n1]).unwrap())
}

fn noise(grid: &Arc<TorusGrid>, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    ScalarField::from_values(grid, v).unwrap()
}

fn max_diff(a: &ScalarField, b: &ScalarField) -> f64 {
    (a - b).lp_norm(f64::INFINITY)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fft_round_trip(g in grid_strategy(), seed in any::<u64>()) {
        let f = noise(&g, seed);
        let back = f.to_spectral().to_physical();
        prop_assert!(max_diff(&f, &back) <= 1e-12);
        prop_assert!((f.to_spectral().mean() - f.mean()).abs() <= 1e-14);
    }

    #[test]
    fn leray_split_is_orthogonal(g in grid_strategy(), seed in any::<u64>()) {
        let v = VectorField::new(noise(&g, seed), noise(&g, seed ^ 0x5a5a)).unwrap();
        let (p, q) = leray_project(&v);
        let total = v.dot(&v);
        prop_assert!((p.dot(&p) + q.dot(&q) - total).abs() <= 1e-12 * total);
        prop_assert!(p.dot(&q).abs() <= 1e-12 * total);
        prop_assert!(div(&p).l2_norm() <= 1e-10 * total.sqrt().max(1.0) * g.resolution()[0].max(g.resolution()[1]) as f64);
        let (pp, _) = leray_project(&p);
        prop_assert!(max_diff(&pp.x, &p.x).max(max_diff(&pp.y, &p.y)) <= 1e-12);
    }

    #[test]
    fn gradient_commutes_with_translation(g in grid_strategy(), seed in any::<u64>(), di in 0usize..8, dj in 0usize..8) {
        let f = noise(&g, seed);
        let a = grad(&f.shifted(di, dj));
        let b = grad(&f);
        let scale = b.x.lp_norm(f64::INFINITY).max(b.y.lp_norm(f64::INFINITY)).max(1.0);
        prop_assert!(max_diff(&a.x, &b.x.shifted(di, dj)) <= 1e-11 * scale);
        prop_assert!(max_diff(&a.y, &b.y.shifted(di, dj)) <= 1e-11 * scale);
    }

    #[test]
    fn poincare_holds(g in grid_strategy(), seed in any::<u64>()) {
        let f = strip_nyquist(&noise(&g, seed)).remove_mean();
        let c = poincare_constant(&g);
        prop_assert!(f.l2_norm() <= c * grad_norm(&f) * (1.0 + 1e-12));
    }

    #[test]
    fn sharp_weighted_inequalities_hold(seed in any::<u64>()) {
        let g = make_grid([2.0 * PI, 4.0 * PI], [16, 32]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, z) = random_pair(&g, &mut rng);
        for id in [InequalityId::WeightedPoincare, InequalityId::WeightedMeanFreePoincare] {
            let r = check_inequality(id, &a, &z, 4.0).unwrap();
            prop_assert_eq!(r.violations, 0, "{:?} ratio {}", id, r.worst_ratio);
        }
    }

    #[test]
    fn decay_fit_is_scale_equivariant(
        alpha in -1.0f64..3.0,
        amp in 0.1f64..10.0,
        c in 1e-3f64..1e3,
        wobble in 0.0f64..0.2,
    ) {
        let s = TimeSeries::from_samples("y", (0..40).map(|i| {
            let t = 0.1 * i as f64;
            (t, amp * (-alpha * t).exp() * (1.0 + wobble * (3.0 * t).sin()))
        })).unwrap();
        let f = fit_decay(&s, None).unwrap();
        let fc = fit_decay(&s.scaled(c), None).unwrap();
        prop_assert!((f.alpha - fc.alpha).abs() <= 1e-12 * f.alpha.abs().max(1.0));
        prop_assert!((fc.amplitude / (c * f.amplitude) - 1.0).abs() <= 1e-12);
        prop_assert!((f.r_squared - fc.r_squared).abs() <= 1e-9);
    }

    #[test]
    fn f1_is_monotone(gamma in 1.0f64..3.0, s_max in 1.0f64..20.0) {
        let mut prev = f1(0.0, gamma).unwrap();
        for i in 1..=1000 {
            let v = f1(s_max * i as f64 / 1000.0, gamma).unwrap();
            prop_assert!(v >= prev - 1e-12 * v.abs());
            prev = v;
        }
    }

    #[test]
    fn acoustic_roots_satisfy_vieta(nu in 1e-2f64..1e3, k2 in 0.1f64..400.0, pp in 1e-2f64..10.0) {
        let (lp, lm, _) = acoustic_eigenvalues(nu, k2, pp).unwrap();
        let sum = lp + lm;
        let prod = lp * lm;
        prop_assert!((sum.re + nu * k2).abs() <= 1e-12 * nu * k2);
        prop_assert!(sum.im.abs() <= 1e-12 * nu * k2);
        prop_assert!((prod.re - pp * k2).abs() <= 1e-12 * pp * k2);
        prop_assert!(prod.im.abs() <= 1e-12 * pp * k2);
    }

    #[test]
    fn unweighted_sup_is_max(values in prop::collection::vec(-1e3f64..1e3, 1..50)) {
        let s = TimeSeries::from_samples("v", values.iter().enumerate().map(|(i, &v)| (i as f64, v))).unwrap();
        let m = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(weighted_norm_accumulator(&s, 0.0, 0.0, Reduction::Sup).unwrap(), m);
    }
}
