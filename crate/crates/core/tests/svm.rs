use ndarray::{concatenate, Array2, Axis};
use pgpu::svm::{fit_platt, kkt_residuals, train_svm, train_weighted_svm, ProbabilisticSvm};
use pgpu::{KernelSpec, SvmParams};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn problem(seed: u64, n: usize) -> (Array2<f64>, Vec<i8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = Array2::from_shape_fn((n, 2), |_| rng.random_range(-1.0..1.0));
    let mut y: Vec<i8> = x
        .outer_iter()
        .map(|r| if r[0] + r[1] + rng.random_range(-0.5..0.5) > 0.0 { 1 } else { -1 })
        .collect();
    y[0] = 1;
    y[1] = -1;
    (x, y)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn weighted_solution_is_kkt_optimal(
        seed in any::<u64>(),
        n in 6usize..40,
        c in 0.1f64..10.0,
        gamma in 0.2f64..3.0,
    ) {
        let (x, y) = problem(seed, n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..3.0)).collect();
        let params = SvmParams::new(c, KernelSpec::Rbf { gamma });
        let m = train_weighted_svm(x.view(), &y, &w, &params).unwrap();
        prop_assert!(m.converged);
        let worst = kkt_residuals(&m, x.view(), &y, &w).unwrap().into_iter().fold(0.0, f64::max);
        prop_assert!(worst <= 1e-3, "worst KKT residual {}", worst);
        // box and equality constraints of the dual
        let mut sum = 0.0;
        for (&i, &coef) in m.support_indices.iter().zip(&m.dual_coefs) {
            prop_assert!(coef.abs() <= c * w[i] * (1.0 + 1e-12));
            prop_assert_eq!(coef.signum() as i8, y[i]);
            sum += coef;
        }
        prop_assert!(sum.abs() < 1e-8 * (c * n as f64));
    }

    #[test]
    fn platt_is_monotone_and_complementary(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y: Vec<i8> = (0..40).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        let f: Vec<f64> = y.iter().map(|&l| l as f64 * 0.5 + rng.random_range(-1.0..1.0)).collect();
        let cal = fit_platt(&f, &y).unwrap();
        prop_assert!(cal.a < 0.0);
        let mut last = 0.0;
        for k in 0..=200 {
            let (p, q) = cal.probabilities(-4.0 + 0.04 * k as f64);
            prop_assert_eq!(p + q, 1.0);
            prop_assert!(p > 0.0 && p < 1.0);
            prop_assert!(p > last);
            last = p;
        }
    }
}

#[test]
fn doubled_weight_equals_duplicated_row() {
    let (x, y) = problem(11, 30);
    let params = SvmParams::new(1.0, KernelSpec::Rbf { gamma: 0.5 }).with_tol(1e-10);
    let mut w = vec![1.0; 30];
    let dup = [3usize, 7, 12];
    for &i in &dup {
        w[i] = 2.0;
    }
    let weighted = train_weighted_svm(x.view(), &y, &w, &params).unwrap();
    let extra = x.select(Axis(0), &dup);
    let xd = concatenate![Axis(0), x, extra];
    let yd: Vec<i8> = y.iter().copied().chain(dup.iter().map(|&i| y[i])).collect();
    let duplicated = train_svm(xd.view(), &yd, &params).unwrap();
    let (probe, _) = problem(99, 50);
    let a = weighted.decision_values(probe.view()).unwrap();
    let b = duplicated.decision_values(probe.view()).unwrap();
    for (u, v) in a.iter().zip(&b) {
        assert!((u - v).abs() < 1e-6, "{u} vs {v}");
    }
}

#[test]
fn zero_weight_drops_the_example() {
    let (x, y) = problem(5, 25);
    let params = SvmParams::new(2.0, KernelSpec::Rbf { gamma: 1.0 }).with_tol(1e-10);
    let mut w = vec![1.0; 25];
    w[4] = 0.0;
    let with_zero = train_weighted_svm(x.view(), &y, &w, &params).unwrap();
    let keep: Vec<usize> = (0..25).filter(|&i| i != 4).collect();
    let yk: Vec<i8> = keep.iter().map(|&i| y[i]).collect();
    let without = train_svm(x.select(Axis(0), &keep).view(), &yk, &params).unwrap();
    let a = with_zero.decision_values(x.view()).unwrap();
    let b = without.decision_values(x.view()).unwrap();
    for (u, v) in a.iter().zip(&b) {
        assert!((u - v).abs() < 1e-6);
    }
}

#[test]
fn separable_data_is_fitted_exactly() {
    let x = Array2::from_shape_fn((40, 2), |(i, j)| {
        let side = if i < 20 { 1.0 } else { -1.0 };
        side * (0.5 + 0.02 * i as f64) + 0.1 * j as f64
    });
    let y: Vec<i8> = (0..40).map(|i| if i < 20 { 1 } else { -1 }).collect();
    let m = train_svm(x.view(), &y, &SvmParams::new(10.0, KernelSpec::Linear)).unwrap();
    for (f, &l) in m.decision_values(x.view()).unwrap().iter().zip(&y) {
        assert_eq!(f.signum() as i8, l);
    }
}

#[test]
fn probabilistic_svm_orders_by_class() {
    let (x, y) = problem(3, 120);
    let p = ProbabilisticSvm::fit(x.view(), &y, &SvmParams::new(1.0, KernelSpec::default_for_dim(2))).unwrap();
    let probs = p.positive_probabilities(x.view()).unwrap();
    let mean = |cls: i8| {
        let v: Vec<f64> = probs.iter().zip(&y).filter(|(_, &l)| l == cls).map(|(&p, _)| p).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    assert!(mean(1) > 0.6 && mean(-1) < 0.4);
}

#[test]
fn one_class_training_set_is_rejected() {
    let (x, _) = problem(1, 10);
    assert!(train_svm(x.view(), &[1; 10], &SvmParams::new(1.0, KernelSpec::Linear)).is_err());
    assert!(train_svm(x.view(), &[1, -1, 0, 1, 1, 1, 1, 1, 1, 1], &SvmParams::new(1.0, KernelSpec::Linear)).is_err());
}
