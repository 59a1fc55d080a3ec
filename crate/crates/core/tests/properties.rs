use proptest::prelude::*;
use scalechain_core::cluster::{build_chain, build_rate_matrix, stationary_distribution, vertical_transition_probs};
use scalechain_core::config::{AutoscalerConfig, MetricKind, ProfilingTrace, TraceRow};
use scalechain_core::evaluator::order_probabilities;
use scalechain_core::linalg::Matrix;
use scalechain_core::metric_model::{fit_metric_model, GaussianDist, MetricModel};
use scalechain_core::normal;
use scalechain_core::output::ResponseTimeFunction;
use scalechain_core::pipeline::{predict, ModelBundle};

fn linear_model(slope: f64, std0: f64, std1: f64) -> MetricModel {
    MetricModel {
        metric_kind: MetricKind::Cc,
        mean_coeffs: [slope, 0.0],
        std_coeffs: [std0, std1],
        fit_mse: 0.0,
        fit_r2: 1.0,
        rho_max: 100.0,
    }
}

fn bundle(slope: f64, std0: f64, std1: f64) -> ModelBundle {
    ModelBundle {
        metric_model: linear_model(slope, std0, std1),
        response_time_function: ResponseTimeFunction {
            coeffs: [slope, 0.001, 0.0],
            fit_mse: 0.0,
            fit_r2: 1.0,
            rho_max: 100.0,
        },
    }
}

fn cfg(tv: f64, n_max: usize) -> AutoscalerConfig {
    AutoscalerConfig::new(MetricKind::Cc, tv, n_max)
}

fn cumulative_rows(m: &Matrix, r: usize) -> Vec<f64> {
    m.row(r)
        .iter()
        .scan(0.0, |acc, p| {
            *acc += p;
            Some(*acc)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn order_probabilities_form_a_distribution(
        mean in -5.0..60.0f64,
        std in 1e-4..20.0f64,
        tv in 0.1..20.0f64,
        n_max in 1usize..40,
    ) {
        let d = order_probabilities(&GaussianDist::new(mean, std), tv, n_max).unwrap();
        prop_assert_eq!(d.probs.len(), n_max);
        prop_assert!(d.probs.iter().all(|&p| p >= 0.0));
        prop_assert!((d.probs.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn larger_mean_shifts_orders_up(
        mean in -5.0..40.0f64,
        delta in 0.0..10.0f64,
        std in 1e-3..10.0f64,
        tv in 0.5..10.0f64,
        n_max in 1usize..30,
    ) {
        let lo = order_probabilities(&GaussianDist::new(mean, std), tv, n_max).unwrap().cumulative();
        let hi = order_probabilities(&GaussianDist::new(mean + delta, std), tv, n_max).unwrap().cumulative();
        for (h, l) in hi.iter().zip(&lo) {
            prop_assert!(*h <= l + 1e-12, "{h} > {l}");
        }
    }

    #[test]
    fn orders_invariant_under_common_scaling(
        mean in 0.0..40.0f64,
        std in 1e-2..10.0f64,
        tv in 0.5..10.0f64,
        c in 0.1..10.0f64,
        n_max in 1usize..30,
    ) {
        let d = GaussianDist::new(mean, std);
        let a = order_probabilities(&d, tv, n_max).unwrap();
        let b = order_probabilities(&d.scaled(c), tv * c, n_max).unwrap();
        for (x, y) in a.probs.iter().zip(&b.probs) {
            prop_assert!((x - y).abs() <= 1e-12, "{x} vs {y}");
        }
    }

    #[test]
    fn positive_part_bounds(mean in -50.0..50.0f64, std in 1e-6..30.0f64) {
        let d = GaussianDist::new(mean, std);
        let m = d.mean_of_positive_part();
        prop_assert!(m >= 0.0);
        prop_assert!(m >= mean.max(0.0) - 1e-12);
        prop_assert!(m <= mean.max(0.0) + d.std * normal::pdf(0.0) + 1e-12);
    }

    #[test]
    fn rate_matrix_is_a_birth_death_generator(n_max in 1usize..25, i in 1usize..25, pro in 0.1..5.0f64, dep in 0.1..5.0f64) {
        let i = i.min(n_max);
        let mut c = cfg(2.0, n_max);
        c.mu_pro = pro;
        c.mu_dep = dep;
        let q = build_rate_matrix(i, &c).unwrap();
        for from in 1..=n_max {
            let mut sum = 0.0;
            for to in 1..=n_max {
                let r = q.rate(from, to);
                if from != to {
                    prop_assert!(r >= 0.0);
                    if from.abs_diff(to) > 1 {
                        prop_assert_eq!(r, 0.0);
                    }
                }
                sum += r;
            }
            prop_assert!(sum.abs() <= 1e-12);
        }
    }

    #[test]
    fn vertical_rows_are_stochastic_and_monotone_in_target(n_max in 2usize..16, t_eva in 0.2..10.0f64) {
        let mut c = cfg(2.0, n_max);
        c.t_eva_s = t_eva;
        let mats: Vec<Matrix> = (1..=n_max).map(|i| vertical_transition_probs(i, &c).unwrap()).collect();
        for m in &mats {
            for r in 0..n_max {
                prop_assert!((m.row(r).iter().sum::<f64>() - 1.0).abs() <= 1e-10);
                prop_assert!(m.row(r).iter().all(|&p| p >= 0.0));
            }
        }
        for w in mats.windows(2) {
            for r in 0..n_max {
                let lower = cumulative_rows(&w[0], r);
                let higher = cumulative_rows(&w[1], r);
                for (h, l) in higher.iter().zip(&lower) {
                    prop_assert!(*h <= l + 1e-12);
                }
            }
        }
    }

    #[test]
    fn chain_rows_sum_to_one_and_factor(
        lambda in 0.5..80.0f64,
        slope in 0.05..1.0f64,
        tv in 0.5..10.0f64,
        n_max in 1usize..9,
    ) {
        let c = cfg(tv, n_max);
        let chain = build_chain(lambda, &linear_model(slope, 0.1, 0.01), &c).unwrap();
        let m = chain.num_states();
        prop_assert_eq!(m, n_max * n_max);
        for s in 0..m {
            let row = chain.p.row(s);
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
            prop_assert!(row.iter().all(|&p| p >= 0.0));
            let (i, j) = chain.state(s);
            for (t, &got) in row.iter().enumerate() {
                let (i2, j2) = chain.state(t);
                let expected = chain.horizontal[j - 1].probs[i2 - 1] * chain.vertical[i - 1][(j - 1, j2 - 1)];
                prop_assert_eq!(got, expected);
            }
        }
    }

    #[test]
    fn stationary_distribution_is_invariant(
        lambda in 0.5..80.0f64,
        slope in 0.05..1.0f64,
        std0 in 0.01..2.0f64,
        tv in 0.5..10.0f64,
        n_max in 1usize..9,
    ) {
        let chain = build_chain(lambda, &linear_model(slope, std0, 0.01), &cfg(tv, n_max)).unwrap();
        let st = stationary_distribution(&chain).unwrap();
        prop_assert!(st.residual <= 1e-10);
        prop_assert!((st.pi.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let mut v = st.pi.clone();
        for _ in 0..100 {
            v = chain.p.left_mul(&v);
        }
        for (a, b) in v.iter().zip(&st.pi) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
        let full: f64 = st.pi.iter().enumerate().map(|(s, p)| chain.state(s).1 as f64 * p).sum();
        prop_assert!((full - st.avg_ready()).abs() <= 1e-12);
    }

    #[test]
    fn report_bounds(
        lambda in 0.5..80.0f64,
        slope in 0.05..1.0f64,
        tv in 0.5..10.0f64,
        n_max in 1usize..9,
    ) {
        let b = bundle(slope, 0.1, 0.01);
        let r = predict(&b, &cfg(tv, n_max), lambda).unwrap().report;
        prop_assert!(r.avg_replica_count >= 1.0 - 1e-12 && r.avg_replica_count <= n_max as f64 + 1e-12);
        prop_assert!(r.avg_concurrency >= 0.0);
        let min_rt = (1..=n_max)
            .map(|j| b.response_time_function.eval(lambda / j as f64))
            .fold(f64::INFINITY, f64::min);
        prop_assert!(r.avg_response_time_s >= min_rt - 1e-12);
        let from_marginal: f64 = r.marginal_ready.iter().enumerate().map(|(k, p)| (k + 1) as f64 * p).sum();
        prop_assert!((from_marginal - r.avg_replica_count).abs() <= 1e-12);
    }

    #[test]
    fn prediction_is_deterministic(lambda in 0.5..80.0f64, tv in 0.5..10.0f64, n_max in 1usize..9) {
        let b = bundle(0.2, 0.06, 0.009);
        let c = cfg(tv, n_max);
        prop_assert_eq!(predict(&b, &c, lambda).unwrap().report, predict(&b, &c, lambda).unwrap().report);
    }

    #[test]
    fn replica_count_nonincreasing_in_target_value(
        lambda in 0.5..80.0f64,
        slope in 0.05..1.0f64,
        tv in 0.5..10.0f64,
        dtv in 0.0..10.0f64,
        n_max in 1usize..9,
    ) {
        let b = bundle(slope, 0.06, 0.009);
        let lo = predict(&b, &cfg(tv, n_max), lambda).unwrap().report.avg_replica_count;
        let hi = predict(&b, &cfg(tv + dtv, n_max), lambda).unwrap().report.avg_replica_count;
        prop_assert!(hi <= lo + 1e-9, "N̄(tv={}) = {hi} > N̄(tv={tv}) = {lo}", tv + dtv);
    }

    #[test]
    fn single_replica_concurrency_nondecreasing_in_lambda(lambda in 0.5..80.0f64, dl in 0.0..20.0f64) {
        let b = bundle(0.2, 0.06, 0.009);
        let c = cfg(2.0, 1);
        let lo = predict(&b, &c, lambda).unwrap().report.avg_concurrency;
        let hi = predict(&b, &c, lambda + dl).unwrap().report.avg_concurrency;
        prop_assert!(hi >= lo - 1e-12);
    }

    #[test]
    fn metric_fit_scales_with_observations(
        a1 in 0.05..1.0f64,
        a2 in 0.0..0.05f64,
        c in 0.1..10.0f64,
        seed in any::<u64>(),
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let rows: Vec<(f64, f64)> = (0..200)
            .map(|k| {
                let rho = 0.5 + 0.1 * k as f64;
                let noise: f64 = rng.random_range(-0.5..0.5);
                (rho, (a1 * rho + a2 * rho * rho) * (1.0 + 0.6 * noise))
            })
            .collect();
        let trace = |scale: f64| {
            ProfilingTrace::new(rows.iter().map(|&(r, y)| TraceRow::new(r, scale * y, 0.2)).collect()).unwrap()
        };
        let base = fit_metric_model(&trace(1.0), MetricKind::Cc).unwrap();
        let scaled = fit_metric_model(&trace(c), MetricKind::Cc).unwrap();
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * (1.0 + x.abs().max(y.abs()));
        for k in 0..2 {
            prop_assert!(close(scaled.mean_coeffs[k], c * base.mean_coeffs[k]));
            prop_assert!(close(scaled.std_coeffs[k], c * base.std_coeffs[k]));
        }
    }
}

/// Past a scale-out threshold the extra replicas lower the per-container load
/// faster than the rising arrival rate raises it, so C̄ dips as λ grows.
#[test]
fn concurrency_dips_just_past_scale_out_threshold() {
    let b = bundle(0.2, 0.06, 0.009);
    let c = cfg(2.0, 10);
    let at = |lambda: f64| predict(&b, &c, lambda).unwrap().report.avg_concurrency;
    assert!(at(10.0) < at(9.0), "{} vs {}", at(10.0), at(9.0));
    // Away from thresholds the trend is upward.
    assert!(at(15.0) > at(12.0));
}
