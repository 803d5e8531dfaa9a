use adaptive_pec::experiment::{run_experiment, ExperimentConfig, PeriodResult};
use adaptive_pec::inference::roll_prior;
use adaptive_pec::noise::{schedule_channel, NoiseSchedule, PauliChannel};
use adaptive_pec::pec::{pec_run, quasiprob_decompose, FrameTable, PecOptions, SamplingScheme};
use adaptive_pec::quantum::{DensityMatrix, Gate};
use adaptive_pec::stats::{hellinger_discrete, Histogram};
use proptest::prelude::*;

fn channel_from(raw: &[f64]) -> PauliChannel {
    // Keep the identity weight dominant so the channel stays invertible.
    let mut w: Vec<f64> = raw.to_vec();
    w[0] += 4.0;
    PauliChannel::normalized(w).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mitigated_histograms_are_distributions(
        raw in prop::collection::vec(0.0f64..1.0, 16),
        seed in 0u64..1000,
        iid in any::<bool>(),
    ) {
        let x = channel_from(&raw);
        let frames = FrameTable::new(&Gate::Hadamard.unitary(2).unwrap(), &DensityMatrix::test_state()).unwrap();
        let q = quasiprob_decompose(&x).unwrap();
        let opts = PecOptions {
            n_circuits: 500,
            shots_per_circuit: 20,
            scheme: if iid { SamplingScheme::Iid } else { SamplingScheme::Stratified },
            workers: 1,
        };
        let r = pec_run(&q, &x, &frames, &opts, seed).unwrap();
        let p = r.clipped_histogram.probs();
        prop_assert!(p.iter().all(|&v| v >= 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(r.standard_errors.iter().all(|s| s.is_finite() && *s >= 0.0));
        prop_assert!(q.one_norm() >= 1.0 - 1e-12);
    }

    #[test]
    fn rolled_prior_is_proper(raw in prop::collection::vec(0.0f64..1.0, 16), kappa in 0.5f64..500.0) {
        let x = channel_from(&raw);
        let eta = roll_prior(&x, kappa).unwrap();
        prop_assert!(eta.eta().iter().all(|&e| e > 1.0));
        prop_assert!(eta.mode().is_ok());
    }

    #[test]
    fn hellinger_is_a_bounded_symmetric_distance(
        a in prop::collection::vec(0.01f64..1.0, 4),
        b in prop::collection::vec(0.01f64..1.0, 4),
    ) {
        let norm = |v: &[f64]| Histogram::new(v.iter().map(|x| x / v.iter().sum::<f64>()).collect()).unwrap();
        let (p, q) = (norm(&a), norm(&b));
        let d = hellinger_discrete(&p, &q).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert!((d - hellinger_discrete(&q, &p).unwrap()).abs() < 1e-15);
        prop_assert!(hellinger_discrete(&p, &p).unwrap() < 1e-7);
    }
}

#[test]
fn schedule_drifts_towards_more_noise() {
    let schedule = NoiseSchedule::default_two_qubit();
    let identity_weight: Vec<f64> = (0..4).map(|p| schedule_channel(&schedule, p).unwrap().0.coeffs()[0]).collect();
    assert!(identity_weight.windows(2).all(|w| w[1] < w[0]));
    assert!(schedule_channel(&schedule, 4).is_err());
}

#[test]
fn adaptive_arm_tracks_drift() {
    let results = run_experiment(&ExperimentConfig::with_seed(11)).unwrap();
    let reports: Vec<_> = results.iter().filter_map(PeriodResult::report).collect();
    assert_eq!(reports.len(), 3);
    assert_eq!(reports[0].hd_adaptive, reports[0].hd_nonadaptive);
    for r in &reports[1..] {
        assert!(r.hd_adaptive < r.hd_nonadaptive, "period {}", r.period);
        assert!(r.hd_nonstationarity > 0.0);
        assert!(r.x_hat.is_some());
    }
    assert!(reports[2].hd_nonstationarity > reports[1].hd_nonstationarity);
}

#[test]
fn worker_count_does_not_change_results() {
    let base = ExperimentConfig::with_seed(5);
    let a = run_experiment(&ExperimentConfig { workers: 1, ..base.clone() }).unwrap();
    let b = run_experiment(&ExperimentConfig { workers: 4, ..base }).unwrap();
    let strip = |v: Vec<PeriodResult>| -> Vec<PeriodResult> {
        v.into_iter()
            .map(|r| match r {
                PeriodResult::Completed(mut rep) => {
                    rep.wall_clock_s = 0.0;
                    PeriodResult::Completed(rep)
                }
                other => other,
            })
            .collect()
    };
    assert_eq!(strip(a), strip(b));
}
