use rankprob_core::linalg::DEFAULT_TOL;
use rankprob_core::mc_simulator::{
    estimate_rank_probability, ginibre_all_real_check, moment_report, rank_report, run_trials,
    write_distribution_csv,
};

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn result_is_independent_of_worker_count() {
    let one = in_pool(1, || run_trials(5, 3_000, 42, DEFAULT_TOL));
    let four = in_pool(4, || run_trials(5, 3_000, 42, DEFAULT_TOL));
    assert_eq!(one, four);
    let mut a = Vec::new();
    let mut b = Vec::new();
    write_distribution_csv(&one, &mut a).unwrap();
    write_distribution_csv(&four, &mut b).unwrap();
    assert_eq!(a, b);
}

#[test]
fn n2_frequency_near_quarter_pi() {
    let d = run_trials(2, 200_000, 42, DEFAULT_TOL);
    assert_eq!(d.tally(1), 0);
    let p = d.frequency(2);
    assert!((p - std::f64::consts::FRAC_PI_4).abs() < 0.0046, "{p}");
}

#[test]
fn n3_frequency_near_half() {
    let d = run_trials(3, 200_000, 43, DEFAULT_TOL);
    let sigma = (0.25f64 / d.tallied() as f64).sqrt();
    assert!((d.frequency(3) - 0.5).abs() < 3.0 * sigma);
}

#[test]
fn n4_and_n5_against_exact() {
    let r4 = estimate_rank_probability(4, 200_000, 44, DEFAULT_TOL);
    assert!((r4.p_exact - 0.260_233_7).abs() < 1e-7);
    assert!(r4.passes(4.0), "{r4:?}");
    let r5 = estimate_rank_probability(5, 200_000, 45, DEFAULT_TOL);
    assert!((r5.p_exact - 1.0 / 9.0).abs() < 1e-15);
    assert!(r5.passes(4.0), "{r5:?}");
}

#[test]
fn report_matches_tally_ratio() {
    let d = run_trials(4, 20_000, 7, DEFAULT_TOL);
    let r = estimate_rank_probability(4, 20_000, 7, DEFAULT_TOL);
    assert_eq!(r, rank_report(&d));
    assert_eq!(r.p_hat, d.tally(4) as f64 / d.tallied() as f64);
    assert!(r.ci95.0 <= r.p_hat && r.p_hat <= r.ci95.1);
}

#[test]
fn ginibre_small_n() {
    let r2 = ginibre_all_real_check(2, 100_000, 42, DEFAULT_TOL);
    assert!((r2.p_exact - 0.707_107).abs() < 1e-6);
    assert!(r2.passes(4.0), "{r2:?}");
    let r3 = ginibre_all_real_check(3, 100_000, 42, DEFAULT_TOL);
    assert!((r3.p_exact - 0.353_553).abs() < 1e-6);
    assert!(r3.passes(4.0), "{r3:?}");
}

#[test]
fn ambiguity_budget() {
    for n in 1..=10 {
        let trials = 20_000;
        let d = run_trials(n, trials, 1_000 + n as u64, DEFAULT_TOL);
        let excluded = d.ambiguous + d.degenerate;
        assert!(
            excluded as f64 <= 0.001 * trials as f64,
            "n={n}: {} ambiguous, {} degenerate",
            d.ambiguous,
            d.degenerate
        );
    }
}

#[test]
fn moments_for_two_point_distribution() {
    let d = run_trials(2, 10_000, 5, DEFAULT_TOL);
    let m = moment_report(&d);
    let p = d.frequency(2);
    assert!((m.mean - 2.0 * p).abs() < 1e-12);
    assert!((m.variance - 4.0 * p * (1.0 - p)).abs() < 1e-9);
}
