use proptest::prelude::*;
use rankprob_core::linalg::DEFAULT_TOL;
use rankprob_core::mc_simulator::{exact_rank_probability, z_score};
use rankprob_core::rank_tool::{
    classify_batch, classify_rank, decompose_rank_n, load_tensor, relative_error, save_tensor,
    RankError, Tensor3, Verdict,
};
use rankprob_core::rng::RngState;

#[test]
fn save_load_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.txt");
    let t = Tensor3::random(5, RngState::new(3, 0));
    save_tensor(&t, &path).unwrap();
    let back = load_tensor(&path).unwrap();
    assert_eq!(back, t);
    for (a, b) in t.slice1().as_slice().iter().zip(back.slice1().as_slice()) {
        assert!((a - b).abs() <= 1e-12 * a.abs());
    }
}

#[test]
fn missing_file_is_io_error() {
    assert!(matches!(
        load_tensor("/nonexistent/tensor.txt"),
        Err(RankError::Io(_))
    ));
}

#[test]
fn random_rank_n_tensors_decompose() {
    let mut found = 0;
    for i in 0.. {
        let t = Tensor3::random(6, RngState::new(6, i));
        if classify_rank(&t, DEFAULT_TOL).verdict != Verdict::RankN {
            continue;
        }
        let d = decompose_rank_n(&t, DEFAULT_TOL).unwrap();
        assert_eq!(d.factors.r, 6);
        if d.eigenvector_condition <= 1e8 {
            assert!(d.relative_error <= 1e-8, "stream {i}: {}", d.relative_error);
            assert_eq!(relative_error(&d.factors, &t).unwrap(), d.relative_error);
        }
        found += 1;
        if found == 20 {
            break;
        }
    }
}

#[test]
fn verdict_frequency_matches_exact() {
    let n = 3;
    let m = 20_000u64;
    let tensors: Vec<_> = (0..m)
        .map(|i| Tensor3::random(n, RngState::new(99, i)))
        .collect();
    let verdicts = classify_batch(&tensors, DEFAULT_TOL);
    let rank_n = verdicts
        .iter()
        .filter(|v| v.verdict == Verdict::RankN)
        .count();
    let p_hat = rank_n as f64 / m as f64;
    let z = z_score(p_hat, exact_rank_probability(n), m);
    assert!(z.abs() < 4.0, "p_hat {p_hat}, z {z}");
}

#[test]
fn rank_n_plus_one_counts_have_parity() {
    for n in 2..=9 {
        for i in 0..300 {
            let v = classify_rank(&Tensor3::random(n, RngState::new(n as u64, i)), DEFAULT_TOL);
            if v.verdict == Verdict::RankNPlus1 {
                assert!(v.real_count < n && v.real_count % 2 == n % 2);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scale_equivariance(n in 1usize..8, seed in any::<u64>(), c in prop_oneof![-1e3..-1e-3, 1e-3..1e3f64]) {
        let t = Tensor3::random(n, RngState::new(seed, 0));
        let v = classify_rank(&t, DEFAULT_TOL);
        prop_assume!(v.margin > 1e-6);
        let w = classify_rank(&t.scaled(c), DEFAULT_TOL);
        prop_assert_eq!(v.verdict, w.verdict);
        prop_assert_eq!(v.real_count, w.real_count);
    }

    #[test]
    fn simple_real_spectrum_is_constructive(n in 2usize..10, seed in any::<u64>()) {
        let t = Tensor3::planted_rank_n(n, RngState::new(seed, 0)).unwrap();
        let v = classify_rank(&t, DEFAULT_TOL);
        prop_assume!(v.verdict == Verdict::RankN);
        let d = decompose_rank_n(&t, DEFAULT_TOL);
        prop_assume!(!matches!(d, Err(RankError::RepeatedEigenvalues { .. })));
        let d = d.unwrap();
        if d.eigenvector_condition <= 1e8 {
            prop_assert!(d.relative_error <= 1e-8, "{}", d.relative_error);
        }
    }

    #[test]
    fn text_round_trip(n in 1usize..7, seed in any::<u64>()) {
        let t = Tensor3::random(n, RngState::new(seed, 0));
        let back = rankprob_core::rank_tool::parse_tensor(&rankprob_core::rank_tool::format_tensor(&t)).unwrap();
        prop_assert_eq!(back, t);
    }
}
