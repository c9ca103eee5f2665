use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn rankprob(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rankprob"))
        .args(args)
        .env_remove("RANKPROB_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn exact_three_is_one_half() {
    let o = rankprob(&["exact", "--n", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("1/2"));
}

#[test]
fn exact_two_with_ten_digits() {
    let o = rankprob(&["exact", "--n", "2", "--digits", "10"]);
    assert!(stdout(&o).contains("π/4 = 0.7853981634"), "{}", stdout(&o));
}

#[test]
fn exact_seven_factored() {
    let s = stdout(&rankprob(&["exact", "--n", "7"]));
    assert!(s.contains("3²/(5²·2⁵)"), "{s}");
    assert!(s.contains("9/800 = 0.0112500000000"), "{s}");
}

#[test]
fn table_to_thirteen() {
    let s = stdout(&rankprob(&["table", "--n-max", "13"]));
    assert_eq!(s.lines().count(), 13);
    assert!(s.contains("P_13  = 5²/(11²·7⁶·2⁴)"), "{s}");
    let csv = stdout(&rankprob(&["table", "--n-max", "4", "--format", "csv"]));
    assert!(
        csv.contains("4,27π²/1024,3³·π²/2¹⁰,0.260233709794,0.739766290206"),
        "{csv}"
    );
}

#[test]
fn classify_rotation_is_rank_three() {
    let o = rankprob(&[
        "classify",
        "--input",
        data("rotation_2x2x2.txt").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("rank 3"), "{}", stdout(&o));
}

#[test]
fn classify_identity_warns() {
    let o = rankprob(&[
        "classify",
        "--input",
        data("identity_2x2x2.json").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.starts_with("rank 2") && s.contains("low margin"), "{s}");
}

#[test]
fn degenerate_verdict_exits_one() {
    let o = rankprob(&[
        "classify",
        "--input",
        data("zero_2x2x2.txt").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("degenerate"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(rankprob(&["exact"]).status.code(), Some(2));
    assert_eq!(rankprob(&["exact", "--n", "x"]).status.code(), Some(2));
    assert_eq!(rankprob(&["nonsense"]).status.code(), Some(2));
    let o = rankprob(&[
        "classify",
        "--input",
        data("missing_slice.txt").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("dimension"));
}

#[test]
fn decompose_diagonal() {
    let path = data("diagonal_2x2x2.txt");
    let o = rankprob(&["decompose", "--input", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.starts_with("rank 2 decomposition"), "{s}");
    assert_eq!(s.lines().filter(|l| l.starts_with("term")).count(), 2);
    let refused = rankprob(&[
        "decompose",
        "--input",
        data("rotation_2x2x2.txt").to_str().unwrap(),
    ]);
    assert_eq!(refused.status.code(), Some(3));
}

#[test]
fn simulate_echoes_metadata() {
    let s = stdout(&rankprob(&[
        "simulate", "--n", "3", "--trials", "2000", "--seed", "9",
    ]));
    assert!(s.starts_with(
        "# rankprob simulate n=3 trials=2000 seed=9 tol=1e-10 generator=chacha8-polar"
    ));
}

#[test]
fn env_seed_overrides_flag() {
    let o = Command::new(env!("CARGO_BIN_EXE_rankprob"))
        .args([
            "ginibre", "--n", "2", "--trials", "100", "--seed", "1", "--format", "csv",
        ])
        .env("RANKPROB_SEED", "77")
        .output()
        .unwrap();
    let s = stdout(&o);
    assert!(s.lines().nth(1).unwrap().ends_with(",100,77,1e-10"), "{s}");
}

#[test]
fn text_and_structured_payloads_match() {
    let args = ["simulate", "--n", "4", "--trials", "3000", "--seed", "5"];
    let text = stdout(&rankprob(&args));
    let mut sargs = args.to_vec();
    sargs.extend(["--format", "structured"]);
    let raw = stdout(&rankprob(&sargs));
    let json: serde_json::Value = serde_json::from_str(&raw).unwrap();
    assert_eq!(json["seed"], 5);
    // Compare the printed digits, not a re-parsed float.
    let raw_field = |key: &str| {
        let tag = format!("\"{key}\": ");
        let start = raw.find(&tag).unwrap() + tag.len();
        raw[start..].split([',', '\n']).next().unwrap().to_string()
    };
    for (key, name) in [("p_hat", "p_hat"), ("p_exact", "p_exact"), ("z_score", "z")] {
        let needle = format!("{name}={}", raw_field(key));
        assert!(text.contains(&needle), "missing {needle} in {text}");
    }

    let exact_text = stdout(&rankprob(&["exact", "--n", "6"]));
    let exact_json: serde_json::Value = serde_json::from_str(&stdout(&rankprob(&[
        "exact",
        "--n",
        "6",
        "--format",
        "structured",
    ])))
    .unwrap();
    assert!(exact_text.contains(exact_json["decimal"].as_str().unwrap()));
    assert!(exact_text.contains(exact_json["factored"].as_str().unwrap()));
}

#[test]
fn csv_output_file_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = rankprob(&[
            "simulate",
            "--n",
            "3",
            "--trials",
            "5000",
            "--format",
            "csv",
            "--output",
            p.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        assert!(o.stdout.is_empty());
    }
    let first = std::fs::read(&a).unwrap();
    assert_eq!(first, std::fs::read(&b).unwrap());
    assert!(String::from_utf8(first)
        .unwrap()
        .starts_with("n,k,tally,trials,seed,tol\n"));
}
