//! Command-line front end: argument model, dispatch and output formatting.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use rankprob_core::linalg::DEFAULT_TOL;
use rankprob_core::mc_simulator::{
    ginibre_report, moment_report, rank_report, run_ginibre_trials, run_trials,
    write_distribution_csv, write_report_csv, EmpiricalKDistribution, TestReport,
};
use rankprob_core::prob_engine::{
    asymptotic_residual, exact_log, log_p_asymptotic, probability_table, ratio_asymptotic,
    ratio_exact, RankProbability, Route,
};
use rankprob_core::rank_tool::{classify_rank, decompose_rank_n, load_tensor, RankError, Verdict};
use rankprob_core::rng::GENERATOR;

pub const SEED_ENV: &str = "RANKPROB_SEED";
pub const DEFAULT_SEED: u64 = 42;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DEGENERATE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
/// A computation was refused, e.g. decomposing a tensor that is not rank N.
pub const EXIT_REFUSED: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Csv,
    Structured,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RouteArg {
    Direct,
    Explicit,
    Genfunc,
    Recursion,
}

impl From<RouteArg> for Route {
    fn from(r: RouteArg) -> Self {
        match r {
            RouteArg::Direct => Route::Direct,
            RouteArg::Explicit => Route::Explicit,
            RouteArg::Genfunc => Route::GenFunc,
            RouteArg::Recursion => Route::Recursion,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Exact P_N in factored form and as a decimal
    Exact,
    /// Exact P_N for N = 1..n-max
    Table,
    /// Exact log P_N against its large-N expansion
    Asymptotics,
    /// Monte Carlo count of real pencil roots for Gaussian N x N x 2 tensors
    Simulate,
    /// Monte Carlo all-real frequency for single Gaussian matrices
    Ginibre,
    /// Typical-rank verdict for a tensor file
    Classify,
    /// Rank-N CP decomposition of a tensor file
    Decompose,
}

/// Rank probabilities of random N x N x 2 tensors.
#[derive(Clone, Debug, Parser)]
#[command(name = "rankprob", version)]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Tensor dimension N
    #[arg(long, global = true)]
    pub n: Option<u32>,
    /// Largest N for table and asymptotics
    #[arg(long, global = true, default_value_t = 13)]
    pub n_max: u32,
    #[arg(long, global = true, default_value_t = 200_000)]
    pub trials: u64,
    /// RNG seed; the RANKPROB_SEED environment variable takes precedence
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Dead-band for real/complex classification of 2x2 Schur blocks
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Significant digits of decimal output
    #[arg(long, global = true, default_value_t = 12)]
    pub digits: usize,
    #[arg(long = "format", global = true, value_enum, default_value_t = OutputFormat::Text)]
    pub output_format: OutputFormat,
    /// Exact-engine route
    #[arg(long, global = true, value_enum, default_value_t = RouteArg::Direct)]
    pub route: RouteArg,
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Write results here instead of standard output
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Refused(String),
    Io(io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Refused(m) => write!(f, "{m}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => EXIT_USAGE,
            CliError::Refused(_) => EXIT_REFUSED,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Flag seed unless the environment override is set.
pub fn resolve_seed(flag: Option<u64>, env: Option<&str>) -> Result<u64, CliError> {
    match env {
        Some(v) => v
            .trim()
            .parse()
            .map_err(|_| usage(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        None => Ok(flag.unwrap_or(DEFAULT_SEED)),
    }
}

impl CliConfig {
    fn require_n(&self) -> Result<u32, CliError> {
        match self.n {
            Some(n) if n >= 1 => Ok(n),
            Some(_) => Err(usage("--n must be at least 1")),
            None => Err(usage("--n is required for this command")),
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(usage("--tol must be positive"));
        }
        if self.digits == 0 {
            return Err(usage("--digits must be at least 1"));
        }
        if self.trials == 0 {
            return Err(usage("--trials must be at least 1"));
        }
        if self.n_max == 0 {
            return Err(usage("--n-max must be at least 1"));
        }
        Ok(())
    }
}

/// Execute a parsed command, writing results to `out`. Returns the exit code.
pub fn run(config: &CliConfig, seed: u64, out: &mut dyn Write) -> Result<i32, CliError> {
    config.validate()?;
    let text = match config.command {
        Command::Exact => exact(config)?,
        Command::Table => table(config)?,
        Command::Asymptotics => asymptotics(config)?,
        Command::Simulate => simulate(config, seed, false)?,
        Command::Ginibre => simulate(config, seed, true)?,
        Command::Classify => return classify(config, out),
        Command::Decompose => decompose(config)?,
    };
    out.write_all(text.as_bytes())?;
    Ok(EXIT_OK)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serialisable");
    s.push('\n');
    s
}

fn exact(config: &CliConfig) -> Result<String, CliError> {
    let n = config.require_n()?;
    let rp = RankProbability::compute(n, config.route.into()).map_err(|e| usage(e.to_string()))?;
    let p = &rp.p_rank_n;
    let digits = config.digits;
    let decimal = p.to_decimal(digits);
    let comp_decimal = rp.p_rank_n_plus_1.to_decimal(digits);
    let comp_symbolic = rp.p_rank_n_plus_1.symbolic();
    Ok(match config.output_format {
        OutputFormat::Text => format!(
            "P_{n} = {}\n{p} = {decimal}\nP(rank {}) = {comp_symbolic} = {comp_decimal}\n",
            p.factored(),
            n + 1
        ),
        OutputFormat::Csv => format!(
            "n,exact,factored,decimal,rank_n_plus_1\n{n},{p},{},{decimal},{comp_decimal}\n",
            p.factored()
        ),
        OutputFormat::Structured => to_json(&json!({
            "n": n,
            "route": format!("{:?}", rp.route),
            "exact": p.to_string(),
            "factored": p.factored(),
            "pi_half_power": p.pi_half_pow(),
            "decimal": decimal,
            "rank_n_plus_1": { "exact": comp_symbolic, "decimal": comp_decimal },
        })),
    })
}

fn table(config: &CliConfig) -> Result<String, CliError> {
    let n_max = config.n.unwrap_or(config.n_max);
    let rows = probability_table(n_max, config.digits).map_err(|e| usage(e.to_string()))?;
    let mut s = String::new();
    match config.output_format {
        OutputFormat::Text => {
            let width = rows
                .iter()
                .map(|r| r.factored.chars().count())
                .max()
                .unwrap_or(0);
            for r in &rows {
                let f = &r.factored;
                let pad = width - f.chars().count();
                let _ = writeln!(
                    s,
                    "P_{:<3} = {f}{:pad$}  = {}   P(rank {}) = {}",
                    r.n,
                    "",
                    r.decimal,
                    r.n + 1,
                    r.rank_n_plus_1_decimal
                );
            }
        }
        OutputFormat::Csv => {
            s.push_str("n,exact,factored,decimal,rank_n_plus_1\n");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    r.n, r.exact, r.factored, r.decimal, r.rank_n_plus_1_decimal
                );
            }
        }
        OutputFormat::Structured => {
            let items: Vec<_> = rows
                .iter()
                .map(|r| {
                    json!({
                        "n": r.n,
                        "exact": r.exact.to_string(),
                        "factored": r.factored,
                        "decimal": r.decimal,
                        "rank_n_plus_1": r.rank_n_plus_1_decimal,
                    })
                })
                .collect();
            s = to_json(&items);
        }
    }
    Ok(s)
}

fn asymptotics(config: &CliConfig) -> Result<String, CliError> {
    let ns: Vec<u32> = match config.n {
        Some(n) => vec![n],
        None => (1..=config.n_max).collect(),
    };
    let mut rows = Vec::new();
    for n in ns {
        let err = |e: rankprob_core::prob_engine::ProbError| usage(e.to_string());
        let est = log_p_asymptotic(n).map_err(err)?;
        let exact = exact_log(&rankprob_core::prob_engine::p_rank_direct(n).map_err(err)?);
        rows.push(json!({
            "n": n,
            "log_p_exact": exact,
            "log_p_asymptotic": est.log_p,
            "residual": asymptotic_residual(n).map_err(err)?,
            "ratio_exact": ratio_exact(n).map_err(err)?,
            "ratio_asymptotic": ratio_asymptotic(n).map_err(err)?,
        }));
    }
    let cols = [
        "n",
        "log_p_exact",
        "log_p_asymptotic",
        "residual",
        "ratio_exact",
        "ratio_asymptotic",
    ];
    Ok(match config.output_format {
        OutputFormat::Structured => to_json(&rows),
        OutputFormat::Csv | OutputFormat::Text => {
            let sep = if config.output_format == OutputFormat::Csv {
                ","
            } else {
                "  "
            };
            let mut s = cols.join(sep);
            s.push('\n');
            for r in &rows {
                let line: Vec<String> = cols.iter().map(|c| r[c].to_string()).collect();
                s.push_str(&line.join(sep));
                s.push('\n');
            }
            s
        }
    })
}

fn metadata_line(kind: &str, dist: &EmpiricalKDistribution) -> String {
    format!(
        "# rankprob {kind} n={} trials={} seed={} tol={:e} generator={}\n",
        dist.n, dist.trials, dist.seed, dist.tol, dist.generator
    )
}

fn report_text(r: &TestReport, label: &str) -> String {
    format!(
        "{label}: p_hat={} p_exact={} z={} ci95=[{}, {}] tallied={} ambiguous={} degenerate={}\n",
        r.p_hat, r.p_exact, r.z_score, r.ci95.0, r.ci95.1, r.tallied, r.ambiguous, r.degenerate
    )
}

fn simulate(config: &CliConfig, seed: u64, ginibre: bool) -> Result<String, CliError> {
    let n = config.require_n()? as usize;
    let (dist, report, kind, label) = if ginibre {
        let d = run_ginibre_trials(n, config.trials, seed, config.tol);
        let r = ginibre_report(&d);
        (d, r, "ginibre", "all-real")
    } else {
        let d = run_trials(n, config.trials, seed, config.tol);
        let r = rank_report(&d);
        (d, r, "simulate", "rank N")
    };
    let moments = moment_report(&dist);
    Ok(match config.output_format {
        OutputFormat::Text => {
            let mut s = metadata_line(kind, &dist);
            s.push_str("k  tally  frequency\n");
            for k in (n % 2..=n).step_by(2) {
                let _ = writeln!(s, "{k}  {}  {}", dist.tally(k), dist.frequency(k));
            }
            s.push_str(&report_text(&report, label));
            let _ = writeln!(
                s,
                "moments: mean={} variance={} skewness={} mean_leading={} variance_ratio_leading={}",
                moments.mean,
                moments.variance,
                moments.skewness,
                moments.mean_leading,
                moments.variance_ratio_leading
            );
            s
        }
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            write_distribution_csv(&dist, &mut buf)?;
            buf.push(b'\n');
            write_report_csv(std::slice::from_ref(&report), &mut buf)?;
            String::from_utf8(buf).expect("ascii csv")
        }
        OutputFormat::Structured => to_json(&json!({
            "command": kind,
            "n": n,
            "trials": dist.trials,
            "seed": dist.seed,
            "tol": dist.tol,
            "generator": GENERATOR,
            "distribution": dist,
            "report": report,
            "moments": moments,
        })),
    })
}

fn input_tensor(config: &CliConfig) -> Result<rankprob_core::rank_tool::Tensor3, CliError> {
    let path = config
        .input
        .as_ref()
        .ok_or_else(|| usage("--input is required for this command"))?;
    load_tensor(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn classify(config: &CliConfig, out: &mut dyn Write) -> Result<i32, CliError> {
    let t = input_tensor(config)?;
    let v = classify_rank(&t, config.tol);
    let text = match config.output_format {
        OutputFormat::Text => format!("{v}\n"),
        OutputFormat::Csv => format!(
            "n,verdict,rank,real_count,margin,tol\n{},{:?},{},{},{},{:e}\n",
            v.n,
            v.verdict,
            v.rank().map(|r| r.to_string()).unwrap_or_default(),
            v.real_count,
            v.margin,
            config.tol
        ),
        OutputFormat::Structured => to_json(&json!({
            "verdict": v,
            "rank": v.rank(),
            "low_margin": v.low_margin(),
            "tol": config.tol,
        })),
    };
    out.write_all(text.as_bytes())?;
    Ok(if v.verdict == Verdict::Degenerate {
        EXIT_DEGENERATE
    } else {
        EXIT_OK
    })
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

fn decompose(config: &CliConfig) -> Result<String, CliError> {
    let t = input_tensor(config)?;
    let d = decompose_rank_n(&t, config.tol).map_err(|e| match e {
        RankError::NotRankN { .. }
        | RankError::RepeatedEigenvalues { .. }
        | RankError::Linalg(_) => CliError::Refused(e.to_string()),
        other => usage(other.to_string()),
    })?;
    let f = &d.factors;
    Ok(match config.output_format {
        OutputFormat::Text => {
            let mut s = format!(
                "rank {} decomposition: relative_error={} eigenvector_condition={} tol={:e}\n",
                f.r, d.relative_error, d.eigenvector_condition, config.tol
            );
            for i in 0..f.r {
                let _ = writeln!(
                    s,
                    "term {}: lambda={} u={} v={} w={}",
                    i + 1,
                    d.eigenvalues[i],
                    fmt_vec(&f.u[i]),
                    fmt_vec(&f.v[i]),
                    fmt_vec(&f.w[i])
                );
            }
            s
        }
        OutputFormat::Csv => {
            let mut s = String::from("term,lambda,vector,index,value\n");
            for i in 0..f.r {
                for (name, vec) in [("u", &f.u[i][..]), ("v", &f.v[i][..]), ("w", &f.w[i][..])] {
                    for (j, x) in vec.iter().enumerate() {
                        let _ = writeln!(s, "{},{},{name},{},{x}", i + 1, d.eigenvalues[i], j + 1);
                    }
                }
            }
            s
        }
        OutputFormat::Structured => to_json(&json!({
            "decomposition": d,
            "tol": config.tol,
        })),
    })
}

/// Parse arguments, run, and report errors. Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let config = match CliConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let env_seed = std::env::var(SEED_ENV).ok();
    let result =
        resolve_seed(config.seed, env_seed.as_deref()).and_then(|seed| match &config.output {
            Some(path) => {
                let mut file = io::BufWriter::new(std::fs::File::create(path)?);
                let code = run(&config, seed, &mut file)?;
                file.flush()?;
                Ok(code)
            }
            None => {
                let stdout = io::stdout();
                let mut lock = stdout.lock();
                run(&config, seed, &mut lock)
            }
        });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("rankprob: {e}");
            e.exit_code()
        }
    }
}
