//! The `flm` command line tool.
//!
//! Exit status: 0 on success, 1 on invalid input or failed checks, 2 on
//! usage errors, 3 when a comparison report contains a FAIL row.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::benchmarks::{build_long_k_path_capped, Benchmark, BenchmarkKind, LevelFunction, LONG_PATH_POINT_CAP};
use crate::bounds::{flm_lower_classic, flm_lower_visit, flm_upper_classic, visit_lower_from_chain, BoundResult};
use crate::closed_forms::{
    jump_bounds, leadingones_exact, longpath_leave_prob, longpath_leave_prob_bound, longpath_lower_bound,
    longpath_m, longpath_reference_bound, longpath_visit_lower, onemax_bounds, JumpInit,
};
use crate::error::{Error, Result};
use crate::experiment::{run_experiment, ExperimentConfig, InitSpec, RateSpec};
use crate::full_state::{full_state_analysis, FullStart, FULL_STATE_MAX_N};
use crate::level_chain::{
    jump_level_matrix, leadingones_level_matrix, longpath_level_matrix, onemax_level_matrix, ChainSummary,
    LevelChain, StartMode,
};
use crate::output::{write_csv, write_json, write_levels_csv, write_replicates_csv};
use crate::report::{compare_report, Report, Verdict};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_FAIL: i32 = 3;

/// Environment variable holding the default worker cap.
pub const THREADS_ENV: &str = "FLM_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Level chain where exact, full state space otherwise.
    Auto,
    Chain,
    FullState,
}

#[derive(Debug, Parser)]
#[command(name = "flm", version, about = "Fitness-level runtime analysis of the (1+1) EA")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Master seed of the random streams.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (default: standard output).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON file with default values for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: $FLM_THREADS, else all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute the applicable runtime bounds for a benchmark.
    Bounds(ProblemArgs),
    /// Exact values from a level chain or the full state space.
    Oracle(ProblemArgs),
    /// Run independent seeded replicates of the EA.
    Simulate(ProblemArgs),
    /// Simulate and check the results against bounds and exact values.
    Compare(ProblemArgs),
    /// Build a long k-path and verify its distance properties.
    PathCheck(ProblemArgs),
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemArgs {
    /// onemax, leadingones, jump or longpath.
    #[arg(long)]
    benchmark: Option<BenchmarkKind>,
    #[arg(long)]
    n: Option<usize>,
    /// Jump gap size or long-path parameter.
    #[arg(long)]
    k: Option<usize>,
    /// Mutation rate: a number, `a/b`, or `c/n` (default 1/n).
    #[arg(long)]
    p: Option<RateSpec>,
    /// Start fitness for OneMax range bounds.
    #[arg(long)]
    from: Option<usize>,
    /// Target fitness for OneMax range bounds.
    #[arg(long)]
    to: Option<usize>,
    /// random, zeros, level:K or point:BITS.
    #[arg(long)]
    init: Option<InitSpec>,
    #[arg(long)]
    replicates: Option<u64>,
    #[arg(long)]
    #[serde(alias = "max-iterations")]
    max_iterations: Option<u64>,
    #[arg(long, value_enum)]
    method: Option<Method>,
}

/// Contents of a `--config` file: an object keyed by flag name.
#[derive(Debug, Default)]
struct ConfigFile {
    format: Option<Format>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    threads: Option<usize>,
    problem: ProblemArgs,
}

impl ConfigFile {
    fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut map: Map<String, Value> = serde_json::from_str(&text)?;
        let mut take = |key: &str| map.remove(key).unwrap_or(Value::Null);
        let format = serde_json::from_value(take("format"))?;
        let seed = serde_json::from_value(take("seed"))?;
        let out = serde_json::from_value(take("out"))?;
        let threads = serde_json::from_value(take("threads"))?;
        let problem = serde_json::from_value(Value::Object(map))?;
        Ok(Self {
            format,
            seed,
            out,
            threads,
            problem,
        })
    }
}

impl ProblemArgs {
    fn merged(self, defaults: ProblemArgs) -> Self {
        Self {
            benchmark: self.benchmark.or(defaults.benchmark),
            n: self.n.or(defaults.n),
            k: self.k.or(defaults.k),
            p: self.p.or(defaults.p),
            from: self.from.or(defaults.from),
            to: self.to.or(defaults.to),
            init: self.init.or(defaults.init),
            replicates: self.replicates.or(defaults.replicates),
            max_iterations: self.max_iterations.or(defaults.max_iterations),
            method: self.method.or(defaults.method),
        }
    }
}

/// Fully resolved settings of one invocation.
struct Settings {
    format: Format,
    seed: u64,
    out: Option<PathBuf>,
    threads: Option<usize>,
    problem: ProblemArgs,
}

impl Settings {
    fn benchmark(&self) -> Result<BenchmarkKind> {
        self.problem
            .benchmark
            .ok_or_else(|| Error::InvalidParameter("--benchmark is required".into()))
    }

    fn n(&self) -> Result<usize> {
        self.problem
            .n
            .ok_or_else(|| Error::InvalidParameter("--n is required".into()))
    }

    fn rate(&self) -> RateSpec {
        self.problem.p.unwrap_or_default()
    }

    fn p(&self) -> Result<f64> {
        self.rate().resolve(self.n()?)
    }

    fn init(&self) -> Result<InitSpec> {
        Ok(self.problem.init.clone().unwrap_or(match self.benchmark()? {
            BenchmarkKind::LongPath => InitSpec::Zeros,
            _ => InitSpec::Random,
        }))
    }

    fn experiment(&self) -> Result<ExperimentConfig> {
        let mut config = ExperimentConfig::new(self.benchmark()?, self.n()?, self.problem.k);
        config.rate = self.rate();
        config.master_seed = self.seed;
        config.init = self.init()?;
        config.threads = self.threads;
        if let Some(r) = self.problem.replicates {
            config.replicates = r;
        }
        if let Some(m) = self.problem.max_iterations {
            config.max_iterations = Some(m);
        }
        config.validate()?;
        Ok(config)
    }

    /// Rejects rates other than `1/n` for formulas stated at that rate.
    fn require_standard_rate(&self, what: &str) -> Result<f64> {
        let n = self.n()?;
        let p = self.p()?;
        if (p * n as f64 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("{what} are stated for p = 1/n, got p = {p}")));
        }
        Ok(p)
    }
}

/// Entry point of the binary.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(args, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs one invocation, writing results to `stdout` (unless `--out` is
/// given) and diagnostics to `stderr`; returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = if e.use_stderr() {
                write!(stderr, "{}", e.render())
            } else {
                write!(stdout, "{}", e.render())
            };
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli, stdout) {
        Ok(code) => code,
        // The reader went away (`flm ... | head`).
        Err(e) if is_broken_pipe(&e) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_INVALID
        }
    }
}

fn is_broken_pipe(e: &Error) -> bool {
    let kind = match e {
        Error::Io(io) => Some(io.kind()),
        Error::Json(j) => j.io_error_kind(),
        Error::Csv(c) => match c.kind() {
            csv::ErrorKind::Io(io) => Some(io.kind()),
            _ => None,
        },
        _ => None,
    };
    kind == Some(std::io::ErrorKind::BrokenPipe)
}

fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::InvalidParameter(format!("{THREADS_ENV}={v:?} is not a thread count"))),
        _ => Ok(None),
    }
}

fn dispatch(cli: Cli, stdout: &mut dyn Write) -> Result<i32> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let (kind, problem) = match cli.command {
        Command::Bounds(a) => ("bounds", a),
        Command::Oracle(a) => ("oracle", a),
        Command::Simulate(a) => ("simulate", a),
        Command::Compare(a) => ("compare", a),
        Command::PathCheck(a) => ("path-check", a),
    };
    let threads = match cli.threads.or(file.threads) {
        Some(t) => Some(t),
        None => threads_from_env()?,
    };
    if threads == Some(0) {
        return Err(Error::InvalidParameter("threads must be at least 1".into()));
    }
    let explicit_format = cli.format.or(file.format);
    let settings = Settings {
        format: explicit_format.unwrap_or(Format::Json),
        seed: cli.seed.or(file.seed).unwrap_or(0),
        out: cli.out.or(file.out),
        threads,
        problem: problem.merged(file.problem),
    };
    match kind {
        "bounds" => bounds_command(&settings, stdout),
        "oracle" => oracle_command(&settings, stdout),
        "simulate" => simulate_command(&settings, stdout),
        "compare" => compare_command(&settings, stdout),
        _ => path_check_command(&settings, explicit_format, stdout),
    }
}

/// Writes to `--out` if given, else to standard output.
fn emit(settings: &Settings, stdout: &mut dyn Write, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match &settings.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            body(&mut w)?;
            w.flush()?;
        }
        None => body(stdout)?,
    }
    Ok(())
}

#[derive(Serialize)]
struct BoundRow {
    theorem: String,
    kind: String,
    value: f64,
    clamped: bool,
    proven: bool,
    violated_preconditions: String,
}

fn bound_rows(bounds: &[BoundResult]) -> Vec<BoundRow> {
    bounds
        .iter()
        .map(|b| BoundRow {
            theorem: b.theorem.to_string(),
            kind: serde_json::to_value(b.kind)
                .ok()
                .and_then(|v| v.as_str().map(str::to_owned))
                .unwrap_or_default(),
            value: b.value,
            clamped: b.clamped,
            proven: b.proven,
            violated_preconditions: b.violated_preconditions.join("; "),
        })
        .collect()
}

fn object(value: impl Serialize) -> Result<Map<String, Value>> {
    match serde_json::to_value(value)? {
        Value::Object(map) => Ok(map),
        other => Ok(Map::from_iter([("value".to_owned(), other)])),
    }
}

/// Closed-form and fitness-level bounds for the configured benchmark, plus
/// benchmark-specific extra fields.
fn collect_bounds(settings: &Settings) -> Result<(Map<String, Value>, Vec<BoundResult>)> {
    let kind = settings.benchmark()?;
    let n = settings.n()?;
    let mut fields = Map::new();
    fields.insert("benchmark".into(), json!(kind));
    fields.insert("n".into(), json!(n));
    let mut bounds = Vec::new();
    match kind {
        BenchmarkKind::OneMax => {
            settings.require_standard_rate("OneMax bounds")?;
            let from = settings.problem.from.unwrap_or(0);
            let to = settings.problem.to.unwrap_or(n);
            let b = onemax_bounds(n, from, to)?;
            bounds.extend(b.bound_results());
            fields.extend(object(&b)?);
        }
        BenchmarkKind::LeadingOnes => {
            let p = settings.p()?;
            let leave: Vec<f64> = (0..n).map(|i| (i as f64 * (-p).ln_1p()).exp() * p).collect();
            let exact = leadingones_exact(n, p)?;
            bounds.push(BoundResult::new(crate::bounds::Theorem::LeadingOnesExact, crate::bounds::BoundKind::Exact, exact));
            bounds.push(flm_upper_classic(&leave)?);
            let v: Vec<f64> = vec![0.5; n];
            bounds.push(flm_lower_visit(&leave, &v)?);
            fields.insert("p".into(), json!(p));
            fields.insert("exact".into(), json!(exact));
        }
        BenchmarkKind::Jump => {
            settings.require_standard_rate("Jump bounds")?;
            let k = settings.problem.k.ok_or_else(|| Error::InvalidParameter("--k is required".into()))?;
            let b = jump_bounds(n, k)?;
            bounds.push(b.bound_result(JumpInit::Arbitrary));
            bounds.push(b.bound_result(JumpInit::Random));
            fields.extend(object(&b)?);
        }
        BenchmarkKind::LongPath => {
            let k = settings.problem.k.ok_or_else(|| Error::InvalidParameter("--k is required".into()))?;
            let p = settings.p()?;
            bounds.push(longpath_lower_bound(n, k, p)?);
            bounds.push(longpath_reference_bound(n, k, p)?);
            fields.insert("k".into(), json!(k));
            fields.insert("p".into(), json!(p));
            fields.insert("m".into(), json!(longpath_m(n, k)));
            fields.insert("leave_prob".into(), json!(longpath_leave_prob(n, k, p)?));
            fields.insert("leave_prob_bound".into(), json!(longpath_leave_prob_bound(n, p)?));
            fields.insert("visit_lower".into(), json!(longpath_visit_lower(p)?));
        }
    }
    Ok((fields, bounds))
}

fn bounds_command(settings: &Settings, stdout: &mut dyn Write) -> Result<i32> {
    let (mut fields, bounds) = collect_bounds(settings)?;
    emit(settings, stdout, |w| match settings.format {
        Format::Json => {
            fields.insert("bounds".into(), serde_json::to_value(&bounds)?);
            write_json(&fields, w)
        }
        Format::Csv => write_csv(&bound_rows(&bounds), w),
    })?;
    Ok(EXIT_OK)
}

/// Exact values for the configured benchmark and start.
#[derive(Debug, Clone, Serialize)]
struct OracleOutput {
    method: &'static str,
    #[serde(flatten)]
    summary: ChainSummary,
    /// Visit probabilities of the canonical partition when the chain is finer.
    #[serde(skip_serializing_if = "Option::is_none")]
    canonical_v: Option<Vec<f64>>,
    #[serde(skip)]
    chain: Option<LevelChain>,
}

fn full_state_output(benchmark: &Benchmark, p: f64, start: FullStart) -> Result<OracleOutput> {
    let r = full_state_analysis(benchmark, p, &start, true)?;
    let top = benchmark.top_level();
    Ok(OracleOutput {
        method: "full-state",
        summary: ChainSummary {
            levels: top + 1,
            p: Vec::new(),
            q: r.visit_probs.iter().map(|v| 1.0 - v).collect(),
            v: r.visit_probs,
            expected_t: r.expected_time,
            expected_t_by_level: Vec::new(),
        },
        canonical_v: None,
        chain: None,
    })
}

fn chain_output(chain: LevelChain, canonical_v: Option<Vec<f64>>) -> Result<OracleOutput> {
    Ok(OracleOutput {
        method: "level-chain",
        summary: chain.summary()?,
        canonical_v,
        chain: Some(chain),
    })
}

fn oracle(settings: &Settings) -> Result<OracleOutput> {
    let kind = settings.benchmark()?;
    let n = settings.n()?;
    let p = settings.p()?;
    let benchmark = Benchmark::new(kind, n, settings.problem.k)?;
    let init = settings.init()?;
    let method = settings.problem.method.unwrap_or(Method::Auto);
    let full_start = || -> Result<FullStart> {
        match &init {
            InitSpec::Random => Ok(FullStart::Random),
            InitSpec::Zeros => Ok(FullStart::Point(crate::BitString::zeros(n))),
            InitSpec::Point(x) => Ok(FullStart::Point(x.clone())),
            InitSpec::Level(_) => Err(Error::InvalidParameter(
                "the full-state oracle needs a random or fixed-point start".into(),
            )),
        }
    };
    if method == Method::FullState {
        return full_state_output(&benchmark, p, full_start()?);
    }
    let point_level = |x: &crate::BitString| -> Result<usize> {
        if x.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: x.len() });
        }
        Ok(benchmark.level(x))
    };
    let k = benchmark.k().unwrap_or(0);
    let chain_start = match (kind, &init) {
        (_, InitSpec::Random) if kind != BenchmarkKind::LongPath => Some(StartMode::Random),
        (BenchmarkKind::OneMax, InitSpec::Zeros) => Some(StartMode::Level(0)),
        (BenchmarkKind::OneMax | BenchmarkKind::LeadingOnes, InitSpec::Level(l)) => Some(StartMode::Level(*l)),
        (BenchmarkKind::OneMax, InitSpec::Point(x)) => Some(StartMode::Level(point_level(x)?)),
        (BenchmarkKind::Jump, InitSpec::Zeros) => Some(StartMode::Level(jump_fine(n, k, 0))),
        (BenchmarkKind::Jump, InitSpec::Point(x)) => {
            point_level(x)?;
            Some(StartMode::Level(jump_fine(n, k, x.count_ones())))
        }
        // Gap level l holds the strings with n - l ones; level k + 1 is the optimum.
        (BenchmarkKind::Jump, InitSpec::Level(l)) if *l >= 1 && *l < k => Some(StartMode::Level(jump_fine(n, k, n - l))),
        (BenchmarkKind::Jump, InitSpec::Level(l)) if *l == k + 1 => Some(StartMode::Level(n)),
        (BenchmarkKind::LongPath, InitSpec::Zeros | InitSpec::Level(0)) => Some(StartMode::Level(0)),
        (BenchmarkKind::LongPath, InitSpec::Point(x)) if x.len() == n && x.count_ones() == 0 => {
            Some(StartMode::Level(0))
        }
        // Fixed LeadingOnes points have a non-uniform suffix and the Jump
        // plateau level is not a single chain state.
        _ => None,
    };
    let Some(start) = chain_start else {
        if method == Method::Chain || n > FULL_STATE_MAX_N {
            return Err(Error::InvalidParameter(format!(
                "no exact level chain for {kind} with init {init}; the full-state oracle needs n <= {FULL_STATE_MAX_N}"
            )));
        }
        return full_state_output(&benchmark, p, full_start()?);
    };
    match kind {
        BenchmarkKind::OneMax => chain_output(onemax_level_matrix(n, p, start)?, None),
        BenchmarkKind::LeadingOnes => chain_output(leadingones_level_matrix(n, p, start)?, None),
        BenchmarkKind::Jump => {
            let jump = jump_level_matrix(n, k, p, start)?;
            let coarse = jump.coarse_visit_probabilities()?;
            chain_output(jump.chain, Some(coarse))
        }
        BenchmarkKind::LongPath => {
            let path = match &benchmark {
                Benchmark::LongPath(path) => path.clone(),
                _ => unreachable!("benchmark kind checked above"),
            };
            chain_output(longpath_level_matrix(&path, p)?, None)
        }
    }
}

fn jump_fine(n: usize, k: usize, ones: usize) -> usize {
    if ones == n {
        n
    } else {
        (crate::benchmarks::jump_of_ones(n, k, ones) - 1) as usize
    }
}

#[derive(Serialize)]
struct OracleRow {
    level: usize,
    p: Option<f64>,
    v: f64,
    q: f64,
    expected_t_from_level: Option<f64>,
}

fn oracle_command(settings: &Settings, stdout: &mut dyn Write) -> Result<i32> {
    let out = oracle(settings)?;
    emit(settings, stdout, |w| match settings.format {
        Format::Json => write_json(&out, w),
        Format::Csv => {
            let s = &out.summary;
            let rows: Vec<OracleRow> = (0..s.v.len())
                .map(|i| OracleRow {
                    level: i,
                    p: s.p.get(i).copied(),
                    v: s.v[i],
                    q: s.q[i],
                    expected_t_from_level: s.expected_t_by_level.get(i).copied(),
                })
                .collect();
            write_csv(&rows, w)
        }
    })?;
    Ok(EXIT_OK)
}

fn simulate_command(settings: &Settings, stdout: &mut dyn Write) -> Result<i32> {
    let config = settings.experiment()?;
    let outcome = run_experiment(&config)?;
    match settings.format {
        Format::Json => emit(settings, stdout, |w| {
            write_json(
                &json!({
                    "config": config,
                    "statistics": outcome.statistics,
                    "replicates": outcome.records,
                }),
                w,
            )
        })?,
        Format::Csv => match &settings.out {
            Some(path) => {
                let mut w = BufWriter::new(File::create(path)?);
                write_replicates_csv(&outcome.records, &mut w)?;
                w.flush()?;
                let mut w = BufWriter::new(File::create(levels_path(path))?);
                write_levels_csv(&outcome.statistics.levels, &mut w)?;
                w.flush()?;
            }
            None => {
                write_replicates_csv(&outcome.records, &mut *stdout)?;
                writeln!(stdout)?;
                write_levels_csv(&outcome.statistics.levels, &mut *stdout)?;
            }
        },
    }
    Ok(EXIT_OK)
}

/// `<out>.levels.csv`, where the aggregate table goes next to `--out`.
pub fn levels_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".levels.csv");
    PathBuf::from(s)
}

/// Bounds, exact value and proven visit lower bounds that apply to the
/// simulated configuration.
type CompareInputs = (Vec<BoundResult>, Option<f64>, Option<Vec<f64>>);

fn compare_inputs(settings: &Settings) -> Result<CompareInputs> {
    let kind = settings.benchmark()?;
    let n = settings.n()?;
    let p = settings.p()?;
    let init = settings.init()?;
    let standard = (p * n as f64 - 1.0).abs() <= 1e-12;
    let exact_oracle = oracle(settings).ok();
    let exact = exact_oracle.as_ref().map(|o| o.summary.expected_t);
    let chain = exact_oracle.as_ref().and_then(|o| o.chain.clone());
    let mut bounds = Vec::new();
    let mut visit_lower = None;

    // Fitness-level bounds straight from the exact chain when it models the
    // canonical partition.
    if let (Some(chain), false) = (&chain, kind == BenchmarkKind::Jump) {
        let leave = chain.leave_probs();
        if leave.iter().all(|&q| q > 0.0) {
            bounds.push(flm_upper_classic(&leave)?);
            bounds.push(flm_lower_classic(&leave, chain.start())?);
        }
        visit_lower = Some(
            (0..chain.levels())
                .map(|i| visit_lower_from_chain(chain, i))
                .collect::<Result<Vec<_>>>()?,
        );
    }

    match kind {
        BenchmarkKind::OneMax => {
            if let (true, InitSpec::Level(k)) = (standard, &init) {
                if *k < n {
                    bounds.extend(onemax_bounds(n, *k, n)?.bound_results());
                }
            }
        }
        BenchmarkKind::LeadingOnes => {
            if init == InitSpec::Random {
                bounds.push(BoundResult::new(
                    crate::bounds::Theorem::LeadingOnesExact,
                    crate::bounds::BoundKind::Exact,
                    leadingones_exact(n, p)?,
                ));
            }
        }
        BenchmarkKind::Jump => {
            let k = settings.problem.k.unwrap_or(0);
            if standard && n >= 4 {
                let b = jump_bounds(n, k)?;
                let mode = if init == InitSpec::Random { JumpInit::Random } else { JumpInit::Arbitrary };
                let benchmark = Benchmark::jump(n, k)?;
                let optimal_start = matches!(&init, InitSpec::Point(x) if benchmark.is_optimum(x))
                    || init == InitSpec::Level(k + 1);
                if !optimal_start {
                    bounds.push(b.bound_result(mode));
                    let mut v = vec![0.0; k + 2];
                    v[k] = 1.0 - b.skip_bound(mode);
                    v[k + 1] = 1.0;
                    visit_lower = Some(v);
                }
            }
        }
        BenchmarkKind::LongPath => {
            let k = settings.problem.k.unwrap_or(0);
            if init == InitSpec::Zeros && p <= 0.5 {
                bounds.push(longpath_lower_bound(n, k, p)?);
                bounds.push(longpath_reference_bound(n, k, p)?);
            }
        }
    }
    Ok((bounds, exact, visit_lower))
}

#[derive(Serialize)]
struct ReportCsvRow<'a> {
    quantity: &'a str,
    empirical: Option<f64>,
    std_error: Option<f64>,
    theoretical: f64,
    verdict: String,
}

fn compare_command(settings: &Settings, stdout: &mut dyn Write) -> Result<i32> {
    let config = settings.experiment()?;
    let outcome = run_experiment(&config)?;
    let (bounds, exact, visit_lower) = compare_inputs(settings)?;
    let report: Report = compare_report(&outcome.statistics, &bounds, exact, visit_lower.as_deref())?;
    emit(settings, stdout, |w| match settings.format {
        Format::Json => write_json(
            &json!({
                "config": config,
                "statistics": outcome.statistics,
                "bounds": bounds,
                "exact": exact,
                "report": report,
                "verdict": report.verdict(),
            }),
            w,
        ),
        Format::Csv => {
            let rows: Vec<ReportCsvRow> = report
                .rows
                .iter()
                .map(|r| ReportCsvRow {
                    quantity: &r.quantity,
                    empirical: r.empirical,
                    std_error: r.std_error,
                    theoretical: r.theoretical,
                    verdict: r.verdict.to_string(),
                })
                .collect();
            write_csv(&rows, w)
        }
    })?;
    Ok(if report.verdict() == Verdict::Fail { EXIT_FAIL } else { EXIT_OK })
}

fn path_check_command(settings: &Settings, format: Option<Format>, stdout: &mut dyn Write) -> Result<i32> {
    let n = settings.n()?;
    let k = settings
        .problem
        .k
        .ok_or_else(|| Error::InvalidParameter("--k is required".into()))?;
    let path = build_long_k_path_capped(n, k, LONG_PATH_POINT_CAP)?;
    let check = path.verify(16);
    emit(settings, stdout, |w| match format {
        Some(Format::Json) => write_json(&json!({"check": check, "passed": check.passed()}), w),
        Some(Format::Csv) => {
            writeln!(w, "n,k,points,expected_points,violations,passed")?;
            writeln!(
                w,
                "{},{},{},{},{},{}",
                check.n,
                check.k,
                check.points,
                check.expected_points,
                check.violations.len(),
                check.passed()
            )?;
            Ok(())
        }
        None => {
            writeln!(w, "points={}", check.points)?;
            writeln!(w, "expected_points={}", check.expected_points)?;
            writeln!(w, "pairs_checked={}", check.pairs_checked)?;
            writeln!(w, "violations={}", check.violations.len())?;
            writeln!(w, "passed={}", check.passed())?;
            Ok(())
        }
    })?;
    Ok(if check.passed() { EXIT_OK } else { EXIT_INVALID })
}
