//! Monte Carlo harness: independent seeded replicates of the EA and their
//! aggregate statistics.
//!
//! Replicate `r` of an experiment with master seed `s` draws from a ChaCha8
//! stream keyed by [`replicate_key`]`(s, r)`. Replicates run on a rayon pool
//! and are merged in index order, so results do not depend on the number of
//! threads or on scheduling.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::benchmarks::{Benchmark, BenchmarkKind, LevelFunction};
use crate::bitstring::BitString;
use crate::ea::{run_ea, EaConfig, Init, LevelVisit, DEFAULT_MAX_ITERATIONS};
use crate::error::{check_probability, Error, Result};
use crate::numeric::compensated_sum;

/// Two-sided 99% standard normal quantile.
pub const Z_99: f64 = 2.575_829_303_548_901;

/// A mutation rate, either literal or `c/n` resolved once `n` is known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateSpec {
    Literal(f64),
    PerN(f64),
}

impl Default for RateSpec {
    fn default() -> Self {
        Self::PerN(1.0)
    }
}

impl RateSpec {
    pub fn resolve(self, n: usize) -> Result<f64> {
        let p = match self {
            Self::Literal(p) => p,
            Self::PerN(c) => c / n as f64,
        };
        check_probability(p, false)?;
        Ok(p)
    }
}

fn parse_rational(s: &str) -> Option<f64> {
    let value = match s.split_once('/') {
        Some((a, b)) => a.trim().parse::<f64>().ok()? / b.trim().parse::<f64>().ok()?,
        None => s.trim().parse().ok()?,
    };
    value.is_finite().then_some(value)
}

impl FromStr for RateSpec {
    type Err = Error;

    /// Accepts `0.05`, `1/20`, `c/n` with `c` a decimal or `a/b`, e.g. `3/2/n`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidParameter(format!("cannot parse mutation rate {s:?}"));
        if let Some(c) = s.strip_suffix("/n") {
            let c = if c.is_empty() { Some(1.0) } else { parse_rational(c) };
            c.filter(|c| *c > 0.0).map(Self::PerN).ok_or_else(bad)
        } else {
            parse_rational(s).map(Self::Literal).ok_or_else(bad)
        }
    }
}

impl fmt::Display for RateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Literal(p) => write!(f, "{p}"),
            Self::PerN(c) => write!(f, "{c}/n"),
        }
    }
}

impl Serialize for RateSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RateSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(p) => Ok(Self::Literal(p)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// How each replicate picks its first search point.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum InitSpec {
    #[default]
    Random,
    Zeros,
    Level(usize),
    Point(BitString),
}

impl InitSpec {
    pub fn to_init(&self, n: usize) -> Result<Init> {
        Ok(match self {
            Self::Random => Init::Random,
            Self::Zeros => Init::Point(BitString::zeros(n)),
            Self::Level(level) => Init::Level(*level),
            Self::Point(x) => {
                if x.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        actual: x.len(),
                    });
                }
                Init::Point(x.clone())
            }
        })
    }
}

impl FromStr for InitSpec {
    type Err = Error;

    /// `random`, `zeros`, `level:K` or `point:0101...`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Self::Random),
            "zeros" => Ok(Self::Zeros),
            _ => {
                if let Some(level) = s.strip_prefix("level:") {
                    level
                        .parse()
                        .map(Self::Level)
                        .map_err(|_| Error::InvalidParameter(format!("bad level in init {s:?}")))
                } else if let Some(point) = s.strip_prefix("point:") {
                    Ok(Self::Point(point.parse()?))
                } else {
                    Err(Error::InvalidParameter(format!(
                        "init must be random, zeros, level:K or point:BITS, got {s:?}"
                    )))
                }
            }
        }
    }
}

impl fmt::Display for InitSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Random => f.write_str("random"),
            Self::Zeros => f.write_str("zeros"),
            Self::Level(l) => write!(f, "level:{l}"),
            Self::Point(x) => write!(f, "point:{x}"),
        }
    }
}

impl Serialize for InitSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for InitSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub benchmark: BenchmarkKind,
    pub n: usize,
    pub k: Option<usize>,
    pub rate: RateSpec,
    pub replicates: u64,
    pub master_seed: u64,
    pub init: InitSpec,
    pub max_iterations: Option<u64>,
    /// Worker cap; `None` uses the global rayon pool. Never affects results.
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(benchmark: BenchmarkKind, n: usize, k: Option<usize>) -> Self {
        Self {
            benchmark,
            n,
            k,
            rate: RateSpec::default(),
            replicates: 100,
            master_seed: 0,
            init: InitSpec::Random,
            max_iterations: Some(DEFAULT_MAX_ITERATIONS),
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidParameter("replicates must be at least 1".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidParameter("threads must be at least 1".into()));
        }
        self.rate.resolve(self.n)?;
        Ok(())
    }
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 256-bit ChaCha key of replicate `r`: four SplitMix64 outputs of the
/// 128-bit input `(master_seed, r)`, word `w` being
/// `splitmix64(splitmix64(master_seed ^ w) ^ r)` in little-endian byte order.
pub fn replicate_key(master_seed: u64, replicate: u64) -> [u8; 32] {
    let mut key = [0u8; 32];
    for (w, chunk) in key.chunks_exact_mut(8).enumerate() {
        let word = splitmix64(splitmix64(master_seed ^ w as u64) ^ replicate);
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    key
}

pub fn replicate_rng(master_seed: u64, replicate: u64) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(replicate_key(master_seed, replicate))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub replicate: u64,
    pub runtime: u64,
    pub hit_optimum: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelStats {
    pub level: usize,
    /// Replicates that occupied the level.
    pub visits: u64,
    pub visit_freq: f64,
    pub visit_se: f64,
    /// Sojourns that ended with an improvement.
    pub leaves: u64,
    /// Iterations spent on the level over all replicates.
    pub iterations: u64,
    /// `leaves / iterations`; `None` when the level was never occupied for an iteration.
    pub leave_rate: Option<f64>,
    /// `iterations / visits`; `None` when never visited.
    pub mean_sojourn: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunStatistics {
    pub replicates: u64,
    pub timeouts: u64,
    pub mutation_rate: f64,
    /// Mean runtime; runs that hit the budget contribute the budget.
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
    pub ci99_low: f64,
    pub ci99_high: f64,
    pub levels: Vec<LevelStats>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub records: Vec<ReplicateRecord>,
    pub statistics: RunStatistics,
}

struct Replicate {
    record: ReplicateRecord,
    trace: Vec<LevelVisit>,
}

/// Runs every replicate and aggregates.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    config.validate()?;
    let benchmark = Benchmark::new(config.benchmark, config.n, config.k)?;
    let p = config.rate.resolve(config.n)?;
    let ea = EaConfig::new(config.n, p)?
        .with_seed(config.master_seed)
        .with_max_iterations(config.max_iterations);
    let init = config.init.to_init(config.n)?;
    if let Init::Level(level) = init {
        // Fail once up front instead of in every replicate.
        benchmark.sample_level(level, &mut replicate_rng(config.master_seed, 0))?;
    }

    let one = |r: u64| -> Result<Replicate> {
        let mut rng = replicate_rng(config.master_seed, r);
        let run = run_ea(&benchmark, &ea, &init, &mut rng, Some(&benchmark))?;
        Ok(Replicate {
            record: ReplicateRecord {
                replicate: r,
                runtime: run.runtime,
                hit_optimum: run.hit_optimum,
            },
            trace: run.level_trace,
        })
    };
    let runs: Vec<Replicate> = match config.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(|| (0..config.replicates).into_par_iter().map(one).collect::<Result<_>>())?,
        None => (0..config.replicates).into_par_iter().map(one).collect::<Result<_>>()?,
    };

    let statistics = aggregate(&runs, benchmark.top_level(), p);
    Ok(ExperimentOutcome {
        records: runs.into_iter().map(|r| r.record).collect(),
        statistics,
    })
}

/// Mean, unbiased sample variance and standard error of runtimes.
pub fn runtime_moments(runtimes: &[u64]) -> (f64, f64, f64) {
    let count = runtimes.len() as f64;
    let mean = compensated_sum(runtimes.iter().map(|&t| t as f64)) / count;
    let variance = if runtimes.len() > 1 {
        compensated_sum(runtimes.iter().map(|&t| (t as f64 - mean).powi(2))) / (count - 1.0)
    } else {
        0.0
    };
    (mean, variance, (variance / count).sqrt())
}

fn aggregate(runs: &[Replicate], top: usize, p: f64) -> RunStatistics {
    let runtimes: Vec<u64> = runs.iter().map(|r| r.record.runtime).collect();
    let (mean, variance, std_error) = runtime_moments(&runtimes);
    let count = runs.len() as u64;

    let mut visits = vec![0u64; top + 1];
    let mut leaves = vec![0u64; top + 1];
    let mut iterations = vec![0u64; top + 1];
    for run in runs {
        let last = run.trace.len().saturating_sub(1);
        for (idx, visit) in run.trace.iter().enumerate() {
            visits[visit.level] += 1;
            iterations[visit.level] += visit.iterations;
            if idx < last {
                leaves[visit.level] += 1;
            }
        }
    }
    let levels = (0..=top)
        .map(|level| {
            let freq = visits[level] as f64 / count as f64;
            LevelStats {
                level,
                visits: visits[level],
                visit_freq: freq,
                visit_se: (freq * (1.0 - freq) / count as f64).sqrt(),
                leaves: leaves[level],
                iterations: iterations[level],
                leave_rate: (iterations[level] > 0)
                    .then(|| leaves[level] as f64 / iterations[level] as f64),
                mean_sojourn: (visits[level] > 0)
                    .then(|| iterations[level] as f64 / visits[level] as f64),
            }
        })
        .collect();

    RunStatistics {
        replicates: count,
        timeouts: runs.iter().filter(|r| !r.record.hit_optimum).count() as u64,
        mutation_rate: p,
        mean,
        variance,
        std_error,
        ci99_low: mean - Z_99 * std_error,
        ci99_high: mean + Z_99 * std_error,
        levels,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_parsing() {
        assert_eq!("0.25".parse::<RateSpec>().unwrap(), RateSpec::Literal(0.25));
        assert_eq!("1/4".parse::<RateSpec>().unwrap(), RateSpec::Literal(0.25));
        assert_eq!("1/n".parse::<RateSpec>().unwrap(), RateSpec::PerN(1.0));
        assert_eq!("3/2/n".parse::<RateSpec>().unwrap(), RateSpec::PerN(1.5));
        assert_eq!("2/n".parse::<RateSpec>().unwrap().resolve(8).unwrap(), 0.25);
        assert!("x/n".parse::<RateSpec>().is_err());
        assert!("0/n".parse::<RateSpec>().is_err());
        assert!(RateSpec::Literal(1.0).resolve(5).is_err());
        assert!(RateSpec::PerN(2.0).resolve(2).is_err());
        let r: RateSpec = serde_json::from_str("0.5").unwrap();
        assert_eq!(r, RateSpec::Literal(0.5));
        let r: RateSpec = serde_json::from_str("\"2/n\"").unwrap();
        assert_eq!(r, RateSpec::PerN(2.0));
    }

    #[test]
    fn init_parsing() {
        assert_eq!("zeros".parse::<InitSpec>().unwrap(), InitSpec::Zeros);
        assert_eq!("level:3".parse::<InitSpec>().unwrap(), InitSpec::Level(3));
        assert_eq!("point:0101".parse::<InitSpec>().unwrap().to_string(), "point:0101");
        assert!("level:x".parse::<InitSpec>().is_err());
        assert!("somewhere".parse::<InitSpec>().is_err());
    }

    #[test]
    fn replicate_keys_differ() {
        let a = replicate_key(1, 0);
        assert_ne!(a, replicate_key(1, 1));
        assert_ne!(a, replicate_key(2, 0));
        assert_eq!(a, replicate_key(1, 0));
        // Published SplitMix64 test vector for seed 0.
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let mut config = ExperimentConfig::new(BenchmarkKind::LeadingOnes, 12, None);
        config.replicates = 64;
        config.master_seed = 5;
        config.threads = Some(1);
        let a = run_experiment(&config).unwrap();
        config.threads = Some(4);
        let b = run_experiment(&config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn statistics_are_consistent() {
        let mut config = ExperimentConfig::new(BenchmarkKind::OneMax, 10, None);
        config.replicates = 50;
        let out = run_experiment(&config).unwrap();
        let s = &out.statistics;
        assert_eq!(s.replicates, 50);
        assert_eq!(s.timeouts, 0);
        assert!(s.ci99_high - s.ci99_low > 0.0);
        assert_eq!(s.levels[10].visit_freq, 1.0);
        let iterations: u64 = s.levels.iter().map(|l| l.iterations).sum();
        let total: u64 = out.records.iter().map(|r| r.runtime).sum();
        assert_eq!(iterations, total);
        for l in &s.levels {
            assert!((0.0..=1.0).contains(&l.visit_freq));
        }
    }

    #[test]
    fn timeouts_are_counted() {
        let mut config = ExperimentConfig::new(BenchmarkKind::Jump, 20, Some(6));
        config.replicates = 4;
        config.init = InitSpec::Zeros;
        config.max_iterations = Some(200);
        let out = run_experiment(&config).unwrap();
        assert_eq!(out.statistics.timeouts, 4);
        assert!(out.records.iter().all(|r| r.runtime == 200 && !r.hit_optimum));
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut config = ExperimentConfig::new(BenchmarkKind::OneMax, 10, None);
        config.replicates = 0;
        assert!(run_experiment(&config).is_err());
        let mut config = ExperimentConfig::new(BenchmarkKind::Jump, 10, None);
        config.replicates = 1;
        assert!(run_experiment(&config).is_err());
        let mut config = ExperimentConfig::new(BenchmarkKind::OneMax, 10, None);
        config.init = InitSpec::Level(11);
        assert!(run_experiment(&config).is_err());
    }
}
