//! The (1+1) EA: standard bit mutation and elitist accept-if-not-worse selection.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::benchmarks::{Benchmark, LevelFunction};
use crate::bitstring::BitString;
use crate::error::{check_probability, Error, Result};

pub const DEFAULT_MAX_ITERATIONS: u64 = 1_000_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EaConfig {
    pub n: usize,
    pub mutation_rate: f64,
    /// `None` runs until the optimum is found.
    pub max_iterations: Option<u64>,
    pub seed: u64,
}

impl EaConfig {
    pub fn new(n: usize, mutation_rate: f64) -> Result<Self> {
        let config = Self {
            n,
            mutation_rate,
            max_iterations: Some(DEFAULT_MAX_ITERATIONS),
            seed: 0,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_iterations(mut self, max: Option<u64>) -> Self {
        self.max_iterations = max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if self.max_iterations == Some(0) {
            return Err(Error::InvalidParameter(
                "max_iterations must be positive".into(),
            ));
        }
        check_probability(self.mutation_rate, false)
    }

    /// The random stream the config's seed designates.
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// How the initial individual is chosen.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    /// Uniformly random bit string.
    Random,
    /// A uniformly random point of the given canonical level.
    Level(usize),
    /// A fixed search point.
    Point(BitString),
}

/// One entry of a level trace: a visited level and the iterations spent there.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelVisit {
    pub level: usize,
    pub iterations: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunResult {
    /// Mutate-and-select iterations executed before the current individual
    /// was first optimal (or before the budget ran out).
    pub runtime: u64,
    pub hit_optimum: bool,
    pub level_trace: Vec<LevelVisit>,
}

pub fn uniform_random_bitstring<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<BitString> {
    BitString::random(n, rng)
}

/// Standard bit mutation with rate `p`, sampled as a Binomial(n, p) flip
/// count followed by a uniform subset of that size.
#[derive(Debug, Clone)]
pub struct Mutation {
    n: usize,
    flips: Binomial,
}

impl Mutation {
    pub fn new(n: usize, p: f64) -> Result<Self> {
        check_probability(p, true)?;
        let flips = Binomial::new(n as u64, p)
            .map_err(|e| Error::InvalidParameter(format!("binomial flip count: {e}")))?;
        Ok(Self { n, flips })
    }

    /// Flips a random set of bits of `x` in place; returns the flip count.
    pub fn mutate_in_place<R: Rng + ?Sized>(&self, x: &mut BitString, rng: &mut R) -> usize {
        debug_assert_eq!(x.len(), self.n);
        let count = self.flips.sample(rng) as usize;
        if count > 0 {
            for i in index::sample(rng, self.n, count) {
                x.flip(i);
            }
        }
        count
    }
}

pub fn standard_bit_mutation<R: Rng + ?Sized>(
    x: &BitString,
    p: f64,
    rng: &mut R,
) -> Result<BitString> {
    let mutation = Mutation::new(x.len(), p)?;
    let mut y = x.clone();
    mutation.mutate_in_place(&mut y, rng);
    Ok(y)
}

/// Runs the EA until the optimum predicate holds or the budget is spent.
pub fn run_ea<R: Rng + ?Sized>(
    benchmark: &Benchmark,
    config: &EaConfig,
    init: &Init,
    rng: &mut R,
    level_fn: Option<&dyn LevelFunction>,
) -> Result<RunResult> {
    run_ea_observed(benchmark, config, init, rng, level_fn, |_, _, _| {})
}

/// As [`run_ea`], calling `observer(iteration, current, fitness)` once for the
/// initial individual (iteration 0) and after every iteration.
pub fn run_ea_observed<R, F>(
    benchmark: &Benchmark,
    config: &EaConfig,
    init: &Init,
    rng: &mut R,
    level_fn: Option<&dyn LevelFunction>,
    mut observer: F,
) -> Result<RunResult>
where
    R: Rng + ?Sized,
    F: FnMut(u64, &BitString, i64),
{
    config.validate()?;
    if benchmark.n() != config.n {
        return Err(Error::DimensionMismatch {
            expected: benchmark.n(),
            actual: config.n,
        });
    }
    let mut x = match init {
        Init::Random => uniform_random_bitstring(config.n, rng)?,
        Init::Level(level) => benchmark.sample_level(*level, rng)?,
        Init::Point(point) => {
            if point.len() != config.n {
                return Err(Error::DimensionMismatch {
                    expected: config.n,
                    actual: point.len(),
                });
            }
            point.clone()
        }
    };
    let mutation = Mutation::new(config.n, config.mutation_rate)?;
    let budget = config.max_iterations.unwrap_or(u64::MAX);

    let mut fx = benchmark.fitness(&x);
    let mut trace = Vec::new();
    let mut level = level_fn.map(|l| l.level(&x));
    if let Some(level) = level {
        trace.push(LevelVisit {
            level,
            iterations: 0,
        });
    }
    observer(0, &x, fx);

    let mut t = 0u64;
    let mut hit = benchmark.is_optimum(&x);
    let mut y = x.clone();
    while !hit && t < budget {
        t += 1;
        if let Some(last) = trace.last_mut() {
            last.iterations += 1;
        }
        y.clone_from(&x);
        // A zero-flip offspring equals its parent and is accepted as a tie.
        if mutation.mutate_in_place(&mut y, rng) > 0 {
            let fy = benchmark.fitness(&y);
            if fy >= fx {
                std::mem::swap(&mut x, &mut y);
                fx = fy;
                hit = benchmark.is_optimum(&x);
                if let (Some(lf), Some(current)) = (level_fn, level.as_mut()) {
                    let next = lf.level(&x);
                    if next != *current {
                        debug_assert!(next > *current, "level process decreased");
                        *current = next;
                        trace.push(LevelVisit {
                            level: next,
                            iterations: 0,
                        });
                    }
                }
            }
        }
        observer(t, &x, fx);
    }

    Ok(RunResult {
        runtime: t,
        hit_optimum: hit,
        level_trace: trace,
    })
}
