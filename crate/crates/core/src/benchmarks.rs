//! Benchmark fitness functions and their canonical fitness-level partitions.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bitstring::BitString;
use crate::error::{Error, Result};
use crate::numeric::ln_binomial;

/// Largest long path we are willing to materialize.
pub const LONG_PATH_POINT_CAP: usize = 1_000_000;

pub fn onemax(x: &BitString) -> i64 {
    x.count_ones() as i64
}

pub fn leadingones(x: &BitString) -> i64 {
    x.leading_ones() as i64
}

/// Jump function with gap size `k`: `|x|+k` outside the gap and at the
/// optimum, `n-|x|` inside the gap `[n-k+1 .. n-1]`.
pub fn jump_fitness(x: &BitString, k: usize) -> Result<i64> {
    let n = x.len();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "jump size k={k} must lie in [1..{n}]"
        )));
    }
    Ok(jump_of_ones(n, k, x.count_ones()))
}

pub(crate) fn jump_of_ones(n: usize, k: usize, ones: usize) -> i64 {
    if ones <= n - k || ones == n {
        (ones + k) as i64
    } else {
        (n - ones) as i64
    }
}

/// Maps a search point to its fitness level.
pub trait LevelFunction {
    fn level(&self, x: &BitString) -> usize;
    /// Index of the top level; levels are `0..=top_level()`.
    fn top_level(&self) -> usize;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchmarkKind {
    OneMax,
    LeadingOnes,
    Jump,
    LongPath,
}

impl fmt::Display for BenchmarkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::OneMax => "onemax",
            Self::LeadingOnes => "leadingones",
            Self::Jump => "jump",
            Self::LongPath => "longpath",
        })
    }
}

impl FromStr for BenchmarkKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "onemax" | "om" => Ok(Self::OneMax),
            "leadingones" | "lo" => Ok(Self::LeadingOnes),
            "jump" => Ok(Self::Jump),
            "longpath" | "long-path" => Ok(Self::LongPath),
            other => Err(Error::InvalidParameter(format!(
                "unknown benchmark kind {other:?}"
            ))),
        }
    }
}

/// A fitness function together with its optimum predicate and canonical
/// level partition. Immutable once built.
#[derive(Debug, Clone)]
pub enum Benchmark {
    OneMax { n: usize },
    LeadingOnes { n: usize },
    Jump { n: usize, k: usize },
    LongPath(Arc<LongKPath>),
}

impl Benchmark {
    pub fn onemax(n: usize) -> Result<Self> {
        check_dimension(n)?;
        Ok(Self::OneMax { n })
    }

    pub fn leadingones(n: usize) -> Result<Self> {
        check_dimension(n)?;
        Ok(Self::LeadingOnes { n })
    }

    pub fn jump(n: usize, k: usize) -> Result<Self> {
        check_dimension(n)?;
        if k == 0 || k > n {
            return Err(Error::InvalidParameter(format!(
                "jump size k={k} must lie in [1..{n}]"
            )));
        }
        Ok(Self::Jump { n, k })
    }

    pub fn long_path(n: usize, k: usize) -> Result<Self> {
        Ok(Self::LongPath(Arc::new(build_long_k_path(n, k)?)))
    }

    /// Builds the benchmark for `kind`; `k` is required for jump and long path.
    pub fn new(kind: BenchmarkKind, n: usize, k: Option<usize>) -> Result<Self> {
        let need_k = || {
            k.ok_or_else(|| Error::InvalidParameter(format!("{kind} requires a parameter k")))
        };
        match kind {
            BenchmarkKind::OneMax => Self::onemax(n),
            BenchmarkKind::LeadingOnes => Self::leadingones(n),
            BenchmarkKind::Jump => Self::jump(n, need_k()?),
            BenchmarkKind::LongPath => Self::long_path(n, need_k()?),
        }
    }

    pub fn kind(&self) -> BenchmarkKind {
        match self {
            Self::OneMax { .. } => BenchmarkKind::OneMax,
            Self::LeadingOnes { .. } => BenchmarkKind::LeadingOnes,
            Self::Jump { .. } => BenchmarkKind::Jump,
            Self::LongPath(_) => BenchmarkKind::LongPath,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Self::OneMax { n } | Self::LeadingOnes { n } | Self::Jump { n, .. } => *n,
            Self::LongPath(path) => path.n(),
        }
    }

    pub fn k(&self) -> Option<usize> {
        match self {
            Self::Jump { k, .. } => Some(*k),
            Self::LongPath(path) => Some(path.k()),
            _ => None,
        }
    }

    pub fn fitness(&self, x: &BitString) -> i64 {
        debug_assert_eq!(x.len(), self.n());
        match self {
            Self::OneMax { .. } => onemax(x),
            Self::LeadingOnes { .. } => leadingones(x),
            Self::Jump { n, k } => jump_of_ones(*n, *k, x.count_ones()),
            Self::LongPath(path) => long_path_fitness(path, x),
        }
    }

    pub fn is_optimum(&self, x: &BitString) -> bool {
        match self {
            Self::OneMax { n } | Self::LeadingOnes { n } | Self::Jump { n, .. } => {
                x.count_ones() == *n
            }
            Self::LongPath(path) => path.index_of(x) == Some(path.m()),
        }
    }

    /// Draws a uniformly random point of canonical level `level`.
    pub fn sample_level<R: Rng + ?Sized>(&self, level: usize, rng: &mut R) -> Result<BitString> {
        let top = self.top_level();
        if level > top {
            return Err(Error::InvalidParameter(format!(
                "level {level} exceeds top level {top}"
            )));
        }
        let n = self.n();
        match self {
            Self::OneMax { .. } => Ok(with_ones(n, level, rng)),
            Self::LeadingOnes { .. } => {
                let mut x = BitString::random(n, rng)?;
                for i in 0..level {
                    x.set(i, true);
                }
                if level < n {
                    x.set(level, false);
                }
                Ok(x)
            }
            Self::Jump { k, .. } => {
                let k = *k;
                if level == 0 {
                    Err(Error::InvalidParameter(
                        "jump level 0 is empty in the canonical partition".into(),
                    ))
                } else if level < k {
                    Ok(with_ones(n, n - level, rng))
                } else if level == k {
                    // ones-count in [0..n-k], weighted by class size
                    let weights: Vec<f64> = (0..=n - k)
                        .map(|a| (ln_binomial(n as u64, a as u64) - ln_binomial(n as u64, (n / 2) as u64)).exp())
                        .collect();
                    let dist = WeightedIndex::new(&weights)
                        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
                    Ok(with_ones(n, dist.sample(rng), rng))
                } else {
                    Ok(BitString::ones(n))
                }
            }
            Self::LongPath(path) => Ok(path.points()[level].clone()),
        }
    }
}

impl LevelFunction for Benchmark {
    /// OneMax and LeadingOnes: level = fitness. Jump: gap fitness `j` is
    /// level `j`, every non-gap non-optimal point is level `k`, the optimum is
    /// level `k+1` (level 0 is empty). Long path: path index, with off-path
    /// points sharing level 0 with the path start.
    fn level(&self, x: &BitString) -> usize {
        match self {
            Self::OneMax { .. } | Self::LeadingOnes { .. } => self.fitness(x) as usize,
            Self::Jump { n, k } => {
                let ones = x.count_ones();
                if ones == *n {
                    k + 1
                } else if ones > n - k {
                    n - ones
                } else {
                    *k
                }
            }
            Self::LongPath(path) => path.index_of(x).unwrap_or(0),
        }
    }

    fn top_level(&self) -> usize {
        match self {
            Self::OneMax { n } | Self::LeadingOnes { n } => *n,
            Self::Jump { k, .. } => k + 1,
            Self::LongPath(path) => path.m(),
        }
    }
}

/// The canonical level partition for a benchmark configuration.
pub fn canonical_levels(
    kind: BenchmarkKind,
    n: usize,
    k: Option<usize>,
) -> Result<Box<dyn LevelFunction + Send + Sync>> {
    Ok(Box::new(Benchmark::new(kind, n, k)?))
}

fn check_dimension(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidParameter("dimension n must be at least 1".into()))
    } else {
        Ok(())
    }
}

fn with_ones<R: Rng + ?Sized>(n: usize, ones: usize, rng: &mut R) -> BitString {
    let mut x = BitString::zeros(n);
    for i in index::sample(rng, n, ones) {
        x.set(i, true);
    }
    x
}

/// An explicit long k-path: an ordered list of points starting at `0^n`
/// where the `i`-th successor of any point is at Hamming distance exactly
/// `i` for `i < k` and at least `k` otherwise.
#[derive(Debug, Clone)]
pub struct LongKPath {
    n: usize,
    k: usize,
    points: Vec<BitString>,
    index: HashMap<BitString, usize>,
}

/// Number of points of the long k-path in dimension `n`: `k*2^(n/k) - k + 1`.
pub fn long_path_len(n: usize, k: usize) -> Option<u128> {
    let blocks = u32::try_from(n / k).ok()?;
    let pow = 1u128.checked_shl(blocks).filter(|_| blocks < 127)?;
    (k as u128).checked_mul(pow).map(|v| v - k as u128 + 1)
}

/// Builds the long k-path recursively: the path in dimension `d` is the
/// dimension `d-k` path prefixed with `0^k`, then `k-1` bridge points
/// `0^(k-j) 1^j` on the last point, then the reversed path prefixed with `1^k`.
pub fn build_long_k_path(n: usize, k: usize) -> Result<LongKPath> {
    build_long_k_path_capped(n, k, LONG_PATH_POINT_CAP)
}

pub fn build_long_k_path_capped(n: usize, k: usize, cap: usize) -> Result<LongKPath> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "long path requires k >= 2, got k={k}"
        )));
    }
    if n == 0 || !n.is_multiple_of(k) {
        return Err(Error::InvalidParameter(format!(
            "long path requires k | n, got n={n}, k={k}"
        )));
    }
    let expected = long_path_len(n, k).unwrap_or(u128::MAX);
    if expected > cap as u128 {
        return Err(Error::PathTooLarge {
            points: expected,
            cap,
        });
    }

    let mut path = vec![BitString::zeros(0)];
    for _ in 0..n / k {
        let zeros = BitString::zeros(k);
        let ones = BitString::ones(k);
        let last = path.last().expect("path is never empty").clone();
        let mut next = Vec::with_capacity(2 * path.len() + k - 1);
        next.extend(path.iter().map(|p| zeros.concat(p)));
        for j in 1..k {
            let mut bridge = BitString::zeros(k);
            for b in k - j..k {
                bridge.set(b, true);
            }
            next.push(bridge.concat(&last));
        }
        next.extend(path.iter().rev().map(|p| ones.concat(p)));
        path = next;
    }
    debug_assert_eq!(path.len() as u128, expected);

    let index = path
        .iter()
        .enumerate()
        .map(|(i, p)| (p.clone(), i))
        .collect();
    Ok(LongKPath {
        n,
        k,
        points: path,
        index,
    })
}

/// Path index of `x` (0 for the all-zero start, up to `m`), or -1 off the path.
pub fn long_path_fitness(path: &LongKPath, x: &BitString) -> i64 {
    path.index_of(x).map_or(-1, |i| i as i64)
}

/// A violated long-path property found by [`LongKPath::verify`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathViolation {
    pub from: usize,
    pub ahead: usize,
    pub distance: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PathCheck {
    pub n: usize,
    pub k: usize,
    pub points: usize,
    pub expected_points: u128,
    pub starts_at_zero: bool,
    pub distinct: bool,
    pub pairs_checked: u64,
    pub violations: Vec<PathViolation>,
}

impl PathCheck {
    pub fn passed(&self) -> bool {
        self.points as u128 == self.expected_points
            && self.starts_at_zero
            && self.distinct
            && self.violations.is_empty()
    }
}

impl LongKPath {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of positive-fitness points, `k*2^(n/k) - k`.
    pub fn m(&self) -> usize {
        self.points.len() - 1
    }

    pub fn points(&self) -> &[BitString] {
        &self.points
    }

    pub fn index_of(&self, x: &BitString) -> Option<usize> {
        self.index.get(x).copied()
    }

    /// Exhaustively checks every pair of points against the distance
    /// properties. Quadratic in the path length; at most `max_violations`
    /// offending pairs are recorded.
    pub fn verify(&self, max_violations: usize) -> PathCheck {
        let mut violations = Vec::new();
        let mut pairs = 0u64;
        for (i, a) in self.points.iter().enumerate() {
            for (ahead, b) in self.points[i + 1..].iter().enumerate().map(|(d, b)| (d + 1, b)) {
                pairs += 1;
                let d = a.hamming_distance(b);
                let ok = if ahead < self.k { d == ahead } else { d >= self.k };
                if !ok && violations.len() < max_violations {
                    violations.push(PathViolation {
                        from: i,
                        ahead,
                        distance: d,
                    });
                }
            }
        }
        PathCheck {
            n: self.n,
            k: self.k,
            points: self.points.len(),
            expected_points: long_path_len(self.n, self.k).unwrap_or(u128::MAX),
            starts_at_zero: self.points[0] == BitString::zeros(self.n),
            distinct: self.index.len() == self.points.len(),
            pairs_checked: pairs,
            violations,
        }
    }
}
