//! Exact Markov chains over fitness levels.
//!
//! A [`LevelChain`] is an upper-triangular row-stochastic matrix plus a start
//! distribution. For level-Markov processes (OneMax, the fine-grained Jump
//! partition, long paths) it is an exact model of the EA, and the quantities
//! computed here are the ground truth the bound calculators are checked
//! against.

use std::ops::RangeInclusive;

use serde::Serialize;

use crate::benchmarks::{jump_of_ones, LongKPath};
use crate::error::{check_probability, Error, Result};
use crate::numeric::{binomial_pmf, compensated_sum, ln_bernoulli_power, ln_binomial, ln_binomial_pmf, log_sum_exp};

const STOCHASTIC_TOL: f64 = 1e-12;

/// Largest long path for which [`longpath_level_matrix`] builds a dense chain.
pub const LONG_PATH_CHAIN_CAP: usize = 5_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LevelChain {
    transition: Vec<Vec<f64>>,
    start: Vec<f64>,
}

/// Where the level process starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartMode {
    /// Uniformly random initial search point.
    Random,
    /// Point mass at a level.
    Level(usize),
}

impl LevelChain {
    /// Validates row-stochasticity, upper-triangularity and the start distribution.
    pub fn new(transition: Vec<Vec<f64>>, start: Vec<f64>) -> Result<Self> {
        let levels = transition.len();
        if levels == 0 {
            return Err(Error::InvalidParameter("a level chain needs at least one level".into()));
        }
        if start.len() != levels {
            return Err(Error::DimensionMismatch {
                expected: levels,
                actual: start.len(),
            });
        }
        for (i, row) in transition.iter().enumerate() {
            if row.len() != levels {
                return Err(Error::DimensionMismatch {
                    expected: levels,
                    actual: row.len(),
                });
            }
            if let Some(j) = row[..i].iter().position(|&t| t != 0.0) {
                return Err(Error::InvalidDistribution(format!(
                    "T[{i}][{j}] = {} moves the level process down",
                    row[j]
                )));
            }
            if row.iter().any(|&t| !(0.0..=1.0).contains(&t)) {
                return Err(Error::InvalidDistribution(format!("row {i} has an entry outside [0, 1]")));
            }
            let sum = compensated_sum(row.iter().copied());
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::InvalidDistribution(format!("row {i} sums to {sum}")));
            }
        }
        check_distribution(&start)?;
        Ok(Self { transition, start })
    }

    /// Builds a chain from the strictly-upper entries of each row; the self
    /// loop absorbs the remaining mass. The top row must be empty.
    pub fn from_upper(upper: Vec<Vec<f64>>, start: Vec<f64>) -> Result<Self> {
        let levels = upper.len();
        let mut transition = Vec::with_capacity(levels);
        for (i, row) in upper.into_iter().enumerate() {
            if row.len() != levels {
                return Err(Error::DimensionMismatch {
                    expected: levels,
                    actual: row.len(),
                });
            }
            let mut full = row;
            full[..=i].iter_mut().for_each(|t| *t = 0.0);
            let leave = compensated_sum(full[i + 1..].iter().copied());
            if leave > 1.0 + STOCHASTIC_TOL {
                return Err(Error::InvalidDistribution(format!("row {i} leaves with mass {leave}")));
            }
            full[i] = (1.0 - leave).max(0.0);
            transition.push(full);
        }
        Self::new(transition, start)
    }

    pub fn levels(&self) -> usize {
        self.transition.len()
    }

    pub fn top(&self) -> usize {
        self.levels() - 1
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }

    pub fn start(&self) -> &[f64] {
        &self.start
    }

    pub fn with_start(&self, start: Vec<f64>) -> Result<Self> {
        Self::new(self.transition.clone(), start)
    }

    pub fn with_start_mode(&self, mode: StartMode) -> Result<Self> {
        match mode {
            StartMode::Level(level) => self.with_start(point_mass(self.levels(), level)?),
            StartMode::Random => Err(Error::InvalidParameter(
                "a random start depends on the benchmark; rebuild the chain instead".into(),
            )),
        }
    }

    /// Probability of leaving level `i` upwards in one iteration,
    /// accumulated from the off-diagonal entries.
    pub fn leave_probability(&self, i: usize) -> f64 {
        compensated_sum(self.transition[i][i + 1..].iter().copied())
    }

    /// Leave probabilities of every non-top level.
    pub fn leave_probs(&self) -> Vec<f64> {
        (0..self.top()).map(|i| self.leave_probability(i)).collect()
    }

    /// Mass of row `i` landing at or above `level`.
    pub fn mass_at_least(&self, i: usize, level: usize) -> f64 {
        compensated_sum(self.transition[i][level.max(i + 1)..].iter().copied())
    }

    /// Collapses every level `>= top` into a single absorbing top level, so
    /// hitting the new top means reaching level `top` or higher.
    pub fn truncated(&self, top: usize) -> Result<Self> {
        if top == 0 || top > self.top() {
            return Err(Error::InvalidParameter(format!(
                "truncation level {top} must lie in [1..{}]",
                self.top()
            )));
        }
        let upper = (0..=top)
            .map(|i| {
                let mut row = vec![0.0; top + 1];
                if i < top {
                    row[i + 1..top].copy_from_slice(&self.transition[i][i + 1..top]);
                    row[top] = self.mass_at_least(i, top);
                }
                row
            })
            .collect();
        let mut start = self.start[..top].to_vec();
        start.push(compensated_sum(self.start[top..].iter().copied()));
        Self::from_upper(upper, start)
    }

    pub fn summary(&self) -> Result<ChainSummary> {
        let v = visit_probabilities(self)?;
        let times = expected_hitting_time(self)?;
        Ok(ChainSummary {
            levels: self.levels(),
            p: self.leave_probs(),
            q: (0..self.levels())
                .map(|i| skip_probability(self, i..=i))
                .collect::<Result<_>>()?,
            v,
            expected_t: times.overall,
            expected_t_by_level: times.per_level,
        })
    }
}

/// Exact quantities of a level chain, as emitted by the `oracle` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainSummary {
    pub levels: usize,
    /// Leave probabilities of the non-top levels.
    pub p: Vec<f64>,
    pub v: Vec<f64>,
    pub q: Vec<f64>,
    #[serde(rename = "expected_T")]
    pub expected_t: f64,
    #[serde(rename = "expected_T_by_level")]
    pub expected_t_by_level: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HittingTime {
    /// Expected iterations to reach the top from each level.
    pub per_level: Vec<f64>,
    /// Expectation under the chain's start distribution.
    pub overall: f64,
}

fn check_distribution(dist: &[f64]) -> Result<()> {
    if dist.iter().any(|&d| !(0.0..=1.0).contains(&d)) {
        return Err(Error::InvalidDistribution("entry outside [0, 1]".into()));
    }
    let sum = compensated_sum(dist.iter().copied());
    if (sum - 1.0).abs() > STOCHASTIC_TOL {
        return Err(Error::InvalidDistribution(format!("distribution sums to {sum}")));
    }
    Ok(())
}

pub(crate) fn point_mass(levels: usize, level: usize) -> Result<Vec<f64>> {
    if level >= levels {
        return Err(Error::InvalidParameter(format!(
            "start level {level} outside [0..{}]",
            levels - 1
        )));
    }
    let mut start = vec![0.0; levels];
    start[level] = 1.0;
    Ok(start)
}

/// `ln` of the probability that standard bit mutation turns a string with
/// `from` ones into one with `to` ones: flip `a` of the zeros and `a - d`
/// of the ones, `d = to - from`.
pub fn ln_ones_transition(n: usize, p: f64, from: usize, to: usize) -> f64 {
    let (n64, k) = (n as u64, from as u64);
    let d = to as i64 - from as i64;
    let a_lo = d.max(0);
    let a_hi = ((n - from) as i64).min(from as i64 + d);
    if a_lo > a_hi {
        return f64::NEG_INFINITY;
    }
    log_sum_exp((a_lo..=a_hi).map(|a| {
        let b = (a - d) as u64;
        let a = a as u64;
        ln_binomial(n64 - k, a) + ln_binomial(k, b) + ln_bernoulli_power(p, a + b, n64 - a - b)
    }))
}

/// Probability that mutation with rate `p` moves a parent with `k` ones to an
/// offspring with `l` ones (either direction), assembled in log space.
pub fn onemax_transition_prob(n: usize, p: f64, k: usize, l: usize) -> Result<f64> {
    check_probability(p, true)?;
    if k > n || l > n {
        return Err(Error::InvalidParameter(format!(
            "ones counts k={k}, l={l} must lie in [0..{n}]"
        )));
    }
    Ok(ln_ones_transition(n, p, k, l).exp())
}

/// Distribution of the offspring's ones-count for a parent with `from` ones:
/// the convolution of the surviving ones and the newly set zeros.
fn ones_transition_row(n: usize, p: f64, from: usize) -> Vec<f64> {
    let lose = binomial_pmf(from as u64, p);
    let gain = binomial_pmf((n - from) as u64, p);
    let mut row = vec![0.0; n + 1];
    for (i, &pl) in lose.iter().enumerate() {
        if pl == 0.0 {
            continue;
        }
        for (j, &pg) in gain.iter().enumerate() {
            row[from - i + j] += pl * pg;
        }
    }
    row
}

fn binomial_start(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|i| ln_binomial_pmf(n as u64, 0.5, i as u64).exp())
        .collect()
}

/// The OneMax level chain: level = number of ones.
pub fn onemax_level_matrix(n: usize, p: f64, start: StartMode) -> Result<LevelChain> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    check_probability(p, false)?;
    let upper: Vec<Vec<f64>> = (0..=n)
        .map(|k| {
            let mut row = ones_transition_row(n, p, k);
            row[..=k].iter_mut().for_each(|t| *t = 0.0);
            row
        })
        .collect();
    let start = match start {
        StartMode::Random => binomial_start(n),
        StartMode::Level(k) => point_mass(n + 1, k)?,
    };
    LevelChain::from_upper(upper, start)
}

/// Probability that a parent with `i` ones produces a strictly better
/// offspring: more zeros flipped than ones. `O(n)` per level, so the OneMax
/// leave probabilities are available for `n` far beyond the dense chain.
pub fn onemax_leave_probability(n: usize, p: f64, i: usize) -> Result<f64> {
    check_probability(p, true)?;
    if i > n {
        return Err(Error::InvalidParameter(format!("level {i} outside [0..{n}]")));
    }
    let lose = binomial_pmf(i as u64, p);
    let gain = binomial_pmf((n - i) as u64, p);
    let mut below = 0.0;
    let mut terms = Vec::with_capacity(gain.len());
    for (a, &g) in gain.iter().enumerate().skip(1) {
        below += lose.get(a - 1).copied().unwrap_or(0.0);
        terms.push(g * below);
    }
    Ok(compensated_sum(terms))
}

/// The LeadingOnes level chain: level = number of leading ones.
///
/// Bits behind the first zero are uniform and stay uniform under mutation
/// and selection, so the level process is a Markov chain. From level `i` the
/// run improves with probability `(1-p)^i p` and then lands `j` further
/// levels up with probability `2^-(j+1)` (the rest of the mass on the top).
pub fn leadingones_level_matrix(n: usize, p: f64, start: StartMode) -> Result<LevelChain> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    check_probability(p, false)?;
    let upper: Vec<Vec<f64>> = (0..=n)
        .map(|i| {
            let mut row = vec![0.0; n + 1];
            if i < n {
                let leave = (i as f64 * (-p).ln_1p()).exp() * p;
                row[i + 1..].copy_from_slice(&suffix_levels(n - i - 1));
                row[i + 1..].iter_mut().for_each(|t| *t *= leave);
            }
            row
        })
        .collect();
    let start = match start {
        StartMode::Random => suffix_levels(n),
        StartMode::Level(level) => point_mass(n + 1, level)?,
    };
    LevelChain::from_upper(upper, start)
}

/// Distribution of the leading-ones count of `len` uniform bits.
fn suffix_levels(len: usize) -> Vec<f64> {
    let mut dist: Vec<f64> = (0..len).map(|j| 0.5f64.powi(j as i32 + 1)).collect();
    dist.push(0.5f64.powi(len as i32));
    dist
}

/// The Jump chain over ones-count classes, ordered by fitness.
///
/// Every ones-count class has its own fitness value, so the fine level of a
/// class is its rank by fitness: gap classes first, then the classes of the
/// non-gap region `N` in increasing ones-count, then the optimum.
#[derive(Debug, Clone)]
pub struct JumpChain {
    pub n: usize,
    pub k: usize,
    pub chain: LevelChain,
    /// Ones-count of each fine level.
    pub ones_of_level: Vec<usize>,
}

impl JumpChain {
    pub fn level_of_ones(&self, ones: usize) -> usize {
        jump_fine_level(self.n, self.k, ones)
    }

    /// Fine levels that make up the non-gap region `N`.
    pub fn non_gap_levels(&self) -> RangeInclusive<usize> {
        self.k - 1..=self.n - 1
    }

    /// Probability that no point of `N` is ever the parent.
    pub fn skip_non_gap(&self) -> Result<f64> {
        skip_probability(&self.chain, self.non_gap_levels())
    }

    /// Maps a fine level to the canonical coarse level: gap fitness `j` is
    /// level `j`, `N` is level `k`, the optimum is `k + 1`.
    pub fn coarse_level(&self, fine: usize) -> usize {
        if fine == self.n {
            self.k + 1
        } else if fine + 1 < self.k {
            fine + 1
        } else {
            self.k
        }
    }

    /// Visit probabilities aggregated onto the coarse partition.
    pub fn coarse_visit_probabilities(&self) -> Result<Vec<f64>> {
        let fine = visit_probabilities(&self.chain)?;
        let mut coarse: Vec<f64> = vec![0.0; self.k + 2];
        coarse[1..self.k].copy_from_slice(&fine[..self.k - 1]);
        coarse[self.k] = 1.0 - self.skip_non_gap()?;
        coarse[self.k + 1] = fine[self.n];
        Ok(coarse)
    }
}

fn jump_fine_level(n: usize, k: usize, ones: usize) -> usize {
    if ones == n {
        n
    } else {
        (jump_of_ones(n, k, ones) - 1) as usize
    }
}

pub fn jump_level_matrix(n: usize, k: usize, p: f64, start: StartMode) -> Result<JumpChain> {
    if k < 2 || k > n {
        return Err(Error::InvalidParameter(format!(
            "jump chain requires 2 <= k <= n, got n={n}, k={k}"
        )));
    }
    check_probability(p, false)?;
    let mut ones_of_level = vec![0; n + 1];
    for ones in 0..=n {
        ones_of_level[jump_fine_level(n, k, ones)] = ones;
    }
    let mut upper = vec![vec![0.0; n + 1]; n + 1];
    for from in 0..=n {
        let lf = jump_fine_level(n, k, from);
        if lf == n {
            continue;
        }
        for (to, &t) in ones_transition_row(n, p, from).iter().enumerate() {
            let lt = jump_fine_level(n, k, to);
            if lt > lf {
                upper[lf][lt] = t;
            }
        }
    }
    let start = match start {
        StartMode::Random => {
            let by_ones = binomial_start(n);
            let mut s = vec![0.0; n + 1];
            for (ones, &mass) in by_ones.iter().enumerate() {
                s[jump_fine_level(n, k, ones)] = mass;
            }
            s
        }
        StartMode::Level(level) => point_mass(n + 1, level)?,
    };
    Ok(JumpChain {
        n,
        k,
        chain: LevelChain::from_upper(upper, start)?,
        ones_of_level,
    })
}

/// Long-path chain for an EA started at the path's first point. Each path
/// point is its own level; off-path points are never accepted from the path.
pub fn longpath_level_matrix(path: &LongKPath, p: f64) -> Result<LevelChain> {
    check_probability(p, false)?;
    let points = path.points();
    if points.len() > LONG_PATH_CHAIN_CAP {
        return Err(Error::PathTooLarge {
            points: points.len() as u128,
            cap: LONG_PATH_CHAIN_CAP,
        });
    }
    let n = path.n() as u64;
    let by_distance: Vec<f64> = (0..=n)
        .map(|d| ln_bernoulli_power(p, d, n - d).exp())
        .collect();
    let upper = points
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let mut row = vec![0.0; points.len()];
            for (j, b) in points.iter().enumerate().skip(i + 1) {
                row[j] = by_distance[a.hamming_distance(b)];
            }
            row
        })
        .collect();
    LevelChain::from_upper(upper, point_mass(points.len(), 0)?)
}

/// Exact probability of ever occupying each level, by forward recursion over
/// the embedded jump chain. Each level is visited at most once, so
/// `v_i = start_i + sum_{j<i} v_j T[j][i] / p_j`.
pub fn visit_probabilities(chain: &LevelChain) -> Result<Vec<f64>> {
    let levels = chain.levels();
    let leave = chain.leave_probs();
    let mut v = chain.start.clone();
    for j in 0..chain.top() {
        if v[j] == 0.0 {
            continue;
        }
        if leave[j] == 0.0 {
            return Err(Error::AbsorbingLevel { level: j });
        }
        let w = v[j] / leave[j];
        for i in j + 1..levels {
            v[i] += w * chain.transition[j][i];
        }
    }
    Ok(v.into_iter().map(|x| x.clamp(0.0, 1.0)).collect())
}

/// Expected hitting time of the top level by backward recursion
/// `E_i = (1 + sum_{l>i} T[i][l] E_l) / p_i`, `E_top = 0`.
///
/// Levels that cannot leave and are never reached get an infinite time.
pub fn expected_hitting_time(chain: &LevelChain) -> Result<HittingTime> {
    let v = visit_probabilities(chain)?;
    let top = chain.top();
    let mut e = vec![0.0; chain.levels()];
    for i in (0..top).rev() {
        let p = chain.leave_probability(i);
        if p == 0.0 {
            e[i] = f64::INFINITY;
            continue;
        }
        let row = &chain.transition[i];
        let onward = compensated_sum(
            (i + 1..=top)
                .filter(|&l| row[l] != 0.0)
                .map(|l| row[l] * e[l]),
        );
        e[i] = (1.0 + onward) / p;
    }
    if let Some(level) = (0..top).find(|&i| v[i] > 0.0 && !e[i].is_finite()) {
        return Err(Error::AbsorbingLevel { level });
    }
    let overall = compensated_sum(
        chain
            .start
            .iter()
            .zip(&e)
            .filter(|(s, _)| **s > 0.0)
            .map(|(s, t)| s * t),
    );
    Ok(HittingTime {
        per_level: e,
        overall,
    })
}

/// Probability that no level of the contiguous `levels` range is ever
/// occupied: the process must start above it or jump over it.
pub fn skip_probability(chain: &LevelChain, levels: RangeInclusive<usize>) -> Result<f64> {
    let (lo, hi) = (*levels.start(), *levels.end());
    if lo > hi || hi > chain.top() {
        return Err(Error::InvalidParameter(format!(
            "level range {lo}..={hi} is not a contiguous range of [0..{}]",
            chain.top()
        )));
    }
    let v = visit_probabilities(chain)?;
    let jump_over = (0..lo).filter(|&j| v[j] > 0.0).map(|j| {
        v[j] * chain.mass_at_least(j, hi + 1) / chain.leave_probability(j)
    });
    let start_above = chain.start[hi + 1..].iter().copied();
    Ok(compensated_sum(jump_over.chain(start_above)).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn three_level() -> LevelChain {
        LevelChain::new(
            vec![
                vec![0.5, 0.25, 0.25],
                vec![0.0, 0.0, 1.0],
                vec![0.0, 0.0, 1.0],
            ],
            vec![1.0, 0.0, 0.0],
        )
        .unwrap()
    }

    #[test]
    fn transition_prob_examples() {
        assert_relative_eq!(onemax_transition_prob(2, 0.5, 0, 2).unwrap(), 0.25, epsilon = 1e-15);
        // From 10 or 01, reaching 11 needs exactly the zero flipped and the one kept.
        assert_relative_eq!(onemax_transition_prob(2, 0.5, 1, 2).unwrap(), 0.25, epsilon = 1e-15);
        assert!(onemax_transition_prob(2, 0.5, 3, 1).is_err());
        for k in 0..=20 {
            let total: f64 = (0..=20).map(|l| onemax_transition_prob(20, 0.05, k, l).unwrap()).sum();
            assert_relative_eq!(total, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn transition_prob_matches_flip_mask_enumeration() {
        let n = 6;
        let p = 0.3f64;
        for k in 0..=n {
            let mut by_target = vec![0.0; n + 1];
            for mask in 0..1u32 << n {
                let flips = mask.count_ones() as i32;
                let ones_flipped = (mask & ((1 << k) - 1)).count_ones() as usize;
                let target = k - ones_flipped + (flips as usize - ones_flipped);
                by_target[target] += p.powi(flips) * (1.0 - p).powi(n as i32 - flips);
            }
            for l in 0..=n {
                assert_relative_eq!(
                    onemax_transition_prob(n, p, k, l).unwrap(),
                    by_target[l],
                    epsilon = 1e-14
                );
            }
        }
    }

    #[test]
    fn log_space_survives_large_n() {
        for n in [1000usize, 5000] {
            let p = 1.0 / n as f64;
            for k in [0, n / 2, n - 1] {
                let up = onemax_transition_prob(n, p, k, k + 1).unwrap();
                assert!(up > 0.0 && up.is_finite());
                let one_bit = (n - k) as f64 / n as f64 * (1.0 - p).powi(n as i32 - 1);
                assert!(up >= one_bit * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn matrix_rows_agree_with_single_entries() {
        let chain = onemax_level_matrix(30, 1.0 / 30.0, StartMode::Random).unwrap();
        for k in 0..30 {
            for l in k + 1..=30 {
                let direct = onemax_transition_prob(30, 1.0 / 30.0, k, l).unwrap();
                assert_relative_eq!(chain.transition()[k][l], direct, max_relative = 1e-10, epsilon = 1e-300);
            }
        }
    }

    #[test]
    fn fast_leave_probability_matches_chain() {
        for (n, p) in [(1, 0.5), (7, 0.2), (40, 1.0 / 40.0)] {
            let chain = onemax_level_matrix(n, p, StartMode::Random).unwrap();
            for i in 0..=n {
                assert_relative_eq!(
                    onemax_leave_probability(n, p, i).unwrap(),
                    chain.leave_probability(i),
                    max_relative = 1e-12,
                    epsilon = 1e-300
                );
            }
        }
    }

    #[test]
    fn leadingones_chain_matches_full_state() {
        use crate::benchmarks::Benchmark;
        use crate::full_state::{full_state_analysis, FullStart};
        for n in 1..=7 {
            for p in [0.5, 1.0 / n as f64 * 0.9, 0.2] {
                let chain = leadingones_level_matrix(n, p, StartMode::Random).unwrap();
                let oracle = full_state_analysis(&Benchmark::leadingones(n).unwrap(), p, &FullStart::Random, true).unwrap();
                let e = expected_hitting_time(&chain).unwrap().overall;
                assert_relative_eq!(e, oracle.expected_time, max_relative = 1e-10);
                let v = visit_probabilities(&chain).unwrap();
                for (a, b) in v.iter().zip(&oracle.visit_probs) {
                    assert_relative_eq!(a, b, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn onemax_n1() {
        let chain = onemax_level_matrix(1, 0.5, StartMode::Level(0)).unwrap();
        assert_eq!(chain.transition()[0], vec![0.5, 0.5]);
    }

    #[test]
    fn rows_are_stochastic() {
        let chain = onemax_level_matrix(10, 0.1, StartMode::Random).unwrap();
        for row in chain.transition() {
            assert_relative_eq!(row.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        }
        let jump = jump_level_matrix(14, 3, 1.0 / 14.0, StartMode::Random).unwrap();
        for row in jump.chain.transition() {
            assert_relative_eq!(row.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn jump_acceptance_from_the_gap() {
        let jump = jump_level_matrix(4, 2, 0.25, StartMode::Random).unwrap();
        let from = jump.level_of_ones(3);
        assert_eq!(from, 0);
        let t = &jump.chain.transition()[from];
        assert!(t[jump.level_of_ones(4)] > 0.0);
        assert!(t[jump.level_of_ones(2)] > 0.0);
        assert_eq!(jump.coarse_level(from), 1);
        assert_eq!(jump.coarse_level(jump.level_of_ones(2)), 2);
        assert_eq!(jump.coarse_level(jump.level_of_ones(4)), 3);
        for (level, &ones) in jump.ones_of_level.iter().enumerate() {
            assert_eq!(jump.level_of_ones(ones), level);
        }
    }

    #[test]
    fn invalid_chains_rejected() {
        assert!(LevelChain::new(vec![vec![0.5, 0.4], vec![0.0, 1.0]], vec![1.0, 0.0]).is_err());
        assert!(LevelChain::new(vec![vec![0.5, 0.5], vec![0.1, 0.9]], vec![1.0, 0.0]).is_err());
        assert!(LevelChain::new(vec![vec![0.5, 0.5], vec![0.0, 1.0]], vec![0.5, 0.4]).is_err());
        assert!(jump_level_matrix(4, 1, 0.25, StartMode::Random).is_err());
    }

    #[test]
    fn three_level_hand_values() {
        let chain = three_level();
        let v = visit_probabilities(&chain).unwrap();
        assert_eq!(v, vec![1.0, 0.5, 1.0]);
        let e = expected_hitting_time(&chain).unwrap();
        assert_relative_eq!(e.overall, 2.5, epsilon = 1e-15);
        assert_relative_eq!(skip_probability(&chain, 1..=1).unwrap(), 0.5, epsilon = 1e-15);
        assert_eq!(skip_probability(&chain, 2..=2).unwrap(), 0.0);
        assert_eq!(skip_probability(&chain, 0..=1).unwrap(), 0.0);
    }

    #[test]
    fn start_at_top() {
        let chain = three_level().with_start(vec![0.0, 0.0, 1.0]).unwrap();
        assert_eq!(visit_probabilities(&chain).unwrap(), vec![0.0, 0.0, 1.0]);
        assert_eq!(expected_hitting_time(&chain).unwrap().overall, 0.0);
    }

    #[test]
    fn geometric_single_level() {
        let chain = LevelChain::from_upper(vec![vec![0.0, 0.25], vec![0.0, 0.0]], vec![1.0, 0.0]).unwrap();
        assert_eq!(expected_hitting_time(&chain).unwrap().overall, 4.0);
    }

    #[test]
    fn absorbing_level_is_an_error() {
        let chain = LevelChain::new(
            vec![vec![0.5, 0.5, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
            vec![1.0, 0.0, 0.0],
        )
        .unwrap();
        assert!(matches!(visit_probabilities(&chain), Err(Error::AbsorbingLevel { level: 1 })));
        assert!(expected_hitting_time(&chain).is_err());
    }

    #[test]
    #[allow(clippy::reversed_empty_ranges)]
    fn skip_range_validation() {
        let chain = three_level();
        assert!(skip_probability(&chain, 2..=1).is_err());
        assert!(skip_probability(&chain, 0..=3).is_err());
    }

    #[test]
    fn truncation_gives_fixed_target_times() {
        let chain = onemax_level_matrix(12, 1.0 / 12.0, StartMode::Level(3)).unwrap();
        let full = expected_hitting_time(&chain).unwrap();
        let cut = chain.truncated(12).unwrap();
        assert_relative_eq!(expected_hitting_time(&cut).unwrap().overall, full.overall, max_relative = 1e-13);
        let half = expected_hitting_time(&chain.truncated(6).unwrap()).unwrap().overall;
        assert!(half > 0.0 && half < full.overall);
        assert!(chain.truncated(0).is_err());
    }

    #[test]
    fn longpath_chain_small() {
        let path = crate::benchmarks::build_long_k_path(4, 2).unwrap();
        let chain = longpath_level_matrix(&path, 0.25).unwrap();
        assert_eq!(chain.levels(), 7);
        // From 0000 the next point 0001 is one flip away.
        assert_relative_eq!(chain.transition()[0][1], 0.25 * 0.75f64.powi(3), epsilon = 1e-15);
        let v = visit_probabilities(&chain).unwrap();
        assert_eq!(v[0], 1.0);
        assert_relative_eq!(v[6], 1.0, epsilon = 1e-12);
    }
}
