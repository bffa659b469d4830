//! Brute-force oracle over the full search space `{0,1}^n`.
//!
//! Builds the accepted-move Markov chain of the EA on every search point
//! and solves for expected hitting times and level visit probabilities.
//! Accepted moves never decrease fitness, so the system is block upper
//! triangular by fitness class: classes are solved top-down, each by a dense
//! LU factorization of its within-class block.

use nalgebra::DMatrix;

use crate::benchmarks::{Benchmark, LevelFunction};
use crate::bitstring::BitString;
use crate::error::{check_probability, Error, Result};
use crate::numeric::{compensated_sum, ln_bernoulli_power};

pub const FULL_STATE_MAX_N: usize = 14;
/// Largest within-class block solved densely.
pub const FULL_STATE_MAX_CLASS: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FullStart {
    Random,
    Point(BitString),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FullStateResult {
    pub expected_time: f64,
    /// Probability of ever occupying each canonical level (empty unless requested).
    pub visit_probs: Vec<f64>,
}

/// Expected optimization time of the EA on `benchmark` with rate `p`.
pub fn full_state_expected_time(benchmark: &Benchmark, p: f64, start: &FullStart) -> Result<f64> {
    Ok(full_state_analysis(benchmark, p, start, false)?.expected_time)
}

/// Expected time and, when `with_visits`, the per-level visit probabilities
/// of the canonical partition from first-passage systems: for each level
/// `i`, `h_i(x)` is the probability that the first point at level `>= i`
/// reached from `x` lies exactly on level `i`.
pub fn full_state_analysis(
    benchmark: &Benchmark,
    p: f64,
    start: &FullStart,
    with_visits: bool,
) -> Result<FullStateResult> {
    let n = benchmark.n();
    if n > FULL_STATE_MAX_N {
        return Err(Error::StateSpaceTooLarge {
            n,
            cap: FULL_STATE_MAX_N,
        });
    }
    check_probability(p, false)?;
    let states = 1usize << n;
    let points: Vec<BitString> = (0..states as u64).map(|v| BitString::from_index(v, n)).collect();
    let fitness: Vec<i64> = points.iter().map(|x| benchmark.fitness(x)).collect();
    let level: Vec<usize> = points.iter().map(|x| benchmark.level(x)).collect();
    let optimal: Vec<bool> = points.iter().map(|x| benchmark.is_optimum(x)).collect();
    let top = benchmark.top_level();

    let by_distance: Vec<f64> = (0..=n as u64)
        .map(|d| ln_bernoulli_power(p, d, n as u64 - d).exp())
        .collect();

    // Unknown vectors: column 0 is the hitting time, column 1 + i is h_i.
    let columns = if with_visits { top + 2 } else { 1 };
    let mut values = vec![vec![0.0f64; states]; columns];
    let mut solved = vec![false; states];
    for s in (0..states).filter(|&s| optimal[s]) {
        solved[s] = true;
        if with_visits {
            values[1 + level[s]][s] = 1.0;
        }
    }

    let mut classes: Vec<i64> = fitness.clone();
    classes.sort_unstable();
    classes.dedup();
    for (class_index, &f) in classes.iter().enumerate().rev() {
        let members: Vec<usize> = (0..states).filter(|&s| fitness[s] == f && !optimal[s]).collect();
        if members.is_empty() {
            continue;
        }
        if members.len() > FULL_STATE_MAX_CLASS {
            return Err(Error::StateSpaceTooLarge {
                n,
                cap: FULL_STATE_MAX_N,
            });
        }
        let class_level = level[members[0]];
        let mut position = vec![usize::MAX; states];
        for (r, &s) in members.iter().enumerate() {
            position[s] = r;
        }

        let size = members.len();
        let mut system = DMatrix::<f64>::identity(size, size);
        let mut rhs = DMatrix::<f64>::zeros(size, columns);
        for (r, &x) in members.iter().enumerate() {
            let mut stay = 0.0;
            let mut onward = vec![Vec::new(); columns];
            for y in 0..states {
                let prob = by_distance[(x ^ y).count_ones() as usize];
                if fitness[y] < f {
                    stay += prob;
                } else if solved[y] {
                    for (c, acc) in onward.iter_mut().enumerate() {
                        let val = values[c][y];
                        if val != 0.0 {
                            acc.push(prob * val);
                        }
                    }
                } else {
                    debug_assert_eq!(fitness[y], f);
                    system[(r, position[y])] -= prob;
                }
            }
            system[(r, r)] -= stay;
            for (c, acc) in onward.into_iter().enumerate() {
                rhs[(r, c)] = compensated_sum(acc);
            }
            rhs[(r, 0)] += 1.0;
        }
        let solution = system
            .lu()
            .solve(&rhs)
            .ok_or(Error::SingularSystem { class: class_index })?;
        for (r, &s) in members.iter().enumerate() {
            values[0][s] = solution[(r, 0)];
            if with_visits {
                for i in 0..=top {
                    values[1 + i][s] = match i.cmp(&class_level) {
                        std::cmp::Ordering::Less => 0.0,
                        std::cmp::Ordering::Equal => 1.0,
                        std::cmp::Ordering::Greater => solution[(r, 1 + i)],
                    };
                }
            }
            solved[s] = true;
        }
    }

    let weights: Vec<(usize, f64)> = match start {
        FullStart::Random => (0..states).map(|s| (s, 1.0 / states as f64)).collect(),
        FullStart::Point(x) => {
            if x.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: x.len(),
                });
            }
            vec![(x.to_index() as usize, 1.0)]
        }
    };
    let expected_time = compensated_sum(weights.iter().map(|&(s, w)| w * values[0][s]));
    let visit_probs = if with_visits {
        (0..=top)
            .map(|i| compensated_sum(weights.iter().map(|&(s, w)| w * values[1 + i][s])))
            .collect()
    } else {
        Vec::new()
    };
    Ok(FullStateResult {
        expected_time,
        visit_probs,
    })
}
