//! Explicit per-benchmark runtime formulas.
//!
//! OneMax quantities use mutation rate `1/n` throughout. Anything that can
//! underflow is assembled in log space.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::bounds::{BoundKind, BoundResult, Theorem};
use crate::error::{check_probability, Error, Result};
use crate::level_chain::onemax_leave_probability;
use crate::numeric::compensated_sum;

/// `e_n = (1 - 1/n)^(-(n-1))`, with `e_1 = 1`.
pub fn e_n_factor(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if n == 1 {
        return Ok(1.0);
    }
    let nf = n as f64;
    Ok((-(nf - 1.0) * (-1.0 / nf).ln_1p()).exp())
}

/// Exact expected optimization time on LeadingOnes from a random start:
/// `1/2 * sum_{i<n} 1/((1-p)^i p) = (1-p) ((1-p)^(-n) - 1) / (2 p^2)`.
pub fn leadingones_exact(n: usize, p: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    check_probability(p, false)?;
    let growth = (-(n as f64) * (-p).ln_1p()).exp_m1();
    Ok((1.0 - p) * growth / (2.0 * p * p))
}

/// Term-by-term form of [`leadingones_exact`].
pub fn leadingones_exact_sum(n: usize, p: f64) -> Result<f64> {
    check_probability(p, false)?;
    Ok(0.5 * compensated_sum((0..n).map(|i| 1.0 / ((1.0 - p).powi(i as i32) * p))))
}

pub fn leadingones_bound(n: usize, p: f64) -> Result<BoundResult> {
    Ok(BoundResult::new(Theorem::LeadingOnesExact, BoundKind::Exact, leadingones_exact(n, p)?))
}

/// Bound on the probability that a OneMax run at rate `1/n` never has a
/// parent with exactly `i` ones, from any start below `i`:
/// `(n - i) / (n (1 - 1/n)^(i-1))`, clamped to `[0, 1]`.
pub fn onemax_skip_bound(n: usize, i: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n must be at least 2, got {n}")));
    }
    if i == 0 || i > n {
        return Err(Error::InvalidParameter(format!("level i={i} outside [1..{n}]")));
    }
    let nf = n as f64;
    let survive = ((i - 1) as f64 * (-1.0 / nf).ln_1p()).exp();
    Ok(((n - i) as f64 / (nf * survive)).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OneMaxBounds {
    pub n: usize,
    /// Start fitness.
    pub k: usize,
    /// Target fitness.
    pub l: usize,
    /// `sum_{i=k}^{l-1} 1/p_i` with the exact leave probabilities.
    #[serde(rename = "tilde_T")]
    pub tilde_t: f64,
    #[serde(rename = "tilde_T_plus")]
    pub tilde_t_plus: f64,
    #[serde(rename = "tilde_T_minus")]
    pub tilde_t_minus: f64,
    pub thm_lower: f64,
    /// The explicit lower bound went negative and was clamped.
    pub thm_lower_clamped: bool,
    pub e_n: f64,
}

impl OneMaxBounds {
    pub fn bound_results(&self) -> Vec<BoundResult> {
        let mut lower = BoundResult::new(Theorem::OneMaxSandwichLower, BoundKind::Lower, self.thm_lower);
        lower.clamped = self.thm_lower_clamped;
        vec![
            BoundResult::new(Theorem::OneMaxFitnessLevelUpper, BoundKind::Upper, self.tilde_t),
            BoundResult::new(Theorem::OneMaxHarmonicUpper, BoundKind::Upper, self.tilde_t_plus),
            lower,
        ]
    }
}

/// Bounds on the expected time for OneMax at rate `1/n` to get from a point
/// with `k` ones to one with at least `l` ones.
pub fn onemax_bounds(n: usize, k: usize, l: usize) -> Result<OneMaxBounds> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n must be at least 2, got {n}")));
    }
    if !(k < l && l <= n) {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= k < l <= n, got k={k}, l={l}, n={n}"
        )));
    }
    let p = 1.0 / n as f64;
    let reciprocals = (k..l)
        .map(|i| onemax_leave_probability(n, p, i).map(|pi| 1.0 / pi))
        .collect::<Result<Vec<_>>>()?;
    let tilde_t = compensated_sum(reciprocals);
    let e_n = e_n_factor(n)?;
    let harmonic = compensated_sum((n - l + 1..=n - k).map(|i| 1.0 / i as f64));
    let tilde_t_plus = e_n * n as f64 * harmonic;
    let tilde_t_minus = tilde_t_plus - 0.5 * e_n * e_n * (l - k) as f64;
    let correction = (l - k - 1) as f64 * E * (E - 1.0) * (k as f64 / (n as f64 - 1.0)).exp();
    let raw = tilde_t - correction;
    Ok(OneMaxBounds {
        n,
        k,
        l,
        tilde_t,
        tilde_t_plus,
        tilde_t_minus,
        thm_lower: raw.max(0.0),
        thm_lower_clamped: raw < 0.0,
        e_n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JumpInit {
    /// Any non-optimal start.
    Arbitrary,
    /// Uniformly random start.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JumpBounds {
    pub n: usize,
    pub k: usize,
    /// Probability of creating the optimum from the local optimum.
    pub p_k: f64,
    pub skip_bound_arbitrary: f64,
    pub skip_bound_random: f64,
    pub lower_bound_arbitrary: f64,
    pub lower_bound_random: f64,
}

impl JumpBounds {
    pub fn skip_bound(&self, init: JumpInit) -> f64 {
        match init {
            JumpInit::Arbitrary => self.skip_bound_arbitrary,
            JumpInit::Random => self.skip_bound_random,
        }
    }

    pub fn lower_bound(&self, init: JumpInit) -> f64 {
        match init {
            JumpInit::Arbitrary => self.lower_bound_arbitrary,
            JumpInit::Random => self.lower_bound_random,
        }
    }

    pub fn bound_result(&self, init: JumpInit) -> BoundResult {
        let theorem = match init {
            JumpInit::Arbitrary => Theorem::JumpLowerArbitrary,
            JumpInit::Random => Theorem::JumpLowerRandom,
        };
        BoundResult::new(theorem, BoundKind::Lower, self.lower_bound(init))
    }
}

/// `ln p_k = (n-k) ln(1 - 1/n) - k ln n`.
pub fn jump_ln_pk(n: usize, k: usize) -> f64 {
    let nf = n as f64;
    (n - k) as f64 * (-1.0 / nf).ln_1p() - k as f64 * nf.ln()
}

/// Sum of the per-gap-level bounds `e / (n^(j-1) (n-j))`, `j = 1..k-1`, on
/// the probability of jumping from the gap straight to the optimum.
pub fn jump_skip_bound_arbitrary(n: usize, k: usize) -> f64 {
    let nf = n as f64;
    let terms = (1..k).map(|j| E * (-((j - 1) as f64) * nf.ln()).exp() / (nf - j as f64));
    compensated_sum(terms).clamp(0.0, 1.0)
}

/// `6e 2^-n + 2e n^(-ceil(n/4)+1) + 2^-n`: the random-start skip bound with
/// the unoptimized constants of the tail-estimate chain.
pub fn jump_skip_bound_random(n: usize) -> f64 {
    let nf = n as f64;
    let two_n = (-nf * std::f64::consts::LN_2).exp();
    let tail = (-((n.div_ceil(4) as f64) - 1.0) * nf.ln()).exp();
    (6.0 * E * two_n + 2.0 * E * tail + two_n).clamp(0.0, 1.0)
}

pub fn jump_bounds(n: usize, k: usize) -> Result<JumpBounds> {
    if n < 4 {
        return Err(Error::InvalidParameter(format!("n must be at least 4, got {n}")));
    }
    if k < 2 || k > n {
        return Err(Error::InvalidParameter(format!("need 2 <= k <= n, got k={k}, n={n}")));
    }
    let ln_pk = jump_ln_pk(n, k);
    let skip_bound_arbitrary = jump_skip_bound_arbitrary(n, k);
    let skip_bound_random = jump_skip_bound_random(n);
    let inverse = (-ln_pk).exp();
    Ok(JumpBounds {
        n,
        k,
        p_k: ln_pk.exp(),
        skip_bound_arbitrary,
        skip_bound_random,
        lower_bound_arbitrary: (1.0 - skip_bound_arbitrary) * inverse,
        lower_bound_random: (1.0 - skip_bound_random) * inverse,
    })
}

fn check_longpath(n: usize, k: usize, p: f64) -> Result<()> {
    if k < 2 || n == 0 || !n.is_multiple_of(k) {
        return Err(Error::InvalidParameter(format!(
            "long paths need k >= 2 dividing n, got n={n}, k={k}"
        )));
    }
    if !(p > 0.0 && p <= 0.5) {
        return Err(Error::InvalidProbability {
            value: p,
            range: "(0, 1/2]",
        });
    }
    Ok(())
}

/// `m = k 2^(n/k) - k`, the number of non-final path points, as a float.
pub fn longpath_m(n: usize, k: usize) -> f64 {
    k as f64 * ((n / k) as f64).exp2() - k as f64
}

/// `ln` of `m (1-2p) / (p (1-p)^n) * (1-2p)/(1-p)`, the bound before the
/// large-jump correction; `-inf` at `p = 1/2`.
fn longpath_ln_base(n: usize, k: usize, p: f64) -> f64 {
    let m = longpath_m(n, k);
    let q = 1.0 - 2.0 * p;
    if q <= 0.0 {
        return f64::NEG_INFINITY;
    }
    m.ln() + 2.0 * q.ln() - p.ln() - n as f64 * (-p).ln_1p() - (-p).ln_1p()
}

fn longpath_with_correction(
    n: usize,
    k: usize,
    p: f64,
    theorem: Theorem,
    inner_factor: f64,
    exponent: usize,
) -> BoundResult {
    let m = longpath_m(n, k);
    let ln_ratio = p.ln() - (-p).ln_1p();
    let miss = inner_factor * (exponent as f64 * ln_ratio).exp();
    if miss >= 1.0 {
        let mut b = BoundResult::new(theorem, BoundKind::Lower, 0.0);
        b.clamped = miss > 1.0;
        return b;
    }
    let ln_value = longpath_ln_base(n, k, p) + m * (-miss).ln_1p();
    BoundResult::new(theorem, BoundKind::Lower, ln_value.exp())
}

/// Lower bound on the expected time of the EA started at the all-zero string:
/// `m (1-2p)/(p (1-p)^n) * (1-2p)/(1-p) * (1 - m (p/(1-p))^(k-1))^m`, clamped at 0.
pub fn longpath_lower_bound(n: usize, k: usize, p: f64) -> Result<BoundResult> {
    check_longpath(n, k, p)?;
    Ok(longpath_with_correction(n, k, p, Theorem::LongPathLower, longpath_m(n, k), k - 1))
}

/// The older reference value with correction `(1 - (p/(1-p))^k)^m`. It has no
/// valid proof and is flagged unproven.
pub fn longpath_reference_bound(n: usize, k: usize, p: f64) -> Result<BoundResult> {
    check_longpath(n, k, p)?;
    Ok(longpath_with_correction(n, k, p, Theorem::LongPathReference, 1.0, k).unproven())
}

/// Probability of advancing `1..k-1` path steps in one mutation:
/// `sum_{j=1}^{k-1} p^j (1-p)^(n-j)`.
pub fn longpath_leave_prob(n: usize, k: usize, p: f64) -> Result<f64> {
    check_longpath(n, k, p)?;
    let terms = (1..k).map(|j| (j as f64 * p.ln() + (n - j) as f64 * (-p).ln_1p()).exp());
    Ok(compensated_sum(terms))
}

/// Geometric-series bound `p (1-p)^n / (1 - 2p)` on [`longpath_leave_prob`].
pub fn longpath_leave_prob_bound(n: usize, p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 0.5) {
        return Err(Error::InvalidProbability {
            value: p,
            range: "(0, 1/2]",
        });
    }
    Ok(p * (n as f64 * (-p).ln_1p()).exp() / (1.0 - 2.0 * p))
}

/// Lower bound `(1-2p)/(1-p)` on the probability of visiting each path point.
pub fn longpath_visit_lower(p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 0.5) {
        return Err(Error::InvalidProbability {
            value: p,
            range: "(0, 1/2]",
        });
    }
    Ok((1.0 - 2.0 * p) / (1.0 - p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn e_n_examples() {
        assert_eq!(e_n_factor(1).unwrap(), 1.0);
        assert_relative_eq!(e_n_factor(2).unwrap(), 2.0, epsilon = 1e-15);
        let e100 = e_n_factor(100).unwrap();
        assert!((E * 0.99..=E).contains(&e100));
        assert!(e_n_factor(0).is_err());
        for n in 2..300 {
            let direct = (1.0 - 1.0 / n as f64).powi(-(n as i32 - 1));
            assert_relative_eq!(e_n_factor(n).unwrap(), direct, max_relative = 1e-10);
        }
    }

    #[test]
    fn leadingones_examples() {
        assert_relative_eq!(leadingones_exact(1, 0.5).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(leadingones_exact(2, 0.5).unwrap(), 3.0, epsilon = 1e-14);
        let asym = 100.0 * 100.0 * (E - 1.0) / 2.0;
        let t = leadingones_exact(100, 0.01).unwrap();
        assert!((t / asym - 1.0).abs() < 0.02, "{t} vs {asym}");
        assert!(leadingones_exact(5, 1.0).is_err());
        assert!(leadingones_exact(5, 0.0).is_err());
    }

    #[test]
    fn leadingones_closed_form_matches_sum() {
        for n in [1, 2, 7, 50, 300] {
            for p in [0.5, 0.1, 1.0 / n as f64] {
                if p >= 1.0 {
                    continue;
                }
                assert_relative_eq!(
                    leadingones_exact(n, p).unwrap(),
                    leadingones_exact_sum(n, p).unwrap(),
                    max_relative = 1e-10
                );
            }
        }
    }

    #[test]
    fn leadingones_ratio_approaches_one_monotonically() {
        let ratio = |n: usize| {
            leadingones_exact(n, 1.0 / n as f64).unwrap() / (n as f64 * n as f64 * (E - 1.0) / 2.0)
        };
        let mut last = ratio(10);
        for n in (20..=1000).step_by(10) {
            let r = ratio(n);
            assert!(r > last, "ratio not increasing at n={n}");
            assert!(r < 1.0);
            last = r;
        }
        assert!((0.98..=1.02).contains(&ratio(100)));
    }

    #[test]
    fn skip_bound_examples() {
        assert_eq!(onemax_skip_bound(10, 10).unwrap(), 0.0);
        assert_relative_eq!(onemax_skip_bound(10, 9).unwrap(), 0.1 / 0.9f64.powi(8), epsilon = 1e-12);
        assert_relative_eq!(onemax_skip_bound(10, 9).unwrap(), 0.232_305, epsilon = 1e-5);
        assert_eq!(onemax_skip_bound(2, 1).unwrap(), 0.5);
        assert!(onemax_skip_bound(1, 1).is_err());
        assert!(onemax_skip_bound(10, 0).is_err());
    }

    #[test]
    fn onemax_single_level_range() {
        let b = onemax_bounds(20, 7, 8).unwrap();
        assert_eq!(b.thm_lower, b.tilde_t);
        assert!(!b.thm_lower_clamped);
        let p7 = onemax_leave_probability(20, 0.05, 7).unwrap();
        assert_relative_eq!(b.tilde_t, 1.0 / p7, max_relative = 1e-14);
    }

    #[test]
    fn onemax_orderings() {
        for n in [2usize, 3, 10, 37, 120, 500] {
            for (k, l) in [(0, n), (n / 2, n), (0, n / 2 + 1), (n - 1, n), (n / 3, 2 * n / 3 + 1)] {
                if k >= l {
                    continue;
                }
                let b = onemax_bounds(n, k, l).unwrap();
                assert!(b.tilde_t_minus <= b.tilde_t * (1.0 + 1e-12), "{b:?}");
                assert!(b.tilde_t <= b.tilde_t_plus * (1.0 + 1e-12), "{b:?}");
                assert!(b.thm_lower <= b.tilde_t);
            }
        }
        assert!(onemax_bounds(10, 5, 5).is_err());
        assert!(onemax_bounds(10, 5, 11).is_err());
    }

    #[test]
    fn jump_examples() {
        let b = jump_bounds(4, 2).unwrap();
        assert_relative_eq!(b.p_k, 9.0 / 256.0, epsilon = 1e-15);
        for n in [4usize, 10, 50] {
            assert_relative_eq!(jump_skip_bound_arbitrary(n, 2), E / (n as f64 - 1.0), epsilon = 1e-15);
        }
        assert!(jump_bounds(3, 2).is_err());
        assert!(jump_bounds(10, 1).is_err());
        assert!(jump_bounds(10, 11).is_err());
        let b = jump_bounds(12, 3).unwrap();
        assert!(b.lower_bound_random >= b.lower_bound_arbitrary);
        for v in [b.p_k, b.skip_bound_arbitrary, b.skip_bound_random] {
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn jump_log_space_matches_direct() {
        for n in [4usize, 10, 30] {
            for k in 2..=4 {
                let nf = n as f64;
                let direct = (1.0 - 1.0 / nf).powi((n - k) as i32) * nf.powi(-(k as i32));
                assert_relative_eq!(jump_ln_pk(n, k).exp(), direct, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn longpath_examples() {
        assert_eq!(longpath_m(4, 2), 6.0);
        let b = longpath_lower_bound(4, 2, 0.25).unwrap();
        assert_eq!(b.value, 0.0);
        assert!(b.clamped);
        let half = longpath_lower_bound(12, 4, 0.5).unwrap();
        assert_eq!(half.value, 0.0);
        assert_eq!(longpath_reference_bound(12, 4, 0.5).unwrap().value, 0.0);
        assert!(longpath_lower_bound(12, 5, 0.1).is_err());
        assert!(longpath_lower_bound(12, 4, 0.6).is_err());
        let r = longpath_reference_bound(12, 4, 1.0 / 12.0).unwrap();
        assert!(!r.proven);
        assert!(r.value >= longpath_lower_bound(12, 4, 1.0 / 12.0).unwrap().value);
    }

    #[test]
    fn longpath_log_space_matches_direct() {
        for (n, k, p) in [(12usize, 4usize, 1.0f64 / 12.0), (20, 5, 0.01), (30, 6, 0.02)] {
            let m = longpath_m(n, k);
            let r = p / (1.0 - p);
            let correction = 1.0 - m * r.powi(k as i32 - 1);
            let direct = m * (1.0 - 2.0 * p) / (p * (1.0 - p).powi(n as i32)) * (1.0 - 2.0 * p) / (1.0 - p)
                * correction.max(0.0).powf(m);
            let b = longpath_lower_bound(n, k, p).unwrap();
            assert_relative_eq!(b.value, direct, max_relative = 1e-10);
            let reference = m * (1.0 - 2.0 * p) / (p * (1.0 - p).powi(n as i32)) * (1.0 - 2.0 * p) / (1.0 - p)
                * (1.0 - r.powi(k as i32)).powf(m);
            assert_relative_eq!(longpath_reference_bound(n, k, p).unwrap().value, reference, max_relative = 1e-10);
        }
    }

    #[test]
    fn longpath_leave_and_visit() {
        // k = 2: a single term p (1-p)^(n-1).
        assert_relative_eq!(
            longpath_leave_prob(4, 2, 0.25).unwrap(),
            0.25 * 0.75f64.powi(3),
            epsilon = 1e-15
        );
        for (n, k, p) in [(4, 2, 0.25), (12, 4, 1.0 / 12.0), (12, 3, 0.4), (100, 10, 0.5)] {
            let leave = longpath_leave_prob(n, k, p).unwrap();
            let bound = longpath_leave_prob_bound(n, p).unwrap();
            assert!(leave <= bound * (1.0 + 1e-12));
        }
        assert_eq!(longpath_visit_lower(0.5).unwrap(), 0.0);
        assert_relative_eq!(longpath_visit_lower(0.25).unwrap(), 2.0 / 3.0, epsilon = 1e-15);
        assert!(longpath_visit_lower(0.0).is_err());
    }
}
