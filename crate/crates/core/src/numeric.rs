//! Log-space helpers for binomial mutation probabilities.
//!
//! Terms like `p^k (1-p)^(n-k)` underflow `f64` long before the
//! probabilities they contribute to become negligible, so everything is
//! assembled as logarithms and exponentiated last.

use statrs::function::factorial;

/// `ln C(n, k)`, `-inf` when `k > n`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    factorial::ln_binomial(n, k)
}

/// `ln(p^successes * (1-p)^failures)` with `0 * ln 0 = 0`.
pub fn ln_bernoulli_power(p: f64, successes: u64, failures: u64) -> f64 {
    xlogy(successes as f64, p) + xlogy(failures as f64, 1.0 - p)
}

fn xlogy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

/// `ln Pr[Bin(n, p) = k]`.
pub fn ln_binomial_pmf(n: u64, p: f64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_binomial(n, k) + ln_bernoulli_power(p, k, n - k)
}

/// Full probability mass function of `Bin(n, p)`, index = number of successes.
pub fn binomial_pmf(n: u64, p: f64) -> Vec<f64> {
    (0..=n).map(|k| ln_binomial_pmf(n, p, k).exp()).collect()
}

/// Numerically stable `ln(sum(exp(terms)))`.
pub fn log_sum_exp<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let terms: Vec<f64> = terms.into_iter().collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Sum with Neumaier compensation; the level-chain identities are checked
/// at 1e-9 over a few thousand terms.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn choose(n: u64, k: u64) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }

    #[test]
    fn log_binomial_matches_direct_product() {
        for n in [1u64, 5, 20, 60, 150, 400] {
            for k in 0..=n {
                let direct = choose(n, k);
                if direct.is_finite() && direct < 1e300 {
                    assert_relative_eq!(ln_binomial(n, k).exp(), direct, max_relative = 1e-10);
                }
            }
        }
    }

    #[test]
    fn pmf_sums_to_one() {
        for (n, p) in [(1u64, 0.5), (8, 0.125), (100, 0.01), (3000, 1.0 / 3000.0)] {
            let total = compensated_sum(binomial_pmf(n, p));
            assert_relative_eq!(total, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn degenerate_rates() {
        assert_eq!(ln_binomial_pmf(4, 0.0, 0), 0.0);
        assert_eq!(ln_binomial_pmf(4, 0.0, 1), f64::NEG_INFINITY);
        assert_eq!(ln_binomial_pmf(4, 1.0, 4), 0.0);
        assert_eq!(ln_binomial_pmf(4, 1.0, 3), f64::NEG_INFINITY);
    }

    #[test]
    fn log_sum_exp_handles_tiny_terms() {
        let v = log_sum_exp([-1000.0, -1000.0]);
        assert_relative_eq!(v, -1000.0 + 2f64.ln(), epsilon = 1e-12);
        assert_eq!(log_sum_exp(std::iter::empty()), f64::NEG_INFINITY);
    }
}
