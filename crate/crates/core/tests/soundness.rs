//! Property tests: every proven bound brackets the exact expected runtime of
//! random level chains.

use flm_core::bounds::{
    flm_lower_classic, flm_lower_viscosity, flm_lower_visit, flm_upper_classic, flm_upper_viscosity,
    flm_upper_visit, lower_viscosity_chi, upper_viscosity_chi, visit_lower_from_chain, viscosities_from_chain,
};
use flm_core::level_chain::{expected_hitting_time, visit_probabilities, LevelChain};
use proptest::prelude::*;

const TOL: f64 = 1e-9;

/// Upper-triangular chain with `levels` levels, stay probabilities in
/// [0, 0.95] and a random start distribution.
fn chain_strategy() -> impl Strategy<Value = LevelChain> {
    (2usize..=8).prop_flat_map(|levels| {
        (
            prop::collection::vec(0.0f64..0.95, levels - 1),
            prop::collection::vec(prop::collection::vec(0.0f64..1.0, levels), levels - 1),
            prop::collection::vec(0.0f64..1.0, levels),
        )
            .prop_map(move |(stay, weights, start)| build(levels, &stay, &weights, &start))
    })
}

fn build(levels: usize, stay: &[f64], weights: &[Vec<f64>], start: &[f64]) -> LevelChain {
    let mut t = vec![vec![0.0; levels]; levels];
    for i in 0..levels - 1 {
        let w = &weights[i][i + 1..];
        let total: f64 = w.iter().sum::<f64>();
        for (j, &x) in w.iter().enumerate() {
            t[i][i + 1 + j] = if total > 1e-9 {
                (1.0 - stay[i]) * x / total
            } else if j == 0 {
                1.0 - stay[i]
            } else {
                0.0
            };
        }
        t[i][i] = stay[i];
    }
    t[levels - 1][levels - 1] = 1.0;
    let s_total: f64 = start.iter().sum();
    let s: Vec<f64> = if s_total > 1e-9 {
        start.iter().map(|x| x / s_total).collect()
    } else {
        let mut s = vec![0.0; levels];
        s[0] = 1.0;
        s
    };
    LevelChain::new(t, s).unwrap()
}

fn close_le(a: f64, b: f64) -> bool {
    a <= b + TOL * b.abs().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1500))]

    #[test]
    fn bounds_sandwich_the_exact_runtime(chain in chain_strategy()) {
        let exact = expected_hitting_time(&chain).unwrap().overall;
        let p = chain.leave_probs();
        let start = chain.start().to_vec();
        let v = visit_probabilities(&chain).unwrap();

        let upper = flm_upper_classic(&p).unwrap().value;
        let lower = flm_lower_classic(&p, &start).unwrap().value;
        prop_assert!(close_le(lower, exact) && close_le(exact, upper), "{lower} <= {exact} <= {upper}");

        // Exact visit probabilities make both visit bounds tight.
        let vl = flm_lower_visit(&p, &v).unwrap().value;
        let vu = flm_upper_visit(&p, &v).unwrap().value;
        prop_assert!((vl - exact).abs() <= TOL * exact.max(1.0));
        prop_assert!((vu - exact).abs() <= TOL * exact.max(1.0));

        // Structural visit lower bounds are dominated by the true values.
        let v_low: Vec<f64> = (0..chain.levels()).map(|i| visit_lower_from_chain(&chain, i).unwrap()).collect();
        for (i, (&lo, &true_v)) in v_low.iter().zip(&v).enumerate() {
            prop_assert!(close_le(lo, true_v), "v[{i}]: {lo} > {true_v}");
        }
        prop_assert!(close_le(flm_lower_visit(&p, &v_low).unwrap().value, exact));

        let gamma = viscosities_from_chain(&chain);
        let chi_l = lower_viscosity_chi(&gamma);
        let vis_l = flm_lower_viscosity(&p, &gamma, chi_l, &start).unwrap().value;
        prop_assert!(close_le(vis_l, exact), "viscosity lower {vis_l} > {exact}");
        let chi_u = upper_viscosity_chi(&gamma);
        if let Ok(b) = flm_upper_viscosity(&p, &gamma, chi_u, &start) {
            prop_assert!(close_le(exact, b.value), "viscosity upper {} < {exact}", b.value);
        }
    }

    #[test]
    fn classic_bounds_are_monotone(chain in chain_strategy(), i in 0usize..7, factor in 1.0f64..4.0) {
        let p = chain.leave_probs();
        let i = i % p.len();
        let mut faster = p.clone();
        faster[i] = (p[i] * factor).min(1.0);
        let start = chain.start().to_vec();
        prop_assert!(flm_upper_classic(&faster).unwrap().value <= flm_upper_classic(&p).unwrap().value + TOL);
        prop_assert!(
            flm_lower_classic(&faster, &start).unwrap().value <= flm_lower_classic(&p, &start).unwrap().value + TOL
        );
        // Moving start mass down can only raise the viscosity lower bound.
        let gamma = viscosities_from_chain(&chain);
        let chi = lower_viscosity_chi(&gamma);
        let mut lowest = vec![0.0; start.len()];
        lowest[0] = 1.0;
        prop_assert!(
            flm_lower_viscosity(&p, &gamma, chi, &start).unwrap().value
                <= flm_lower_viscosity(&p, &gamma, chi, &lowest).unwrap().value + TOL
        );
    }
}
