use randstop::estimate::estimate_with;
use randstop::oracle::{brute_force_randomized_value, dp_value, FiniteChain, HTable};
use randstop::{backward_fit, EvaluationMode, LinkFunction, OptimizerConfig, PathSet, Policy};

/// Every deterministic rule: a stop/continue bit per (date < J, state).
fn best_pure_rule(chain: &FiniteChain) -> f64 {
    let (s, jn) = (chain.num_states, chain.num_dates);
    let bits = s * jn;
    (0u64..1 << bits)
        .map(|mask| {
            let mut values = vec![vec![0.0; s]; jn + 1];
            for j in 0..jn {
                for x in 0..s {
                    values[j][x] = ((mask >> (j * s + x)) & 1) as f64;
                }
            }
            let table = HTable::new(values).unwrap();
            brute_force_randomized_value(chain, &table).unwrap()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn dp_matches_exhaustive_search_over_pure_rules() {
    for seed in 0..5 {
        let chain = FiniteChain::random(seed, 3, 3);
        let dp = dp_value(&chain);
        let best = best_pure_rule(&chain);
        assert!((dp.value - best).abs() < 1e-12, "seed {seed}: dp {} vs exhaustive {best}", dp.value);
    }
}

#[test]
fn optimal_indicator_rule_attains_dp_value() {
    for seed in 0..10 {
        let chain = FiniteChain::random(100 + seed, 4, 4);
        let dp = dp_value(&chain);
        let table = HTable::from_stop_regions(&dp.stop_regions);
        let v = brute_force_randomized_value(&chain, &table).unwrap();
        assert!((v - dp.value).abs() <= 1e-10);
    }
}

#[test]
fn randomized_rules_never_beat_dp() {
    for seed in 0..10 {
        let chain = FiniteChain::random(200 + seed, 3, 4);
        let dp = dp_value(&chain).value;
        let table = HTable::random(seed, 3, 4);
        let v = brute_force_randomized_value(&chain, &table).unwrap();
        assert!(v <= dp + 1e-12);
    }
}

#[test]
fn monte_carlo_agrees_with_enumeration() {
    for seed in 0..5 {
        let chain = FiniteChain::random(300 + seed, 3, 3);
        let table = HTable::random(seed + 50, 3, 3);
        let exact = brute_force_randomized_value(&chain, &table).unwrap();
        for mode in [EvaluationMode::Expectation, EvaluationMode::Sampled] {
            let r = estimate_with(&chain.index_source(), &table, 100_000, 7 + seed, mode).unwrap();
            assert!(
                (r.estimate - exact).abs() <= 4.0 * r.std_error,
                "seed {seed} {mode:?}: {} vs {exact} (se {})",
                r.estimate,
                r.std_error
            );
        }
    }
}

#[test]
fn chain_json_fixture_round_trip() {
    let chain = FiniteChain::random(9, 5, 3);
    let back = FiniteChain::from_json(&chain.to_json().unwrap()).unwrap();
    assert_eq!(dp_value(&chain).value, dp_value(&back).value);
}

#[test]
fn malformed_chain_is_rejected() {
    let mut chain = FiniteChain::random(9, 3, 2);
    chain.transition[1][0][0] += 0.5;
    assert!(FiniteChain::from_json(&chain.to_json().unwrap()).is_err());
}

#[test]
fn backward_fit_on_chain_reaches_dp_value() {
    for seed in [1u64, 2, 3] {
        let chain = FiniteChain::random(seed, 3, 3);
        let dp = dp_value(&chain).value;
        let paths = PathSet::from_source(&chain.feature_source(), 100_000, 40 + seed);
        let template = Policy::per_date_template(LinkFunction::Gumbel, 2, &paths).unwrap();
        // The saturating link approaches 0 and 1 slowly; give it room.
        let opt = OptimizerConfig {
            max_iters: 5000,
            ..OptimizerConfig::backward_default()
        };
        let (policy, _) = backward_fit(&paths, &template, &opt).unwrap();
        // Exact value of the fitted rule, read off at each chain state.
        let values = (0..=chain.num_dates)
            .map(|j| {
                (0..chain.num_states)
                    .map(|s| policy.eval_h(j, &chain.state_features[s], j as f64))
                    .collect()
            })
            .collect();
        let fitted = brute_force_randomized_value(&chain, &HTable::new(values).unwrap()).unwrap();
        assert!(fitted >= dp - 1e-3, "seed {seed}: fitted {fitted} vs dp {dp}");
        assert!(fitted <= dp + 1e-12);
    }
}
