use randstop::parallel::Moments;
use randstop::{simulate_paths, MarketModel};

const M: usize = 200_000;

fn within(m: &Moments, target: f64, k: f64) -> bool {
    (m.mean - target).abs() <= k * m.std_error()
}

#[test]
fn log_increments_have_the_lognormal_moments() {
    let model = MarketModel::max_call_benchmark(100.0);
    let paths = simulate_paths(&model, M, 21).unwrap();
    let dt = model.dates[1] - model.dates[0];
    let drift = (model.rate - model.dividend - 0.5 * model.vol * model.vol) * dt;
    let var = model.vol * model.vol * dt;
    for j in [0, 4, 8] {
        for i in 0..2 {
            let mut mean = Moments::default();
            let mut sq = Moments::default();
            for m in 0..M {
                let inc = paths.state(m, j + 1)[i] - paths.state(m, j)[i];
                mean.push(inc);
                sq.push((inc - drift).powi(2));
            }
            assert!(within(&mean, drift, 4.0), "date {j} asset {i}: mean {}", mean.mean);
            assert!(within(&sq, var, 4.0), "date {j} asset {i}: variance {}", sq.mean);
        }
    }
}

#[test]
fn assets_and_increments_are_uncorrelated() {
    let model = MarketModel::max_call_benchmark(100.0);
    let paths = simulate_paths(&model, M, 22).unwrap();
    let dt = model.dates[1] - model.dates[0];
    let drift = (model.rate - model.dividend - 0.5 * model.vol * model.vol) * dt;
    let sd = model.vol * dt.sqrt();
    let mut cross_asset = Moments::default();
    let mut cross_time = Moments::default();
    for m in 0..M {
        let a = |j: usize, i: usize| (paths.state(m, j + 1)[i] - paths.state(m, j)[i] - drift) / sd;
        cross_asset.push(a(3, 0) * a(3, 1));
        cross_time.push(a(2, 0) * a(5, 0));
    }
    assert!(within(&cross_asset, 0.0, 4.0), "cross-asset {}", cross_asset.mean);
    assert!(within(&cross_time, 0.0, 4.0), "cross-time {}", cross_time.mean);
}

#[test]
fn terminal_price_ratio_has_the_forward_mean() {
    let model = MarketModel::max_call_benchmark(100.0);
    let paths = simulate_paths(&model, M, 23).unwrap();
    let mut ratio = Moments::default();
    for m in 0..M {
        ratio.push(paths.state(m, 9)[0].exp());
    }
    let target = ((model.rate - model.dividend) * model.maturity).exp();
    assert!((target - (-0.15f64).exp()).abs() < 1e-15);
    assert!(within(&ratio, target, 4.0), "E[S_T/S_0] = {} vs {target}", ratio.mean);
}

#[test]
fn payoffs_are_discounted_max_calls() {
    let model = MarketModel::max_call_benchmark(90.0);
    let paths = simulate_paths(&model, 1000, 24).unwrap();
    for m in 0..1000 {
        for j in 0..=9 {
            let x = paths.state(m, j);
            let best = x.iter().map(|v| 90.0 * v.exp()).fold(f64::NEG_INFINITY, f64::max);
            let want = (-model.rate * model.dates[j]).exp() * (best - 100.0).max(0.0);
            assert!((paths.payoff(m, j) - want).abs() <= 1e-12 * (1.0 + want));
        }
    }
}

#[test]
fn simulation_is_reproducible_and_seed_sensitive() {
    let model = MarketModel::max_call_benchmark(100.0);
    let a = simulate_paths(&model, 5000, 1).unwrap();
    let b = simulate_paths(&model, 5000, 1).unwrap();
    let c = simulate_paths(&model, 5000, 2).unwrap();
    assert_eq!(a.states(), b.states());
    assert_eq!(a.payoffs(), b.payoffs());
    assert_ne!(a.states(), c.states());
}
