//! Ground truth for tests: exact dynamic programming on finite chains,
//! trajectory enumeration, closed-form and lattice references, and central
//! finite differences.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::estimate::{estimate_with, EstimateReport, EvaluationMode};
use crate::market::{MarketModel, PathSource};
use crate::policy::ExerciseRule;
use crate::rng::{stream, StreamPurpose};

/// Largest number of trajectories the brute-force evaluator will enumerate.
pub const ENUMERATION_LIMIT: usize = 1_000_000;

/// A time-inhomogeneous Markov chain on `S` states observed at `J + 1`
/// dates, with reward `rewards[j][s]` for stopping in state `s` at date `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteChain {
    pub num_states: usize,
    pub num_dates: usize,
    /// `transition[j][s][s']` for `j = 0..J`.
    pub transition: Vec<Vec<Vec<f64>>>,
    /// `rewards[j][s]` for `j = 0..=J`.
    pub rewards: Vec<Vec<f64>>,
    pub initial_state: usize,
    /// `state_features[s]`, used when fitting policies on chain paths.
    pub state_features: Vec<Vec<f64>>,
}

impl FiniteChain {
    pub fn validate(&self) -> Result<()> {
        let s = self.num_states;
        if s == 0 || self.num_dates == 0 {
            return Err(Error::argument("chain needs at least one state and one step"));
        }
        if self.initial_state >= s {
            return Err(Error::argument("initial state out of range"));
        }
        if self.transition.len() != self.num_dates
            || self.transition.iter().any(|t| t.len() != s || t.iter().any(|r| r.len() != s))
        {
            return Err(Error::argument("transition must be J matrices of size S x S"));
        }
        for t in &self.transition {
            for row in t {
                if row.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                    return Err(Error::argument("transition probabilities must be >= 0"));
                }
                if (row.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                    return Err(Error::argument("transition rows must sum to 1"));
                }
            }
        }
        if self.rewards.len() != self.num_dates + 1
            || self.rewards.iter().any(|r| r.len() != s || r.iter().any(|z| !(z.is_finite() && *z >= 0.0)))
        {
            return Err(Error::argument("rewards must be (J+1) x S nonnegative values"));
        }
        if self.state_features.len() != s {
            return Err(Error::argument("need one feature vector per state"));
        }
        let df = self.feature_dim();
        if df == 0 || self.state_features.iter().any(|f| f.len() != df) {
            return Err(Error::argument("feature vectors must share a positive length"));
        }
        Ok(())
    }

    pub fn feature_dim(&self) -> usize {
        self.state_features.first().map_or(0, Vec::len)
    }

    /// Random chain with rewards in `[0, 10)`, start state 0, and the
    /// one-dimensional feature `s / (S - 1)` per state.
    pub fn random(seed: u64, num_states: usize, num_dates: usize) -> Self {
        let mut rng = stream(seed, StreamPurpose::Paths, u64::MAX);
        let transition = (0..num_dates)
            .map(|_| {
                (0..num_states)
                    .map(|_| {
                        let w: Vec<f64> = (0..num_states).map(|_| rng.random::<f64>() + 0.05).collect();
                        let total: f64 = w.iter().sum();
                        let mut row: Vec<f64> = w.iter().map(|x| x / total).collect();
                        // Absorb rounding into the last entry so the row sums to 1.
                        let head: f64 = row[..num_states - 1].iter().sum();
                        row[num_states - 1] = 1.0 - head;
                        row
                    })
                    .collect()
            })
            .collect();
        let rewards = (0..=num_dates)
            .map(|_| (0..num_states).map(|_| 10.0 * rng.random::<f64>()).collect())
            .collect();
        let denom = (num_states.max(2) - 1) as f64;
        let state_features = (0..num_states).map(|s| vec![s as f64 / denom]).collect();
        FiniteChain {
            num_states,
            num_dates,
            transition,
            rewards,
            initial_state: 0,
            state_features,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let chain: FiniteChain = serde_json::from_str(s)?;
        chain.validate()?;
        Ok(chain)
    }

    fn dates(&self) -> Vec<f64> {
        (0..=self.num_dates).map(|j| j as f64).collect()
    }

    /// Trajectories whose state is the chain index (dimension 1).
    pub fn index_source(&self) -> ChainSource<'_> {
        ChainSource {
            chain: self,
            features: false,
            dates: self.dates(),
        }
    }

    /// The same trajectories, with states replaced by their features.
    pub fn feature_source(&self) -> ChainSource<'_> {
        ChainSource {
            chain: self,
            features: true,
            dates: self.dates(),
        }
    }

    fn walk(&self, seed: u64, index: u64, mut visit: impl FnMut(usize, usize)) {
        let mut rng = stream(seed, StreamPurpose::Paths, index);
        let mut s = self.initial_state;
        visit(0, s);
        for j in 0..self.num_dates {
            let u: f64 = rng.random();
            let row = &self.transition[j][s];
            let mut acc = 0.0;
            let mut next = self.num_states - 1;
            for (k, p) in row.iter().enumerate() {
                acc += p;
                if u < acc {
                    next = k;
                    break;
                }
            }
            s = next;
            visit(j + 1, s);
        }
    }
}

/// Chain trajectories as a [`PathSource`]; dates are `0, 1, ..., J`.
pub struct ChainSource<'a> {
    chain: &'a FiniteChain,
    features: bool,
    dates: Vec<f64>,
}

impl PathSource for ChainSource<'_> {
    fn dim(&self) -> usize {
        if self.features {
            self.chain.feature_dim()
        } else {
            1
        }
    }

    fn dates(&self) -> &[f64] {
        &self.dates
    }

    fn generate(&self, seed: u64, index: u64, states: &mut [f64], payoffs: &mut [f64]) {
        let d = self.dim();
        self.chain.walk(seed, index, |j, s| {
            payoffs[j] = self.chain.rewards[j][s];
            if self.features {
                states[j * d..(j + 1) * d].copy_from_slice(&self.chain.state_features[s]);
            } else {
                states[j] = s as f64;
            }
        });
    }
}

/// Exact Snell envelope of a finite chain.
#[derive(Debug, Clone, PartialEq)]
pub struct DpSolution {
    /// `Y*_0` at the initial state.
    pub value: f64,
    /// `Y*_j(s)` for every date and state.
    pub values: Vec<Vec<f64>>,
    /// `stop_regions[j][s]` is true iff `Z_j(s) >= C_j(s)`; all true at `J`.
    pub stop_regions: Vec<Vec<bool>>,
}

pub fn dp_value(chain: &FiniteChain) -> DpSolution {
    let jn = chain.num_dates;
    let s = chain.num_states;
    let mut values = vec![vec![0.0; s]; jn + 1];
    let mut stop_regions = vec![vec![true; s]; jn + 1];
    values[jn] = chain.rewards[jn].clone();
    for j in (0..jn).rev() {
        for x in 0..s {
            let cont: f64 = (0..s).map(|y| chain.transition[j][x][y] * values[j + 1][y]).sum();
            let stop = chain.rewards[j][x] >= cont;
            stop_regions[j][x] = stop;
            values[j][x] = if stop { chain.rewards[j][x] } else { cont };
        }
    }
    DpSolution {
        value: values[0][chain.initial_state],
        values,
        stop_regions,
    }
}

/// Exercise probabilities given per date and chain state. Applies to
/// trajectories from [`FiniteChain::index_source`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HTable {
    /// `values[j][s]` for `j = 0..=J`; the last row is forced to 1.
    pub values: Vec<Vec<f64>>,
}

impl HTable {
    pub fn new(mut values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::argument("h-table needs at least two dates"));
        }
        if values.iter().flatten().any(|h| !(0.0..=1.0).contains(h)) {
            return Err(Error::argument("h-table entries must lie in [0, 1]"));
        }
        if let Some(last) = values.last_mut() {
            last.iter_mut().for_each(|h| *h = 1.0);
        }
        Ok(HTable { values })
    }

    /// Indicator table of the optimal stopping regions.
    pub fn from_stop_regions(regions: &[Vec<bool>]) -> Self {
        HTable::new(
            regions
                .iter()
                .map(|r| r.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect())
                .collect(),
        )
        .expect("indicator table is valid")
    }

    pub fn random(seed: u64, num_states: usize, num_dates: usize) -> Self {
        let mut rng = stream(seed, StreamPurpose::ExerciseDraws, u64::MAX);
        HTable::new(
            (0..=num_dates)
                .map(|_| (0..num_states).map(|_| rng.random::<f64>()).collect())
                .collect(),
        )
        .expect("random table is valid")
    }
}

impl ExerciseRule for HTable {
    fn check_compatible(&self, dim: usize, num_dates: usize) -> Result<()> {
        if dim != 1 || num_dates + 1 != self.values.len() {
            return Err(Error::argument("h-table applies to index-valued chain paths only"));
        }
        Ok(())
    }

    fn path_probabilities(&self, states: &[f64], _dates: &[f64], out: &mut [f64]) {
        for (j, row) in self.values.iter().enumerate() {
            out[j] = row[states[j] as usize];
        }
    }
}

/// Exact randomized value from the initial state, summing over every
/// trajectory weighted by its transition probability.
pub fn brute_force_randomized_value(chain: &FiniteChain, table: &HTable) -> Result<f64> {
    let count = (chain.num_states as f64).powi(chain.num_dates as i32);
    if count > ENUMERATION_LIMIT as f64 {
        return Err(Error::argument(format!(
            "{count} trajectories exceed the enumeration limit {ENUMERATION_LIMIT}"
        )));
    }
    if table.values.len() != chain.num_dates + 1
        || table.values.iter().any(|r| r.len() != chain.num_states)
    {
        return Err(Error::argument("h-table shape does not match the chain"));
    }

    fn visit(chain: &FiniteChain, table: &HTable, j: usize, s: usize, weight: f64, survive: f64) -> f64 {
        let h = table.values[j][s];
        let here = weight * survive * h * chain.rewards[j][s];
        if j == chain.num_dates {
            return here;
        }
        let rest: f64 = (0..chain.num_states)
            .map(|y| {
                let p = chain.transition[j][s][y];
                if p == 0.0 {
                    0.0
                } else {
                    visit(chain, table, j + 1, y, weight * p, survive * (1.0 - h))
                }
            })
            .sum();
        here + rest
    }

    Ok(visit(chain, table, 0, chain.initial_state, 1.0, 1.0))
}

/// Stops only at maturity.
pub struct TerminalOnly {
    dim: usize,
    num_dates: usize,
}

impl ExerciseRule for TerminalOnly {
    fn check_compatible(&self, dim: usize, num_dates: usize) -> Result<()> {
        if dim != self.dim || num_dates != self.num_dates {
            return Err(Error::argument("terminal rule does not match the source"));
        }
        Ok(())
    }

    fn path_probabilities(&self, _states: &[f64], _dates: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        out[self.num_dates] = 1.0;
    }
}

/// Plain Monte Carlo value of exercising only at maturity.
pub fn european_reference(model: &MarketModel, num_paths: usize, seed: u64) -> Result<EstimateReport> {
    model.validate()?;
    let rule = TerminalOnly {
        dim: model.dim(),
        num_dates: model.num_dates(),
    };
    let mut report = estimate_with(model, &rule, num_paths, seed, EvaluationMode::Expectation)?;
    report.run_id = "european".into();
    Ok(report)
}

/// Black-Scholes price of a European call with continuous dividend yield.
pub fn black_scholes_call(spot: f64, strike: f64, rate: f64, dividend: f64, vol: f64, maturity: f64) -> f64 {
    let n = Normal::standard();
    let sd = vol * maturity.sqrt();
    let d1 = ((spot / strike).ln() + (rate - dividend + 0.5 * vol * vol) * maturity) / sd;
    let d2 = d1 - sd;
    spot * (-dividend * maturity).exp() * n.cdf(d1) - strike * (-rate * maturity).exp() * n.cdf(d2)
}

/// Bermudan call on one asset by a Cox-Ross-Rubinstein lattice with
/// `steps_per_interval` steps between exercise dates. Requires a uniform
/// grid.
pub fn bermudan_binomial(model: &MarketModel, steps_per_interval: usize) -> Result<f64> {
    model.validate()?;
    if model.dim() != 1 {
        return Err(Error::argument("lattice reference supports one asset only"));
    }
    if steps_per_interval == 0 {
        return Err(Error::argument("steps_per_interval must be positive"));
    }
    let jn = model.num_dates();
    let interval = model.maturity / jn as f64;
    if model
        .dates
        .iter()
        .enumerate()
        .any(|(j, t)| (t - j as f64 * interval).abs() > 1e-12)
    {
        return Err(Error::argument("lattice reference needs a uniform exercise grid"));
    }
    let n = jn * steps_per_interval;
    let dt = model.maturity / n as f64;
    let up = (model.vol * dt.sqrt()).exp();
    let down = 1.0 / up;
    let q = (((model.rate - model.dividend) * dt).exp() - down) / (up - down);
    let disc = (-model.rate * dt).exp();
    let s0 = model.spot[0];
    let intrinsic = |i: usize, k: usize| (s0 * up.powi(k as i32) * down.powi((i - k) as i32) - model.strike).max(0.0);
    let mut v: Vec<f64> = (0..=n).map(|k| intrinsic(n, k)).collect();
    for i in (0..n).rev() {
        for k in 0..=i {
            v[k] = disc * (q * v[k + 1] + (1.0 - q) * v[k]);
            if i % steps_per_interval == 0 {
                v[k] = v[k].max(intrinsic(i, k));
            }
        }
    }
    Ok(v[0])
}

/// Central differences `(f(theta + h e_i) - f(theta - h e_i)) / 2h`.
pub fn finite_difference_gradient<F>(f: F, theta: &[f64], step: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    let mut x = theta.to_vec();
    (0..theta.len())
        .map(|i| {
            x[i] = theta[i] + step;
            let up = f(&x);
            x[i] = theta[i] - step;
            let dn = f(&x);
            x[i] = theta[i];
            if !(up.is_finite() && dn.is_finite()) {
                return Err(Error::numeric(None, format!("objective not finite near coordinate {i}")));
            }
            Ok((up - dn) / (2.0 * step))
        })
        .collect()
}
