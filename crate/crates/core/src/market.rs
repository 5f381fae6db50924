//! Multi-asset Black-Scholes market and trajectory simulation.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::payoff::max_call_payoff;
use crate::rng::{stream, StreamPurpose};

/// Independent geometric Brownian motions with common volatility, rate and
/// dividend yield, observed on an exercise grid `t_0 = 0 < ... < t_J = T`.
/// States are log-returns `X^i = ln(S^i / S^i_0)`, so every path starts at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketModel {
    pub spot: Vec<f64>,
    pub strike: f64,
    pub rate: f64,
    pub dividend: f64,
    pub vol: f64,
    pub maturity: f64,
    pub dates: Vec<f64>,
}

impl MarketModel {
    /// Model on the uniform grid `t_j = j T / J`.
    pub fn new(
        spot: Vec<f64>,
        strike: f64,
        rate: f64,
        dividend: f64,
        vol: f64,
        maturity: f64,
        num_dates: usize,
    ) -> Result<Self> {
        let dates = make_time_grid(maturity, num_dates)?;
        let model = MarketModel {
            spot,
            strike,
            rate,
            dividend,
            vol,
            maturity,
            dates,
        };
        model.validate()?;
        Ok(model)
    }

    /// The two-asset max-call market used as the standard benchmark:
    /// `K = 100, r = 0.05, delta = 0.1, sigma = 0.2, T = 3, J = 9`.
    pub fn max_call_benchmark(spot: f64) -> Self {
        MarketModel::new(vec![spot, spot], 100.0, 0.05, 0.1, 0.2, 3.0, 9)
            .expect("benchmark parameters are valid")
    }

    pub fn dim(&self) -> usize {
        self.spot.len()
    }

    /// Number of exercise intervals `J`; there are `J + 1` dates.
    pub fn num_dates(&self) -> usize {
        self.dates.len().saturating_sub(1)
    }

    /// Drift of the log-price per unit time, `r - delta - sigma^2 / 2`.
    pub fn log_drift(&self) -> f64 {
        self.rate - self.dividend - 0.5 * self.vol * self.vol
    }

    pub fn validate(&self) -> Result<()> {
        if self.spot.is_empty() {
            return Err(Error::config("model.spot", "at least one asset is required"));
        }
        if let Some(s) = self.spot.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(Error::config(
                "model.spot",
                format!("initial prices must be positive and finite, got {s}"),
            ));
        }
        if !(self.strike.is_finite() && self.strike >= 0.0) {
            return Err(Error::config("model.strike", "strike must be finite and >= 0"));
        }
        if !self.rate.is_finite() {
            return Err(Error::config("model.rate", "rate must be finite"));
        }
        if !self.dividend.is_finite() {
            return Err(Error::config("model.dividend", "dividend must be finite"));
        }
        if !(self.vol.is_finite() && self.vol > 0.0) {
            return Err(Error::config("model.vol", "volatility must be positive"));
        }
        if !(self.maturity.is_finite() && self.maturity > 0.0) {
            return Err(Error::config("model.maturity", "maturity must be positive"));
        }
        validate_dates(&self.dates, self.maturity)
    }

    /// Hex SHA-256 of the canonical JSON form, used to tie policies to the
    /// market they were fitted on.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let json = serde_json::to_vec(self).expect("model serializes");
        hex::encode(Sha256::digest(json))
    }
}

fn validate_dates(dates: &[f64], maturity: f64) -> Result<()> {
    if dates.len() < 2 {
        return Err(Error::config("model.dates", "need at least two dates (J >= 1)"));
    }
    if dates[0] != 0.0 {
        return Err(Error::config("model.dates", "first date must be 0"));
    }
    if dates.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
        return Err(Error::config("model.dates", "dates must be strictly increasing"));
    }
    let last = dates[dates.len() - 1];
    if (last - maturity).abs() > 1e-12 * maturity.max(1.0) {
        return Err(Error::config(
            "model.dates",
            format!("last date {last} must equal the maturity {maturity}"),
        ));
    }
    Ok(())
}

/// Uniform exercise grid `{ j T / J : j = 0..=J }`.
pub fn make_time_grid(maturity: f64, num_dates: usize) -> Result<Vec<f64>> {
    if num_dates == 0 {
        return Err(Error::config("model.num_dates", "J must be at least 1"));
    }
    if !(maturity.is_finite() && maturity > 0.0) {
        return Err(Error::config("model.maturity", "maturity must be positive"));
    }
    let mut dates: Vec<f64> = (0..=num_dates)
        .map(|j| j as f64 * maturity / num_dates as f64)
        .collect();
    dates[num_dates] = maturity;
    Ok(dates)
}

/// Anything that can produce trajectory `index` of a reproducible sample:
/// states at every date (date-major, `dim` values per date) and the
/// discounted reward at every date.
pub trait PathSource: Sync {
    fn dim(&self) -> usize;
    fn dates(&self) -> &[f64];

    fn num_dates(&self) -> usize {
        self.dates().len() - 1
    }

    fn generate(&self, seed: u64, index: u64, states: &mut [f64], payoffs: &mut [f64]);
}

impl PathSource for MarketModel {
    fn dim(&self) -> usize {
        self.spot.len()
    }

    fn dates(&self) -> &[f64] {
        &self.dates
    }

    fn generate(&self, seed: u64, index: u64, states: &mut [f64], payoffs: &mut [f64]) {
        let d = self.dim();
        let drift = self.log_drift();
        let mut rng = stream(seed, StreamPurpose::Paths, index);
        states[..d].fill(0.0);
        payoffs[0] = max_call_payoff(&states[..d], self, self.dates[0]);
        for j in 1..self.dates.len() {
            let dt = self.dates[j] - self.dates[j - 1];
            let scale = self.vol * dt.sqrt();
            let (prev, cur) = states.split_at_mut(j * d);
            let prev = &prev[(j - 1) * d..];
            for (i, x) in cur[..d].iter_mut().enumerate() {
                let z: f64 = StandardNormal.sample(&mut rng);
                *x = prev[i] + scale * z + drift * dt;
            }
            payoffs[j] = max_call_payoff(&cur[..d], self, self.dates[j]);
        }
    }
}

/// A fixed sample of `M` trajectories with cached discounted rewards.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    states: Vec<f64>,
    payoffs: Vec<f64>,
    num_paths: usize,
    dim: usize,
    dates: Vec<f64>,
    seed: u64,
}

impl PathSet {
    /// Builds a path set from raw arrays: `states` is `[M x (J+1) x d]` and
    /// `payoffs` is `[M x (J+1)]`, both row-major.
    pub fn new(
        states: Vec<f64>,
        payoffs: Vec<f64>,
        dim: usize,
        dates: Vec<f64>,
        seed: u64,
    ) -> Result<Self> {
        if dim == 0 || dates.len() < 2 {
            return Err(Error::argument("path set needs dim >= 1 and at least two dates"));
        }
        let width = dates.len();
        if payoffs.is_empty() || !payoffs.len().is_multiple_of(width) {
            return Err(Error::argument("payoff array is not a whole number of paths"));
        }
        let num_paths = payoffs.len() / width;
        if states.len() != num_paths * width * dim {
            return Err(Error::argument(format!(
                "state array has {} values, expected {}",
                states.len(),
                num_paths * width * dim
            )));
        }
        if let Some(bad) = payoffs.iter().find(|z| !(z.is_finite() && **z >= 0.0)) {
            return Err(Error::argument(format!(
                "payoffs must be finite and nonnegative, got {bad}"
            )));
        }
        Ok(PathSet {
            states,
            payoffs,
            num_paths,
            dim,
            dates,
            seed,
        })
    }

    /// Generates paths `0..num_paths` of `source` under `seed`. The result is
    /// the same for any thread count.
    pub fn from_source<S: PathSource + ?Sized>(source: &S, num_paths: usize, seed: u64) -> Self {
        let dim = source.dim();
        let dates = source.dates().to_vec();
        let width = dates.len();
        let mut states = vec![0.0; num_paths * width * dim];
        let mut payoffs = vec![0.0; num_paths * width];
        states
            .par_chunks_mut(width * dim)
            .zip(payoffs.par_chunks_mut(width))
            .enumerate()
            .for_each(|(m, (s, z))| source.generate(seed, m as u64, s, z));
        PathSet {
            states,
            payoffs,
            num_paths,
            dim,
            dates,
            seed,
        }
    }

    pub fn num_paths(&self) -> usize {
        self.num_paths
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_dates(&self) -> usize {
        self.dates.len() - 1
    }

    pub fn dates(&self) -> &[f64] {
        &self.dates
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// State of path `m` at date `j`.
    pub fn state(&self, m: usize, j: usize) -> &[f64] {
        let off = (m * self.dates.len() + j) * self.dim;
        &self.states[off..off + self.dim]
    }

    /// All states of path `m`, date-major.
    pub fn path_states(&self, m: usize) -> &[f64] {
        let w = self.dates.len() * self.dim;
        &self.states[m * w..(m + 1) * w]
    }

    pub fn path_payoffs(&self, m: usize) -> &[f64] {
        let w = self.dates.len();
        &self.payoffs[m * w..(m + 1) * w]
    }

    pub fn payoff(&self, m: usize, j: usize) -> f64 {
        self.payoffs[m * self.dates.len() + j]
    }

    pub fn states(&self) -> &[f64] {
        &self.states
    }

    pub fn payoffs(&self) -> &[f64] {
        &self.payoffs
    }

    pub(crate) fn payoffs_mut(&mut self) -> &mut [f64] {
        &mut self.payoffs
    }
}

/// Simulates `num_paths` exact lognormal trajectories with max-call rewards.
pub fn simulate_paths(model: &MarketModel, num_paths: usize, seed: u64) -> Result<PathSet> {
    model.validate()?;
    if num_paths == 0 {
        return Err(Error::argument("num_paths must be at least 1"));
    }
    Ok(PathSet::from_source(model, num_paths, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn benchmark() -> MarketModel {
        MarketModel::max_call_benchmark(100.0)
    }

    #[test]
    fn uniform_grids() {
        let g = make_time_grid(3.0, 9).unwrap();
        assert_eq!(g.len(), 10);
        for (j, t) in g.iter().enumerate() {
            assert!((t - j as f64 / 3.0).abs() < 1e-15);
        }
        assert_eq!(make_time_grid(1.0, 1).unwrap(), vec![0.0, 1.0]);
        assert_eq!(make_time_grid(2.0, 4).unwrap(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert!(make_time_grid(1.0, 0).is_err());
        assert!(make_time_grid(-1.0, 3).is_err());
    }

    #[test]
    fn rejects_bad_models() {
        let mut m = benchmark();
        m.vol = 0.0;
        assert!(matches!(m.validate(), Err(Error::Config { ref field, .. }) if field == "model.vol"));
        let mut m = benchmark();
        m.dates.swap(2, 3);
        assert!(matches!(m.validate(), Err(Error::Config { ref field, .. }) if field == "model.dates"));
        assert!(simulate_paths(&benchmark(), 0, 1).is_err());
    }

    #[test]
    fn zero_noise_without_drift_stays_at_spot() {
        let mut m = MarketModel::new(vec![100.0], 100.0, 0.05, 0.05, 0.2, 1.0, 4).unwrap();
        m.vol = 0.0;
        // r = delta and sigma = 0 give zero log drift.
        let p = PathSet::from_source(&m, 3, 9);
        assert!(p.states().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn log_drift_matches_parameters() {
        let m = MarketModel::new(vec![90.0, 90.0], 100.0, 0.05, 0.1, 0.2, 3.0, 9).unwrap();
        let per_step = m.log_drift() * (m.dates[1] - m.dates[0]);
        assert!((per_step - (-0.07 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn initial_states_are_zero_and_payoffs_cached() {
        let m = benchmark();
        let p = simulate_paths(&m, 50, 3).unwrap();
        for k in 0..p.num_paths() {
            assert!(p.state(k, 0).iter().all(|&x| x == 0.0));
            for j in 0..=p.num_dates() {
                let z = max_call_payoff(p.state(k, j), &m, m.dates[j]);
                assert_eq!(z, p.payoff(k, j));
            }
        }
    }

    #[test]
    fn reproducible_across_thread_counts() {
        let m = benchmark();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let a = one.install(|| simulate_paths(&m, 1000, 42).unwrap());
        let b = three.install(|| simulate_paths(&m, 1000, 42).unwrap());
        assert_eq!(a, b);
        let c = simulate_paths(&m, 1000, 43).unwrap();
        assert_ne!(a.states(), c.states());
    }

    #[test]
    fn prefix_of_larger_sample_is_identical() {
        let m = benchmark();
        let small = simulate_paths(&m, 10, 5).unwrap();
        let big = simulate_paths(&m, 100, 5).unwrap();
        for k in 0..10 {
            assert_eq!(small.path_states(k), big.path_states(k));
        }
    }

    #[test]
    fn path_set_rejects_shape_errors() {
        let dates = vec![0.0, 1.0];
        assert!(PathSet::new(vec![0.0; 4], vec![0.0; 4], 1, dates.clone(), 0).is_ok());
        assert!(PathSet::new(vec![0.0; 3], vec![0.0; 4], 1, dates.clone(), 0).is_err());
        assert!(PathSet::new(vec![0.0; 4], vec![0.0, -1.0, 0.0, 0.0], 1, dates, 0).is_err());
    }
}
