//! Discounted reward processes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{MarketModel, PathSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayoffKind {
    MaxCall,
    /// Rewards given as a table over finite chain states; see
    /// [`crate::oracle::FiniteChain`].
    CustomTable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayoffSpec {
    pub kind: PayoffKind,
    pub strike: f64,
    pub rate: f64,
}

impl PayoffSpec {
    pub fn max_call(model: &MarketModel) -> Self {
        PayoffSpec {
            kind: PayoffKind::MaxCall,
            strike: model.strike,
            rate: model.rate,
        }
    }

    /// Discounted max-call reward for log-returns `x` at time `t`.
    pub fn max_call_value(&self, spot: &[f64], x: &[f64], t: f64) -> f64 {
        let best = spot
            .iter()
            .zip(x)
            .map(|(s0, xi)| s0 * xi.exp())
            .fold(f64::NEG_INFINITY, f64::max);
        (-self.rate * t).exp() * (best - self.strike).max(0.0)
    }
}

/// `e^{-r t} max_i (S_0^i e^{x_i} - K)_+`.
pub fn max_call_payoff(x: &[f64], model: &MarketModel, t: f64) -> f64 {
    PayoffSpec::max_call(model).max_call_value(&model.spot, x, t)
}

/// Recomputes the cached rewards of `paths` from its states.
pub fn fill_payoffs(mut paths: PathSet, spec: &PayoffSpec, model: &MarketModel) -> Result<PathSet> {
    if spec.kind == PayoffKind::CustomTable {
        return Err(Error::config(
            "payoff.kind",
            "custom_table rewards are only defined on finite chains",
        ));
    }
    if !(spec.strike.is_finite() && spec.strike >= 0.0) {
        return Err(Error::config("payoff.strike", "strike must be finite and >= 0"));
    }
    if paths.dim() != model.dim() {
        return Err(Error::argument(format!(
            "paths have dimension {}, model has {}",
            paths.dim(),
            model.dim()
        )));
    }
    let width = paths.num_dates() + 1;
    let dates = paths.dates().to_vec();
    let values: Vec<f64> = (0..paths.num_paths())
        .flat_map(|m| (0..width).map(move |j| (m, j)))
        .map(|(m, j)| spec.max_call_value(&model.spot, paths.state(m, j), dates[j]))
        .collect();
    paths.payoffs_mut().copy_from_slice(&values);
    Ok(paths)
}
