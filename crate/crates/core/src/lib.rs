//! Randomized optimal stopping for Bermudan-style problems.
//!
//! Exercise decisions are encoded as smooth probabilities `h_j(x) in [0, 1]`:
//! a rule stops at date `j` with probability `h_j(X_j)` given that it has not
//! stopped before. The expected reward of such a rule along one trajectory is
//!
//! ```text
//! V_0 = sum_j Z_j h_j(X_j) prod_{l<j} (1 - h_l(X_l)),   h_J = 1,
//! ```
//!
//! which is smooth in the policy parameters and can therefore be maximized
//! with gradient methods. Two fitting schemes are provided: a backward
//! recursion that fits one date at a time against a linear objective, and a
//! forward scheme that optimizes one time-dependent policy over the whole
//! horizon. Prices are then re-estimated on independent paths, which gives a
//! low-biased estimate of the optimal stopping value.

pub mod cli;
pub mod config;
pub mod error;
pub mod estimate;
pub mod market;
pub mod optimize;
pub mod oracle;
pub mod parallel;
pub mod payoff;
pub mod policy;
pub mod rng;
pub mod stopping;

pub use error::{Error, Result};
pub use estimate::{lower_bound_estimate, EstimateReport, EvaluationMode};
pub use market::{make_time_grid, simulate_paths, MarketModel, PathSet, PathSource};
pub use optimize::{backward_fit, forward_fit, FitReport, OptimizerConfig};
pub use payoff::{max_call_payoff, PayoffKind, PayoffSpec};
pub use policy::{ExerciseRule, FeatureMap, LinkFunction, Policy, PolicyMode, Standardizer};
pub use stopping::{compute_profile, randomized_value, xi_coefficients, StoppingProfile};
