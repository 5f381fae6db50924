//! Low-biased re-simulation estimates.
//!
//! A fitted policy is evaluated on fresh trajectories. Because the policy is
//! a feasible (randomized) stopping rule that was chosen without looking at
//! the evaluation paths, the sample mean is an unbiased estimate of a value
//! that never exceeds the optimal one.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{MarketModel, PathSet, PathSource};
use crate::parallel::{blocked_moments, Moments};
use crate::policy::{ExerciseRule, Policy};
use crate::rng::{stream, StreamPurpose};
use crate::stopping::path_value;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EvaluationMode {
    /// Average of `sum_j Z_j p_{0,j}` per path.
    #[serde(rename = "expectation")]
    Expectation,
    /// Draw `U_j ~ U[0, 1)` per date and stop at the first `U_j < h_j`.
    #[serde(rename = "sampled")]
    Sampled,
    /// Stop at the first date with `h_j >= 1/2`.
    #[serde(rename = "hard")]
    HardThreshold,
}

impl EvaluationMode {
    pub fn name(self) -> &'static str {
        match self {
            EvaluationMode::Expectation => "expectation",
            EvaluationMode::Sampled => "sampled",
            EvaluationMode::HardThreshold => "hard",
        }
    }
}

impl std::str::FromStr for EvaluationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "expectation" => Ok(EvaluationMode::Expectation),
            "sampled" => Ok(EvaluationMode::Sampled),
            "hard" | "hard_threshold" => Ok(EvaluationMode::HardThreshold),
            other => Err(Error::config("eval_mode", format!("unknown evaluation mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub run_id: String,
    pub evaluation_mode: EvaluationMode,
    pub link: String,
    pub degree: Option<u32>,
    pub train_paths: usize,
    pub num_paths: usize,
    pub seed: u64,
    pub estimate: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub policy_fingerprint: String,
    pub wall_time_s: Option<f64>,
}

impl EstimateReport {
    fn from_moments(m: &Moments, mode: EvaluationMode, seed: u64) -> Self {
        let se = m.std_error();
        EstimateReport {
            run_id: String::new(),
            evaluation_mode: mode,
            link: String::new(),
            degree: None,
            train_paths: 0,
            num_paths: m.count as usize,
            seed,
            estimate: m.mean,
            std_error: se,
            ci_low: m.mean - Z95 * se,
            ci_high: m.mean + Z95 * se,
            policy_fingerprint: String::new(),
            wall_time_s: None,
        }
    }
}

/// Reward collected on one path under `mode`.
pub fn path_reward(
    h: &[f64],
    z: &[f64],
    mode: EvaluationMode,
    seed: u64,
    index: u64,
) -> f64 {
    match mode {
        EvaluationMode::Expectation => path_value(h, z),
        EvaluationMode::Sampled => {
            let mut rng = stream(seed, StreamPurpose::ExerciseDraws, index);
            for j in 0..h.len() {
                let u: f64 = rng.random();
                if u < h[j] {
                    return z[j];
                }
            }
            z[h.len() - 1]
        }
        EvaluationMode::HardThreshold => {
            let j = h.iter().position(|&p| p >= 0.5).unwrap_or(h.len() - 1);
            z[j]
        }
    }
}

/// Evaluates `rule` on paths `0..num_paths` of `source` generated under
/// `seed`. Paths are generated block by block and never stored.
pub fn estimate_with<S, R>(
    source: &S,
    rule: &R,
    num_paths: usize,
    seed: u64,
    mode: EvaluationMode,
) -> Result<EstimateReport>
where
    S: PathSource + ?Sized,
    R: ExerciseRule + ?Sized,
{
    if num_paths == 0 {
        return Err(Error::argument("num_paths must be at least 1"));
    }
    rule.check_compatible(source.dim(), source.num_dates())?;
    let width = source.num_dates() + 1;
    let d = source.dim();
    let [moments] = blocked_moments::<1, _>(num_paths, |range, acc| {
        let mut states = vec![0.0; width * d];
        let mut z = vec![0.0; width];
        let mut h = vec![0.0; width];
        for n in range {
            source.generate(seed, n as u64, &mut states, &mut z);
            rule.path_probabilities(&states, source.dates(), &mut h);
            acc[0].push(path_reward(&h, &z, mode, seed, n as u64));
        }
    });
    if !moments.mean.is_finite() {
        return Err(Error::numeric(None, "estimate is not finite"));
    }
    Ok(EstimateReport::from_moments(&moments, mode, seed))
}

/// Low-biased price of `policy` on `num_paths` fresh paths of `model`.
pub fn lower_bound_estimate(
    model: &MarketModel,
    policy: &Policy,
    num_paths: usize,
    seed: u64,
    mode: EvaluationMode,
) -> Result<EstimateReport> {
    model.validate()?;
    let mut report = estimate_with(model, policy, num_paths, seed, mode)?;
    report.link = policy.link().name().to_string();
    report.degree = Some(policy.degree());
    report.policy_fingerprint = policy.fingerprint();
    Ok(report)
}

/// A stored path set replays its own trajectories; the seed is ignored.
impl PathSource for PathSet {
    fn dim(&self) -> usize {
        PathSet::dim(self)
    }

    fn dates(&self) -> &[f64] {
        PathSet::dates(self)
    }

    fn generate(&self, _seed: u64, index: u64, states: &mut [f64], payoffs: &mut [f64]) {
        let m = index as usize;
        states.copy_from_slice(self.path_states(m));
        payoffs.copy_from_slice(self.path_payoffs(m));
    }
}

/// Evaluates `rule` on the paths of `paths` (sampled-mode draws use `seed`).
pub fn estimate_on_paths<R: ExerciseRule + ?Sized>(
    paths: &PathSet,
    rule: &R,
    mode: EvaluationMode,
    seed: u64,
) -> Result<EstimateReport> {
    estimate_with(paths, rule, paths.num_paths(), seed, mode)
}

pub const CSV_HEADER: [&str; 12] = [
    "run_id",
    "mode",
    "link",
    "degree",
    "M",
    "N",
    "seed",
    "estimate",
    "std_error",
    "ci_low",
    "ci_high",
    "wall_time_s",
];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV fields of a report, in [`CSV_HEADER`] order.
pub fn summarize(report: &EstimateReport) -> Vec<String> {
    vec![
        report.run_id.clone(),
        report.evaluation_mode.name().to_string(),
        report.link.clone(),
        report.degree.map(|g| g.to_string()).unwrap_or_default(),
        report.train_paths.to_string(),
        report.num_paths.to_string(),
        report.seed.to_string(),
        format_f64(report.estimate),
        format_f64(report.std_error),
        format_f64(report.ci_low),
        format_f64(report.ci_high),
        report.wall_time_s.map(format_f64).unwrap_or_default(),
    ]
}

/// Inverse of [`summarize`] for the numeric and identifying fields.
pub fn parse_row(fields: &[String]) -> Result<EstimateReport> {
    if fields.len() != CSV_HEADER.len() {
        return Err(Error::argument(format!(
            "expected {} fields, got {}",
            CSV_HEADER.len(),
            fields.len()
        )));
    }
    let num = |i: usize| -> Result<f64> {
        fields[i]
            .parse()
            .map_err(|_| Error::argument(format!("field `{}` is not a number", CSV_HEADER[i])))
    };
    let int = |i: usize| -> Result<u64> {
        fields[i]
            .parse()
            .map_err(|_| Error::argument(format!("field `{}` is not an integer", CSV_HEADER[i])))
    };
    Ok(EstimateReport {
        run_id: fields[0].clone(),
        evaluation_mode: fields[1].parse()?,
        link: fields[2].clone(),
        degree: if fields[3].is_empty() { None } else { Some(int(3)? as u32) },
        train_paths: int(4)? as usize,
        num_paths: int(5)? as usize,
        seed: int(6)?,
        estimate: num(7)?,
        std_error: num(8)?,
        ci_low: num(9)?,
        ci_high: num(10)?,
        policy_fingerprint: String::new(),
        wall_time_s: if fields[11].is_empty() { None } else { Some(num(11)?) },
    })
}

/// Human-readable one-liner at three decimals.
pub fn format_summary(report: &EstimateReport) -> String {
    format!(
        "{} [{}] estimate {:.3}  se {:.3}  95% CI [{:.3}, {:.3}]  N = {}",
        if report.run_id.is_empty() { "run" } else { &report.run_id },
        report.evaluation_mode.name(),
        report.estimate,
        report.std_error,
        report.ci_low,
        report.ci_high,
        report.num_paths
    )
}
