//! Parametrized exercise-probability functions.
//!
//! A policy maps a state (and, in time-dependent mode, the date's time) to a
//! score `p = theta . phi(z)`, where `z` is the standardized input and `phi`
//! the vector of monomials of degree at most `g`. A link function turns the
//! score into a probability.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::PathSet;

/// Scores are clamped to `[-SCORE_CLAMP, SCORE_CLAMP]` before the link.
pub const SCORE_CLAMP: f64 = 30.0;

/// Floor for fitted standard deviations.
pub const MIN_SCALE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkFunction {
    /// `e^p / (1 + e^p)`
    Logistic,
    /// `1 - exp(-exp(p))`
    Gumbel,
}

impl LinkFunction {
    pub fn name(self) -> &'static str {
        match self {
            LinkFunction::Logistic => "logistic",
            LinkFunction::Gumbel => "gumbel",
        }
    }

    pub fn value(self, score: f64) -> f64 {
        self.value_and_slope(score).0
    }

    /// Link value and its derivative with respect to the unclamped score.
    /// The slope is zero where the clamp is active.
    pub fn value_and_slope(self, score: f64) -> (f64, f64) {
        let clamped = score.clamp(-SCORE_CLAMP, SCORE_CLAMP);
        let active = clamped == score;
        let (h, slope) = match self {
            LinkFunction::Logistic => {
                let e = (-clamped.abs()).exp();
                let (h, rest) = if clamped >= 0.0 {
                    (1.0 / (1.0 + e), e / (1.0 + e))
                } else {
                    (e / (1.0 + e), 1.0 / (1.0 + e))
                };
                (h, h * rest)
            }
            LinkFunction::Gumbel => {
                let ep = clamped.exp();
                // 1 - e^{-ep} cancels only for small ep.
                if ep < 0.5 {
                    let h = -(-ep).exp_m1();
                    (h, (1.0 - h) * ep)
                } else {
                    let survive = (-ep).exp();
                    (1.0 - survive, survive * ep)
                }
            }
        };
        (h, if active { slope } else { 0.0 })
    }
}

impl std::str::FromStr for LinkFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logistic" => Ok(LinkFunction::Logistic),
            "gumbel" => Ok(LinkFunction::Gumbel),
            other => Err(Error::config("link", format!("unknown link `{other}`"))),
        }
    }
}

/// Monomials of total degree at most `degree` in `num_vars` variables,
/// graded lexicographic with the constant first.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    num_vars: usize,
    degree: u32,
    exponents: Vec<Vec<u32>>,
    // Each non-constant monomial is an earlier monomial times one variable.
    recipe: Vec<(usize, usize)>,
}

impl FeatureMap {
    pub fn new(num_vars: usize, degree: u32) -> Self {
        let mut exponents = Vec::new();
        for total in 0..=degree {
            let mut current = vec![0u32; num_vars];
            push_graded(&mut exponents, &mut current, 0, total);
        }
        let index: HashMap<&[u32], usize> = exponents
            .iter()
            .enumerate()
            .map(|(i, e)| (e.as_slice(), i))
            .collect();
        let recipe = exponents
            .iter()
            .map(|e| match e.iter().position(|&a| a > 0) {
                None => (0, usize::MAX),
                Some(var) => {
                    let mut parent = e.clone();
                    parent[var] -= 1;
                    (index[parent.as_slice()], var)
                }
            })
            .collect();
        FeatureMap {
            num_vars,
            degree,
            exponents,
            recipe,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn exponents(&self) -> &[Vec<u32>] {
        &self.exponents
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    /// Writes the monomials of `z` into `out`.
    pub fn expand(&self, z: &[f64], out: &mut [f64]) {
        debug_assert_eq!(z.len(), self.num_vars);
        out[0] = 1.0;
        for (i, &(parent, var)) in self.recipe.iter().enumerate().skip(1) {
            out[i] = out[parent] * z[var];
        }
    }
}

fn push_graded(out: &mut Vec<Vec<u32>>, current: &mut [u32], var: usize, remaining: u32) {
    if var + 1 == current.len() {
        current[var] = remaining;
        out.push(current.to_vec());
        return;
    }
    if current.is_empty() {
        if remaining == 0 {
            out.push(Vec::new());
        }
        return;
    }
    for a in (0..=remaining).rev() {
        current[var] = a;
        push_graded(out, current, var + 1, remaining - a);
    }
    current[var] = 0;
}

/// Affine input normalization `z_i = (x_i - shift_i) / scale_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub shift: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn identity(num_vars: usize) -> Self {
        Standardizer {
            shift: vec![0.0; num_vars],
            scale: vec![1.0; num_vars],
        }
    }

    /// Per-variable mean and population standard deviation of `rows`, with
    /// the deviation floored at [`MIN_SCALE`].
    pub fn fit<'a, I>(num_vars: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut count = 0usize;
        let mut mean = vec![0.0; num_vars];
        let mut m2 = vec![0.0; num_vars];
        for row in rows {
            if row.len() != num_vars {
                return Err(Error::argument("standardizer sample has the wrong width"));
            }
            count += 1;
            for i in 0..num_vars {
                let delta = row[i] - mean[i];
                mean[i] += delta / count as f64;
                m2[i] += delta * (row[i] - mean[i]);
            }
        }
        if count == 0 {
            return Err(Error::argument("cannot fit a standardizer on an empty sample"));
        }
        let scale = m2
            .iter()
            .map(|s| (s / count as f64).sqrt().max(MIN_SCALE))
            .collect();
        Ok(Standardizer { shift: mean, scale })
    }

    pub fn apply(&self, raw: &[f64], out: &mut [f64]) {
        for i in 0..raw.len() {
            out[i] = (raw[i] - self.shift[i]) / self.scale[i];
        }
    }

    fn validate(&self, num_vars: usize) -> Result<()> {
        if self.shift.len() != num_vars || self.scale.len() != num_vars {
            return Err(Error::argument("standardizer width does not match the feature map"));
        }
        if self.scale.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::argument("standardizer scales must be positive"));
        }
        if self.shift.iter().any(|s| !s.is_finite()) {
            return Err(Error::argument("standardizer shifts must be finite"));
        }
        Ok(())
    }
}

/// Standardizer-free feature map plus optional fitted standardizer.
pub fn build_feature_map<'a, I>(
    num_vars: usize,
    degree: u32,
    sample_states: Option<I>,
) -> Result<(FeatureMap, Standardizer)>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let map = FeatureMap::new(num_vars, degree);
    let standardizer = match sample_states {
        Some(rows) => Standardizer::fit(num_vars, rows)?,
        None => Standardizer::identity(num_vars),
    };
    Ok((map, standardizer))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyMode {
    /// One coefficient vector and standardizer per date `0..J`.
    PerDate,
    /// A single coefficient vector over `(state, t)`.
    TimeDependent,
}

/// Something that assigns exercise probabilities along a trajectory.
pub trait ExerciseRule: Sync {
    fn check_compatible(&self, dim: usize, num_dates: usize) -> Result<()>;

    /// Fills `out[0..=J]` with `h_j(X_j)`; `out[J]` is always 1. `states` is
    /// date-major with `dim = states.len() / dates.len()` values per date.
    fn path_probabilities(&self, states: &[f64], dates: &[f64], out: &mut [f64]);
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolicyDocument", into = "PolicyDocument")]
pub struct Policy {
    mode: PolicyMode,
    link: LinkFunction,
    features: FeatureMap,
    state_dim: usize,
    num_dates: usize,
    standardizers: Vec<Standardizer>,
    coefficients: Vec<Vec<f64>>,
    model_fingerprint: String,
}

/// Reusable buffers for policy evaluation.
#[derive(Debug, Clone, Default)]
pub struct Scratch {
    raw: Vec<f64>,
    z: Vec<f64>,
    pub phi: Vec<f64>,
}

impl Policy {
    /// Per-date policy with identity standardizers and zero coefficients.
    pub fn per_date(link: LinkFunction, degree: u32, state_dim: usize, num_dates: usize) -> Self {
        let features = FeatureMap::new(state_dim, degree);
        let n = features.len();
        Policy {
            mode: PolicyMode::PerDate,
            link,
            features,
            state_dim,
            num_dates,
            standardizers: vec![Standardizer::identity(state_dim); num_dates],
            coefficients: vec![vec![0.0; n]; num_dates],
            model_fingerprint: String::new(),
        }
    }

    /// Time-dependent policy over `(state, t)` with identity standardizer.
    pub fn time_dependent(
        link: LinkFunction,
        degree: u32,
        state_dim: usize,
        num_dates: usize,
    ) -> Self {
        let features = FeatureMap::new(state_dim + 1, degree);
        let n = features.len();
        Policy {
            mode: PolicyMode::TimeDependent,
            link,
            features,
            state_dim,
            num_dates,
            standardizers: vec![Standardizer::identity(state_dim + 1)],
            coefficients: vec![vec![0.0; n]],
            model_fingerprint: String::new(),
        }
    }

    /// Per-date template with standardizers fitted to each date of `paths`.
    pub fn per_date_template(link: LinkFunction, degree: u32, paths: &PathSet) -> Result<Self> {
        Policy::per_date(link, degree, paths.dim(), paths.num_dates()).with_standardizers_from(paths)
    }

    /// Time-dependent template with a standardizer fitted to `(X_j, t_j)`
    /// pooled over the dates `0..J`.
    pub fn time_dependent_template(
        link: LinkFunction,
        degree: u32,
        paths: &PathSet,
    ) -> Result<Self> {
        Policy::time_dependent(link, degree, paths.dim(), paths.num_dates())
            .with_standardizers_from(paths)
    }

    pub fn with_standardizers_from(mut self, paths: &PathSet) -> Result<Self> {
        self.check_compatible(paths.dim(), paths.num_dates())?;
        let d = self.state_dim;
        match self.mode {
            PolicyMode::PerDate => {
                for j in 0..self.num_dates {
                    self.standardizers[j] =
                        Standardizer::fit(d, (0..paths.num_paths()).map(|m| paths.state(m, j)))?;
                }
            }
            PolicyMode::TimeDependent => {
                let rows: Vec<f64> = (0..paths.num_paths())
                    .flat_map(|m| (0..self.num_dates).map(move |j| (m, j)))
                    .flat_map(|(m, j)| {
                        paths
                            .state(m, j)
                            .iter()
                            .copied()
                            .chain(std::iter::once(paths.dates()[j]))
                    })
                    .collect();
                self.standardizers[0] = Standardizer::fit(d + 1, rows.chunks(d + 1))?;
            }
        }
        Ok(self)
    }

    pub fn with_model_fingerprint(mut self, fingerprint: impl Into<String>) -> Self {
        self.model_fingerprint = fingerprint.into();
        self
    }

    pub fn mode(&self) -> PolicyMode {
        self.mode
    }

    pub fn link(&self) -> LinkFunction {
        self.link
    }

    pub fn features(&self) -> &FeatureMap {
        &self.features
    }

    pub fn degree(&self) -> u32 {
        self.features.degree
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn num_dates(&self) -> usize {
        self.num_dates
    }

    pub fn num_params(&self) -> usize {
        self.features.len()
    }

    pub fn model_fingerprint(&self) -> &str {
        &self.model_fingerprint
    }

    pub fn standardizers(&self) -> &[Standardizer] {
        &self.standardizers
    }

    /// Coefficients used at date `j < J`.
    pub fn coefficients(&self, j: usize) -> &[f64] {
        match self.mode {
            PolicyMode::PerDate => &self.coefficients[j],
            PolicyMode::TimeDependent => &self.coefficients[0],
        }
    }

    /// All coefficient vectors: `J` of them per date, or one.
    pub fn coefficient_vectors(&self) -> &[Vec<f64>] {
        &self.coefficients
    }

    /// Replaces the coefficients used at date `j` (every date in
    /// time-dependent mode).
    pub fn set_coefficients(&mut self, j: usize, theta: &[f64]) -> Result<()> {
        if theta.len() != self.num_params() {
            return Err(Error::argument(format!(
                "expected {} coefficients, got {}",
                self.num_params(),
                theta.len()
            )));
        }
        let slot = match self.mode {
            PolicyMode::PerDate => {
                if j >= self.num_dates {
                    return Err(Error::argument(format!("date {j} has no coefficients")));
                }
                j
            }
            PolicyMode::TimeDependent => 0,
        };
        self.coefficients[slot].copy_from_slice(theta);
        Ok(())
    }

    pub fn scratch(&self) -> Scratch {
        let n = self.features.num_vars;
        Scratch {
            raw: vec![0.0; n],
            z: vec![0.0; n],
            phi: vec![0.0; self.features.len()],
        }
    }

    /// Standardized monomial features for date `j < J` into `scratch.phi`.
    pub fn features_into(&self, j: usize, state: &[f64], t: f64, scratch: &mut Scratch) {
        let d = self.state_dim;
        scratch.raw[..d].copy_from_slice(&state[..d]);
        let standardizer = match self.mode {
            PolicyMode::PerDate => &self.standardizers[j],
            PolicyMode::TimeDependent => {
                scratch.raw[d] = t;
                &self.standardizers[0]
            }
        };
        standardizer.apply(&scratch.raw, &mut scratch.z);
        self.features.expand(&scratch.z, &mut scratch.phi);
    }

    /// Unclamped polynomial score at date `j < J` given features `phi`.
    pub fn score(&self, j: usize, phi: &[f64]) -> f64 {
        dot(self.coefficients(j), phi)
    }

    /// Exercise probability at date `j`; exactly 1 for `j >= J`.
    pub fn eval_h(&self, j: usize, state: &[f64], t: f64) -> f64 {
        if j >= self.num_dates {
            return 1.0;
        }
        let mut scratch = self.scratch();
        self.features_into(j, state, t, &mut scratch);
        self.link.value(self.score(j, &scratch.phi))
    }

    /// Exercise probability and its gradient with respect to the date-`j`
    /// coefficients.
    pub fn eval_h_grad(&self, j: usize, state: &[f64], t: f64) -> Result<(f64, Vec<f64>)> {
        if j >= self.num_dates {
            return Err(Error::argument(format!(
                "date {j} is terminal and has no parameters"
            )));
        }
        let mut scratch = self.scratch();
        self.features_into(j, state, t, &mut scratch);
        let (h, slope) = self.link.value_and_slope(self.score(j, &scratch.phi));
        Ok((h, scratch.phi.iter().map(|f| slope * f).collect()))
    }

    /// Short hex digest of the serialized policy.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let json = serde_json::to_vec(self).expect("policy serializes");
        hex::encode(&Sha256::digest(json)[..8])
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

impl ExerciseRule for Policy {
    fn check_compatible(&self, dim: usize, num_dates: usize) -> Result<()> {
        if dim != self.state_dim || num_dates != self.num_dates {
            return Err(Error::argument(format!(
                "policy expects dimension {} with {} dates, paths have dimension {dim} with {num_dates}",
                self.state_dim, self.num_dates
            )));
        }
        Ok(())
    }

    fn path_probabilities(&self, states: &[f64], dates: &[f64], out: &mut [f64]) {
        let d = self.state_dim;
        let mut scratch = self.scratch();
        for j in 0..self.num_dates {
            self.features_into(j, &states[j * d..(j + 1) * d], dates[j], &mut scratch);
            out[j] = self.link.value(self.score(j, &scratch.phi));
        }
        out[self.num_dates] = 1.0;
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Serialize, Deserialize)]
struct PolicyDocument {
    mode: PolicyMode,
    link: LinkFunction,
    degree: u32,
    num_vars: usize,
    state_dim: usize,
    num_dates: usize,
    exponents: Vec<Vec<u32>>,
    standardizer: Vec<Standardizer>,
    coefficients: Vec<Vec<f64>>,
    model_fingerprint: String,
}

impl From<Policy> for PolicyDocument {
    fn from(p: Policy) -> Self {
        PolicyDocument {
            mode: p.mode,
            link: p.link,
            degree: p.features.degree,
            num_vars: p.features.num_vars,
            state_dim: p.state_dim,
            num_dates: p.num_dates,
            exponents: p.features.exponents.clone(),
            standardizer: p.standardizers,
            coefficients: p.coefficients,
            model_fingerprint: p.model_fingerprint,
        }
    }
}

impl TryFrom<PolicyDocument> for Policy {
    type Error = Error;

    fn try_from(doc: PolicyDocument) -> Result<Self> {
        let expected_vars = match doc.mode {
            PolicyMode::PerDate => doc.state_dim,
            PolicyMode::TimeDependent => doc.state_dim + 1,
        };
        if doc.num_vars != expected_vars {
            return Err(Error::argument("num_vars does not match mode and state_dim"));
        }
        let features = FeatureMap::new(doc.num_vars, doc.degree);
        if features.exponents != doc.exponents {
            return Err(Error::argument(
                "exponents are not the graded lexicographic monomial list",
            ));
        }
        let slots = match doc.mode {
            PolicyMode::PerDate => doc.num_dates,
            PolicyMode::TimeDependent => 1,
        };
        if doc.standardizer.len() != slots || doc.coefficients.len() != slots {
            return Err(Error::argument(format!(
                "expected {slots} standardizers and coefficient vectors"
            )));
        }
        for s in &doc.standardizer {
            s.validate(doc.num_vars)?;
        }
        if doc
            .coefficients
            .iter()
            .any(|c| c.len() != features.len() || c.iter().any(|v| !v.is_finite()))
        {
            return Err(Error::argument(
                "coefficient vectors must be finite with one entry per monomial",
            ));
        }
        Ok(Policy {
            mode: doc.mode,
            link: doc.link,
            features,
            state_dim: doc.state_dim,
            num_dates: doc.num_dates,
            standardizers: doc.standardizer,
            coefficients: doc.coefficients,
            model_fingerprint: doc.model_fingerprint,
        })
    }
}
