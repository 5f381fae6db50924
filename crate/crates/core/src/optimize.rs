//! Backward and forward policy fitting.
//!
//! Both fitters maximize a smooth in-sample value with Adam on full-batch
//! (or minibatch) gradients. Objectives are expressed per path, so the value
//! being maximized is always an average reward in currency units.

use std::ops::Range;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::PathSet;
use crate::parallel::{blocked_sum, BLOCK};
use crate::policy::{dot, ExerciseRule, LinkFunction, Policy, PolicyMode};
use crate::rng::{mix64, stream, StreamPurpose};
use crate::stopping::path_value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerMethod {
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub method: OptimizerMethod,
    pub step_size: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub max_iters: usize,
    /// Paths per minibatch; 0 means full batch.
    pub minibatch: usize,
    /// Stop when the objective moved by at most `tol_rel` (relative) over
    /// the last 10 iterations.
    pub tol_rel: f64,
    pub restarts: usize,
    pub seed: u64,
}

/// Iterations compared by the relative-improvement stopping rule.
pub const TOL_WINDOW: usize = 10;

/// Half-width of the uniform perturbation applied to restarts after the first.
pub const RESTART_NOISE: f64 = 0.1;

impl OptimizerConfig {
    /// Per-date fits start from zero every time, so they get a larger step
    /// than the joint fit to reach sharp exercise boundaries within budget.
    pub fn backward_default() -> Self {
        OptimizerConfig {
            method: OptimizerMethod::Adam,
            step_size: 0.2,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            max_iters: 1500,
            minibatch: 0,
            tol_rel: 1e-7,
            restarts: 1,
            seed: 0,
        }
    }

    pub fn forward_default() -> Self {
        OptimizerConfig {
            step_size: 0.05,
            max_iters: 1000,
            ..OptimizerConfig::backward_default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let field = |name: &str| format!("optimizer.{name}");
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(Error::config(field("step_size"), "must be positive"));
        }
        if !(self.beta1 > 0.0 && self.beta1 < 1.0) {
            return Err(Error::config(field("beta1"), "must lie in (0, 1)"));
        }
        if !(self.beta2 > 0.0 && self.beta2 < 1.0) {
            return Err(Error::config(field("beta2"), "must lie in (0, 1)"));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::config(field("epsilon"), "must be positive"));
        }
        if self.max_iters == 0 {
            return Err(Error::config(field("max_iters"), "must be at least 1"));
        }
        if !(self.tol_rel.is_finite() && self.tol_rel >= 0.0) {
            return Err(Error::config(field("tol_rel"), "must be >= 0"));
        }
        if self.restarts == 0 {
            return Err(Error::config(field("restarts"), "must be at least 1"));
        }
        Ok(())
    }
}

/// Adam moments for gradient ascent.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    first: Vec<f64>,
    second: Vec<f64>,
    iter: u64,
}

impl AdamState {
    pub fn new(n: usize) -> Self {
        AdamState {
            first: vec![0.0; n],
            second: vec![0.0; n],
            iter: 0,
        }
    }

    pub fn iterations(&self) -> u64 {
        self.iter
    }

    /// One bias-corrected ascent step, `params += lr m_hat / (sqrt(v_hat) + eps)`.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64], cfg: &OptimizerConfig) -> Result<()> {
        if params.len() != self.first.len() || grad.len() != self.first.len() {
            return Err(Error::argument("adam state, parameters and gradient differ in length"));
        }
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::numeric(None, "non-finite gradient component"));
        }
        self.iter += 1;
        let t = self.iter as i32;
        let c1 = 1.0 - cfg.beta1.powi(t);
        let c2 = 1.0 - cfg.beta2.powi(t);
        for i in 0..params.len() {
            self.first[i] = cfg.beta1 * self.first[i] + (1.0 - cfg.beta1) * grad[i];
            self.second[i] = cfg.beta2 * self.second[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
            let m_hat = self.first[i] / c1;
            let v_hat = self.second[i] / c2;
            params[i] += cfg.step_size * m_hat / (v_hat.sqrt() + cfg.epsilon);
        }
        Ok(())
    }
}

/// Summary of one fitting problem (one date for the backward fitter).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// Date index fitted, or `None` for a joint fit.
    pub date: Option<usize>,
    /// Full-batch objective after every iteration of the selected restart,
    /// starting with the initial point.
    pub objective_trace: Vec<f64>,
    pub initial_objective: f64,
    /// Best objective across restarts; the returned coefficients attain it.
    pub final_objective: f64,
    pub iterations_used: usize,
    pub restart_index_selected: usize,
    pub restarts_aborted: usize,
    pub wall_time: f64,
}

/// A smooth objective averaged over samples.
pub trait Objective: Sync {
    fn num_params(&self) -> usize;
    fn num_samples(&self) -> usize;

    /// Mean value and gradient over `samples`, or over every sample.
    fn evaluate(&self, theta: &[f64], samples: Option<&[usize]>) -> (f64, Vec<f64>);
}

fn sum_over<F>(n: usize, samples: Option<&[usize]>, width: usize, per_sample: F) -> (Vec<f64>, usize)
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    match samples {
        None => (
            blocked_sum(n, width, |r: Range<usize>, acc| r.for_each(|m| per_sample(m, acc))),
            n,
        ),
        Some(idx) => (
            blocked_sum(idx.len(), width, |r: Range<usize>, acc| {
                idx[r].iter().for_each(|&m| per_sample(m, acc))
            }),
            idx.len(),
        ),
    }
}

fn split_value_grad(mut acc: Vec<f64>, count: usize, offset: f64) -> (f64, Vec<f64>) {
    let scale = 1.0 / count.max(1) as f64;
    acc.iter_mut().for_each(|a| *a *= scale);
    let value = acc[0] + offset;
    acc.remove(0);
    (value, acc)
}

/// The backward step at date `k - 1`: `Q(theta) = (1/M) sum_m xi^(m)
/// h_theta(X^(m)) + (1/M) sum_m V_k^(m)`, the in-sample value from date
/// `k - 1` with the later dates frozen.
#[derive(Debug, Clone)]
pub struct BackwardObjective {
    link: LinkFunction,
    num_params: usize,
    features: Vec<f64>,
    xi: Vec<f64>,
    offset: f64,
}

impl BackwardObjective {
    /// Objective for date `date` of `policy` on `paths`, using the policy's
    /// current coefficients at dates after `date`.
    pub fn new(paths: &PathSet, policy: &Policy, date: usize) -> Result<Self> {
        if policy.mode() != PolicyMode::PerDate {
            return Err(Error::argument("backward fitting needs a per-date policy"));
        }
        policy.check_compatible(paths.dim(), paths.num_dates())?;
        if date >= paths.num_dates() {
            return Err(Error::argument(format!("date {date} has no parameters")));
        }
        let width = paths.num_dates() + 1;
        let tail: Vec<f64> = (0..paths.num_paths())
            .into_par_iter()
            .map(|m| {
                let mut h = vec![0.0; width];
                policy.path_probabilities(paths.path_states(m), paths.dates(), &mut h);
                path_value(&h[date + 1..], &paths.path_payoffs(m)[date + 1..])
            })
            .collect();
        Ok(Self::from_tail(paths, policy, date, &tail))
    }

    fn from_tail(paths: &PathSet, policy: &Policy, date: usize, tail: &[f64]) -> Self {
        let nf = policy.num_params();
        let mut features = vec![0.0; paths.num_paths() * nf];
        features
            .par_chunks_mut(nf)
            .enumerate()
            .for_each_init(
                || policy.scratch(),
                |scratch, (m, row)| {
                    policy.features_into(date, paths.state(m, date), paths.dates()[date], scratch);
                    row.copy_from_slice(&scratch.phi);
                },
            );
        let xi = (0..paths.num_paths())
            .map(|m| paths.payoff(m, date) - tail[m])
            .collect();
        let offset = blocked_sum(tail.len(), 1, |r, acc| r.for_each(|m| acc[0] += tail[m]))[0]
            / tail.len() as f64;
        BackwardObjective {
            link: policy.link(),
            num_params: nf,
            features,
            xi,
            offset,
        }
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    /// `(1/M) sum_m V_k^(m)`, the part of the value not depending on theta.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    fn h_at(&self, theta: &[f64], m: usize) -> f64 {
        let row = &self.features[m * self.num_params..(m + 1) * self.num_params];
        self.link.value(dot(theta, row))
    }
}

impl Objective for BackwardObjective {
    fn num_params(&self) -> usize {
        self.num_params
    }

    fn num_samples(&self) -> usize {
        self.xi.len()
    }

    fn evaluate(&self, theta: &[f64], samples: Option<&[usize]>) -> (f64, Vec<f64>) {
        let nf = self.num_params;
        let (acc, count) = sum_over(self.xi.len(), samples, nf + 1, |m, acc| {
            let xi = self.xi[m];
            if xi == 0.0 {
                return;
            }
            let row = &self.features[m * nf..(m + 1) * nf];
            let (h, slope) = self.link.value_and_slope(dot(theta, row));
            acc[0] += xi * h;
            let w = xi * slope;
            if w != 0.0 {
                for (a, f) in acc[1..].iter_mut().zip(row) {
                    *a += w * f;
                }
            }
        });
        split_value_grad(acc, count, self.offset)
    }
}

/// The forward objective: the in-sample randomized value
/// `(1/M) sum_m sum_j Z_j p_{0,j}` of a time-dependent policy as a function
/// of its single coefficient vector.
///
/// The gradient uses `dV_0/dh_l = S_l (Z_l - V_{l+1})` with prefix survival
/// `S_l` and suffix value `V_{l+1}`, so no division by `h` or `1 - h` occurs.
pub struct ForwardObjective<'a> {
    paths: &'a PathSet,
    policy: Policy,
}

impl<'a> ForwardObjective<'a> {
    pub fn new(paths: &'a PathSet, policy: &Policy) -> Result<Self> {
        policy.check_compatible(paths.dim(), paths.num_dates())?;
        Ok(ForwardObjective {
            paths,
            policy: policy.clone(),
        })
    }
}

impl Objective for ForwardObjective<'_> {
    fn num_params(&self) -> usize {
        self.policy.num_params()
    }

    fn num_samples(&self) -> usize {
        self.paths.num_paths()
    }

    fn evaluate(&self, theta: &[f64], samples: Option<&[usize]>) -> (f64, Vec<f64>) {
        let policy = &self.policy;
        let paths = self.paths;
        let nf = policy.num_params();
        let jn = paths.num_dates();
        let d = paths.dim();
        let link = policy.link();
        let per_date_theta: Vec<&[f64]> = (0..jn)
            .map(|j| match policy.mode() {
                PolicyMode::TimeDependent => theta,
                PolicyMode::PerDate => &theta[j * nf..(j + 1) * nf],
            })
            .collect();
        let (acc, count) = sum_over(paths.num_paths(), samples, self.num_params_total() + 1, |m, acc| {
            thread_local! {
                static BUF: std::cell::RefCell<ForwardBuffers> = Default::default();
            }
            BUF.with(|cell| {
                let mut b = cell.borrow_mut();
                b.ensure(policy, jn);
                let ForwardBuffers {
                    scratch,
                    phi,
                    h,
                    slope,
                    survival,
                } = &mut *b;
                let states = paths.path_states(m);
                let z = paths.path_payoffs(m);
                for j in 0..jn {
                    policy.features_into(j, &states[j * d..(j + 1) * d], paths.dates()[j], scratch);
                    phi[j * nf..(j + 1) * nf].copy_from_slice(&scratch.phi);
                    let (hj, sj) = link.value_and_slope(dot(per_date_theta[j], &scratch.phi));
                    h[j] = hj;
                    slope[j] = sj;
                }
                survival[0] = 1.0;
                for j in 0..jn {
                    survival[j + 1] = survival[j] * (1.0 - h[j]);
                }
                let mut tail = z[jn];
                for j in (0..jn).rev() {
                    let w = survival[j] * (z[j] - tail) * slope[j];
                    if w != 0.0 {
                        let off = match policy.mode() {
                            PolicyMode::TimeDependent => 0,
                            PolicyMode::PerDate => j * nf,
                        };
                        for (a, f) in acc[1 + off..1 + off + nf].iter_mut().zip(&phi[j * nf..(j + 1) * nf]) {
                            *a += w * f;
                        }
                    }
                    tail = h[j] * z[j] + (1.0 - h[j]) * tail;
                }
                acc[0] += tail;
            });
        });
        split_value_grad(acc, count, 0.0)
    }
}

impl ForwardObjective<'_> {
    fn num_params_total(&self) -> usize {
        match self.policy.mode() {
            PolicyMode::TimeDependent => self.policy.num_params(),
            PolicyMode::PerDate => self.policy.num_params() * self.paths.num_dates(),
        }
    }

    /// Coefficient vector of the underlying policy laid out as the
    /// objective expects: one vector, or all per-date vectors concatenated.
    pub fn initial_theta(&self) -> Vec<f64> {
        self.policy.coefficient_vectors().concat()
    }
}

#[derive(Default)]
struct ForwardBuffers {
    scratch: crate::policy::Scratch,
    phi: Vec<f64>,
    h: Vec<f64>,
    slope: Vec<f64>,
    survival: Vec<f64>,
}

impl ForwardBuffers {
    fn ensure(&mut self, policy: &Policy, jn: usize) {
        let nf = policy.num_params();
        if self.phi.len() != jn * nf || self.scratch.phi.len() != nf {
            self.scratch = policy.scratch();
            self.phi = vec![0.0; jn * nf];
            self.h = vec![0.0; jn];
            self.slope = vec![0.0; jn];
            self.survival = vec![0.0; jn + 1];
        }
    }
}

struct RestartOutcome {
    theta: Vec<f64>,
    best: f64,
    trace: Vec<f64>,
    iterations: usize,
}

fn run_restart<O: Objective + ?Sized>(
    obj: &O,
    mut theta: Vec<f64>,
    cfg: &OptimizerConfig,
    shuffle_key: u64,
) -> Option<RestartOutcome> {
    let (mut value, mut grad) = obj.evaluate(&theta, None);
    if !value.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return None;
    }
    let mut adam = AdamState::new(theta.len());
    let mut trace = vec![value];
    let mut best = (value, theta.clone());
    let n = obj.num_samples();
    let use_batches = cfg.minibatch > 0 && cfg.minibatch < n;
    let mut order: Vec<usize> = if use_batches { (0..n).collect() } else { Vec::new() };
    let mut iterations = 0;
    for it in 1..=cfg.max_iters {
        if use_batches {
            let mut rng = stream(cfg.seed, StreamPurpose::Shuffle, mix64(shuffle_key ^ it as u64));
            order.shuffle(&mut rng);
            for batch in order.chunks(cfg.minibatch) {
                let (_, g) = obj.evaluate(&theta, Some(batch));
                adam.step(&mut theta, &g, cfg).ok()?;
            }
        } else {
            adam.step(&mut theta, &grad, cfg).ok()?;
        }
        (value, grad) = obj.evaluate(&theta, None);
        if !value.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return None;
        }
        trace.push(value);
        iterations = it;
        if value > best.0 {
            best = (value, theta.clone());
        }
        if it >= TOL_WINDOW {
            let past = trace[it - TOL_WINDOW];
            if (value - past).abs() <= cfg.tol_rel * value.abs().max(f64::MIN_POSITIVE) {
                break;
            }
        }
    }
    Some(RestartOutcome {
        theta: best.1,
        best: best.0,
        trace,
        iterations,
    })
}

/// Maximizes `obj` from `init` with restarts; restart 0 starts exactly at
/// `init`, later restarts at `init` plus centered uniform noise. Returns the
/// best coefficients seen across all restarts.
pub fn maximize<O: Objective + ?Sized>(
    obj: &O,
    init: &[f64],
    cfg: &OptimizerConfig,
    date: Option<usize>,
) -> Result<(Vec<f64>, FitReport)> {
    cfg.validate()?;
    if init.len() != obj.num_params() {
        return Err(Error::argument("initial point has the wrong length"));
    }
    let start = Instant::now();
    let key = date.map_or(u64::MAX, |d| d as u64);
    let mut selected: Option<(usize, RestartOutcome)> = None;
    let mut initial_objective = f64::NAN;
    let mut aborted = 0;
    for r in 0..cfg.restarts {
        let mut theta = init.to_vec();
        if r > 0 {
            let mut rng = stream(cfg.seed, StreamPurpose::Restarts, mix64(key) ^ r as u64);
            theta
                .iter_mut()
                .for_each(|t| *t += rng.random_range(-RESTART_NOISE..RESTART_NOISE));
        }
        match run_restart(obj, theta, cfg, mix64(key.wrapping_add(r as u64))) {
            Some(outcome) => {
                if r == 0 {
                    initial_objective = outcome.trace[0];
                }
                if selected.as_ref().is_none_or(|(_, s)| outcome.best > s.best) {
                    selected = Some((r, outcome));
                }
            }
            None => aborted += 1,
        }
    }
    let (index, outcome) = selected.ok_or_else(|| {
        Error::numeric(date, "objective or gradient became non-finite in every restart")
    })?;
    if initial_objective.is_nan() {
        initial_objective = outcome.trace[0];
    }
    let report = FitReport {
        date,
        initial_objective,
        final_objective: outcome.best,
        objective_trace: outcome.trace,
        iterations_used: outcome.iterations,
        restart_index_selected: index,
        restarts_aborted: aborted,
        wall_time: start.elapsed().as_secs_f64(),
    };
    Ok((outcome.theta, report))
}

fn check_paths(paths: &PathSet) -> Result<()> {
    if paths.payoffs().iter().any(|z| !z.is_finite()) {
        return Err(Error::numeric(None, "non-finite payoff in training paths"));
    }
    Ok(())
}

/// Fits `h_{J-1}, ..., h_0` one date at a time. At date `k - 1` the tail
/// policy is frozen and the objective is linear in `h_{k-1}` with weights
/// `xi_{k-1}`, which are computed once per date. Returns the fitted policy
/// and one report per date, in date order.
pub fn backward_fit(
    paths: &PathSet,
    template: &Policy,
    opt: &OptimizerConfig,
) -> Result<(Policy, Vec<FitReport>)> {
    if template.mode() != PolicyMode::PerDate {
        return Err(Error::argument("backward fitting needs a per-date policy"));
    }
    template.check_compatible(paths.dim(), paths.num_dates())?;
    opt.validate()?;
    check_paths(paths)?;
    let jn = paths.num_dates();
    let mut policy = template.clone();
    let mut tail: Vec<f64> = (0..paths.num_paths()).map(|m| paths.payoff(m, jn)).collect();
    let mut reports = Vec::with_capacity(jn);
    for date in (0..jn).rev() {
        let obj = BackwardObjective::from_tail(paths, &policy, date, &tail);
        let (theta, report) = maximize(&obj, template.coefficients(date), opt, Some(date))?;
        tail.par_chunks_mut(BLOCK)
            .enumerate()
            .for_each(|(b, chunk)| {
                for (i, v) in chunk.iter_mut().enumerate() {
                    let m = b * BLOCK + i;
                    let h = obj.h_at(&theta, m);
                    *v = h * paths.payoff(m, date) + (1.0 - h) * *v;
                }
            });
        policy.set_coefficients(date, &theta)?;
        reports.push(report);
    }
    reports.reverse();
    Ok((policy, reports))
}

/// Jointly fits the coefficients of a time-dependent policy by maximizing
/// the in-sample randomized value over the whole horizon.
pub fn forward_fit(
    paths: &PathSet,
    template: &Policy,
    opt: &OptimizerConfig,
) -> Result<(Policy, FitReport)> {
    if template.mode() != PolicyMode::TimeDependent {
        return Err(Error::argument("forward fitting needs a time-dependent policy"));
    }
    opt.validate()?;
    check_paths(paths)?;
    let obj = ForwardObjective::new(paths, template)?;
    let (theta, report) = maximize(&obj, &obj.initial_theta(), opt, None)?;
    let mut policy = template.clone();
    policy.set_coefficients(0, &theta)?;
    Ok((policy, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> OptimizerConfig {
        OptimizerConfig::backward_default()
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut adam = AdamState::new(3);
        let mut p = vec![1.0, -2.0, 0.5];
        adam.step(&mut p, &[0.0; 3], &cfg()).unwrap();
        assert_eq!(p, vec![1.0, -2.0, 0.5]);
    }

    #[test]
    fn constant_gradient_moves_at_step_size() {
        let mut adam = AdamState::new(2);
        let mut p = vec![0.0, 0.0];
        let mut prev = p.clone();
        for _ in 0..500 {
            adam.step(&mut p, &[3.0, -0.01], &cfg()).unwrap();
            assert!(p[0] > prev[0] && p[1] < prev[1]);
            prev = p.clone();
        }
        let mut last = p.clone();
        adam.step(&mut last, &[3.0, -0.01], &cfg()).unwrap();
        let step = cfg().step_size;
        assert!(((last[0] - p[0]) - step).abs() < 1e-6);
        assert!(((last[1] - p[1]) + step).abs() < 1e-4);
    }

    #[test]
    fn non_finite_gradient_is_a_numeric_fault() {
        let mut adam = AdamState::new(1);
        let mut p = vec![0.0];
        assert!(matches!(
            adam.step(&mut p, &[f64::NAN], &cfg()),
            Err(Error::Numeric { .. })
        ));
    }

    #[test]
    fn config_validation_names_fields() {
        let mut c = cfg();
        c.restarts = 0;
        assert!(matches!(c.validate(), Err(Error::Config { field, .. }) if field == "optimizer.restarts"));
        let mut c = cfg();
        c.beta1 = 1.0;
        assert!(c.validate().is_err());
    }

    struct Concave;
    impl Objective for Concave {
        fn num_params(&self) -> usize {
            2
        }
        fn num_samples(&self) -> usize {
            1
        }
        fn evaluate(&self, t: &[f64], _: Option<&[usize]>) -> (f64, Vec<f64>) {
            (
                -(t[0] - 1.0).powi(2) - (t[1] + 2.0).powi(2),
                vec![-2.0 * (t[0] - 1.0), -2.0 * (t[1] + 2.0)],
            )
        }
    }

    #[test]
    fn maximize_finds_concave_peak_and_never_regresses() {
        let mut c = cfg();
        c.max_iters = 3000;
        c.tol_rel = 0.0;
        c.restarts = 3;
        let (theta, rep) = maximize(&Concave, &[0.0, 0.0], &c, None).unwrap();
        assert!((theta[0] - 1.0).abs() < 1e-2 && (theta[1] + 2.0).abs() < 1e-2);
        assert!(rep.final_objective >= rep.initial_objective);
        assert!(rep.final_objective >= *rep.objective_trace.last().unwrap() - 1e-15);
    }

    struct Exploding;
    impl Objective for Exploding {
        fn num_params(&self) -> usize {
            1
        }
        fn num_samples(&self) -> usize {
            1
        }
        fn evaluate(&self, _: &[f64], _: Option<&[usize]>) -> (f64, Vec<f64>) {
            (f64::NAN, vec![0.0])
        }
    }

    #[test]
    fn all_restarts_failing_is_reported() {
        let err = maximize(&Exploding, &[0.0], &cfg(), Some(4)).unwrap_err();
        assert!(matches!(err, Error::Numeric { date: Some(4), .. }));
    }
}
