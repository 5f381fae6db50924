//! Randomized stopping algebra.
//!
//! Given exercise probabilities `h_0..h_J` along a path (`h_J = 1`), the
//! probability of stopping at `j` when starting at `k` is
//! `p_{k,j} = h_j prod_{l=k}^{j-1} (1 - h_l)`, and the expected reward from
//! `k` on satisfies `V_k = h_k Z_k + (1 - h_k) V_{k+1}` with `V_J = Z_J`.

use crate::error::{Error, Result};
use crate::market::PathSet;
use crate::parallel::blocked_sum;
use crate::policy::ExerciseRule;

/// Survival products and tail values for one path. `survival[j]` is the
/// probability of not having stopped before `j`; `tail[k]` is `V_k`.
pub fn path_recursions(h: &[f64], z: &[f64], survival: &mut [f64], tail: &mut [f64]) {
    let last = h.len() - 1;
    survival[0] = 1.0;
    for j in 0..last {
        survival[j + 1] = survival[j] * (1.0 - h[j]);
    }
    tail[last] = h[last] * z[last];
    for k in (0..last).rev() {
        tail[k] = h[k] * z[k] + (1.0 - h[k]) * tail[k + 1];
    }
}

/// Value `V_0` of one path without storing intermediate arrays.
pub fn path_value(h: &[f64], z: &[f64]) -> f64 {
    let last = h.len() - 1;
    let mut v = z[last];
    for k in (0..last).rev() {
        v = h[k] * z[k] + (1.0 - h[k]) * v;
    }
    v
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoppingProfile {
    num_paths: usize,
    num_dates: usize,
    h_values: Vec<f64>,
    survival: Vec<f64>,
    tail_value: Vec<f64>,
}

impl StoppingProfile {
    /// Builds a profile from `[M x (J+1)]` probabilities and rewards.
    pub fn from_probabilities(h_values: Vec<f64>, payoffs: &[f64], num_dates: usize) -> Result<Self> {
        let width = num_dates + 1;
        if h_values.len() != payoffs.len() || !h_values.len().is_multiple_of(width) {
            return Err(Error::argument("probability and payoff arrays disagree in shape"));
        }
        if h_values.iter().any(|h| !(0.0..=1.0).contains(h)) {
            return Err(Error::argument("exercise probabilities must lie in [0, 1]"));
        }
        if h_values.chunks(width).any(|row| row[num_dates] != 1.0) {
            return Err(Error::argument("terminal exercise probability must be 1"));
        }
        let num_paths = h_values.len() / width;
        let mut survival = vec![0.0; h_values.len()];
        let mut tail_value = vec![0.0; h_values.len()];
        for m in 0..num_paths {
            let r = m * width..(m + 1) * width;
            path_recursions(
                &h_values[r.clone()],
                &payoffs[r.clone()],
                &mut survival[r.clone()],
                &mut tail_value[r],
            );
        }
        Ok(StoppingProfile {
            num_paths,
            num_dates,
            h_values,
            survival,
            tail_value,
        })
    }

    pub fn num_paths(&self) -> usize {
        self.num_paths
    }

    pub fn num_dates(&self) -> usize {
        self.num_dates
    }

    fn idx(&self, m: usize, j: usize) -> usize {
        m * (self.num_dates + 1) + j
    }

    pub fn h(&self, m: usize, j: usize) -> f64 {
        self.h_values[self.idx(m, j)]
    }

    pub fn survival(&self, m: usize, j: usize) -> f64 {
        self.survival[self.idx(m, j)]
    }

    pub fn tail_value(&self, m: usize, k: usize) -> f64 {
        self.tail_value[self.idx(m, k)]
    }

    /// `p_{k,j}` for `j = k..=J` on path `m`.
    pub fn exercise_probabilities_from(&self, m: usize, k: usize) -> Vec<f64> {
        let mut survive = 1.0;
        (k..=self.num_dates)
            .map(|j| {
                let h = self.h(m, j);
                let p = h * survive;
                survive *= 1.0 - h;
                p
            })
            .collect()
    }

    /// `p_{0,j}` for every date on path `m`.
    pub fn exercise_probabilities(&self, m: usize) -> Vec<f64> {
        (0..=self.num_dates)
            .map(|j| self.h(m, j) * self.survival(m, j))
            .collect()
    }

    /// Sample mean of `V_0`.
    pub fn mean_value(&self) -> f64 {
        let width = self.num_dates + 1;
        let total = blocked_sum(self.num_paths, 1, |r, acc| {
            for m in r {
                acc[0] += self.tail_value[m * width];
            }
        });
        total[0] / self.num_paths as f64
    }
}

pub(crate) fn rule_probabilities<R: ExerciseRule + ?Sized>(paths: &PathSet, rule: &R) -> Vec<f64> {
    let width = paths.num_dates() + 1;
    let mut h = vec![0.0; paths.num_paths() * width];
    use rayon::prelude::*;
    h.par_chunks_mut(width)
        .enumerate()
        .for_each(|(m, row)| rule.path_probabilities(paths.path_states(m), paths.dates(), row));
    h
}

pub fn compute_profile<R: ExerciseRule + ?Sized>(paths: &PathSet, rule: &R) -> Result<StoppingProfile> {
    rule.check_compatible(paths.dim(), paths.num_dates())?;
    StoppingProfile::from_probabilities(rule_probabilities(paths, rule), paths.payoffs(), paths.num_dates())
}

/// In-sample randomized value `(1/M) sum_m V_0^(m)`.
pub fn randomized_value<R: ExerciseRule + ?Sized>(paths: &PathSet, rule: &R) -> Result<f64> {
    rule.check_compatible(paths.dim(), paths.num_dates())?;
    let width = paths.num_dates() + 1;
    let total = blocked_sum(paths.num_paths(), 1, |r, acc| {
        let mut h = vec![0.0; width];
        for m in r {
            rule.path_probabilities(paths.path_states(m), paths.dates(), &mut h);
            acc[0] += path_value(&h, paths.path_payoffs(m));
        }
    });
    Ok(total[0] / paths.num_paths() as f64)
}

/// Weights `xi_{k-1}^(m) = Z_{k-1}^(m) - V_k^(m)` of the linear backward-step
/// objective at date `k - 1`. Only the rule's probabilities at dates `>= k`
/// enter.
pub fn xi_coefficients<R: ExerciseRule + ?Sized>(paths: &PathSet, rule: &R, k: usize) -> Result<Vec<f64>> {
    if k == 0 || k > paths.num_dates() {
        return Err(Error::argument(format!(
            "xi coefficients need 1 <= k <= J, got k = {k}"
        )));
    }
    rule.check_compatible(paths.dim(), paths.num_dates())?;
    let width = paths.num_dates() + 1;
    let mut h = vec![0.0; width];
    Ok((0..paths.num_paths())
        .map(|m| {
            rule.path_probabilities(paths.path_states(m), paths.dates(), &mut h);
            let z = paths.path_payoffs(m);
            paths.payoff(m, k - 1) - path_value(&h[k..], &z[k..])
        })
        .collect())
}
