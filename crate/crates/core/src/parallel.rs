//! Deterministic parallel reductions.
//!
//! Work is cut into fixed-size blocks whose boundaries depend only on the
//! problem size. Each block is reduced sequentially and the block partials are
//! combined in block order, so results are bit-identical for any number of
//! worker threads.

use std::ops::Range;

use rayon::prelude::*;

/// Number of paths per reduction block.
pub const BLOCK: usize = 4096;

pub fn block_ranges(n: usize) -> impl Iterator<Item = Range<usize>> {
    (0..n.div_ceil(BLOCK)).map(move |b| b * BLOCK..((b + 1) * BLOCK).min(n))
}

/// Sums `width`-long vectors accumulated by `f` over blocks of `0..n`.
pub fn blocked_sum<F>(n: usize, width: usize, f: F) -> Vec<f64>
where
    F: Fn(Range<usize>, &mut [f64]) + Sync,
{
    let blocks: Vec<Range<usize>> = block_ranges(n).collect();
    let partials: Vec<Vec<f64>> = blocks
        .into_par_iter()
        .map(|range| {
            let mut acc = vec![0.0; width];
            f(range, &mut acc);
            acc
        })
        .collect();
    let mut total = vec![0.0; width];
    for partial in partials {
        for (t, p) in total.iter_mut().zip(partial) {
            *t += p;
        }
    }
    total
}

/// Running count, mean and sum of squared deviations (Welford), mergeable
/// in a fixed order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n;
        self.m2 += other.m2 + delta * delta * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    /// Unbiased sample variance; zero for fewer than two observations.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

/// Block-wise moments of `n` observations, merged in block order.
pub fn blocked_moments<const K: usize, F>(n: usize, f: F) -> [Moments; K]
where
    F: Fn(Range<usize>, &mut [Moments; K]) + Sync,
{
    let blocks: Vec<Range<usize>> = block_ranges(n).collect();
    let partials: Vec<[Moments; K]> = blocks
        .into_par_iter()
        .map(|range| {
            let mut acc = [Moments::default(); K];
            f(range, &mut acc);
            acc
        })
        .collect();
    let mut total = [Moments::default(); K];
    for partial in &partials {
        for (t, p) in total.iter_mut().zip(partial) {
            t.merge(p);
        }
    }
    total
}
