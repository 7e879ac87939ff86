//! Error bars for correlated Monte Carlo output.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of batches used for batch-means error bars.
pub const DEFAULT_BATCHES: usize = 32;
/// Fewer batches than this and the error bar is not trusted.
pub const MIN_BATCHES: usize = 16;

/// A point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: usize,
}

impl Estimate {
    pub fn exact(value: f64, n_samples: usize) -> Self {
        Estimate { mean: value, stderr: 0.0, n_samples }
    }

    /// Mean and standard error of independent draws.
    pub fn from_iid(values: &[f64]) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Estimate { mean, stderr, n_samples: n }
    }

    /// `a * X + b`.
    pub fn affine(self, a: f64, b: f64) -> Self {
        Estimate { mean: a * self.mean + b, stderr: a.abs() * self.stderr, n_samples: self.n_samples }
    }

    /// True when `value` lies within `k` standard errors of the mean.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.stderr
    }
}

/// Streaming batch-means accumulator for a vector of `dim` observables.
///
/// The expected sample count fixes the batch size up front; samples past the
/// last full batch are folded into the final batch.
#[derive(Debug, Clone)]
pub struct BatchMeans {
    dim: usize,
    batch_size: usize,
    n_batches: usize,
    current: Vec<f64>,
    current_count: usize,
    /// Per closed batch: (sample count, per-observable sums).
    closed: Vec<(usize, Vec<f64>)>,
}

impl BatchMeans {
    pub fn new(dim: usize, expected_samples: usize, n_batches: usize) -> Result<Self> {
        if expected_samples < MIN_BATCHES {
            return Err(Error::InsufficientSamples { needed: MIN_BATCHES, got: expected_samples });
        }
        let n_batches = n_batches.clamp(MIN_BATCHES, expected_samples);
        Ok(BatchMeans {
            dim,
            batch_size: expected_samples / n_batches,
            n_batches,
            current: vec![0.0; dim],
            current_count: 0,
            closed: Vec::with_capacity(n_batches),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn push(&mut self, values: &[f64]) {
        debug_assert_eq!(values.len(), self.dim);
        for (acc, v) in self.current.iter_mut().zip(values) {
            *acc += v;
        }
        self.current_count += 1;
        if self.current_count == self.batch_size && self.closed.len() + 1 < self.n_batches {
            self.close_batch();
        }
    }

    fn close_batch(&mut self) {
        let sums = std::mem::replace(&mut self.current, vec![0.0; self.dim]);
        self.closed.push((self.current_count, sums));
        self.current_count = 0;
    }

    /// Pools another accumulator's batches into this one (independent replicas).
    pub fn merge(&mut self, mut other: BatchMeans) {
        assert_eq!(self.dim, other.dim, "merging batch means of different dimension");
        self.finish_partial();
        other.finish_partial();
        self.closed.append(&mut other.closed);
        self.n_batches = self.closed.len() + 1;
    }

    fn finish_partial(&mut self) {
        if self.current_count > 0 {
            self.close_batch();
        }
    }

    /// Estimates for every observable.
    pub fn estimates(mut self) -> Result<Vec<Estimate>> {
        self.finish_partial();
        let b = self.closed.len();
        let total: usize = self.closed.iter().map(|(c, _)| c).sum();
        if b < MIN_BATCHES {
            return Err(Error::InsufficientSamples { needed: MIN_BATCHES, got: b });
        }
        Ok((0..self.dim)
            .map(|k| {
                let means: Vec<f64> = self.closed.iter().map(|(c, s)| s[k] / *c as f64).collect();
                let mean = self.closed.iter().map(|(_, s)| s[k]).sum::<f64>() / total as f64;
                let grand = means.iter().sum::<f64>() / b as f64;
                let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (b - 1) as f64;
                Estimate { mean, stderr: (var / b as f64).sqrt(), n_samples: total }
            })
            .collect())
    }
}

/// Two-sample Kolmogorov–Smirnov statistic `sup_t |F_a(t) - F_b(t)|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty(), "KS statistic needs two nonempty samples");
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let t = a[i].min(b[j]);
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}
