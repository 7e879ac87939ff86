use nalgebra::DMatrix;
use serde::Serialize;

use super::{Chain, ChainConfig, SampleSource, SpinConfiguration};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::run_tasks;
use crate::stats::{BatchMeans, Estimate, DEFAULT_BATCHES};

/// Drains `source`, evaluating `dim` observables per configuration, and
/// returns batch-means estimates of their expectations.
pub fn measure<S, F>(source: &mut S, dim: usize, mut observe: F) -> Result<Vec<Estimate>>
where
    S: SampleSource + ?Sized,
    F: FnMut(&SpinConfiguration, &mut [f64]),
{
    let mut batches = BatchMeans::new(dim, source.remaining(), DEFAULT_BATCHES)?;
    let mut buf = vec![0.0; dim];
    while let Some(s) = source.next_sample() {
        observe(s, &mut buf);
        batches.push(&buf);
    }
    batches.estimates()
}

/// Runs `replicas` independent chains (streams `0..replicas` under
/// `cfg.seed`) on up to `threads` workers and pools their batches. The result
/// does not depend on `threads`.
#[allow(clippy::too_many_arguments)]
pub fn measure_replicas<F>(
    g: &Graph,
    spin_dim: usize,
    beta: f64,
    cfg: ChainConfig,
    replicas: usize,
    threads: usize,
    dim: usize,
    observe: F,
) -> Result<Vec<Estimate>>
where
    F: Fn(&SpinConfiguration, &mut [f64]) + Sync,
{
    if replicas == 0 {
        return Err(Error::InvalidParameter("at least one replica is needed".into()));
    }
    let per_replica = run_tasks(replicas, threads, |k| -> Result<BatchMeans> {
        let mut chain = Chain::with_stream(g, spin_dim, beta, cfg, k as u64)?;
        let mut batches = BatchMeans::new(dim, chain.remaining(), DEFAULT_BATCHES)?;
        let mut buf = vec![0.0; dim];
        while let Some(s) = chain.next_sample() {
            observe(s, &mut buf);
            batches.push(&buf);
        }
        Ok(batches)
    });
    let mut it = per_replica.into_iter();
    let mut pooled = it.next().expect("replicas > 0")?;
    for b in it {
        pooled.merge(b?);
    }
    pooled.estimates()
}

fn check_pair<S: SampleSource + ?Sized>(source: &S, x: usize, y: usize) -> Result<()> {
    for v in [x, y] {
        if v >= source.n() {
            return Err(Error::VertexOutOfRange { vertex: v, n: source.n() });
        }
    }
    Ok(())
}

/// Batch-means estimate of `E σ_x·σ_y`. For `x = y` this is exactly 1 and the
/// source is left untouched.
pub fn estimate_correlation<S: SampleSource + ?Sized>(source: &mut S, x: usize, y: usize) -> Result<Estimate> {
    check_pair(source, x, y)?;
    if x == y {
        return Ok(Estimate::exact(1.0, source.remaining()));
    }
    Ok(measure(source, 1, |s, out| out[0] = s.dot(x, y))?[0])
}

/// `β E‖σ_x - σ_y‖² = 2β(1 - E σ_x·σ_y)`.
pub fn estimate_rescaled_distance<S: SampleSource + ?Sized>(
    source: &mut S,
    beta: f64,
    x: usize,
    y: usize,
) -> Result<Estimate> {
    Ok(estimate_correlation(source, x, y)?.affine(-2.0 * beta, 2.0 * beta))
}

/// Entrywise estimate of `K_xy = β E[Δσ_x^1 Δσ_y^1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KMatrixEstimate {
    pub values: DMatrix<f64>,
    pub stderr: DMatrix<f64>,
    pub n_samples: usize,
}

impl KMatrixEstimate {
    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    /// Assembles `K` from estimates of `E[Δσ_x^1 Δσ_y^1]`, `x ≤ y` row-major,
    /// as produced by [`k_observable`].
    pub fn from_upper(n: usize, beta: f64, est: &[Estimate]) -> Self {
        let mut values = DMatrix::zeros(n, n);
        let mut stderr = DMatrix::zeros(n, n);
        let mut k = 0;
        for x in 0..n {
            for y in x..n {
                let e = est[k].affine(beta, 0.0);
                values[(x, y)] = e.mean;
                values[(y, x)] = e.mean;
                stderr[(x, y)] = e.stderr;
                stderr[(y, x)] = e.stderr;
                k += 1;
            }
        }
        KMatrixEstimate { values, stderr, n_samples: est.first().map_or(0, |e| e.n_samples) }
    }
}

/// `Δσ_x^1 = Σ_{z ~ x} (σ_x^1 - σ_z^1)` for every `x`, then the upper
/// triangle of the outer product, row-major.
pub fn k_observable(g: &Graph) -> impl Fn(&SpinConfiguration, &mut [f64]) + Sync + '_ {
    move |s, out| {
        let n = g.n();
        let first: Vec<f64> = (0..n).map(|v| s.component(v, 0)).collect();
        let delta = g.laplacian_apply(&first).expect("configuration matches graph");
        let mut k = 0;
        for x in 0..n {
            for y in x..n {
                out[k] = delta[x] * delta[y];
                k += 1;
            }
        }
    }
}

fn check_source<S: SampleSource + ?Sized>(source: &S, g: &Graph) -> Result<()> {
    if source.n() != g.n() {
        return Err(Error::DimensionMismatch { expected: g.n(), got: source.n() });
    }
    Ok(())
}

/// Estimates `K` from the first spin component of every configuration.
pub fn estimate_k_matrix<S: SampleSource + ?Sized>(source: &mut S, g: &Graph, beta: f64) -> Result<KMatrixEstimate> {
    check_source(source, g)?;
    let n = g.n();
    let est = measure(source, n * (n + 1) / 2, k_observable(g))?;
    Ok(KMatrixEstimate::from_upper(n, beta, &est))
}

/// `K` from pooled independent replicas; see [`measure_replicas`].
pub fn estimate_k_matrix_replicas(
    g: &Graph,
    spin_dim: usize,
    beta: f64,
    cfg: ChainConfig,
    replicas: usize,
    threads: usize,
) -> Result<KMatrixEstimate> {
    let n = g.n();
    let est = measure_replicas(g, spin_dim, beta, cfg, replicas, threads, n * (n + 1) / 2, k_observable(g))?;
    Ok(KMatrixEstimate::from_upper(n, beta, &est))
}
