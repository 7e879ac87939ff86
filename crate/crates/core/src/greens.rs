//! Green's functions of the simple random walk absorbed at a sink.
//!
//! `u_ij(s)` is the expected number of visits to `i` before the walk started
//! at `s` first hits `j`. It is the unique function with `u(j) = 0` whose
//! Laplacian is `d(i)` at `i`, `-d(i)` at `j` and zero elsewhere, so it is
//! obtained from one solve with the Laplacian pinned at `j`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::{run_tasks, stream_rng};
use crate::stats::Estimate;

/// `s ↦ u_ij(s)` for one source/sink pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GreenTable {
    pub source: usize,
    pub sink: usize,
    pub values: Vec<f64>,
}

impl GreenTable {
    pub fn at(&self, s: usize) -> f64 {
        self.values[s]
    }

    /// Largest deviation of `Δu` from `d(i)(1_{s=i} - 1_{s=j})`.
    pub fn laplacian_residual(&self, g: &Graph) -> f64 {
        let lap = g.laplacian_apply(&self.values).expect("table matches graph size");
        let d = g.degree(self.source) as f64;
        lap.iter()
            .enumerate()
            .map(|(s, &v)| {
                let target = if s == self.source {
                    d
                } else if s == self.sink {
                    -d
                } else {
                    0.0
                };
                (v - target).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Cholesky factor of the Laplacian with one vertex's row and column removed.
///
/// Positive definite for every connected graph; a failed factorization
/// therefore signals a bug rather than bad input.
#[derive(Debug, Clone)]
pub struct PinnedLaplacian {
    root: usize,
    n: usize,
    chol: Option<Cholesky<f64, Dyn>>,
}

impl PinnedLaplacian {
    pub fn new(g: &Graph, root: usize) -> Result<Self> {
        g.check_vertex(root)?;
        let n = g.n();
        if n == 1 {
            return Ok(PinnedLaplacian { root, n, chol: None });
        }
        let lap = g.laplacian_matrix();
        let keep: Vec<usize> = (0..n).filter(|&v| v != root).collect();
        let reduced = DMatrix::from_fn(n - 1, n - 1, |a, b| lap[(keep[a], keep[b])]);
        let chol = Cholesky::new(reduced).ok_or_else(|| {
            Error::SolverFailure(format!("pinned Laplacian at vertex {root} is not positive definite"))
        })?;
        Ok(PinnedLaplacian { root, n, chol: Some(chol) })
    }

    pub fn root(&self) -> usize {
        self.root
    }

    fn reduced_index(&self, v: usize) -> usize {
        if v < self.root {
            v
        } else {
            v - 1
        }
    }

    /// Solves `L f = rhs` on non-root vertices with `f(root) = 0`.
    /// The root entry of `rhs` is ignored.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        let Some(chol) = &self.chol else { return out };
        let b = DVector::from_iterator(self.n - 1, (0..self.n).filter(|&v| v != self.root).map(|v| rhs[v]));
        let x = chol.solve(&b);
        for v in (0..self.n).filter(|&v| v != self.root) {
            out[v] = x[self.reduced_index(v)];
        }
        out
    }

    /// Full `n × n` inverse with zero root row and column.
    pub fn inverse(&self) -> DMatrix<f64> {
        let mut full = DMatrix::zeros(self.n, self.n);
        let Some(chol) = &self.chol else { return full };
        let inv = chol.inverse();
        for a in (0..self.n).filter(|&v| v != self.root) {
            for b in (0..self.n).filter(|&v| v != self.root) {
                full[(a, b)] = inv[(self.reduced_index(a), self.reduced_index(b))];
            }
        }
        full
    }
}

/// Green's function `u_ij` of the walk absorbed at `j`.
pub fn greens_function(g: &Graph, i: usize, j: usize) -> Result<GreenTable> {
    g.check_vertex(i)?;
    g.check_vertex(j)?;
    if i == j {
        return Err(Error::SameVertex(i));
    }
    let pinned = PinnedLaplacian::new(g, j)?;
    let mut rhs = vec![0.0; g.n()];
    rhs[i] = g.degree(i) as f64;
    let values = pinned.solve(&rhs);
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::SolverFailure("non-finite Green's function value".into()));
    }
    Ok(GreenTable { source: i, sink: j, values })
}

/// Renormalized Green's function `u_xy(x) / d(x)`, symmetric in `x` and `y`.
/// It equals the effective resistance between `x` and `y`.
pub fn renormalized_green(g: &Graph, x: usize, y: usize) -> Result<f64> {
    let table = greens_function(g, x, y)?;
    Ok(table.at(x) / g.degree(x) as f64)
}

/// All renormalized Green values at once: entry `(x, y)` is `u_xy(x)/d(x)`,
/// read off a single pinned inverse `G` as `G_xx + G_yy - 2 G_xy`.
pub fn renormalized_green_matrix(g: &Graph) -> Result<DMatrix<f64>> {
    let inv = PinnedLaplacian::new(g, 0)?.inverse();
    Ok(DMatrix::from_fn(g.n(), g.n(), |x, y| inv[(x, x)] + inv[(y, y)] - 2.0 * inv[(x, y)]))
}

/// `max_{i≠j} u_ij(i)/d(i)` together with a maximizing pair.
pub fn max_renormalized_green(g: &Graph) -> Result<(f64, usize, usize)> {
    if g.n() < 2 {
        return Err(Error::InvalidParameter("need at least two vertices".into()));
    }
    let mut best = (f64::NEG_INFINITY, 0, 0);
    for sink in 0..g.n() {
        // u_{i,sink}(i)/d(i) is the diagonal of the inverse pinned Laplacian.
        let inv = PinnedLaplacian::new(g, sink)?.inverse();
        for i in (0..g.n()).filter(|&i| i != sink) {
            if inv[(i, i)] > best.0 {
                best = (inv[(i, i)], i, sink);
            }
        }
    }
    Ok(best)
}

const ORACLE_CHUNKS: usize = 64;

/// Monte Carlo estimate of `u_ij(s)`: average visits to `i` by simple random
/// walks started at `s` before absorption at `j`.
///
/// Trials are split into a fixed number of chunks, each with its own random
/// stream, so the estimate does not depend on `threads`.
pub fn greens_rw_oracle(
    g: &Graph,
    i: usize,
    j: usize,
    s: usize,
    trials: usize,
    seed: u64,
    threads: usize,
) -> Result<Estimate> {
    for v in [i, j, s] {
        g.check_vertex(v)?;
    }
    if i == j {
        return Err(Error::SameVertex(i));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let chunks = ORACLE_CHUNKS.min(trials);
    let partials = run_tasks(chunks, threads, |c| {
        let mut rng = stream_rng(seed, c as u64);
        let count = trials / chunks + usize::from(c < trials % chunks);
        let (mut sum, mut sumsq) = (0.0f64, 0.0f64);
        for _ in 0..count {
            let mut pos = s;
            let mut visits = 0u64;
            while pos != j {
                if pos == i {
                    visits += 1;
                }
                let nb = g.neighbors(pos);
                pos = nb[rng.random_range(0..nb.len())];
            }
            sum += visits as f64;
            sumsq += (visits as f64).powi(2);
        }
        (sum, sumsq)
    });
    let (sum, sumsq) = partials.iter().fold((0.0, 0.0), |(a, b), (c, d)| (a + c, b + d));
    let n = trials as f64;
    let mean = sum / n;
    let stderr = if trials > 1 {
        let var = ((sumsq - n * mean * mean) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(Estimate { mean, stderr, n_samples: trials })
}
