//! The rooted Gaussian free field and its comparison with low-temperature
//! spin chains.
//!
//! With the root spin pinned to the north pole, the transverse components of
//! `√β σ` converge to independent copies of the field with density
//! `∝ exp(-½ Σ_E (γ_i - γ_j)²)`, `γ_root = 0`, whose covariance is the
//! inverse of the Laplacian with the root row and column removed.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::greens::PinnedLaplacian;
use crate::mc::{measure, Chain, ChainConfig};
use crate::rng::{run_tasks, stream_rng};
use crate::stats::ks_two_sample;

/// Vertex whose spin is pinned in the rooted measure.
pub const ROOT: usize = 0;
const SAMPLE_CHUNK: usize = 1024;
/// Field draws use streams above this offset so they never collide with chain
/// replicas under the same seed.
const FIELD_STREAM_OFFSET: u64 = 1 << 40;

/// `n × n` covariance of the field rooted at `root` (zero row and column at
/// the root). Entry `(x, y)` is `u_{x,root}(y)/d(x)`.
pub fn gff_covariance(g: &Graph, root: usize) -> Result<DMatrix<f64>> {
    Ok(PinnedLaplacian::new(g, root)?.inverse())
}

/// A rooted field with `components` independent copies.
#[derive(Debug, Clone)]
pub struct GaussianField {
    root: usize,
    components: usize,
    covariance: DMatrix<f64>,
    /// Lower-triangular factor of the root-deleted covariance.
    factor: DMatrix<f64>,
    free: Vec<usize>,
}

impl GaussianField {
    pub fn new(g: &Graph, root: usize, components: usize) -> Result<Self> {
        if components == 0 {
            return Err(Error::InvalidParameter("the field needs at least one component".into()));
        }
        let covariance = gff_covariance(g, root)?;
        let free: Vec<usize> = (0..g.n()).filter(|&v| v != root).collect();
        let reduced = DMatrix::from_fn(free.len(), free.len(), |a, b| covariance[(free[a], free[b])]);
        let factor = Cholesky::<f64, Dyn>::new(reduced)
            .ok_or_else(|| Error::SolverFailure("field covariance is not positive definite".into()))?
            .l();
        Ok(GaussianField { root, components, covariance, factor, free })
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn n(&self) -> usize {
        self.covariance.nrows()
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    /// `E(γ_x - γ_y)²` for one component.
    pub fn increment_variance(&self, x: usize, y: usize) -> f64 {
        let c = &self.covariance;
        c[(x, x)] + c[(y, y)] - 2.0 * c[(x, y)]
    }

    /// One draw, vertex-major (`n × components`), zero at the root.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let (n, k) = (self.n(), self.components);
        let mut out = vec![0.0; n * k];
        for l in 0..k {
            let z = DVector::from_fn(self.free.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
            let field = &self.factor * z;
            for (a, &v) in self.free.iter().enumerate() {
                out[v * k + l] = field[a];
            }
        }
        out
    }
}

/// `count` independent draws. Draws come in fixed chunks with their own
/// random streams, so the output does not depend on `threads`.
pub fn gff_sample(
    g: &Graph,
    components: usize,
    root: usize,
    count: usize,
    seed: u64,
    threads: usize,
) -> Result<Vec<Vec<f64>>> {
    let field = GaussianField::new(g, root, components)?;
    let chunks = count.div_ceil(SAMPLE_CHUNK);
    let parts = run_tasks(chunks, threads, |c| {
        let mut rng = stream_rng(seed, FIELD_STREAM_OFFSET + c as u64);
        let len = SAMPLE_CHUNK.min(count - c * SAMPLE_CHUNK);
        (0..len).map(|_| field.sample(&mut rng)).collect::<Vec<_>>()
    });
    Ok(parts.into_iter().flatten().collect())
}

/// Settings for [`wcon_report`] beyond the chain parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WconOptions {
    /// Field draws compared against the chain in the KS statistic.
    pub field_samples: usize,
    /// Also report `β² E‖σ_x - σ_y‖⁴` against its Gaussian value (ungated).
    pub fourth_moment: bool,
    pub threads: usize,
}

impl Default for WconOptions {
    fn default() -> Self {
        WconOptions { field_samples: 100_000, fourth_moment: false, threads: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WconRow {
    pub beta: f64,
    pub moment_estimate: f64,
    pub moment_stderr: f64,
    pub moment_target: f64,
    pub ks_stat: f64,
    pub chain_samples: usize,
    /// `(estimate, stderr, Gaussian value)` when requested.
    pub fourth_moment: Option<(f64, f64, f64)>,
}

impl WconRow {
    pub fn moment_gap(&self) -> f64 {
        (self.moment_estimate - self.moment_target).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WconTable {
    pub spin_dim: usize,
    pub x: usize,
    pub y: usize,
    /// Vertex whose first component enters the KS comparison.
    pub ks_vertex: usize,
    pub rows: Vec<WconRow>,
}

impl WconTable {
    pub fn to_csv(&self) -> String {
        let fourth = self.rows.iter().any(|r| r.fourth_moment.is_some());
        let mut out = String::from("beta,moment_estimate,moment_stderr,moment_target,ks_stat");
        if fourth {
            out.push_str(",fourth_estimate,fourth_stderr,fourth_gaussian");
        }
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}",
                r.beta, r.moment_estimate, r.moment_stderr, r.moment_target, r.ks_stat
            ));
            if let Some((e, s, t)) = r.fourth_moment {
                out.push_str(&format!(",{e},{s},{t}"));
            }
            out.push('\n');
        }
        out
    }

    /// True when every gap is at most the previous one plus `slack` combined
    /// standard errors.
    pub fn gaps_shrink(&self, slack: f64) -> bool {
        self.rows.windows(2).all(|w| {
            let se = w[0].moment_stderr.hypot(w[1].moment_stderr);
            w[1].moment_gap() <= w[0].moment_gap() + slack * se
        })
    }
}

/// For each `β` in the schedule runs a root-pinned chain (stream = row index)
/// and compares `β E‖σ_x - σ_y‖²` with `(N-1) E(γ_x - γ_y)²`, and the law of
/// `√β σ^1` at one non-root vertex of the pair with the field.
pub fn wcon_report(
    g: &Graph,
    spin_dim: usize,
    betas: &[f64],
    x: usize,
    y: usize,
    cfg: ChainConfig,
    opts: WconOptions,
) -> Result<WconTable> {
    if spin_dim < 2 {
        return Err(Error::WrongN { expected: "at least 2".into(), got: spin_dim });
    }
    g.check_vertex(x)?;
    g.check_vertex(y)?;
    if x == y {
        return Err(Error::SameVertex(x));
    }
    if betas.is_empty() || betas.iter().any(|b| b.is_nan() || *b <= 0.0) || betas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("beta schedule must be positive and increasing".into()));
    }
    if opts.field_samples == 0 {
        return Err(Error::InvalidParameter("field_samples must be positive".into()));
    }
    let field = GaussianField::new(g, ROOT, spin_dim - 1)?;
    let ks_vertex = if x == ROOT { y } else { x };
    let var = field.increment_variance(x, y);
    let components = (spin_dim - 1) as f64;
    let moment_target = components * var;
    let fourth_target = components * (components + 2.0) * var * var;

    let reference: Vec<f64> =
        gff_sample(g, 1, ROOT, opts.field_samples, cfg.seed, opts.threads)?.into_iter().map(|s| s[ks_vertex]).collect();

    let cfg = cfg.pinned(true);
    let rows = run_tasks(betas.len(), opts.threads, |k| -> Result<WconRow> {
        let beta = betas[k];
        let mut chain = Chain::with_stream(g, spin_dim, beta, cfg, k as u64)?;
        let mut transverse = Vec::with_capacity(chain.config().samples());
        let scale = beta.sqrt();
        let dim = if opts.fourth_moment { 2 } else { 1 };
        let est = measure(&mut chain, dim, |s, out| {
            let d2 = 2.0 - 2.0 * s.dot(x, y);
            out[0] = beta * d2;
            if opts.fourth_moment {
                out[1] = beta * beta * d2 * d2;
            }
            transverse.push(scale * s.component(ks_vertex, 0));
        })?;
        Ok(WconRow {
            beta,
            moment_estimate: est[0].mean,
            moment_stderr: est[0].stderr,
            moment_target,
            ks_stat: ks_two_sample(&transverse, &reference),
            chain_samples: est[0].n_samples,
            fourth_moment: opts.fourth_moment.then(|| (est[1].mean, est[1].stderr, fourth_target)),
        })
    });
    Ok(WconTable { spin_dim, x, y, ks_vertex, rows: rows.into_iter().collect::<Result<_>>()? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphFamily;
    use crate::greens::renormalized_green;

    fn graph(f: GraphFamily) -> Graph {
        Graph::generate(f).unwrap()
    }

    #[test]
    fn covariance_examples() {
        let k2 = graph(GraphFamily::Path { n: 2 });
        assert!((gff_covariance(&k2, 0).unwrap()[(1, 1)] - 1.0).abs() < 1e-12);
        let p3 = graph(GraphFamily::Path { n: 3 });
        let c = gff_covariance(&p3, 0).unwrap();
        assert!((c[(2, 2)] - 2.0).abs() < 1e-12);
        assert_eq!(c[(0, 0)], 0.0);
    }

    #[test]
    fn increment_variance_is_renormalized_green() {
        let g = graph(GraphFamily::Cycle { n: 5 });
        let field = GaussianField::new(&g, ROOT, 1).unwrap();
        for (x, y) in [(1, 3), (2, 4), (0, 2)] {
            let want = renormalized_green(&g, x, y).unwrap();
            assert!((field.increment_variance(x, y) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn samples_pin_root_and_match_covariance() {
        let g = graph(GraphFamily::Path { n: 3 });
        let draws = gff_sample(&g, 2, ROOT, 100_000, 4, 2).unwrap();
        assert_eq!(draws.len(), 100_000);
        assert!(draws.iter().all(|s| s[0] == 0.0 && s[1] == 0.0));
        let var = draws.iter().map(|s| s[4] * s[4]).sum::<f64>() / draws.len() as f64;
        assert!((var / 2.0 - 1.0).abs() < 0.05, "{var}");
        assert_eq!(draws, gff_sample(&g, 2, ROOT, 100_000, 4, 1).unwrap());
    }

    #[test]
    fn ising_is_rejected() {
        let g = graph(GraphFamily::Path { n: 2 });
        let err = wcon_report(&g, 1, &[10.0], 1, 0, ChainConfig::new(1), WconOptions::default());
        assert!(matches!(err, Err(Error::WrongN { got: 1, .. })));
    }

    #[test]
    fn csv_layout() {
        let g = graph(GraphFamily::Path { n: 2 });
        let cfg = ChainConfig::new(3).with_sweeps(2_000, 200);
        let opts = WconOptions { field_samples: 2_000, fourth_moment: true, threads: 1 };
        let table = wcon_report(&g, 3, &[10.0, 20.0], 1, 0, cfg, opts).unwrap();
        let csv = table.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "beta,moment_estimate,moment_stderr,moment_target,ks_stat,fourth_estimate,fourth_stderr,fourth_gaussian"
        );
        assert_eq!(lines.count(), 2);
        assert_eq!(table.rows[0].moment_target, 2.0);
    }
}
