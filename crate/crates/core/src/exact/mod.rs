//! Exact Ising (`N = 1`) computations by enumerating `{-1, +1}^V`.
//!
//! Configurations are visited in Gray-code order so each step flips one spin
//! and the edge energy `Σ_E ((σ_i - σ_j) + (h_i - h_j))²` is updated from the
//! flipped vertex's neighbors only. The configuration space is cut into a
//! fixed number of blocks (by the top spins) that workers process
//! independently; block results are reduced in block order, so every result is
//! bit-identical for any thread count.

mod closed_form;
mod star;

pub use closed_form::{
    binary_tree_hessian_closed_form, binary_tree_threshold, parallel_paths_correlation_closed_form,
    tree_correlation_closed_form, BinaryTreeHessianTerms,
};
pub use star::{minimal_star_size, star_hessian, star_hessian_terms, StarHessianTerms, StarQuadrature};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::run_tasks;

/// Largest graph the enumerator accepts.
pub const MAX_ENUM_VERTICES: usize = 24;

/// Single-site measure of the Ising spin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IsingMeasureConvention {
    /// `½δ₋₁ + ½δ₊₁`, the normalized measure.
    Half,
    /// `δ₋₁ + δ₊₁`, counting measure.
    Unit,
}

impl IsingMeasureConvention {
    /// `log` of the total site-weight factor relative to the unit convention.
    fn log_factor(self, n: usize) -> f64 {
        match self {
            IsingMeasureConvention::Half => -(n as f64) * std::f64::consts::LN_2,
            IsingMeasureConvention::Unit => 0.0,
        }
    }

    fn factor(self, n: usize) -> f64 {
        match self {
            IsingMeasureConvention::Half => 0.5f64.powi(n as i32),
            IsingMeasureConvention::Unit => 1.0,
        }
    }
}

/// Per-vertex shift `h_i ∈ R^N`, stored vertex-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftField {
    components: usize,
    values: Vec<f64>,
}

impl ShiftField {
    pub fn new(components: usize, values: Vec<f64>) -> Result<Self> {
        if components == 0 || !values.len().is_multiple_of(components) {
            return Err(Error::InvalidParameter("shift length must be a multiple of N".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("shift entries must be finite".into()));
        }
        Ok(ShiftField { components, values })
    }

    /// Scalar (`N = 1`) shift.
    pub fn scalar(values: Vec<f64>) -> Result<Self> {
        ShiftField::new(1, values)
    }

    pub fn zeros(n: usize, components: usize) -> Self {
        ShiftField { components, values: vec![0.0; n * components] }
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn n(&self) -> usize {
        self.values.len() / self.components
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

/// Exact expectations at zero shift.
#[derive(Debug, Clone)]
pub struct IsingMoments {
    pub beta: f64,
    /// `log Z` under the unit convention.
    pub log_z_unit: f64,
    /// `E σ_x σ_y`.
    pub correlation: DMatrix<f64>,
    /// `K_xy = β E[(Lσ)_x (Lσ)_y]`.
    pub k: DMatrix<f64>,
}

impl IsingMoments {
    pub fn log_partition(&self, convention: IsingMeasureConvention) -> f64 {
        self.log_z_unit + convention.log_factor(self.correlation.nrows())
    }
}

/// Enumeration driver with a worker cap.
#[derive(Debug, Clone, Copy)]
pub struct Enumerator {
    threads: usize,
}

impl Default for Enumerator {
    fn default() -> Self {
        Enumerator { threads: 1 }
    }
}

impl Enumerator {
    pub fn new(threads: usize) -> Self {
        Enumerator { threads: threads.max(1) }
    }

    /// `log Z*(h)`.
    pub fn log_partition(
        &self,
        g: &Graph,
        beta: f64,
        h: &ShiftField,
        convention: IsingMeasureConvention,
    ) -> Result<f64> {
        check_inputs(g, beta)?;
        check_shift(g, h)?;
        let ref_energy = if h.is_zero() { 0.0 } else { self.min_energy(g, h.values()) };
        let blocks = self.run(g, beta, Some(h.values()), ref_energy, || 0.0f64, |acc, _, w| *acc += w);
        let z: f64 = blocks.iter().sum();
        Ok(z.ln() - 0.5 * beta * ref_energy + convention.log_factor(g.n()))
    }

    /// `Z*(h)`; may under- or overflow where [`Enumerator::log_partition`] does not.
    pub fn partition(&self, g: &Graph, beta: f64, h: &ShiftField, convention: IsingMeasureConvention) -> Result<f64> {
        Ok(self.log_partition(g, beta, h, convention)?.exp())
    }

    /// Correlation matrix and `K` matrix in one pass.
    pub fn moments(&self, g: &Graph, beta: f64) -> Result<IsingMoments> {
        check_inputs(g, beta)?;
        let n = g.n();
        let blocks = self.run(
            g,
            beta,
            None,
            0.0,
            || (0.0f64, vec![0.0f64; n * n], vec![0.0f64; n * n], vec![0.0f64; n]),
            |(z, corr, kk, lap), spins, w| {
                *z += w;
                for (s, out) in lap.iter_mut().enumerate() {
                    *out = g.neighbors(s).iter().map(|&l| spins[s] - spins[l]).sum();
                }
                for a in 0..n {
                    let (sa, la) = (w * spins[a], w * lap[a]);
                    for b in a..n {
                        corr[a * n + b] += sa * spins[b];
                        kk[a * n + b] += la * lap[b];
                    }
                }
            },
        );
        let mut z = 0.0;
        let mut corr = vec![0.0; n * n];
        let mut kk = vec![0.0; n * n];
        for (bz, bc, bk, _) in blocks {
            z += bz;
            for (acc, v) in corr.iter_mut().zip(&bc) {
                *acc += v;
            }
            for (acc, v) in kk.iter_mut().zip(&bk) {
                *acc += v;
            }
        }
        let sym = |flat: &[f64], scale: f64| DMatrix::from_fn(n, n, |a, b| scale * flat[a.min(b) * n + a.max(b)] / z);
        Ok(IsingMoments { beta, log_z_unit: z.ln(), correlation: sym(&corr, 1.0), k: sym(&kk, beta) })
    }

    /// `E σ_x σ_y` for a single pair.
    pub fn correlation(&self, g: &Graph, beta: f64, x: usize, y: usize) -> Result<f64> {
        check_inputs(g, beta)?;
        g.check_vertex(x)?;
        g.check_vertex(y)?;
        if x == y {
            return Ok(1.0);
        }
        let blocks = self.run(
            g,
            beta,
            None,
            0.0,
            || (0.0f64, 0.0f64),
            |(z, c), s, w| {
                *z += w;
                *c += w * s[x] * s[y];
            },
        );
        let (z, c) = blocks.iter().fold((0.0, 0.0), |(a, b), (c, d)| (a + c, b + d));
        Ok(c / z)
    }

    /// `Z_v''(0)` for the scalar direction `v`:
    /// `β² Σ_σ (v·Lσ)² w(σ) - β (v·Lv) Σ_σ w(σ)` with `w` the zero-shift weight.
    pub fn directional_second_derivative(
        &self,
        g: &Graph,
        beta: f64,
        v: &ShiftField,
        convention: IsingMeasureConvention,
    ) -> Result<f64> {
        check_inputs(g, beta)?;
        check_shift(g, v)?;
        let lv = g.laplacian_apply(v.values())?;
        let dirichlet: f64 = v.values().iter().zip(&lv).map(|(a, b)| a * b).sum();
        let blocks = self.run(
            g,
            beta,
            None,
            0.0,
            || (0.0f64, 0.0f64),
            |(z, q), s, w| {
                let proj: f64 = lv.iter().zip(s).map(|(a, b)| a * b).sum();
                *z += w;
                *q += w * proj * proj;
            },
        );
        let (z, q) = blocks.iter().fold((0.0, 0.0), |(a, b), (c, d)| (a + c, b + d));
        Ok((beta * beta * q - beta * dirichlet * z) * convention.factor(g.n()))
    }

    fn min_energy(&self, g: &Graph, h: &[f64]) -> f64 {
        let n = g.n();
        let (low, blocks) = block_layout(n);
        run_tasks(blocks, self.threads, |b| {
            let mut best = f64::INFINITY;
            walk_block(g, Some(h), low, b, |_, e| best = best.min(e));
            best
        })
        .into_iter()
        .fold(f64::INFINITY, f64::min)
    }

    fn run<S, I, F>(&self, g: &Graph, beta: f64, h: Option<&[f64]>, ref_energy: f64, init: I, visit: F) -> Vec<S>
    where
        S: Send,
        I: Fn() -> S + Sync,
        F: Fn(&mut S, &[f64], f64) + Sync,
    {
        let (low, blocks) = block_layout(g.n());
        run_tasks(blocks, self.threads, |b| {
            let mut state = init();
            walk_block(g, h, low, b, |spins, energy| {
                let w = (-0.5 * beta * (energy - ref_energy)).exp();
                visit(&mut state, spins, w);
            });
            state
        })
    }
}

fn check_inputs(g: &Graph, beta: f64) -> Result<()> {
    if g.n() > MAX_ENUM_VERTICES {
        return Err(Error::TooLarge { n: g.n(), max: MAX_ENUM_VERTICES });
    }
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!("beta must be finite and nonnegative, got {beta}")));
    }
    Ok(())
}

fn check_shift(g: &Graph, h: &ShiftField) -> Result<()> {
    if h.components() != 1 {
        return Err(Error::WrongN { expected: "1".into(), got: h.components() });
    }
    if h.n() != g.n() {
        return Err(Error::DimensionMismatch { expected: g.n(), got: h.n() });
    }
    Ok(())
}

/// `(low, blocks)`: the low spins Gray-coded inside a block and the number of
/// blocks given by all settings of the remaining high spins.
fn block_layout(n: usize) -> (usize, usize) {
    let high = n.saturating_sub(10).min(6);
    (n - high, 1 << high)
}

fn edge_term(spins: &[f64], h: Option<&[f64]>, a: usize, b: usize) -> f64 {
    let dh = h.map_or(0.0, |h| h[a] - h[b]);
    let t = (spins[a] - spins[b]) + dh;
    t * t
}

/// Visits every configuration of one block with its energy.
fn walk_block(g: &Graph, h: Option<&[f64]>, low: usize, block: usize, mut f: impl FnMut(&[f64], f64)) {
    let n = g.n();
    let mut spins = vec![1.0; n];
    for (bit, s) in spins[low..].iter_mut().enumerate() {
        if (block >> bit) & 1 == 1 {
            *s = -1.0;
        }
    }
    let mut energy: f64 = g.edges().iter().map(|&(a, b)| edge_term(&spins, h, a, b)).sum();
    f(&spins, energy);
    for t in 1u64..(1u64 << low) {
        let k = t.trailing_zeros() as usize;
        let before: f64 = g.neighbors(k).iter().map(|&l| edge_term(&spins, h, k, l)).sum();
        spins[k] = -spins[k];
        let after: f64 = g.neighbors(k).iter().map(|&l| edge_term(&spins, h, k, l)).sum();
        energy += after - before;
        f(&spins, energy);
    }
}

/// `Z*(h)` with a single worker.
pub fn exact_partition(g: &Graph, beta: f64, h: &ShiftField, convention: IsingMeasureConvention) -> Result<f64> {
    Enumerator::default().partition(g, beta, h, convention)
}

/// `log Z*(h)` with a single worker.
pub fn exact_log_partition(g: &Graph, beta: f64, h: &ShiftField, convention: IsingMeasureConvention) -> Result<f64> {
    Enumerator::default().log_partition(g, beta, h, convention)
}

/// `E σ_x σ_y`. Expectations do not depend on the site-measure convention;
/// the argument is accepted so call sites can stay uniform.
pub fn exact_correlation(g: &Graph, beta: f64, x: usize, y: usize, _convention: IsingMeasureConvention) -> Result<f64> {
    Enumerator::default().correlation(g, beta, x, y)
}

/// Exact `K_xy = β E[(Lσ)_x (Lσ)_y]`.
pub fn exact_k_matrix(g: &Graph, beta: f64) -> Result<DMatrix<f64>> {
    Ok(Enumerator::default().moments(g, beta)?.k)
}

pub fn directional_second_derivative(
    g: &Graph,
    beta: f64,
    v: &ShiftField,
    convention: IsingMeasureConvention,
) -> Result<f64> {
    Enumerator::default().directional_second_derivative(g, beta, v, convention)
}
