//! Markov chain sampling of the spin O(N) measure `∝ exp(β Σ_E σ_i·σ_j)`.
//!
//! One sweep visits every free vertex once in a fresh random order. Ising
//! spins (`N = 1`) are redrawn from their exact conditional law (heat bath);
//! for `N ≥ 2` a Gaussian kick is added and the spin renormalized, which is a
//! symmetric proposal, then accepted with probability
//! `min(1, exp(β (σ' - σ)·h))` where `h` is the neighbor sum.

mod estimators;
mod stream;

pub use estimators::{
    estimate_correlation, estimate_k_matrix, estimate_k_matrix_replicas, estimate_rescaled_distance, k_observable,
    measure, measure_replicas, KMatrixEstimate,
};
pub use stream::{read_samples, write_samples, RecordedSamples, STREAM_MAGIC};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::{stream_rng, SimRng};

/// One unit vector in `R^N` per vertex, stored vertex-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinConfiguration {
    n: usize,
    spin_dim: usize,
    data: Vec<f64>,
}

impl SpinConfiguration {
    pub fn from_vec(n: usize, spin_dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * spin_dim {
            return Err(Error::DimensionMismatch { expected: n * spin_dim, got: data.len() });
        }
        Ok(SpinConfiguration { n, spin_dim, data })
    }

    /// Every spin equal to the north pole `e_N`.
    pub fn aligned(n: usize, spin_dim: usize) -> Self {
        let mut data = vec![0.0; n * spin_dim];
        for v in 0..n {
            data[v * spin_dim + spin_dim - 1] = 1.0;
        }
        SpinConfiguration { n, spin_dim, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spin_dim(&self) -> usize {
        self.spin_dim
    }

    pub fn spin(&self, v: usize) -> &[f64] {
        &self.data[v * self.spin_dim..(v + 1) * self.spin_dim]
    }

    fn spin_mut(&mut self, v: usize) -> &mut [f64] {
        &mut self.data[v * self.spin_dim..(v + 1) * self.spin_dim]
    }

    /// Component `l` (0-based) of the spin at `v`.
    pub fn component(&self, v: usize, l: usize) -> f64 {
        self.data[v * self.spin_dim + l]
    }

    pub fn dot(&self, a: usize, b: usize) -> f64 {
        self.spin(a).iter().zip(self.spin(b)).map(|(x, y)| x * y).sum()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Largest `|‖σ_v‖ - 1|` over vertices.
    pub fn max_norm_defect(&self) -> f64 {
        (0..self.n).map(|v| (self.spin(v).iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Uniform point on `S^{N-1}`: a fair sign for `N = 1`, otherwise a
/// normalized standard Gaussian vector.
pub fn uniform_sphere_point<R: Rng + ?Sized>(spin_dim: usize, rng: &mut R) -> Vec<f64> {
    assert!(spin_dim >= 1, "spin dimension must be at least 1");
    if spin_dim == 1 {
        return vec![if rng.random_bool(0.5) { 1.0 } else { -1.0 }];
    }
    loop {
        let mut v: Vec<f64> = (0..spin_dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            v.iter_mut().for_each(|x| *x /= norm);
            return v;
        }
    }
}

/// Chain parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub sweeps: usize,
    pub burn_in: usize,
    pub thin: usize,
    /// Gaussian kick width for `N ≥ 2`; `None` means `1/√(1+β)`.
    pub proposal_width: Option<f64>,
    /// Adjust the width toward ~50% acceptance during burn-in only.
    pub tune_during_burn_in: bool,
    /// Fix vertex 0 to the north pole (the rooted measure).
    pub root_pinned: bool,
    pub seed: u64,
}

impl ChainConfig {
    pub fn new(seed: u64) -> Self {
        ChainConfig {
            sweeps: 100_000,
            burn_in: 10_000,
            thin: 1,
            proposal_width: None,
            tune_during_burn_in: true,
            root_pinned: false,
            seed,
        }
    }

    pub fn with_sweeps(mut self, sweeps: usize, burn_in: usize) -> Self {
        self.sweeps = sweeps;
        self.burn_in = burn_in;
        self
    }

    pub fn with_thin(mut self, thin: usize) -> Self {
        self.thin = thin;
        self
    }

    pub fn pinned(mut self, root_pinned: bool) -> Self {
        self.root_pinned = root_pinned;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.sweeps {
            return Err(Error::Config(format!(
                "burn_in ({}) must be smaller than sweeps ({})",
                self.burn_in, self.sweeps
            )));
        }
        if self.thin == 0 {
            return Err(Error::Config("thin must be at least 1".into()));
        }
        if let Some(w) = self.proposal_width {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::Config(format!("proposal_width must be positive, got {w}")));
            }
        }
        Ok(())
    }

    /// Number of configurations the chain emits.
    pub fn samples(&self) -> usize {
        (self.sweeps - self.burn_in) / self.thin
    }
}

/// A running chain. Yields post-burn-in, thinned states through
/// [`SampleSource::next_sample`].
#[derive(Debug, Clone)]
pub struct Chain<'g> {
    graph: &'g Graph,
    beta: f64,
    cfg: ChainConfig,
    rng: SimRng,
    state: SpinConfiguration,
    order: Vec<usize>,
    width: f64,
    sweep: usize,
    emitted: usize,
    proposals: u64,
    accepted: u64,
    field: Vec<f64>,
    proposal: Vec<f64>,
}

/// Anything that yields spin configurations one at a time.
pub trait SampleSource {
    fn n(&self) -> usize;
    fn spin_dim(&self) -> usize;
    /// Configurations still to come.
    fn remaining(&self) -> usize;
    fn next_sample(&mut self) -> Option<&SpinConfiguration>;
}

/// Starts a chain for `μ_{G,N,β}` (or the rooted measure when pinned).
pub fn run_chain(g: &Graph, spin_dim: usize, beta: f64, cfg: ChainConfig) -> Result<Chain<'_>> {
    Chain::with_stream(g, spin_dim, beta, cfg, 0)
}

impl<'g> Chain<'g> {
    /// Chain drawing from random stream `stream` under `cfg.seed`; replicas
    /// use distinct stream ids.
    pub fn with_stream(g: &'g Graph, spin_dim: usize, beta: f64, cfg: ChainConfig, stream: u64) -> Result<Self> {
        cfg.validate()?;
        if spin_dim == 0 {
            return Err(Error::InvalidParameter("spin dimension must be at least 1".into()));
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!("beta must be finite and nonnegative, got {beta}")));
        }
        let rng = stream_rng(cfg.seed, stream);
        let n = g.n();
        // Cold start: at low temperature a random start can freeze into a
        // winding (N = 2) or domain-wall state that local moves never leave.
        let state = SpinConfiguration::aligned(n, spin_dim);
        let first_free = usize::from(cfg.root_pinned);
        Ok(Chain {
            graph: g,
            beta,
            cfg,
            rng,
            state,
            order: (first_free..n).collect(),
            width: cfg.proposal_width.unwrap_or(1.0 / (1.0 + beta).sqrt()),
            sweep: 0,
            emitted: 0,
            proposals: 0,
            accepted: 0,
            field: vec![0.0; spin_dim],
            proposal: vec![0.0; spin_dim],
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn config(&self) -> &ChainConfig {
        &self.cfg
    }

    pub fn state(&self) -> &SpinConfiguration {
        &self.state
    }

    /// Current kick width (frozen after burn-in).
    pub fn proposal_width(&self) -> f64 {
        self.width
    }

    /// Metropolis acceptance rate since the last reset (1.0 for `N = 1`).
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            1.0
        } else {
            self.accepted as f64 / self.proposals as f64
        }
    }

    fn local_field(&mut self, v: usize) {
        self.field.iter_mut().for_each(|x| *x = 0.0);
        for &w in self.graph.neighbors(v) {
            for (f, s) in self.field.iter_mut().zip(self.state.spin(w)) {
                *f += s;
            }
        }
    }

    /// One sweep over the free vertices in random order.
    pub fn sweep(&mut self) {
        let mut order = std::mem::take(&mut self.order);
        order.shuffle(&mut self.rng);
        for &v in &order {
            self.local_field(v);
            if self.state.spin_dim == 1 {
                self.heat_bath(v);
            } else {
                self.metropolis(v);
            }
        }
        self.order = order;
        self.sweep += 1;
    }

    fn heat_bath(&mut self, v: usize) {
        let h = self.field[0];
        let p_up = 1.0 / (1.0 + (-2.0 * self.beta * h).exp());
        let up = self.rng.random::<f64>() < p_up;
        self.state.spin_mut(v)[0] = if up { 1.0 } else { -1.0 };
    }

    fn metropolis(&mut self, v: usize) {
        let width = self.width;
        let current = self.state.spin(v);
        let mut norm2 = 0.0;
        for (p, &c) in self.proposal.iter_mut().zip(current) {
            let kick: f64 = self.rng.sample(StandardNormal);
            *p = c + width * kick;
            norm2 += *p * *p;
        }
        let norm = norm2.sqrt();
        if norm < 1e-300 {
            return;
        }
        self.proposal.iter_mut().for_each(|p| *p /= norm);
        let delta: f64 = self.proposal.iter().zip(current).zip(&self.field).map(|((p, c), f)| (p - c) * f).sum();
        self.proposals += 1;
        let log_ratio = self.beta * delta;
        if log_ratio >= 0.0 || self.rng.random::<f64>() < log_ratio.exp() {
            self.accepted += 1;
            let proposal = std::mem::take(&mut self.proposal);
            self.state.spin_mut(v).copy_from_slice(&proposal);
            self.proposal = proposal;
        }
    }

    fn burn_in(&mut self) {
        const WINDOW: usize = 50;
        let tune = self.cfg.tune_during_burn_in && self.state.spin_dim > 1;
        while self.sweep < self.cfg.burn_in {
            self.sweep();
            if tune && self.sweep.is_multiple_of(WINDOW) {
                let rate = self.acceptance_rate();
                if rate > 0.6 {
                    self.width = (self.width * 1.15).min(4.0);
                } else if rate < 0.4 {
                    self.width = (self.width / 1.15).max(1e-4);
                }
                self.proposals = 0;
                self.accepted = 0;
            }
        }
        self.proposals = 0;
        self.accepted = 0;
    }
}

impl SampleSource for Chain<'_> {
    fn n(&self) -> usize {
        self.state.n
    }

    fn spin_dim(&self) -> usize {
        self.state.spin_dim
    }

    fn remaining(&self) -> usize {
        self.cfg.samples() - self.emitted
    }

    fn next_sample(&mut self) -> Option<&SpinConfiguration> {
        if self.remaining() == 0 {
            return None;
        }
        if self.sweep < self.cfg.burn_in {
            self.burn_in();
        }
        for _ in 0..self.cfg.thin {
            self.sweep();
        }
        self.emitted += 1;
        Some(&self.state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphFamily;
    use crate::stats::Estimate;

    #[test]
    fn sphere_points() {
        let mut rng = stream_rng(1, 0);
        let draws: Vec<f64> = (0..200_000).map(|_| uniform_sphere_point(1, &mut rng)[0]).collect();
        let e = Estimate::from_iid(&draws);
        assert!(e.mean.abs() < 4.0 * e.stderr);

        let pts: Vec<Vec<f64>> = (0..200_000).map(|_| uniform_sphere_point(3, &mut rng)).collect();
        for l in 0..3 {
            let m2 = pts.iter().map(|p| p[l] * p[l]).sum::<f64>() / pts.len() as f64;
            assert!((m2 / (1.0 / 3.0) - 1.0).abs() < 0.01, "component {l}: {m2}");
        }
        assert!(pts.iter().all(|p| (p.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-14));
    }

    #[test]
    fn config_validation() {
        assert!(ChainConfig::new(0).with_sweeps(10, 10).validate().is_err());
        assert!(ChainConfig::new(0).with_thin(0).validate().is_err());
        let mut c = ChainConfig::new(0);
        c.proposal_width = Some(0.0);
        assert!(c.validate().is_err());
        assert_eq!(ChainConfig::new(0).with_sweeps(1000, 100).with_thin(3).samples(), 300);
    }

    #[test]
    fn emits_expected_count_and_keeps_norms() {
        let g = Graph::generate(GraphFamily::Cycle { n: 5 }).unwrap();
        let cfg = ChainConfig::new(9).with_sweeps(600, 100).with_thin(5);
        let mut chain = run_chain(&g, 3, 2.0, cfg).unwrap();
        let mut count = 0;
        while let Some(s) = chain.next_sample() {
            assert!(s.max_norm_defect() < 1e-12);
            count += 1;
        }
        assert_eq!(count, 100);
    }

    #[test]
    fn pinned_root_stays_at_north_pole() {
        let g = Graph::generate(GraphFamily::Path { n: 3 }).unwrap();
        let cfg = ChainConfig::new(2).with_sweeps(300, 50).pinned(true);
        let mut chain = run_chain(&g, 2, 5.0, cfg).unwrap();
        while let Some(s) = chain.next_sample() {
            assert_eq!(s.spin(0), &[0.0, 1.0]);
        }
    }

    #[test]
    fn same_seed_same_stream() {
        let g = Graph::generate(GraphFamily::Star { leaves: 3 }).unwrap();
        let cfg = ChainConfig::new(77).with_sweeps(200, 20);
        let collect = |mut c: Chain| {
            let mut out = Vec::new();
            while let Some(s) = c.next_sample() {
                out.extend(s.as_slice().iter().map(|x| x.to_bits()));
            }
            out
        };
        let a = collect(run_chain(&g, 2, 1.5, cfg).unwrap());
        let b = collect(run_chain(&g, 2, 1.5, cfg).unwrap());
        let c = collect(Chain::with_stream(&g, 2, 1.5, cfg, 1).unwrap());
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn tuning_freezes_after_burn_in() {
        let g = Graph::generate(GraphFamily::Cycle { n: 4 }).unwrap();
        let cfg = ChainConfig::new(4).with_sweeps(2000, 1000);
        let mut chain = run_chain(&g, 3, 30.0, cfg).unwrap();
        chain.next_sample();
        let w = chain.proposal_width();
        while chain.next_sample().is_some() {}
        assert_eq!(w, chain.proposal_width());
        let rate = chain.acceptance_rate();
        assert!((0.25..0.75).contains(&rate), "acceptance {rate}");
    }
}
