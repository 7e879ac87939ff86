use serde::Serialize;

use crate::error::{Error, Result};

fn check_beta(beta: f64) -> Result<()> {
    if beta >= 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("beta must be finite and nonnegative, got {beta}")))
    }
}

/// Ising correlation across `dist` edges of a tree: `tanh(β)^dist`.
///
/// `tanh β = (1 - e^{-2β}) / (1 + e^{-2β})` is the per-edge correlation.
pub fn tree_correlation_closed_form(beta: f64, dist: u32) -> f64 {
    if beta.is_infinite() {
        return 1.0;
    }
    beta.tanh().powi(dist as i32)
}

/// `E σ_x σ_y` between the endpoints of `parallel_paths(length, count)`:
/// `[(1+q)^d - (1-q)^d] / [(1+q)^d + (1-q)^d]` with `q = tanh(β)^{l+1}`.
///
/// Evaluated through `a = (1-q)/(1+q)` as `(1 - a^d)/(1 + a^d)`, which stays
/// finite for any number of paths.
pub fn parallel_paths_correlation_closed_form(beta: f64, length: usize, count: usize) -> Result<f64> {
    check_beta(beta)?;
    if length < 1 || count < 1 {
        return Err(Error::InvalidParameter("length and count must be at least 1".into()));
    }
    let q = tree_correlation_closed_form(beta, (length + 1) as u32);
    let a = (1.0 - q) / (1.0 + q);
    let ad = a.powi(count as i32);
    Ok((1.0 - ad) / (1.0 + ad))
}

/// Pieces of the binary-tree second-derivative formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinaryTreeHessianTerms {
    pub depth: usize,
    pub beta: f64,
    /// `𝒰(0)`, `𝒰'(0)`, `𝒰''(0)` for `𝒰(η) = e^{-βη²/2} + e^{-β(2-η)²/2}`.
    pub u0: f64,
    pub u1: f64,
    pub u2: f64,
    /// `tanh β`.
    pub r: f64,
    /// `2^{k-2} (𝒰𝒰'' + 𝒰'²)`, the same-parent contribution.
    pub diagonal: f64,
    /// `2^{k-2} 𝒰'² Σ_{l=1}^{k-2} (2r²)^l`, the cross-parent contribution.
    pub cross: f64,
    pub value: f64,
}

/// Normalized second derivative of `Z*` on the perfect binary tree of depth
/// `k` (unit site measure) along the direction equal to 1 on the leaves and 0
/// elsewhere:
///
/// `Z_v''(0) / (2 Z*_{G'}(0) 𝒰(0)^{2(2^{k-2}-1)})`
/// `= 2^{k-2}(𝒰𝒰'' + 𝒰'²) + 2^{k-2} 𝒰'² Σ_{l=1}^{k-2} (2r²)^l`,
///
/// where `G'` is the tree without its leaf generation. Expanding the product
/// over the `P = 2^{k-2}` leaf parents to second order gives
/// `P·C + 4𝒰'² Σ_{i<j} E σ_i σ_j`; the unordered pairs of parents at distance
/// `2l` number `P·2^{l-2}`, which produces the cross coefficient above.
/// A positive value means Gaussian domination fails along this direction.
pub fn binary_tree_hessian_closed_form(beta: f64, depth: usize) -> Result<BinaryTreeHessianTerms> {
    check_beta(beta)?;
    if !(3..=60).contains(&depth) {
        return Err(Error::InvalidDepth(depth));
    }
    let e = (-2.0 * beta).exp();
    let u0 = 1.0 + e;
    let u1 = 2.0 * beta * e;
    let u2 = -beta + (4.0 * beta * beta - beta) * e;
    let r = beta.tanh();
    let ratio = 2.0 * r * r;
    let geometric: f64 = (1..=depth as i32 - 2).map(|l| ratio.powi(l)).sum();
    let parents = 2f64.powi(depth as i32 - 2);
    let diagonal = parents * (u0 * u2 + u1 * u1);
    let cross = parents * u1 * u1 * geometric;
    Ok(BinaryTreeHessianTerms { depth, beta, u0, u1, u2, r, diagonal, cross, value: diagonal + cross })
}

/// `β₀ = artanh(1/√2)`, the inverse temperature above which `2 tanh²β > 1`
/// and the cross term diverges with depth.
pub fn binary_tree_threshold() -> f64 {
    std::f64::consts::FRAC_1_SQRT_2.atanh()
}
