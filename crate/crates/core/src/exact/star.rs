//! Second derivative of `Z*` on the star graph along the shift that moves the
//! center only.
//!
//! With `U(σ₁ - σ₂) = exp(-β‖σ₁ - σ₂‖²/2)` and `C = ∫ U dσ₂` (independent of
//! `σ₁`), `Z_v''(0) / (n₀ C^{n₀-2})` equals
//!
//! `(n₀ - 1) ∫(∫ ∂_e U dσ₂)² dσ₁ + C ∫∫ ∂²_e U dσ₂ dσ₁`,
//!
//! which is affine in the leaf count `n₀`. Sphere integrals use the
//! unnormalized surface measure (counting measure on `S⁰`).
//!
//! For `N ∈ {2, 3}` the integrand depends on `e·σ₁`, `e·σ₂` and `σ₁·σ₂`
//! only. `σ₁` is parametrized by its polar angle from `e` (the outer integral
//! is rotation invariant about `e`), `σ₂` by its polar angle from `e` and its
//! azimuth relative to `σ₁`, each integrated by Gauss–Legendre.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// Quadrature resolution for the sphere integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StarQuadrature {
    /// Gauss–Legendre nodes per angle.
    pub nodes: usize,
}

impl Default for StarQuadrature {
    fn default() -> Self {
        StarQuadrature { nodes: 128 }
    }
}

/// The three `n₀`-independent integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StarHessianTerms {
    pub beta: f64,
    pub spin_dim: usize,
    /// `∫(∫ ∂_e U dσ₂)² dσ₁`, the coefficient of `n₀ - 1`. Nonnegative.
    pub slope: f64,
    /// `C = ∫ U dσ₂`.
    pub c: f64,
    /// `∫∫ ∂²_e U dσ₂ dσ₁`.
    pub curvature: f64,
}

impl StarHessianTerms {
    /// `(n₀ - 1)·slope + C·curvature`.
    pub fn value(&self, leaves: usize) -> f64 {
        (leaves as f64 - 1.0) * self.slope + self.c * self.curvature
    }
}

pub fn star_hessian_terms(beta: f64, spin_dim: usize, quad: StarQuadrature) -> Result<StarHessianTerms> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!("beta must be finite and nonnegative, got {beta}")));
    }
    match spin_dim {
        1 => Ok(ising_terms(beta)),
        2 | 3 => Ok(sphere_terms(beta, spin_dim, quad)),
        other => Err(Error::UnsupportedN(other)),
    }
}

/// Value of the normalized second derivative for `star(leaves)`.
/// Positive means Gaussian domination fails on that star.
pub fn star_hessian(beta: f64, spin_dim: usize, leaves: usize, quad: StarQuadrature) -> Result<f64> {
    if leaves < 2 {
        return Err(Error::InvalidParameter("the star needs at least two leaves".into()));
    }
    Ok(star_hessian_terms(beta, spin_dim, quad)?.value(leaves))
}

/// Smallest `n₀ ≥ 2` with a positive star Hessian.
pub fn minimal_star_size(beta: f64, spin_dim: usize, quad: StarQuadrature) -> Result<usize> {
    let terms = star_hessian_terms(beta, spin_dim, quad)?;
    let base = terms.c * terms.curvature;
    if terms.slope <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "star Hessian does not grow with the leaf count at beta = {beta}"
        )));
    }
    // (n0 - 1) * slope + base > 0  <=>  n0 - 1 > -base / slope
    let bound = -base / terms.slope;
    if !bound.is_finite() || bound > 1e15 {
        return Err(Error::InvalidParameter(format!("minimal star size overflows at beta = {beta}")));
    }
    let mut n0 = if bound < 1.0 { 2 } else { bound.floor() as usize + 2 };
    while terms.value(n0) <= 0.0 {
        n0 += 1;
    }
    while n0 > 2 && terms.value(n0 - 1) > 0.0 {
        n0 -= 1;
    }
    Ok(n0)
}

/// `N = 1`: all integrals are sums over `σ ∈ {-1, +1}`.
fn ising_terms(beta: f64) -> StarHessianTerms {
    let spins = [-1.0f64, 1.0];
    let u = |d: f64| (-0.5 * beta * d * d).exp();
    let mut slope = 0.0;
    let mut curvature = 0.0;
    for &s1 in &spins {
        let first: f64 = spins.iter().map(|&s2| -beta * (s1 - s2) * u(s1 - s2)).sum();
        let second: f64 = spins.iter().map(|&s2| (beta * beta * (s1 - s2).powi(2) - beta) * u(s1 - s2)).sum();
        slope += first * first;
        curvature += second;
    }
    let c = spins.iter().map(|&s2| u(1.0 - s2)).sum();
    StarHessianTerms { beta, spin_dim: 1, slope, c, curvature }
}

fn sphere_terms(beta: f64, spin_dim: usize, quad: StarQuadrature) -> StarHessianTerms {
    let rule = GaussLegendre::new(quad.nodes);
    let polar: Vec<(f64, f64)> = rule.on_interval(0.0, PI).collect();
    // Azimuth of σ₂ about e, measured from the plane containing e and σ₁:
    // S⁰ = {0, π} for N = 2, the full circle for N = 3.
    let azimuth: Vec<(f64, f64)> = if spin_dim == 2 {
        vec![(1.0, 1.0), (-1.0, 1.0)]
    } else {
        rule.on_interval(0.0, 2.0 * PI).map(|(phi, w)| (phi.cos(), w)).collect()
    };
    let sin_weight = |theta: f64| if spin_dim == 2 { 1.0 } else { theta.sin() };
    // Surface measure of S^{N-2}, the orbit of σ₁ around e.
    let orbit = if spin_dim == 2 { 2.0 } else { 2.0 * PI };

    let inner = |theta1: f64| {
        let (c1, s1) = (theta1.cos(), theta1.sin());
        let (mut i0, mut i1, mut i2) = (0.0, 0.0, 0.0);
        for &(theta2, w2) in &polar {
            let (c2, s2) = (theta2.cos(), theta2.sin());
            let w2 = w2 * sin_weight(theta2);
            let de = c1 - c2;
            for &(cos_phi, wphi) in &azimuth {
                let dot = c1 * c2 + s1 * s2 * cos_phi;
                let u = (-beta * (1.0 - dot)).exp();
                let w = w2 * wphi;
                i0 += w * u;
                i1 += w * (-beta * de * u);
                i2 += w * ((beta * beta * de * de - beta) * u);
            }
        }
        (i0, i1, i2)
    };

    let (mut slope, mut curvature, mut c_avg, mut area) = (0.0, 0.0, 0.0, 0.0);
    for &(theta1, w1) in &polar {
        let w = orbit * w1 * sin_weight(theta1);
        let (i0, i1, i2) = inner(theta1);
        slope += w * i1 * i1;
        curvature += w * i2;
        c_avg += w * i0;
        area += w;
    }
    StarHessianTerms { beta, spin_dim, slope, c: c_avg / area, curvature }
}
