//! Independent oracles shared by the integration tests. Each one takes a
//! deliberately naive route (direct sums, full linear systems) so agreement
//! with the library is meaningful.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use spinlab::Graph;

/// Direct sum over `{±1}^n` with weight `exp(β Σ_E σ_i σ_j)`.
pub struct BruteIsing {
    pub z: f64,
    pub corr: DMatrix<f64>,
    pub k: DMatrix<f64>,
}

pub fn brute_ising(g: &Graph, beta: f64) -> BruteIsing {
    let n = g.n();
    assert!(n <= 20, "brute force is for tiny graphs");
    let (mut z, mut corr, mut k) = (0.0, DMatrix::zeros(n, n), DMatrix::zeros(n, n));
    for mask in 0u64..(1 << n) {
        let s: Vec<f64> = (0..n).map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 }).collect();
        let energy: f64 = g.edges().iter().map(|&(a, b)| s[a] * s[b]).sum();
        let w = (beta * energy).exp();
        let lap: Vec<f64> = (0..n).map(|x| g.neighbors(x).iter().map(|&z| s[x] - s[z]).sum()).collect();
        z += w;
        for x in 0..n {
            for y in 0..n {
                corr[(x, y)] += w * s[x] * s[y];
                k[(x, y)] += w * lap[x] * lap[y];
            }
        }
    }
    BruteIsing { z, corr: corr / z, k: k * (beta / z) }
}

/// `Σ_σ exp(-β/2 Σ_E (σ_a + h_a - σ_b - h_b)²)` over `{±1}^n` (unit measure).
pub fn brute_shifted_partition(g: &Graph, beta: f64, h: &[f64]) -> f64 {
    let n = g.n();
    (0u64..(1 << n))
        .map(|mask| {
            let s: Vec<f64> = (0..n).map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 }).collect();
            let e: f64 = g.edges().iter().map(|&(a, b)| (s[a] + h[a] - s[b] - h[b]).powi(2)).sum();
            (-0.5 * beta * e).exp()
        })
        .sum()
}

/// `u_ij` from the full `n × n` system with row `j` replaced by `u(j) = 0`,
/// solved by LU.
pub fn green_dense(g: &Graph, i: usize, j: usize) -> Vec<f64> {
    let n = g.n();
    let mut a = g.laplacian_matrix();
    let mut b = DVector::zeros(n);
    b[i] = g.degree(i) as f64;
    for c in 0..n {
        a[(j, c)] = if c == j { 1.0 } else { 0.0 };
    }
    b[j] = 0.0;
    a.lu().solve(&b).expect("pinned Laplacian is invertible").iter().copied().collect()
}

/// Largest eigenvalue of `P M P` (with `P` the projection off constants),
/// skipping the eigenvector closest to the constant direction.
pub fn projected_top_eigen(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let p = DMatrix::identity(n, n) - DMatrix::from_element(n, n, 1.0 / n as f64);
    let pmp = &p * m * &p;
    let eig = nalgebra::SymmetricEigen::new((&pmp + pmp.transpose()) * 0.5);
    let ones = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let skip = (0..n)
        .max_by(|&a, &b| {
            eig.eigenvectors.column(a).dot(&ones).abs().total_cmp(&eig.eigenvectors.column(b).dot(&ones).abs())
        })
        .unwrap();
    (0..n).filter(|&c| c != skip).map(|c| eig.eigenvalues[c]).fold(f64::NEG_INFINITY, f64::max)
}

/// Binary-tree second derivative by central differences of the brute-force
/// shifted partition function along `v` (leaves = 1).
pub fn tree_second_derivative_fd(g: &Graph, beta: f64, v: &[f64], step: f64) -> f64 {
    let at = |t: f64| {
        let h: Vec<f64> = v.iter().map(|x| t * x).collect();
        brute_shifted_partition(g, beta, &h)
    };
    (at(step) - 2.0 * at(0.0) + at(-step)) / (step * step)
}
