//! Stars with many leaves violate the second-order Gaussian domination
//! condition: the smallest violating star for several temperatures and spin
//! dimensions, and an enumeration check for Ising spins.
//!
//! `cargo run --example star_counterexample`

use spinlab::exact::{
    directional_second_derivative, minimal_star_size, star_hessian, IsingMeasureConvention, ShiftField, StarQuadrature,
};
use spinlab::{Graph, GraphFamily};

fn main() -> spinlab::Result<()> {
    let quad = StarQuadrature::default();
    println!("smallest violating star (leaves):");
    println!("{:>6} {:>8} {:>8} {:>8}", "beta", "N=1", "N=2", "N=3");
    for beta in [0.5, 1.0, 1.5, 2.0] {
        let sizes: Vec<usize> = (1..=3).map(|n| minimal_star_size(beta, n, quad)).collect::<Result<_, _>>()?;
        println!("{beta:>6} {:>8} {:>8} {:>8}", sizes[0], sizes[1], sizes[2]);
    }

    println!("\nIsing, beta = 1, center-only shift:");
    for leaves in [9, 10, 11, 12] {
        let closed = star_hessian(1.0, 1, leaves, quad)?;
        let g = Graph::generate(GraphFamily::Star { leaves })?;
        let mut v = vec![0.0; g.n()];
        v[0] = 1.0;
        let d2 = directional_second_derivative(&g, 1.0, &ShiftField::scalar(v)?, IsingMeasureConvention::Unit)?;
        println!("  star({leaves:2}): closed form {closed:+.5e}, enumeration {d2:+.5e}");
    }
    Ok(())
}
