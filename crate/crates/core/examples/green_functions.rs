//! Green's functions of the simple random walk absorbed at a sink, checked
//! against a walk simulation.
//!
//! `cargo run --example green_functions`

use spinlab::greens::{greens_function, greens_rw_oracle, renormalized_green};
use spinlab::{Graph, GraphFamily};

fn main() -> spinlab::Result<()> {
    // Three parallel paths of three internal vertices between 1 and 11.
    let g = Graph::generate(GraphFamily::ParallelPaths { length: 3, count: 3 })?;
    let (x, y) = (0, g.n() - 1);
    let table = greens_function(&g, x, y)?;
    println!("u_xy(s) for x = 1, y = {}:", y + 1);
    for (s, u) in table.values.iter().enumerate() {
        println!("  s = {:2}: {u:.6}", s + 1);
    }
    println!("u_xy(x) = {} (expected l + 1 = 4)", table.at(x));
    println!("u_xy(x)/d(x) = {} (expected (l+1)/d = 4/3)", renormalized_green(&g, x, y)?);

    let est = greens_rw_oracle(&g, x, y, x, 200_000, 7, 4)?;
    println!("walk simulation: {:.4} ± {:.4} over {} walks", est.mean, est.stderr, est.n_samples);

    // The renormalized value is symmetric and grows like the distance on a path.
    let path = Graph::generate(GraphFamily::Path { n: 8 })?;
    for k in 1..8 {
        let (a, b) = (renormalized_green(&path, 0, k)?, renormalized_green(&path, k, 0)?);
        println!("path(8): R(1, {}) = {a:.3} = R({}, 1) = {b:.3}", k + 1, k + 1);
    }
    Ok(())
}
