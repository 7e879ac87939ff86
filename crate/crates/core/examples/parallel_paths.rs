//! Parallel paths: the endpoint correlation decays while the renormalized
//! Green's function stays bounded, so the Gaussian-domination lower bound
//! eventually fails.
//!
//! `cargo run --example parallel_paths`

use spinlab::exact::parallel_paths_correlation_closed_form;
use spinlab::gd::gde_lower_bound;
use spinlab::greens::renormalized_green;
use spinlab::{Graph, GraphFamily};

fn main() -> spinlab::Result<()> {
    let beta = 1.0;
    println!("beta = {beta}, N = 1, endpoints of d paths of length l (l = d)");
    println!("{:>4} {:>12} {:>10} {:>10} {:>8}", "l=d", "correlation", "R(x,y)", "bound", "fails");
    for l in [2, 4, 8, 12, 16, 20, 24] {
        let g = Graph::generate(GraphFamily::ParallelPaths { length: l, count: l })?;
        let (x, y) = (0, g.n() - 1);
        let corr = parallel_paths_correlation_closed_form(beta, l, l)?;
        let r = renormalized_green(&g, x, y)?;
        let bound = gde_lower_bound(&g, beta, 1, x, y)?;
        println!("{l:>4} {corr:>12.6} {r:>10.4} {bound:>10.4} {:>8}", corr < bound);
    }
    // At low temperature the decay is much slower.
    println!("\nbeta = 5, l = d = 8: correlation {:.6}", parallel_paths_correlation_closed_form(5.0, 8, 8)?);
    Ok(())
}
