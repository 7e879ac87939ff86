//! Markov chain sampling of the O(N) model: correlations with batch-means
//! error bars, the rescaled distance, the K matrix and recorded sample
//! streams.
//!
//! `cargo run --release --example monte_carlo`

use spinlab::exact::{exact_correlation, IsingMeasureConvention};
use spinlab::mc::{
    estimate_correlation, estimate_k_matrix, estimate_k_matrix_replicas, estimate_rescaled_distance, read_samples,
    run_chain, write_samples, ChainConfig,
};
use spinlab::{Graph, GraphFamily};

fn main() -> spinlab::Result<()> {
    let g = Graph::generate(GraphFamily::Cycle { n: 6 })?;
    let cfg = ChainConfig::new(1).with_sweeps(100_000, 5_000);

    // Ising heat bath against enumeration.
    let est = estimate_correlation(&mut run_chain(&g, 1, 0.7, cfg)?, 0, 3)?;
    let exact = exact_correlation(&g, 0.7, 0, 3, IsingMeasureConvention::Half)?;
    println!("Ising cycle(6), beta 0.7: E s1.s4 = {:.4} ± {:.4} (exact {exact:.4})", est.mean, est.stderr);

    // Heisenberg at low temperature: beta E|s_x - s_y|^2 stays of order one.
    for beta in [5.0, 20.0, 80.0] {
        let d = estimate_rescaled_distance(&mut run_chain(&g, 3, beta, cfg)?, beta, 0, 3)?;
        println!("N = 3, beta {beta:>4}: beta E|s1 - s4|^2 = {:.4} ± {:.4}", d.mean, d.stderr);
    }

    // K from four replicas on four threads; identical for any thread count.
    let k = estimate_k_matrix_replicas(&g, 3, 50.0, ChainConfig::new(2).with_sweeps(50_000, 5_000), 4, 4)?;
    println!("K at beta 50 (approaches 2L/3):\n{:.3}", k.values);

    // Record a stream, replay it, and get the same estimate.
    let mut buf = Vec::new();
    let small = ChainConfig::new(3).with_sweeps(5_000, 500);
    let n = write_samples(&mut run_chain(&g, 2, 1.0, small)?, &mut buf)?;
    let replayed = estimate_k_matrix(&mut read_samples(buf.as_slice())?, &g, 1.0)?;
    let direct = estimate_k_matrix(&mut run_chain(&g, 2, 1.0, small)?, &g, 1.0)?;
    println!("{n} samples, {} bytes; replay identical: {}", buf.len(), replayed == direct);
    Ok(())
}
