//! Exact Ising quantities by enumeration: partition function, correlations,
//! the K matrix and directional second derivatives of the shifted partition
//! function.
//!
//! `cargo run --example exact_enumeration`

use spinlab::exact::{
    directional_second_derivative, exact_log_partition, tree_correlation_closed_form, Enumerator,
    IsingMeasureConvention, ShiftField,
};
use spinlab::{Graph, GraphFamily};

fn main() -> spinlab::Result<()> {
    let g = Graph::generate(GraphFamily::Cycle { n: 6 })?;
    let beta = 0.7;
    for conv in [IsingMeasureConvention::Half, IsingMeasureConvention::Unit] {
        let log_z = exact_log_partition(&g, beta, &ShiftField::zeros(g.n(), 1), conv)?;
        println!("cycle(6), beta = {beta}, {conv:?} measure: log Z = {log_z:.10}");
    }

    let moments = Enumerator::new(4).moments(&g, beta)?;
    println!("E s_1 s_k = {:?}", (0..6).map(|k| format!("{:.5}", moments.correlation[(0, k)])).collect::<Vec<_>>());
    println!("K = beta E[(L s)(L s)^T]:\n{:.4}", moments.k);

    // On a tree, E s_x s_y = tanh(beta)^dist.
    let tree = Graph::generate(GraphFamily::PerfectBinaryTree { depth: 3 })?;
    let corr = Enumerator::default().moments(&tree, 1.0)?.correlation;
    let far = corr[(3, 6)];
    println!("tree(3): E s_4 s_7 = {far:.12}, tanh(1)^4 = {:.12}", tree_correlation_closed_form(1.0, 4));

    // Second derivative of Z*(t v) at t = 0 equals beta Z v.(K - L)v.
    let v = ShiftField::scalar(vec![1.0, -1.0, 0.5, 0.0, -0.5, 0.0])?;
    let d2 = directional_second_derivative(&g, beta, &v, IsingMeasureConvention::Unit)?;
    let z = exact_log_partition(&g, beta, &ShiftField::zeros(6, 1), IsingMeasureConvention::Unit)?.exp();
    let m = &moments.k - g.laplacian_matrix();
    let vv = nalgebra::DVector::from_column_slice(v.values());
    println!("Z_v''(0)/(beta Z) = {:.10}, v.(K-L)v = {:.10}", d2 / (beta * z), vv.dot(&(&m * &vv)));
    Ok(())
}
