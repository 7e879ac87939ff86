//! Build graphs from generator strings, write and read edge-list files.
//!
//! `cargo run --example graph_io`

use spinlab::greens::max_renormalized_green;
use spinlab::{Graph, GraphFamily};

fn main() -> spinlab::Result<()> {
    for spec in ["star:5", "path:4", "cycle:6", "complete:4", "tree:3", "paths:2x3", "torus:3x2d"] {
        let g = Graph::from_spec(spec)?;
        let (r, x, y) = max_renormalized_green(&g)?;
        println!("{spec:>11}: n = {:2}, m = {:2}, max u_xy(x)/d(x) = {r:.3} at ({}, {})", g.n(), g.m(), x + 1, y + 1);
    }

    // Edge lists are 1-based, one edge per line, `#` comments allowed.
    let g = Graph::generate(GraphFamily::ParallelPaths { length: 2, count: 2 })?;
    let path = std::env::temp_dir().join("spinlab_example.edges");
    g.write_edge_list(&path)?;
    println!("\n{}:\n{}", path.display(), std::fs::read_to_string(&path)?);
    let back = Graph::from_spec(path.to_str().expect("utf-8 temp path"))?;
    assert_eq!(back, g);
    println!("round trip ok");

    // Invalid input is rejected with a typed error.
    for bad in ["1 2\n3 4\n", "1 1\n", "1 2\n2 1\n"] {
        println!("{bad:?} -> {}", Graph::parse_edge_list(bad).unwrap_err());
    }
    std::fs::remove_file(&path)?;
    Ok(())
}
