//! The second-order Gaussian domination test: exact verdicts by enumeration,
//! sampled verdicts with confidence intervals, and an audit of the
//! two-point lower bound.
//!
//! `cargo run --release --example gd_verdict`

use spinlab::exact::Enumerator;
use spinlab::gd::{audit_gde, exact_gd_report, high_temp_threshold, sampled_gd_report, CorrelationSource};
use spinlab::mc::ChainConfig;
use spinlab::Graph;

fn main() -> spinlab::Result<()> {
    for (spec, beta) in [("star:11", 1.0), ("star:11", 0.3), ("tree:4", 1.2), ("torus:4x2d", 1.0), ("cycle:8", 3.0)] {
        let g = Graph::from_spec(spec)?;
        let report = exact_gd_report(&g, beta, 4)?;
        println!("{spec:>11} beta {beta:<4} exact: {:<9} lambda_max = {:+.5}", report.verdict, report.lambda_max);
    }

    let g = Graph::from_spec("cycle:6")?;
    println!("\ncycle(6): high-temperature threshold 1/(8m) = {:.5}", high_temp_threshold(&g));
    for n in [2, 3] {
        let cfg = ChainConfig::new(11).with_sweeps(50_000, 5_000);
        let r = sampled_gd_report(&g, n, 20.0, cfg, 4, 4)?;
        println!("N = {n}, beta 20, sampled: {} lambda_max = {:+.4} ± {:.4}", r.verdict, r.lambda_max, r.lambda_ci);
    }

    // The bound E s_x s_y >= 1 - N R(x,y)/(2 beta) under a dominated verdict.
    let g = Graph::from_spec("torus:4x2d")?;
    let beta = 1.0;
    let report = exact_gd_report(&g, beta, 4)?;
    let corr = Enumerator::new(4).moments(&g, beta)?.correlation;
    let audit = audit_gde(&g, beta, 1, Some(&report), &CorrelationSource::Exact(corr))?;
    let tightest = audit
        .rows
        .iter()
        .min_by(|a, b| (a.correlation - a.bound).total_cmp(&(b.correlation - b.bound)))
        .expect("pairs");
    println!(
        "\ntorus(4,2) audit: {} pairs, passes = {}; tightest ({}, {}): {:.4} >= {:.4}",
        audit.rows.len(),
        audit.passes(),
        tightest.x + 1,
        tightest.y + 1,
        tightest.correlation,
        tightest.bound
    );
    println!("\n{}", report.with_context("torus:4x2d", None).to_json());
    Ok(())
}
