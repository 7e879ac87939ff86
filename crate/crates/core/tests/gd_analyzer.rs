mod common;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use spinlab::exact::{directional_second_derivative, exact_partition, Enumerator, IsingMeasureConvention, ShiftField};
use spinlab::gd::{
    audit_gde, dense_eigenpair, exact_gd_report, gd_verdict, gde_lower_bound, hessian_from_k, high_temp_threshold,
    power_iteration, sampled_gd_report, scan_shift_landscape, AuditStatus, CorrelationSource, Method, Verdict,
};
use spinlab::graph::random_connected;
use spinlab::mc::ChainConfig;
use spinlab::rng::stream_rng;
use spinlab::{Error, Graph, GraphFamily};

fn graph(f: GraphFamily) -> Graph {
    Graph::generate(f).unwrap()
}

fn random_symmetric(seed: u64, n: usize) -> DMatrix<f64> {
    use rand::Rng;
    let mut rng = stream_rng(seed, 0);
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    (&a + a.transpose()) * 0.5
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn eigen_solvers_agree_with_oracle(seed in any::<u64>(), n in 2usize..50) {
        let m = random_symmetric(seed, n);
        let oracle = common::projected_top_eigen(&m);
        let (dense, v) = dense_eigenpair(&m).unwrap();
        prop_assert!((dense - oracle).abs() < 1e-8 * oracle.abs().max(1.0));
        prop_assert!(v.sum().abs() < 1e-9 && (v.norm() - 1.0).abs() < 1e-9);
        let (power, w) = power_iteration(&m, 100_000).unwrap();
        prop_assert!((power - oracle).abs() < 1e-8 * oracle.abs().max(1.0), "{} vs {}", power, oracle);
        prop_assert!(w.sum().abs() < 1e-9);
    }

    /// `v·Mv = Z_v''(0) / (βZ)` for zero-mean `v`.
    #[test]
    fn quadratic_form_is_scaled_second_derivative(seed in any::<u64>(), n in 2usize..8, beta in 0.05f64..2.0) {
        let g = random_connected(n, 0.4, &mut stream_rng(seed, 1));
        let brute = common::brute_ising(&g, beta);
        let form = hessian_from_k(&brute.k, None, &g, beta).unwrap();
        let mut v: Vec<f64> = (0..n).map(|i| ((seed >> (i % 60)) & 7) as f64 - 3.5 + i as f64 * 0.1).collect();
        let mean = v.iter().sum::<f64>() / n as f64;
        v.iter_mut().for_each(|x| *x -= mean);
        let conv = IsingMeasureConvention::Unit;
        let d2 = directional_second_derivative(&g, beta, &ShiftField::scalar(v.clone()).unwrap(), conv).unwrap();
        let z = exact_partition(&g, beta, &ShiftField::zeros(n, 1), conv).unwrap();
        let q = form.quadratic(&v);
        prop_assert!((q - d2 / (beta * z)).abs() < 1e-8 * q.abs().max(1.0), "{} vs {}", q, d2 / (beta * z));
        prop_assert!(form.constant_defect() < 1e-10);
    }
}

#[test]
fn power_iteration_on_large_hessian() {
    // beyond the dense limit the verdict path runs power iteration
    let g = graph(GraphFamily::Torus { side: 23, dim: 2 });
    assert!(g.n() > spinlab::gd::DENSE_EIGEN_LIMIT);
    let form = hessian_from_k(&DMatrix::zeros(g.n(), g.n()), None, &g, 1.0).unwrap();
    let report = gd_verdict(&form, 1).unwrap();
    // M = -L: top eigenvalue on the complement of constants is -λ₂(L) = -2(1 - cos(2π/23))
    let expected = -2.0 * (1.0 - (2.0 * std::f64::consts::PI / 23.0).cos());
    assert!((report.lambda_max - expected).abs() < 1e-6, "{} vs {expected}", report.lambda_max);
    assert_eq!(report.verdict, Verdict::Dominated);
}

#[test]
fn star_violates() {
    let g = graph(GraphFamily::Star { leaves: 11 });
    let report = exact_gd_report(&g, 1.0, 2).unwrap();
    assert_eq!(report.verdict, Verdict::Violated);
    assert!((report.lambda_max - 0.542).abs() < 1e-3, "{}", report.lambda_max);
    assert_eq!(report.method, Method::Exact);
    assert_eq!(report.lambda_ci, 0.0);
    // the violating direction has positive curvature by enumeration as well
    let v = report.worst_direction.clone();
    let conv = IsingMeasureConvention::Unit;
    let d2 = directional_second_derivative(&g, 1.0, &ShiftField::scalar(v).unwrap(), conv).unwrap();
    assert!(d2 > 0.0);
}

#[test]
fn binary_tree_depth_four_is_dominated() {
    let g = graph(GraphFamily::PerfectBinaryTree { depth: 4 });
    for beta in [0.05, 1.2] {
        let report = exact_gd_report(&g, beta, 2).unwrap();
        assert_eq!(report.verdict, Verdict::Dominated, "beta={beta}: {}", report.lambda_max);
    }
    let report = exact_gd_report(&g, 1.2, 1).unwrap();
    assert!((report.lambda_max + 0.072).abs() < 1e-3, "{}", report.lambda_max);
}

#[test]
fn high_temperature_dominates_and_bound_holds() {
    let mut rng = stream_rng(2024, 0);
    for t in 0..50 {
        use rand::Rng;
        let n = rng.random_range(2..=12);
        let g = random_connected(n, rng.random_range(0.0..0.5), &mut rng);
        let beta = high_temp_threshold(&g) / 2.0;
        let moments = Enumerator::default().moments(&g, beta).unwrap();
        let report = gd_verdict(&hessian_from_k(&moments.k, None, &g, beta).unwrap(), 1).unwrap();
        assert_eq!(report.verdict, Verdict::Dominated, "graph {t}: {}", report.lambda_max);
        let audit = audit_gde(&g, beta, 1, Some(&report), &CorrelationSource::Exact(moments.correlation)).unwrap();
        assert!(audit.passes(), "graph {t}: {:?}", audit.failures().collect::<Vec<_>>());
        assert!(audit.rows.iter().all(|r| r.status == AuditStatus::Pass));
    }
}

#[test]
fn low_temperature_scan_finds_dominated_pairs() {
    for f in [
        GraphFamily::Path { n: 2 },
        GraphFamily::Path { n: 4 },
        GraphFamily::Cycle { n: 5 },
        GraphFamily::PerfectBinaryTree { depth: 3 },
    ] {
        let g = graph(f);
        let verdict = |beta: f64| exact_gd_report(&g, beta, 1).unwrap().verdict;
        let found = [1.0, 2.0, 5.0, 10.0, 25.0, 50.0, 100.0]
            .into_iter()
            .find(|&b| verdict(b) == Verdict::Dominated && verdict(2.0 * b) == Verdict::Dominated);
        assert!(found.is_some(), "{f}");
    }
}

#[test]
fn torus_is_dominated() {
    let g = graph(GraphFamily::Torus { side: 4, dim: 2 });
    for beta in [0.2, 1.0, 5.0] {
        let moments = Enumerator::new(4).moments(&g, beta).unwrap();
        let report = gd_verdict(&hessian_from_k(&moments.k, None, &g, beta).unwrap(), 1).unwrap();
        assert_eq!(report.verdict, Verdict::Dominated, "beta={beta}: {}", report.lambda_max);
        let audit = audit_gde(&g, beta, 1, Some(&report), &CorrelationSource::Exact(moments.correlation)).unwrap();
        assert!(audit.passes());
    }
}

#[test]
fn audit_requires_matching_dominated_verdict() {
    let g = graph(GraphFamily::Star { leaves: 11 });
    let moments = Enumerator::default().moments(&g, 1.0).unwrap();
    let corr = CorrelationSource::Exact(moments.correlation.clone());
    assert_eq!(audit_gde(&g, 1.0, 1, None, &corr), Err(Error::MissingVerdict));
    let report = exact_gd_report(&g, 1.0, 1).unwrap();
    let audit = audit_gde(&g, 1.0, 1, Some(&report), &corr).unwrap();
    assert!(audit.rows.iter().all(|r| r.status == AuditStatus::NotAsserted));
    assert!(audit_gde(&g, 2.0, 1, Some(&report), &corr).is_err());

    // an audit catches a correlation matrix that violates the bound
    let k2 = graph(GraphFamily::Path { n: 2 });
    let report = exact_gd_report(&k2, 1.0, 1).unwrap();
    assert_eq!(report.verdict, Verdict::Dominated);
    let fake = CorrelationSource::Exact(DMatrix::from_row_slice(2, 2, &[1.0, -0.9, -0.9, 1.0]));
    let audit = audit_gde(&k2, 1.0, 1, Some(&report), &fake).unwrap();
    assert_eq!(audit.failures().count(), 1);
}

#[test]
fn lower_bound_values_and_errors() {
    let g = graph(GraphFamily::ParallelPaths { length: 3, count: 3 });
    let (x, y) = (0, g.n() - 1);
    // renormalized Green value (l+1)/d = 4/3
    let b = gde_lower_bound(&g, 2.0, 3, x, y).unwrap();
    assert!((b - (1.0 - 3.0 * 4.0 / 3.0 / 4.0)).abs() < 1e-12);
    assert_eq!(gde_lower_bound(&g, 2.0, 3, 1, 1), Err(Error::SameVertex(1)));
    assert_eq!(gde_lower_bound(&g, 0.0, 3, x, y), Err(Error::NonpositiveBeta(0.0)));
    assert!(matches!(gde_lower_bound(&g, 1.0, 3, 0, 99), Err(Error::VertexOutOfRange { .. })));
}

#[test]
fn monte_carlo_verdicts() {
    // Heisenberg cycle at low temperature: M → -L/3
    let g = graph(GraphFamily::Cycle { n: 5 });
    let report = sampled_gd_report(&g, 3, 50.0, ChainConfig::new(3).with_sweeps(40_000, 4_000), 4, 4).unwrap();
    assert_eq!(report.verdict, Verdict::Dominated, "{report:?}");
    assert_eq!(report.method, Method::MonteCarlo);
    assert!(report.lambda_ci > 0.0);
    let expected = -(2.0 - 2.0 * (2.0 * std::f64::consts::PI / 5.0).cos()) / 3.0;
    assert!((report.lambda_max - expected).abs() < 0.05, "{} vs {expected}", report.lambda_max);
    assert_eq!(report.seed, Some(3));

    // the Ising star counterexample is visible to sampling too
    let star = graph(GraphFamily::Star { leaves: 11 });
    let report = sampled_gd_report(&star, 1, 1.0, ChainConfig::new(4).with_sweeps(100_000, 2_000), 4, 4).unwrap();
    assert_eq!(report.verdict, Verdict::Violated, "{report:?}");
}

#[test]
fn report_json_is_versioned() {
    let g = graph(GraphFamily::Path { n: 3 });
    let report = exact_gd_report(&g, 1.0, 1).unwrap().with_context("path:3", None);
    let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["verdict"], "dominated");
    assert_eq!(json["method"], "exact");
    assert_eq!(json["graph_spec"], "path:3");
    let v = DVector::from_vec(report.worst_direction.clone());
    assert!(v.sum().abs() < 1e-10);
}

#[test]
fn zero_shift_beats_grid_on_an_edge() {
    let g = graph(GraphFamily::Path { n: 2 });
    for beta in [0.3, 1.0, 3.0] {
        let scan = scan_shift_landscape(&g, beta, 2.0, 41).unwrap();
        assert!(scan.max_gain <= 1e-12, "beta={beta}: {scan:?}");
    }
    assert!(scan_shift_landscape(&graph(GraphFamily::Path { n: 5 }), 1.0, 1.0, 3).is_err());
}
