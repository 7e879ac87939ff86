use spinlab::gff::{gff_covariance, gff_sample, wcon_report, GaussianField, WconOptions, ROOT};
use spinlab::graph::random_connected;
use spinlab::greens::{greens_function, renormalized_green};
use spinlab::mc::ChainConfig;
use spinlab::rng::stream_rng;
use spinlab::{Error, Graph, GraphFamily};

fn graph(f: GraphFamily) -> Graph {
    Graph::generate(f).unwrap()
}

fn random_graphs(count: u64, max_n: usize) -> impl Iterator<Item = Graph> {
    (0..count).map(move |k| {
        let mut rng = stream_rng(k, 7);
        let n = 3 + (k as usize * 5) % (max_n - 2);
        random_connected(n, 0.1 + 0.02 * k as f64, &mut rng)
    })
}

/// All `u_{ij}(s)` tables from independent single-pair solves.
fn visit_tables(g: &Graph) -> Vec<Vec<Vec<f64>>> {
    let n = g.n();
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { vec![] } else { greens_function(g, i, j).unwrap().values }).collect())
        .collect()
}

#[test]
fn covariance_diagonal_is_renormalized_green() {
    for g in random_graphs(20, 15) {
        for root in [0, g.n() - 1] {
            let c = gff_covariance(&g, root).unwrap();
            for x in 0..g.n() {
                let expected =
                    if x == root { 0.0 } else { greens_function(&g, x, root).unwrap().at(x) / g.degree(x) as f64 };
                assert!((c[(x, x)] - expected).abs() < 1e-10 * expected.max(1.0));
                assert_eq!(c[(x, root)], 0.0);
            }
            assert!((&c - c.transpose()).amax() < 1e-12);
        }
    }
}

/// `u_xy(x)/d(x) = u_xz(x)/d(x) + u_yz(y)/d(y) - 2 u_xz(y)/d(x)` for distinct
/// `x, y, z`: increments of the field rooted at `z` have the renormalized
/// Green value as variance.
#[test]
fn three_point_identity() {
    for g in random_graphs(20, 15) {
        let u = visit_tables(&g);
        let d = |v: usize| g.degree(v) as f64;
        let n = g.n();
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if x == y || y == z || x == z {
                        continue;
                    }
                    let lhs = u[x][y][x] / d(x);
                    let rhs = u[x][z][x] / d(x) + u[y][z][y] / d(y) - 2.0 * u[x][z][y] / d(x);
                    assert!((lhs - rhs).abs() < 1e-10 * lhs.max(1.0), "({x},{y},{z}): {lhs} vs {rhs}");
                }
            }
        }
    }
}

#[test]
fn increment_variance_matches_green() {
    let g = graph(GraphFamily::ParallelPaths { length: 3, count: 2 });
    let field = GaussianField::new(&g, ROOT, 2).unwrap();
    for (x, y) in [(0, 7), (1, 5), (2, 6)] {
        let r = renormalized_green(&g, x, y).unwrap();
        assert!((field.increment_variance(x, y) - r).abs() < 1e-10);
    }
    assert!((field.increment_variance(0, 7) - 2.0).abs() < 1e-10);
}

#[test]
fn samples_have_field_covariance() {
    let g = graph(GraphFamily::Cycle { n: 5 });
    let cov = gff_covariance(&g, ROOT).unwrap();
    let count = 200_000;
    let draws = gff_sample(&g, 2, ROOT, count, 9, 4).unwrap();
    assert_eq!(draws.len(), count);
    for (a, b) in [(1, 1), (2, 2), (1, 3), (2, 4)] {
        for l in 0..2 {
            let emp = draws.iter().map(|s| s[a * 2 + l] * s[b * 2 + l]).sum::<f64>() / count as f64;
            // sd of the product estimator is at most sqrt(2) c_aa c_bb / sqrt(count)
            let tol = 5.0 * (2.0 * cov[(a, a)] * cov[(b, b)] / count as f64).sqrt();
            assert!((emp - cov[(a, b)]).abs() < tol, "({a},{b}) comp {l}: {emp} vs {}", cov[(a, b)]);
        }
        // components are independent
        let cross = draws.iter().map(|s| s[a * 2] * s[b * 2 + 1]).sum::<f64>() / count as f64;
        assert!(cross.abs() < 5.0 * (2.0 * cov[(a, a)] * cov[(b, b)] / count as f64).sqrt());
    }
    assert!(draws.iter().all(|s| s[0] == 0.0 && s[1] == 0.0));
}

#[test]
fn samples_are_thread_independent() {
    let g = graph(GraphFamily::Path { n: 4 });
    let one = gff_sample(&g, 1, ROOT, 5_000, 3, 1).unwrap();
    let many = gff_sample(&g, 1, ROOT, 5_000, 3, 7).unwrap();
    assert_eq!(one, many);
    assert_ne!(one, gff_sample(&g, 1, ROOT, 5_000, 4, 1).unwrap());
}

#[test]
fn heisenberg_edge_converges() {
    // on K₂ with N = 3, β E‖σ_x - σ_y‖² = 2 - 2β(coth β - 1): target 2
    let g = graph(GraphFamily::Path { n: 2 });
    let cfg = ChainConfig::new(1).with_sweeps(60_000, 5_000).with_thin(5);
    let opts = WconOptions { field_samples: 20_000, fourth_moment: true, threads: 2 };
    let table = wcon_report(&g, 3, &[10.0, 200.0], 0, 1, cfg, opts).unwrap();
    for row in &table.rows {
        let exact = 2.0 - 2.0 * row.beta * (1.0 / row.beta.tanh() - 1.0);
        assert!((row.moment_estimate - exact).abs() < 4.0 * row.moment_stderr, "{row:?} vs {exact}");
        assert_eq!(row.moment_target, 2.0);
    }
    let last = table.rows.last().unwrap();
    assert!(last.moment_gap() < 0.1 * last.moment_target);
    assert!(last.ks_stat < 0.05, "{last:?}");
    let (e, s, gauss) = last.fourth_moment.unwrap();
    assert_eq!(gauss, 8.0);
    assert!((e - gauss).abs() < 4.0 * s + 0.05 * gauss, "{e} ± {s}");
    assert!(table.to_csv().starts_with("beta,moment_estimate,moment_stderr,moment_target,ks_stat,fourth_estimate"));
}

#[test]
fn planar_path_gap_shrinks() {
    let g = graph(GraphFamily::Path { n: 3 });
    let cfg = ChainConfig::new(2).with_sweeps(60_000, 5_000).with_thin(5);
    let opts = WconOptions { field_samples: 20_000, ..Default::default() };
    let table = wcon_report(&g, 2, &[10.0, 50.0, 200.0], 0, 2, cfg, opts).unwrap();
    assert!(table.gaps_shrink(4.0), "{table:?}");
    let last = table.rows.last().unwrap();
    assert!((last.moment_target - 2.0).abs() < 1e-12);
    assert!(last.moment_gap() < 0.1 * last.moment_target, "{last:?}");
    assert_eq!(table.ks_vertex, 2);
    assert_eq!(table.to_csv().lines().count(), 4);
}

#[test]
fn wcon_is_reproducible_across_threads() {
    let g = graph(GraphFamily::Path { n: 3 });
    let cfg = ChainConfig::new(5).with_sweeps(4_000, 400);
    let run = |threads| {
        wcon_report(&g, 2, &[5.0, 20.0], 0, 1, cfg, WconOptions { field_samples: 2_000, fourth_moment: false, threads })
            .unwrap()
    };
    assert_eq!(run(1).to_csv(), run(4).to_csv());
}

#[test]
fn wcon_rejects_bad_input() {
    let g = graph(GraphFamily::Path { n: 3 });
    let cfg = ChainConfig::new(0).with_sweeps(1_000, 100);
    let opts = WconOptions::default();
    assert!(matches!(wcon_report(&g, 1, &[1.0], 0, 1, cfg, opts), Err(Error::WrongN { .. })));
    assert!(matches!(wcon_report(&g, 2, &[2.0, 1.0], 0, 1, cfg, opts), Err(Error::InvalidParameter(_))));
    assert!(matches!(wcon_report(&g, 2, &[1.0], 1, 1, cfg, opts), Err(Error::SameVertex(1))));
    assert!(matches!(wcon_report(&g, 2, &[1.0], 0, 9, cfg, opts), Err(Error::VertexOutOfRange { .. })));
}
