//! Second-order test for Gaussian domination and the two-point lower bound it
//! implies.
//!
//! For a direction `v` in one spin component, `Z_v''(0) = β Z*(0) v·(K - L)v`
//! with `K_xy = β E[(Lσ^1)_x (Lσ^1)_y]`. Constant shifts leave `Z*` unchanged,
//! so the test is whether `M = K - L` is negative semidefinite on the
//! complement of the constants.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{Enumerator, IsingMeasureConvention, ShiftField};
use crate::graph::Graph;
use crate::greens::renormalized_green_matrix;
use crate::mc::{estimate_k_matrix_replicas, ChainConfig, KMatrixEstimate};

/// Exact verdicts treat `λ_max` up to this value as nonpositive.
pub const EXACT_TOLERANCE: f64 = 1e-9;
/// Above this size the extremal eigenpair comes from power iteration.
pub const DENSE_EIGEN_LIMIT: usize = 500;
const POWER_ITERATION_CAP: usize = 100_000;
/// Normal quantile times the inflation covering second-order eigenvalue
/// perturbation.
const CI_Z: f64 = 2.0;
const CI_INFLATION: f64 = 2.0;
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// The quadratic form `v ↦ v·Mv`, `M = K - L`.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianForm {
    pub beta: f64,
    pub k: DMatrix<f64>,
    /// Per-entry standard error of `K` when it was estimated.
    pub k_stderr: Option<DMatrix<f64>>,
    pub laplacian: DMatrix<f64>,
    pub m: DMatrix<f64>,
}

impl HessianForm {
    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    pub fn quadratic(&self, v: &[f64]) -> f64 {
        let v = DVector::from_column_slice(v);
        v.dot(&(&self.m * &v))
    }

    /// `‖M·1‖ / max(‖M‖, 1)`: zero up to rounding for an exact `K`.
    pub fn constant_defect(&self) -> f64 {
        let ones = DVector::from_element(self.n(), 1.0);
        (&self.m * ones).norm() / self.m.norm().max(1.0)
    }
}

/// Builds `M = K - L`. `K` is symmetrized; `k_stderr` must match its shape.
pub fn hessian_from_k(k: &DMatrix<f64>, k_stderr: Option<&DMatrix<f64>>, g: &Graph, beta: f64) -> Result<HessianForm> {
    let n = g.n();
    if n < 2 {
        return Err(Error::InvalidParameter("the Hessian test needs at least two vertices".into()));
    }
    for mat in std::iter::once(k).chain(k_stderr) {
        if mat.nrows() != n || mat.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: mat.nrows().max(mat.ncols()) });
        }
    }
    if k.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("K has non-finite entries".into()));
    }
    let k = (k + k.transpose()) * 0.5;
    let laplacian = g.laplacian_matrix();
    let m = &k - &laplacian;
    Ok(HessianForm { beta, k, k_stderr: k_stderr.cloned(), laplacian, m })
}

/// Orthonormal basis of the complement of the constants (Helmert vectors),
/// one per column.
fn helmert_basis(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n - 1, |i, k| {
        let kk = (k + 1) as f64;
        let scale = 1.0 / (kk * (kk + 1.0)).sqrt();
        match i.cmp(&(k + 1)) {
            std::cmp::Ordering::Less => scale,
            std::cmp::Ordering::Equal => -kk * scale,
            std::cmp::Ordering::Greater => 0.0,
        }
    })
}

/// Removes the mean and rescales to unit length.
fn project_unit(v: &mut DVector<f64>) {
    let mean = v.mean();
    v.add_scalar_mut(-mean);
    let norm = v.norm();
    if norm > 0.0 {
        *v /= norm;
    }
}

/// Top eigenvalue of `M` on the complement of the constants, with a unit
/// eigenvector summing to zero. Dense for `n ≤ 500`, power iteration above.
pub fn extremal_eigenpair(m: &DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
    if m.nrows() > DENSE_EIGEN_LIMIT {
        power_iteration(m, POWER_ITERATION_CAP)
    } else {
        dense_eigenpair(m)
    }
}

pub fn dense_eigenpair(m: &DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
    check_square(m)?;
    let q = helmert_basis(m.nrows());
    let reduced = q.transpose() * m * &q;
    let reduced = (&reduced + reduced.transpose()) * 0.5;
    let eig = SymmetricEigen::new(reduced);
    let (top, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("n >= 2 leaves a nonempty complement");
    let mut v = &q * eig.eigenvectors.column(top);
    project_unit(&mut v);
    Ok((lambda, v))
}

/// Power iteration on `P(M + cI)P` with `P` the projection off the constants
/// and `c` a Gershgorin bound making the shifted spectrum nonnegative. Stops
/// when the Rayleigh quotient moves less than `1e-10` and the eigen-residual
/// is below `1e-7·max(1, c)`.
pub fn power_iteration(m: &DMatrix<f64>, max_iter: usize) -> Result<(f64, DVector<f64>)> {
    check_square(m)?;
    let n = m.nrows();
    let shift = (0..n).map(|i| m.row(i).iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    let mut v = DVector::from_fn(n, |i, _| (1.3 * i as f64 + 0.5).sin() + 0.1);
    project_unit(&mut v);
    if shift == 0.0 {
        return Ok((0.0, v));
    }
    let mut rq_prev = f64::INFINITY;
    for _ in 0..max_iter {
        let mv = m * &v;
        let rq = v.dot(&mv);
        let mut residual = &mv - &v * rq;
        residual.add_scalar_mut(-residual.mean());
        if (rq - rq_prev).abs() < 1e-10 && residual.norm() < 1e-7 * shift.max(1.0) {
            return Ok((rq, v));
        }
        rq_prev = rq;
        v = mv + &v * shift;
        project_unit(&mut v);
    }
    Err(Error::ConvergenceFailure(max_iter))
}

fn check_square(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
    }
    if m.nrows() < 2 {
        return Err(Error::InvalidParameter("need at least two vertices".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Dominated,
    Violated,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Dominated => "dominated",
            Verdict::Violated => "violated",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    MonteCarlo,
}

/// Outcome of the second-order test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GDReport {
    pub schema_version: u32,
    pub verdict: Verdict,
    pub lambda_max: f64,
    /// Half-width of the interval around `lambda_max`; 0 for exact `K`.
    pub lambda_ci: f64,
    pub method: Method,
    /// Unit vector, orthogonal to the constants, attaining `lambda_max`.
    pub worst_direction: Vec<f64>,
    pub beta: f64,
    pub spin_dim: usize,
    pub graph_spec: Option<String>,
    pub seed: Option<u64>,
}

impl GDReport {
    pub fn with_context(mut self, graph_spec: impl Into<String>, seed: Option<u64>) -> Self {
        self.graph_spec = Some(graph_spec.into());
        self.seed = seed;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Verdict from the top eigenvalue of `M`.
///
/// Without `k_stderr` (exact `K`): dominated iff `λ_max ≤ 1e-9`. With it,
/// `δλ ≈ v·δK v` is bounded entrywise by `Σ_xy |v_x v_y| s_xy` (valid for any
/// correlation between the entries), and the interval is
/// `λ_max ± 2·2·that`. Dominated if the interval lies below 0, violated if
/// above, inconclusive otherwise.
pub fn gd_verdict(form: &HessianForm, spin_dim: usize) -> Result<GDReport> {
    let (lambda_max, v) = extremal_eigenpair(&form.m)?;
    let (method, lambda_ci, verdict) = match &form.k_stderr {
        None => {
            let verdict = if lambda_max <= EXACT_TOLERANCE { Verdict::Dominated } else { Verdict::Violated };
            (Method::Exact, 0.0, verdict)
        }
        Some(s) => {
            let n = v.len();
            let mut sigma = 0.0;
            for x in 0..n {
                for y in 0..n {
                    sigma += (v[x] * v[y]).abs() * s[(x, y)];
                }
            }
            let ci = CI_Z * CI_INFLATION * sigma;
            let verdict = if lambda_max + ci < 0.0 {
                Verdict::Dominated
            } else if lambda_max - ci > 0.0 {
                Verdict::Violated
            } else {
                Verdict::Inconclusive
            };
            (Method::MonteCarlo, ci, verdict)
        }
    };
    Ok(GDReport {
        schema_version: REPORT_SCHEMA_VERSION,
        verdict,
        lambda_max,
        lambda_ci,
        method,
        worst_direction: v.iter().copied().collect(),
        beta: form.beta,
        spin_dim,
        graph_spec: None,
        seed: None,
    })
}

/// Exact Ising (`N = 1`) verdict by enumeration.
pub fn exact_gd_report(g: &Graph, beta: f64, threads: usize) -> Result<GDReport> {
    let moments = Enumerator::new(threads).moments(g, beta)?;
    gd_verdict(&hessian_from_k(&moments.k, None, g, beta)?, 1)
}

/// Verdict from a Monte Carlo estimate of `K`.
pub fn mc_gd_report(g: &Graph, spin_dim: usize, beta: f64, k: &KMatrixEstimate) -> Result<GDReport> {
    gd_verdict(&hessian_from_k(&k.values, Some(&k.stderr), g, beta)?, spin_dim)
}

/// Estimates `K` with `replicas` pooled chains and issues the verdict.
pub fn sampled_gd_report(
    g: &Graph,
    spin_dim: usize,
    beta: f64,
    cfg: ChainConfig,
    replicas: usize,
    threads: usize,
) -> Result<GDReport> {
    let k = estimate_k_matrix_replicas(g, spin_dim, beta, cfg, replicas, threads)?;
    let mut report = mc_gd_report(g, spin_dim, beta, &k)?;
    report.seed = Some(cfg.seed);
    Ok(report)
}

/// `1 - N u_xy(x) / (2β d(x))`: the lower bound on `E σ_x·σ_y` that holds
/// whenever Gaussian domination does.
pub fn gde_lower_bound(g: &Graph, beta: f64, spin_dim: usize, x: usize, y: usize) -> Result<f64> {
    g.check_vertex(x)?;
    g.check_vertex(y)?;
    if x == y {
        return Err(Error::SameVertex(x));
    }
    if beta.is_nan() || beta <= 0.0 {
        return Err(Error::NonpositiveBeta(beta));
    }
    let u = crate::greens::renormalized_green(g, x, y)?;
    Ok(bound_from_green(beta, spin_dim, u))
}

fn bound_from_green(beta: f64, spin_dim: usize, renormalized: f64) -> f64 {
    1.0 - spin_dim as f64 * renormalized / (2.0 * beta)
}

/// `β_s = 1/(8m)`; below it Gaussian domination is guaranteed.
pub fn high_temp_threshold(g: &Graph) -> f64 {
    1.0 / (8.0 * g.m() as f64)
}

/// Two-point functions to audit: exact, or estimated with standard errors.
#[derive(Debug, Clone)]
pub enum CorrelationSource {
    Exact(DMatrix<f64>),
    Estimated { mean: DMatrix<f64>, stderr: DMatrix<f64> },
}

impl CorrelationSource {
    fn tolerance(&self, x: usize, y: usize) -> f64 {
        match self {
            CorrelationSource::Exact(_) => EXACT_TOLERANCE,
            CorrelationSource::Estimated { stderr, .. } => 4.0 * stderr[(x, y)],
        }
    }

    fn value(&self, x: usize, y: usize) -> f64 {
        match self {
            CorrelationSource::Exact(c) => c[(x, y)],
            CorrelationSource::Estimated { mean, .. } => mean[(x, y)],
        }
    }

    fn n(&self) -> usize {
        match self {
            CorrelationSource::Exact(c) => c.nrows(),
            CorrelationSource::Estimated { mean, .. } => mean.nrows(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditStatus {
    Pass,
    Fail,
    /// No dominated verdict, so the bound carries no claim.
    NotAsserted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuditRow {
    pub x: usize,
    pub y: usize,
    pub correlation: f64,
    pub bound: f64,
    pub tolerance: f64,
    pub status: AuditStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GdeAudit {
    pub verdict: Verdict,
    pub beta: f64,
    pub spin_dim: usize,
    pub rows: Vec<AuditRow>,
}

impl GdeAudit {
    /// True when no asserted row failed.
    pub fn passes(&self) -> bool {
        self.rows.iter().all(|r| r.status != AuditStatus::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AuditRow> {
        self.rows.iter().filter(|r| r.status == AuditStatus::Fail)
    }
}

/// Compares every pair's correlation with [`gde_lower_bound`]. Rows are
/// asserted only under a dominated verdict for the same `(β, N)`.
pub fn audit_gde(
    g: &Graph,
    beta: f64,
    spin_dim: usize,
    report: Option<&GDReport>,
    correlations: &CorrelationSource,
) -> Result<GdeAudit> {
    let report = report.ok_or(Error::MissingVerdict)?;
    if report.beta != beta || report.spin_dim != spin_dim {
        return Err(Error::InvalidParameter(format!(
            "report is for beta = {}, N = {}, audit asked for beta = {beta}, N = {spin_dim}",
            report.beta, report.spin_dim
        )));
    }
    if beta.is_nan() || beta <= 0.0 {
        return Err(Error::NonpositiveBeta(beta));
    }
    if correlations.n() != g.n() {
        return Err(Error::DimensionMismatch { expected: g.n(), got: correlations.n() });
    }
    let green = renormalized_green_matrix(g)?;
    let assert = report.verdict == Verdict::Dominated;
    let mut rows = Vec::with_capacity(g.n() * (g.n() - 1) / 2);
    for x in 0..g.n() {
        for y in x + 1..g.n() {
            let correlation = correlations.value(x, y);
            let bound = bound_from_green(beta, spin_dim, green[(x, y)]);
            let tolerance = correlations.tolerance(x, y);
            let status = if !assert {
                AuditStatus::NotAsserted
            } else if correlation >= bound - tolerance {
                AuditStatus::Pass
            } else {
                AuditStatus::Fail
            };
            rows.push(AuditRow { x, y, correlation, bound, tolerance, status });
        }
    }
    Ok(GdeAudit { verdict: report.verdict, beta, spin_dim, rows })
}

/// Grid probe of `log Z*(h) - log Z*(0)` for Ising spins on a tiny graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftScan {
    /// Largest gain found; `≤ 0` means `h = 0` beat every grid point.
    pub max_gain: f64,
    /// Shift attaining it (mean zero).
    pub argmax: Vec<f64>,
    pub points: usize,
}

/// Evaluates `log Z*(h) - log Z*(0)` on a `steps^(n-1)` grid over the cube of
/// half-width `radius` in Helmert coordinates of the zero-mean shifts.
/// Limited to `n ≤ 4` vertices.
pub fn scan_shift_landscape(g: &Graph, beta: f64, radius: f64, steps: usize) -> Result<ShiftScan> {
    let n = g.n();
    if !(2..=4).contains(&n) {
        return Err(Error::TooLarge { n, max: 4 });
    }
    if steps < 2 || radius.is_nan() || radius <= 0.0 {
        return Err(Error::InvalidParameter("need steps >= 2 and a positive radius".into()));
    }
    let conv = IsingMeasureConvention::Unit;
    let enumerator = Enumerator::default();
    let base = enumerator.log_partition(g, beta, &ShiftField::zeros(n, 1), conv)?;
    let basis = helmert_basis(n);
    let dims = n - 1;
    let points = steps.pow(dims as u32);
    let mut best = ShiftScan { max_gain: f64::NEG_INFINITY, argmax: vec![0.0; n], points };
    for idx in 0..points {
        let mut coords = DVector::zeros(dims);
        let mut rest = idx;
        for c in coords.iter_mut() {
            *c = -radius + 2.0 * radius * (rest % steps) as f64 / (steps - 1) as f64;
            rest /= steps;
        }
        if coords.iter().all(|&c| c == 0.0) {
            continue;
        }
        let h = &basis * coords;
        let gain = enumerator.log_partition(g, beta, &ShiftField::scalar(h.iter().copied().collect())?, conv)? - base;
        if gain > best.max_gain {
            best.max_gain = gain;
            best.argmax = h.iter().copied().collect();
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphFamily;

    fn graph(f: GraphFamily) -> Graph {
        Graph::generate(f).unwrap()
    }

    #[test]
    fn helmert_is_orthonormal_and_mean_free() {
        let q = helmert_basis(6);
        let gram = q.transpose() * &q;
        assert!((gram - DMatrix::identity(5, 5)).norm() < 1e-14);
        for col in q.column_iter() {
            assert!(col.sum().abs() < 1e-14);
        }
    }

    #[test]
    fn cycle_laplacian_spectrum() {
        let g = graph(GraphFamily::Cycle { n: 4 });
        let (lambda, v) = extremal_eigenpair(&(-g.laplacian_matrix())).unwrap();
        assert!((lambda + 2.0).abs() < 1e-12);
        assert!((v.norm() - 1.0).abs() < 1e-12 && v.sum().abs() < 1e-12);
        let (lp, _) = power_iteration(&(-g.laplacian_matrix()), 100_000).unwrap();
        assert!((lp + 2.0).abs() < 1e-8);
    }

    #[test]
    fn zero_form() {
        let (lambda, v) = extremal_eigenpair(&DMatrix::zeros(3, 3)).unwrap();
        assert!(lambda.abs() < 1e-15);
        assert!((v.norm() - 1.0).abs() < 1e-12);
        let (lp, _) = power_iteration(&DMatrix::zeros(3, 3), 10).unwrap();
        assert_eq!(lp, 0.0);
    }

    #[test]
    fn infinite_temperature_form_is_minus_laplacian() {
        let g = graph(GraphFamily::Path { n: 4 });
        let form = hessian_from_k(&DMatrix::zeros(4, 4), None, &g, 0.0).unwrap();
        assert_eq!(form.m, -g.laplacian_matrix());
        assert_eq!(gd_verdict(&form, 1).unwrap().verdict, Verdict::Dominated);
    }

    #[test]
    fn shape_errors() {
        let g = graph(GraphFamily::Path { n: 3 });
        assert!(matches!(hessian_from_k(&DMatrix::zeros(2, 2), None, &g, 1.0), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn edge_is_dominated_and_matches_second_derivative() {
        let g = graph(GraphFamily::Path { n: 2 });
        let report = exact_gd_report(&g, 1.0, 1).unwrap();
        assert_eq!(report.verdict, Verdict::Dominated);
        let k = crate::exact::exact_k_matrix(&g, 1.0).unwrap();
        let form = hessian_from_k(&k, None, &g, 1.0).unwrap();
        let v = [0.5, -0.5];
        let conv = IsingMeasureConvention::Half;
        let d2 = crate::exact::directional_second_derivative(&g, 1.0, &ShiftField::scalar(v.to_vec()).unwrap(), conv)
            .unwrap();
        let z = crate::exact::exact_partition(&g, 1.0, &ShiftField::zeros(2, 1), conv).unwrap();
        assert!((d2 / (1.0 * z) - form.quadratic(&v)).abs() < 1e-12);
        assert!(form.quadratic(&v) < 0.0);
    }

    #[test]
    fn star_counterexample() {
        let g = graph(GraphFamily::Star { leaves: 11 });
        let report = exact_gd_report(&g, 1.0, 2).unwrap();
        assert_eq!(report.verdict, Verdict::Violated);
        assert!(report.lambda_max > 0.5);
        let ten = exact_gd_report(&graph(GraphFamily::Star { leaves: 10 }), 1.0, 2).unwrap();
        assert_eq!(ten.verdict, Verdict::Dominated);
    }

    #[test]
    fn bound_examples() {
        let k2 = graph(GraphFamily::Path { n: 2 });
        assert!((gde_lower_bound(&k2, 1.0, 1, 0, 1).unwrap() - 0.5).abs() < 1e-12);
        let pp = graph(GraphFamily::ParallelPaths { length: 3, count: 3 });
        let b = gde_lower_bound(&pp, 10.0, 1, 0, 10).unwrap();
        assert!((b - (1.0 - (4.0 / 3.0) / 20.0)).abs() < 1e-12);
        assert_eq!(gde_lower_bound(&k2, 1.0, 1, 1, 1), Err(Error::SameVertex(1)));
        assert_eq!(gde_lower_bound(&k2, 0.0, 1, 0, 1), Err(Error::NonpositiveBeta(0.0)));
    }

    #[test]
    fn thresholds() {
        assert_eq!(high_temp_threshold(&graph(GraphFamily::Path { n: 2 })), 0.125);
        assert_eq!(high_temp_threshold(&graph(GraphFamily::Cycle { n: 6 })), 1.0 / 48.0);
        assert_eq!(high_temp_threshold(&graph(GraphFamily::ParallelPaths { length: 3, count: 3 })), 1.0 / 96.0);
    }

    #[test]
    fn audit_needs_a_verdict() {
        let g = graph(GraphFamily::Path { n: 2 });
        let corr = CorrelationSource::Exact(DMatrix::identity(2, 2));
        assert_eq!(audit_gde(&g, 1.0, 1, None, &corr), Err(Error::MissingVerdict));
        let report = exact_gd_report(&g, 1.0, 1).unwrap();
        let moments = Enumerator::default().moments(&g, 1.0).unwrap();
        let audit = audit_gde(&g, 1.0, 1, Some(&report), &CorrelationSource::Exact(moments.correlation)).unwrap();
        assert!(audit.passes());
        assert_eq!(audit.rows.len(), 1);
        assert!((audit.rows[0].correlation - 1f64.tanh()).abs() < 1e-12);
    }

    #[test]
    fn violated_reports_are_not_asserted() {
        let g = graph(GraphFamily::Star { leaves: 11 });
        let report = exact_gd_report(&g, 1.0, 2).unwrap();
        let audit = audit_gde(&g, 1.0, 1, Some(&report), &CorrelationSource::Exact(DMatrix::zeros(12, 12))).unwrap();
        assert!(audit.rows.iter().all(|r| r.status == AuditStatus::NotAsserted));
    }

    #[test]
    fn noisy_k_widens_the_interval() {
        let g = graph(GraphFamily::Cycle { n: 5 });
        let k = crate::exact::exact_k_matrix(&g, 0.5).unwrap();
        let tight = hessian_from_k(&k, Some(&DMatrix::from_element(5, 5, 1e-4)), &g, 0.5).unwrap();
        let r = gd_verdict(&tight, 1).unwrap();
        assert_eq!((r.verdict, r.method), (Verdict::Dominated, Method::MonteCarlo));
        let loose = hessian_from_k(&k, Some(&DMatrix::from_element(5, 5, 10.0)), &g, 0.5).unwrap();
        assert_eq!(gd_verdict(&loose, 1).unwrap().verdict, Verdict::Inconclusive);
    }

    #[test]
    fn report_json_has_expected_keys() {
        let g = graph(GraphFamily::Path { n: 3 });
        let json = exact_gd_report(&g, 0.3, 1).unwrap().with_context("path:3", None).to_json();
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        for key in ["verdict", "lambda_max", "lambda_ci", "method", "worst_direction", "beta", "graph_spec", "seed"] {
            assert!(value.get(key).is_some(), "missing {key}");
        }
        assert_eq!(value["verdict"], "dominated");
        assert_eq!(value["method"], "exact");
    }

    #[test]
    fn shift_scan_on_an_edge() {
        let g = graph(GraphFamily::Path { n: 2 });
        let scan = scan_shift_landscape(&g, 1.0, 2.0, 41).unwrap();
        assert!(scan.max_gain <= 1e-12, "{scan:?}");
        assert!(scan_shift_landscape(&graph(GraphFamily::Path { n: 5 }), 1.0, 1.0, 3).is_err());
    }
}
