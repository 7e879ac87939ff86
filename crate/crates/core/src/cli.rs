//! The `spinlab` command line.
//!
//! Vertices are 1-based on the command line and in every report. A
//! `key = value` file given with `--config` supplies defaults for any flag of
//! the chosen subcommand (keys are long flag names; `graph` fills the graph
//! argument); flags on the command line win. `--threads` falls back to the
//! `SPINLAB_THREADS` environment variable, then to 1.
//!
//! Exit codes: 0 success (and a dominated verdict for `gd-check`), 1 numerical
//! failure, 2 invalid input, 3 violated verdict, 4 inconclusive verdict.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact::{
    binary_tree_hessian_closed_form, binary_tree_threshold, minimal_star_size, parallel_paths_correlation_closed_form,
    star_hessian_terms, Enumerator, IsingMeasureConvention, ShiftField, StarQuadrature,
};
use crate::gd::{
    audit_gde, exact_gd_report, gde_lower_bound, high_temp_threshold, mc_gd_report, CorrelationSource, GDReport,
    Verdict,
};
use crate::gff::{wcon_report, WconOptions};
use crate::graph::{Graph, GraphFamily};
use crate::greens::{greens_function, greens_rw_oracle, max_renormalized_green, renormalized_green};
use crate::mc::{
    k_observable, measure, measure_replicas, write_samples, Chain, ChainConfig, KMatrixEstimate, RecordedSamples,
};

pub const SCHEMA_VERSION: u32 = 1;
pub const THREADS_ENV: &str = "SPINLAB_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_VIOLATED: i32 = 3;
pub const EXIT_INCONCLUSIVE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "spinlab", version, about = "Gaussian domination toolkit for spin O(N) models")]
pub struct Cli {
    /// key = value file with defaults for the subcommand's flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker cap; 1 guarantees byte-identical output for a fixed seed.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print a graph as an edge list, or summarize it.
    Graph(GraphArgs),
    /// Green's function of the walk absorbed at a sink.
    Greens(GreensArgs),
    /// Exact Ising enumeration (N = 1, at most 24 vertices).
    Exact(ExactArgs),
    /// Monte Carlo estimates for the O(N) model.
    Mc(McArgs),
    /// Second-order Gaussian domination test.
    GdCheck(GdCheckArgs),
    /// Reproduce the star, binary-tree and parallel-path counterexamples.
    Counterexample(CounterexampleArgs),
    /// Compare low-temperature chains with the Gaussian free field.
    GffCompare(GffArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Generator string (star:11, path:4, cycle:6, complete:5, tree:4,
    /// paths:3x3, torus:4x2d) or an edge-list file.
    pub graph: Option<String>,
    /// Emit a JSON summary instead of the edge list.
    #[arg(long)]
    pub summary: bool,
}

#[derive(Debug, Args)]
pub struct GreensArgs {
    pub graph: String,
    /// Source vertex i.
    pub i: usize,
    /// Sink vertex j.
    pub j: usize,
    /// Cross-check u_ij(i) with random walks.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Half,
    Unit,
}

impl From<ConventionArg> for IsingMeasureConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Half => IsingMeasureConvention::Half,
            ConventionArg::Unit => IsingMeasureConvention::Unit,
        }
    }
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    pub graph: Option<String>,
    #[arg(long)]
    pub beta: f64,
    #[arg(long, value_enum, default_value_t = ConventionArg::Half)]
    pub convention: ConventionArg,
    /// Include the K matrix.
    #[arg(long)]
    pub k_matrix: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ChainArgs {
    #[arg(long, default_value_t = 100_000)]
    pub sweeps: usize,
    #[arg(long, default_value_t = 10_000)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
    /// Gaussian kick width (default 1/sqrt(1+beta)).
    #[arg(long)]
    pub proposal_width: Option<f64>,
    /// Keep the kick width fixed during burn-in too.
    #[arg(long)]
    pub no_tune: bool,
    /// Pin vertex 1 to the north pole.
    #[arg(long)]
    pub pinned: bool,
    /// Required: stochastic commands never seed from the clock.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Independent chains pooled into one estimate.
    #[arg(long, default_value_t = 1)]
    pub replicas: usize,
}

impl ChainArgs {
    fn config(&self) -> Result<ChainConfig> {
        let seed = self.seed.ok_or_else(|| Error::Config("--seed is required for sampling".into()))?;
        let cfg = ChainConfig {
            sweeps: self.sweeps,
            burn_in: self.burn_in,
            thin: self.thin,
            proposal_width: self.proposal_width,
            tune_during_burn_in: !self.no_tune,
            root_pinned: self.pinned,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct McArgs {
    pub graph: Option<String>,
    /// Spin dimension.
    #[arg(long = "N", default_value_t = 1)]
    pub spin_dim: usize,
    #[arg(long)]
    pub beta: f64,
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Pair for the correlation and rescaled distance.
    #[arg(long, requires = "y")]
    pub x: Option<usize>,
    #[arg(long, requires = "x")]
    pub y: Option<usize>,
    /// Estimate the K matrix.
    #[arg(long)]
    pub k_matrix: bool,
    /// Persist the sample stream (single replica only).
    #[arg(long)]
    pub save_stream: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Exact,
    Mc,
}

#[derive(Debug, Args)]
pub struct GdCheckArgs {
    pub graph: Option<String>,
    #[arg(long = "N", default_value_t = 1)]
    pub spin_dim: usize,
    #[arg(long)]
    pub beta: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
    pub method: MethodArg,
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Also audit the two-point lower bound on every pair.
    #[arg(long)]
    pub audit: bool,
}

#[derive(Debug, Args)]
pub struct CounterexampleArgs {
    #[command(subcommand)]
    pub which: Counterexample,
}

#[derive(Debug, Subcommand)]
pub enum Counterexample {
    /// Smallest star violating the second-order condition.
    Star {
        #[arg(long)]
        beta: f64,
        #[arg(long = "N", default_value_t = 1)]
        spin_dim: usize,
        /// Gauss–Legendre nodes per angle (N = 2, 3).
        #[arg(long, default_value_t = 128)]
        nodes: usize,
    },
    /// Closed-form second derivative on the perfect binary tree.
    Tree {
        #[arg(long)]
        beta: f64,
        /// Depth (levels including root and leaves).
        #[arg(long)]
        k: usize,
    },
    /// Parallel paths: correlation versus the Green's-function bound.
    Paths {
        #[arg(long)]
        l: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        beta: f64,
        #[arg(long = "N", default_value_t = 1)]
        spin_dim: usize,
    },
}

#[derive(Debug, Args)]
pub struct GffArgs {
    pub graph: Option<String>,
    #[arg(long = "N")]
    pub spin_dim: usize,
    /// Increasing comma-separated schedule.
    #[arg(long, value_delimiter = ',', required = true)]
    pub betas: Vec<f64>,
    #[arg(long)]
    pub x: usize,
    #[arg(long)]
    pub y: usize,
    #[command(flatten)]
    pub chain: ChainArgs,
    #[arg(long, default_value_t = 100_000)]
    pub field_samples: usize,
    /// Also report the fourth moment (no acceptance target).
    #[arg(long)]
    pub fourth_moment: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

/// Parsed `key = value` file.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) =
            line.split_once('=').ok_or_else(|| Error::Config(format!("line {}: expected key = value", k + 1)))?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", k + 1)));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

/// Every long flag of `cmd` and its subcommands.
fn all_long_flags(cmd: &clap::Command, out: &mut Vec<String>) {
    out.extend(cmd.get_arguments().filter_map(|a| a.get_long().map(str::to_string)));
    for sub in cmd.get_subcommands() {
        all_long_flags(sub, out);
    }
}

/// Appends config-file values for flags the user did not pass.
fn merge_config(args: Vec<OsString>, config: &BTreeMap<String, String>) -> Result<Vec<OsString>> {
    let root = Cli::command();
    let mut known = vec!["graph".to_string()];
    all_long_flags(&root, &mut known);
    if let Some(bad) = config.keys().find(|k| !known.contains(k)) {
        return Err(Error::Config(format!("unknown key '{bad}'")));
    }
    // Walk to the innermost subcommand named on the command line.
    let mut cmd = &root;
    for a in args.iter().skip(1) {
        if let Some(sub) = a.to_str().and_then(|s| cmd.find_subcommand(s)) {
            cmd = sub;
        }
    }
    let given: Vec<String> = args.iter().filter_map(|a| a.to_str().map(str::to_string)).collect();
    let passed = |long: &str| {
        let flag = format!("--{long}");
        given.iter().any(|a| a == &flag || a.starts_with(&format!("{flag}=")))
    };
    let mut merged = args.clone();
    let global: Vec<&clap::Arg> = root.get_arguments().collect();
    for arg in cmd.get_arguments().chain(global) {
        let Some(long) = arg.get_long() else { continue };
        let Some(value) = config.get(long) else { continue };
        if passed(long) || long == "config" {
            continue;
        }
        if arg.get_action().takes_values() {
            merged.push(format!("--{long}={value}").into());
        } else {
            match value.as_str() {
                "true" | "yes" | "1" => merged.push(format!("--{long}").into()),
                "false" | "no" | "0" => {}
                other => return Err(Error::Config(format!("'{long}' expects true or false, got '{other}'"))),
            }
        }
    }
    Ok(merged)
}

fn threads_from_env() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&t| t > 0)
            .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got '{v}'"))),
        Err(_) => Ok(1),
    }
}

/// Runs the command line; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match parse(args) {
        Ok(Ok(cli)) => cli,
        Ok(Err(e)) => {
            let _ = if e.use_stderr() { write!(stderr, "{}", e.render()) } else { write!(stdout, "{}", e.render()) };
            return e.exit_code();
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_INVALID;
        }
    };
    match execute(&cli) {
        Ok((report, code)) => {
            let written = match &cli.output {
                Some(path) => std::fs::write(path, &report).map_err(Error::from),
                None => stdout.write_all(report.as_bytes()).map_err(Error::from),
            };
            match written {
                Ok(()) => code,
                Err(e) => {
                    let _ = writeln!(stderr, "error: {e}");
                    EXIT_FAILURE
                }
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code_for(&e)
        }
    }
}

fn parse(args: Vec<OsString>) -> Result<std::result::Result<Cli, clap::Error>> {
    let first = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        // A missing required flag may still come from the config file.
        Err(e) => match config_path_in(&args) {
            Some(path) => return reparse_with_config(args, &path),
            None => return Ok(Err(e)),
        },
    };
    match &first.config {
        Some(path) => reparse_with_config(args, path),
        None => Ok(Ok(first)),
    }
}

fn config_path_in(args: &[OsString]) -> Option<PathBuf> {
    let strs: Vec<&str> = args.iter().filter_map(|a| a.to_str()).collect();
    strs.iter().enumerate().find_map(|(k, a)| {
        if let Some(rest) = a.strip_prefix("--config=") {
            Some(PathBuf::from(rest))
        } else if *a == "--config" {
            strs.get(k + 1).map(PathBuf::from)
        } else {
            None
        }
    })
}

fn reparse_with_config(args: Vec<OsString>, path: &Path) -> Result<std::result::Result<Cli, clap::Error>> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let config = parse_config(&text)?;
    let merged = merge_config(args, &config)?;
    let mut cli = match Cli::try_parse_from(merged) {
        Ok(cli) => cli,
        Err(e) => return Ok(Err(e)),
    };
    if let Some(graph) = config.get("graph") {
        if let Some(slot) = cli.command.graph_slot() {
            slot.get_or_insert_with(|| graph.clone());
        }
    }
    Ok(Ok(cli))
}

impl Command {
    fn graph_slot(&mut self) -> Option<&mut Option<String>> {
        match self {
            Command::Graph(a) => Some(&mut a.graph),
            Command::Exact(a) => Some(&mut a.graph),
            Command::Mc(a) => Some(&mut a.graph),
            Command::GdCheck(a) => Some(&mut a.graph),
            Command::GffCompare(a) => Some(&mut a.graph),
            Command::Greens(_) | Command::Counterexample(_) => None,
        }
    }
}

pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::SolverFailure(_) | Error::ConvergenceFailure(_) | Error::Io(_) => EXIT_FAILURE,
        _ => EXIT_INVALID,
    }
}

pub fn exit_code_for_verdict(v: Verdict) -> i32 {
    match v {
        Verdict::Dominated => EXIT_OK,
        Verdict::Violated => EXIT_VIOLATED,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn load_graph(spec: &Option<String>) -> Result<(Graph, String)> {
    let spec = spec.as_deref().ok_or_else(|| Error::Config("a graph (generator string or file) is required".into()))?;
    Ok((Graph::from_spec(spec)?, spec.to_string()))
}

/// 1-based command-line vertex to 0-based index.
fn vertex(g: &Graph, v: usize) -> Result<usize> {
    if v == 0 || v > g.n() {
        return Err(Error::InvalidParameter(format!("vertex {v} is outside 1..={}", g.n())));
    }
    Ok(v - 1)
}

fn matrix_json(m: &DMatrix<f64>) -> Value {
    Value::from((0..m.nrows()).map(|r| m.row(r).iter().copied().collect::<Vec<f64>>()).collect::<Vec<_>>())
}

fn to_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn execute(cli: &Cli) -> Result<(String, i32)> {
    let threads = match cli.threads {
        Some(0) => return Err(Error::Config("--threads must be positive".into())),
        Some(t) => t,
        None => threads_from_env()?,
    };
    match &cli.command {
        Command::Graph(a) => cmd_graph(a),
        Command::Greens(a) => cmd_greens(a, threads),
        Command::Exact(a) => cmd_exact(a, threads),
        Command::Mc(a) => cmd_mc(a, threads),
        Command::GdCheck(a) => cmd_gd_check(a, threads),
        Command::Counterexample(a) => cmd_counterexample(a, threads),
        Command::GffCompare(a) => cmd_gff_compare(a, threads),
    }
}

fn cmd_graph(a: &GraphArgs) -> Result<(String, i32)> {
    let (g, spec) = load_graph(&a.graph)?;
    if !a.summary {
        return Ok((g.to_edge_list(), EXIT_OK));
    }
    let max_green = if g.n() >= 2 {
        let (value, i, j) = max_renormalized_green(&g)?;
        json!({ "value": value, "x": i + 1, "y": j + 1 })
    } else {
        Value::Null
    };
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "graph",
        "graph_spec": spec,
        "n": g.n(),
        "m": g.m(),
        "degrees": g.degrees(),
        "high_temp_threshold": high_temp_threshold(&g),
        "max_renormalized_green": max_green,
    });
    Ok((to_text(&report), EXIT_OK))
}

fn cmd_greens(a: &GreensArgs, threads: usize) -> Result<(String, i32)> {
    let (g, spec) = load_graph(&Some(a.graph.clone()))?;
    let (i, j) = (vertex(&g, a.i)?, vertex(&g, a.j)?);
    let table = greens_function(&g, i, j)?;
    let renormalized = table.at(i) / g.degree(i) as f64;
    let oracle = if a.oracle {
        let seed = a.seed.ok_or_else(|| Error::Config("--seed is required with --oracle".into()))?;
        let est = greens_rw_oracle(&g, i, j, i, a.trials, seed, threads)?;
        json!({ "mean": est.mean, "stderr": est.stderr, "trials": est.n_samples, "seed": seed })
    } else {
        Value::Null
    };
    if a.format == Format::Csv {
        let mut out = String::from("vertex,u\n");
        for (s, u) in table.values.iter().enumerate() {
            out.push_str(&format!("{},{u}\n", s + 1));
        }
        return Ok((out, EXIT_OK));
    }
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "greens",
        "graph_spec": spec,
        "source": a.i,
        "sink": a.j,
        "values": table.values,
        "u_at_source": table.at(i),
        "degree": g.degree(i),
        "renormalized": renormalized,
        "oracle": oracle,
    });
    Ok((to_text(&report), EXIT_OK))
}

fn cmd_exact(a: &ExactArgs, threads: usize) -> Result<(String, i32)> {
    let (g, spec) = load_graph(&a.graph)?;
    let conv: IsingMeasureConvention = a.convention.into();
    let moments = Enumerator::new(threads).moments(&g, a.beta)?;
    let mut report = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "exact",
        "graph_spec": spec,
        "beta": a.beta,
        "convention": conv,
        "log_partition": moments.log_partition(conv),
        "correlation": matrix_json(&moments.correlation),
    });
    if a.k_matrix {
        report["k_matrix"] = matrix_json(&moments.k);
    }
    Ok((to_text(&report), EXIT_OK))
}

fn cmd_mc(a: &McArgs, threads: usize) -> Result<(String, i32)> {
    let (g, spec) = load_graph(&a.graph)?;
    let cfg = a.chain.config()?;
    let pair = match (a.x, a.y) {
        (Some(x), Some(y)) => Some((vertex(&g, x)?, vertex(&g, y)?)),
        _ => None,
    };
    if pair.is_none() && !a.k_matrix {
        return Err(Error::Config("nothing to estimate: pass --x/--y and/or --k-matrix".into()));
    }
    let n = g.n();
    let offset = usize::from(pair.is_some());
    let dim = offset + if a.k_matrix { n * (n + 1) / 2 } else { 0 };
    let k_obs = k_observable(&g);
    let observe = |s: &crate::mc::SpinConfiguration, out: &mut [f64]| {
        if let Some((x, y)) = pair {
            out[0] = s.dot(x, y);
        }
        if a.k_matrix {
            k_obs(s, &mut out[offset..]);
        }
    };
    let est = match &a.save_stream {
        Some(path) => {
            if a.chain.replicas != 1 {
                return Err(Error::Config("--save-stream needs a single replica".into()));
            }
            let mut recorded = RecordedSamples::record(&mut Chain::with_stream(&g, a.spin_dim, a.beta, cfg, 0)?);
            let file = std::fs::File::create(path)?;
            write_samples(&mut recorded, std::io::BufWriter::new(file))?;
            recorded.rewind();
            measure(&mut recorded, dim, observe)?
        }
        None => measure_replicas(&g, a.spin_dim, a.beta, cfg, a.chain.replicas, threads, dim, observe)?,
    };
    let mut report = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "mc",
        "graph_spec": spec,
        "N": a.spin_dim,
        "beta": a.beta,
        "seed": cfg.seed,
        "chain": cfg,
        "replicas": a.chain.replicas,
        "n_samples": est.first().map_or(0, |e| e.n_samples),
    });
    if let Some((x, y)) = pair {
        let corr = if x == y { crate::stats::Estimate::exact(1.0, est[0].n_samples) } else { est[0] };
        report["pair"] = json!([x + 1, y + 1]);
        report["correlation"] = json!(corr);
        report["rescaled_distance"] = json!(corr.affine(-2.0 * a.beta, 2.0 * a.beta));
    }
    if a.k_matrix {
        let k = KMatrixEstimate::from_upper(n, a.beta, &est[offset..]);
        report["k_matrix"] = matrix_json(&k.values);
        report["k_stderr"] = matrix_json(&k.stderr);
    }
    Ok((to_text(&report), EXIT_OK))
}

fn cmd_gd_check(a: &GdCheckArgs, threads: usize) -> Result<(String, i32)> {
    let (g, spec) = load_graph(&a.graph)?;
    let (report, correlations): (GDReport, Option<CorrelationSource>) = match a.method {
        MethodArg::Exact => {
            if a.spin_dim != 1 {
                return Err(Error::WrongN { expected: "1 for --method exact".into(), got: a.spin_dim });
            }
            let report = exact_gd_report(&g, a.beta, threads)?.with_context(spec.clone(), None);
            let corr = if a.audit {
                Some(CorrelationSource::Exact(Enumerator::new(threads).moments(&g, a.beta)?.correlation))
            } else {
                None
            };
            (report, corr)
        }
        MethodArg::Mc => {
            let cfg = a.chain.config()?;
            let n = g.n();
            let pairs = n * (n - 1) / 2;
            let k_obs = k_observable(&g);
            let dim = n * (n + 1) / 2 + if a.audit { pairs } else { 0 };
            let est = measure_replicas(&g, a.spin_dim, a.beta, cfg, a.chain.replicas, threads, dim, |s, out| {
                k_obs(s, &mut out[..n * (n + 1) / 2]);
                if a.audit {
                    let mut k = n * (n + 1) / 2;
                    for x in 0..n {
                        for y in x + 1..n {
                            out[k] = s.dot(x, y);
                            k += 1;
                        }
                    }
                }
            })?;
            let kest = KMatrixEstimate::from_upper(n, a.beta, &est[..n * (n + 1) / 2]);
            let report = mc_gd_report(&g, a.spin_dim, a.beta, &kest)?.with_context(spec.clone(), Some(cfg.seed));
            let corr = a.audit.then(|| {
                let mut mean = DMatrix::identity(n, n);
                let mut stderr = DMatrix::zeros(n, n);
                let mut k = n * (n + 1) / 2;
                for x in 0..n {
                    for y in x + 1..n {
                        mean[(x, y)] = est[k].mean;
                        mean[(y, x)] = est[k].mean;
                        stderr[(x, y)] = est[k].stderr;
                        stderr[(y, x)] = est[k].stderr;
                        k += 1;
                    }
                }
                CorrelationSource::Estimated { mean, stderr }
            });
            (report, corr)
        }
    };
    let code = exit_code_for_verdict(report.verdict);
    let mut value = serde_json::to_value(&report).expect("report serializes");
    if let Some(corr) = correlations {
        let audit = audit_gde(&g, a.beta, a.spin_dim, Some(&report), &corr)?;
        let mut audit_value = serde_json::to_value(&audit).expect("audit serializes");
        // report vertices 1-based
        if let Some(rows) = audit_value["rows"].as_array_mut() {
            for row in rows {
                row["x"] = json!(row["x"].as_u64().unwrap_or(0) + 1);
                row["y"] = json!(row["y"].as_u64().unwrap_or(0) + 1);
            }
        }
        audit_value["passes"] = json!(audit.passes());
        value["audit"] = audit_value;
    }
    Ok((to_text(&value), code))
}

fn cmd_counterexample(a: &CounterexampleArgs, threads: usize) -> Result<(String, i32)> {
    let report = match &a.which {
        Counterexample::Star { beta, spin_dim, nodes } => {
            let quad = StarQuadrature { nodes: *nodes };
            let terms = star_hessian_terms(*beta, *spin_dim, quad)?;
            let n0 = minimal_star_size(*beta, *spin_dim, quad)?;
            let below = (n0 > 2).then(|| terms.value(n0 - 1));
            json!({
                "schema_version": SCHEMA_VERSION,
                "command": "counterexample",
                "which": "star",
                "beta": beta,
                "N": spin_dim,
                "minimal_leaves": n0,
                "hessian_at_minimal": terms.value(n0),
                "hessian_below_minimal": below,
                "terms": terms,
            })
        }
        Counterexample::Tree { beta, k } => {
            let t = binary_tree_hessian_closed_form(*beta, *k)?;
            // Enumeration cross-check while the tree has at most 24 vertices.
            let enumerated = if *k <= 4 {
                let g = Graph::generate(GraphFamily::PerfectBinaryTree { depth: *k })?;
                let leaves_from = (1usize << (k - 1)) - 1;
                let v: Vec<f64> = (0..g.n()).map(|s| if s >= leaves_from { 1.0 } else { 0.0 }).collect();
                let d2 = Enumerator::new(threads).directional_second_derivative(
                    &g,
                    *beta,
                    &ShiftField::scalar(v)?,
                    IsingMeasureConvention::Half,
                )?;
                json!(d2)
            } else {
                Value::Null
            };
            json!({
                "schema_version": SCHEMA_VERSION,
                "command": "counterexample",
                "which": "tree",
                "beta": beta,
                "k": k,
                "hessian": t.value,
                "positive": t.value > 0.0,
                "terms": t,
                "threshold_beta0": binary_tree_threshold(),
                "two_r_squared": 2.0 * t.r * t.r,
                "enumerated_second_derivative": enumerated,
            })
        }
        Counterexample::Paths { l, d, beta, spin_dim } => {
            let g = Graph::generate(GraphFamily::ParallelPaths { length: *l, count: *d })?;
            let (x, y) = (0, g.n() - 1);
            let corr = parallel_paths_correlation_closed_form(*beta, *l, *d)?;
            let green = renormalized_green(&g, x, y)?;
            let bound = gde_lower_bound(&g, *beta, *spin_dim, x, y)?;
            json!({
                "schema_version": SCHEMA_VERSION,
                "command": "counterexample",
                "which": "paths",
                "l": l,
                "d": d,
                "beta": beta,
                "N": spin_dim,
                "endpoints": [x + 1, y + 1],
                "correlation": corr,
                "renormalized_green": green,
                "renormalized_green_closed_form": (*l as f64 + 1.0) / *d as f64,
                "gde_bound": bound,
                "bound_violated": corr < bound,
            })
        }
    };
    Ok((to_text(&report), EXIT_OK))
}

fn cmd_gff_compare(a: &GffArgs, threads: usize) -> Result<(String, i32)> {
    let (g, spec) = load_graph(&a.graph)?;
    let cfg = a.chain.config()?;
    let (x, y) = (vertex(&g, a.x)?, vertex(&g, a.y)?);
    let opts = WconOptions { field_samples: a.field_samples, fourth_moment: a.fourth_moment, threads };
    let table = wcon_report(&g, a.spin_dim, &a.betas, x, y, cfg, opts)?;
    let text = match a.format {
        Format::Csv => table.to_csv(),
        Format::Json => {
            let mut v = serde_json::to_value(&table).expect("table serializes");
            v["schema_version"] = json!(SCHEMA_VERSION);
            v["command"] = json!("gff-compare");
            v["graph_spec"] = json!(spec);
            v["seed"] = json!(cfg.seed);
            v["x"] = json!(a.x);
            v["y"] = json!(a.y);
            v["ks_vertex"] = json!(table.ks_vertex + 1);
            to_text(&v)
        }
    };
    Ok((text, EXIT_OK))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("spinlab").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn config_parsing() {
        let map = parse_config("# comment\nbeta = 1.5\nburn_in=20 # trailing\n\n").unwrap();
        assert_eq!(map["beta"], "1.5");
        assert_eq!(map["burn-in"], "20");
        assert!(parse_config("nonsense").is_err());
    }

    #[test]
    fn greens_paths_example() {
        let (code, out, _) = run_capture(&["greens", "paths:3x3", "1", "11"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert!((v["u_at_source"].as_f64().unwrap() - 4.0).abs() < 1e-10);
        assert!((v["renormalized"].as_f64().unwrap() - 4.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn invalid_input_exits_2() {
        assert_eq!(run_capture(&["greens", "path:3", "2", "2"]).0, EXIT_INVALID);
        assert_eq!(run_capture(&["greens", "path:3", "1", "9"]).0, EXIT_INVALID);
        assert_eq!(run_capture(&["exact", "nosuchfile.txt", "--beta", "1"]).0, EXIT_INVALID);
        assert_eq!(run_capture(&["mc", "path:3", "--beta", "1", "--x", "1", "--y", "2"]).0, EXIT_INVALID);
        assert_eq!(run_capture(&["frobnicate"]).0, EXIT_INVALID);
    }

    #[test]
    fn gd_exit_codes() {
        assert_eq!(run_capture(&["gd-check", "star:11", "--N", "1", "--beta", "1", "--method", "exact"]).0, 3);
        assert_eq!(run_capture(&["gd-check", "tree:4", "--beta", "0.05"]).0, 0);
        assert_eq!(run_capture(&["gd-check", "cycle:6", "--beta", "0.01"]).0, 0);
        assert_eq!(run_capture(&["gd-check", "cycle:6", "--N", "2", "--beta", "0.01"]).0, EXIT_INVALID);
    }
}
