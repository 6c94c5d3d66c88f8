//! Experiment harness for the factorlab library.
//!
//! Every command is deterministic given `--seed` and emits plot-ready CSV
//! on stdout by default (`--format json` switches to a single JSON
//! document). Run summaries that would corrupt a CSV stream go to stderr
//! as one JSON line. Exit codes: 0 success, 2 validation error,
//! 3 numerical failure, 4 factor not found.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use factorlab::aqc;
use factorlab::error::Error as LibError;
use factorlab::marking::{self, SuccessMode};
use factorlab::numtheory::{factor_by_trial_division, FactorPair};
use factorlab::orbitgraph::{self, BuildOptions, OrbitGraph};
use factorlab::spectral;
use factorlab::walk::{self, GroundedLaplacian};

/// Default master seed; fixed so bare invocations are reproducible.
const DEFAULT_SEED: u64 = 1729;

/// Environment variable naming the directory relative `--output` paths are
/// resolved against.
const OUTPUT_DIR_ENV: &str = "FACTORLAB_OUTPUT_DIR";

#[derive(Parser)]
#[command(
    name = "factorlab",
    version,
    about = "Semiprime factoring experiments on multiplicative orbit graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an orbit graph and emit its colored components as JSON.
    Graph(GraphCmd),
    /// Compare the closed-form cycle count against graph traversal.
    Cycles(CyclesCmd),
    /// Sweep success probabilities P(k) over k for each alpha.
    MarkProb(MarkProbCmd),
    /// Run the classical wormhole walk and emit its trace.
    Walk(WalkCmd),
    /// Integrate the adiabatic evolution and emit the amplitude trace.
    Aqc(AqcCmd),
    /// Sweep evolution time T and report quantum/classical agreement.
    Compare(CompareCmd),
    /// Factor N end to end: sample marks, walk, extract a gcd, retry.
    Factor(FactorCmd),
    /// Eigenvalues, spectral gap and kernel dimension of the (grounded) Laplacian.
    Spectrum(SpectrumCmd),
}

#[derive(Args, Clone)]
struct GraphArgs {
    /// Semiprime modulus N; vertices are 1..N-1.
    #[arg(long)]
    n: u64,
    /// Comma-separated multipliers, e.g. --alphas 2,7.
    #[arg(long, value_delimiter = ',', required = true)]
    alphas: Vec<u64>,
    /// Permit alpha = 1 and alpha = N-1 (self-loops and 2-cycles only).
    #[arg(long)]
    allow_trivial_alpha: bool,
}

impl GraphArgs {
    fn build(&self) -> Result<OrbitGraph, LibError> {
        orbitgraph::build_with(
            self.n,
            &self.alphas,
            BuildOptions {
                validate_semiprime: true,
                allow_trivial_alpha: self.allow_trivial_alpha,
            },
        )
    }

    fn factors(&self) -> Result<FactorPair, LibError> {
        factor_by_trial_division(self.n)
    }
}

#[derive(Args, Clone)]
struct MarkArgs {
    /// Explicit comma-separated mark list (mutually exclusive with --k).
    #[arg(long, value_delimiter = ',', conflicts_with = "k")]
    marks: Option<Vec<u64>>,
    /// Number of marks to sample uniformly with --seed.
    #[arg(long)]
    k: Option<u64>,
}

impl MarkArgs {
    fn resolve(&self, n: u64, seed: u64) -> Result<marking::MarkSet, CliError> {
        match (&self.marks, self.k) {
            (Some(list), None) => Ok(marking::MarkSet::new(list.clone(), n - 1)?),
            (None, Some(k)) => {
                let mut rng = marking::substream_rng(seed, 0);
                Ok(marking::sample_marks(n - 1, k, &mut rng)?)
            }
            _ => Err(CliError::Usage(
                "exactly one of --marks and --k is required".into(),
            )),
        }
    }
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Output format; each command documents its default.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Output file; stdout when omitted. Relative paths resolve against
    /// $FACTORLAB_OUTPUT_DIR when that is set.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, PartialEq)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, PartialEq)]
enum ModeArg {
    Strict,
    Weak,
}

impl From<ModeArg> for SuccessMode {
    fn from(m: ModeArg) -> SuccessMode {
        match m {
            ModeArg::Strict => SuccessMode::Strict,
            ModeArg::Weak => SuccessMode::Weak,
        }
    }
}

#[derive(Args)]
struct GraphCmd {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct CyclesCmd {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct MarkProbCmd {
    #[command(flatten)]
    graph: GraphArgs,
    /// Single k; overrides the sweep range.
    #[arg(long)]
    k: Option<u64>,
    /// Smallest k of the sweep (default 1).
    #[arg(long)]
    k_min: Option<u64>,
    /// Largest k of the sweep (default N-2).
    #[arg(long)]
    k_max: Option<u64>,
    /// Monte Carlo trials per (alpha, k) cell.
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value = "strict")]
    mode: ModeArg,
    /// Exact subset enumeration instead of Monte Carlo (within budget).
    #[arg(long)]
    exact: bool,
    /// Treat the alpha list as one union graph instead of per-alpha rows.
    #[arg(long)]
    union: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct WalkCmd {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    marks: MarkArgs,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Step size; defaults to 1/(2*max_degree + 1).
    #[arg(long)]
    dt: Option<f64>,
    /// Convergence threshold on the l-infinity change per step.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    max_iters: u64,
    /// Emit a snapshot every this many steps.
    #[arg(long, default_value_t = 1)]
    cadence: u64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct AqcCmd {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    marks: MarkArgs,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Total evolution time T.
    #[arg(long, allow_hyphen_values = true)]
    time: f64,
    /// RK4 steps; defaults to max(1000, ceil(20*T*(2*max_degree+1))).
    #[arg(long)]
    steps: Option<u64>,
    /// Emit a snapshot every this many steps (default steps/100).
    #[arg(long)]
    cadence: Option<u64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct CompareCmd {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    marks: MarkArgs,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Comma-separated evolution times to sweep.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 2.0, 5.0, 10.0, 20.0])]
    times: Vec<f64>,
    /// RK4 steps per run; defaults to the per-T formula.
    #[arg(long)]
    steps: Option<u64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct FactorCmd {
    /// Semiprime to factor.
    #[arg(long)]
    n: u64,
    /// Multipliers for the orbit graph (default 2 if usable).
    #[arg(long, value_delimiter = ',')]
    alphas: Option<Vec<u64>>,
    /// Marks per attempt; defaults to max(1, (N-1)/4).
    #[arg(long)]
    k: Option<u64>,
    #[arg(long, default_value_t = 20)]
    attempts: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Mass threshold for factor extraction; defaults to 1/(2*(N-1)).
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    max_iters: u64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct SpectrumCmd {
    #[command(flatten)]
    graph: GraphArgs,
    /// Marks for the grounded Laplacian; omit for the full Laplacian.
    #[arg(long, value_delimiter = ',', conflicts_with = "k")]
    marks: Option<Vec<u64>>,
    /// Sample this many marks uniformly instead of listing them.
    #[arg(long)]
    k: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// How many smallest eigenvalues to report (default: all).
    #[arg(long)]
    count: Option<usize>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug)]
enum CliError {
    Lib(LibError),
    Usage(String),
    FactorNotFound { n: u64, attempts: u64 },
}

impl From<LibError> for CliError {
    fn from(e: LibError) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn code(&self) -> &'static str {
        match self {
            CliError::Lib(e) => e.code(),
            CliError::Usage(_) => "usage",
            CliError::FactorNotFound { .. } => "factor-not-found",
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(e) if e.is_validation() => 2,
            CliError::Lib(_) => 3,
            CliError::Usage(_) => 2,
            CliError::FactorNotFound { .. } => 4,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Lib(e) => e.to_string(),
            CliError::Usage(m) => m.clone(),
            CliError::FactorNotFound { n, attempts } => {
                format!("no factor of {n} found within {attempts} attempts")
            }
        }
    }
}

/// Where a command's primary document goes.
struct Sink {
    path: Option<PathBuf>,
}

impl Sink {
    fn new(out: &OutputArgs) -> Result<Sink, CliError> {
        let path = match &out.output {
            None => None,
            Some(p) => {
                let resolved = if p.is_relative() {
                    match std::env::var_os(OUTPUT_DIR_ENV) {
                        Some(dir) => PathBuf::from(dir).join(p),
                        None => p.clone(),
                    }
                } else {
                    p.clone()
                };
                if let Some(parent) = resolved.parent() {
                    if !parent.as_os_str().is_empty() {
                        fs::create_dir_all(parent).map_err(|e| {
                            CliError::Usage(format!("cannot create {}: {e}", parent.display()))
                        })?;
                    }
                }
                Some(resolved)
            }
        };
        Ok(Sink { path })
    }

    fn write(&self, content: &str) -> Result<(), CliError> {
        match &self.path {
            None => {
                let stdout = std::io::stdout();
                let mut lock = stdout.lock();
                lock.write_all(content.as_bytes())
                    .and_then(|_| lock.flush())
                    .map_err(|e| CliError::Usage(format!("write failed: {e}")))
            }
            Some(p) => fs::write(p, content)
                .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", p.display()))),
        }
    }
}

fn format_or(out: &OutputArgs, default: FormatArg) -> FormatArg {
    out.format.unwrap_or(default)
}

/// Rows plus header rendered as CSV text.
fn to_csv(header: &str, rows: &[Vec<String>]) -> String {
    let mut s = String::with_capacity(rows.len() * 24 + header.len() + 1);
    s.push_str(header);
    s.push('\n');
    for row in rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Graph(c) => cmd_graph(c),
        Command::Cycles(c) => cmd_cycles(c),
        Command::MarkProb(c) => cmd_mark_prob(c),
        Command::Walk(c) => cmd_walk(c),
        Command::Aqc(c) => cmd_aqc(c),
        Command::Compare(c) => cmd_compare(c),
        Command::Factor(c) => cmd_factor(c),
        Command::Spectrum(c) => cmd_spectrum(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!(
                "{}",
                json!({ "error": e.code(), "message": e.message() })
            );
            ExitCode::from(e.exit_code())
        }
    }
}

fn cmd_graph(c: GraphCmd) -> Result<(), CliError> {
    let g = c.graph.build()?;
    let factors = c.graph.factors()?;
    let d = orbitgraph::decompose(&g, &factors);
    let sink = Sink::new(&c.out)?;
    sink.write(&(d.to_json() + "\n"))
}

fn cmd_cycles(c: CyclesCmd) -> Result<(), CliError> {
    let g = c.graph.build()?;
    let factors = c.graph.factors()?;
    let d = orbitgraph::decompose(&g, &factors);
    let traversal = d.counts();
    // the closed form is stated per alpha; unions get the traversal only
    let formula = if g.alphas().len() == 1 {
        Some(orbitgraph::cycle_count_formula(&factors, g.alphas()[0])?)
    } else {
        None
    };

    let sink = Sink::new(&c.out)?;
    let matches = formula.map_or(true, |f| f == traversal);
    match format_or(&c.out, FormatArg::Csv) {
        FormatArg::Csv => {
            let mut rows = Vec::new();
            if let Some(f) = formula {
                rows.push(vec![
                    "formula".to_string(),
                    f.red_count.to_string(),
                    f.blue_count.to_string(),
                    f.black_count.to_string(),
                    f.total.to_string(),
                ]);
            }
            rows.push(vec![
                "traversal".to_string(),
                traversal.red_count.to_string(),
                traversal.blue_count.to_string(),
                traversal.black_count.to_string(),
                traversal.total.to_string(),
            ]);
            sink.write(&to_csv("source,red,blue,black,total", &rows))?;
        }
        FormatArg::Json => {
            let doc = json!({
                "n": g.n(),
                "alphas": g.alphas(),
                "formula": formula,
                "traversal": traversal,
                "match": matches,
            });
            sink.write(&format!("{doc:#}\n"))?;
        }
    }
    if !matches {
        return Err(CliError::Lib(LibError::EigensolverFailure {
            detail: "cycle-count formula disagrees with traversal".into(),
        }));
    }
    Ok(())
}

fn cmd_mark_prob(c: MarkProbCmd) -> Result<(), CliError> {
    let factors = factor_by_trial_division(c.graph.n)?;
    let n_vertices = c.graph.n - 1;
    let ks: Vec<u64> = match (c.k, c.k_min, c.k_max) {
        (Some(k), None, None) => vec![k],
        (Some(_), _, _) => {
            return Err(CliError::Usage("--k conflicts with --k-min/--k-max".into()))
        }
        (None, lo, hi) => {
            let lo = lo.unwrap_or(1);
            let hi = hi.unwrap_or(n_vertices - 1);
            if lo == 0 || hi < lo || hi > n_vertices - 1 {
                return Err(CliError::Usage(format!(
                    "k range {lo}..={hi} invalid for {n_vertices} vertices"
                )));
            }
            (lo..=hi).collect()
        }
    };

    // (label, graph) pairs: one union graph, or one graph per alpha
    let mut cases: Vec<(String, OrbitGraph)> = Vec::new();
    if c.union {
        let label = c
            .graph
            .alphas
            .iter()
            .map(|a| a.to_string())
            .collect::<Vec<_>>()
            .join("+");
        cases.push((label, c.graph.build()?));
    } else {
        for &alpha in &c.graph.alphas {
            let single = GraphArgs {
                n: c.graph.n,
                alphas: vec![alpha],
                allow_trivial_alpha: c.graph.allow_trivial_alpha,
            };
            cases.push((alpha.to_string(), single.build()?));
        }
    }

    let mode: SuccessMode = c.mode.into();
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut json_rows = Vec::new();
    for (label, g) in &cases {
        for &k in &ks {
            let est = if c.exact {
                let (successes, total) = marking::exact_success_count_with_budget(
                    g,
                    &factors,
                    k,
                    mode,
                    marking::DEFAULT_ENUM_BUDGET,
                )?;
                marking::SuccessEstimate {
                    k,
                    trials: total as u64,
                    successes,
                    p_hat: successes as f64 / total as f64,
                    std_err: 0.0,
                }
            } else {
                marking::estimate_success_prob(g, &factors, k, c.trials, mode, c.seed)?
            };
            rows.push(vec![
                label.clone(),
                est.k.to_string(),
                est.trials.to_string(),
                est.successes.to_string(),
                est.p_hat.to_string(),
                est.std_err.to_string(),
            ]);
            json_rows.push(json!({
                "alpha": label,
                "k": est.k,
                "trials": est.trials,
                "successes": est.successes,
                "p_hat": est.p_hat,
                "std_err": est.std_err,
            }));
        }
    }

    let sink = Sink::new(&c.out)?;
    match format_or(&c.out, FormatArg::Csv) {
        FormatArg::Csv => sink.write(&to_csv("alpha,k,trials,successes,p_hat,std_err", &rows)),
        FormatArg::Json => {
            let doc = json!({
                "n": c.graph.n,
                "mode": if mode == SuccessMode::Strict { "strict" } else { "weak" },
                "exact": c.exact,
                "seed": c.seed,
                "rows": json_rows,
            });
            sink.write(&format!("{doc:#}\n"))
        }
    }
}

/// Trace rows over all vertices `1..N-1`, marked ones carried as zero so
/// plots line up.
fn full_vertex_rows<F: Fn(usize) -> f64>(
    n: u64,
    vertices: &[u64],
    value_of_row: F,
) -> Vec<(u64, f64)> {
    let mut out = Vec::with_capacity((n - 1) as usize);
    let mut next = 0usize;
    for v in 1..n {
        if next < vertices.len() && vertices[next] == v {
            out.push((v, value_of_row(next)));
            next += 1;
        } else {
            out.push((v, 0.0));
        }
    }
    out
}

fn cmd_walk(c: WalkCmd) -> Result<(), CliError> {
    let g = c.graph.build()?;
    let marks = c.marks.resolve(g.n(), c.seed)?;
    let dt = c.dt.unwrap_or_else(|| walk::default_dt(&g));
    let trace = walk::run(&g, marks.vertices(), dt, c.max_iters, c.tol, c.cadence)?;

    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut json_snaps = Vec::new();
    for (t, dist) in &trace.snapshots {
        let full = full_vertex_rows(g.n(), &trace.vertices, |r| dist[r]);
        for (v, p) in &full {
            rows.push(vec![t.to_string(), v.to_string(), p.to_string()]);
        }
        json_snaps.push(json!({
            "t": t,
            "probabilities": full.iter().map(|(v, p)| json!({"vertex": v, "probability": p})).collect::<Vec<_>>(),
        }));
    }
    let summary = json!({
        "n": g.n(),
        "alphas": g.alphas(),
        "marks": marks.vertices(),
        "dt": dt,
        "tol": c.tol,
        "converged": trace.converged,
        "iterations": trace.iterations,
    });

    let sink = Sink::new(&c.out)?;
    match format_or(&c.out, FormatArg::Csv) {
        FormatArg::Csv => {
            sink.write(&to_csv("t,vertex,probability", &rows))?;
            eprintln!("{summary}");
        }
        FormatArg::Json => {
            sink.write(&format!("{:#}\n", json!({"summary": summary, "snapshots": json_snaps})))?;
        }
    }
    Ok(())
}

fn cmd_aqc(c: AqcCmd) -> Result<(), CliError> {
    let g = c.graph.build()?;
    let marks = c.marks.resolve(g.n(), c.seed)?;
    let sys = aqc::build_system(&g, marks.vertices(), c.time)?;
    let steps = c.steps.unwrap_or_else(|| aqc::default_steps(c.time, g.max_degree()));
    let cadence = c.cadence.unwrap_or_else(|| (steps / 100).max(1));
    let trace = aqc::evolve(&sys, &sys.initial_state(), steps, cadence)?;
    let final_amps = aqc::amplitudes(&sys, &trace.final_state)?;

    // classical reference for the summary
    let wt = walk::run(&g, marks.vertices(), walk::default_dt(&g), 1_000_000, 1e-10, 1_000_000)?;
    let cosine = aqc::cosine_similarity(
        &final_amps.amps,
        wt.final_state.distribution.as_slice().expect("contiguous"),
    )?;

    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut json_snaps = Vec::new();
    for snap in &trace.snapshots {
        let abs: Vec<f64> = snap.amplitudes.iter().map(|a| a.norm()).collect();
        let full_abs = full_vertex_rows(g.n(), sys.vertices(), |r| abs[r]);
        for (v, a) in &full_abs {
            rows.push(vec![
                snap.s.to_string(),
                v.to_string(),
                a.to_string(),
                (a * a).to_string(),
            ]);
        }
        json_snaps.push(json!({
            "s": snap.s,
            "amplitudes": full_abs
                .iter()
                .map(|(v, a)| json!({"vertex": v, "abs_amplitude": a, "probability": a * a}))
                .collect::<Vec<_>>(),
        }));
    }
    let summary = json!({
        "T": c.time,
        "steps": steps,
        "final_cosine_vs_classical": cosine,
        "norm_drift_max": trace.max_norm_drift,
    });

    let sink = Sink::new(&c.out)?;
    match format_or(&c.out, FormatArg::Csv) {
        FormatArg::Csv => {
            sink.write(&to_csv("s,vertex,abs_amplitude,probability", &rows))?;
            eprintln!("{summary}");
        }
        FormatArg::Json => {
            sink.write(&format!("{:#}\n", json!({"summary": summary, "snapshots": json_snaps})))?;
        }
    }
    Ok(())
}

fn cmd_compare(c: CompareCmd) -> Result<(), CliError> {
    let g = c.graph.build()?;
    let marks = c.marks.resolve(g.n(), c.seed)?;
    let wt = walk::run(&g, marks.vertices(), walk::default_dt(&g), 1_000_000, 1e-10, 1_000_000)?;
    let classical = wt.final_state.distribution.as_slice().expect("contiguous");

    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut json_rows = Vec::new();
    for &t in &c.times {
        let sys = aqc::build_system(&g, marks.vertices(), t)?;
        let steps = c.steps.unwrap_or_else(|| aqc::default_steps(t, g.max_degree()));
        let trace = aqc::evolve(&sys, &sys.initial_state(), steps, steps)?;
        let amps = aqc::amplitudes(&sys, &trace.final_state)?;
        let cosine = aqc::cosine_similarity(&amps.amps, classical)?;
        rows.push(vec![t.to_string(), steps.to_string(), cosine.to_string()]);
        json_rows.push(json!({"T": t, "steps": steps, "cosine": cosine}));
    }

    let sink = Sink::new(&c.out)?;
    match format_or(&c.out, FormatArg::Csv) {
        FormatArg::Csv => sink.write(&to_csv("T,steps,cosine", &rows)),
        FormatArg::Json => {
            let doc = json!({
                "n": g.n(),
                "alphas": g.alphas(),
                "marks": marks.vertices(),
                "rows": json_rows,
            });
            sink.write(&format!("{doc:#}\n"))
        }
    }
}

fn cmd_factor(c: FactorCmd) -> Result<(), CliError> {
    factor_by_trial_division(c.n)?; // invalid-n before any work
    let alphas = match &c.alphas {
        Some(a) => a.clone(),
        None => vec![2],
    };
    let g = orbitgraph::build(c.n, &alphas)?;
    let n_vertices = c.n - 1;
    let k = c.k.unwrap_or(((c.n - 1) / 4).max(1)).min(n_vertices - 1);
    let eps = c.eps.unwrap_or(1.0 / (2.0 * n_vertices as f64));
    let dt = c.dt.unwrap_or_else(|| walk::default_dt(&g));

    for attempt in 0..c.attempts {
        let mut rng = marking::substream_rng(c.seed, attempt);
        let marks = marking::sample_marks(n_vertices, k, &mut rng)?;
        let lp = GroundedLaplacian::build(&g, marks.vertices())?;
        let trace = walk::run_on(&lp, dt, c.max_iters, c.tol, c.max_iters.max(1))?;
        if let Some(pair) = walk::extract_factor(&trace.final_state, &lp, eps) {
            let doc = json!({
                "n": c.n,
                "p": pair.p(),
                "q": pair.q(),
                "attempts": attempt + 1,
                "k": k,
                "seed": c.seed,
                "marks": marks.vertices(),
                "converged": trace.converged,
            });
            let sink = Sink::new(&c.out)?;
            return sink.write(&format!("{doc:#}\n"));
        }
    }
    Err(CliError::FactorNotFound {
        n: c.n,
        attempts: c.attempts,
    })
}

fn cmd_spectrum(c: SpectrumCmd) -> Result<(), CliError> {
    let g = c.graph.build()?;
    let mark_args = MarkArgs {
        marks: c.marks.clone(),
        k: c.k,
    };
    let (matrix, marks_used) = if c.marks.is_none() && c.k.is_none() {
        (g.laplacian(), Vec::new())
    } else {
        let marks = mark_args.resolve(g.n(), c.seed)?;
        let lp = GroundedLaplacian::build(&g, marks.vertices())?;
        (lp.matrix().clone(), marks.vertices().to_vec())
    };

    let dim = matrix.nrows();
    let count = c.count.unwrap_or(dim).min(dim);
    let full = spectral::smallest_eigpairs(&matrix, dim, 1e-12)?;
    let lambda_max = *full.eigenvalues.last().expect("nonempty");
    let tol = spectral::default_degeneracy_tol(lambda_max);
    let kernel_dim = full
        .eigenvalues
        .iter()
        .filter(|&&v| v <= full.eigenvalues[0] + tol)
        .count();
    let gap = if dim >= 2 {
        Some(full.eigenvalues[1] - full.eigenvalues[0])
    } else {
        None
    };

    let rows: Vec<Vec<String>> = full.eigenvalues[..count]
        .iter()
        .enumerate()
        .map(|(i, v)| vec![i.to_string(), v.to_string()])
        .collect();
    let summary = json!({
        "n": g.n(),
        "alphas": g.alphas(),
        "marks": marks_used,
        "dimension": dim,
        "gap": gap,
        "degenerate_minimal_dim": kernel_dim,
    });

    let sink = Sink::new(&c.out)?;
    match format_or(&c.out, FormatArg::Csv) {
        FormatArg::Csv => {
            sink.write(&to_csv("index,eigenvalue", &rows))?;
            eprintln!("{summary}");
        }
        FormatArg::Json => {
            let doc = json!({
                "summary": summary,
                "eigenvalues": &full.eigenvalues[..count],
            });
            sink.write(&format!("{doc:#}\n"))?;
        }
    }
    Ok(())
}
