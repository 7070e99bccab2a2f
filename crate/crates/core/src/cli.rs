//! Command-line front end: instance files, result documents, and the
//! `approx`, `exact` and `bench` subcommands.
//!
//! Instance format (whitespace separated, `#` starts a comment):
//!
//! ```text
//! n d
//! x11 ... x1d
//! ...
//! xn1 ... xnd
//! p            # optional, default uniform
//! p1 ... pn    # any line layout
//! q            # optional, default uniform
//! q1 ... qn
//! ```
//!
//! Weights whose sum lies within `1e-6` of one are renormalized; anything else
//! is rejected.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::Serialize;

use crate::exact::{certify, exact_ot};
use crate::factored::{CouplingContainer, FactoredMatrix};
use crate::geometry::{normalize, pairwise_sq_distances, PointCloud};
use crate::simplex::SimplexVector;
use crate::solver::{
    approx_w2_with, PhaseTimings, SolverOptions, TransportResult, SOLVER_RADIUS,
};
use crate::{Error, Mode, Result};

pub const SCHEMA_VERSION: u32 = 1;
/// Accepted `|Σw - 1|` before renormalization.
pub const WEIGHT_TOLERANCE: f64 = 1e-6;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

#[derive(Debug, Clone)]
pub struct Instance {
    pub cloud: PointCloud,
    pub p: SimplexVector,
    pub q: SimplexVector,
}

fn line_error(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("line {line}: {msg}"))
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut tokens = text.lines().enumerate().flat_map(|(i, line)| {
        let content = line.split('#').next().unwrap_or("");
        content.split_whitespace().map(move |tok| (i + 1, tok))
    });
    let last_line = text.lines().count().max(1);
    let mut number = |what: &str| -> Result<(usize, f64)> {
        let (line, tok) = tokens
            .next()
            .ok_or_else(|| line_error(last_line, format!("unexpected end of file, expected {what}")))?;
        tok.parse::<f64>()
            .map(|v| (line, v))
            .map_err(|_| line_error(line, format!("expected {what}, found {tok:?}")))
    };
    let (line, n) = number("point count n")?;
    let n = as_count(n).ok_or_else(|| line_error(line, format!("n must be a positive integer, got {n}")))?;
    let (line, d) = number("dimension d")?;
    let d = as_count(d).ok_or_else(|| line_error(line, format!("d must be a positive integer, got {d}")))?;
    let mut flat = Vec::with_capacity(n * d);
    for i in 0..n {
        for k in 0..d {
            let (line, v) = number(&format!("coordinate {k} of point {i}"))?;
            if !v.is_finite() {
                return Err(line_error(line, format!("coordinate {v} is not finite")));
            }
            flat.push(v);
        }
    }

    let mut rest = tokens;
    let mut p = None;
    let mut q = None;
    while let Some((line, tok)) = rest.next() {
        let slot = match tok {
            "p" => &mut p,
            "q" => &mut q,
            other => {
                return Err(line_error(line, format!("expected section `p` or `q`, found {other:?}")))
            }
        };
        if slot.is_some() {
            return Err(line_error(line, format!("section `{tok}` given twice")));
        }
        let mut weights = Vec::with_capacity(n);
        for i in 0..n {
            let (wl, wt) = rest
                .next()
                .ok_or_else(|| line_error(last_line, format!("section `{tok}` has {i} of {n} weights")))?;
            let w: f64 = wt
                .parse()
                .map_err(|_| line_error(wl, format!("expected weight, found {wt:?}")))?;
            if !(w.is_finite() && w >= 0.0) {
                return Err(line_error(wl, format!("weight {w} must be finite and nonnegative")));
            }
            weights.push(w);
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(line_error(line, format!("weights `{tok}` sum to {total}, expected 1")));
        }
        *slot = Some(SimplexVector::normalized(weights)?);
    }
    let cloud = PointCloud::new(
        Array2::from_shape_vec((n, d), flat).map_err(|e| Error::InvalidInput(e.to_string()))?,
    )?;
    Ok(Instance {
        p: p.map_or_else(|| SimplexVector::uniform(n), Ok)?,
        q: q.map_or_else(|| SimplexVector::uniform(n), Ok)?,
        cloud,
    })
}

fn as_count(v: f64) -> Option<usize> {
    (v >= 1.0 && v.fract() == 0.0 && v <= usize::MAX as f64).then_some(v as usize)
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    parse_instance(&text).map_err(|e| match e {
        Error::InvalidInput(msg) => Error::InvalidInput(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Writes an instance in the text format, with explicit `p` and `q` sections.
pub fn format_instance(instance: &Instance) -> String {
    let (n, d) = instance.cloud.points().dim();
    let mut out = format!("{n} {d}\n");
    for row in instance.cloud.points().rows() {
        let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    for (name, w) in [("p", &instance.p), ("q", &instance.q)] {
        let line: Vec<String> = w.as_slice().iter().map(|v| format!("{v:e}")).collect();
        let _ = writeln!(out, "{name}\n{}", line.join(" "));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ResultDocument {
    pub schema_version: u32,
    pub w_hat_original_units: f64,
    pub w_hat_normalized: f64,
    pub epsilon: f64,
    pub params: ParamsDocument,
    pub diagnostics: DiagnosticsDocument,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling_path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamsDocument {
    pub eta: f64,
    #[serde(rename = "M")]
    pub order: usize,
    pub sigma: f64,
    pub delta: f64,
    pub rank: usize,
    pub mode: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DiagnosticsDocument {
    pub sinkhorn_iterations: usize,
    pub marginal_error: f64,
    pub converged: bool,
    pub rounding_l1_moved: f64,
    pub phase_timings: PhaseTimings,
}

impl ResultDocument {
    pub fn from_result(result: &TransportResult, coupling_path: Option<PathBuf>, seed: Option<u64>) -> Self {
        let p = &result.params;
        let diag = &result.diagnostics;
        Self {
            schema_version: SCHEMA_VERSION,
            w_hat_original_units: result.w_hat,
            w_hat_normalized: result.w_hat_normalized,
            epsilon: p.epsilon,
            params: ParamsDocument {
                eta: p.eta,
                order: p.order,
                sigma: p.sigma,
                delta: p.delta,
                rank: p.rank,
                mode: match p.mode {
                    Mode::Theory => "theory",
                    Mode::Engineering { .. } => "engineering",
                },
            },
            diagnostics: DiagnosticsDocument {
                sinkhorn_iterations: diag.sinkhorn_iterations,
                marginal_error: diag.marginal_error,
                converged: diag.converged,
                rounding_l1_moved: diag.rounding.l1_moved,
                phase_timings: diag.timings,
            },
            coupling_path,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExactDocument {
    pub schema_version: u32,
    pub w_original_units: f64,
    /// Cost after the same normalization `approx` applies.
    pub w_normalized: f64,
    pub certificate: CertificateDocument,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan_path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CertificateDocument {
    pub primal_residual: f64,
    pub dual_violation: f64,
    pub slackness_violation: f64,
    pub duality_gap: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Theory,
    Engineering,
}

#[derive(Debug, Clone, clap::Args)]
pub struct ModeArgs {
    #[arg(long, value_enum, default_value = "theory")]
    pub mode: ModeArg,
    /// Kernel inverse bandwidth; engineering mode only.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Taylor truncation order; engineering mode only.
    #[arg(long = "M")]
    pub order: Option<usize>,
}

impl ModeArgs {
    pub fn to_mode(&self) -> Result<Mode> {
        match (self.mode, self.eta, self.order) {
            (ModeArg::Theory, None, None) => Ok(Mode::Theory),
            (ModeArg::Theory, _, _) => Err(Error::InvalidInput(
                "--eta and --M require --mode engineering".into(),
            )),
            (ModeArg::Engineering, Some(eta), Some(order)) => Ok(Mode::Engineering { eta, order }),
            (ModeArg::Engineering, _, _) => Err(Error::InvalidInput(
                "engineering mode requires both --eta and --M".into(),
            )),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "lowrank-ot", version, about = "Approximate squared 2-Wasserstein distances in near-linear time")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Approximate W2^2 and emit a JSON result document.
    Approx(ApproxArgs),
    /// Solve the transport LP exactly (small n).
    Exact(ExactArgs),
    /// Time the solver on synthetic instances; CSV to stdout.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, clap::Args)]
pub struct ApproxArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub epsilon: f64,
    #[command(flatten)]
    pub mode: ModeArgs,
    /// Write the factored coupling as JSON.
    #[arg(long)]
    pub save_coupling: Option<PathBuf>,
    /// Write the result document here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Recorded in the document; the solver itself is deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the default Sinkhorn half-step cap.
    #[arg(long)]
    pub max_sinkhorn_iterations: Option<usize>,
}

#[derive(Debug, Clone, clap::Args)]
pub struct ExactArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Write the dense optimal plan as CSV.
    #[arg(long)]
    pub save_plan: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, clap::Args)]
pub struct BenchArgs {
    /// Comma-separated point counts.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 3)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub mode: ModeArgs,
}

/// Runs `approx`; the returned flag is the Sinkhorn convergence status.
pub fn cmd_approx(args: &ApproxArgs) -> Result<(ResultDocument, bool)> {
    let instance = read_instance(&args.input)?;
    let mode = args.mode.to_mode()?;
    let mut opts = SolverOptions::new(args.epsilon, mode);
    opts.max_sinkhorn_iterations = args.max_sinkhorn_iterations;
    let result = approx_w2_with(&instance.cloud, &instance.p, &instance.q, &opts)?;
    if let Some(path) = &args.save_coupling {
        save_coupling(&result.coupling, path)?;
    }
    let doc = ResultDocument::from_result(&result, args.save_coupling.clone(), args.seed);
    write_json(&doc, args.out.as_deref())?;
    Ok((doc, result.diagnostics.converged))
}

pub fn cmd_exact(args: &ExactArgs) -> Result<ExactDocument> {
    let instance = read_instance(&args.input)?;
    let cost = pairwise_sq_distances(&instance.cloud);
    let sol = exact_ot(&cost, &instance.p, &instance.q)?;
    let cert = certify(&sol, &cost, &instance.p, &instance.q);
    let (_, norm) = normalize(&instance.cloud, SOLVER_RADIUS)?;
    if let Some(path) = &args.save_plan {
        fs::write(path, plan_csv(&sol.plan))?;
    }
    let doc = ExactDocument {
        schema_version: SCHEMA_VERSION,
        w_original_units: sol.cost,
        w_normalized: sol.cost / (norm.scale * norm.scale),
        certificate: CertificateDocument {
            primal_residual: cert.primal_residual,
            dual_violation: cert.dual_violation,
            slackness_violation: cert.slackness_violation,
            duality_gap: cert.duality_gap,
            holds: cert.holds(sol.cost),
        },
        plan_path: args.save_plan.clone(),
    };
    write_json(&doc, args.out.as_deref())?;
    Ok(doc)
}

pub fn plan_csv(plan: &Array2<f64>) -> String {
    let mut out = String::new();
    for row in plan.rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn save_coupling(coupling: &FactoredMatrix, path: &Path) -> Result<()> {
    let file = fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    serde_json::to_writer(&mut w, &coupling.to_container())?;
    w.flush()?;
    Ok(())
}

pub fn load_coupling(path: &Path) -> Result<FactoredMatrix> {
    let file = fs::File::open(path)?;
    let container: CouplingContainer = serde_json::from_reader(std::io::BufReader::new(file))?;
    FactoredMatrix::from_container(container)
}

fn write_json<T: Serialize>(doc: &T, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(doc)?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Synthetic instance: points uniform in the unit ball, weights uniform on
/// the simplex (normalized exponentials), all from one ChaCha8 stream.
pub fn synthetic_instance(n: usize, d: usize, seed: u64) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut flat = Vec::with_capacity(n * d);
    for _ in 0..n {
        let dir: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        let radius = rng.random::<f64>().powf(1.0 / d as f64);
        flat.extend(dir.iter().map(|v| v / norm.max(f64::MIN_POSITIVE) * radius));
    }
    let cloud = PointCloud::new(
        Array2::from_shape_vec((n, d), flat).map_err(|e| Error::InvalidInput(e.to_string()))?,
    )?;
    let mut weights = || -> Result<SimplexVector> {
        SimplexVector::normalized((0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect())
    };
    let p = weights()?;
    let q = weights()?;
    Ok(Instance { cloud, p, q })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub d: usize,
    pub rank: usize,
    pub timings: PhaseTimings,
}

pub const BENCH_HEADER: &str = "n,d,rank,normalize,kernel,sinkhorn,round,cost,total";

impl BenchRow {
    pub fn csv(&self) -> String {
        let t = &self.timings;
        format!(
            "{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            self.n, self.d, self.rank, t.normalize, t.kernel, t.sinkhorn, t.round, t.cost, t.total
        )
    }
}

/// One row per size; each timing is the median over `reps` runs. Instances
/// for repetition `k` use seed `seed + k`.
pub fn cmd_bench(args: &BenchArgs) -> Result<Vec<BenchRow>> {
    if args.reps == 0 {
        return Err(Error::InvalidInput("--reps must be at least 1".into()));
    }
    let mode = args.mode.to_mode()?;
    let mut rows = Vec::with_capacity(args.sizes.len());
    for &n in &args.sizes {
        let mut runs = Vec::with_capacity(args.reps);
        let mut rank = 0;
        for k in 0..args.reps {
            let inst = synthetic_instance(n, args.d, args.seed.wrapping_add(k as u64))?;
            let result = approx_w2_with(&inst.cloud, &inst.p, &inst.q, &SolverOptions::new(args.epsilon, mode))?;
            rank = result.params.rank;
            runs.push(result.diagnostics.timings);
        }
        rows.push(BenchRow {
            n,
            d: args.d,
            rank,
            timings: median_timings(&runs),
        });
    }
    Ok(rows)
}

fn median_timings(runs: &[PhaseTimings]) -> PhaseTimings {
    let med = |f: fn(&PhaseTimings) -> f64| {
        let mut v: Vec<f64> = runs.iter().map(f).collect();
        v.sort_by(f64::total_cmp);
        let m = v.len() / 2;
        if v.len() % 2 == 1 {
            v[m]
        } else {
            0.5 * (v[m - 1] + v[m])
        }
    };
    PhaseTimings {
        normalize: med(|t| t.normalize),
        kernel: med(|t| t.kernel),
        sinkhorn: med(|t| t.sinkhorn),
        round: med(|t| t.round),
        cost: med(|t| t.cost),
        total: med(|t| t.total),
    }
}

/// Parses `args` (including the program name) and runs the subcommand,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let outcome = match &cli.command {
        Command::Approx(a) => cmd_approx(a).map(|(_, converged)| {
            if converged {
                EXIT_OK
            } else {
                eprintln!("warning: Sinkhorn stopped at its iteration cap before converging");
                EXIT_NOT_CONVERGED
            }
        }),
        Command::Exact(a) => cmd_exact(a).map(|_| EXIT_OK),
        Command::Bench(a) => cmd_bench(a).map(|rows| {
            println!("{BENCH_HEADER}");
            for row in &rows {
                println!("{}", row.csv());
            }
            EXIT_OK
        }),
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        EXIT_INPUT
    })
}
