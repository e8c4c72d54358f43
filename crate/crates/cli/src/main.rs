//! `hcurl run <problem>`: solve, estimate, refine and write reports.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use hcurl_core::adapt::EstimatorChoice;
use hcurl_core::bench::{builtin_problems, problem_by_name, run_experiment, with_threads, Experiment, RefinementMode, RunConfig, RunError};
use hcurl_core::equilibrate::FaceSolver;
use hcurl_core::femsys::Backend;
use hcurl_core::ProblemSpec;

use config::{parse_sizes, FileConfig};

#[derive(Parser)]
#[command(name = "hcurl", version, about = "Nédélec magnetostatics with an equilibrated error estimator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write report.csv and report.json.
    Run(Box<RunArgs>),
    /// List the built-in problems.
    List,
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// cube_poly, lbrick_singular or cube_jump_mu.
    problem: Option<String>,
    /// key = value file with the same keys as the long flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    degree: Option<usize>,
    /// Auxiliary degree k' (defaults to the degree).
    #[arg(long)]
    aux_degree: Option<usize>,
    /// uniform or adaptive.
    #[arg(long)]
    mode: Option<RefinementMode>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    theta: Option<f64>,
    /// eq, res or both.
    #[arg(long)]
    estimator: Option<EstimatorChoice>,
    /// Project j onto the auxiliary space and fail hard on inconsistency.
    #[arg(long)]
    strict_a2: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, conflicts_with = "sequential")]
    threads: Option<usize>,
    /// One thread; reports are byte-reproducible.
    #[arg(long)]
    sequential: bool,
    /// Outer permeability of cube_jump_mu.
    #[arg(long)]
    mu2: Option<f64>,
    /// Cells per unit length of the initial mesh.
    #[arg(long)]
    n0: Option<usize>,
    /// Uniform mode: comma-separated resolutions, overriding n0 and levels.
    #[arg(long)]
    sizes: Option<String>,
    #[arg(long)]
    max_dofs: Option<usize>,
    /// Extra adaptive levels for the reference solution (0 disables).
    #[arg(long)]
    reference_levels: Option<usize>,
    /// weak or strong.
    #[arg(long)]
    face_solver: Option<String>,
    /// direct or cg.
    #[arg(long)]
    backend: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Also write mesh_level_<l>.vtk with the indicators.
    #[arg(long)]
    vtk: bool,
}

#[derive(Debug)]
struct Settings {
    problem: ProblemSpec,
    cfg: RunConfig,
    out: PathBuf,
    threads: Option<usize>,
    vtk: bool,
}

fn parse_face_solver(s: &str) -> Result<FaceSolver> {
    match s {
        "weak" => Ok(FaceSolver::Weak),
        "strong" => Ok(FaceSolver::Strong),
        _ => bail!("unknown face solver '{s}' (weak|strong)"),
    }
}

fn parse_backend(s: &str) -> Result<Backend> {
    match s {
        "direct" => Ok(Backend::Direct),
        "cg" => Ok(Backend::Cg),
        _ => bail!("unknown backend '{s}' (direct|cg)"),
    }
}

macro_rules! pick {
    ($flag:expr, $file:expr, $key:literal) => {
        match $flag.clone() {
            Some(v) => Some(v),
            None => $file.get($key)?,
        }
    };
}

fn resolve(args: &RunArgs) -> Result<Settings> {
    let file = match &args.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let name: String = pick!(args.problem, file, "problem").ok_or_else(|| anyhow!("no problem given"))?;
    let mu2: Option<f64> = pick!(args.mu2, file, "mu2");
    let problem = problem_by_name(&name, mu2).ok_or_else(|| anyhow!("unknown problem '{name}' (see `hcurl list`)"))?;

    let degree: usize = pick!(args.degree, file, "degree").unwrap_or(1);
    let mut cfg = RunConfig::new(degree);
    cfg.adaptive.aux_degree = pick!(args.aux_degree, file, "aux-degree").unwrap_or(degree);
    cfg.mode = pick!(args.mode, file, "mode").unwrap_or(RefinementMode::Uniform);
    let default_levels = match cfg.mode {
        RefinementMode::Uniform => 3,
        RefinementMode::Adaptive => 6,
    };
    cfg.adaptive.max_levels = pick!(args.levels, file, "levels").unwrap_or(default_levels);
    if let Some(t) = pick!(args.theta, file, "theta") {
        cfg.adaptive.theta = t;
    }
    if let Some(e) = pick!(args.estimator, file, "estimator") {
        cfg.adaptive.estimator = e;
    }
    if let Some(m) = pick!(args.max_dofs, file, "max-dofs") {
        cfg.adaptive.max_dofs = m;
    }
    cfg.n0 = pick!(args.n0, file, "n0").unwrap_or(if name == "cube_poly" { 1 } else { 2 });
    let sizes: Option<String> = pick!(args.sizes, file, "sizes");
    cfg.sizes = sizes.map(|s| parse_sizes(&s)).transpose().map_err(|e| anyhow!("bad sizes: {e}"))?;
    if let Some(r) = pick!(args.reference_levels, file, "reference-levels") {
        cfg.reference_levels = r;
    }
    cfg.level.strict = args.strict_a2 || file.flag("strict-a2")?;
    let fs: Option<String> = pick!(args.face_solver, file, "face-solver");
    if let Some(fs) = fs {
        cfg.level.face_solver = parse_face_solver(&fs)?;
    }
    let backend: Option<String> = pick!(args.backend, file, "backend");
    if let Some(b) = backend {
        cfg.level.solver.backend = parse_backend(&b)?;
    }
    if let Some(t) = pick!(args.tol, file, "tol") {
        cfg.level.solver.tol = t;
    }
    if let Some(m) = pick!(args.max_iter, file, "max-iter") {
        cfg.level.solver.max_iter = m;
    }

    let sequential = args.sequential || (args.threads.is_none() && file.flag("sequential")?);
    let threads = if sequential { Some(1) } else { pick!(args.threads, file, "threads") };
    if threads == Some(0) {
        bail!("--threads must be positive");
    }
    let out = pick!(args.out, file, "out").unwrap_or_else(|| PathBuf::from("out"));
    let vtk = args.vtk || file.flag("vtk")?;
    Ok(Settings {
        problem,
        cfg,
        out,
        threads,
        vtk,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.4e}"))
}

fn print_summary(ex: &Experiment) {
    let r = &ex.report;
    println!("{} k={} k'={} {:?} strict={}", r.problem, r.degree, r.aux_degree, r.mode, r.strict);
    println!("{:>5} {:>8} {:>11} {:>11} {:>11} {:>8} {:>8}", "level", "dofs", "eta", "mu_res", "error", "eff_eq", "eff_res");
    for row in &r.rows {
        let eff = |v: Option<f64>| v.map_or_else(|| "-".into(), |x| format!("{x:.3}"));
        println!(
            "{:>5} {:>8} {:>11} {:>11} {:>11} {:>8} {:>8}",
            row.level,
            row.n_dofs,
            opt(row.eta),
            opt(row.mu_res),
            opt(row.error),
            eff(row.eff_eq),
            eff(row.eff_res)
        );
    }
}

fn write_failure(out: &Path, err: &RunError) -> Result<()> {
    let level = match err {
        RunError::Level { level, .. } => Some(*level),
        _ => None,
    };
    let record = serde_json::json!({ "status": "error", "level": level, "message": err.to_string() });
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("failure.json"), serde_json::to_string_pretty(&record)?)?;
    Ok(())
}

fn run(args: &RunArgs) -> Result<ExitCode> {
    let s = resolve(args)?;
    let go = || run_experiment(&s.problem, &s.cfg);
    let result = match s.threads {
        Some(n) => with_threads(n, go)?,
        None => go(),
    };
    let ex = match result {
        Ok(ex) => ex,
        Err(e) => {
            write_failure(&s.out, &e).context("writing failure record")?;
            eprintln!("error: {e}");
            return Ok(ExitCode::from(2));
        }
    };
    ex.write_outputs(&s.out, s.vtk)?;
    print_summary(&ex);
    println!("wrote {}", s.out.display());
    if ex.report.passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        for c in ex.report.failures() {
            eprintln!("check failed: {} at level {}: {:e} vs bound {:e}", c.name, c.level, c.value, c.bound);
        }
        Ok(ExitCode::from(1))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Run(args) => run(args),
        Command::List => {
            for p in builtin_problems() {
                let exact = if p.error_trusted() { "exact error" } else { "no exact error" };
                println!("{:<28} {exact}", p.label());
            }
            Ok(ExitCode::SUCCESS)
        }
    };
    res.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(2)
    })
}
