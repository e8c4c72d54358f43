//! Experiment definitions, per-level solves with both estimators, error
//! measurement, and CSV/JSON reports.

mod error;
pub mod problems;
mod report;

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;

pub use error::{ancestors, compute_error, reference_error};
pub use problems::{builtin_problems, problem_by_name, Feature, ProblemKind, ProblemSpec};
pub use report::{Check, ExperimentReport, LevelRow, Timings, CSV_SCHEMA};

use crate::adapt::{adaptive_loop, AdaptiveConfig};
use crate::equilibrate::{equilibrate, equilibrium_report, EquilibrationConfig, EquilibrationError, FaceSolver};
use crate::femsys::{element_maps, project_current, solve_field, BrokenField, CurrentDensity, FemError, SolverConfig};
use crate::mesh::{write_vtk, Mesh};
use crate::polyspace::maps::AffineMap;
use crate::polyspace::SpaceError;
use crate::residual::compute_residual_estimator;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("mesh: {0}")]
    Mesh(String),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Equilibration(#[from] EquilibrationError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("io: {0}")]
    Io(String),
    #[error("level {level}: {source}")]
    Level { level: usize, source: Box<RunError> },
}

impl RunError {
    pub fn at_level(self, level: usize) -> RunError {
        match self {
            RunError::Level { .. } => self,
            e => RunError::Level {
                level,
                source: Box::new(e),
            },
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelOptions {
    /// Project `j` onto broken `D_k'` first and make the local solves fail
    /// hard on any inconsistency.
    pub strict: bool,
    pub face_solver: FaceSolver,
    pub solver: SolverConfig,
}

impl Default for LevelOptions {
    fn default() -> Self {
        LevelOptions {
            strict: false,
            face_solver: FaceSolver::Weak,
            solver: SolverConfig::default(),
        }
    }
}

/// One solved level: the report row plus the fields needed for marking,
/// reference errors and output.
#[derive(Clone, Debug)]
pub struct LevelOutcome {
    pub row: LevelRow,
    /// Indicator used for marking.
    pub indicator: Vec<f64>,
    pub eta_t: Option<Vec<f64>>,
    pub mu_t: Option<Vec<f64>>,
    pub err_t: Option<Vec<f64>>,
    pub hh: BrokenField,
    pub maps: Vec<AffineMap>,
}

impl LevelOutcome {
    pub fn record_marking(&mut self, mesh: &Mesh, problem: &ProblemSpec, marked: &[usize]) {
        self.row.marked = marked.len();
        if let Some(f) = problem.feature {
            let all = (0..mesh.n_tets()).filter(|&t| f.touches(mesh, t)).count();
            self.row.feature_fraction = Some(all as f64 / mesh.n_tets() as f64);
            if !marked.is_empty() {
                let hit = marked.iter().filter(|&&t| f.touches(mesh, t)).count();
                self.row.marked_feature_fraction = Some(hit as f64 / marked.len() as f64);
            }
        }
    }
}

/// Whether `j` already lies in broken `D_k'` (or is projected there).
pub fn a2_holds(problem: &ProblemSpec, aux_degree: usize, strict: bool) -> bool {
    strict || problem.j.poly_degree().is_some_and(|d| d < aux_degree)
}

fn error_exactness(k: usize) -> usize {
    2 * k + 4
}

/// `max_T eta_T / sum of err_T'` over tets `T'` sharing a vertex with `T`.
pub fn local_efficiency(mesh: &Mesh, eta_t: &[f64], err_t: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    let mut patch = Vec::new();
    for t in 0..mesh.n_tets() {
        patch.clear();
        for v in mesh.tet(t) {
            patch.extend_from_slice(mesh.vertex_tets(v));
        }
        patch.sort_unstable();
        patch.dedup();
        let e: f64 = patch.iter().map(|&u| err_t[u]).sum();
        if e > 0.0 {
            worst = worst.max(eta_t[t] / e);
        }
    }
    worst
}

/// Solve, estimate and (with a trusted exact field) measure one mesh.
pub fn solve_level(
    problem: &ProblemSpec,
    mesh: &Mesh,
    cfg: &AdaptiveConfig,
    opts: &LevelOptions,
) -> Result<LevelOutcome, RunError> {
    let (k, kp) = (cfg.degree, cfg.aux_degree);
    let mut timings = Timings::default();
    let clock = Instant::now();
    let maps = element_maps(mesh);
    let j = if opts.strict {
        CurrentDensity::Broken(project_current(mesh, &maps, &problem.j, kp)?)
    } else {
        problem.j.clone()
    };
    let sol = solve_field(mesh, &maps, k, &problem.mu, &j, &opts.solver)?;
    timings.solve = clock.elapsed().as_secs_f64();

    let mut row = LevelRow {
        n_tets: mesh.n_tets(),
        n_dofs: sol.system.dofmap.n_free(),
        h_max: mesh.h_max(),
        solver_residual: sol.stats.rel_residual,
        ..LevelRow::default()
    };

    let clock = Instant::now();
    let eq = if cfg.estimator.equilibrated() {
        let ecfg = EquilibrationConfig {
            aux_degree: kp,
            face_solver: opts.face_solver,
            strict: opts.strict,
        };
        let e = equilibrate(mesh, &maps, &problem.mu, &j, &sol.hh, &sol.jh, k, &ecfg)?;
        let rep = equilibrium_report(mesh, &maps, &j, &sol.hh, &e.correction, &e.estimate);
        let d = &e.estimate.diagnostics;
        row.eta = Some(e.estimate.eta);
        row.oscillation = Some(d.oscillation);
        row.max_edge_residual = Some(d.max_edge_residual);
        row.max_edge_variation = Some(d.max_edge_variation);
        row.eq_element = Some(rep.max_element());
        row.eq_face = Some(rep.max_face());
        row.eq_orthogonality = Some(rep.orthogonality);
        Some(e)
    } else {
        None
    };
    timings.equilibrate = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let res = cfg
        .estimator
        .residual()
        .then(|| compute_residual_estimator(mesh, &maps, &problem.j, &sol.hh, &sol.jh, k));
    row.mu_res = res.as_ref().map(|r| r.mu);
    timings.residual = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let mut err_t = None;
    if let (true, Some(exact)) = (problem.error_trusted(), &problem.exact_h) {
        let ex = error_exactness(k);
        let (err, per) = compute_error(mesh, &maps, &problem.mu, &sol.hh, exact, ex);
        row.error = Some(err);
        row.error_source = "exact".into();
        if let Some(e) = &eq {
            let eta = e.estimate.eta;
            let (t, _) = compute_error(mesh, &maps, &problem.mu, &sol.hh.add(&e.estimate.h_tilde), exact, ex);
            if eta > 0.0 {
                row.pythagoras_defect = Some((eta * eta - t * t - err * err).abs() / (eta * eta));
            }
            row.local_efficiency = Some(local_efficiency(mesh, &e.estimate.eta_t, &per));
        }
        row.set_efficiency();
        err_t = Some(per);
    }
    timings.error = clock.elapsed().as_secs_f64();
    row.timings = timings;

    let eta_t = eq.map(|e| e.estimate.eta_t);
    let mu_t = res.map(|r| r.mu_t);
    let indicator = eta_t.clone().or_else(|| mu_t.clone()).expect("at least one estimator");
    Ok(LevelOutcome {
        row,
        indicator,
        eta_t,
        mu_t,
        err_t,
        hh: sol.hh,
        maps,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RefinementMode {
    Uniform,
    Adaptive,
}

impl std::str::FromStr for RefinementMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(RefinementMode::Uniform),
            "adaptive" => Ok(RefinementMode::Adaptive),
            _ => Err(format!("unknown mode '{s}' (uniform|adaptive)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub adaptive: AdaptiveConfig,
    pub mode: RefinementMode,
    /// Cells per unit length of the initial mesh.
    pub n0: usize,
    /// Uniform mode: explicit resolutions, else `n0 * 2^l` for each level.
    pub sizes: Option<Vec<usize>>,
    pub level: LevelOptions,
    /// Extra adaptive levels used as reference when no trusted exact field
    /// exists; zero disables the reference.
    pub reference_levels: usize,
}

impl RunConfig {
    pub fn new(degree: usize) -> Self {
        RunConfig {
            adaptive: AdaptiveConfig::new(degree),
            mode: RefinementMode::Uniform,
            n0: 1,
            sizes: None,
            level: LevelOptions::default(),
            reference_levels: 2,
        }
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.sizes
            .clone()
            .unwrap_or_else(|| (0..self.adaptive.max_levels).map(|l| self.n0 << l).collect())
    }
}

/// A finished run: the report plus the meshes and indicators it came from.
#[derive(Debug)]
pub struct Experiment {
    pub report: ExperimentReport,
    pub meshes: Vec<Mesh>,
    pub levels: Vec<LevelOutcome>,
}

impl Experiment {
    /// Writes `report.csv`, `report.json` and, if asked, one VTK file per
    /// level with the indicators as cell data.
    pub fn write_outputs(&self, dir: &std::path::Path, vtk: bool) -> Result<(), RunError> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.csv"), self.report.to_csv()?)?;
        std::fs::write(dir.join("report.json"), self.report.to_json())?;
        if vtk {
            for (l, (mesh, out)) in self.meshes.iter().zip(&self.levels).enumerate() {
                let mut data: Vec<(&str, &[f64])> = Vec::new();
                if let Some(e) = &out.eta_t {
                    data.push(("eta", e));
                }
                if let Some(m) = &out.mu_t {
                    data.push(("mu_res", m));
                }
                if let Some(e) = &out.err_t {
                    data.push(("error", e));
                }
                let f = std::fs::File::create(dir.join(format!("mesh_level_{}.vtk", l + 1)))?;
                write_vtk(mesh, &data, std::io::BufWriter::new(f))?;
            }
        }
        Ok(())
    }
}

pub fn run_experiment(problem: &ProblemSpec, cfg: &RunConfig) -> Result<Experiment, RunError> {
    cfg.adaptive.validate()?;
    if cfg.n0 == 0 {
        return Err(RunError::Config("n0 must be positive".into()));
    }
    let mut metadata = BTreeMap::new();
    let (meshes, mut levels) = match cfg.mode {
        RefinementMode::Uniform => {
            let sizes = cfg.sizes();
            if sizes.is_empty() || sizes.contains(&0) {
                return Err(RunError::Config(format!("bad uniform sizes {sizes:?}")));
            }
            let mut meshes = Vec::new();
            let mut levels = Vec::new();
            for (i, &n) in sizes.iter().enumerate() {
                let mesh = problem.mesh(n);
                let mut out = solve_level(problem, &mesh, &cfg.adaptive, &cfg.level).map_err(|e| e.at_level(i + 1))?;
                out.row.level = i + 1;
                out.record_marking(&mesh, problem, &[]);
                meshes.push(mesh);
                levels.push(out);
            }
            metadata.insert("sizes".into(), format!("{sizes:?}"));
            (meshes, levels)
        }
        RefinementMode::Adaptive => {
            let extra = if problem.error_trusted() { 0 } else { cfg.reference_levels };
            let mut acfg = cfg.adaptive;
            acfg.max_levels += extra;
            let run = adaptive_loop(problem, problem.mesh(cfg.n0), &acfg, &cfg.level)?;
            let (mut meshes, mut levels) = (run.meshes, run.levels);
            let reported = levels.len().min(cfg.adaptive.max_levels);
            if extra > 0 {
                let used = levels.len() - reported;
                metadata.insert(
                    "reference".into(),
                    format!("{used} extra adaptive level(s) beyond the reported run, same degree"),
                );
                if used > 0 {
                    attach_reference_errors(problem, &meshes, &mut levels, reported, error_exactness(cfg.adaptive.degree));
                }
            }
            meshes.truncate(reported);
            levels.truncate(reported);
            (meshes, levels)
        }
    };
    for out in &mut levels {
        out.row.set_efficiency();
    }
    metadata.insert("n0".into(), cfg.n0.to_string());
    metadata.insert("solver".into(), format!("{:?}", cfg.level.solver.backend).to_lowercase());
    metadata.insert("face_solver".into(), format!("{:?}", cfg.level.face_solver).to_lowercase());
    let a2 = a2_holds(problem, cfg.adaptive.aux_degree, cfg.level.strict);
    let report = ExperimentReport::new(problem, cfg, a2, metadata, levels.iter().map(|o| o.row.clone()).collect());
    Ok(Experiment { report, meshes, levels })
}

fn attach_reference_errors(
    problem: &ProblemSpec,
    meshes: &[Mesh],
    levels: &mut [LevelOutcome],
    reported: usize,
    exactness: usize,
) {
    let fine = meshes.last().expect("non-empty");
    let fine_out = levels.last().expect("non-empty");
    let (fine_maps, fine_hh) = (fine_out.maps.clone(), fine_out.hh.clone());
    for l in 0..reported {
        let anc = ancestors(meshes, l);
        let out = &mut levels[l];
        let (e, per) = reference_error(fine, &fine_maps, &fine_hh, &anc, &out.maps, &out.hh, &problem.mu, exactness);
        out.row.error = Some(e);
        out.row.error_source = "reference".into();
        out.err_t = Some(per);
    }
}

/// Runs `f` on a dedicated pool; one thread gives the sequential,
/// bit-reproducible mode.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, RunError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| RunError::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}
