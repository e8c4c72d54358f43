//! Solve, estimate, mark, refine.

use serde::{Deserialize, Serialize};

use crate::bench::{solve_level, LevelOptions, LevelOutcome, ProblemSpec, RunError};
use crate::mesh::{refine, Mesh};

/// Which indicator drives marking; `Both` computes both and marks with the
/// equilibrated one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorChoice {
    Eq,
    Res,
    Both,
}

impl EstimatorChoice {
    pub fn equilibrated(self) -> bool {
        self != EstimatorChoice::Res
    }

    pub fn residual(self) -> bool {
        self != EstimatorChoice::Eq
    }
}

impl std::str::FromStr for EstimatorChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "eq" => Ok(EstimatorChoice::Eq),
            "res" => Ok(EstimatorChoice::Res),
            "both" => Ok(EstimatorChoice::Both),
            _ => Err(format!("unknown estimator '{s}' (eq|res|both)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveConfig {
    pub theta: f64,
    pub max_levels: usize,
    pub max_dofs: usize,
    pub estimator: EstimatorChoice,
    pub degree: usize,
    pub aux_degree: usize,
}

impl AdaptiveConfig {
    pub fn new(degree: usize) -> Self {
        AdaptiveConfig {
            theta: 0.5,
            max_levels: 6,
            max_dofs: 200_000,
            estimator: EstimatorChoice::Both,
            degree,
            aux_degree: degree,
        }
    }

    pub fn validate(&self) -> Result<(), RunError> {
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(RunError::Config(format!("theta = {} outside (0, 1]", self.theta)));
        }
        if !(1..=4).contains(&self.degree) {
            return Err(RunError::Config(format!("degree {} outside 1..=4", self.degree)));
        }
        if self.aux_degree < self.degree || self.aux_degree > 4 {
            return Err(RunError::Config(format!(
                "aux degree {} must lie in {}..=4",
                self.aux_degree, self.degree
            )));
        }
        if self.max_levels == 0 {
            return Err(RunError::Config("max_levels must be positive".into()));
        }
        Ok(())
    }
}

/// Smallest set of tets, taken greedily by decreasing indicator (ties by
/// ascending id), whose squared indicators reach `theta` of the total.
/// Returned in ascending id order. The bulk test allows a relative slack of
/// `1e-12` so that summation order cannot add a member.
pub fn dorfler_mark(etas: &[f64], theta: f64) -> Vec<usize> {
    let total: f64 = etas.iter().map(|e| e * e).sum();
    if total == 0.0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..etas.len()).collect();
    order.sort_by(|&a, &b| etas[b].total_cmp(&etas[a]).then(a.cmp(&b)));
    let target = theta * total * (1.0 - 1e-12);
    let mut acc = 0.0;
    let mut out = Vec::new();
    for t in order {
        if acc >= target {
            break;
        }
        acc += etas[t] * etas[t];
        out.push(t);
    }
    out.sort_unstable();
    out
}

/// Meshes and per-level results of an adaptive run; `meshes[l + 1]` is the
/// refinement of `meshes[l]`.
#[derive(Debug)]
pub struct AdaptiveRun {
    pub meshes: Vec<Mesh>,
    pub levels: Vec<LevelOutcome>,
}

/// Runs up to `cfg.max_levels` levels, stopping early once a level reaches
/// `cfg.max_dofs` dofs. The last level is solved and marked but not refined.
pub fn adaptive_loop(
    problem: &ProblemSpec,
    initial: Mesh,
    cfg: &AdaptiveConfig,
    opts: &LevelOptions,
) -> Result<AdaptiveRun, RunError> {
    cfg.validate()?;
    let mut meshes = vec![initial];
    let mut levels: Vec<LevelOutcome> = Vec::new();
    loop {
        let level = levels.len() + 1;
        let mesh = meshes.last().expect("at least one mesh");
        let mut out = solve_level(problem, mesh, cfg, opts).map_err(|e| e.at_level(level))?;
        out.row.level = level;
        let done = level >= cfg.max_levels || out.row.n_dofs >= cfg.max_dofs;
        let t0 = std::time::Instant::now();
        let marked = dorfler_mark(&out.indicator, cfg.theta);
        if done {
            // Recorded for the report; the mesh is not refined further.
            out.record_marking(mesh, problem, &marked);
            levels.push(out);
            break;
        }
        let next = refine(mesh, &marked).map_err(|e| RunError::Mesh(e.to_string()).at_level(level))?;
        out.record_marking(mesh, problem, &marked);
        out.row.timings.mark_refine = t0.elapsed().as_secs_f64();
        levels.push(out);
        meshes.push(next);
    }
    Ok(AdaptiveRun { meshes, levels })
}
