//! Per-level rows, hard invariant checks, CSV and JSON emission.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{ProblemSpec, RefinementMode, RunConfig, RunError};
use crate::adapt::EstimatorChoice;
use crate::equilibrate::EQUILIBRIUM_TOL;

/// Version tag written in the first CSV column.
pub const CSV_SCHEMA: &str = "v1";

/// Wall-clock seconds per stage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Timings {
    pub solve: f64,
    pub equilibrate: f64,
    pub residual: f64,
    pub error: f64,
    pub mark_refine: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct LevelRow {
    /// 1-based.
    pub level: usize,
    pub n_tets: usize,
    pub n_dofs: usize,
    pub h_max: f64,
    pub eta: Option<f64>,
    pub mu_res: Option<f64>,
    pub error: Option<f64>,
    /// `exact`, `reference` or empty.
    pub error_source: String,
    pub eff_eq: Option<f64>,
    pub eff_res: Option<f64>,
    pub oscillation: Option<f64>,
    pub max_edge_residual: Option<f64>,
    pub max_edge_variation: Option<f64>,
    pub eq_element: Option<f64>,
    pub eq_face: Option<f64>,
    pub eq_orthogonality: Option<f64>,
    pub pythagoras_defect: Option<f64>,
    pub local_efficiency: Option<f64>,
    pub marked: usize,
    pub feature_fraction: Option<f64>,
    pub marked_feature_fraction: Option<f64>,
    pub solver_residual: f64,
    pub timings: Timings,
}

impl LevelRow {
    pub(crate) fn set_efficiency(&mut self) {
        if let Some(e) = self.error.filter(|e| *e > 0.0) {
            self.eff_eq = self.eta.map(|x| x / e);
            self.eff_res = self.mu_res.map(|x| x / e);
        }
    }
}

/// Same fields as `LevelRow` minus timings, which would break
/// byte-reproducibility.
#[derive(Serialize)]
struct CsvRow<'a> {
    schema: &'static str,
    problem: &'a str,
    degree: usize,
    aux_degree: usize,
    level: usize,
    n_tets: usize,
    n_dofs: usize,
    h_max: f64,
    eta: Option<f64>,
    mu_res: Option<f64>,
    error: Option<f64>,
    error_source: &'a str,
    eff_eq: Option<f64>,
    eff_res: Option<f64>,
    oscillation: Option<f64>,
    max_edge_residual: Option<f64>,
    max_edge_variation: Option<f64>,
    eq_element: Option<f64>,
    eq_face: Option<f64>,
    eq_orthogonality: Option<f64>,
    pythagoras_defect: Option<f64>,
    local_efficiency: Option<f64>,
    marked: usize,
    feature_fraction: Option<f64>,
    marked_feature_fraction: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub level: usize,
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub schema: &'static str,
    pub problem: String,
    pub mode: RefinementMode,
    pub degree: usize,
    pub aux_degree: usize,
    pub theta: f64,
    pub estimator: EstimatorChoice,
    pub strict: bool,
    /// `j` lies in broken `D_k'`, natively or by projection.
    pub a2: bool,
    pub metadata: BTreeMap<String, String>,
    pub rows: Vec<LevelRow>,
    pub checks: Vec<Check>,
}

impl ExperimentReport {
    pub fn new(
        problem: &ProblemSpec,
        cfg: &RunConfig,
        a2: bool,
        metadata: BTreeMap<String, String>,
        rows: Vec<LevelRow>,
    ) -> Self {
        let mut r = ExperimentReport {
            schema: CSV_SCHEMA,
            problem: problem.label(),
            mode: cfg.mode,
            degree: cfg.adaptive.degree,
            aux_degree: cfg.adaptive.aux_degree,
            theta: cfg.adaptive.theta,
            estimator: cfg.adaptive.estimator,
            strict: cfg.level.strict,
            a2,
            metadata,
            rows,
            checks: Vec::new(),
        };
        r.checks = r.hard_checks();
        r
    }

    /// Invariants whose failure makes the run fail.
    fn hard_checks(&self) -> Vec<Check> {
        let mut out = Vec::new();
        let mut push = |name: &str, level: usize, value: f64, bound: f64, passed: bool| {
            out.push(Check {
                name: name.into(),
                level,
                value,
                bound,
                passed,
            })
        };
        for w in self.rows.windows(2) {
            let ok = w[1].level > w[0].level && w[1].n_dofs > w[0].n_dofs;
            push("dofs_increase", w[1].level, w[1].n_dofs as f64, w[0].n_dofs as f64, ok);
        }
        for r in &self.rows {
            let lv = r.level;
            if r.error_source == "exact" {
                if let Some(eff) = r.eff_eq {
                    let bound = if self.strict { 1.0 - 1e-6 } else { 0.99 };
                    push("reliability", lv, eff, bound, eff >= bound);
                }
            }
            if self.a2 {
                for (name, v) in [
                    ("equilibrium_element", r.eq_element),
                    ("equilibrium_face", r.eq_face),
                    ("equilibrium_orthogonality", r.eq_orthogonality),
                    ("edge_residual", r.max_edge_residual),
                    ("edge_variation", r.max_edge_variation),
                ] {
                    if let Some(v) = v {
                        push(name, lv, v, EQUILIBRIUM_TOL, v <= EQUILIBRIUM_TOL);
                    }
                }
            }
            for v in [r.eta, r.mu_res, r.error].into_iter().flatten() {
                push("finite", lv, v, f64::INFINITY, v.is_finite());
            }
        }
        out
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn to_csv(&self) -> Result<String, RunError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(CsvRow {
                schema: CSV_SCHEMA,
                problem: &self.problem,
                degree: self.degree,
                aux_degree: self.aux_degree,
                level: r.level,
                n_tets: r.n_tets,
                n_dofs: r.n_dofs,
                h_max: r.h_max,
                eta: r.eta,
                mu_res: r.mu_res,
                error: r.error,
                error_source: &r.error_source,
                eff_eq: r.eff_eq,
                eff_res: r.eff_res,
                oscillation: r.oscillation,
                max_edge_residual: r.max_edge_residual,
                max_edge_variation: r.max_edge_variation,
                eq_element: r.eq_element,
                eq_face: r.eq_face,
                eq_orthogonality: r.eq_orthogonality,
                pythagoras_defect: r.pythagoras_defect,
                local_efficiency: r.local_efficiency,
                marked: r.marked,
                feature_fraction: r.feature_fraction,
                marked_feature_fraction: r.marked_feature_fraction,
            })
            .map_err(|e| RunError::Io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| RunError::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Observed rates `log2(e_l / e_{l+1}) / log2(h_l / h_{l+1})` between
    /// successive rows with errors.
    pub fn observed_rates(&self) -> Vec<f64> {
        self.rows
            .windows(2)
            .filter_map(|w| {
                let (a, b) = (w[0].error?, w[1].error?);
                Some((a / b).ln() / (w[0].h_max / w[1].h_max).ln())
            })
            .collect()
    }
}
