//! Equilibrated error estimator built from purely local problems: element
//! corrections, face multipliers, a nodal potential reconstructed from its
//! face jumps, and the resulting field whose energy is the estimate.

mod element;
mod estimate;
mod faces;
mod nodes;

pub use element::{step1_element_corrections, ElementCorrection};
pub use estimate::{equilibrium_report, step4_estimator, verify_equilibrium, EQUILIBRIUM_TOL, Diagnostics, EquilibriumReport, EstimatorResult};
pub use faces::{check_edge_compatibility, face_geometry, step2_face_multipliers, EdgeCompatibility, FaceGeometry, FaceMultiplier};
pub use nodes::{solve_patch, step3_reconstruct_phi, NodalPotential};

use crate::femsys::{BrokenField, CurrentDensity, MaterialField};
use crate::mesh::Mesh;
use crate::polyspace::maps::AffineMap;
use crate::polyspace::SpaceError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EquilibrationError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("auxiliary degree {aux} is below the field degree {degree}")]
    DegreeMismatch { degree: usize, aux: usize },
    #[error("local saddle-point system on tet {0} is singular")]
    LocalSolveSingular(usize),
    #[error("current divergence {divergence:e} on tet {tet} is not negligible")]
    DataIncompatible { tet: usize, divergence: f64 },
    #[error("face system on face {0} is singular")]
    FaceSolveSingular(usize),
    #[error("in-plane divergence {residual:e} of the jump on face {face}")]
    FaceIncompatible { face: usize, residual: f64 },
    #[error("node {node}: patch least-squares residual {residual:e}")]
    InconsistentPatch { node: usize, residual: f64 },
    #[error("node {0} has no element in the registry")]
    OrphanNode(usize),
    #[error("equilibrium violated: element residual {element:e}, face residual {face:e} (relative)")]
    EquilibriumViolated { element: f64, face: f64 },
}

/// How the 2D curl problem on each face is discretised.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FaceSolver {
    /// Least squares of the face equation, i.e. testing with surface curls
    /// of `P_k'(f)`, with a mean-value multiplier.
    Weak,
    /// Monomial coefficient matching of the exact polynomial jump.
    Strong,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EquilibrationConfig {
    pub aux_degree: usize,
    pub face_solver: FaceSolver,
    /// Turns consistency diagnostics into hard errors.
    pub strict: bool,
}

impl EquilibrationConfig {
    pub fn new(aux_degree: usize) -> Self {
        EquilibrationConfig {
            aux_degree,
            face_solver: FaceSolver::Weak,
            strict: false,
        }
    }
}

/// Everything produced by one equilibration.
#[derive(Clone, Debug)]
pub struct Equilibration {
    pub correction: ElementCorrection,
    pub multipliers: FaceMultiplier,
    pub edges: EdgeCompatibility,
    pub potential: NodalPotential,
    pub estimate: EstimatorResult,
}

/// Runs steps 1 to 4 for a field `hh` of degree `degree` (`H_h` lies in
/// `P_{degree-1}`), with `jh = curl H_h` per element.
#[allow(clippy::too_many_arguments)]
pub fn equilibrate(
    mesh: &Mesh,
    maps: &[AffineMap],
    mu: &MaterialField,
    j: &CurrentDensity,
    hh: &BrokenField,
    jh: &BrokenField,
    degree: usize,
    cfg: &EquilibrationConfig,
) -> Result<Equilibration, EquilibrationError> {
    if cfg.aux_degree < degree {
        return Err(EquilibrationError::DegreeMismatch {
            degree,
            aux: cfg.aux_degree,
        });
    }
    let correction = step1_element_corrections(mesh, maps, mu, j, jh, cfg.aux_degree, cfg.strict)?;
    let multipliers = step2_face_multipliers(mesh, maps, hh, &correction, cfg.face_solver, cfg.strict)?;
    let edges = check_edge_compatibility(mesh, &multipliers);
    let potential = step3_reconstruct_phi(mesh, &multipliers, cfg.strict)?;
    let estimate = step4_estimator(mesh, maps, mu, &correction, &potential, &multipliers, &edges);
    Ok(Equilibration {
        correction,
        multipliers,
        edges,
        potential,
        estimate,
    })
}
