//! Global spaces, assembly of the curl–curl system, current densities and
//! the linear solve for the discrete field.

mod assemble;
mod current;
mod dofmap;
mod fields;
mod solve;
pub mod sparse;
#[cfg(test)]
mod tests;

use std::collections::BTreeMap;

pub use assemble::{
    assemble_curlcurl, assemble_gradient, assemble_mass, assemble_rhs, gradient_correction, MagnetostaticSystem,
};
pub use current::{project_current, CurrentDensity, VectorFn};
pub use dofmap::{build_dofmap, node_key, node_on_boundary, Continuity, DofMap, NodeKey};
pub use fields::{compute_hh, element_maps, phys_curl, phys_deriv, phys_grad, BrokenField, FieldCoefficients};
pub use solve::{solve_field, solve_magnetostatic, Backend, FieldSolution, SolveStats, SolverConfig};
pub use sparse::CsrMatrix;

use crate::polyspace::SpaceError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FemError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("gradient projection solve failed: {0}")]
    ProjectionSolveFailure(String),
    #[error("solver did not converge: relative residual {residual:e} after {iterations} iterations")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("sparse factorization failed: {0}")]
    Factorization(String),
    #[error("invalid material: {0}")]
    Material(String),
}

/// Piecewise-constant permeability indexed by subdomain tag.
#[derive(Clone, Debug, PartialEq)]
pub struct MaterialField {
    values: BTreeMap<i32, f64>,
    default: f64,
}

impl MaterialField {
    pub fn constant(mu: f64) -> Self {
        assert!(mu > 0.0 && mu.is_finite(), "permeability must be positive");
        MaterialField {
            values: BTreeMap::new(),
            default: mu,
        }
    }

    /// Tags not listed take `default`.
    pub fn by_tag(values: &[(i32, f64)], default: f64) -> Result<Self, FemError> {
        let mut map = BTreeMap::new();
        for &(tag, mu) in values.iter().chain(std::iter::once(&(i32::MIN, default))) {
            if !(mu > 0.0 && mu.is_finite()) {
                return Err(FemError::Material(format!("mu = {mu} for tag {tag}")));
            }
            if tag != i32::MIN {
                map.insert(tag, mu);
            }
        }
        Ok(MaterialField { values: map, default })
    }

    pub fn mu(&self, tag: i32) -> f64 {
        self.values.get(&tag).copied().unwrap_or(self.default)
    }

    /// `(mu_0, mu_1)`.
    pub fn bounds(&self) -> (f64, f64) {
        self.values
            .values()
            .chain(std::iter::once(&self.default))
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }
}
