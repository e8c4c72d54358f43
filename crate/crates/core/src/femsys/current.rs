//! Current densities: analytic callbacks or elementwise polynomials.

use std::sync::Arc;

use rayon::prelude::*;

use super::fields::BrokenField;
use crate::mesh::Mesh;
use crate::polyspace::maps::{matvec, AffineMap};
use crate::polyspace::quadrature::MAX_EXACTNESS;
use crate::polyspace::spaces::{reference_space, SpaceKind};
use crate::polyspace::SpaceError;

pub type VectorFn = Arc<dyn Fn([f64; 3]) -> [f64; 3] + Send + Sync>;

#[derive(Clone)]
pub enum CurrentDensity {
    /// Closed-form `j(x)`; `poly_degree` is set when `j` is a polynomial.
    Analytic { f: VectorFn, poly_degree: Option<usize> },
    /// Piecewise polynomial, e.g. a Raviart–Thomas interpolant.
    Broken(BrokenField),
}

impl std::fmt::Debug for CurrentDensity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CurrentDensity::Analytic { poly_degree, .. } => write!(f, "Analytic(poly_degree={poly_degree:?})"),
            CurrentDensity::Broken(b) => write!(f, "Broken(degree={})", b.degree()),
        }
    }
}

impl CurrentDensity {
    pub fn analytic(f: impl Fn([f64; 3]) -> [f64; 3] + Send + Sync + 'static) -> Self {
        CurrentDensity::Analytic {
            f: Arc::new(f),
            poly_degree: None,
        }
    }

    pub fn polynomial(f: impl Fn([f64; 3]) -> [f64; 3] + Send + Sync + 'static, degree: usize) -> Self {
        CurrentDensity::Analytic {
            f: Arc::new(f),
            poly_degree: Some(degree),
        }
    }

    pub fn zero() -> Self {
        Self::polynomial(|_| [0.0; 3], 0)
    }

    /// Value on tet `t` at reference point `xh`.
    pub fn eval(&self, t: usize, map: &AffineMap, xh: [f64; 3]) -> [f64; 3] {
        match self {
            CurrentDensity::Analytic { f, .. } => f(map.to_physical(xh)),
            CurrentDensity::Broken(b) => b.eval(t, xh),
        }
    }

    /// Polynomial degree, if `j` is piecewise polynomial.
    pub fn poly_degree(&self) -> Option<usize> {
        match self {
            CurrentDensity::Analytic { poly_degree, .. } => *poly_degree,
            CurrentDensity::Broken(b) => Some(b.degree()),
        }
    }

    /// Quadrature exactness for integrating `j` against degree-`k` fields.
    pub fn exactness(&self, k: usize) -> usize {
        let e = match self.poly_degree() {
            Some(d) => (d + k).max(2 * k + 2),
            None => 2 * k + 4,
        };
        e.min(MAX_EXACTNESS)
    }
}

/// Raviart–Thomas interpolant of `j` in broken `D_k'`; face moments are
/// intrinsic to each face, so normal components match across faces.
pub fn project_current(mesh: &Mesh, maps: &[AffineMap], j: &CurrentDensity, aux_degree: usize) -> Result<BrokenField, SpaceError> {
    let space = reference_space(SpaceKind::RtTet, aux_degree)?;
    let ex = j.exactness(aux_degree);
    let elems = (0..mesh.n_tets())
        .into_par_iter()
        .map(|t| {
            let m = &maps[t];
            let pinv = m.piola_inverse();
            let coeffs = space.apply_dofs(&|xh| matvec(&pinv, j.eval(t, m, xh)), ex);
            space.combine(&coeffs).transform(&m.piola())
        })
        .collect();
    Ok(BrokenField { elems })
}
