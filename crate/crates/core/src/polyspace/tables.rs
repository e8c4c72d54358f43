//! Cached basis values at quadrature points.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::quadrature::{quadrature, Domain, QuadratureRule};
use super::spaces::{reference_space, BasisTable, ReferenceSpace, SpaceKind};
use super::SpaceError;

#[derive(Debug)]
pub struct RefTable {
    pub space: Arc<ReferenceSpace>,
    pub rule: Arc<QuadratureRule>,
    pub values: BasisTable,
    /// Curls (Nédélec), gradients (scalar) or divergences (Raviart–Thomas).
    pub derivs: BasisTable,
}

type Cache = Mutex<HashMap<(SpaceKind, usize, usize), Arc<RefTable>>>;

/// Basis and derivative values of a tetrahedral space at the points of the
/// tetrahedral rule of the given exactness.
pub fn ref_table(kind: SpaceKind, degree: usize, exactness: usize) -> Result<Arc<RefTable>, SpaceError> {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().expect("table cache poisoned").get(&(kind, degree, exactness)) {
        return Ok(t.clone());
    }
    let space = reference_space(kind, degree)?;
    let domain = match kind {
        SpaceKind::PScalarTri | SpaceKind::RtTangentialTri => Domain::Triangle,
        _ => Domain::Tetrahedron,
    };
    let rule = quadrature(domain, exactness)?;
    let values = space.eval_basis(&rule.points);
    let derivs = match kind {
        SpaceKind::Nedelec1Tet => space.eval_curl(&rule.points)?,
        SpaceKind::PScalarTet | SpaceKind::PScalarTri => space.eval_grad(&rule.points)?,
        SpaceKind::RtTet | SpaceKind::RtTangentialTri => space.eval_div(&rule.points)?,
    };
    let table = Arc::new(RefTable {
        space,
        rule,
        values,
        derivs,
    });
    cache
        .lock()
        .expect("table cache poisoned")
        .entry((kind, degree, exactness))
        .or_insert(table.clone());
    Ok(table)
}
