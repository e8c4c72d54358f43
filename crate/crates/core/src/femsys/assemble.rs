//! Elementwise assembly. Local matrices are computed in parallel and
//! scattered sequentially in element order, so results do not depend on the
//! thread count.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::solve::SparseCholesky;
use super::sparse::{norm2, CsrMatrix};
use super::{build_dofmap, Continuity, CurrentDensity, DofMap, FemError, MaterialField};
use crate::mesh::Mesh;
use crate::polyspace::maps::{matvec, AffineMap};
use crate::polyspace::poly::grad;
use crate::polyspace::spaces::{reference_space, SpaceKind};
use crate::polyspace::tables::ref_table;

fn scatter(dofmap: &DofMap, locals: &[Vec<f64>], rows_map: &DofMap) -> CsrMatrix {
    let n = dofmap.n_local();
    let mut trip = Vec::new();
    for (t, loc) in locals.iter().enumerate() {
        let rows = rows_map.elem(t);
        let cols = dofmap.elem(t);
        for i in 0..rows.len() {
            let Some(r) = rows_map.free_index(rows[i]) else { continue };
            for j in 0..n {
                let Some(c) = dofmap.free_index(cols[j]) else { continue };
                let v = loc[i * n + j];
                if v != 0.0 {
                    trip.push((r, c, v));
                }
            }
        }
    }
    CsrMatrix::from_triplets(rows_map.n_free(), dofmap.n_free(), trip)
}

/// `(mu^{-1} curl u, curl w)` on the free dofs of a Nédélec map.
pub fn assemble_curlcurl(mesh: &Mesh, maps: &[AffineMap], dofmap: &DofMap, mu: &MaterialField) -> Result<CsrMatrix, FemError> {
    let k = dofmap.degree;
    let tab = ref_table(SpaceKind::Nedelec1Tet, k, 2 * k)?;
    let n = dofmap.n_local();
    let locals: Vec<Vec<f64>> = (0..mesh.n_tets())
        .into_par_iter()
        .map(|t| {
            let m = &maps[t];
            let s = m.abs_det() / (m.det * m.det * mu.mu(mesh.tag(t)));
            let jc: Vec<Vec<[f64; 3]>> = tab
                .derivs
                .values
                .iter()
                .map(|c| c.iter().map(|v| matvec(&m.jac, *v)).collect())
                .collect();
            let mut loc = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..=i {
                    let v: f64 = (0..tab.rule.len())
                        .map(|q| {
                            let (a, b) = (jc[i][q], jc[j][q]);
                            tab.rule.weights[q] * (a[0] * b[0] + a[1] * b[1] + a[2] * b[2])
                        })
                        .sum::<f64>()
                        * s;
                    loc[i * n + j] = v;
                    loc[j * n + i] = v;
                }
            }
            loc
        })
        .collect();
    Ok(scatter(dofmap, &locals, dofmap))
}

/// `(u, w)` on the free dofs of a Nédélec map.
pub fn assemble_mass(mesh: &Mesh, maps: &[AffineMap], dofmap: &DofMap) -> Result<CsrMatrix, FemError> {
    let k = dofmap.degree;
    let tab = ref_table(SpaceKind::Nedelec1Tet, k, 2 * k)?;
    let n = dofmap.n_local();
    let locals: Vec<Vec<f64>> = (0..mesh.n_tets())
        .into_par_iter()
        .map(|t| {
            let m = &maps[t];
            let cov = m.covariant();
            let phys: Vec<Vec<[f64; 3]>> = tab
                .values
                .values
                .iter()
                .map(|c| c.iter().map(|v| matvec(&cov, *v)).collect())
                .collect();
            let mut loc = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..=i {
                    let v: f64 = (0..tab.rule.len())
                        .map(|q| {
                            let (a, b) = (phys[i][q], phys[j][q]);
                            tab.rule.weights[q] * (a[0] * b[0] + a[1] * b[1] + a[2] * b[2])
                        })
                        .sum::<f64>()
                        * m.abs_det();
                    loc[i * n + j] = v;
                    loc[j * n + i] = v;
                }
            }
            loc
        })
        .collect();
    Ok(scatter(dofmap, &locals, dofmap))
}

/// `(j, w)` on the free dofs of a Nédélec map.
pub fn assemble_rhs(mesh: &Mesh, maps: &[AffineMap], dofmap: &DofMap, j: &CurrentDensity) -> Result<Vec<f64>, FemError> {
    let k = dofmap.degree;
    let tab = ref_table(SpaceKind::Nedelec1Tet, k, j.exactness(k))?;
    let n = dofmap.n_local();
    let locals: Vec<Vec<f64>> = (0..mesh.n_tets())
        .into_par_iter()
        .map(|t| {
            let m = &maps[t];
            let cov = m.covariant();
            let jq: Vec<[f64; 3]> = tab.rule.points.iter().map(|&p| j.eval(t, m, p)).collect();
            (0..n)
                .map(|i| {
                    (0..tab.rule.len())
                        .map(|q| {
                            let phi = matvec(&cov, tab.values.values[i][q]);
                            let jv = jq[q];
                            tab.rule.weights[q] * (phi[0] * jv[0] + phi[1] * jv[1] + phi[2] * jv[2])
                        })
                        .sum::<f64>()
                        * m.abs_det()
                })
                .collect()
        })
        .collect();
    let mut rhs = vec![0.0; dofmap.n_free()];
    for (t, loc) in locals.iter().enumerate() {
        for (i, &d) in dofmap.elem(t).iter().enumerate() {
            if let Some(r) = dofmap.free_index(d) {
                rhs[r] += loc[i];
            }
        }
    }
    Ok(rhs)
}

/// Discrete gradient `G: P_{k,0} -> R_{k,0}` between free dofs. The local
/// matrix holds the Nédélec dofs of reference Lagrange gradients and is the
/// same on every element.
pub fn assemble_gradient(mesh: &Mesh, nedelec: &DofMap, lagrange: &DofMap) -> Result<CsrMatrix, FemError> {
    let ned = reference_space(SpaceKind::Nedelec1Tet, nedelec.degree)?;
    let lag = reference_space(SpaceKind::PScalarTet, lagrange.degree)?;
    let local: Vec<Vec<f64>> = lag.basis().iter().map(|b| ned.interpolate_poly(&grad(&b.0[0]))).collect();
    let mut entries: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for t in 0..mesh.n_tets() {
        let rows = nedelec.elem(t);
        let cols = lagrange.elem(t);
        for (a, col) in local.iter().enumerate() {
            let Some(c) = lagrange.free_index(cols[a]) else { continue };
            for (i, &v) in col.iter().enumerate() {
                let Some(r) = nedelec.free_index(rows[i]) else { continue };
                if v.abs() > 1e-13 {
                    entries.insert((r, c), v);
                }
            }
        }
    }
    Ok(CsrMatrix::from_triplets(
        nedelec.n_free(),
        lagrange.n_free(),
        entries.into_iter().map(|((r, c), v)| (r, c, v)).collect(),
    ))
}

/// Everything needed to solve for `u_h` in `R_{k,0}`.
#[derive(Debug)]
pub struct MagnetostaticSystem {
    pub dofmap: DofMap,
    pub lagrange: DofMap,
    pub a: CsrMatrix,
    pub mass: CsrMatrix,
    pub grad: CsrMatrix,
}

impl MagnetostaticSystem {
    pub fn new(mesh: &Mesh, maps: &[AffineMap], degree: usize, mu: &MaterialField) -> Result<Self, FemError> {
        let dofmap = build_dofmap(mesh, SpaceKind::Nedelec1Tet, degree, Continuity::Conforming, true)?;
        let lagrange = build_dofmap(mesh, SpaceKind::PScalarTet, degree, Continuity::Conforming, true)?;
        let a = assemble_curlcurl(mesh, maps, &dofmap, mu)?;
        let mass = assemble_mass(mesh, maps, &dofmap)?;
        let grad = assemble_gradient(mesh, &dofmap, &lagrange)?;
        Ok(MagnetostaticSystem {
            dofmap,
            lagrange,
            a,
            mass,
            grad,
        })
    }
}

/// `r' = r - G q` with `G^T G q = G^T r`, so that `G^T r' = 0`.
pub fn gradient_correction(grad: &CsrMatrix, rhs: &[f64]) -> Result<Vec<f64>, FemError> {
    if grad.ncols() == 0 || norm2(rhs) == 0.0 {
        return Ok(rhs.to_vec());
    }
    let gtg = grad.gram();
    let chol = SparseCholesky::new(&gtg).map_err(|e| FemError::ProjectionSolveFailure(e.to_string()))?;
    let gtr = grad.tr_matvec(rhs);
    let mut q = chol.solve(&gtr);
    // One refinement step keeps G^T r' at roundoff level.
    let res: Vec<f64> = gtr.iter().zip(gtg.matvec(&q)).map(|(a, b)| a - b).collect();
    for (qi, d) in q.iter_mut().zip(chol.solve(&res)) {
        *qi += d;
    }
    let gq = grad.matvec(&q);
    let out: Vec<f64> = rhs.iter().zip(&gq).map(|(r, g)| r - g).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(FemError::ProjectionSolveFailure("non-finite correction".into()));
    }
    Ok(out)
}
