//! Energy errors against a closed-form or a reference field.

use rayon::prelude::*;

use crate::femsys::{BrokenField, MaterialField, VectorFn};
use crate::mesh::{dot, Mesh};
use crate::polyspace::maps::AffineMap;
use crate::polyspace::quadrature::{quadrature, Domain, MAX_EXACTNESS};

/// `||mu^{1/2}(H - field)||` per tet, with `H` a closed form, by quadrature
/// of the given exactness (capped at the largest available rule).
pub fn compute_error(
    mesh: &Mesh,
    maps: &[AffineMap],
    mu: &MaterialField,
    field: &BrokenField,
    exact: &VectorFn,
    exactness: usize,
) -> (f64, Vec<f64>) {
    let rule = quadrature(Domain::Tetrahedron, exactness.min(MAX_EXACTNESS)).expect("tet rule");
    let per: Vec<f64> = (0..mesh.n_tets())
        .into_par_iter()
        .map(|t| {
            let m = &maps[t];
            let s: f64 = rule
                .points
                .iter()
                .zip(&rule.weights)
                .map(|(p, w)| {
                    let a = exact(m.to_physical(*p));
                    let b = field.eval(t, *p);
                    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
                    w * dot(d, d)
                })
                .sum();
            (mu.mu(mesh.tag(t)) * s * m.abs_det()).sqrt()
        })
        .collect();
    (total(&per), per)
}

fn total(per: &[f64]) -> f64 {
    per.iter().map(|e| e * e).sum::<f64>().sqrt()
}

/// `||mu^{1/2}(H_ref - H_l)||` where `H_ref` lives on a refinement of the
/// level mesh and `ancestor[t]` is the level tet containing reference tet `t`.
/// Returns the total and the squared contributions per level tet.
#[allow(clippy::too_many_arguments)]
pub fn reference_error(
    fine: &Mesh,
    fine_maps: &[AffineMap],
    fine_field: &BrokenField,
    ancestor: &[usize],
    coarse_maps: &[AffineMap],
    coarse_field: &BrokenField,
    mu: &MaterialField,
    exactness: usize,
) -> (f64, Vec<f64>) {
    let rule = quadrature(Domain::Tetrahedron, exactness.min(MAX_EXACTNESS)).expect("tet rule");
    let fine_sq: Vec<f64> = (0..fine.n_tets())
        .into_par_iter()
        .map(|t| {
            let m = &fine_maps[t];
            let c = ancestor[t];
            let s: f64 = rule
                .points
                .iter()
                .zip(&rule.weights)
                .map(|(p, w)| {
                    let x = m.to_physical(*p);
                    let a = fine_field.eval(t, *p);
                    let b = coarse_field.eval(c, coarse_maps[c].to_reference(x));
                    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
                    w * dot(d, d)
                })
                .sum();
            mu.mu(fine.tag(t)) * s * m.abs_det()
        })
        .collect();
    let mut per = vec![0.0; coarse_maps.len()];
    for (t, v) in fine_sq.iter().enumerate() {
        per[ancestor[t]] += v;
    }
    let tot = per.iter().sum::<f64>().sqrt();
    (tot, per.into_iter().map(f64::sqrt).collect())
}

/// Ancestor in `meshes[level]` of every tet of the last mesh, following
/// `Mesh::parent` through each refinement.
pub fn ancestors(meshes: &[Mesh], level: usize) -> Vec<usize> {
    let last = meshes.last().expect("non-empty");
    let mut anc: Vec<usize> = (0..last.n_tets()).collect();
    for l in (level + 1..meshes.len()).rev() {
        let m = &meshes[l];
        anc = anc.into_iter().map(|t| m.parent(t).expect("refined mesh has parents")).collect();
    }
    anc
}
