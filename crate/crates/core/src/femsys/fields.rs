//! Elementwise polynomial fields and the discrete magnetic field.

use rayon::prelude::*;

use super::{DofMap, MaterialField};
use crate::mesh::Mesh;
use crate::polyspace::maps::{AffineMap, Mat3};
use crate::polyspace::poly::{monomial_table, Poly, VecPoly};
use crate::polyspace::quadrature::{quadrature, Domain};
use crate::polyspace::spaces::reference_space;
use crate::polyspace::SpaceError;

/// Element maps onto each tet's sorted vertices.
pub fn element_maps(mesh: &Mesh) -> Vec<AffineMap> {
    (0..mesh.n_tets())
        .map(|t| AffineMap::new(mesh.sorted_coords(t)).expect("mesh tets are non-degenerate"))
        .collect()
}

/// `d/dx_m` of a polynomial written in reference variables.
pub fn phys_deriv(p: &Poly, jac_inv: &Mat3, m: usize) -> Poly {
    let mut out = Poly::zero(p.deg().saturating_sub(1));
    for l in 0..3 {
        let c = jac_inv[l][m];
        if c != 0.0 {
            out.axpy(c, &p.deriv(l));
        }
    }
    out
}

pub fn phys_grad(p: &Poly, jac_inv: &Mat3) -> VecPoly {
    VecPoly([phys_deriv(p, jac_inv, 0), phys_deriv(p, jac_inv, 1), phys_deriv(p, jac_inv, 2)])
}

pub fn phys_curl(f: &VecPoly, jac_inv: &Mat3) -> VecPoly {
    let d = |i: usize, m: usize| phys_deriv(&f.0[i], jac_inv, m);
    VecPoly([
        d(2, 1).add(&d(1, 2).scale(-1.0)),
        d(0, 2).add(&d(2, 0).scale(-1.0)),
        d(1, 0).add(&d(0, 1).scale(-1.0)),
    ])
}

/// A vector field that is polynomial on each tet: physical components as
/// polynomials in the element's reference coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct BrokenField {
    pub elems: Vec<VecPoly>,
}

impl BrokenField {
    pub fn zeros(n_tets: usize) -> Self {
        BrokenField {
            elems: vec![VecPoly::zero(0); n_tets],
        }
    }

    pub fn degree(&self) -> usize {
        self.elems.iter().map(VecPoly::deg).max().unwrap_or(0)
    }

    pub fn eval(&self, t: usize, xh: [f64; 3]) -> [f64; 3] {
        self.elems[t].eval(xh)
    }

    pub fn add(&self, other: &BrokenField) -> BrokenField {
        BrokenField {
            elems: self.elems.iter().zip(&other.elems).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn curl(&self, maps: &[AffineMap]) -> BrokenField {
        BrokenField {
            elems: self
                .elems
                .iter()
                .zip(maps)
                .map(|(f, m)| phys_curl(f, &m.jac_inv))
                .collect(),
        }
    }

    /// `||w^{1/2} F||_T` per tet, exact for polynomial fields.
    pub fn norms(&self, maps: &[AffineMap], weight: &(dyn Fn(usize) -> f64 + Sync)) -> Vec<f64> {
        let deg = self.degree();
        let rule = quadrature(Domain::Tetrahedron, (2 * deg).min(12)).expect("rule");
        let table = monomial_table(deg, &rule.points);
        (0..self.elems.len())
            .into_par_iter()
            .map(|t| {
                let vals = self.elems[t].eval_table(&table);
                let s: f64 = vals
                    .iter()
                    .zip(&rule.weights)
                    .map(|(v, w)| w * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]))
                    .sum();
                (weight(t) * s * maps[t].abs_det()).sqrt()
            })
            .collect()
    }
}

/// Global coefficient vector of a conforming or broken space.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldCoefficients {
    pub values: Vec<f64>,
}

impl FieldCoefficients {
    pub fn new(dofmap: &DofMap, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), dofmap.n_global(), "coefficient vector length");
        FieldCoefficients { values }
    }

    pub fn local(&self, dofmap: &DofMap, t: usize) -> Vec<f64> {
        dofmap.elem(t).iter().map(|&d| self.values[d]).collect()
    }
}

/// `H_h = mu^{-1} curl u_h` and `j_h = curl H_h` per tet.
pub fn compute_hh(
    mesh: &Mesh,
    maps: &[AffineMap],
    dofmap: &DofMap,
    u: &FieldCoefficients,
    mu: &MaterialField,
) -> Result<(BrokenField, BrokenField), SpaceError> {
    let space = reference_space(dofmap.kind, dofmap.degree)?;
    let curls: Vec<VecPoly> = space.basis().iter().map(VecPoly::curl).collect();
    let h: Vec<VecPoly> = (0..mesh.n_tets())
        .into_par_iter()
        .map(|t| {
            let c = u.local(dofmap, t);
            let mut ch = VecPoly::zero(dofmap.degree - 1);
            for (ci, b) in c.iter().zip(&curls) {
                if *ci != 0.0 {
                    ch.axpy(*ci, b);
                }
            }
            let m = &maps[t];
            let s = 1.0 / (mu.mu(mesh.tag(t)) * m.det);
            let mut jt = m.jac;
            for row in jt.iter_mut() {
                for v in row.iter_mut() {
                    *v *= s;
                }
            }
            ch.transform(&jt)
        })
        .collect();
    let hh = BrokenField { elems: h };
    let jh = hh.curl(maps);
    Ok((hh, jh))
}
