//! Step 4: the corrected field `H~ = H^ + grad phi`, the estimator, and an
//! independent check of the equilibrium `curl(H_h + H~) = j`.

use rayon::prelude::*;
use serde::Serialize;

use super::faces::face_geometry;
use super::{EdgeCompatibility, ElementCorrection, EquilibrationError, FaceMultiplier, NodalPotential};
use crate::femsys::{phys_curl, phys_grad, BrokenField, CurrentDensity, MaterialField};
use crate::mesh::{cross, dot, Mesh};
use crate::polyspace::maps::AffineMap;
use crate::polyspace::quadrature::{quadrature, Domain, MAX_EXACTNESS};

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    /// `(sum_T ||j - curl H_h - curl H^||_T^2)^{1/2}`.
    pub oscillation: f64,
    pub max_face_residual: f64,
    pub max_face_divergence: f64,
    /// Edge residuals relative to the largest multiplier value.
    pub max_edge_residual: f64,
    pub max_edge_variation: f64,
    pub lambda_scale: f64,
    pub max_patch_residual: f64,
    pub n_multipliers: usize,
    pub n_nodes: usize,
}

#[derive(Clone, Debug)]
pub struct EstimatorResult {
    pub eta_t: Vec<f64>,
    pub eta: f64,
    pub h_tilde: BrokenField,
    pub diagnostics: Diagnostics,
}

pub fn step4_estimator(
    mesh: &Mesh,
    maps: &[AffineMap],
    mu: &MaterialField,
    correction: &ElementCorrection,
    potential: &NodalPotential,
    multipliers: &FaceMultiplier,
    edges: &EdgeCompatibility,
) -> EstimatorResult {
    let elems = (0..mesh.n_tets())
        .into_par_iter()
        .map(|t| correction.h_hat.elems[t].add(&phys_grad(&potential.phi[t], &maps[t].jac_inv)))
        .collect();
    let h_tilde = BrokenField { elems };
    let eta_t = h_tilde.norms(maps, &|t| mu.mu(mesh.tag(t)));
    let eta = eta_t.iter().map(|e| e * e).sum::<f64>().sqrt();
    let (re, rv) = edges.relative();
    EstimatorResult {
        eta_t,
        eta,
        h_tilde,
        diagnostics: Diagnostics {
            oscillation: correction.total_oscillation(),
            max_face_residual: multipliers.max_residual(),
            max_face_divergence: multipliers.max_divergence(),
            max_edge_residual: re,
            max_edge_variation: rv,
            lambda_scale: edges.lambda_scale,
            max_patch_residual: potential.max_patch_residual,
            n_multipliers: multipliers.n_multipliers(),
            n_nodes: potential.n_nodes,
        },
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquilibriumReport {
    /// `||curl(H_h + H~) - j||_T` per tet.
    pub element: Vec<f64>,
    /// `||[H_h + H~]_t||_f` per face (zero on the boundary).
    pub face: Vec<f64>,
    /// Largest normalised `<j - curl F, grad psi>` over interior vertex hats.
    pub orthogonality: f64,
    /// `||j||_Omega + ||H_h||_Omega / h_max`.
    pub scale: f64,
}

impl EquilibriumReport {
    pub fn max_element(&self) -> f64 {
        self.element.iter().cloned().fold(0.0, f64::max) / self.scale
    }

    pub fn max_face(&self) -> f64 {
        self.face.iter().cloned().fold(0.0, f64::max) / self.scale
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.max_element() <= tol && self.max_face() <= tol && self.orthogonality <= tol
    }
}

fn tangential_jump(mesh: &Mesh, maps: &[AffineMap], field: &BrokenField, f: usize, x: [f64; 3]) -> [f64; 3] {
    let face = mesh.face(f);
    let tm = face.minus.expect("internal face");
    let a = field.eval(face.plus, maps[face.plus].to_reference(x));
    let b = field.eval(tm, maps[tm].to_reference(x));
    cross(mesh.normal(f), std::array::from_fn(|i| a[i] - b[i]))
}

/// Residuals of the equilibrium, without judging them.
pub fn equilibrium_report(
    mesh: &Mesh,
    maps: &[AffineMap],
    j: &CurrentDensity,
    hh: &BrokenField,
    correction: &ElementCorrection,
    result: &EstimatorResult,
) -> EquilibriumReport {
    let total = hh.add(&result.h_tilde);
    let corrected = hh.add(&correction.h_hat);
    let deg = total.degree();
    let ex = j.exactness(deg).max(2 * deg).min(MAX_EXACTNESS);
    let rule = quadrature(Domain::Tetrahedron, ex).expect("tet rule");
    let frule = quadrature(Domain::Triangle, (2 * deg).min(MAX_EXACTNESS)).expect("tri rule");

    // Per tet: ||curl(total) - j||, ||j||^2, ||H_h||^2 and int_T (j - curl F).
    let per_tet: Vec<(f64, f64, f64, [f64; 3])> = (0..mesh.n_tets())
        .into_par_iter()
        .map(|t| {
            let m = &maps[t];
            let ct = phys_curl(&total.elems[t], &m.jac_inv);
            let cf = phys_curl(&corrected.elems[t], &m.jac_inv);
            let (mut r2, mut j2, mut h2) = (0.0, 0.0, 0.0);
            let mut a = [0.0; 3];
            for (p, w) in rule.points.iter().zip(&rule.weights) {
                let w = w * m.abs_det();
                let jv = j.eval(t, m, *p);
                let c = ct.eval(*p);
                let d: [f64; 3] = std::array::from_fn(|i| c[i] - jv[i]);
                let h = hh.eval(t, *p);
                let e = cf.eval(*p);
                r2 += w * dot(d, d);
                j2 += w * dot(jv, jv);
                h2 += w * dot(h, h);
                for i in 0..3 {
                    a[i] += w * (jv[i] - e[i]);
                }
            }
            (r2.sqrt(), j2, h2, a)
        })
        .collect();

    // Per face: ||[total]_t|| and int_f n x [F].
    let per_face: Vec<(f64, [f64; 3])> = (0..mesh.n_faces())
        .into_par_iter()
        .map(|f| {
            if mesh.face(f).is_boundary() {
                return (0.0, [0.0; 3]);
            }
            let g = face_geometry(mesh, f);
            let mut r2 = 0.0;
            let mut b = [0.0; 3];
            for (p, w) in frule.points.iter().zip(&frule.weights) {
                let w = w * g.jac;
                let x = g.point(p[0], p[1]);
                let d = tangential_jump(mesh, maps, &total, f, x);
                r2 += w * dot(d, d);
                let e = tangential_jump(mesh, maps, &corrected, f, x);
                for i in 0..3 {
                    b[i] += w * e[i];
                }
            }
            (r2.sqrt(), b)
        })
        .collect();

    let jn = per_tet.iter().map(|v| v.1).sum::<f64>().sqrt();
    let hn = per_tet.iter().map(|v| v.2).sum::<f64>().sqrt();
    let scale = (jn + hn / mesh.h_max()).max(f64::MIN_POSITIVE);

    // Gradient of the hat function of sorted local vertex `m` on tet `t`.
    let hat_grad = |t: usize, m: usize| -> [f64; 3] {
        let ji = &maps[t].jac_inv;
        if m == 0 {
            std::array::from_fn(|i| -(ji[0][i] + ji[1][i] + ji[2][i]))
        } else {
            ji[m - 1]
        }
    };
    let orthogonality = (0..mesh.n_vertices())
        .into_par_iter()
        .filter(|&v| !mesh.is_boundary_vertex(v))
        .map(|v| {
            let mut s = 0.0;
            let mut g2 = 0.0;
            let mut faces = Vec::new();
            for &t in mesh.vertex_tets(v) {
                let m = mesh.sorted_tet(t).iter().position(|&u| u == v).expect("vertex of tet");
                let g = hat_grad(t, m);
                s += dot(per_tet[t].3, g);
                g2 += dot(g, g) * maps[t].volume();
                faces.extend(mesh.tet_faces(t).into_iter().filter(|&f| mesh.face(f).verts.contains(&v)));
            }
            faces.sort_unstable();
            faces.dedup();
            for f in faces {
                if mesh.face(f).is_boundary() {
                    continue;
                }
                let t = mesh.face(f).plus;
                let m = mesh.sorted_tet(t).iter().position(|&u| u == v).expect("vertex of tet");
                s += dot(per_face[f].1, hat_grad(t, m));
            }
            s.abs() / (scale * g2.sqrt())
        })
        .reduce(|| 0.0, f64::max);

    EquilibriumReport {
        element: per_tet.iter().map(|v| v.0).collect(),
        face: per_face.iter().map(|v| v.0).collect(),
        orthogonality,
        scale,
    }
}

/// Relative tolerance of the equilibrium check.
pub const EQUILIBRIUM_TOL: f64 = 1e-9;

/// Fails with `EquilibriumViolated` unless all three residuals are below
/// `EQUILIBRIUM_TOL` relative to the report scale.
pub fn verify_equilibrium(
    mesh: &Mesh,
    maps: &[AffineMap],
    j: &CurrentDensity,
    hh: &BrokenField,
    correction: &ElementCorrection,
    result: &EstimatorResult,
) -> Result<EquilibriumReport, EquilibrationError> {
    let report = equilibrium_report(mesh, maps, j, hh, correction, result);
    if report.holds(EQUILIBRIUM_TOL) {
        Ok(report)
    } else {
        Err(EquilibrationError::EquilibriumViolated {
            element: report.max_element(),
            face: report.max_face().max(report.orthogonality),
        })
    }
}
