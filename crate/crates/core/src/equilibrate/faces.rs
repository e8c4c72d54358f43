//! Step 2: face multipliers `lambda_f` with `-n_f x grad_f lambda_f = j^_f`,
//! and the edge compatibility residuals `r_e`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::element::solve_dense;
use super::{ElementCorrection, EquilibrationError, FaceSolver};
use crate::femsys::BrokenField;
use crate::mesh::{cross, dot, edge_face_normals, norm, Mesh};
use crate::polyspace::lagrange::lagrange_nodes_tri;
use crate::polyspace::maps::AffineMap;
use crate::polyspace::poly::{monomial_exponents_2d, Poly};
use crate::polyspace::quadrature::{quadrature, Domain};
use crate::polyspace::spaces::{lstsq, reference_space, SpaceKind};

/// Affine parametrisation `x = origin + s e1 + t e2` of a face from its
/// lowest vertex id.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FaceGeometry {
    pub origin: [f64; 3],
    pub e1: [f64; 3],
    pub e2: [f64; 3],
    pub normal: [f64; 3],
    /// Inverse of the metric `E^T E`.
    pub ginv: [[f64; 2]; 2],
    /// Area element `|e1 x e2|`.
    pub jac: f64,
}

impl FaceGeometry {
    pub fn point(&self, s: f64, t: f64) -> [f64; 3] {
        std::array::from_fn(|i| self.origin[i] + s * self.e1[i] + t * self.e2[i])
    }

    /// Surface gradient from the parameter derivatives `(d/ds, d/dt)`.
    pub fn surface_grad(&self, ds: f64, dt: f64) -> [f64; 3] {
        let a = self.ginv[0][0] * ds + self.ginv[0][1] * dt;
        let b = self.ginv[1][0] * ds + self.ginv[1][1] * dt;
        std::array::from_fn(|i| a * self.e1[i] + b * self.e2[i])
    }

    /// `E^T v`.
    pub fn covariant(&self, v: [f64; 3]) -> [f64; 2] {
        [dot(self.e1, v), dot(self.e2, v)]
    }
}

pub fn face_geometry(mesh: &Mesh, f: usize) -> FaceGeometry {
    let [a, b, c] = mesh.face(f).verts.map(|v| mesh.vertex(v));
    let e1: [f64; 3] = std::array::from_fn(|i| b[i] - a[i]);
    let e2: [f64; 3] = std::array::from_fn(|i| c[i] - a[i]);
    let (g11, g12, g22) = (dot(e1, e1), dot(e1, e2), dot(e2, e2));
    let det = g11 * g22 - g12 * g12;
    FaceGeometry {
        origin: a,
        e1,
        e2,
        normal: mesh.normal(f),
        ginv: [[g22 / det, -g12 / det], [-g12 / det, g11 / det]],
        jac: norm(cross(e1, e2)),
    }
}

#[derive(Clone, Debug)]
pub struct FaceMultiplier {
    pub aux_degree: usize,
    /// Values of `lambda_f` at the face Lagrange nodes (`None` on the boundary).
    pub lambda: Vec<Option<Vec<f64>>>,
    /// `lambda_f` as a polynomial in the face parameters `(s, t)`.
    pub poly: Vec<Option<Poly>>,
    /// `||n_f x grad_f lambda_f + j^_f||_f`.
    pub residual: Vec<f64>,
    /// `||div_f j^_f||_f`.
    pub divergence: Vec<f64>,
    /// `||j^_f||_f`.
    pub jump: Vec<f64>,
}

impl FaceMultiplier {
    pub fn n_multipliers(&self) -> usize {
        self.lambda.iter().filter(|l| l.is_some()).count()
    }

    /// `lambda_f` at face parameters `(s, t)`; zero on boundary faces.
    pub fn eval(&self, f: usize, s: f64, t: f64) -> f64 {
        self.poly[f].as_ref().map_or(0.0, |p| p.eval([s, t, 0.0]))
    }

    /// Nodal value at the face node with integer weights on the face's
    /// sorted vertices.
    pub fn node_value(&self, f: usize, weights: [usize; 3]) -> f64 {
        let Some(vals) = &self.lambda[f] else { return 0.0 };
        let idx = lagrange_nodes_tri(self.aux_degree)
            .iter()
            .position(|n| *n == weights)
            .expect("weights of a face node");
        vals[idx]
    }

    /// Largest nodal `|lambda|` over all faces.
    pub fn max_abs(&self) -> f64 {
        self.lambda
            .iter()
            .flatten()
            .flat_map(|v| v.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn max_residual(&self) -> f64 {
        self.residual.iter().cloned().fold(0.0, f64::max)
    }

    pub fn max_divergence(&self) -> f64 {
        self.divergence.iter().cloned().fold(0.0, f64::max)
    }
}

/// Tangential data of a face: `g = n x j^_f`, the target for `grad_f lambda`.
pub(crate) fn face_target(
    mesh: &Mesh,
    maps: &[AffineMap],
    field: &BrokenField,
    f: usize,
    geom: &FaceGeometry,
    s: f64,
    t: f64,
) -> [f64; 3] {
    let face = mesh.face(f);
    let x = geom.point(s, t);
    let tp = face.plus;
    let tm = face.minus.expect("internal face");
    let fp = field.eval(tp, maps[tp].to_reference(x));
    let fm = field.eval(tm, maps[tm].to_reference(x));
    let d: [f64; 3] = std::array::from_fn(|i| fp[i] - fm[i]);
    let n = geom.normal;
    let dn = dot(d, n);
    // n x (n x d) = -(d - n (n.d))
    std::array::from_fn(|i| -(d[i] - n[i] * dn))
}

struct FaceSolution {
    lambda: Vec<f64>,
    poly: Poly,
    residual: f64,
    divergence: f64,
    jump: f64,
}

/// Solves the face problems for the corrected field `H_h + H^`.
pub fn step2_face_multipliers(
    mesh: &Mesh,
    maps: &[AffineMap],
    hh: &BrokenField,
    correction: &ElementCorrection,
    solver: FaceSolver,
    strict: bool,
) -> Result<FaceMultiplier, EquilibrationError> {
    let kp = correction.aux_degree;
    let field = hh.add(&correction.h_hat);
    let tri = reference_space(SpaceKind::PScalarTri, kp)?;
    let nb = tri.dim();
    let basis: Vec<Poly> = (0..nb).map(|i| tri.scalar(i).clone()).collect();
    let ds: Vec<Poly> = basis.iter().map(|b| b.deriv(0)).collect();
    let dt: Vec<Poly> = basis.iter().map(|b| b.deriv(1)).collect();
    let nodes: Vec<[f64; 2]> = lagrange_nodes_tri(kp)
        .iter()
        .map(|n| [n[1] as f64 / kp as f64, n[2] as f64 / kp as f64])
        .collect();
    let rule = quadrature(Domain::Triangle, 2 * kp)?;
    let bq: Vec<Vec<f64>> = basis.iter().map(|b| rule.points.iter().map(|p| b.eval(*p)).collect()).collect();
    let dsq: Vec<Vec<f64>> = ds.iter().map(|b| rule.points.iter().map(|p| b.eval(*p)).collect()).collect();
    let dtq: Vec<Vec<f64>> = dt.iter().map(|b| rule.points.iter().map(|p| b.eval(*p)).collect()).collect();
    let monos = monomial_exponents_2d(kp);

    let solved: Vec<Result<Option<FaceSolution>, EquilibrationError>> = (0..mesh.n_faces())
        .into_par_iter()
        .map(|f| {
            if mesh.face(f).is_boundary() {
                return Ok(None);
            }
            let geom = face_geometry(mesh, f);
            let area = 0.5 * geom.jac;
            let wq: Vec<f64> = rule.weights.iter().map(|w| w * geom.jac).collect();
            let gq: Vec<[f64; 3]> = rule
                .points
                .iter()
                .map(|p| face_target(mesh, maps, &field, f, &geom, p[0], p[1]))
                .collect();
            // Exact nodal representation of the covariant components of g.
            let gn: Vec<[f64; 2]> = nodes
                .iter()
                .map(|n| geom.covariant(face_target(mesh, maps, &field, f, &geom, n[0], n[1])))
                .collect();
            let mut p_poly = Poly::zero(kp);
            let mut q_poly = Poly::zero(kp);
            for a in 0..nb {
                p_poly.axpy(gn[a][0], &basis[a]);
                q_poly.axpy(gn[a][1], &basis[a]);
            }
            let mean: Vec<f64> = (0..nb).map(|a| (0..rule.len()).map(|q| wq[q] * bq[a][q]).sum::<f64>() / area).collect();

            let lambda: Vec<f64> = match solver {
                FaceSolver::Weak => {
                    let n = nb + 1;
                    let mut m = DMatrix::<f64>::zeros(n, n);
                    let mut r = DVector::<f64>::zeros(n);
                    for q in 0..rule.len() {
                        let cg = geom.covariant(gq[q]);
                        for a in 0..nb {
                            let ga = [
                                geom.ginv[0][0] * dsq[a][q] + geom.ginv[0][1] * dtq[a][q],
                                geom.ginv[1][0] * dsq[a][q] + geom.ginv[1][1] * dtq[a][q],
                            ];
                            r[a] += wq[q] * (ga[0] * cg[0] + ga[1] * cg[1]);
                            for b in 0..nb {
                                m[(a, b)] += wq[q] * (ga[0] * dsq[b][q] + ga[1] * dtq[b][q]);
                            }
                        }
                    }
                    for a in 0..nb {
                        m[(a, nb)] = mean[a];
                        m[(nb, a)] = mean[a];
                    }
                    let sol = solve_dense(m, &r).ok_or(EquilibrationError::FaceSolveSingular(f))?;
                    sol.iter().take(nb).copied().collect()
                }
                FaceSolver::Strong => {
                    let rows = 2 * monos.len() + 1;
                    let mut m = DMatrix::<f64>::zeros(rows, nb);
                    let mut r = DVector::<f64>::zeros(rows);
                    for (i, e) in monos.iter().enumerate() {
                        for a in 0..nb {
                            m[(2 * i, a)] = ds[a].coeff(*e);
                            m[(2 * i + 1, a)] = dt[a].coeff(*e);
                        }
                        r[2 * i] = p_poly.coeff(*e);
                        r[2 * i + 1] = q_poly.coeff(*e);
                    }
                    for a in 0..nb {
                        m[(rows - 1, a)] = mean[a];
                    }
                    lstsq(&m, &r).iter().copied().collect()
                }
            };
            let mut poly = Poly::zero(kp);
            for a in 0..nb {
                poly.axpy(lambda[a], &basis[a]);
            }
            let mut res2 = 0.0;
            let mut jump2 = 0.0;
            for q in 0..rule.len() {
                let ls: f64 = (0..nb).map(|a| lambda[a] * dsq[a][q]).sum();
                let lt: f64 = (0..nb).map(|a| lambda[a] * dtq[a][q]).sum();
                let gl = geom.surface_grad(ls, lt);
                let d: [f64; 3] = std::array::from_fn(|i| gl[i] - gq[q][i]);
                res2 += wq[q] * dot(d, d);
                jump2 += wq[q] * dot(gq[q], gq[q]);
            }
            let rot = q_poly.deriv(0).add(&p_poly.deriv(1).scale(-1.0));
            let div2: f64 = (0..rule.len())
                .map(|q| wq[q] * (rot.eval(rule.points[q]) / geom.jac).powi(2))
                .sum();
            Ok(Some(FaceSolution {
                lambda,
                poly,
                residual: res2.sqrt(),
                divergence: div2.sqrt(),
                jump: jump2.sqrt(),
            }))
        })
        .collect();

    let nf = mesh.n_faces();
    let mut out = FaceMultiplier {
        aux_degree: kp,
        lambda: vec![None; nf],
        poly: vec![None; nf],
        residual: vec![0.0; nf],
        divergence: vec![0.0; nf],
        jump: vec![0.0; nf],
    };
    for (f, r) in solved.into_iter().enumerate() {
        if let Some(s) = r? {
            out.lambda[f] = Some(s.lambda);
            out.poly[f] = Some(s.poly);
            out.residual[f] = s.residual;
            out.divergence[f] = s.divergence;
            out.jump[f] = s.jump;
        }
    }
    if strict {
        let max_jump = out.jump.iter().cloned().fold(0.0, f64::max);
        for f in 0..nf {
            let tol = 1e-8 * (out.jump[f] + 1e-6 * max_jump) / mesh.face_diameter(f) + 1e-300;
            if out.divergence[f] > tol {
                return Err(EquilibrationError::FaceIncompatible {
                    face: f,
                    residual: out.divergence[f],
                });
            }
        }
    }
    Ok(out)
}

/// Per-edge summary of `r_e = sum_f (n_f . n_fe) lambda_f` along internal edges.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeCompatibility {
    /// `[max |r_e|, max r_e - min r_e]` at Gauss points; `None` on boundary edges.
    pub per_edge: Vec<Option<[f64; 2]>>,
    pub max_abs: f64,
    pub max_variation: f64,
    /// Largest nodal `|lambda|`, the natural scale for the two maxima.
    pub lambda_scale: f64,
}

impl EdgeCompatibility {
    /// `(max |r_e|, max variation)` divided by `lambda_scale` (zero if all
    /// multipliers vanish).
    pub fn relative(&self) -> (f64, f64) {
        if self.lambda_scale == 0.0 {
            (self.max_abs, self.max_variation)
        } else {
            (self.max_abs / self.lambda_scale, self.max_variation / self.lambda_scale)
        }
    }
}

/// Values of `r_e` along one internal edge at the parameters `taus`
/// (0 at the lower vertex id).
pub(crate) fn edge_residual(mesh: &Mesh, lambdas: &FaceMultiplier, e: usize, taus: &[f64]) -> Vec<f64> {
    let edge = mesh.edge(e);
    let [a, b] = edge.verts;
    let mut r = vec![0.0; taus.len()];
    for &f in &edge.faces {
        let (_, nfe) = edge_face_normals(mesh, e, f).expect("edge face");
        let sign = dot(mesh.normal(f), nfe);
        let fv = mesh.face(f).verts;
        for (i, &tau) in taus.iter().enumerate() {
            let w = |v: usize| {
                if v == a {
                    1.0 - tau
                } else if v == b {
                    tau
                } else {
                    0.0
                }
            };
            r[i] += sign * lambdas.eval(f, w(fv[1]), w(fv[2]));
        }
    }
    r
}

pub fn check_edge_compatibility(mesh: &Mesh, lambdas: &FaceMultiplier) -> EdgeCompatibility {
    let rule = quadrature(Domain::Segment, 2 * lambdas.aux_degree).expect("segment rule");
    let taus: Vec<f64> = rule.points.iter().map(|p| p[0]).collect();
    let per_edge: Vec<Option<[f64; 2]>> = (0..mesh.n_edges())
        .into_par_iter()
        .map(|e| {
            if mesh.edge(e).boundary {
                return None;
            }
            let r = edge_residual(mesh, lambdas, e, &taus);
            let max = r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let min = r.iter().cloned().fold(f64::INFINITY, f64::min);
            let abs = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            Some([abs, max - min])
        })
        .collect();
    let max_abs = per_edge.iter().flatten().fold(0.0f64, |m, v| m.max(v[0]));
    let max_variation = per_edge.iter().flatten().fold(0.0f64, |m, v| m.max(v[1]));
    EdgeCompatibility {
        per_edge,
        max_abs,
        max_variation,
        lambda_scale: lambdas.max_abs(),
    }
}
