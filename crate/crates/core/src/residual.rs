//! Classical residual estimator
//! `mu_h^2 = sum_T h_T^2/k^2 ||j - curl H_h||_T^2 + sum_f h_f/k ||[H_h]_t||_f^2`.

use rayon::prelude::*;
use serde::Serialize;

use crate::equilibrate::face_geometry;
use crate::femsys::{BrokenField, CurrentDensity};
use crate::mesh::{cross, dot, Mesh};
use crate::polyspace::maps::AffineMap;
use crate::polyspace::quadrature::{quadrature, Domain, MAX_EXACTNESS};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualResult {
    /// `h_T^2/k^2 ||j - curl H_h||_T^2` per tet.
    pub volume: Vec<f64>,
    /// `h_f/k ||[H_h]_t||_f^2` per face (zero on the boundary).
    pub face: Vec<f64>,
    /// Per-tet indicator, each face term split evenly between its neighbours.
    pub mu_t: Vec<f64>,
    pub mu: f64,
}

/// `jh` is `curl H_h` per tet, `k` the Nédélec degree.
pub fn compute_residual_estimator(
    mesh: &Mesh,
    maps: &[AffineMap],
    j: &CurrentDensity,
    hh: &BrokenField,
    jh: &BrokenField,
    k: usize,
) -> ResidualResult {
    let kf = k as f64;
    let rule = quadrature(Domain::Tetrahedron, j.exactness(k).max(2 * k).min(MAX_EXACTNESS)).expect("tet rule");
    let volume: Vec<f64> = (0..mesh.n_tets())
        .into_par_iter()
        .map(|t| {
            let m = &maps[t];
            let s: f64 = rule
                .points
                .iter()
                .zip(&rule.weights)
                .map(|(p, w)| {
                    let a = j.eval(t, m, *p);
                    let b = jh.eval(t, *p);
                    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
                    w * dot(d, d)
                })
                .sum();
            let h = mesh.diameter(t);
            h * h / (kf * kf) * s * m.abs_det()
        })
        .collect();

    let frule = quadrature(Domain::Triangle, (2 * k).min(MAX_EXACTNESS)).expect("tri rule");
    let face: Vec<f64> = (0..mesh.n_faces())
        .into_par_iter()
        .map(|f| {
            let fc = mesh.face(f);
            let Some(tm) = fc.minus else { return 0.0 };
            let g = face_geometry(mesh, f);
            let n = g.normal;
            let s: f64 = frule
                .points
                .iter()
                .zip(&frule.weights)
                .map(|(p, w)| {
                    let x = g.point(p[0], p[1]);
                    let a = hh.eval(fc.plus, maps[fc.plus].to_reference(x));
                    let b = hh.eval(tm, maps[tm].to_reference(x));
                    let d = cross(n, [a[0] - b[0], a[1] - b[1], a[2] - b[2]]);
                    w * dot(d, d)
                })
                .sum();
            mesh.face_diameter(f) / kf * s * g.jac
        })
        .collect();

    let mut mu2 = volume.clone();
    for (f, v) in face.iter().enumerate() {
        let fc = mesh.face(f);
        if let Some(tm) = fc.minus {
            mu2[fc.plus] += 0.5 * v;
            mu2[tm] += 0.5 * v;
        }
    }
    let total = volume.iter().sum::<f64>() + face.iter().sum::<f64>();
    ResidualResult {
        volume,
        face,
        mu_t: mu2.into_iter().map(f64::sqrt).collect(),
        mu: total.sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::femsys::{element_maps, phys_grad};
    use crate::mesh::build_mesh;
    use crate::polyspace::poly::{Poly, VecPoly};

    fn two_tets() -> Mesh {
        build_mesh(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 1.0, 1.0]],
            vec![[0, 1, 2, 3], [1, 2, 3, 4]],
            None,
        )
        .unwrap()
    }

    #[test]
    fn constant_jump_gives_closed_form_face_term() {
        let m = two_tets();
        let maps = element_maps(&m);
        let f = m.internal_faces().next().unwrap();
        let c = [0.7, -0.2, 1.1];
        let mut hh = BrokenField::zeros(2);
        hh.elems[m.face(f).plus] = VecPoly(c.map(Poly::constant));
        let jh = BrokenField::zeros(2);
        for k in 1..=3 {
            let r = compute_residual_estimator(&m, &maps, &CurrentDensity::zero(), &hh, &jh, k);
            let n = m.normal(f);
            let g = cross(n, c);
            let expect = m.face_diameter(f) / k as f64 * dot(g, g) * m.face_area(f);
            assert!((r.face[f] - expect).abs() <= 1e-13 * expect);
            assert!(r.volume.iter().all(|v| *v == 0.0));
            assert!((r.mu * r.mu - expect).abs() <= 1e-12 * expect);
            assert!((r.mu_t[0].powi(2) - 0.5 * expect).abs() <= 1e-12 * expect);
        }
    }

    #[test]
    fn continuous_gradient_field_has_no_residual() {
        // grad of a global polynomial: continuous, curl-free, matching j = 0.
        let m = crate::mesh::unit_cube_mesh(1);
        let maps = element_maps(&m);
        let elems = (0..m.n_tets())
            .map(|t| {
                // x^2 y + z in reference coordinates of tet t.
                let x0 = maps[t].x0;
                let jac = maps[t].jac;
                let lin = |i: usize| {
                    let mut p = Poly::constant(x0[i]);
                    for a in 0..3 {
                        p = p.add(&Poly::monomial(match a {
                            0 => [1, 0, 0],
                            1 => [0, 1, 0],
                            _ => [0, 0, 1],
                        }).scale(jac[i][a]));
                    }
                    p
                };
                let (x, y, z) = (lin(0), lin(1), lin(2));
                phys_grad(&x.mul(&x).mul(&y).add(&z), &maps[t].jac_inv)
            })
            .collect();
        let hh = BrokenField { elems };
        let jh = hh.curl(&maps);
        let r = compute_residual_estimator(&m, &maps, &CurrentDensity::zero(), &hh, &jh, 3);
        assert!(r.mu <= 1e-10, "{}", r.mu);
    }

    #[test]
    fn volume_term_scales_with_diameter_squared() {
        let j = CurrentDensity::polynomial(|_| [1.0, 2.0, -1.0], 0);
        let total = |n: usize| {
            let mesh = crate::mesh::unit_cube_mesh(n);
            let maps = element_maps(&mesh);
            let z = BrokenField::zeros(mesh.n_tets());
            compute_residual_estimator(&mesh, &maps, &j, &z, &z, 1).volume.iter().sum::<f64>()
        };
        let (a, b) = (total(1), total(2));
        assert!((b - 0.25 * a).abs() <= 1e-12 * a);
    }
}
