use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::mesh::{build_mesh, face_frame, unit_cube_mesh, Mesh};
use crate::polyspace::maps::{matvec, AffineMap};
use crate::polyspace::quadrature::{quadrature, Domain};
use crate::polyspace::spaces::{reference_space, SpaceKind};

fn cube_h(p: [f64; 3]) -> [f64; 3] {
    let q = |t: f64| t * (1.0 - t);
    let dq = |t: f64| 1.0 - 2.0 * t;
    let (x, y, z) = (p[0], p[1], p[2]);
    [
        q(x) * (dq(y) - dq(z)),
        q(y) * (dq(z) - dq(x)),
        q(z) * (dq(x) - dq(y)),
    ]
}

fn cube_j(p: [f64; 3]) -> [f64; 3] {
    let q = |t: f64| t * (1.0 - t);
    let (x, y, z) = (q(p[0]), q(p[1]), q(p[2]));
    [2.0 * (y + z), 2.0 * (x + z), 2.0 * (x + y)]
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Physical value of a global Nédélec field on tet `t` at reference point `xh`.
fn ned_value(dm: &DofMap, maps: &[AffineMap], full: &[f64], t: usize, xh: [f64; 3]) -> [f64; 3] {
    let sp = reference_space(SpaceKind::Nedelec1Tet, dm.degree).unwrap();
    let mut v = [0.0; 3];
    for (i, &d) in dm.elem(t).iter().enumerate() {
        let b = sp.basis()[i].eval(xh);
        for c in 0..3 {
            v[c] += full[d] * b[c];
        }
    }
    matvec(&maps[t].covariant(), v)
}

fn l2_error(mesh: &Mesh, maps: &[AffineMap], h: &BrokenField, exact: &dyn Fn([f64; 3]) -> [f64; 3]) -> f64 {
    let rule = quadrature(Domain::Tetrahedron, 10).unwrap();
    let mut s = 0.0;
    for t in 0..mesh.n_tets() {
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            let a = h.eval(t, *p);
            let b = exact(maps[t].to_physical(*p));
            s += w * maps[t].abs_det() * ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2));
        }
    }
    s.sqrt()
}

#[test]
fn whitney_dofs_on_two_tets() {
    let m = build_mesh(
        vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 1.0, 1.0]],
        vec![[0, 1, 2, 3], [1, 2, 3, 4]],
        None,
    )
    .unwrap();
    let dm = build_dofmap(&m, SpaceKind::Nedelec1Tet, 1, Continuity::Conforming, true).unwrap();
    assert_eq!(dm.n_global(), 9);
    assert_eq!(dm.n_free(), 0);
    let broken = build_dofmap(&m, SpaceKind::PScalarTet, 1, Continuity::Broken, false).unwrap();
    assert_eq!(broken.n_global(), 8);
}

#[test]
fn conforming_fields_have_continuous_tangential_traces() {
    let m = unit_cube_mesh(1);
    let maps = element_maps(&m);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let rule = quadrature(Domain::Triangle, 6).unwrap();
    for k in 1..=3 {
        let dm = build_dofmap(&m, SpaceKind::Nedelec1Tet, k, Continuity::Conforming, false).unwrap();
        let u = random_vec(&mut rng, dm.n_global());
        let mut worst: f64 = 0.0;
        for f in m.internal_faces() {
            let face = m.face(f);
            let fr = face_frame(&m, f);
            let [a, b, c] = face.verts.map(|v| m.vertex(v));
            for p in &rule.points {
                let x: [f64; 3] = std::array::from_fn(|i| a[i] + p[0] * (b[i] - a[i]) + p[1] * (c[i] - a[i]));
                let tp = face.plus;
                let tm = face.minus.unwrap();
                let vp = ned_value(&dm, &maps, &u, tp, maps[tp].to_reference(x));
                let vm = ned_value(&dm, &maps, &u, tm, maps[tm].to_reference(x));
                for t in [fr.t1, fr.t2] {
                    let d: f64 = (0..3).map(|i| (vp[i] - vm[i]) * t[i]).sum();
                    worst = worst.max(d.abs());
                }
            }
        }
        assert!(worst <= 1e-11, "k={k}: jump {worst:e}");
    }
}

#[test]
fn curlcurl_is_symmetric_and_kills_gradients() {
    let m = unit_cube_mesh(2);
    let maps = element_maps(&m);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for k in 1..=3 {
        let sys = MagnetostaticSystem::new(&m, &maps, k, &MaterialField::constant(1.0)).unwrap();
        assert!(sys.a.asymmetry() <= 1e-12 * sys.a.max_abs());
        let q = random_vec(&mut rng, sys.grad.ncols());
        let gq = sys.grad.matvec(&q);
        let agq = sys.a.matvec(&gq);
        let rel = sparse::norm2(&agq) / (sys.a.max_abs() * sparse::norm2(&gq));
        assert!(rel <= 1e-10, "k={k}: {rel:e}");
    }
}

#[test]
fn single_tet_system_is_empty() {
    let m = build_mesh(crate::polyspace::spaces::REF_TET.to_vec(), vec![[0, 1, 2, 3]], None).unwrap();
    let maps = element_maps(&m);
    let sys = MagnetostaticSystem::new(&m, &maps, 1, &MaterialField::constant(1.0)).unwrap();
    assert_eq!(sys.a.nrows(), 0);
}

#[test]
fn zero_current_gives_zero_load() {
    let m = unit_cube_mesh(1);
    let maps = element_maps(&m);
    let dm = build_dofmap(&m, SpaceKind::Nedelec1Tet, 2, Continuity::Conforming, true).unwrap();
    let r = assemble_rhs(&m, &maps, &dm, &CurrentDensity::zero()).unwrap();
    assert!(r.iter().all(|&v| v == 0.0));
}

#[test]
fn constant_current_is_orthogonal_to_gradients() {
    let m = unit_cube_mesh(2);
    let maps = element_maps(&m);
    let sys = MagnetostaticSystem::new(&m, &maps, 1, &MaterialField::constant(1.0)).unwrap();
    let j = CurrentDensity::polynomial(|_| [0.3, -1.0, 2.0], 0);
    let r = assemble_rhs(&m, &maps, &sys.dofmap, &j).unwrap();
    let gtr = sys.grad.tr_matvec(&r);
    assert!(sparse::norm2(&gtr) <= 1e-14 * sparse::norm2(&r).max(1.0));
}

#[test]
fn load_vector_matches_slow_assembly() {
    let m = unit_cube_mesh(2);
    let maps = element_maps(&m);
    for k in 1..=2 {
        let dm = build_dofmap(&m, SpaceKind::Nedelec1Tet, k, Continuity::Conforming, true).unwrap();
        let fast = assemble_rhs(&m, &maps, &dm, &CurrentDensity::polynomial(cube_j, 2)).unwrap();
        let sp = reference_space(SpaceKind::Nedelec1Tet, k).unwrap();
        let rule = quadrature(Domain::Tetrahedron, 10).unwrap();
        let mut slow = vec![0.0; dm.n_free()];
        for t in 0..m.n_tets() {
            let map = AffineMap::new(m.sorted_coords(t)).unwrap();
            for (i, &d) in dm.elem(t).iter().enumerate() {
                let Some(r) = dm.free_index(d) else { continue };
                for (p, w) in rule.points.iter().zip(&rule.weights) {
                    let phi = matvec(&map.covariant(), sp.basis()[i].eval(*p));
                    let jv = cube_j(map.to_physical(*p));
                    slow[r] += w * map.abs_det() * (phi[0] * jv[0] + phi[1] * jv[1] + phi[2] * jv[2]);
                }
            }
        }
        let diff: Vec<f64> = fast.iter().zip(&slow).map(|(a, b)| a - b).collect();
        assert!(sparse::norm2(&diff) <= 1e-10 * sparse::norm2(&slow));
    }
}

#[test]
fn gradient_correction_is_a_projector() {
    let m = unit_cube_mesh(2);
    let maps = element_maps(&m);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let sys = MagnetostaticSystem::new(&m, &maps, 2, &MaterialField::constant(1.0)).unwrap();
    let r = random_vec(&mut rng, sys.a.nrows());
    let once = gradient_correction(&sys.grad, &r).unwrap();
    let gt = sys.grad.tr_matvec(&once);
    assert!(sparse::norm2(&gt) <= 1e-12 * sparse::norm2(&once) * sys.grad.max_abs().max(1.0));
    let twice = gradient_correction(&sys.grad, &once).unwrap();
    let d: Vec<f64> = once.iter().zip(&twice).map(|(a, b)| a - b).collect();
    assert!(sparse::norm2(&d) <= 1e-12 * sparse::norm2(&once));

    let q0 = random_vec(&mut rng, sys.grad.ncols());
    let g = sys.grad.matvec(&q0);
    let out = gradient_correction(&sys.grad, &g).unwrap();
    assert!(sparse::norm2(&out) <= 1e-10 * sparse::norm2(&g));

    let v = random_vec(&mut rng, sys.a.nrows());
    let free = sys.a.matvec(&v);
    let same = gradient_correction(&sys.grad, &free).unwrap();
    let d: Vec<f64> = free.iter().zip(&same).map(|(a, b)| a - b).collect();
    assert!(sparse::norm2(&d) <= 1e-12 * sparse::norm2(&free));
}

fn solve_cube(mesh: &Mesh, k: usize, backend: Backend) -> (BrokenField, BrokenField, Vec<f64>, MagnetostaticSystem, CurrentDensity) {
    let maps = element_maps(mesh);
    let mu = MaterialField::constant(1.0);
    let sys = MagnetostaticSystem::new(mesh, &maps, k, &mu).unwrap();
    let j = CurrentDensity::polynomial(cube_j, 2);
    let rhs = assemble_rhs(mesh, &maps, &sys.dofmap, &j).unwrap();
    let rhs = gradient_correction(&sys.grad, &rhs).unwrap();
    let cfg = SolverConfig {
        backend,
        ..SolverConfig::default()
    };
    let (u, stats) = solve_magnetostatic(&sys, &rhs, &cfg).unwrap();
    assert!(stats.rel_residual <= cfg.tol);
    let full = sys.dofmap.expand(&u);
    let (hh, jh) = compute_hh(mesh, &maps, &sys.dofmap, &FieldCoefficients::new(&sys.dofmap, full), &mu).unwrap();
    (hh, jh, u, sys, j)
}

#[test]
fn quartic_elements_reproduce_polynomial_field() {
    // H is cubic, so H_h is exact once P_3 fields are in the curl range (k = 4).
    let m = unit_cube_mesh(1);
    let maps = element_maps(&m);
    for backend in [Backend::Direct, Backend::Cg] {
        let (hh, _, _, _, _) = solve_cube(&m, 4, backend);
        let err = l2_error(&m, &maps, &hh, &cube_h);
        assert!(err <= 1e-8, "{backend:?}: {err:e}");
    }
}

#[test]
fn galerkin_orthogonality_holds() {
    let m = unit_cube_mesh(2);
    let maps = element_maps(&m);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for k in 1..=2 {
        let (_, _, u, sys, j) = solve_cube(&m, k, Backend::Direct);
        let b = assemble_rhs(&m, &maps, &sys.dofmap, &j).unwrap();
        let au = sys.a.matvec(&u);
        let scale = sparse::norm2(&b);
        for _ in 0..50 {
            let w = random_vec(&mut rng, u.len());
            let d = sparse::dot(&au, &w) - sparse::dot(&b, &w);
            assert!(d.abs() <= 1e-9 * scale * sparse::norm2(&w), "k={k}: {d:e}");
        }
    }
}

#[test]
fn gradients_have_no_field() {
    let m = unit_cube_mesh(1);
    let maps = element_maps(&m);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mu = MaterialField::constant(1.0);
    let sys = MagnetostaticSystem::new(&m, &maps, 2, &mu).unwrap();
    let q = random_vec(&mut rng, sys.grad.ncols());
    let full = sys.dofmap.expand(&sys.grad.matvec(&q));
    let (hh, _) = compute_hh(&m, &maps, &sys.dofmap, &FieldCoefficients::new(&sys.dofmap, full), &mu).unwrap();
    let n: f64 = hh.norms(&maps, &|_| 1.0).iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(n <= 1e-12);
}

#[test]
fn lowest_order_has_no_element_current() {
    let m = unit_cube_mesh(2);
    let maps = element_maps(&m);
    let (_, jh, _, _, _) = solve_cube(&m, 1, Backend::Direct);
    let n = jh.norms(&maps, &|_| 1.0);
    assert!(n.iter().all(|&v| v <= 1e-13));
}

#[test]
fn element_curl_satisfies_stokes() {
    // (curl H, w)_T = (H, curl w)_T + (n x H, w)_{dT} on each tet.
    let m = unit_cube_mesh(1);
    let maps = element_maps(&m);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mu = MaterialField::constant(1.0);
    let dm = build_dofmap(&m, SpaceKind::Nedelec1Tet, 3, Continuity::Conforming, false).unwrap();
    let u = random_vec(&mut rng, dm.n_global());
    let (hh, jh) = compute_hh(&m, &maps, &dm, &FieldCoefficients::new(&dm, u), &mu).unwrap();
    let vol = quadrature(Domain::Tetrahedron, 8).unwrap();
    let tri = quadrature(Domain::Triangle, 8).unwrap();
    let w = |x: [f64; 3]| [x[1] * x[2], x[0] - x[2] * x[2], 1.0 + x[0] * x[1]];
    let curl_w = |x: [f64; 3]| [x[0] + 2.0 * x[2], 0.0, 1.0 - x[2]];
    for t in 0..m.n_tets() {
        let map = &maps[t];
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        for (p, wt) in vol.points.iter().zip(&vol.weights) {
            let x = map.to_physical(*p);
            let (a, b) = (jh.eval(t, *p), w(x));
            lhs += wt * map.abs_det() * (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]);
            let (a, b) = (hh.eval(t, *p), curl_w(x));
            rhs += wt * map.abs_det() * (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]);
        }
        let c = m.centroid(t);
        let tv = m.tet(t);
        for skip in 0..4 {
            let fv: Vec<[f64; 3]> = (0..4).filter(|&i| i != skip).map(|i| m.vertex(tv[i])).collect();
            let e1: [f64; 3] = std::array::from_fn(|i| fv[1][i] - fv[0][i]);
            let e2: [f64; 3] = std::array::from_fn(|i| fv[2][i] - fv[0][i]);
            let mut n = [e1[1] * e2[2] - e1[2] * e2[1], e1[2] * e2[0] - e1[0] * e2[2], e1[0] * e2[1] - e1[1] * e2[0]];
            let area2 = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
            n = n.map(|v| v / area2);
            if (0..3).map(|i| n[i] * (fv[0][i] - c[i])).sum::<f64>() < 0.0 {
                n = n.map(|v| -v);
            }
            for (p, wt) in tri.points.iter().zip(&tri.weights) {
                let x: [f64; 3] = std::array::from_fn(|i| fv[0][i] + p[0] * e1[i] + p[1] * e2[i]);
                let h = hh.eval(t, map.to_reference(x));
                let nxh = [n[1] * h[2] - n[2] * h[1], n[2] * h[0] - n[0] * h[2], n[0] * h[1] - n[1] * h[0]];
                let wv = w(x);
                rhs += wt * area2 * (nxh[0] * wv[0] + nxh[1] * wv[1] + nxh[2] * wv[2]);
            }
        }
        assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()), "tet {t}: {lhs} vs {rhs}");
    }
}

#[test]
fn projection_reproduces_members() {
    let m = unit_cube_mesh(2);
    let maps = element_maps(&m);
    let c = CurrentDensity::polynomial(|_| [1.0, -2.0, 0.5], 0);
    let pc = project_current(&m, &maps, &c, 1).unwrap();
    assert!(l2_error(&m, &maps, &pc, &|_| [1.0, -2.0, 0.5]) <= 1e-12);
    let pj = project_current(&m, &maps, &CurrentDensity::polynomial(cube_j, 2), 3).unwrap();
    assert!(l2_error(&m, &maps, &pj, &cube_j) <= 1e-10);
    for (e, map) in pj.elems.iter().zip(&maps) {
        let d = phys_deriv(&e.0[0], &map.jac_inv, 0)
            .add(&phys_deriv(&e.0[1], &map.jac_inv, 1))
            .add(&phys_deriv(&e.0[2], &map.jac_inv, 2));
        assert!(d.coeffs().iter().all(|v| v.abs() <= 1e-9));
    }
}

#[test]
fn projected_current_has_matching_normal_flux() {
    let m = unit_cube_mesh(2);
    let maps = element_maps(&m);
    let pj = project_current(&m, &maps, &CurrentDensity::polynomial(cube_j, 2), 2).unwrap();
    let rule = quadrature(Domain::Triangle, 6).unwrap();
    for f in m.internal_faces() {
        let face = m.face(f);
        let n = m.normal(f);
        let [a, b, c] = face.verts.map(|v| m.vertex(v));
        for p in &rule.points {
            let x: [f64; 3] = std::array::from_fn(|i| a[i] + p[0] * (b[i] - a[i]) + p[1] * (c[i] - a[i]));
            let (tp, tm) = (face.plus, face.minus.unwrap());
            let vp = pj.eval(tp, maps[tp].to_reference(x));
            let vm = pj.eval(tm, maps[tm].to_reference(x));
            let jump: f64 = (0..3).map(|i| (vp[i] - vm[i]) * n[i]).sum();
            assert!(jump.abs() <= 1e-10);
        }
    }
}

#[test]
fn material_lookup() {
    let m = MaterialField::by_tag(&[(1, 100.0)], 1.0).unwrap();
    assert_eq!(m.mu(1), 100.0);
    assert_eq!(m.mu(0), 1.0);
    assert_eq!(m.bounds(), (1.0, 100.0));
    assert!(MaterialField::by_tag(&[(1, -1.0)], 1.0).is_err());
    assert_eq!(MaterialField::constant(2.0).mu(7), 2.0);
}
