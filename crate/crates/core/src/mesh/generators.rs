//! Structured generators: Kuhn-split unit cube and the L-brick.

use std::collections::HashMap;

use super::{build_mesh, cross, dot, sub, Mesh};

/// Kuhn split of a cube with corner index `c(dx,dy,dz)` into 6 tets sharing
/// the main diagonal, each positively oriented.
fn kuhn_cube(c: &dyn Fn(usize, usize, usize) -> usize, coords: &[[f64; 3]], out: &mut Vec<[usize; 4]>) {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for p in PERMS {
        let mut step = [0usize; 3];
        let mut path = [c(0, 0, 0); 4];
        for (i, axis) in p.iter().enumerate() {
            step[*axis] = 1;
            path[i + 1] = c(step[0], step[1], step[2]);
        }
        let x = path.map(|v| coords[v]);
        let vol = dot(sub(x[1], x[0]), cross(sub(x[2], x[0]), sub(x[3], x[0])));
        if vol < 0.0 {
            path.swap(2, 3);
        }
        out.push(path);
    }
}

/// Mesh of `(0,1)^3` with `6 n^3` tets.
pub fn unit_cube_mesh(n: usize) -> Mesh {
    assert!(n >= 1, "unit_cube_mesh needs n >= 1");
    let m = n + 1;
    let idx = |i: usize, j: usize, k: usize| i + m * (j + m * k);
    let h = 1.0 / n as f64;
    let mut verts = Vec::with_capacity(m * m * m);
    for k in 0..m {
        for j in 0..m {
            for i in 0..m {
                verts.push([i as f64 * h, j as f64 * h, k as f64 * h]);
            }
        }
    }
    let mut tets = Vec::with_capacity(6 * n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                kuhn_cube(&|a, b, c| idx(i + a, j + b, k + c), &verts, &mut tets);
            }
        }
    }
    build_mesh(verts, tets, None).expect("structured cube mesh is valid")
}

/// Mesh of the L-brick `(-1,1)^2 x (0,1)` minus `[0,1] x [-1,0] x [0,1]`,
/// three unit blocks each split like `unit_cube_mesh(n)`.
pub fn l_brick_mesh(n: usize) -> Mesh {
    assert!(n >= 1, "l_brick_mesh needs n >= 1");
    let h = 1.0 / n as f64;
    let (nx, ny, nz) = (2 * n, 2 * n, n);
    let mut ids: HashMap<(usize, usize, usize), usize> = HashMap::new();
    let mut verts = Vec::new();
    let removed = |i: usize, j: usize| i >= n && j < n;
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                if removed(i, j) {
                    continue;
                }
                for (a, b, c) in [(0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0), (0, 0, 1), (1, 0, 1), (0, 1, 1), (1, 1, 1)] {
                    ids.entry((i + a, j + b, k + c)).or_insert_with(|| {
                        verts.push([
                            -1.0 + (i + a) as f64 * h,
                            -1.0 + (j + b) as f64 * h,
                            (k + c) as f64 * h,
                        ]);
                        verts.len() - 1
                    });
                }
            }
        }
    }
    let mut tets = Vec::new();
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                if removed(i, j) {
                    continue;
                }
                kuhn_cube(&|a, b, c| ids[&(i + a, j + b, k + c)], &verts, &mut tets);
            }
        }
    }
    build_mesh(verts, tets, None).expect("structured L-brick mesh is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_counts() {
        let m = unit_cube_mesh(1);
        assert_eq!((m.n_tets(), m.n_vertices()), (6, 8));
        let m = unit_cube_mesh(2);
        // Oracle by construction: (n+1)^3 vertices, 6 tets per subcube.
        assert_eq!((m.n_tets(), m.n_vertices()), (6 * 8, 27));
        assert!((m.total_volume() - 1.0).abs() < 1e-12);
        assert!((0..m.n_tets()).all(|t| m.volume(t) > 0.0));
        assert!(m.tags().iter().all(|&t| t == 0));
    }

    #[test]
    fn l_brick_counts_and_reentrant_edge() {
        let m = l_brick_mesh(1);
        assert_eq!(m.n_tets(), 18);
        assert!((m.total_volume() - 3.0).abs() < 1e-12);
        let has = m.edges().iter().any(|e| {
            let (a, b) = (m.vertex(e.verts[0]), m.vertex(e.verts[1]));
            a[0] == 0.0 && a[1] == 0.0 && b[0] == 0.0 && b[1] == 0.0
        });
        assert!(has);
    }

    #[test]
    fn l_brick_block_interfaces_are_shared() {
        let m = l_brick_mesh(2);
        assert!((m.total_volume() - 3.0).abs() < 1e-12);
        for f in 0..m.n_faces() {
            let c = m.face(f).verts.map(|v| m.vertex(v));
            let on_x0 = c.iter().all(|p| p[0] == 0.0) && c.iter().all(|p| p[1] >= 0.0);
            let on_y0 = c.iter().all(|p| p[1] == 0.0) && c.iter().all(|p| p[0] <= 0.0);
            if on_x0 || on_y0 {
                assert!(!m.face(f).is_boundary(), "interface face {f} is not shared");
            }
        }
    }
}
