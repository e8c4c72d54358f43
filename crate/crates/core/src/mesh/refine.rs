//! Longest-edge bisection with conformity closure.

use std::collections::{BTreeSet, HashMap};

use super::{sub, Mesh, MeshError, CLOSURE_CAP};
use crate::polyspace::spaces::TET_EDGES;

type EdgeKey = (usize, usize);

fn key(a: usize, b: usize) -> EdgeKey {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Longest edge of a tet; ties go to the lexicographically smallest id pair.
fn longest_edge(verts: &[[f64; 3]], tet: &[usize; 4]) -> EdgeKey {
    let mut best: Option<(f64, EdgeKey)> = None;
    for [i, j] in TET_EDGES {
        let k = key(tet[i], tet[j]);
        let d = sub(verts[k.1], verts[k.0]);
        let l2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
        best = match best {
            None => Some((l2, k)),
            Some((bl, bk)) if l2 > bl || (l2 == bl && k < bk) => Some((l2, k)),
            keep => keep,
        };
    }
    best.expect("tet has edges").1
}

fn tet_has_edge(tet: &[usize; 4], k: EdgeKey) -> bool {
    tet.contains(&k.0) && tet.contains(&k.1)
}

/// Bisects every marked tet at least once and closes hanging nodes. Children
/// keep their parent's subdomain tag; [`Mesh::parent`] of the result maps
/// each tet to the tet of `mesh` containing it.
pub fn refine(mesh: &Mesh, marked: &[usize]) -> Result<Mesh, MeshError> {
    for &t in marked {
        if t >= mesh.n_tets() {
            return Err(MeshError::BadTet(t));
        }
    }
    let mut verts: Vec<[f64; 3]> = mesh.vertices().to_vec();
    // (tet, tag, level, original ancestor)
    let mut tets: Vec<([usize; 4], i32, u32, usize)> = (0..mesh.n_tets())
        .map(|t| (mesh.tet(t), mesh.tag(t), mesh.levels()[t], t))
        .collect();
    if marked.is_empty() {
        return Mesh::assemble(
            verts,
            tets.iter().map(|t| t.0).collect(),
            mesh.tags().to_vec(),
            mesh.levels().to_vec(),
            (0..mesh.n_tets()).map(Some).collect(),
        );
    }

    let mut midpoints: HashMap<EdgeKey, usize> = HashMap::new();
    let mut pending: BTreeSet<EdgeKey> = BTreeSet::new();
    let marked: BTreeSet<usize> = marked.iter().copied().collect();
    for &t in &marked {
        pending.insert(longest_edge(&verts, &tets[t].0));
    }

    let mut rounds = 0;
    loop {
        rounds += 1;
        if rounds > CLOSURE_CAP {
            return Err(MeshError::ClosureOverflow(CLOSURE_CAP));
        }
        // Closure: any tet touching a pending edge must also split its own longest edge.
        let mut sweeps = 0;
        loop {
            sweeps += 1;
            if sweeps > CLOSURE_CAP {
                return Err(MeshError::ClosureOverflow(CLOSURE_CAP));
            }
            let mut added = false;
            for (tet, ..) in &tets {
                let touches = TET_EDGES
                    .iter()
                    .any(|[i, j]| pending.contains(&key(tet[*i], tet[*j])));
                if touches {
                    let le = longest_edge(&verts, tet);
                    if pending.insert(le) {
                        added = true;
                    }
                }
            }
            if !added {
                break;
            }
        }
        if pending.is_empty() {
            break;
        }
        for &k in &pending {
            midpoints.entry(k).or_insert_with(|| {
                let (a, b) = (verts[k.0], verts[k.1]);
                verts.push([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])]);
                verts.len() - 1
            });
        }
        let mut next = Vec::with_capacity(tets.len() * 2);
        for (tet, tag, level, anc) in tets {
            let le = longest_edge(&verts, &tet);
            if pending.contains(&le) && tet_has_edge(&tet, le) {
                let m = midpoints[&le];
                // Replacing one endpoint by the midpoint keeps the orientation.
                let mut c1 = tet;
                let mut c2 = tet;
                for v in c1.iter_mut() {
                    if *v == le.1 {
                        *v = m;
                    }
                }
                for v in c2.iter_mut() {
                    if *v == le.0 {
                        *v = m;
                    }
                }
                next.push((c1, tag, level + 1, anc));
                next.push((c2, tag, level + 1, anc));
            } else {
                next.push((tet, tag, level, anc));
            }
        }
        tets = next;
        // Split edges still present in some tet remain pending (hanging nodes).
        pending.clear();
        for (tet, ..) in &tets {
            for [i, j] in TET_EDGES {
                let k = key(tet[i], tet[j]);
                if midpoints.contains_key(&k) {
                    pending.insert(k);
                }
            }
        }
        if pending.is_empty() {
            break;
        }
    }

    let n = tets.len();
    let mut out_tets = Vec::with_capacity(n);
    let mut tags = Vec::with_capacity(n);
    let mut levels = Vec::with_capacity(n);
    let mut parents = Vec::with_capacity(n);
    for (tet, tag, level, anc) in tets {
        out_tets.push(tet);
        tags.push(tag);
        levels.push(level);
        parents.push(Some(anc));
    }
    Mesh::assemble(verts, out_tets, tags, levels, parents)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, unit_cube_mesh};

    #[test]
    fn empty_marking_is_identity() {
        let m = unit_cube_mesh(2);
        let r = refine(&m, &[]).unwrap();
        assert_eq!(r.n_tets(), m.n_tets());
        assert_eq!(r.n_vertices(), m.n_vertices());
        assert_eq!(r.tets(), m.tets());
    }

    #[test]
    fn single_tet_bisection() {
        let m = build_mesh(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            vec![[0, 1, 2, 3]],
            Some(vec![7]),
        )
        .unwrap();
        let r = refine(&m, &[0]).unwrap();
        assert_eq!(r.n_tets(), 2);
        assert_eq!(r.n_internal_faces(), 1);
        assert_eq!(r.tags(), &[7, 7]);
        assert_eq!(r.parent(1), Some(0));
        assert!((r.total_volume() - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn refine_all_cube_tets() {
        let m = unit_cube_mesh(1);
        let all: Vec<usize> = (0..m.n_tets()).collect();
        let r = refine(&m, &all).unwrap();
        assert!((12..=96).contains(&r.n_tets()), "{}", r.n_tets());
        assert!((r.total_volume() - 1.0).abs() < 1e-12);
        assert!((0..r.n_tets()).all(|t| r.volume(t) > 0.0));
        let boundary_area: f64 = (0..r.n_faces()).filter(|&f| r.face(f).is_boundary()).map(|f| r.face_area(f)).sum();
        assert!((boundary_area - 6.0).abs() < 1e-12);
    }

    #[test]
    fn repeated_local_refinement_stays_conforming() {
        let mut m = unit_cube_mesh(2);
        for _ in 0..6 {
            // Refine the tets touching the origin.
            let marked: Vec<usize> = (0..m.n_tets())
                .filter(|&t| m.tet_coords(t).iter().any(|p| p.iter().all(|c| c.abs() < 1e-12)))
                .collect();
            let before = m.n_tets();
            m = refine(&m, &marked).unwrap();
            assert!(m.n_tets() > before);
            assert!((m.total_volume() - 1.0).abs() < 1e-12);
            let boundary_area: f64 = (0..m.n_faces()).filter(|&f| m.face(f).is_boundary()).map(|f| m.face_area(f)).sum();
            assert!((boundary_area - 6.0).abs() < 1e-12);
        }
    }
}
