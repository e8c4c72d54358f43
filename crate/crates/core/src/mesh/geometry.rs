//! Face frames and the edge/face normal pairs used by the compatibility
//! conditions around edges.

use super::{cross, dot, norm, scale, sub, Mesh, MeshError};

/// Right-handed orthonormal frame of a face: `t1 x t2 = n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FaceFrame {
    pub t1: [f64; 3],
    pub t2: [f64; 3],
    pub n: [f64; 3],
}

/// Frame with `t1` along the edge joining the face's two lowest vertex ids,
/// `n` the oriented face normal and `t2 = n x t1`.
pub fn face_frame(mesh: &Mesh, f: usize) -> FaceFrame {
    let [a, b, _] = mesh.face(f).verts;
    let d = sub(mesh.vertex(b), mesh.vertex(a));
    let t1 = scale(d, 1.0 / norm(d));
    let n = mesh.normal(f);
    let t2 = cross(n, t1);
    FaceFrame { t1, t2, n }
}

/// `(n_ef, n_fe)`: the in-plane unit normal of face `f` along edge `e`
/// pointing out of the face, and `t_e x n_ef`.
pub fn edge_face_normals(mesh: &Mesh, e: usize, f: usize) -> Result<([f64; 3], [f64; 3]), MeshError> {
    let [a, b] = mesh.edge(e).verts;
    let fv = mesh.face(f).verts;
    if !fv.contains(&a) || !fv.contains(&b) {
        return Err(MeshError::NotAdjacent { edge: e, face: f });
    }
    let c = fv.iter().copied().find(|&v| v != a && v != b).expect("third face vertex");
    let (pa, pc) = (mesh.vertex(a), mesh.vertex(c));
    let t = mesh.tangent(e);
    // Component of (a - c) orthogonal to the edge points out of the face.
    let ac = sub(pa, pc);
    let mut n = sub(ac, scale(t, dot(ac, t)));
    n = scale(n, 1.0 / norm(n));
    let nfe = cross(t, n);
    Ok((n, nfe))
}
