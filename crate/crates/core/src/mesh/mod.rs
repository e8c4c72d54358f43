//! Conforming tetrahedral meshes with full topology and fixed orientation
//! conventions.
//!
//! Conventions:
//! * each internal face has `T+` = the adjacent tet with the smaller index and
//!   its unit normal `n_f` points out of `T+`; boundary faces point outwards;
//! * edge tangents point from the lower to the higher vertex id;
//! * per-tet local numbering used by the finite element code is the tet's
//!   vertices sorted by global id (see [`Mesh::sorted_tet`]).

mod generators;
mod geometry;
mod io;
mod refine;

use std::collections::HashMap;

pub use generators::{l_brick_mesh, unit_cube_mesh};
pub use geometry::{edge_face_normals, face_frame, FaceFrame};
pub use io::{read_mesh, write_mesh, write_vtk};
pub use refine::refine;

use crate::polyspace::spaces::{TET_EDGES, TET_FACES};

/// Relative volume threshold below which a tet is rejected.
pub const VOLUME_EPS: f64 = 1e-12;

/// Iteration cap for the refinement closure.
pub const CLOSURE_CAP: usize = 200;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeshError {
    #[error("non-conforming mesh: {0}")]
    NonConforming(String),
    #[error("tet {tet} is degenerate or inverted (signed volume {volume:e})")]
    DegenerateTet { tet: usize, volume: f64 },
    #[error("vertex id {vertex} out of range in tet {tet}")]
    BadVertex { tet: usize, vertex: usize },
    #[error("refinement closure did not terminate after {0} sweeps")]
    ClosureOverflow(usize),
    #[error("edge {edge} is not on face {face}")]
    NotAdjacent { edge: usize, face: usize },
    #[error("tet id {0} out of range")]
    BadTet(usize),
    #[error("mesh file: {0}")]
    Parse(String),
    #[error("mesh i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for MeshError {
    fn from(e: std::io::Error) -> Self {
        MeshError::Io(e.to_string())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Face {
    /// Vertex ids, ascending.
    pub verts: [usize; 3],
    pub plus: usize,
    /// `None` on the boundary.
    pub minus: Option<usize>,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.minus.is_none()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    /// Vertex ids, ascending; the tangent points from `verts[0]` to `verts[1]`.
    pub verts: [usize; 2],
    pub faces: Vec<usize>,
    pub tets: Vec<usize>,
    pub boundary: bool,
}

#[derive(Clone, Debug)]
pub struct Mesh {
    vertices: Vec<[f64; 3]>,
    tets: Vec<[usize; 4]>,
    tags: Vec<i32>,
    levels: Vec<u32>,
    parents: Vec<Option<usize>>,
    faces: Vec<Face>,
    edges: Vec<Edge>,
    normals: Vec<[f64; 3]>,
    tet_faces: Vec<[usize; 4]>,
    tet_edges: Vec<[usize; 6]>,
    face_edges: Vec<[usize; 3]>,
    vertex_tets: Vec<Vec<usize>>,
    boundary_vertex: Vec<bool>,
}

pub(crate) fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn scale(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn signed_volume(p: [[f64; 3]; 4]) -> f64 {
    dot(sub(p[1], p[0]), cross(sub(p[2], p[0]), sub(p[3], p[0]))) / 6.0
}

fn sorted4(t: [usize; 4]) -> [usize; 4] {
    let mut s = t;
    s.sort_unstable();
    s
}

/// Builds a mesh and all derived topology. Tags default to zero.
pub fn build_mesh(vertices: Vec<[f64; 3]>, tets: Vec<[usize; 4]>, tags: Option<Vec<i32>>) -> Result<Mesh, MeshError> {
    let n = tets.len();
    let tags = tags.unwrap_or_else(|| vec![0; n]);
    if tags.len() != n {
        return Err(MeshError::Parse(format!("{} tags for {} tets", tags.len(), n)));
    }
    Mesh::assemble(vertices, tets, tags, vec![0; n], vec![None; n])
}

impl Mesh {
    pub(crate) fn assemble(
        vertices: Vec<[f64; 3]>,
        tets: Vec<[usize; 4]>,
        tags: Vec<i32>,
        levels: Vec<u32>,
        parents: Vec<Option<usize>>,
    ) -> Result<Mesh, MeshError> {
        let nv = vertices.len();
        let mut used = vec![false; nv];
        for (t, tet) in tets.iter().enumerate() {
            for &v in tet {
                if v >= nv {
                    return Err(MeshError::BadVertex { tet: t, vertex: v });
                }
                used[v] = true;
            }
            let s = sorted4(*tet);
            if s.windows(2).any(|w| w[0] == w[1]) {
                return Err(MeshError::DegenerateTet { tet: t, volume: 0.0 });
            }
            let p = tet.map(|v| vertices[v]);
            let vol = signed_volume(p);
            let h = TET_EDGES
                .iter()
                .map(|e| norm(sub(p[e[1]], p[e[0]])))
                .fold(0.0, f64::max);
            if !(vol > VOLUME_EPS * h * h * h) {
                return Err(MeshError::DegenerateTet { tet: t, volume: vol });
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(MeshError::NonConforming(format!("dangling vertex {v}")));
        }

        let mut face_ids: HashMap<[usize; 3], usize> = HashMap::new();
        let mut faces: Vec<Face> = Vec::new();
        let mut tet_faces = vec![[0usize; 4]; tets.len()];
        for (t, tet) in tets.iter().enumerate() {
            let s = sorted4(*tet);
            for (lf, fv) in TET_FACES.iter().enumerate() {
                let key = [s[fv[0]], s[fv[1]], s[fv[2]]];
                let id = *face_ids.entry(key).or_insert_with(|| {
                    faces.push(Face {
                        verts: key,
                        plus: t,
                        minus: None,
                    });
                    faces.len() - 1
                });
                if faces[id].plus != t {
                    if faces[id].minus.is_some() {
                        return Err(MeshError::NonConforming(format!("face {key:?} shared by more than two tets")));
                    }
                    faces[id].minus = Some(t);
                }
                tet_faces[t][lf] = id;
            }
        }

        let mut edge_ids: HashMap<[usize; 2], usize> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut tet_edges = vec![[0usize; 6]; tets.len()];
        for (t, tet) in tets.iter().enumerate() {
            let s = sorted4(*tet);
            for (le, ev) in TET_EDGES.iter().enumerate() {
                let key = [s[ev[0]], s[ev[1]]];
                let id = *edge_ids.entry(key).or_insert_with(|| {
                    edges.push(Edge {
                        verts: key,
                        faces: Vec::new(),
                        tets: Vec::new(),
                        boundary: false,
                    });
                    edges.len() - 1
                });
                edges[id].tets.push(t);
                tet_edges[t][le] = id;
            }
        }
        let mut face_edges = vec![[0usize; 3]; faces.len()];
        let mut boundary_vertex = vec![false; nv];
        for (f, face) in faces.iter().enumerate() {
            let [a, b, c] = face.verts;
            for (i, key) in [[a, b], [a, c], [b, c]].iter().enumerate() {
                let e = edge_ids[key];
                face_edges[f][i] = e;
                edges[e].faces.push(f);
                if face.is_boundary() {
                    edges[e].boundary = true;
                }
            }
            if face.is_boundary() {
                for v in face.verts {
                    boundary_vertex[v] = true;
                }
            }
        }

        let mut vertex_tets = vec![Vec::new(); nv];
        for (t, tet) in tets.iter().enumerate() {
            for &v in tet {
                vertex_tets[v].push(t);
            }
        }

        let normals = faces
            .iter()
            .map(|f| {
                let [a, b, c] = f.verts.map(|v| vertices[v]);
                let mut n = cross(sub(b, a), sub(c, a));
                let len = norm(n);
                n = scale(n, 1.0 / len);
                let cp = centroid(&tets[f.plus].map(|v| vertices[v]));
                let cf = scale([a[0] + b[0] + c[0], a[1] + b[1] + c[1], a[2] + b[2] + c[2]], 1.0 / 3.0);
                if dot(n, sub(cf, cp)) < 0.0 {
                    n = scale(n, -1.0);
                }
                n
            })
            .collect();

        let mesh = Mesh {
            vertices,
            tets,
            tags,
            levels,
            parents,
            faces,
            edges,
            normals,
            tet_faces,
            tet_edges,
            face_edges,
            vertex_tets,
            boundary_vertex,
        };
        mesh.check_edge_cycles()?;
        Ok(mesh)
    }

    /// Every edge's tets must form one cycle (internal) or one chain (boundary)
    /// through shared faces; anything else means a pinched or hanging configuration.
    fn check_edge_cycles(&self) -> Result<(), MeshError> {
        for (e, edge) in self.edges.iter().enumerate() {
            let walk = self.edge_walk(e);
            if walk.len() != edge.tets.len() {
                return Err(MeshError::NonConforming(format!(
                    "tets around edge {:?} do not form a single fan",
                    edge.verts
                )));
            }
        }
        Ok(())
    }

    /// Tets around an edge in fan order, starting from a boundary face if
    /// the edge is on the boundary.
    pub fn edge_walk(&self, e: usize) -> Vec<usize> {
        let edge = &self.edges[e];
        let start_face = edge
            .faces
            .iter()
            .copied()
            .find(|&f| self.faces[f].is_boundary())
            .unwrap_or(edge.faces[0]);
        let mut out = Vec::new();
        let mut t = self.faces[start_face].plus;
        let mut came_from = start_face;
        loop {
            out.push(t);
            let next_face = edge
                .faces
                .iter()
                .copied()
                .find(|&f| f != came_from && self.tet_faces[t].contains(&f));
            let Some(nf) = next_face else { break };
            let face = &self.faces[nf];
            let Some(other) = (if face.plus == t { face.minus } else { Some(face.plus) }) else {
                break;
            };
            if other == out[0] || out.len() > edge.tets.len() {
                break;
            }
            t = other;
            came_from = nf;
        }
        out
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_tets(&self) -> usize {
        self.tets.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> [f64; 3] {
        self.vertices[v]
    }

    /// Tet vertex ids in their stored (positively oriented) order.
    pub fn tets(&self) -> &[[usize; 4]] {
        &self.tets
    }

    pub fn tet(&self, t: usize) -> [usize; 4] {
        self.tets[t]
    }

    /// Tet vertex ids sorted ascending; the local numbering used by the
    /// element maps.
    pub fn sorted_tet(&self, t: usize) -> [usize; 4] {
        sorted4(self.tets[t])
    }

    pub fn tet_coords(&self, t: usize) -> [[f64; 3]; 4] {
        self.tets[t].map(|v| self.vertices[v])
    }

    /// Coordinates in sorted-vertex order.
    pub fn sorted_coords(&self, t: usize) -> [[f64; 3]; 4] {
        self.sorted_tet(t).map(|v| self.vertices[v])
    }

    pub fn tags(&self) -> &[i32] {
        &self.tags
    }

    pub fn tag(&self, t: usize) -> i32 {
        self.tags[t]
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    /// Tet of the mesh this one was refined from, if any.
    pub fn parent(&self, t: usize) -> Option<usize> {
        self.parents[t]
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face(&self, f: usize) -> &Face {
        &self.faces[f]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    /// Unit normal of face `f`, pointing out of `T+`.
    pub fn normal(&self, f: usize) -> [f64; 3] {
        self.normals[f]
    }

    /// Unit tangent of edge `e`, from lower to higher vertex id.
    pub fn tangent(&self, e: usize) -> [f64; 3] {
        let [a, b] = self.edges[e].verts;
        let d = sub(self.vertices[b], self.vertices[a]);
        scale(d, 1.0 / norm(d))
    }

    /// Face ids of tet `t`; entry `i` is opposite sorted local vertex `i`.
    pub fn tet_faces(&self, t: usize) -> [usize; 4] {
        self.tet_faces[t]
    }

    /// Edge ids of tet `t` in the local order of `TET_EDGES` on sorted vertices.
    pub fn tet_edges(&self, t: usize) -> [usize; 6] {
        self.tet_edges[t]
    }

    /// Edge ids of face `f`: `(a,b)`, `(a,c)`, `(b,c)` for sorted vertices.
    pub fn face_edges(&self, f: usize) -> [usize; 3] {
        self.face_edges[f]
    }

    pub fn vertex_tets(&self, v: usize) -> &[usize] {
        &self.vertex_tets[v]
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    pub fn internal_faces(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.faces.len()).filter(|&f| !self.faces[f].is_boundary())
    }

    pub fn n_internal_faces(&self) -> usize {
        self.internal_faces().count()
    }

    pub fn volume(&self, t: usize) -> f64 {
        signed_volume(self.tet_coords(t))
    }

    pub fn total_volume(&self) -> f64 {
        (0..self.n_tets()).map(|t| self.volume(t)).sum()
    }

    pub fn centroid(&self, t: usize) -> [f64; 3] {
        centroid(&self.tet_coords(t))
    }

    /// Tet diameter (longest edge).
    pub fn diameter(&self, t: usize) -> f64 {
        let p = self.tet_coords(t);
        TET_EDGES
            .iter()
            .map(|e| norm(sub(p[e[1]], p[e[0]])))
            .fold(0.0, f64::max)
    }

    pub fn h_max(&self) -> f64 {
        (0..self.n_tets()).map(|t| self.diameter(t)).fold(0.0, f64::max)
    }

    /// Face diameter (longest edge).
    pub fn face_diameter(&self, f: usize) -> f64 {
        let [a, b, c] = self.faces[f].verts.map(|v| self.vertices[v]);
        norm(sub(b, a)).max(norm(sub(c, a))).max(norm(sub(c, b)))
    }

    pub fn face_area(&self, f: usize) -> f64 {
        let [a, b, c] = self.faces[f].verts.map(|v| self.vertices[v]);
        0.5 * norm(cross(sub(b, a), sub(c, a)))
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e].verts;
        norm(sub(self.vertices[b], self.vertices[a]))
    }

    /// Same mesh with vertex and tet numbering permuted: new vertex `perm_v[i]`
    /// is old vertex `i`, new tet `perm_t[t]` is old tet `t`.
    pub fn renumbered(&self, perm_v: &[usize], perm_t: &[usize]) -> Result<Mesh, MeshError> {
        let mut verts = vec![[0.0; 3]; self.n_vertices()];
        for (i, &p) in perm_v.iter().enumerate() {
            verts[p] = self.vertices[i];
        }
        let mut tets = vec![[0usize; 4]; self.n_tets()];
        let mut tags = vec![0; self.n_tets()];
        for (t, &p) in perm_t.iter().enumerate() {
            tets[p] = self.tets[t].map(|v| perm_v[v]);
            tags[p] = self.tags[t];
        }
        build_mesh(verts, tets, Some(tags))
    }
}

pub(crate) fn centroid(p: &[[f64; 3]; 4]) -> [f64; 3] {
    let mut c = [0.0; 3];
    for q in p {
        for i in 0..3 {
            c[i] += 0.25 * q[i];
        }
    }
    c
}
