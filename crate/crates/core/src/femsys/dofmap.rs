//! Global numbering of conforming and broken spaces.

use std::collections::HashMap;

use crate::mesh::Mesh;
use crate::polyspace::lagrange::lagrange_nodes;
use crate::polyspace::spaces::{space_dim, SpaceKind, TET_EDGES, TET_FACES};
use crate::polyspace::{SpaceError, MAX_DEGREE};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Continuity {
    /// Shared entities share degrees of freedom.
    Conforming,
    /// Every element owns its degrees of freedom.
    Broken,
}

/// Identifies a Lagrange node independently of the element it was seen
/// from: the supporting global vertices (ascending) with their integer
/// barycentric weights.
pub type NodeKey = Vec<(usize, usize)>;

#[derive(Clone, Debug)]
pub struct DofMap {
    pub kind: SpaceKind,
    pub degree: usize,
    pub continuity: Continuity,
    n_local: usize,
    elem_dofs: Vec<usize>,
    n_global: usize,
    boundary: Vec<bool>,
    free_index: Vec<Option<usize>>,
    free_dofs: Vec<usize>,
}

impl DofMap {
    pub fn n_local(&self) -> usize {
        self.n_local
    }

    pub fn n_global(&self) -> usize {
        self.n_global
    }

    /// Number of unconstrained dofs.
    pub fn n_free(&self) -> usize {
        self.free_dofs.len()
    }

    /// Global dofs of tet `t` in reference-basis order.
    pub fn elem(&self, t: usize) -> &[usize] {
        &self.elem_dofs[t * self.n_local..(t + 1) * self.n_local]
    }

    pub fn is_boundary(&self, dof: usize) -> bool {
        self.boundary[dof]
    }

    /// Position of a global dof in the reduced (free) numbering.
    pub fn free_index(&self, dof: usize) -> Option<usize> {
        self.free_index[dof]
    }

    pub fn free_dofs(&self) -> &[usize] {
        &self.free_dofs
    }

    /// Expands a reduced vector to full length with zeros on constrained dofs.
    pub fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        assert_eq!(reduced.len(), self.n_free());
        let mut full = vec![0.0; self.n_global];
        for (i, &d) in self.free_dofs.iter().enumerate() {
            full[d] = reduced[i];
        }
        full
    }

    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.free_dofs.iter().map(|&d| full[d]).collect()
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        kind: SpaceKind,
        degree: usize,
        continuity: Continuity,
        n_local: usize,
        elem_dofs: Vec<usize>,
        n_global: usize,
        boundary: Vec<bool>,
        homogeneous: bool,
    ) -> Self {
        let mut free_index = vec![None; n_global];
        let mut free_dofs = Vec::new();
        for d in 0..n_global {
            if !(homogeneous && boundary[d]) {
                free_index[d] = Some(free_dofs.len());
                free_dofs.push(d);
            }
        }
        DofMap {
            kind,
            degree,
            continuity,
            n_local,
            elem_dofs,
            n_global,
            boundary,
            free_index,
            free_dofs,
        }
    }
}

/// Numbers the dofs of `kind` on `mesh`. With `homogeneous_boundary` the
/// dofs on boundary entities are excluded from the free set.
pub fn build_dofmap(
    mesh: &Mesh,
    kind: SpaceKind,
    degree: usize,
    continuity: Continuity,
    homogeneous_boundary: bool,
) -> Result<DofMap, SpaceError> {
    if degree > MAX_DEGREE || (degree == 0 && !kind.is_scalar()) {
        return Err(SpaceError::UnsupportedDegree(degree));
    }
    let n_local = space_dim(kind, degree);
    let nt = mesh.n_tets();
    if continuity == Continuity::Broken {
        let elem_dofs: Vec<usize> = (0..nt * n_local).collect();
        let n_global = nt * n_local;
        return Ok(DofMap::finish(
            kind,
            degree,
            continuity,
            n_local,
            elem_dofs,
            n_global,
            vec![false; n_global],
            false,
        ));
    }
    if degree == 0 {
        return Err(SpaceError::UnsupportedDegree(0));
    }
    match kind {
        SpaceKind::Nedelec1Tet => Ok(nedelec(mesh, degree, homogeneous_boundary)),
        SpaceKind::PScalarTet => Ok(lagrange(mesh, degree, homogeneous_boundary)),
        other => Err(SpaceError::WrongKind(other)),
    }
}

fn nedelec(mesh: &Mesh, k: usize, homogeneous: bool) -> DofMap {
    let per_edge = k;
    let per_face = k * (k - 1);
    let per_cell = if k >= 3 { k * (k - 1) * (k - 2) / 2 } else { 0 };
    let face_off = mesh.n_edges() * per_edge;
    let cell_off = face_off + mesh.n_faces() * per_face;
    let n_global = cell_off + mesh.n_tets() * per_cell;
    let n_local = space_dim(SpaceKind::Nedelec1Tet, k);
    let mut elem_dofs = Vec::with_capacity(mesh.n_tets() * n_local);
    for t in 0..mesh.n_tets() {
        for e in mesh.tet_edges(t) {
            elem_dofs.extend((0..per_edge).map(|m| e * per_edge + m));
        }
        for f in mesh.tet_faces(t) {
            elem_dofs.extend((0..per_face).map(|m| face_off + f * per_face + m));
        }
        elem_dofs.extend((0..per_cell).map(|m| cell_off + t * per_cell + m));
    }
    debug_assert_eq!(elem_dofs.len(), mesh.n_tets() * n_local);
    let mut boundary = vec![false; n_global];
    for (e, edge) in mesh.edges().iter().enumerate() {
        if edge.boundary {
            boundary[e * per_edge..(e + 1) * per_edge].fill(true);
        }
    }
    for (f, face) in mesh.faces().iter().enumerate() {
        if face.is_boundary() {
            boundary[face_off + f * per_face..face_off + (f + 1) * per_face].fill(true);
        }
    }
    DofMap::finish(
        SpaceKind::Nedelec1Tet,
        k,
        Continuity::Conforming,
        n_local,
        elem_dofs,
        n_global,
        boundary,
        homogeneous,
    )
}

/// Global key of a node from its tet's sorted vertices and local weights.
pub fn node_key(sorted: &[usize; 4], weights: &[usize; 4]) -> NodeKey {
    (0..4)
        .filter(|&j| weights[j] > 0)
        .map(|j| (sorted[j], weights[j]))
        .collect()
}

/// Whether the node with local barycentric weights lies on the boundary.
pub fn node_on_boundary(mesh: &Mesh, t: usize, weights: &[usize; 4]) -> bool {
    let support: Vec<usize> = (0..4).filter(|&j| weights[j] > 0).collect();
    match support.len() {
        1 => mesh.is_boundary_vertex(mesh.sorted_tet(t)[support[0]]),
        2 => {
            let le = TET_EDGES
                .iter()
                .position(|e| e[0] == support[0] && e[1] == support[1])
                .expect("local edge");
            mesh.edge(mesh.tet_edges(t)[le]).boundary
        }
        3 => {
            let lf = TET_FACES
                .iter()
                .position(|f| f[..] == support[..])
                .expect("local face");
            mesh.face(mesh.tet_faces(t)[lf]).is_boundary()
        }
        _ => false,
    }
}

fn lagrange(mesh: &Mesh, k: usize, homogeneous: bool) -> DofMap {
    let n_local = space_dim(SpaceKind::PScalarTet, k);
    let mut elem_dofs = Vec::with_capacity(mesh.n_tets() * n_local);
    let mut ids: HashMap<NodeKey, usize> = HashMap::new();
    let mut boundary = Vec::new();
    let nodes = lagrange_nodes(k);
    for t in 0..mesh.n_tets() {
        let sv = mesh.sorted_tet(t);
        for w in &nodes.indices {
            let key = node_key(&sv, w);
            let id = *ids.entry(key).or_insert_with(|| {
                boundary.push(node_on_boundary(mesh, t, w));
                boundary.len() - 1
            });
            elem_dofs.push(id);
        }
    }
    let n_global = boundary.len();
    DofMap::finish(
        SpaceKind::PScalarTet,
        k,
        Continuity::Conforming,
        n_local,
        elem_dofs,
        n_global,
        boundary,
        homogeneous,
    )
}
