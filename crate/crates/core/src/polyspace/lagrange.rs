//! Equispaced Lagrange node sets on the reference simplex.

/// Where a node sits on the closed tetrahedron.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NodeLocation {
    Vertex,
    Edge,
    Face,
    Interior,
}

#[derive(Clone, Debug)]
pub struct LagrangeNodeSet {
    pub degree: usize,
    /// Integer barycentric indices `(i0, i1, i2, i3)` with `i0+i1+i2+i3 = degree`;
    /// entry `m` is the weight on reference vertex `m`.
    pub indices: Vec<[usize; 4]>,
    pub location: Vec<NodeLocation>,
}

impl LagrangeNodeSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Barycentric coordinates of node `i`.
    pub fn barycentric(&self, i: usize) -> [f64; 4] {
        let k = self.degree as f64;
        let m = self.indices[i];
        [m[0] as f64 / k, m[1] as f64 / k, m[2] as f64 / k, m[3] as f64 / k]
    }

    /// Reference coordinates `(x, y, z) = (b1, b2, b3)` of node `i`.
    pub fn point(&self, i: usize) -> [f64; 3] {
        let b = self.barycentric(i);
        [b[1], b[2], b[3]]
    }
}

fn classify(m: &[usize; 4]) -> NodeLocation {
    match m.iter().filter(|&&v| v > 0).count() {
        1 => NodeLocation::Vertex,
        2 => NodeLocation::Edge,
        3 => NodeLocation::Face,
        _ => NodeLocation::Interior,
    }
}

fn rank(l: NodeLocation) -> u8 {
    match l {
        NodeLocation::Vertex => 0,
        NodeLocation::Edge => 1,
        NodeLocation::Face => 2,
        NodeLocation::Interior => 3,
    }
}

/// Nodes of `P_k(T)` on the reference tetrahedron, `k >= 1`.
pub fn lagrange_nodes(degree: usize) -> LagrangeNodeSet {
    assert!(degree >= 1, "Lagrange nodes need degree >= 1");
    let mut indices = Vec::new();
    for i1 in 0..=degree {
        for i2 in 0..=degree - i1 {
            for i3 in 0..=degree - i1 - i2 {
                indices.push([degree - i1 - i2 - i3, i1, i2, i3]);
            }
        }
    }
    // Vertices first (in vertex order), then edge, face and interior nodes.
    indices.sort_by_key(|m| (rank(classify(m)), std::cmp::Reverse(*m)));
    let location = indices.iter().map(classify).collect();
    LagrangeNodeSet {
        degree,
        indices,
        location,
    }
}

/// Nodes of `P_k(f)` on the reference triangle as `(i0, i1, i2)` weights.
pub fn lagrange_nodes_tri(degree: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for i1 in 0..=degree {
        for i2 in 0..=degree - i1 {
            out.push([degree - i1 - i2, i1, i2]);
        }
    }
    out
}
