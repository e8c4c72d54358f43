//! Step 3: broken potential `phi` whose face jumps are the multipliers,
//! reconstructed node by node.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::{EquilibrationError, FaceMultiplier};
use crate::femsys::{node_key, NodeKey};
use crate::mesh::Mesh;
use crate::polyspace::lagrange::lagrange_nodes;
use crate::polyspace::poly::Poly;
use crate::polyspace::spaces::{lstsq, reference_space, SpaceKind};

#[derive(Clone, Debug)]
pub struct NodalPotential {
    pub aux_degree: usize,
    /// `phi_{T,x}` at the Lagrange nodes of each tet, in local node order.
    pub values: Vec<Vec<f64>>,
    /// `phi|_T` in reference coordinates.
    pub phi: Vec<Poly>,
    /// Number of distinct global nodes.
    pub n_nodes: usize,
    pub max_patch_residual: f64,
}

impl NodalPotential {
    pub fn zero(mesh: &Mesh, aux_degree: usize) -> Self {
        let nl = lagrange_nodes(aux_degree).len();
        NodalPotential {
            aux_degree,
            values: vec![vec![0.0; nl]; mesh.n_tets()],
            phi: vec![Poly::zero(0); mesh.n_tets()],
            n_nodes: 0,
            max_patch_residual: 0.0,
        }
    }
}

/// Least-squares solution of `x[p] - x[m] = d` for each `(p, m, d)` together
/// with `sum x = 0`. Returns the solution and the largest equation residual.
pub fn solve_patch(n: usize, jumps: &[(usize, usize, f64)]) -> (Vec<f64>, f64) {
    let mut a = DMatrix::<f64>::zeros(jumps.len() + 1, n);
    let mut b = DVector::<f64>::zeros(jumps.len() + 1);
    for (r, &(p, m, d)) in jumps.iter().enumerate() {
        a[(r, p)] += 1.0;
        a[(r, m)] -= 1.0;
        b[r] = d;
    }
    for c in 0..n {
        a[(jumps.len(), c)] = 1.0;
    }
    let x = lstsq(&a, &b);
    let res = (&a * &x - &b).amax();
    (x.iter().copied().collect(), res)
}

struct Node {
    key: NodeKey,
    /// `(tet, local node index)`.
    owners: Vec<(usize, usize)>,
}

/// Weights of a node on the (ascending) vertices of a face containing it.
fn face_weights(mesh: &Mesh, f: usize, key: &NodeKey) -> [usize; 3] {
    mesh.face(f)
        .verts
        .map(|v| key.iter().find(|(u, _)| *u == v).map_or(0, |(_, w)| *w))
}

pub fn step3_reconstruct_phi(
    mesh: &Mesh,
    lambdas: &FaceMultiplier,
    strict: bool,
) -> Result<NodalPotential, EquilibrationError> {
    let kp = lambdas.aux_degree;
    let lag = lagrange_nodes(kp);
    let nl = lag.len();

    // Sequential registry so that node ids do not depend on scheduling.
    let mut ids: HashMap<NodeKey, usize> = HashMap::new();
    let mut nodes: Vec<Node> = Vec::new();
    for t in 0..mesh.n_tets() {
        let sv = mesh.sorted_tet(t);
        for (i, w) in lag.indices.iter().enumerate() {
            let key = node_key(&sv, w);
            let id = *ids.entry(key.clone()).or_insert_with(|| {
                nodes.push(Node { key, owners: Vec::new() });
                nodes.len() - 1
            });
            nodes[id].owners.push((t, i));
        }
    }

    let scale = lambdas.max_abs();
    let solved: Vec<Result<(Vec<f64>, f64), EquilibrationError>> = nodes
        .par_iter()
        .enumerate()
        .map(|(id, node)| {
            let n = node.owners.len();
            if n == 0 {
                return Err(EquilibrationError::OrphanNode(id));
            }
            match node.key.len() {
                4 => return Ok((vec![0.0; n], 0.0)),
                3 => {
                    if n == 1 {
                        return Ok((vec![0.0], 0.0));
                    }
                    let (t0, _) = node.owners[0];
                    let f = mesh
                        .tet_faces(t0)
                        .into_iter()
                        .find(|&f| face_weights(mesh, f, &node.key).iter().sum::<usize>() == kp)
                        .expect("face of a face node");
                    let l = lambdas.node_value(f, face_weights(mesh, f, &node.key));
                    let face = mesh.face(f);
                    let vals = node
                        .owners
                        .iter()
                        .map(|&(t, _)| if t == face.plus { 0.5 * l } else { -0.5 * l })
                        .collect();
                    return Ok((vals, 0.0));
                }
                _ => {}
            }
            let local: HashMap<usize, usize> = node.owners.iter().enumerate().map(|(i, &(t, _))| (t, i)).collect();
            let mut faces: Vec<usize> = node
                .owners
                .iter()
                .flat_map(|&(t, _)| mesh.tet_faces(t))
                .filter(|&f| {
                    !mesh.face(f).is_boundary() && face_weights(mesh, f, &node.key).iter().sum::<usize>() == kp
                })
                .collect();
            faces.sort_unstable();
            faces.dedup();
            let jumps: Vec<(usize, usize, f64)> = faces
                .iter()
                .map(|&f| {
                    let face = mesh.face(f);
                    let l = lambdas.node_value(f, face_weights(mesh, f, &node.key));
                    (local[&face.plus], local[&face.minus.expect("internal")], l)
                })
                .collect();
            let (x, res) = solve_patch(n, &jumps);
            if strict && res > 1e-8 * scale + 1e-14 {
                return Err(EquilibrationError::InconsistentPatch { node: id, residual: res });
            }
            Ok((x, res))
        })
        .collect();

    let mut values = vec![vec![0.0; nl]; mesh.n_tets()];
    let mut max_res = 0.0f64;
    for (node, r) in nodes.iter().zip(solved) {
        let (x, res) = r?;
        max_res = max_res.max(res);
        for (&(t, i), v) in node.owners.iter().zip(x) {
            values[t][i] = v;
        }
    }
    let space = reference_space(SpaceKind::PScalarTet, kp)?;
    let phi = values.par_iter().map(|v| space.combine(v).0[0].clone()).collect();
    Ok(NodalPotential {
        aux_degree: kp,
        values,
        phi,
        n_nodes: nodes.len(),
        max_patch_residual: max_res,
    })
}
