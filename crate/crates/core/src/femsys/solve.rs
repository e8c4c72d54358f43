//! Linear solvers for the (singular) curl–curl system.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

use super::assemble::{assemble_rhs, gradient_correction, MagnetostaticSystem};
use super::{compute_hh, BrokenField, CurrentDensity, FieldCoefficients, MaterialField};
use crate::mesh::Mesh;
use crate::polyspace::maps::AffineMap;
use super::sparse::{dot, norm2, CsrMatrix};
use super::FemError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Sparse Cholesky of `A + eps M` with iterative refinement on `A`.
    Direct,
    /// Jacobi-preconditioned conjugate gradients on the singular `A`.
    Cg,
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SolverConfig {
    pub backend: Backend,
    /// Relative residual target `||A u - b|| / ||b||`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            backend: Backend::Direct,
            tol: 1e-10,
            max_iter: 20_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct SolveStats {
    pub backend: Backend,
    pub iterations: usize,
    pub rel_residual: f64,
}

pub(crate) struct SparseCholesky {
    llt: faer::sparse::linalg::solvers::Llt<usize, f64>,
    n: usize,
}

impl SparseCholesky {
    pub(crate) fn new(a: &CsrMatrix) -> Result<Self, FemError> {
        let n = a.nrows();
        let trip: Vec<Triplet<usize, usize, f64>> = a.triplets().map(|(r, c, v)| Triplet::new(r, c, v)).collect();
        let m = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trip)
            .map_err(|e| FemError::Factorization(format!("{e:?}")))?;
        let llt = m
            .sp_cholesky(Side::Lower)
            .map_err(|e| FemError::Factorization(format!("{e:?}")))?;
        Ok(SparseCholesky { llt, n })
    }

    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        let rhs = Mat::<f64>::from_fn(self.n, 1, |i, _| b[i]);
        let x = self.llt.solve(&rhs);
        (0..self.n).map(|i| x[(i, 0)]).collect()
    }
}

fn residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    a.matvec(x).iter().zip(b).map(|(ax, bi)| bi - ax).collect()
}

/// Solves `A u = b` on the free dofs. `b` should be discretely
/// divergence-free (see `gradient_correction`); any gauge representative is
/// returned.
pub fn solve_magnetostatic(sys: &MagnetostaticSystem, rhs: &[f64], cfg: &SolverConfig) -> Result<(Vec<f64>, SolveStats), FemError> {
    let n = sys.a.nrows();
    assert_eq!(rhs.len(), n);
    let bnorm = norm2(rhs);
    if n == 0 || bnorm == 0.0 {
        return Ok((
            vec![0.0; n],
            SolveStats {
                backend: cfg.backend,
                iterations: 0,
                rel_residual: 0.0,
            },
        ));
    }
    match cfg.backend {
        Backend::Direct => direct(sys, rhs, bnorm, cfg),
        Backend::Cg => pcg(&sys.a, rhs, bnorm, cfg),
    }
}

fn direct(sys: &MagnetostaticSystem, b: &[f64], bnorm: f64, cfg: &SolverConfig) -> Result<(Vec<f64>, SolveStats), FemError> {
    let n = sys.a.nrows();
    let eps = 1e-10 * sys.a.trace() / n as f64;
    let reg = sys.a.add_scaled(eps, &sys.mass);
    let chol = SparseCholesky::new(&reg)?;
    let mut x = chol.solve(b);
    let mut rel = norm2(&residual(&sys.a, &x, b)) / bnorm;
    let mut it = 1;
    while rel > 1e-2 * cfg.tol && it < 30 {
        let r = residual(&sys.a, &x, b);
        for (xi, d) in x.iter_mut().zip(chol.solve(&r)) {
            *xi += d;
        }
        let new_rel = norm2(&residual(&sys.a, &x, b)) / bnorm;
        it += 1;
        if new_rel >= rel {
            rel = new_rel;
            break;
        }
        rel = new_rel;
    }
    if rel > cfg.tol {
        return Err(FemError::NoConvergence {
            iterations: it,
            residual: rel,
        });
    }
    Ok((
        x,
        SolveStats {
            backend: Backend::Direct,
            iterations: it,
            rel_residual: rel,
        },
    ))
}

fn pcg(a: &CsrMatrix, b: &[f64], bnorm: f64, cfg: &SolverConfig) -> Result<(Vec<f64>, SolveStats), FemError> {
    let n = a.nrows();
    let dinv: Vec<f64> = a.diagonal().iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&dinv).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 1..=cfg.max_iter {
        let ap = a.matvec(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if it % 50 == 0 {
            r = residual(a, &x, b);
        }
        let rel = norm2(&r) / bnorm;
        if rel <= cfg.tol {
            let true_rel = norm2(&residual(a, &x, b)) / bnorm;
            if true_rel <= cfg.tol {
                return Ok((
                    x,
                    SolveStats {
                        backend: Backend::Cg,
                        iterations: it,
                        rel_residual: true_rel,
                    },
                ));
            }
            r = residual(a, &x, b);
        }
        for i in 0..n {
            z[i] = r[i] * dinv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(FemError::NoConvergence {
        iterations: cfg.max_iter,
        residual: norm2(&residual(a, &x, b)) / bnorm,
    })
}

/// Discrete field and its ingredients for one mesh and degree.
#[derive(Debug)]
pub struct FieldSolution {
    pub system: MagnetostaticSystem,
    /// Full coefficient vector of `u_h` (boundary dofs included).
    pub u: FieldCoefficients,
    pub hh: BrokenField,
    pub jh: BrokenField,
    pub stats: SolveStats,
}

/// Assembles, makes the load discretely divergence-free and solves.
pub fn solve_field(
    mesh: &Mesh,
    maps: &[AffineMap],
    degree: usize,
    mu: &MaterialField,
    j: &CurrentDensity,
    cfg: &SolverConfig,
) -> Result<FieldSolution, FemError> {
    let system = MagnetostaticSystem::new(mesh, maps, degree, mu)?;
    let rhs = assemble_rhs(mesh, maps, &system.dofmap, j)?;
    let rhs = gradient_correction(&system.grad, &rhs)?;
    let (u, stats) = solve_magnetostatic(&system, &rhs, cfg)?;
    let u = FieldCoefficients::new(&system.dofmap, system.dofmap.expand(&u));
    let (hh, jh) = compute_hh(mesh, maps, &system.dofmap, &u, mu)?;
    Ok(FieldSolution { system, u, hh, jh, stats })
}
