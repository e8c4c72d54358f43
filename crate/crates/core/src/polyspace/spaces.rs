//! Reference finite element spaces defined as dual bases of their canonical
//! degree-of-freedom functionals.
//!
//! Every space is built the same way: a spanning set of polynomial generators
//! is orthonormalised in `L^2` of the reference cell, the DOF functionals are
//! applied to it, and the resulting square matrix is inverted. Edge and face
//! functionals are parametrised from the lowest-numbered vertex of the
//! sub-entity, so an element whose local vertices are sorted by global id
//! produces globally conforming fields without sign or permutation fix-ups.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector};

use super::lagrange::{lagrange_nodes, lagrange_nodes_tri};
use super::poly::{
    homogeneous_exponents, monomial_exponents, monomial_exponents_2d, monomial_table, n_monomials,
    Poly, VecPoly,
};
use super::quadrature::{quadrature, Domain};
use super::SpaceError;

/// Highest degree with a tabulated basis.
pub const MAX_DEGREE: usize = 4;

/// Reference tetrahedron vertices.
pub const REF_TET: [[f64; 3]; 4] = [
    [0.0, 0.0, 0.0],
    [1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0],
];

/// Reference triangle vertices (embedded in `z = 0`).
pub const REF_TRI: [[f64; 3]; 3] = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];

/// Local edges of a tetrahedron, each from the lower to the higher local vertex.
pub const TET_EDGES: [[usize; 2]; 6] = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];

/// Local faces of a tetrahedron; face `i` is opposite vertex `i`, vertices ascending.
pub const TET_FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];

/// Local edges of a triangle.
pub const TRI_EDGES: [[usize; 2]; 3] = [[0, 1], [0, 2], [1, 2]];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    /// Continuous Lagrange `P_k(T)`.
    PScalarTet,
    /// Nédélec first kind `R_k(T)`.
    Nedelec1Tet,
    /// Raviart–Thomas `D_k(T)`.
    RtTet,
    /// Lagrange `P_k(f)` on the reference triangle.
    PScalarTri,
    /// Raviart–Thomas `D_k(f)` on the reference triangle, as in-plane fields.
    RtTangentialTri,
}

impl SpaceKind {
    pub fn is_scalar(self) -> bool {
        matches!(self, SpaceKind::PScalarTet | SpaceKind::PScalarTri)
    }

    fn domain(self) -> Domain {
        match self {
            SpaceKind::PScalarTri | SpaceKind::RtTangentialTri => Domain::Triangle,
            _ => Domain::Tetrahedron,
        }
    }

    fn min_degree(self) -> usize {
        match self {
            SpaceKind::PScalarTet | SpaceKind::PScalarTri => 0,
            _ => 1,
        }
    }
}

/// Closed-form dimension of each space.
pub fn space_dim(kind: SpaceKind, k: usize) -> usize {
    match kind {
        SpaceKind::PScalarTet => (k + 1) * (k + 2) * (k + 3) / 6,
        SpaceKind::Nedelec1Tet => k * (k + 2) * (k + 3) / 2,
        SpaceKind::RtTet => k * (k + 1) * (k + 3) / 2,
        SpaceKind::PScalarTri => (k + 1) * (k + 2) / 2,
        SpaceKind::RtTangentialTri => k * (k + 2),
    }
}

/// Per-point basis values: `values[i][q]` is basis function `i` at point `q`.
/// Scalar spaces store their value in component 0.
#[derive(Clone, Debug)]
pub struct BasisTable {
    pub values: Vec<Vec<[f64; 3]>>,
}

impl BasisTable {
    pub fn n_basis(&self) -> usize {
        self.values.len()
    }

    pub fn n_points(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }
}

#[derive(Debug)]
pub struct ReferenceSpace {
    pub kind: SpaceKind,
    pub degree: usize,
    basis: Vec<VecPoly>,
    /// Per-component coefficient matrices (basis x monomials).
    coeffs: [DMatrix<f64>; 3],
    dof_condition: f64,
}

impl ReferenceSpace {
    pub fn new(kind: SpaceKind, degree: usize) -> Result<Self, SpaceError> {
        if degree > MAX_DEGREE || degree < kind.min_degree() {
            return Err(SpaceError::UnsupportedDegree(degree));
        }
        let generators = generators(kind, degree);
        let (basis, dof_condition) = dual_basis(kind, degree, generators)?;
        if basis.len() != space_dim(kind, degree) {
            return Err(SpaceError::NotUnisolvent { kind, degree });
        }
        let coeffs = coefficient_matrices(&basis, degree);
        Ok(Self {
            kind,
            degree,
            basis,
            coeffs,
            dof_condition,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[VecPoly] {
        &self.basis
    }

    /// Scalar basis function `i` (scalar kinds only).
    pub fn scalar(&self, i: usize) -> &Poly {
        &self.basis[i].0[0]
    }

    /// 2-norm condition number of the DOF matrix of the orthonormal generators.
    pub fn dof_condition(&self) -> f64 {
        self.dof_condition
    }

    pub fn eval_basis(&self, points: &[[f64; 3]]) -> BasisTable {
        check_points(self.kind, points);
        table_from_coeffs(&self.coeffs, self.degree, points)
    }

    /// Curls of a Nédélec basis.
    pub fn eval_curl(&self, points: &[[f64; 3]]) -> Result<BasisTable, SpaceError> {
        if self.kind != SpaceKind::Nedelec1Tet {
            return Err(SpaceError::WrongKind(self.kind));
        }
        check_points(self.kind, points);
        let curls: Vec<VecPoly> = self.basis.iter().map(VecPoly::curl).collect();
        let deg = self.degree.saturating_sub(1);
        Ok(table_from_coeffs(&coefficient_matrices(&curls, deg), deg, points))
    }

    /// Gradients of a scalar basis.
    pub fn eval_grad(&self, points: &[[f64; 3]]) -> Result<BasisTable, SpaceError> {
        if !self.kind.is_scalar() {
            return Err(SpaceError::WrongKind(self.kind));
        }
        let grads: Vec<VecPoly> = self.basis.iter().map(|b| super::poly::grad(&b.0[0])).collect();
        let deg = self.degree.saturating_sub(1);
        Ok(table_from_coeffs(&coefficient_matrices(&grads, deg), deg, points))
    }

    /// Divergences of a Raviart–Thomas basis (component 0 of the table).
    pub fn eval_div(&self, points: &[[f64; 3]]) -> Result<BasisTable, SpaceError> {
        if !matches!(self.kind, SpaceKind::RtTet | SpaceKind::RtTangentialTri) {
            return Err(SpaceError::WrongKind(self.kind));
        }
        let divs: Vec<VecPoly> = self
            .basis
            .iter()
            .map(|b| {
                let d = b.div();
                let deg = d.deg();
                VecPoly([d, Poly::zero(deg), Poly::zero(deg)])
            })
            .collect();
        let deg = self.degree.saturating_sub(1);
        Ok(table_from_coeffs(&coefficient_matrices(&divs, deg), deg, points))
    }

    /// Applies the canonical DOF functionals to a reference field. The field
    /// is sampled, so `exactness` must cover `deg(field) + degree`.
    pub fn apply_dofs(&self, field: &dyn Fn([f64; 3]) -> [f64; 3], exactness: usize) -> Vec<f64> {
        apply_dofs(self.kind, self.degree, field, exactness)
    }

    /// Coefficients of a polynomial field in this basis (exact for members).
    pub fn interpolate_poly(&self, field: &VecPoly) -> Vec<f64> {
        let ex = (field.deg() + self.degree).min(super::quadrature::MAX_EXACTNESS);
        self.apply_dofs(&|x| field.eval(x), ex)
    }

    /// Coefficient matrix for component `c` (rows: basis, columns: monomials).
    pub fn coeff_matrix(&self, c: usize) -> &DMatrix<f64> {
        &self.coeffs[c]
    }

    /// Combination `sum_i c_i b_i` as a polynomial field.
    pub fn combine(&self, c: &[f64]) -> VecPoly {
        assert_eq!(c.len(), self.dim());
        let mut out = VecPoly::zero(self.degree);
        for (ci, b) in c.iter().zip(&self.basis) {
            if *ci != 0.0 {
                out.axpy(*ci, b);
            }
        }
        out
    }
}

fn check_points(kind: SpaceKind, points: &[[f64; 3]]) {
    let tol = -1e-12;
    for p in points {
        let inside = match kind.domain() {
            Domain::Triangle => p[0] >= tol && p[1] >= tol && 1.0 - p[0] - p[1] >= tol,
            _ => p[0] >= tol && p[1] >= tol && p[2] >= tol && 1.0 - p[0] - p[1] - p[2] >= tol,
        };
        debug_assert!(inside, "point {p:?} outside the reference cell");
    }
}

fn coefficient_matrices(fields: &[VecPoly], deg: usize) -> [DMatrix<f64>; 3] {
    let nm = n_monomials(deg);
    let mut out = [
        DMatrix::zeros(fields.len(), nm),
        DMatrix::zeros(fields.len(), nm),
        DMatrix::zeros(fields.len(), nm),
    ];
    for (i, f) in fields.iter().enumerate() {
        for c in 0..3 {
            let p = f.0[c].with_degree(deg.max(f.0[c].deg()));
            for (m, v) in p.coeffs().iter().enumerate().take(nm) {
                out[c][(i, m)] = *v;
            }
        }
    }
    out
}

fn table_from_coeffs(coeffs: &[DMatrix<f64>; 3], deg: usize, points: &[[f64; 3]]) -> BasisTable {
    let mono = monomial_table(deg, points);
    let vals: Vec<DMatrix<f64>> = coeffs.iter().map(|c| c * &mono).collect();
    let n = coeffs[0].nrows();
    let values = (0..n)
        .map(|i| {
            (0..points.len())
                .map(|q| [vals[0][(i, q)], vals[1][(i, q)], vals[2][(i, q)]])
                .collect()
        })
        .collect();
    BasisTable { values }
}

fn scalar_field(p: Poly) -> VecPoly {
    let d = p.deg();
    VecPoly([p, Poly::zero(d), Poly::zero(d)])
}

fn unit_component(p: Poly, c: usize) -> VecPoly {
    let d = p.deg();
    let mut f = VecPoly::zero(d);
    f.0[c] = p;
    f
}

/// Spanning generators for each space (independent by construction).
fn generators(kind: SpaceKind, k: usize) -> Vec<VecPoly> {
    match kind {
        SpaceKind::PScalarTet => monomial_exponents(k)
            .into_iter()
            .map(|e| scalar_field(Poly::monomial(e)))
            .collect(),
        SpaceKind::PScalarTri => monomial_exponents_2d(k)
            .into_iter()
            .map(|e| scalar_field(Poly::monomial(e)))
            .collect(),
        SpaceKind::Nedelec1Tet => {
            let mut g: Vec<VecPoly> = Vec::new();
            for c in 0..3 {
                for e in monomial_exponents(k - 1) {
                    g.push(unit_component(Poly::monomial(e), c));
                }
            }
            g.extend(nedelec_homogeneous_part(k));
            g
        }
        SpaceKind::RtTet => {
            let mut g: Vec<VecPoly> = Vec::new();
            for c in 0..3 {
                for e in monomial_exponents(k - 1) {
                    g.push(unit_component(Poly::monomial(e), c));
                }
            }
            for e in homogeneous_exponents(k - 1) {
                let m = Poly::monomial(e);
                g.push(VecPoly([m.mul_var(0), m.mul_var(1), m.mul_var(2)]));
            }
            g
        }
        SpaceKind::RtTangentialTri => {
            let mut g: Vec<VecPoly> = Vec::new();
            for c in 0..2 {
                for e in monomial_exponents_2d(k - 1) {
                    g.push(unit_component(Poly::monomial(e), c));
                }
            }
            for e in homogeneous_exponents(k - 1).into_iter().filter(|e| e[2] == 0) {
                let m = Poly::monomial(e);
                let d = m.deg() + 1;
                g.push(VecPoly([m.mul_var(0), m.mul_var(1), Poly::zero(d)]));
            }
            g
        }
    }
}

/// Basis of homogeneous degree-`k` fields `p` with `x . p = 0`, the part of
/// `R_k(T)` beyond `P_{k-1}^3`.
fn nedelec_homogeneous_part(k: usize) -> Vec<VecPoly> {
    let hk = homogeneous_exponents(k);
    let hk1 = homogeneous_exponents(k + 1);
    let row_of: HashMap<[usize; 3], usize> = hk1.iter().enumerate().map(|(i, e)| (*e, i)).collect();
    let ncols = 3 * hk.len();
    let mut a = DMatrix::<f64>::zeros(hk1.len(), ncols);
    for c in 0..3 {
        for (j, e) in hk.iter().enumerate() {
            let mut f = *e;
            f[c] += 1;
            a[(row_of[&f], c * hk.len() + j)] = 1.0;
        }
    }
    let ata = a.transpose() * &a;
    let eig = ata.symmetric_eigen();
    let mut out = Vec::new();
    for (idx, lam) in eig.eigenvalues.iter().enumerate() {
        if lam.abs() < 1e-10 {
            let v = eig.eigenvectors.column(idx);
            let mut f = VecPoly::zero(k);
            for c in 0..3 {
                for (j, e) in hk.iter().enumerate() {
                    let w = v[c * hk.len() + j];
                    if w.abs() > 1e-15 {
                        f.0[c].axpy(w, &Poly::monomial(*e));
                    }
                }
            }
            out.push(f);
        }
    }
    out
}

fn inner_exact(domain: Domain, a: &VecPoly, b: &VecPoly) -> f64 {
    (0..3)
        .map(|c| {
            let p = a.0[c].mul(&b.0[c]);
            match domain {
                Domain::Triangle => p.integrate_tri(),
                _ => p.integrate_tet(),
            }
        })
        .sum()
}

/// Orthonormalises the generators and inverts the DOF matrix. Returns the
/// dual basis and the DOF matrix condition number.
fn dual_basis(kind: SpaceKind, k: usize, gens: Vec<VecPoly>) -> Result<(Vec<VecPoly>, f64), SpaceError> {
    let n = gens.len();
    let domain = kind.domain();
    let mut gram = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = inner_exact(domain, &gens[i], &gens[j]);
            gram[(i, j)] = v;
            gram[(j, i)] = v;
        }
    }
    let chol = gram
        .cholesky()
        .ok_or(SpaceError::NotUnisolvent { kind, degree: k })?;
    let linv = chol
        .l()
        .try_inverse()
        .ok_or(SpaceError::NotUnisolvent { kind, degree: k })?;
    let ortho: Vec<VecPoly> = (0..n)
        .map(|i| {
            let mut f = VecPoly::zero(k);
            for j in 0..=i {
                let w = linv[(i, j)];
                if w != 0.0 {
                    f.axpy(w, &gens[j]);
                }
            }
            f
        })
        .collect();

    let ex = 2 * k + 1;
    let mut d = DMatrix::<f64>::zeros(n, n);
    for (j, g) in ortho.iter().enumerate() {
        let vals = apply_dofs(kind, k, &|x| g.eval(x), ex);
        if vals.len() != n {
            return Err(SpaceError::NotUnisolvent { kind, degree: k });
        }
        for (i, v) in vals.into_iter().enumerate() {
            d[(i, j)] = v;
        }
    }
    let sv = d.clone().svd(false, false).singular_values;
    let cond = sv.max() / sv.min();
    if !cond.is_finite() || cond > 1e12 {
        return Err(SpaceError::NotUnisolvent { kind, degree: k });
    }
    let dinv = d
        .try_inverse()
        .ok_or(SpaceError::NotUnisolvent { kind, degree: k })?;
    let basis = (0..n)
        .map(|b| {
            let mut f = VecPoly::zero(k);
            for (j, g) in ortho.iter().enumerate() {
                let w = dinv[(j, b)];
                if w != 0.0 {
                    f.axpy(w, g);
                }
            }
            f
        })
        .collect();
    Ok((basis, cond))
}

/// Shifted Legendre polynomial `P_m(2s - 1)` on `[0,1]`.
pub fn shifted_legendre(m: usize, s: f64) -> f64 {
    let t = 2.0 * s - 1.0;
    let (mut p0, mut p1) = (1.0, t);
    if m == 0 {
        return 1.0;
    }
    for n in 2..=m {
        let p2 = ((2 * n - 1) as f64 * t * p1 - (n - 1) as f64 * p0) / n as f64;
        p0 = p1;
        p1 = p2;
    }
    p1
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn lerp2(a: [f64; 3], b: [f64; 3], c: [f64; 3], s: f64, t: f64) -> [f64; 3] {
    [
        a[0] + s * (b[0] - a[0]) + t * (c[0] - a[0]),
        a[1] + s * (b[1] - a[1]) + t * (c[1] - a[1]),
        a[2] + s * (b[2] - a[2]) + t * (c[2] - a[2]),
    ]
}

/// Edge moments `int_0^1 (u . (b - a)) P_m(s) ds` for `m < n`.
fn edge_moments(out: &mut Vec<f64>, field: &dyn Fn([f64; 3]) -> [f64; 3], a: [f64; 3], b: [f64; 3], n: usize, ex: usize) {
    if n == 0 {
        return;
    }
    let q = quadrature(Domain::Segment, ex.min(super::quadrature::MAX_EXACTNESS)).expect("segment rule");
    let d = sub(b, a);
    let mut acc = vec![0.0; n];
    for (p, w) in q.points.iter().zip(&q.weights) {
        let s = p[0];
        let x = [a[0] + s * d[0], a[1] + s * d[1], a[2] + s * d[2]];
        let ut = dot(field(x), d);
        for (m, slot) in acc.iter_mut().enumerate() {
            *slot += w * ut * shifted_legendre(m, s);
        }
    }
    out.extend(acc);
}

/// Face moments `int_{ref tri} (u . dir) s^i t^j ds dt` over the face
/// parametrised from its lowest vertex, for `i + j <= deg`.
fn face_moments(
    out: &mut Vec<f64>,
    field: &dyn Fn([f64; 3]) -> [f64; 3],
    v: [[f64; 3]; 3],
    dirs: &[[f64; 3]],
    deg: Option<usize>,
    ex: usize,
) {
    let Some(deg) = deg else { return };
    let q = quadrature(Domain::Triangle, ex.min(super::quadrature::MAX_EXACTNESS)).expect("triangle rule");
    let exps = monomial_exponents_2d(deg);
    let mut acc = vec![0.0; exps.len() * dirs.len()];
    for (p, w) in q.points.iter().zip(&q.weights) {
        let (s, t) = (p[0], p[1]);
        let u = field(lerp2(v[0], v[1], v[2], s, t));
        for (di, dir) in dirs.iter().enumerate() {
            let ud = dot(u, *dir);
            for (m, e) in exps.iter().enumerate() {
                acc[di * exps.len() + m] += w * ud * s.powi(e[0] as i32) * t.powi(e[1] as i32);
            }
        }
    }
    out.extend(acc);
}

/// Interior moments `int (u . e_c) m` for monomials `m` of degree `<= deg`.
fn interior_moments(
    out: &mut Vec<f64>,
    field: &dyn Fn([f64; 3]) -> [f64; 3],
    domain: Domain,
    ncomp: usize,
    deg: Option<usize>,
    ex: usize,
) {
    let Some(deg) = deg else { return };
    let q = quadrature(domain, ex.min(super::quadrature::MAX_EXACTNESS)).expect("cell rule");
    let exps = if domain == Domain::Triangle {
        monomial_exponents_2d(deg)
    } else {
        monomial_exponents(deg)
    };
    let pts: Vec<[f64; 3]> = q.points.clone();
    let mono = monomial_table(deg, &pts);
    let all = if domain == Domain::Triangle {
        monomial_exponents(deg)
    } else {
        exps.clone()
    };
    let rows: Vec<usize> = exps
        .iter()
        .map(|e| all.iter().position(|f| f == e).expect("monomial row"))
        .collect();
    let mut acc = vec![0.0; exps.len() * ncomp];
    for (qi, (p, w)) in q.points.iter().zip(&q.weights).enumerate() {
        let u = field(*p);
        for c in 0..ncomp {
            for (m, r) in rows.iter().enumerate() {
                acc[c * exps.len() + m] += w * u[c] * mono[(*r, qi)];
            }
        }
    }
    out.extend(acc);
}

fn apply_dofs(kind: SpaceKind, k: usize, field: &dyn Fn([f64; 3]) -> [f64; 3], ex: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let sub_deg = |d: isize| if d >= 0 { Some(d as usize) } else { None };
    match kind {
        SpaceKind::PScalarTet => {
            if k == 0 {
                out.push(field([0.25, 0.25, 0.25])[0]);
            } else {
                let nodes = lagrange_nodes(k);
                for i in 0..nodes.len() {
                    out.push(field(nodes.point(i))[0]);
                }
            }
        }
        SpaceKind::PScalarTri => {
            if k == 0 {
                out.push(field([1.0 / 3.0, 1.0 / 3.0, 0.0])[0]);
            } else {
                for n in lagrange_nodes_tri(k) {
                    out.push(field([n[1] as f64 / k as f64, n[2] as f64 / k as f64, 0.0])[0]);
                }
            }
        }
        SpaceKind::Nedelec1Tet => {
            for [a, b] in TET_EDGES {
                edge_moments(&mut out, field, REF_TET[a], REF_TET[b], k, ex);
            }
            for f in TET_FACES {
                let v = [REF_TET[f[0]], REF_TET[f[1]], REF_TET[f[2]]];
                let dirs = [sub(v[1], v[0]), sub(v[2], v[0])];
                face_moments(&mut out, field, v, &dirs, sub_deg(k as isize - 2), ex);
            }
            interior_moments(&mut out, field, Domain::Tetrahedron, 3, sub_deg(k as isize - 3), ex);
        }
        SpaceKind::RtTet => {
            for f in TET_FACES {
                let v = [REF_TET[f[0]], REF_TET[f[1]], REF_TET[f[2]]];
                let dirs = [cross(sub(v[1], v[0]), sub(v[2], v[0]))];
                face_moments(&mut out, field, v, &dirs, sub_deg(k as isize - 1), ex);
            }
            interior_moments(&mut out, field, Domain::Tetrahedron, 3, sub_deg(k as isize - 2), ex);
        }
        SpaceKind::RtTangentialTri => {
            for [a, b] in TRI_EDGES {
                // Normal moments: rotate the edge vector by -90 degrees.
                let d = sub(REF_TRI[b], REF_TRI[a]);
                let nrm = [d[1], -d[0], 0.0];
                edge_moments(&mut out, &|x| {
                    let u = field(x);
                    // edge_moments dots with (b - a); feed it the rotated value.
                    let un = dot(u, nrm);
                    let dd = dot(d, d);
                    [d[0] * un / dd, d[1] * un / dd, 0.0]
                }, REF_TRI[a], REF_TRI[b], k, ex);
            }
            interior_moments(&mut out, field, Domain::Triangle, 2, sub_deg(k as isize - 2), ex);
        }
    }
    out
}

type SpaceCache = Mutex<HashMap<(SpaceKind, usize), Arc<ReferenceSpace>>>;

/// Cached reference space.
pub fn reference_space(kind: SpaceKind, degree: usize) -> Result<Arc<ReferenceSpace>, SpaceError> {
    static CACHE: OnceLock<SpaceCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(s) = cache.lock().expect("space cache poisoned").get(&(kind, degree)) {
        return Ok(s.clone());
    }
    let space = Arc::new(ReferenceSpace::new(kind, degree)?);
    cache
        .lock()
        .expect("space cache poisoned")
        .entry((kind, degree))
        .or_insert(space.clone());
    Ok(space)
}

/// Solves `M c = b` in the least-squares sense; used by the exact-sequence
/// representation tests and diagnostics.
pub fn lstsq(m: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let svd = m.clone().svd(true, true);
    svd.solve(b, 1e-13 * svd.singular_values.max()).expect("svd solve")
}
