//! Built-in model problems with closed-form data.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::femsys::{CurrentDensity, MaterialField, VectorFn};
use crate::mesh::{build_mesh, l_brick_mesh, unit_cube_mesh, Mesh};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    CubePoly,
    LbrickSingular,
    CubeJumpMu,
}

/// Line where refinement is expected to concentrate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    /// `x = y = 0`.
    ReentrantEdge,
    /// `y = z = 1/2`.
    InterfaceEdge,
}

impl Feature {
    /// Distance from `p` to the feature line.
    pub fn distance(&self, p: [f64; 3]) -> f64 {
        match self {
            Feature::ReentrantEdge => p[0].hypot(p[1]),
            Feature::InterfaceEdge => (p[1] - 0.5).hypot(p[2] - 0.5),
        }
    }

    /// Whether tet `t` has a vertex on the line.
    pub fn touches(&self, mesh: &Mesh, t: usize) -> bool {
        mesh.tet(t).iter().any(|&v| self.distance(mesh.vertex(v)) < 1e-10)
    }
}

#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub kind: ProblemKind,
    /// Permeability outside `{y < 1/2, z < 1/2}` for the jump problem.
    pub mu2: Option<f64>,
    pub mu: MaterialField,
    pub j: CurrentDensity,
    pub exact_u: Option<VectorFn>,
    pub exact_h: Option<VectorFn>,
    pub feature: Option<Feature>,
}

impl std::fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("mu2", &self.mu2)
            .field("exact", &self.exact_h.is_some())
            .finish()
    }
}

impl ProblemSpec {
    /// Initial mesh with `n` cells per unit length.
    pub fn mesh(&self, n: usize) -> Mesh {
        match self.kind {
            ProblemKind::CubePoly => unit_cube_mesh(n),
            ProblemKind::LbrickSingular => l_brick_mesh(n),
            ProblemKind::CubeJumpMu => {
                let m = unit_cube_mesh(n);
                let tags = (0..m.n_tets())
                    .map(|t| {
                        let c = m.centroid(t);
                        if c[1] < 0.5 && c[2] < 0.5 {
                            1
                        } else {
                            2
                        }
                    })
                    .collect();
                build_mesh(m.vertices().to_vec(), m.tets().to_vec(), Some(tags)).expect("retagged cube")
            }
        }
    }

    /// Whether the closed-form `H` is accurate enough under quadrature to
    /// serve as an error reference (not so for the singular field).
    pub fn error_trusted(&self) -> bool {
        self.exact_h.is_some() && self.kind != ProblemKind::LbrickSingular
    }

    pub fn label(&self) -> String {
        match self.mu2 {
            Some(m) => format!("{}(mu2={m})", self.name),
            None => self.name.clone(),
        }
    }
}

fn q(t: f64) -> f64 {
    t * (1.0 - t)
}

fn dq(t: f64) -> f64 {
    1.0 - 2.0 * t
}

pub fn cube_poly_u(p: [f64; 3]) -> [f64; 3] {
    let (x, y, z) = (q(p[0]), q(p[1]), q(p[2]));
    [y * z, x * z, x * y]
}

pub fn cube_poly_h(p: [f64; 3]) -> [f64; 3] {
    let (x, y, z) = (p[0], p[1], p[2]);
    [
        q(x) * (dq(y) - dq(z)),
        q(y) * (dq(z) - dq(x)),
        q(z) * (dq(x) - dq(y)),
    ]
}

pub fn cube_poly_j(p: [f64; 3]) -> [f64; 3] {
    let (x, y, z) = (q(p[0]), q(p[1]), q(p[2]));
    [2.0 * (y + z), 2.0 * (x + z), 2.0 * (x + y)]
}

pub fn cube_poly() -> ProblemSpec {
    ProblemSpec {
        name: "cube_poly".into(),
        kind: ProblemKind::CubePoly,
        mu2: None,
        mu: MaterialField::constant(1.0),
        j: CurrentDensity::polynomial(cube_poly_j, 2),
        exact_u: Some(Arc::new(cube_poly_u)),
        exact_h: Some(Arc::new(cube_poly_h)),
        feature: None,
    }
}

/// Derivatives of `(1-x^2)^2 (1-y^2)^2 ((1-z)z)^2` of orders `(a, b, c)`.
fn bubble(p: [f64; 3], d: [usize; 3]) -> f64 {
    let a = |t: f64, n: usize| match n {
        0 => (1.0 - t * t).powi(2),
        1 => -4.0 * t * (1.0 - t * t),
        2 => 12.0 * t * t - 4.0,
        3 => 24.0 * t,
        _ => unreachable!(),
    };
    let b = |z: f64, n: usize| {
        let s = z - z * z;
        match n {
            0 => s * s,
            1 => 2.0 * s * (1.0 - 2.0 * z),
            2 => 2.0 * (1.0 - 2.0 * z).powi(2) - 4.0 * s,
            3 => -12.0 * (1.0 - 2.0 * z),
            _ => unreachable!(),
        }
    };
    a(p[0], d[0]) * a(p[1], d[1]) * b(p[2], d[2])
}

/// `S = r^{2/3} cos(2 phi / 3)` with `phi` in `[0, 2 pi)` and its planar
/// derivatives, from the holomorphic `g(w) = w^{2/3}`. Entry `[m][n]` is
/// `d^{m+n} S / dx^m dy^n` for `m + n <= 3`.
fn singular(p: [f64; 3]) -> [[f64; 4]; 4] {
    let mut out = [[0.0; 4]; 4];
    let r = p[0].hypot(p[1]);
    if r < 1e-14 {
        return out;
    }
    let mut phi = p[1].atan2(p[0]);
    if phi < 0.0 {
        phi += 2.0 * std::f64::consts::PI;
    }
    let pow = |a: f64| Complex64::from_polar(r.powf(a), a * phi);
    // g^(n) = c_n w^{2/3 - n}
    let g = [
        pow(2.0 / 3.0),
        pow(-1.0 / 3.0) * (2.0 / 3.0),
        pow(-4.0 / 3.0) * (-2.0 / 9.0),
        pow(-7.0 / 3.0) * (8.0 / 27.0),
    ];
    let i = Complex64::i();
    for m in 0..4 {
        for n in 0..4 - m {
            out[m][n] = (g[m + n] * i.powu(n as u32)).re;
        }
    }
    out
}

/// Derivative `(dx, dy, dz)` of `psi = P S`, up to total order 3 in `x, y`
/// plus any order of `P` in `z`.
fn psi(p: [f64; 3], d: [usize; 3]) -> f64 {
    let s = singular(p);
    let mut v = 0.0;
    for a in 0..=d[0] {
        for b in 0..=d[1] {
            let c = binom(d[0], a) * binom(d[1], b);
            v += c * bubble(p, [a, b, d[2]]) * s[d[0] - a][d[1] - b];
        }
    }
    v
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn lbrick_u(p: [f64; 3]) -> [f64; 3] {
    [psi(p, [0, 1, 0]), -psi(p, [1, 0, 0]), 0.0]
}

pub fn lbrick_h(p: [f64; 3]) -> [f64; 3] {
    [psi(p, [1, 0, 1]), psi(p, [0, 1, 1]), -(psi(p, [2, 0, 0]) + psi(p, [0, 2, 0]))]
}

/// `j = -Laplace u = (-d_y L, d_x L, 0)` with `L = Laplace psi`.
pub fn lbrick_j(p: [f64; 3]) -> [f64; 3] {
    let dl = |dx: usize, dy: usize| {
        psi(p, [2 + dx, dy, 0]) + psi(p, [dx, 2 + dy, 0]) + psi(p, [dx, dy, 2])
    };
    [-dl(0, 1), dl(1, 0), 0.0]
}

pub fn lbrick_singular() -> ProblemSpec {
    ProblemSpec {
        name: "lbrick_singular".into(),
        kind: ProblemKind::LbrickSingular,
        mu2: None,
        mu: MaterialField::constant(1.0),
        j: CurrentDensity::analytic(lbrick_j),
        exact_u: Some(Arc::new(lbrick_u)),
        exact_h: Some(Arc::new(lbrick_h)),
        feature: Some(Feature::ReentrantEdge),
    }
}

pub fn cube_jump_mu(mu2: f64) -> ProblemSpec {
    ProblemSpec {
        name: "cube_jump_mu".into(),
        kind: ProblemKind::CubeJumpMu,
        mu2: Some(mu2),
        mu: MaterialField::by_tag(&[(1, 1.0), (2, mu2)], 1.0).expect("positive permeability"),
        j: CurrentDensity::polynomial(|_| [1.0, 0.0, 0.0], 0),
        exact_u: None,
        exact_h: None,
        feature: Some(Feature::InterfaceEdge),
    }
}

pub fn builtin_problems() -> Vec<ProblemSpec> {
    let mut v = vec![cube_poly(), lbrick_singular()];
    v.extend([10.0, 100.0, 1000.0].map(cube_jump_mu));
    v
}

/// Looks a problem up by name; `mu2` only applies to `cube_jump_mu`
/// (default 100).
pub fn problem_by_name(name: &str, mu2: Option<f64>) -> Option<ProblemSpec> {
    match name {
        "cube_poly" => Some(cube_poly()),
        "lbrick_singular" => Some(lbrick_singular()),
        "cube_jump_mu" => Some(cube_jump_mu(mu2.unwrap_or(100.0))),
        _ => None,
    }
}
