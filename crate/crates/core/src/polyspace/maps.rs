//! Affine element maps and the covariant / contravariant Piola transforms.

use super::SpaceError;

pub type Mat3 = [[f64; 3]; 3];

/// `x = x0 + J xhat`, with `J` holding the edge vectors `v_i - v_0` as columns.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineMap {
    pub x0: [f64; 3],
    pub jac: Mat3,
    pub jac_inv: Mat3,
    /// Signed determinant of `jac`.
    pub det: f64,
}

pub fn det3(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

pub fn inv3(m: &Mat3) -> Option<Mat3> {
    let d = det3(m);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (a, b) = ((j + 1) % 3, (j + 2) % 3);
            let (c, e) = ((i + 1) % 3, (i + 2) % 3);
            r[i][j] = (m[a][c] * m[b][e] - m[a][e] * m[b][c]) / d;
        }
    }
    Some(r)
}

pub fn matvec(m: &Mat3, v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

pub fn transpose(m: &Mat3) -> Mat3 {
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = m[j][i];
        }
    }
    t
}

impl AffineMap {
    /// Map from the reference tetrahedron onto the vertices in the given
    /// order. The determinant may be negative when the order is not positively
    /// oriented; integrals use `|det|`.
    pub fn new(v: [[f64; 3]; 4]) -> Result<Self, SpaceError> {
        let mut jac = [[0.0; 3]; 3];
        for i in 0..3 {
            for r in 0..3 {
                jac[r][i] = v[i + 1][r] - v[0][r];
            }
        }
        let det = det3(&jac);
        let jac_inv = inv3(&jac).ok_or(SpaceError::SingularJacobian(det))?;
        Ok(Self {
            x0: v[0],
            jac,
            jac_inv,
            det,
        })
    }

    pub fn abs_det(&self) -> f64 {
        self.det.abs()
    }

    pub fn volume(&self) -> f64 {
        self.det.abs() / 6.0
    }

    pub fn to_physical(&self, xh: [f64; 3]) -> [f64; 3] {
        let d = matvec(&self.jac, xh);
        [self.x0[0] + d[0], self.x0[1] + d[1], self.x0[2] + d[2]]
    }

    pub fn to_reference(&self, x: [f64; 3]) -> [f64; 3] {
        matvec(&self.jac_inv, [x[0] - self.x0[0], x[1] - self.x0[1], x[2] - self.x0[2]])
    }

    /// `J^{-T}`, the covariant transform for tangential traces.
    pub fn covariant(&self) -> Mat3 {
        transpose(&self.jac_inv)
    }

    /// `J / det J`, the transform for curls and Raviart–Thomas fields.
    pub fn piola(&self) -> Mat3 {
        let mut p = self.jac;
        for row in p.iter_mut() {
            for v in row.iter_mut() {
                *v /= self.det;
            }
        }
        p
    }

    /// `det J * J^{-1}`, pulling a physical flux back to the reference cell.
    pub fn piola_inverse(&self) -> Mat3 {
        let mut p = self.jac_inv;
        for row in p.iter_mut() {
            for v in row.iter_mut() {
                *v *= self.det;
            }
        }
        p
    }
}

fn require_positive(map: &AffineMap) -> Result<(), SpaceError> {
    if map.det <= 0.0 {
        return Err(SpaceError::SingularJacobian(map.det));
    }
    Ok(())
}

/// `u = J^{-T} uhat` for a positively oriented map.
pub fn covariant_map(map: &AffineMap, uhat: [f64; 3]) -> Result<[f64; 3], SpaceError> {
    require_positive(map)?;
    Ok(matvec(&map.covariant(), uhat))
}

/// `v = J vhat / det J` for a positively oriented map.
pub fn piola_map(map: &AffineMap, vhat: [f64; 3]) -> Result<[f64; 3], SpaceError> {
    require_positive(map)?;
    Ok(matvec(&map.piola(), vhat))
}
