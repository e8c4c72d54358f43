//! Polynomial spaces on the reference tetrahedron and triangle, quadrature,
//! and the affine maps that carry them to physical elements.

pub mod lagrange;
pub mod maps;
pub mod poly;
pub mod quadrature;
pub mod spaces;
pub mod tables;

pub use lagrange::{lagrange_nodes, LagrangeNodeSet, NodeLocation};
pub use maps::{covariant_map, piola_map, AffineMap};
pub use poly::{Poly, VecPoly};
pub use quadrature::{quadrature, Domain, QuadratureRule, MAX_EXACTNESS};
pub use tables::{ref_table, RefTable};
pub use spaces::{reference_space, space_dim, BasisTable, ReferenceSpace, SpaceKind, MAX_DEGREE};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpaceError {
    #[error("unsupported polynomial degree {0}")]
    UnsupportedDegree(usize),
    #[error("operation not defined for space {0:?}")]
    WrongKind(SpaceKind),
    #[error("degrees of freedom of {kind:?} (k={degree}) are not unisolvent")]
    NotUnisolvent { kind: SpaceKind, degree: usize },
    #[error("element map has non-positive Jacobian determinant {0:e}")]
    SingularJacobian(f64),
}
