//! Nédélec finite elements for magnetostatics with an equilibrated a
//! posteriori error estimator built from local problems.

pub mod polyspace;
pub mod mesh;
pub mod femsys;
pub mod equilibrate;
pub mod residual;
pub mod adapt;
pub mod bench;

pub use adapt::{adaptive_loop, dorfler_mark, AdaptiveConfig, EstimatorChoice};
pub use bench::{run_experiment, ExperimentReport, LevelRow, ProblemSpec, RefinementMode, RunConfig, RunError};
pub use equilibrate::{equilibrate, EquilibrationConfig, EquilibrationError, FaceSolver};
pub use femsys::{BrokenField, CurrentDensity, FemError, MaterialField, SolverConfig};
pub use mesh::{Mesh, MeshError};
pub use polyspace::{AffineMap, SpaceError};
pub use residual::{compute_residual_estimator, ResidualResult};
