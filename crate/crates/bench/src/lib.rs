//! Fixtures shared by the benchmarks.

use hcurl_core::bench::problems::cube_poly;
use hcurl_core::femsys::{element_maps, solve_field, FieldSolution, SolverConfig};
use hcurl_core::{AffineMap, Mesh, ProblemSpec};

/// A solved cube problem on an `n^3` grid with Nédélec degree `k`.
pub struct Fixture {
    pub problem: ProblemSpec,
    pub mesh: Mesh,
    pub maps: Vec<AffineMap>,
    pub degree: usize,
    pub solution: FieldSolution,
}

impl Fixture {
    pub fn cube(n: usize, degree: usize) -> Fixture {
        let problem = cube_poly();
        let mesh = problem.mesh(n);
        let maps = element_maps(&mesh);
        let solution = solve_field(&mesh, &maps, degree, &problem.mu, &problem.j, &SolverConfig::default())
            .expect("cube solve");
        Fixture {
            problem,
            mesh,
            maps,
            degree,
            solution,
        }
    }
}
