//! Implicit solvers for `u_t = Δφ(u)` on radial grids and 2D lattices.

mod cartesian;
pub mod linalg;
pub mod mesh;
pub mod problem;
pub mod radial;
pub mod series;
mod solve;
mod stepper;

pub use mesh::MeshOptions;
pub use problem::{BoundaryProfile, DtPolicy, Formulation, ProblemSpec, Setup, SolverOptions};
pub use radial::{solve_radial, RadialEnd, RadialProblem};
pub use series::{FieldSeries, Manifest, SchemeMeta, Snapshot};
pub use solve::{sandwich_check, solve_cauchy, solve_dirichlet, solve_linear_heat, SandwichReport};
