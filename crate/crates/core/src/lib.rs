//! Derivative-free spectral conjugate-gradient projection methods for
//! nonlinear monotone equations `G(x) = 0` over a closed convex set.
//!
//! The two solvers, [`Method::Gmopcgm`] and [`Method::Gcgpm`], share the
//! Solodov–Svaiter hyperplane projection framework in [`solver`]; their
//! search directions live in [`directions`]. [`problems`], [`bench`],
//! [`sparse`] and [`logreg`] supply test problems and applications.

pub mod bench;
pub mod directions;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod logreg;
pub mod perry;
pub mod problems;
pub mod solver;
pub mod sparse;
pub mod system;

pub use error::{Error, Result};
pub use geometry::{FeasibleSet, SetKind};
pub use problems::{make_problem, make_problem_with, starting_points, MonotoneProblem};
pub use solver::{solve, solve_observed, Method, MethodConfig, SolveReport, Status};
pub use system::{Constrained, MonotoneSystem};
