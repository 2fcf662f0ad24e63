//! Lowest-order finite elements for the conical problem: edge elements for the
//! in-plane field, nodal elements for E3, PML strips as stretched quads.

pub mod adaptive;
pub mod basis;
pub mod boundary;
pub mod field;
pub mod problem;
pub mod quadrature;
pub mod space;

pub use boundary::{BoundaryData, ExteriorField};
pub use field::FemSolution;
pub use problem::FemProblem;
pub use space::{Entity, FeSpace};
