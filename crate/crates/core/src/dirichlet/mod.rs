//! Dirichlet problems for the Laplacian in planar convex domains with a flat
//! boundary piece.

pub mod bem;
pub mod demo;
pub mod domain;
pub mod fd;
pub mod probe;


pub use demo::{run_demo, DemoConfig, DemoReport};
pub use bem::{BemSolver, BvpSolution, Resolution};
pub use fd::{solve_fd, FdSolution};
pub use domain::{BoundaryPoint, Domain, PrototypeParams};
