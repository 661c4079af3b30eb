//! Numerical laboratory for constant-mean-curvature graphs over a round disk.
//!
//! The crate solves the Dirichlet problem `div(∇f / W) = 2H`, `f = 0` on the circle
//! of radius `r`, computes the discrete geometry of the resulting graph and checks,
//! with measured convergence orders against exact spherical caps, the integral
//! identities and inequalities that force such a graph to be a disk or a small cap.

pub mod catalog;
pub mod config;
pub mod error;
pub mod experiment;
mod faces;
pub mod field;
pub mod geometry;
pub mod grid;
pub mod harness;
pub mod persist;
pub mod quadrature;
pub mod solver;
pub mod stencil;
pub mod vector;

pub use catalog::{cap_from_h, cap_height_field, CapBranch, CapExact, CapSpec};
pub use error::{Error, Result};
pub use field::HeightField;
pub use geometry::{build_frame, Derivatives, SurfaceFrame};
pub use grid::DiskGrid;
pub use quadrature::{boundary_integral, boundary_trace, surface_integral, BoundaryTrace};
pub use config::{ExperimentConfig, Overrides};
pub use experiment::ReportBundle;
pub use harness::{CheckName, ConvergenceStudy, IdentityReport};
pub use persist::{load_field, save_field};
pub use solver::{solve_dirichlet, SolveResult, SolverConfig};
pub use vector::Vector3;
