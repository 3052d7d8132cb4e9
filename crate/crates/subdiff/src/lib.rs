//! Finite volume element solver for the two-dimensional time-fractional
//! subdiffusion equation u' + B^alpha L u = f with L = -Delta, homogeneous
//! Dirichlet data, and a Riemann-Liouville derivative of order 1 - alpha.
//!
//! Space is discretized by piecewise-linear finite volume elements on a
//! barycentric dual mesh; time by a piecewise-linear discontinuous Galerkin
//! method on graded meshes, with the fractional memory term assembled from
//! exact kernel moments. The `experiment` module drives convergence-rate
//! studies over refinement ladders; `subdiff-cli` exposes them on the
//! command line.
//!
//! The `parallel` feature (on by default) runs the data-parallel inner loops
//! (history accumulation, error scans, matrix-vector products) on rayon.
//! Reductions use fixed chunking with ordered combination, so results are
//! bitwise identical with and without the feature.

pub mod dg;
pub mod error;
pub mod experiment;
pub mod fem;
pub mod fv;
pub mod kernel;
pub mod linalg;
pub mod mesh;
pub mod norms;
pub mod problems;
pub mod quad;

pub use error::{Error, Result};
