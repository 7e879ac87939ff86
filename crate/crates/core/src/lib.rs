//! Gaussian domination for spin O(N) models on finite graphs.
//!
//! The crate is organized by engine:
//!
//! - [`graph`] and [`greens`]: graphs, generators, Laplacians and the Green's
//!   function of the random walk absorbed at a sink.
//! - [`exact`]: Ising enumeration and the closed-form star, binary-tree and
//!   parallel-path computations.
//! - [`mc`]: Metropolis / heat-bath sampling of the O(N) measure and its
//!   estimators.
//! - [`gd`]: Hessian of the shifted partition function, Gaussian-domination
//!   verdicts and the correlation lower bound they imply.
//! - [`gff`]: the rooted Gaussian free field and the low-temperature
//!   convergence report.
//! - [`cli`]: the `spinlab` command line.
//!
//! Vertices are 0-based in the library and 1-based in text formats.

pub mod cli;
pub mod error;
pub mod exact;
pub mod gd;
pub mod gff;
pub mod graph;
pub mod greens;
pub mod mc;
pub mod quadrature;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use graph::{Graph, GraphFamily};
