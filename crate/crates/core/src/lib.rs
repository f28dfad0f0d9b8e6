//! Numerical toolkit for semilinear rough SPDEs driven by Gaussian rough paths.
//!
//! The crate is organised bottom-up:
//!
//! - [`driver`]: fractional Brownian drivers, piecewise-linear rough path lifts,
//!   Hölder norms, the control function `W`, greedy partitions and
//!   Cameron–Martin translations.
//! - [`spectral`]: the Sobolev scale on the torus (periodic or Dirichlet sine
//!   basis), the heat semigroup and dealiased pointwise maps.
//! - [`controlled`]: controlled paths, their norms and the semigroup sewing
//!   integral.
//! - [`solver`]: Picard iteration for the mild equation on greedy subintervals,
//!   a priori bounds and moment experiments.
//! - [`linearization`]: the tangent flow, cocycle matrices, Lyapunov spectra and
//!   stability probes.
//! - [`experiments`]: configuration, validation and reproducible pipelines used by
//!   the command line tool.

pub mod controlled;
pub mod driver;
pub mod error;
pub mod experiments;
pub mod linearization;
pub mod par;
pub mod rng;
pub mod solver;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
