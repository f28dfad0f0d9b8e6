//! Mild solutions by Picard iteration on greedy subintervals.
//!
//! One grid step of the scheme is
//! `Z_{k+1} = S_h Z_k + h [psi F(Z_k) + (phi1 - psi) F(Z_{k+1})] + S_h Xi_k(Z_k)`
//! with the rough germ `Xi_k(z) = sum_i G_i(z) dX^i + sum_ij DG_i(z)[G_j(z)] XX^{ji}`.
//! The drift weights integrate the semigroup exactly against the linear
//! interpolant of `F`, which keeps the smoothing of `S` intact for drifts
//! with values in `B_{alpha - sigma}`.

mod bound;
mod mild;
mod moments;
mod problem;
pub mod quadrature;

pub use bound::{apriori_bound, BoundReport};
pub use mild::{mild_residual, solve_mild, Checkpoint, MildSolution, SolvedInterval, SolverConfig};
pub use moments::{greedy_counts, moment_experiment, survival_fit, survival_points, write_moments, MomentConfig, MomentEstimate, MomentReport, SurvivalFit};
pub use problem::{Diffusion, Drift, Node, Problem, ProblemSpec, SemigroupKind, Violation};
