//! Linearization along a base solution: tangent flow, cocycle matrices,
//! Lyapunov spectra and stability probes.
//!
//! The tangent scheme is the exact derivative of the discrete mild scheme,
//! so finite differences of the nonlinear solver converge to it at first
//! order in the perturbation size.

mod lyapunov;
mod stability;
mod tangent;

pub use lyapunov::{
    build_cocycle_matrix, lyapunov_spectrum, random_orthogonal, write_lyapunov_json, FrameInit,
    LyapunovConfig, LyapunovReport,
};
pub use stability::{
    stability_probe, stable_direction_check, write_decay_csv, DecayRecord, StabilityConfig,
    StabilityReport, StableDirectionConfig, StableDirectionReport,
};
pub use tangent::{propagate, solve_linearized, TangentPath};
