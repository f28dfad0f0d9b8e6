//! Configuration, validation and reproducible pipelines.
//!
//! A run is described by one [`ExperimentConfig`] (TOML or JSON). [`validate`]
//! lists every violated structural inequality without computing anything;
//! [`run`] refuses invalid configurations, then writes its CSV/JSON artifacts and
//! a `manifest.json` into the output directory. Numeric artifacts depend only on
//! the configuration (seed included), not on the thread count.

mod config;
mod run;

pub use config::{
    validate, ConvergenceBlock, DriverConfig, ExperimentConfig, ExperimentId, InitialMode, LyapunovBlock,
    MomentsBlock,
};
pub use run::{run, write_trajectory, RunSummary, VERSION};

#[cfg(test)]
mod tests;
