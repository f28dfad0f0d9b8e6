//! Gaussian drivers and their rough path lifts.
//!
//! A [`GridPath`] is an `R^n`-valued path sampled on the uniform grid
//! `t_i = i T / m`. [`lift_piecewise_linear`] enhances it with second-level
//! blocks on every grid segment; all multi-step second levels are defined by
//! Chen composition, so the lift is Chen-consistent on the grid by
//! construction.

mod control;
mod fbm;
pub mod io;
mod lift;
mod translate;

pub use control::{
    cm_variation, control_value, greedy_partition, ControlScan, GreedyPartition,
};
pub use fbm::{fbm_covariance, sample_fbm, FbmSampler};
pub use lift::{hoelder_norms, hoelder_norms_with, lift_piecewise_linear, HoelderNorms, RoughPathGrid};
pub use translate::translate;

use crate::{Error, Result};

/// Path values on a uniform time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridPath {
    horizon: f64,
    steps: usize,
    channels: usize,
    /// Row-major `(steps + 1) x channels`.
    values: Vec<f64>,
    seed: Option<u64>,
    hurst: Option<f64>,
}

impl GridPath {
    pub fn new(horizon: f64, channels: usize, values: Vec<f64>) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "horizon must be positive and finite, got {horizon}"
            )));
        }
        if channels == 0 {
            return Err(Error::InvalidParameter("a path needs at least one channel".into()));
        }
        if !values.len().is_multiple_of(channels) || values.len() / channels < 2 {
            return Err(Error::InvalidParameter(format!(
                "{} values do not form at least two grid points of {channels} channels",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite path value at grid point {}",
                i / channels
            )));
        }
        let steps = values.len() / channels - 1;
        Ok(Self {
            horizon,
            steps,
            channels,
            values,
            seed: None,
            hurst: None,
        })
    }

    pub fn zeros(horizon: f64, steps: usize, channels: usize) -> Result<Self> {
        Self::new(horizon, channels, vec![0.0; (steps + 1) * channels])
    }

    /// Sample `f(t)` at the grid times.
    pub fn from_fn<F>(horizon: f64, steps: usize, channels: usize, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Vec<f64>,
    {
        let dt = horizon / steps as f64;
        let mut values = Vec::with_capacity((steps + 1) * channels);
        for i in 0..=steps {
            let v = f(i as f64 * dt);
            if v.len() != channels {
                return Err(Error::InvalidParameter(format!(
                    "closure returned {} channels, expected {channels}",
                    v.len()
                )));
            }
            values.extend(v);
        }
        Self::new(horizon, channels, values)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_hurst(mut self, hurst: f64) -> Self {
        self.hurst = Some(hurst);
        self
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn hurst(&self) -> Option<f64> {
        self.hurst
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt()
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i * self.channels..(i + 1) * self.channels]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `X_t - X_s` for grid indices `s, t`.
    pub fn increment(&self, s: usize, t: usize) -> Vec<f64> {
        let (a, b) = (self.value(s), self.value(t));
        a.iter().zip(b).map(|(x, y)| y - x).collect()
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }

    /// Pointwise sum of two paths on the same grid.
    pub fn added(&self, other: &GridPath) -> Result<Self> {
        self.check_same_grid(other)?;
        let mut out = self.clone();
        out.values
            .iter_mut()
            .zip(&other.values)
            .for_each(|(a, b)| *a += b);
        out.hurst = None;
        Ok(out)
    }

    /// Every `factor`-th grid point; the horizon is unchanged.
    pub fn subsample(&self, factor: usize) -> Result<Self> {
        if factor == 0 || !self.steps.is_multiple_of(factor) {
            return Err(Error::GridMismatch(format!(
                "cannot subsample {} steps by {factor}",
                self.steps
            )));
        }
        let values = (0..=self.steps / factor)
            .flat_map(|i| self.value(i * factor).to_vec())
            .collect();
        let mut out = Self::new(self.horizon, self.channels, values)?;
        out.seed = self.seed;
        out.hurst = self.hurst;
        Ok(out)
    }

    /// Grid points `start..=end`, re-based at time zero.
    pub fn window(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.steps {
            return Err(Error::OffGrid {
                start,
                end,
                steps: self.steps,
            });
        }
        let values = self.values[start * self.channels..(end + 1) * self.channels].to_vec();
        let mut out = Self::new((end - start) as f64 * self.dt(), self.channels, values)?;
        out.seed = self.seed;
        out.hurst = self.hurst;
        Ok(out)
    }

    pub(crate) fn check_same_grid(&self, other: &GridPath) -> Result<()> {
        let tol = 1e-12 * self.horizon.abs().max(1.0);
        if self.steps != other.steps
            || self.channels != other.channels
            || (self.horizon - other.horizon).abs() > tol
        {
            return Err(Error::GridMismatch(format!(
                "({} steps, {} channels, T={}) vs ({} steps, {} channels, T={})",
                self.steps, self.channels, self.horizon, other.steps, other.channels, other.horizon
            )));
        }
        Ok(())
    }

    pub(crate) fn check_interval(&self, start: usize, end: usize) -> Result<()> {
        if end > self.steps || start > end {
            return Err(Error::OffGrid {
                start,
                end,
                steps: self.steps,
            });
        }
        Ok(())
    }
}
