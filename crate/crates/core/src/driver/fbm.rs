//! Fractional Brownian motion by circulant embedding (Davies–Harte).

use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::GridPath;
use crate::rng::stream_rng;
use crate::{Error, Result};

/// Relative size below which a negative circulant eigenvalue is treated as
/// round-off and clamped to zero.
const EIGEN_CLAMP: f64 = 1e-10;

/// `Cov(B_s, B_t)` for fBm with Hurst index `hurst`.
pub fn fbm_covariance(hurst: f64, s: f64, t: f64) -> f64 {
    let h2 = 2.0 * hurst;
    0.5 * (t.abs().powf(h2) + s.abs().powf(h2) - (t - s).abs().powf(h2))
}

/// Unit-step fractional Gaussian noise autocovariance.
fn fgn_autocov(hurst: f64, k: usize) -> f64 {
    let h2 = 2.0 * hurst;
    let k = k as f64;
    0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2))
}

/// Reusable fBm sampler: the circulant spectrum is computed once and shared by
/// all replicates.
#[derive(Clone)]
pub struct FbmSampler {
    hurst: f64,
    steps: usize,
    horizon: f64,
    /// `sqrt(lambda_k / 2m)` for the circulant of size `2m`.
    amplitudes: Vec<f64>,
    fft: std::sync::Arc<dyn rustfft::Fft<f64>>,
}

impl std::fmt::Debug for FbmSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FbmSampler")
            .field("hurst", &self.hurst)
            .field("steps", &self.steps)
            .field("horizon", &self.horizon)
            .finish()
    }
}

impl FbmSampler {
    pub fn new(hurst: f64, steps: usize, horizon: f64) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "Hurst index must lie in (0, 1), got {hurst}"
            )));
        }
        if !(1.0 / 3.0 < hurst && hurst <= 0.5) {
            log::warn!("Hurst index {hurst} lies outside the rough regime (1/3, 1/2]");
        }
        if steps == 0 || !steps.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(steps));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        let n = 2 * steps;
        let mut circ: Vec<Complex64> = (0..n)
            .map(|k| {
                let lag = if k <= steps { k } else { n - k };
                Complex64::new(fgn_autocov(hurst, lag), 0.0)
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        fft.process(&mut circ);
        let max = circ.iter().map(|c| c.re).fold(0.0, f64::max);
        let mut amplitudes = Vec::with_capacity(n);
        for (index, c) in circ.iter().enumerate() {
            let mut value = c.re;
            if value < 0.0 {
                if value < -EIGEN_CLAMP * max {
                    return Err(Error::NegativeEigenvalue { index, value });
                }
                value = 0.0;
            }
            amplitudes.push((value / n as f64).sqrt());
        }
        Ok(Self {
            hurst,
            steps,
            horizon,
            amplitudes,
            fft,
        })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Increments of one channel, drawn from `(seed, replicate, stream = channel)`.
    fn increments(&self, seed: u64, replicate: u64, channel: u64) -> Vec<f64> {
        let mut rng = stream_rng(seed, replicate, channel);
        let mut buf: Vec<Complex64> = self
            .amplitudes
            .iter()
            .map(|&a| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(a * re, a * im)
            })
            .collect();
        self.fft.process(&mut buf);
        let scale = (self.horizon / self.steps as f64).powf(self.hurst);
        buf[..self.steps].iter().map(|c| c.re * scale).collect()
    }

    /// One `channels`-dimensional sample for Monte Carlo replicate `replicate`.
    pub fn sample(&self, channels: usize, seed: u64, replicate: u64) -> GridPath {
        let incs: Vec<Vec<f64>> = (0..channels)
            .map(|c| self.increments(seed, replicate, c as u64))
            .collect();
        let mut values = vec![0.0; (self.steps + 1) * channels];
        for i in 0..self.steps {
            for c in 0..channels {
                values[(i + 1) * channels + c] = values[i * channels + c] + incs[c][i];
            }
        }
        GridPath::new(self.horizon, channels, values)
            .expect("sampler produces finite values")
            .with_seed(seed)
            .with_hurst(self.hurst)
    }
}

/// Sample an `n_channels`-dimensional fBm on `steps` (a power of two) uniform
/// steps over `[0, horizon]`; channels are independent.
pub fn sample_fbm(
    hurst: f64,
    n_channels: usize,
    steps: usize,
    horizon: f64,
    seed: u64,
) -> Result<GridPath> {
    if n_channels == 0 {
        return Err(Error::InvalidParameter("at least one channel is required".into()));
    }
    Ok(FbmSampler::new(hurst, steps, horizon)?.sample(n_channels, seed, 0))
}
