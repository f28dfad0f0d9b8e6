use std::io::Write;

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::tangent::propagate;
use crate::driver::RoughPathGrid;
use crate::par::Execution;
use crate::rng::{stream_rng, AUX_STREAM};
use crate::solver::{MildSolution, Problem};
use crate::spectral::SpectralField;
use crate::stats::mean;
use crate::{Error, Result};

/// Initial frame of the QR iteration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "type", content = "seed")]
pub enum FrameInit {
    /// The first `K` real coordinate directions (slowest modes first).
    #[default]
    Identity,
    /// `K` orthonormal columns from the QR factor of a Gaussian matrix.
    RandomOrthogonal(u64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovConfig {
    /// Number of windows `W` (at least 10).
    pub windows: usize,
    /// Grid steps per window; `t0 = window_steps * dt`.
    pub window_steps: usize,
    /// Number of exponents `K`.
    pub modes: usize,
    #[serde(default)]
    pub frame: FrameInit,
    /// Grid index of the first window.
    #[serde(default)]
    pub start: usize,
    #[serde(skip)]
    pub execution: Execution,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovReport {
    pub t0: f64,
    #[serde(rename = "K")]
    pub modes: usize,
    #[serde(rename = "W")]
    pub windows: usize,
    /// Exponents in decreasing order.
    pub lambdas: Vec<f64>,
    /// Half-widths: `max(1.96 SE, half-spread of the running means over the
    /// last half of the windows)`.
    pub ci: Vec<f64>,
    /// `[window, running means...]` after every window, in QR order.
    pub trace: Vec<Vec<f64>>,
    /// `log |R_jj|` per window, in QR order.
    pub log_r: Vec<Vec<f64>>,
}

impl LyapunovReport {
    pub fn top(&self) -> (f64, f64) {
        (self.lambdas[0], self.ci[0])
    }
}

/// `K` orthonormal columns in dimension `d`.
pub fn random_orthogonal(d: usize, k: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = stream_rng(seed, 0, AUX_STREAM + 2);
    let g = DMatrix::from_fn(d, k, |_, _| StandardNormal.sample(&mut rng));
    g.qr().q()
}

fn columns_to_fields(problem: &Problem, q: &DMatrix<f64>) -> Result<Vec<SpectralField>> {
    (0..q.ncols())
        .map(|j| SpectralField::from_real(*problem.basis(), q.column(j).as_slice()))
        .collect()
}

fn fields_to_matrix(fields: &[SpectralField], rows: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows, fields.len());
    for (j, f) in fields.iter().enumerate() {
        for (i, v) in f.to_real().into_iter().take(rows).enumerate() {
            m[(i, j)] = v;
        }
    }
    m
}

/// Galerkin cocycle over `[s, t]` restricted to the first `k` real
/// coordinates: column `j` is the tangent flow of the `j`-th unit vector.
pub fn build_cocycle_matrix(
    problem: &Problem,
    rough: &RoughPathGrid,
    base: &MildSolution,
    s: usize,
    t: usize,
    k: usize,
) -> Result<DMatrix<f64>> {
    let d = problem.basis().real_dim();
    if k == 0 || k > d {
        return Err(Error::InvalidParameter(format!("mode count {k} outside 1..={d}")));
    }
    if s == t {
        return Ok(DMatrix::identity(k, k));
    }
    let q = DMatrix::<f64>::identity(d, k);
    let out = propagate(problem, rough, base, &columns_to_fields(problem, &q)?, s, t, Execution::default())?;
    Ok(fields_to_matrix(&out, k))
}

/// Exponents from repeated QR of the propagated frame.
pub fn lyapunov_spectrum(
    problem: &Problem,
    rough: &RoughPathGrid,
    base: &MildSolution,
    config: &LyapunovConfig,
) -> Result<LyapunovReport> {
    let d = problem.basis().real_dim();
    let k = config.modes;
    if config.windows < 10 {
        return Err(Error::InvalidParameter(format!(
            "at least 10 windows are required, got {}",
            config.windows
        )));
    }
    if k == 0 || k > d {
        return Err(Error::InvalidParameter(format!("mode count {k} outside 1..={d}")));
    }
    if config.window_steps == 0 {
        return Err(Error::InvalidParameter("windows need at least one step".into()));
    }
    let t0 = config.window_steps as f64 * rough.dt();
    let mut q = match config.frame {
        FrameInit::Identity => DMatrix::identity(d, k),
        FrameInit::RandomOrthogonal(seed) => random_orthogonal(d, k, seed),
    };
    let mut sums = vec![0.0; k];
    let mut log_r = Vec::with_capacity(config.windows);
    let mut trace = Vec::with_capacity(config.windows);
    for w in 0..config.windows {
        let s = config.start + w * config.window_steps;
        let out = propagate(problem, rough, base, &columns_to_fields(problem, &q)?, s, s + config.window_steps, config.execution)?;
        let b = fields_to_matrix(&out, d);
        let qr = b.qr();
        let r = qr.r();
        let mut logs = Vec::with_capacity(k);
        for j in 0..k {
            let v = r[(j, j)].abs();
            if !(v >= 1e-300) {
                return Err(Error::ModeCollapse { window: w, mode: j, value: v });
            }
            logs.push(v.ln());
            sums[j] += v.ln();
        }
        q = qr.q();
        let mut row = vec![(w + 1) as f64];
        row.extend(sums.iter().map(|s| s / ((w + 1) as f64 * t0)));
        trace.push(row);
        log_r.push(logs);
    }
    let wn = config.windows;
    let raw: Vec<f64> = sums.iter().map(|s| s / (wn as f64 * t0)).collect();
    let ci_raw: Vec<f64> = (0..k)
        .map(|j| {
            let x: Vec<f64> = log_r.iter().map(|l| l[j] / t0).collect();
            let m = mean(&x);
            let var = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (wn - 1) as f64;
            let se = (var / wn as f64).sqrt();
            let tail: Vec<f64> = trace[wn / 2..].iter().map(|r| r[j + 1]).collect();
            let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (1.96 * se).max(0.5 * (hi - lo))
        })
        .collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| raw[b].total_cmp(&raw[a]));
    Ok(LyapunovReport {
        t0,
        modes: k,
        windows: wn,
        lambdas: order.iter().map(|&j| raw[j]).collect(),
        ci: order.iter().map(|&j| ci_raw[j]).collect(),
        trace,
        log_r,
    })
}

pub fn write_lyapunov_json<W: Write>(report: &LyapunovReport, out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, report).map_err(|e| Error::Parse(e.to_string()))
}
