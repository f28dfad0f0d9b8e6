use std::fmt::Write as _;
use std::io::Write;

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::tangent::propagate;
use crate::driver::RoughPathGrid;
use crate::par::{self, Execution};
use crate::rng::{stream_rng, AUX_STREAM};
use crate::solver::{solve_mild, MildSolution, Problem, SolverConfig};
use crate::spectral::SpectralField;
use crate::stats::{median, ols};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityConfig {
    /// Number of initial conditions (one driver replicate each).
    pub paths: usize,
    /// `|xi|_alpha`.
    pub rho: f64,
    /// Grid steps of each run.
    pub steps: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayRecord {
    pub path_id: usize,
    pub rho: f64,
    /// Slope of `log |phi^t(xi)|_alpha` over the second half of the run.
    pub fitted_rate: f64,
    pub r2: f64,
    pub decayed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub records: Vec<DecayRecord>,
    pub fraction_decayed: f64,
    pub median_rate: f64,
}

/// Random initial condition of norm `rho` in `B_alpha`.
fn random_state(problem: &Problem, rho: f64, seed: u64, id: usize) -> Result<SpectralField> {
    let mut rng = stream_rng(seed, id as u64, AUX_STREAM + 3);
    let d = problem.basis().real_dim();
    let x: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
    let f = SpectralField::from_real(*problem.basis(), &x)?;
    Ok(f.scaled(rho / f.norm(problem.alpha())))
}

fn decay_fit(sol: &MildSolution, alpha: f64) -> (f64, f64) {
    let (s, e) = (sol.start(), sol.end());
    let from = s + (e - s) / 2;
    let stride = ((e - from) / 128).max(1);
    let (mut x, mut y) = (Vec::new(), Vec::new());
    let mut k = from;
    while k <= e {
        let n = sol.value(k).norm(alpha);
        if n > 0.0 {
            x.push(k as f64 * sol.dt);
            y.push(n.ln());
        }
        k += stride;
    }
    ols(&x, &y).map_or((f64::NAN, 0.0), |f| (f.slope, f.r2))
}

/// Run the nonlinear flow from random states on the sphere `|xi|_alpha = rho`
/// and fit exponential decay rates.
pub fn stability_probe<D>(
    problem: &Problem,
    drivers: D,
    solver: &SolverConfig,
    config: &StabilityConfig,
) -> Result<StabilityReport>
where
    D: Fn(usize) -> Result<RoughPathGrid> + Sync + Send,
{
    let alpha = problem.alpha();
    // The state decays far below rho, so the tolerance is taken relative to it.
    let inner = SolverConfig {
        execution: Execution::Sequential,
        tol: solver.tol.min(1e-12 * config.rho),
        ..solver.clone()
    };
    let records = par::try_map_indexed(solver.execution, config.paths, |id| {
        let rough = drivers(id)?;
        let xi = random_state(problem, config.rho, config.seed, id)?;
        let sol = solve_mild(problem, &rough, &xi, 0, config.steps, &inner)?;
        let (rate, r2) = decay_fit(&sol, alpha);
        let decayed = rate < 0.0 && sol.last().norm(alpha) < config.rho;
        Ok(DecayRecord {
            path_id: id,
            rho: config.rho,
            fitted_rate: rate,
            r2,
            decayed,
        })
    })?;
    let fraction = records.iter().filter(|r| r.decayed).count() as f64 / records.len().max(1) as f64;
    let rates: Vec<f64> = records.iter().map(|r| r.fitted_rate).filter(|r| r.is_finite()).collect();
    Ok(StabilityReport {
        median_rate: if rates.is_empty() { f64::NAN } else { median(&rates) },
        fraction_decayed: fraction,
        records,
    })
}

/// Decay CSV: `path_id,rho,fitted_rate,r2`.
pub fn write_decay_csv<W: Write>(records: &[DecayRecord], mut out: W) -> Result<()> {
    let mut buf = String::from("path_id,rho,fitted_rate,r2\n");
    for r in records {
        writeln!(buf, "{},{:?},{:?},{:?}", r.path_id, r.rho, r.fitted_rate, r.r2).unwrap();
    }
    out.write_all(buf.as_bytes())?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StableDirectionConfig {
    pub windows: usize,
    pub window_steps: usize,
    /// Target rate `upsilon` in `(0, -lambda_{j0})`.
    pub upsilon: f64,
    pub magnitudes: Vec<f64>,
    /// Pass when `sup_n e^{n t0 upsilon} |phi^{n t0}(xi)|_alpha <= c_pass |xi|_alpha`.
    pub c_pass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MagnitudeResult {
    pub magnitude: f64,
    pub ratio: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StableDirectionReport {
    /// Always true: stable directions are approximated by right singular
    /// vectors of the finite-time cocycle, not constructed Oseledets spaces.
    pub proxy: bool,
    /// Finite-time exponents `log sigma_j / (n t0)`, decreasing.
    pub exponents: Vec<f64>,
    /// Real coordinates of the right singular vectors with negative exponent,
    /// slowest first.
    pub stable_directions: Vec<Vec<f64>>,
    /// Exponent of the probed (slowest stable) direction.
    pub probed_exponent: f64,
    pub results: Vec<MagnitudeResult>,
    pub largest_passing: Option<f64>,
}

/// Check decay at rate `upsilon` of the nonlinear flow started along the
/// slowest stable direction of the linearization at zero.
pub fn stable_direction_check(
    problem: &Problem,
    rough: &RoughPathGrid,
    base: &MildSolution,
    solver: &SolverConfig,
    config: &StableDirectionConfig,
) -> Result<StableDirectionReport> {
    let d = problem.basis().real_dim();
    let start = base.start();
    let end = start + config.windows * config.window_steps;
    let t0 = config.window_steps as f64 * rough.dt();
    let horizon = config.windows as f64 * t0;
    let units = (0..d)
        .map(|j| {
            let mut e = vec![0.0; d];
            e[j] = 1.0;
            SpectralField::from_real(*problem.basis(), &e)
        })
        .collect::<Result<Vec<_>>>()?;
    let out = propagate(problem, rough, base, &units, start, end, solver.execution)?;
    let mut m = DMatrix::zeros(d, d);
    for (j, f) in out.iter().enumerate() {
        for (i, v) in f.to_real().into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    let svd = m.svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::InvalidParameter("SVD failed".into()))?;
    let mut idx: Vec<usize> = (0..d).collect();
    idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let exponents: Vec<f64> = idx.iter().map(|&j| svd.singular_values[j].ln() / horizon).collect();
    let stable: Vec<usize> = idx
        .iter()
        .zip(&exponents)
        .filter(|(_, e)| **e < 0.0)
        .map(|(j, _)| *j)
        .collect();
    if stable.is_empty() {
        return Err(Error::NoNegativeExponents);
    }
    let stable_directions: Vec<Vec<f64>> = stable.iter().map(|&j| v_t.row(j).iter().copied().collect()).collect();
    let probed_exponent = exponents[d - stable.len()];
    let dir = SpectralField::from_real(*problem.basis(), &stable_directions[0])?;
    let alpha = problem.alpha();
    let dir = dir.scaled(1.0 / dir.norm(alpha));
    let inner = SolverConfig {
        execution: Execution::Sequential,
        ..solver.clone()
    };
    let results = par::try_map_indexed(solver.execution, config.magnitudes.len(), |k| {
        let a = config.magnitudes[k];
        let sol = solve_mild(problem, rough, &dir.scaled(a), start, end, &inner)?;
        let ratio = (0..=config.windows)
            .map(|n| (n as f64 * t0 * config.upsilon).exp() * sol.value(start + n * config.window_steps).norm(alpha) / a)
            .fold(0.0, f64::max);
        Ok(MagnitudeResult {
            magnitude: a,
            ratio,
            pass: ratio <= config.c_pass,
        })
    })?;
    let largest_passing = results
        .iter()
        .filter(|r| r.pass)
        .map(|r| r.magnitude)
        .fold(None, |acc: Option<f64>, m| Some(acc.map_or(m, |a| a.max(m))));
    Ok(StableDirectionReport {
        proxy: true,
        exponents,
        stable_directions,
        probed_exponent,
        results,
        largest_passing,
    })
}
