use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::mild::{solve_mild, SolverConfig};
use super::problem::Problem;
use crate::controlled::dnorm_with;
use crate::driver::{greedy_partition, lift_piecewise_linear, FbmSampler, GridPath};
use crate::par::{self, Execution};
use crate::spectral::SpectralField;
use crate::stats::{bootstrap, mean, ols};
use crate::{Error, Result};

fn default_moments() -> Vec<f64> {
    vec![1.0, 2.0, 4.0]
}
fn default_bootstrap() -> usize {
    400
}

/// Monte Carlo campaign settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentConfig {
    pub replicates: usize,
    #[serde(default = "default_moments")]
    pub moments: Vec<f64>,
    /// Cameron–Martin regularity; only enters the reported theoretical tail
    /// exponent `2 (gamma' - eta_1)`.
    pub gamma_prime: f64,
    pub hurst: f64,
    pub steps: usize,
    pub horizon: f64,
    pub seed: u64,
    /// Use `X = 0` instead of fBm.
    #[serde(default)]
    pub zero_driver: bool,
    #[serde(default = "default_bootstrap")]
    pub bootstrap: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub p: f64,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Fit of `log(-log P(N > n)) = a + b log n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivalFit {
    pub exponent: f64,
    pub intercept: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// `(n, P(N > n))` for every `n >= 1` with `0 < P < 1`.
    pub points: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub replicates: usize,
    pub estimates: Vec<MomentEstimate>,
    pub norms: Vec<f64>,
    pub counts: Vec<usize>,
    pub survival: Option<SurvivalFit>,
    /// `2 (gamma' - eta_1)`.
    pub theoretical_exponent: f64,
}

/// Empirical survival `P(N > n)` at every `n >= 1` strictly inside `(0, 1)`.
pub fn survival_points(counts: &[usize]) -> Vec<(usize, f64)> {
    let total = counts.len() as f64;
    let max = counts.iter().copied().max().unwrap_or(0);
    (1..=max)
        .filter_map(|n| {
            let s = counts.iter().filter(|&&c| c > n).count() as f64 / total;
            (s > 0.0 && s < 1.0).then_some((n, s))
        })
        .collect()
}

fn survival_slope(counts: &[usize]) -> Option<(f64, f64)> {
    let pts = survival_points(counts);
    let x: Vec<f64> = pts.iter().map(|(n, _)| (*n as f64).ln()).collect();
    let y: Vec<f64> = pts.iter().map(|(_, s)| (-s.ln()).ln()).collect();
    ols(&x, &y).map(|f| (f.slope, f.intercept))
}

/// Stretched-exponential fit of the survival of `N` with a bootstrap CI.
pub fn survival_fit(counts: &[usize], resamples: usize, seed: u64) -> Option<SurvivalFit> {
    let (exponent, intercept) = survival_slope(counts)?;
    let (ci_low, ci_high) = bootstrap(counts, resamples, seed, 0.025, |s| survival_slope(s).map(|f| f.0))?;
    Some(SurvivalFit {
        exponent,
        intercept,
        ci_low,
        ci_high,
        points: survival_points(counts),
    })
}

/// Greedy counts of independent fBm lifts.
#[allow(clippy::too_many_arguments)]
pub fn greedy_counts(
    hurst: f64,
    channels: usize,
    steps: usize,
    horizon: f64,
    gamma: f64,
    eta1: f64,
    chi: f64,
    seed: u64,
    replicates: usize,
    exec: Execution,
) -> Result<Vec<usize>> {
    let sampler = FbmSampler::new(hurst, steps, horizon)?;
    par::try_map_indexed(exec, replicates, |r| {
        let rough = lift_piecewise_linear(&sampler.sample(channels, seed, r as u64));
        Ok(greedy_partition(&rough, gamma, eta1, chi, 0, steps)?.count)
    })
}

/// Moments of `|(Z, G(Z))|_D` over `[0, T]` and the survival of the greedy
/// count across independent drivers.
pub fn moment_experiment(
    problem: &Problem,
    solver: &SolverConfig,
    z0: &SpectralField,
    mc: &MomentConfig,
) -> Result<MomentReport> {
    if mc.replicates < 100 {
        return Err(Error::TooFewReplicates(mc.replicates));
    }
    let n = problem.channels();
    let sampler = if mc.zero_driver {
        None
    } else {
        Some(FbmSampler::new(mc.hurst, mc.steps, mc.horizon)?)
    };
    let inner = SolverConfig {
        execution: Execution::Sequential,
        ..solver.clone()
    };
    let rows = par::try_map_indexed(solver.execution, mc.replicates, |r| {
        let path = match &sampler {
            Some(s) => s.sample(n, mc.seed, r as u64),
            None => GridPath::zeros(mc.horizon, mc.steps, n)?,
        };
        let rough = lift_piecewise_linear(&path);
        let sol = solve_mild(problem, &rough, z0, 0, mc.steps, &inner)?;
        let d = dnorm_with(&sol.trajectory, &rough, 0, mc.steps, Execution::Sequential)?;
        Ok((d.total, sol.partition.count))
    })?;
    let norms: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let counts: Vec<usize> = rows.iter().map(|r| r.1).collect();
    let estimates = mc
        .moments
        .iter()
        .map(|&p| {
            let pw: Vec<f64> = norms.iter().map(|x| x.powf(p)).collect();
            let m = mean(&pw);
            let (lo, hi) = bootstrap(&pw, mc.bootstrap, mc.seed, 0.025, |s| Some(mean(s))).unwrap_or((m, m));
            MomentEstimate {
                p,
                mean: m,
                ci_low: lo,
                ci_high: hi,
            }
        })
        .collect();
    let eta1 = problem.spec().eta + solver.epsilon_for(problem.gamma(), problem.spec().eta);
    Ok(MomentReport {
        replicates: mc.replicates,
        estimates,
        survival: survival_fit(&counts, mc.bootstrap, mc.seed),
        norms,
        counts,
        theoretical_exponent: 2.0 * (mc.gamma_prime - eta1),
    })
}

/// Moments CSV: `p,mean,ci_low,ci_high`.
pub fn write_moments<W: Write>(report: &MomentReport, mut out: W) -> Result<()> {
    let mut buf = String::from("p,mean,ci_low,ci_high\n");
    for e in &report.estimates {
        writeln!(buf, "{:?},{:?},{:?},{:?}", e.p, e.mean, e.ci_low, e.ci_high).unwrap();
    }
    out.write_all(buf.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn survival_of_a_point_mass_is_empty() {
        assert!(survival_points(&[3; 20]).is_empty());
        let pts = survival_points(&[1, 2, 2, 3]);
        assert_eq!(pts, vec![(1, 0.75), (2, 0.25)]);
    }
}
