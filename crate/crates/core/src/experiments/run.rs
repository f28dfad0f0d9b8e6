use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::json;

use super::config::{validate, ExperimentConfig, ExperimentId};
use crate::driver::io::write_path;
use crate::driver::{lift_piecewise_linear, FbmSampler, GridPath};
use crate::linearization::{
    lyapunov_spectrum, stability_probe, stable_direction_check, write_decay_csv, write_lyapunov_json, LyapunovConfig,
};
use crate::par::Execution;
use crate::solver::{
    apriori_bound, greedy_counts, moment_experiment, solve_mild, survival_fit, write_moments, MildSolution, MomentConfig,
    Problem, SurvivalFit,
};
use crate::spectral::{BasisKind, SpectralField};
use crate::stats::ols;
use crate::{Error, Result};

pub const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));

/// What a run left on disk.
#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub experiment: ExperimentId,
    pub outputs: Vec<String>,
    pub wall_time_seconds: f64,
}

struct Sink<'a> {
    dir: &'a Path,
    written: Vec<String>,
}

impl Sink<'_> {
    fn bytes(&mut self, name: &str, data: &[u8]) -> Result<()> {
        std::fs::write(self.dir.join(name), data)?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
        s.push('\n');
        self.bytes(name, s.as_bytes())
    }

    fn with<F>(&mut self, name: &str, f: F) -> Result<()>
    where
        F: FnOnce(&mut Vec<u8>) -> Result<()>,
    {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.bytes(name, &buf)
    }
}

/// Column labels of the trajectory CSV: `re_0, re_1, im_1, ...` on the
/// periodic basis (always `2K + 1` columns), `b_1..b_K` on the sine basis.
fn coefficient_row(f: &SpectralField, out: &mut String) {
    let b = f.basis();
    match b.kind {
        BasisKind::Periodic => {
            write!(out, ",{:?}", f.coeff(0).re).unwrap();
            for k in 1..=b.modes as i64 {
                let c = f.coeff(k);
                write!(out, ",{:?},{:?}", c.re, c.im).unwrap();
            }
        }
        BasisKind::Dirichlet => {
            for k in 1..=b.modes as i64 {
                write!(out, ",{:?}", f.coeff(k).re).unwrap();
            }
        }
    }
}

/// Trajectory CSV: `t` followed by the coefficient columns.
pub fn write_trajectory<W: std::io::Write>(solution: &MildSolution, mut out: W) -> Result<()> {
    let b = *solution.value(solution.start()).basis();
    let mut buf = String::from("t");
    match b.kind {
        BasisKind::Periodic => {
            buf.push_str(",re_0");
            for k in 1..=b.modes {
                write!(buf, ",re_{k},im_{k}").unwrap();
            }
        }
        BasisKind::Dirichlet => {
            for k in 1..=b.modes {
                write!(buf, ",b_{k}").unwrap();
            }
        }
    }
    buf.push('\n');
    for i in solution.start()..=solution.end() {
        write!(buf, "{:?}", i as f64 * solution.dt).unwrap();
        coefficient_row(solution.value(i), &mut buf);
        buf.push('\n');
    }
    out.write_all(buf.as_bytes())?;
    Ok(())
}

fn sample_driver(config: &ExperimentConfig, sampler: Option<&FbmSampler>, replicate: u64) -> Result<GridPath> {
    let d = &config.driver;
    match sampler {
        Some(s) => Ok(s.sample(config.problem.channels(), d.seed, replicate)),
        None => GridPath::zeros(d.horizon, d.steps, config.problem.channels()),
    }
}

fn sampler(config: &ExperimentConfig) -> Result<Option<FbmSampler>> {
    let d = &config.driver;
    if d.zero {
        Ok(None)
    } else {
        FbmSampler::new(d.hurst, d.steps, d.horizon).map(Some)
    }
}

fn survival_csv(fit: Option<&SurvivalFit>, counts: &[usize]) -> Vec<u8> {
    let mut s = String::from("n,survival\n");
    let pts = fit.map_or_else(|| crate::solver::survival_points(counts), |f| f.points.clone());
    for (n, p) in pts {
        writeln!(s, "{n},{p:?}").unwrap();
    }
    s.into_bytes()
}

fn run_solve(config: &ExperimentConfig, problem: &Problem, sink: &mut Sink) -> Result<()> {
    let path = sample_driver(config, sampler(config)?.as_ref(), 0)?;
    let rough = lift_piecewise_linear(&path);
    let z0 = config.initial_field()?;
    let sol = solve_mild(problem, &rough, &z0, 0, config.driver.steps, &config.solver)?;
    let bound = apriori_bound(&sol, problem, &rough)?;
    sink.with("driver.csv", |b| write_path(&path, b))?;
    sink.with("trajectory.csv", |b| write_trajectory(&sol, b))?;
    sink.json("bound.json", &bound)?;
    sink.json(
        "solution.json",
        &json!({
            "greedy_count": sol.partition.count,
            "greedy_points": sol.partition.points,
            "epsilon": sol.epsilon,
            "sup_norm": sol.sup_norm(),
            "max_residual": sol.max_residual(),
            "residuals": sol.residuals,
            "intervals": sol.intervals,
        }),
    )
}

fn run_moments(config: &ExperimentConfig, problem: &Problem, sink: &mut Sink) -> Result<()> {
    let block = config.moments.clone().unwrap_or_default();
    let d = &config.driver;
    let mc = MomentConfig {
        replicates: config.replicates.unwrap_or(0),
        moments: block.moments,
        gamma_prime: config.gamma_prime(),
        hurst: d.hurst,
        steps: d.steps,
        horizon: d.horizon,
        seed: d.seed,
        zero_driver: d.zero,
        bootstrap: block.bootstrap,
    };
    let report = moment_experiment(problem, &config.solver, &config.initial_field()?, &mc)?;
    sink.with("moments.csv", |b| write_moments(&report, b))?;
    sink.bytes("survival.csv", &survival_csv(report.survival.as_ref(), &report.counts))?;
    sink.json("moments.json", &report)
}

fn run_greedy(config: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let d = &config.driver;
    let p = &config.problem;
    let r = config.replicates.unwrap_or(0);
    let boot = config.moments.clone().unwrap_or_default().bootstrap;
    let counts = greedy_counts(
        d.hurst,
        p.channels(),
        d.steps,
        d.horizon,
        p.gamma,
        config.eta1(),
        config.solver.chi,
        d.seed,
        r,
        config.solver.execution,
    )?;
    let fit = survival_fit(&counts, boot, d.seed);
    let mut csv = String::from("replicate,count\n");
    for (i, c) in counts.iter().enumerate() {
        writeln!(csv, "{i},{c}").unwrap();
    }
    sink.bytes("greedy_counts.csv", csv.as_bytes())?;
    sink.bytes("survival.csv", &survival_csv(fit.as_ref(), &counts))?;
    let mean = counts.iter().sum::<usize>() as f64 / counts.len().max(1) as f64;
    sink.json(
        "greedy_fit.json",
        &json!({
            "replicates": r,
            "chi": config.solver.chi,
            "eta1": config.eta1(),
            "mean_count": mean,
            "max_count": counts.iter().max(),
            "fit": fit,
            "theoretical_exponent": 2.0 * (config.gamma_prime() - config.eta1()),
        }),
    )
}

fn run_lyapunov(config: &ExperimentConfig, problem: &Problem, sink: &mut Sink) -> Result<()> {
    let block = config
        .lyapunov
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("missing [lyapunov] block".into()))?;
    let smp = sampler(config)?;
    let path = sample_driver(config, smp.as_ref(), 0)?;
    let rough = lift_piecewise_linear(&path);
    let end = block.windows * block.window_steps;
    let zero = SpectralField::zeros(*problem.basis());
    let base = solve_mild(problem, &rough, &zero, 0, end, &config.solver)?;
    let lc = LyapunovConfig {
        windows: block.windows,
        window_steps: block.window_steps,
        modes: block.modes,
        frame: block.frame,
        start: 0,
        execution: config.solver.execution,
    };
    let report = lyapunov_spectrum(problem, &rough, &base, &lc)?;
    sink.with("lyapunov.json", |b| write_lyapunov_json(&report, b))?;
    if let Some(st) = &block.stability {
        // Replicate 0 drives the spectrum; the probe uses replicates 1, 2, ...
        let probe = stability_probe(
            problem,
            |i| sample_driver(config, smp.as_ref(), i as u64 + 1).map(|p| lift_piecewise_linear(&p)),
            &config.solver,
            st,
        )?;
        sink.with("decay.csv", |b| write_decay_csv(&probe.records, b))?;
        let (l1, ci) = report.top();
        sink.json(
            "stability.json",
            &json!({
                "rho": st.rho,
                "paths": st.paths,
                "fraction_decayed": probe.fraction_decayed,
                "median_rate": probe.median_rate,
                "lambda1": l1,
                "lambda1_ci": ci,
            }),
        )?;
    }
    if let Some(sd) = &block.stable_direction {
        let rep = stable_direction_check(problem, &rough, &base, &config.solver, sd)?;
        sink.json("stable_direction.json", &rep)?;
    }
    Ok(())
}

fn run_convergence(config: &ExperimentConfig, problem: &Problem, sink: &mut Sink) -> Result<()> {
    let levels = config.convergence.clone().unwrap_or_default().levels;
    let fine = sample_driver(config, sampler(config)?.as_ref(), 0)?;
    let z0 = config.initial_field()?;
    let alpha = problem.alpha();
    let mut rows = Vec::new();
    let mut reference: Option<SpectralField> = None;
    for j in 0..=levels {
        let path = fine.subsample(1 << j)?;
        let rough = lift_piecewise_linear(&path);
        let sol = solve_mild(problem, &rough, &z0, 0, path.steps(), &config.solver)?;
        let last = sol.last().clone();
        let err = reference.as_ref().map_or(0.0, |r| last.distance(r, alpha));
        if reference.is_none() {
            reference = Some(last);
        }
        rows.push((path.steps(), err, sol.max_residual()));
    }
    let mut csv = String::from("m,error,max_residual\n");
    for (m, e, r) in &rows {
        writeln!(csv, "{m},{e:?},{r:?}").unwrap();
    }
    sink.bytes("convergence.csv", csv.as_bytes())?;
    let pts: Vec<_> = rows.iter().skip(1).filter(|r| r.1 > 0.0).collect();
    let x: Vec<f64> = pts.iter().map(|r| (r.0 as f64).ln()).collect();
    let y: Vec<f64> = pts.iter().map(|r| r.1.ln()).collect();
    let order = ols(&x, &y).map(|f| -f.slope);
    sink.json(
        "convergence.json",
        &json!({ "reference_steps": config.driver.steps, "observed_order": order }),
    )
}

/// Validate, run and write every artifact plus `manifest.json` into `out_dir`.
pub fn run(config: &ExperimentConfig, out_dir: &Path, exec: Execution) -> Result<RunSummary> {
    let violations = validate(config);
    if !violations.is_empty() {
        return Err(Error::Assumption(violations.iter().map(|v| v.to_string()).collect()));
    }
    let clock = Instant::now();
    let mut config = config.clone();
    config.solver.execution = exec;
    std::fs::create_dir_all(out_dir)?;
    let mut sink = Sink {
        dir: out_dir,
        written: Vec::new(),
    };
    log::info!("running {} into {}", config.experiment.name(), out_dir.display());
    match config.experiment {
        ExperimentId::GreedyStats => run_greedy(&config, &mut sink)?,
        id => {
            let problem = Problem::new(config.problem.clone())?;
            match id {
                ExperimentId::Ex1Periodic | ExperimentId::Ex2Dirichlet | ExperimentId::Ex3Generic => {
                    run_solve(&config, &problem, &mut sink)?
                }
                ExperimentId::Moments => run_moments(&config, &problem, &mut sink)?,
                ExperimentId::Lyapunov => run_lyapunov(&config, &problem, &mut sink)?,
                ExperimentId::Convergence => run_convergence(&config, &problem, &mut sink)?,
                ExperimentId::GreedyStats => unreachable!(),
            }
        }
    }
    let wall = clock.elapsed().as_secs_f64();
    let outputs = sink.written.clone();
    sink.json(
        "manifest.json",
        &json!({
            "experiment": config.experiment,
            "version": VERSION,
            "wall_time_seconds": wall,
            "outputs": outputs,
            "config": config,
        }),
    )?;
    Ok(RunSummary {
        experiment: config.experiment,
        outputs,
        wall_time_seconds: wall,
    })
}
