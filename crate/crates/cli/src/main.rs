use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rough_spde::driver::io::{write_levy, write_path};
use rough_spde::driver::{hoelder_norms, lift_piecewise_linear, sample_fbm, GridPath};
use rough_spde::experiments::{run, validate, ExperimentConfig, ExperimentId};
use rough_spde::par::Execution;
use rough_spde::Error;
use serde_json::json;

#[derive(Parser)]
#[command(name = "rough-spde", version, about = "Seeded experiments for semilinear rough SPDEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the fBm driver and write driver.csv.
    Sample(Common),
    /// Sample and lift the driver; writes driver.csv, levy.csv and norms.json.
    Lift(Common),
    /// Solve the configured example (ex1-periodic, ex2-dirichlet or ex3-generic).
    Solve(Common),
    /// Lyapunov spectrum and optional stability probes.
    Lyapunov(Common),
    /// Moments of the solution norm and survival of the greedy count.
    Moments(Common),
    /// Survival statistics of the greedy count alone.
    GreedyStats(Common),
    /// Self-convergence under grid refinement.
    Convergence(Common),
    /// Report every violated inequality and exit.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    /// TOML or JSON experiment file; the documented periodic default otherwise.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    replicates: Option<usize>,
}

fn fail(e: &Error) -> ExitCode {
    let (kind, code) = if e.is_config() { ("config", 2) } else { ("numerical", 3) };
    eprintln!("{}", json!({ "error": kind, "message": e.to_string() }));
    ExitCode::from(code)
}

fn load(common: &Common) -> Result<ExperimentConfig, Error> {
    let mut config = match &common.config {
        Some(p) => ExperimentConfig::load(p).map_err(|e| match e {
            Error::Io(io) => Error::Parse(format!("{}: {io}", p.display())),
            e => e,
        })?,
        None => ExperimentConfig::ex1_default(common.seed.unwrap_or(0)),
    };
    if let Some(s) = common.seed {
        config.driver.seed = s;
    }
    if let Some(r) = common.replicates {
        config.replicates = Some(r);
    }
    Ok(config)
}

fn execution(threads: Option<usize>) -> Result<Execution, Error> {
    match threads {
        Some(1) => Ok(Execution::Sequential),
        Some(0) => Err(Error::InvalidParameter("--threads must be positive".into())),
        #[cfg(feature = "parallel")]
        Some(n) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
            Ok(Execution::Parallel)
        }
        #[cfg(not(feature = "parallel"))]
        Some(_) => Ok(Execution::Sequential),
        None => Ok(Execution::Parallel),
    }
}

fn driver_artifacts(config: &ExperimentConfig, out: &Path, lift: bool) -> Result<(), Error> {
    let violations = validate(config);
    if !violations.is_empty() {
        return Err(Error::Assumption(violations.iter().map(|v| v.to_string()).collect()));
    }
    let d = &config.driver;
    let n = config.problem.channels();
    let path = if d.zero {
        GridPath::zeros(d.horizon, d.steps, n)?
    } else {
        sample_fbm(d.hurst, n, d.steps, d.horizon, d.seed)?
    };
    std::fs::create_dir_all(out)?;
    write_path(&path, std::fs::File::create(out.join("driver.csv"))?)?;
    if lift {
        let rough = lift_piecewise_linear(&path);
        write_levy(&rough, std::fs::File::create(out.join("levy.csv"))?)?;
        let norms = hoelder_norms(&rough, config.problem.gamma, 0, d.steps)?;
        let text = serde_json::to_string_pretty(&norms).map_err(|e| Error::Parse(e.to_string()))?;
        std::fs::write(out.join("norms.json"), text + "\n")?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (common, id) = match &cli.command {
        Command::Sample(c) | Command::Lift(c) | Command::Solve(c) | Command::Validate(c) => (c, None),
        Command::Lyapunov(c) => (c, Some(ExperimentId::Lyapunov)),
        Command::Moments(c) => (c, Some(ExperimentId::Moments)),
        Command::GreedyStats(c) => (c, Some(ExperimentId::GreedyStats)),
        Command::Convergence(c) => (c, Some(ExperimentId::Convergence)),
    };
    let mut config = match load(common) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    if let Some(id) = id {
        config.experiment = id;
    }
    let out = common
        .out
        .clone()
        .or_else(|| config.output.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let exec = match execution(common.threads) {
        Ok(e) => e,
        Err(e) => return fail(&e),
    };
    let result = match &cli.command {
        Command::Validate(_) => {
            let v = validate(&config);
            println!("{}", json!({ "valid": v.is_empty(), "violations": v }));
            return if v.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(2) };
        }
        Command::Sample(_) => driver_artifacts(&config, &out, false),
        Command::Lift(_) => driver_artifacts(&config, &out, true),
        Command::Solve(_) => {
            if matches!(
                config.experiment,
                ExperimentId::Ex1Periodic | ExperimentId::Ex2Dirichlet | ExperimentId::Ex3Generic
            ) {
                run(&config, &out, exec).map(|_| ())
            } else {
                Err(Error::InvalidParameter(format!(
                    "`solve` runs ex1-periodic, ex2-dirichlet or ex3-generic, not {}",
                    config.experiment.name()
                )))
            }
        }
        _ => run(&config, &out, exec).map(|s| {
            log::info!("{} finished in {:.2} s", s.experiment.name(), s.wall_time_seconds);
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
