use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::linearization::{FrameInit, StabilityConfig, StableDirectionConfig};
use crate::solver::{Diffusion, Drift, ProblemSpec, SemigroupKind, SolverConfig, Violation};
use crate::spectral::{Basis, BasisKind, Complex64, SpectralField, TrigPoly};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    Ex1Periodic,
    Ex2Dirichlet,
    Ex3Generic,
    Moments,
    Lyapunov,
    GreedyStats,
    Convergence,
}

impl ExperimentId {
    pub fn name(self) -> &'static str {
        match self {
            Self::Ex1Periodic => "ex1-periodic",
            Self::Ex2Dirichlet => "ex2-dirichlet",
            Self::Ex3Generic => "ex3-generic",
            Self::Moments => "moments",
            Self::Lyapunov => "lyapunov",
            Self::GreedyStats => "greedy-stats",
            Self::Convergence => "convergence",
        }
    }

    fn needs_replicates(self) -> bool {
        matches!(self, Self::Moments | Self::GreedyStats)
    }
}

fn default_horizon() -> f64 {
    1.0
}

/// Fractional Brownian driver; the seed has no default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriverConfig {
    pub hurst: f64,
    pub steps: usize,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    pub seed: u64,
    /// Use `X = 0`.
    #[serde(default)]
    pub zero: bool,
}

/// One Fourier (or sine) coefficient of the initial condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialMode {
    pub k: i64,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovBlock {
    pub windows: usize,
    pub window_steps: usize,
    pub modes: usize,
    #[serde(default)]
    pub frame: FrameInit,
    #[serde(default)]
    pub stability: Option<StabilityConfig>,
    #[serde(default)]
    pub stable_direction: Option<StableDirectionConfig>,
}

fn default_moments() -> Vec<f64> {
    vec![1.0, 2.0, 4.0]
}
fn default_bootstrap() -> usize {
    400
}
fn default_levels() -> usize {
    4
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentsBlock {
    #[serde(default = "default_moments")]
    pub moments: Vec<f64>,
    #[serde(default = "default_bootstrap")]
    pub bootstrap: usize,
}

impl Default for MomentsBlock {
    fn default() -> Self {
        Self {
            moments: default_moments(),
            bootstrap: default_bootstrap(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceBlock {
    /// Number of halvings of the driver grid.
    #[serde(default = "default_levels")]
    pub levels: usize,
}

impl Default for ConvergenceBlock {
    fn default() -> Self {
        Self { levels: default_levels() }
    }
}

/// A complete, self-describing experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub problem: ProblemSpec,
    pub driver: DriverConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    /// Defaults to `0.5 e_1`; wavenumbers are non-negative and the conjugate
    /// mode is filled in on the periodic basis.
    #[serde(default)]
    pub initial: Vec<InitialMode>,
    /// Monte Carlo size for `moments` and `greedy-stats`.
    #[serde(default)]
    pub replicates: Option<usize>,
    /// Cameron–Martin regularity; defaults to `min(H + 1/2, 1) - 0.05`.
    #[serde(default)]
    pub gamma_prime: Option<f64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub lyapunov: Option<LyapunovBlock>,
    #[serde(default)]
    pub moments: Option<MomentsBlock>,
    #[serde(default)]
    pub convergence: Option<ConvergenceBlock>,
}

impl ExperimentConfig {
    /// Documented defaults: periodic torus of length 1, 32 modes, `gamma = 0.45`,
    /// `H = 0.45`, `eta = 0.1`, `sigma = 0.5`, `T = 1`, `m = 2^12`, multiplicative
    /// noise `g(x) (-Laplacian)^eta u` and a saturating drift.
    pub fn ex1_default(seed: u64) -> Self {
        Self {
            experiment: ExperimentId::Ex1Periodic,
            problem: ProblemSpec {
                basis: Basis::periodic(1.0, 32, false).expect("valid basis"),
                semigroup: SemigroupKind::Heat,
                alpha: 0.0,
                gamma: 0.45,
                sigma: 0.5,
                eta: 0.1,
                theta: 0.0,
                drift: Drift::Saturating {
                    linear: -1.0,
                    saturating: 0.5,
                },
                diffusion: vec![Diffusion::Multiplier {
                    g: TrigPoly {
                        mean: 0.5,
                        cos: vec![0.2],
                        sin: vec![],
                    },
                    power: None,
                }],
            },
            driver: DriverConfig {
                hurst: 0.45,
                steps: 1 << 12,
                horizon: 1.0,
                seed,
                zero: false,
            },
            solver: SolverConfig::default(),
            initial: Vec::new(),
            replicates: None,
            gamma_prime: None,
            output: None,
            lyapunov: None,
            moments: None,
            convergence: None,
        }
    }

    /// Parse TOML or JSON, chosen by extension (JSON when it starts with `{`
    /// otherwise).
    pub fn from_str_auto(text: &str, hint: Option<&Path>) -> Result<Self> {
        let json = match hint.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
            Some("json") => true,
            Some("toml") => false,
            _ => text.trim_start().starts_with('{'),
        };
        if json {
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
        } else {
            toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_str_auto(&text, Some(path))
    }

    pub fn gamma_prime(&self) -> f64 {
        self.gamma_prime
            .unwrap_or((self.driver.hurst + 0.5).min(1.0) - 0.05)
    }

    pub fn eta1(&self) -> f64 {
        let p = &self.problem;
        p.eta + self.solver.epsilon_for(p.gamma, p.eta)
    }

    pub fn initial_field(&self) -> Result<SpectralField> {
        let basis = self.problem.basis;
        if self.initial.is_empty() {
            return SpectralField::single_mode(basis, 1, Complex64::new(0.5, 0.0));
        }
        let mut f = SpectralField::zeros(basis);
        for m in &self.initial {
            if m.k < 0 {
                return Err(Error::InvalidParameter(format!(
                    "initial mode {}: list non-negative wavenumbers only",
                    m.k
                )));
            }
            f = f.add(&SpectralField::single_mode(basis, m.k, Complex64::new(m.re, m.im))?);
        }
        f.project();
        Ok(f)
    }
}

/// Every violated inequality, before any computation.
pub fn validate(config: &ExperimentConfig) -> Vec<Violation> {
    let mut v = config.problem.violations();
    let d = &config.driver;
    let p = &config.problem;
    if !(d.hurst > 0.0 && d.hurst < 1.0) {
        v.push(Violation::new("0<H<1", format!("H = {}", d.hurst)));
    }
    if !d.zero && !(p.gamma <= d.hurst) {
        v.push(Violation::new("γ≤H", format!("gamma = {}, H = {}", p.gamma, d.hurst)));
    }
    if !d.steps.is_power_of_two() || d.steps < 2 {
        v.push(Violation::new("m=2^k", format!("steps = {}", d.steps)));
    }
    if !(d.horizon > 0.0) {
        v.push(Violation::new("T>0", format!("T = {}", d.horizon)));
    }
    let eps = config.solver.epsilon_for(p.gamma, p.eta);
    if !(eps > 0.0 && p.eta + eps < p.gamma) {
        v.push(Violation::new("0<ε<γ−η", format!("epsilon = {eps}")));
    }
    if !(config.solver.chi > 0.0) {
        v.push(Violation::new("χ>0", format!("chi = {}", config.solver.chi)));
    }
    let kind_ok = match config.experiment {
        ExperimentId::Ex1Periodic => p.basis.kind == BasisKind::Periodic,
        ExperimentId::Ex2Dirichlet => p.basis.kind == BasisKind::Dirichlet,
        _ => true,
    };
    if !kind_ok {
        v.push(Violation::new(
            "basis",
            format!("{} requires a {:?} basis", config.experiment.name(), p.basis.kind),
        ));
    }
    if config.experiment == ExperimentId::Ex1Periodic && !(p.eta < 2.0 * d.hurst - 0.5) {
        v.push(Violation::new("η<2H−1/2", format!("eta = {}, H = {}", p.eta, d.hurst)));
    }
    if matches!(config.experiment, ExperimentId::Moments | ExperimentId::GreedyStats) {
        let gp = config.gamma_prime();
        let e1 = config.eta1();
        if !(p.gamma + gp - 2.0 * e1 > 1.0) {
            v.push(Violation::new(
                "γ+γ′−2η−2ε>1",
                format!("gamma = {}, gamma' = {gp}, eta_1 = {e1}", p.gamma),
            ));
        }
    }
    if config.experiment.needs_replicates() {
        match config.replicates {
            Some(r) if r >= 100 => {}
            r => v.push(Violation::new("R≥100", format!("replicates = {r:?}"))),
        }
    }
    if config.experiment == ExperimentId::Lyapunov {
        match &config.lyapunov {
            None => v.push(Violation::new("lyapunov", "missing [lyapunov] block".into())),
            Some(l) => {
                if l.windows < 10 {
                    v.push(Violation::new("W≥10", format!("windows = {}", l.windows)));
                }
                if l.windows * l.window_steps > d.steps || l.window_steps == 0 {
                    v.push(Violation::new(
                        "W t0≤T",
                        format!("{} windows of {} steps on a {}-step grid", l.windows, l.window_steps, d.steps),
                    ));
                }
                if l.modes == 0 || l.modes > p.basis.real_dim() {
                    v.push(Violation::new("1≤K≤dim", format!("modes = {}", l.modes)));
                }
                if let Some(st) = &l.stability {
                    if st.steps > d.steps || st.steps < 4 {
                        v.push(Violation::new(
                            "stability steps",
                            format!("{} probe steps on a {}-step grid", st.steps, d.steps),
                        ));
                    }
                }
                if !p.zero_is_stationary() {
                    v.push(Violation::new("F(0)=G(0)=0", "zero must be a stationary point".into()));
                }
            }
        }
    }
    if let Some(c) = &config.convergence {
        if c.levels == 0 || d.steps >> c.levels < 2 {
            v.push(Violation::new("levels", format!("{} halvings of {} steps", c.levels, d.steps)));
        }
    }
    v
}
