use super::*;
use crate::par::Execution;
use crate::solver::{Diffusion, Drift, Problem};

fn small(id: ExperimentId) -> ExperimentConfig {
    let mut c = ExperimentConfig::ex1_default(11);
    c.experiment = id;
    c.problem.basis.modes = 6;
    c.driver.steps = 256;
    c
}

fn read_all(dir: &std::path::Path, names: &[String]) -> Vec<Vec<u8>> {
    names.iter().map(|n| std::fs::read(dir.join(n)).unwrap()).collect()
}

#[test]
fn default_is_valid_and_bad_exponents_are_named() {
    assert!(validate(&ExperimentConfig::ex1_default(0)).is_empty());
    let mut c = ExperimentConfig::ex1_default(0);
    c.problem.eta = c.problem.gamma;
    let v = validate(&c);
    assert!(v.iter().any(|v| v.constraint == "η<γ"), "{v:?}");
    let mut c = ExperimentConfig::ex1_default(0);
    c.problem.sigma = 1.0;
    assert!(validate(&c).iter().any(|v| v.constraint == "σ<1"));
    let mut c = small(ExperimentId::Moments);
    c.replicates = Some(50);
    c.solver.epsilon = Some(0.05);
    assert!(!validate(&c).iter().any(|v| v.constraint == "γ+γ′−2η−2ε>1"));
    assert!(validate(&c).iter().any(|v| v.constraint == "R≥100"));
    c.gamma_prime = Some(0.5);
    assert!(validate(&c).iter().any(|v| v.constraint == "γ+γ′−2η−2ε>1"));
}

#[test]
fn seed_is_mandatory() {
    let text = r#"
experiment = "ex1-periodic"
[problem]
basis = { kind = "periodic", length = 1.0, modes = 4 }
alpha = 0.0
gamma = 0.45
sigma = 0.5
eta = 0.1
diffusion = [{ type = "sine", amplitude = 0.5 }]
[driver]
hurst = 0.45
steps = 64
"#;
    let r = ExperimentConfig::from_str_auto(text, None);
    assert!(matches!(r, Err(crate::Error::Parse(ref m)) if m.contains("seed")), "{r:?}");
    let with_seed = text.replace("steps = 64", "steps = 64\nseed = 3");
    let c = ExperimentConfig::from_str_auto(&with_seed, None).unwrap();
    assert_eq!(c.driver.horizon, 1.0);
    let json = serde_json::to_string(&c).unwrap();
    assert_eq!(ExperimentConfig::from_str_auto(&json, None).unwrap(), c);
}

#[test]
fn heat_only_run_reproduces_the_semigroup() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small(ExperimentId::Ex1Periodic);
    c.problem.drift = Drift::Zero;
    c.problem.diffusion = vec![Diffusion::Zero];
    let summary = run(&c, dir.path(), Execution::Sequential).unwrap();
    assert!(dir.path().join("manifest.json").exists());
    assert!(summary.outputs.contains(&"trajectory.csv".to_string()));
    let text = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let last = text.lines().last().unwrap();
    let cols: Vec<f64> = last.split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(cols.len(), 1 + 2 * 6 + 1);
    let p = Problem::new(c.problem.clone()).unwrap();
    let exact = p.semigroup().apply(&c.initial_field().unwrap(), 1.0).unwrap();
    assert!((cols[0] - 1.0).abs() < 1e-15);
    assert!((cols[2] - exact.coeff(1).re).abs() <= 1e-12 * exact.coeff(1).re.abs());
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["version"], VERSION);
    assert_eq!(manifest["config"]["driver"]["seed"], 11);
}

#[test]
fn outputs_do_not_depend_on_threads() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut c = small(ExperimentId::GreedyStats);
    c.replicates = Some(100);
    c.solver.epsilon = Some(0.05);
    let s1 = run(&c, a.path(), Execution::Sequential).unwrap();
    let s2 = run(&c, b.path(), Execution::Parallel).unwrap();
    assert_eq!(s1.outputs, s2.outputs);
    assert_eq!(read_all(a.path(), &s1.outputs), read_all(b.path(), &s2.outputs));
    let survival = std::fs::read_to_string(a.path().join("survival.csv")).unwrap();
    assert!(survival.starts_with("n,survival\n"));
}

#[test]
fn invalid_config_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let mut c = small(ExperimentId::Ex1Periodic);
    c.problem.sigma = 1.5;
    let r = run(&c, &out, Execution::Sequential);
    assert!(matches!(r, Err(ref e) if e.is_config()));
    assert!(!out.exists());
}
