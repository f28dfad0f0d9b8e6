use serde::{Deserialize, Serialize};

use super::problem::Problem;
use super::quadrature::StepWeights;
use crate::controlled::{weighted_norm, weights, ControlledPath};
use crate::driver::{greedy_partition, GreedyPartition, RoughPathGrid};
use crate::par::{self, Execution};
use crate::spectral::SpectralField;
use crate::{Error, Result};

fn default_chi() -> f64 {
    1.0
}
fn default_tol() -> f64 {
    1e-8
}
fn default_max_picard() -> usize {
    60
}
fn default_ceiling() -> f64 {
    1e6
}
fn default_checkpoints() -> usize {
    8
}

/// Solver controls.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Greedy threshold.
    #[serde(default = "default_chi")]
    pub chi: f64,
    /// `eta_1 = eta + epsilon`; defaults to `(gamma - eta) / 4`.
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// Bound on the mild residual at the checkpoints.
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_picard")]
    pub max_picard: usize,
    /// Blow-up guard on `|Z|_alpha`.
    #[serde(default = "default_ceiling")]
    pub ceiling: f64,
    /// Number of uniform checkpoints added to the greedy points.
    #[serde(default = "default_checkpoints")]
    pub checkpoints: usize,
    /// Keep the last Picard iterate instead of failing or bisecting.
    #[serde(default)]
    pub accept_unconverged: bool,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            chi: default_chi(),
            epsilon: None,
            tol: default_tol(),
            max_picard: default_max_picard(),
            ceiling: default_ceiling(),
            checkpoints: default_checkpoints(),
            accept_unconverged: false,
            execution: Execution::default(),
        }
    }
}

impl SolverConfig {
    pub fn epsilon_for(&self, gamma: f64, eta: f64) -> f64 {
        self.epsilon.unwrap_or((gamma - eta) / 4.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolvedInterval {
    pub start: usize,
    pub end: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Last sup-norm difference of successive Picard iterates.
    pub difference: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub index: usize,
    pub time: f64,
    pub residual: f64,
}

/// A solution on grid points `start..=end` with `Z' = G(Z)`.
#[derive(Clone, Debug)]
pub struct MildSolution {
    pub trajectory: ControlledPath,
    pub residuals: Vec<Checkpoint>,
    pub partition: GreedyPartition,
    pub intervals: Vec<SolvedInterval>,
    pub epsilon: f64,
    pub dt: f64,
}

impl MildSolution {
    pub fn start(&self) -> usize {
        self.trajectory.start
    }

    pub fn end(&self) -> usize {
        self.trajectory.end()
    }

    pub fn value(&self, i: usize) -> &SpectralField {
        self.trajectory.value_at(i)
    }

    pub fn last(&self) -> &SpectralField {
        self.trajectory.values.last().unwrap()
    }

    /// `sup_k |Z_k|_alpha`.
    pub fn sup_norm(&self) -> f64 {
        let a = self.trajectory.alpha;
        self.trajectory
            .values
            .iter()
            .map(|z| z.norm(a))
            .fold(0.0, f64::max)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|c| c.residual).fold(0.0, f64::max)
    }
}

fn scale_add(acc: &mut SpectralField, f: &SpectralField, w: &[f64]) {
    acc.coeffs_mut()
        .iter_mut()
        .zip(f.coeffs())
        .zip(w)
        .for_each(|((a, b), w)| *a += b * *w);
}

fn mul(f: &SpectralField, w: &[f64]) -> SpectralField {
    let mut out = f.clone();
    out.coeffs_mut().iter_mut().zip(w).for_each(|(a, w)| *a *= *w);
    out
}

/// Pieces of one step that depend on the state at the left endpoint.
struct Local {
    drift: Option<SpectralField>,
    germ: SpectralField,
}

fn local(problem: &Problem, rough: &RoughPathGrid, z: &SpectralField, k: usize, with_germ: bool) -> Result<Local> {
    let node = problem.node(z.clone());
    let drift = problem.drift(&node)?;
    let germ = if with_germ && problem.has_noise() {
        let dx = rough.increment(k, k + 1);
        problem.germ(&node, &dx, rough.segment_block(k))?
    } else {
        SpectralField::zeros(*problem.basis())
    };
    Ok(Local { drift, germ })
}

/// `h [psi F_k + (phi1 - psi) F_{k+1}] + S_h Xi_k`.
fn increment(w: &StepWeights, left: &Local, right_drift: Option<&SpectralField>) -> SpectralField {
    let mut c = mul(&left.germ, &w.decay);
    if let Some(f) = &left.drift {
        scale_add(&mut c, f, &w.left);
    }
    if let Some(f) = right_drift {
        scale_add(&mut c, f, &w.right);
    }
    c
}

struct Outcome {
    path: Vec<SpectralField>,
    iterations: usize,
    converged: bool,
    difference: f64,
}

fn picard(
    problem: &Problem,
    rough: &RoughPathGrid,
    weights_step: &StepWeights,
    z_start: &SpectralField,
    u: usize,
    v: usize,
    config: &SolverConfig,
    wa: &[f64],
) -> Result<Outcome> {
    let len = v - u;
    let h = rough.dt();
    let sg = problem.semigroup();
    let mut w: Vec<SpectralField> = (0..=len)
        .map(|k| sg.apply(z_start, k as f64 * h))
        .collect::<Result<_>>()?;
    let mut difference = f64::INFINITY;
    for it in 1..=config.max_picard.max(1) {
        let locals = match par::try_map_indexed(config.execution, len + 1, |k| {
            local(problem, rough, &w[k], u + k, k < len)
        }) {
            Ok(l) => l,
            Err(Error::NonFinite(_)) => {
                return Ok(Outcome {
                    path: w,
                    iterations: it,
                    converged: false,
                    difference: f64::INFINITY,
                })
            }
            Err(e) => return Err(e),
        };
        let mut next = Vec::with_capacity(len + 1);
        next.push(z_start.clone());
        for k in 0..len {
            let mut z = mul(&next[k], &weights_step.decay);
            let c = increment(weights_step, &locals[k], locals[k + 1].drift.as_ref());
            z.axpy(1.0, &c);
            next.push(z);
        }
        let mut scale = 0.0f64;
        difference = 0.0;
        let mut finite = true;
        for (a, b) in next.iter().zip(&w) {
            let d = weighted_norm(&a.sub(b), wa);
            let n = weighted_norm(a, wa);
            finite &= d.is_finite() && n.is_finite();
            difference = difference.max(d);
            scale = scale.max(n);
        }
        w = next;
        if !finite {
            return Ok(Outcome {
                path: w,
                iterations: it,
                converged: false,
                difference: f64::INFINITY,
            });
        }
        let stop = (0.01 * config.tol).max(64.0 * f64::EPSILON * scale);
        if difference <= stop {
            return Ok(Outcome {
                path: w,
                iterations: it,
                converged: true,
                difference,
            });
        }
    }
    Ok(Outcome {
        path: w,
        iterations: config.max_picard.max(1),
        converged: false,
        difference,
    })
}

/// Solve the mild equation on grid points `start..=end` from `z0`.
pub fn solve_mild(
    problem: &Problem,
    rough: &RoughPathGrid,
    z0: &SpectralField,
    start: usize,
    end: usize,
    config: &SolverConfig,
) -> Result<MildSolution> {
    if *z0.basis() != *problem.basis() {
        return Err(Error::BasisMismatch);
    }
    if rough.channels() != problem.channels() {
        return Err(Error::GridMismatch(format!(
            "{} driver channels for {} diffusion channels",
            rough.channels(),
            problem.channels()
        )));
    }
    rough.base().check_interval(start, end)?;
    if start == end {
        return Err(Error::EmptyInterval(start, end));
    }
    let (gamma, eta) = (problem.gamma(), problem.spec().eta);
    let epsilon = config.epsilon_for(gamma, eta);
    let eta1 = eta + epsilon;
    if !(epsilon > 0.0 && eta1 < gamma) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < epsilon and eta + epsilon < gamma, got epsilon = {epsilon}"
        )));
    }
    let partition = greedy_partition(rough, gamma, eta1, config.chi, start, end)?;
    let alpha = problem.alpha();
    let mut z_init = z0.clone();
    z_init.project();
    let wa = weights(&z_init, alpha);
    let step = StepWeights::new(problem.semigroup().rates(), rough.dt());

    let mut path = vec![z_init];
    let mut intervals = Vec::new();
    for piece in partition.points.windows(2) {
        // Work list of subintervals, bisected on failure.
        let mut todo = vec![(piece[0], piece[1])];
        while let Some((u, v)) = todo.pop() {
            let z_u = path.last().unwrap().clone();
            let out = picard(problem, rough, &step, &z_u, u, v, config, &wa)?;
            if !out.converged && !config.accept_unconverged {
                if v - u > 1 {
                    let mid = u + (v - u) / 2;
                    log::debug!("Picard failed on [{u}, {v}], bisecting at {mid}");
                    todo.push((mid, v));
                    todo.push((u, mid));
                    continue;
                }
                let (step, norm) = out
                    .path
                    .iter()
                    .enumerate()
                    .map(|(k, z)| (u + k, z.norm(alpha)))
                    .find(|(_, n)| !(*n <= config.ceiling))
                    .unwrap_or((v, 0.0));
                if norm > 0.0 || norm.is_nan() {
                    return Err(Error::BlowUp {
                        step,
                        norm,
                        ceiling: config.ceiling,
                    });
                }
                return Err(Error::NonContraction {
                    start: u,
                    end: v,
                    iterations: out.iterations,
                    difference: out.difference,
                });
            }
            for (k, z) in out.path.iter().enumerate().skip(1) {
                let n = z.norm(alpha);
                if !(n <= config.ceiling) {
                    return Err(Error::BlowUp {
                        step: u + k,
                        norm: n,
                        ceiling: config.ceiling,
                    });
                }
            }
            path.extend(out.path.into_iter().skip(1));
            intervals.push(SolvedInterval {
                start: u,
                end: v,
                iterations: out.iterations,
                converged: out.converged,
                difference: out.difference,
            });
        }
    }

    let derivs = par::try_map_indexed(config.execution, path.len(), |k| {
        let node = problem.node(path[k].clone());
        (0..problem.channels())
            .map(|i| problem.diffusion(i, &node))
            .collect::<Result<Vec<_>>>()
    })?;
    let trajectory = ControlledPath::new(start, alpha, gamma, path, derivs)?;
    let mut solution = MildSolution {
        trajectory,
        residuals: Vec::new(),
        partition,
        intervals,
        epsilon,
        dt: rough.dt(),
    };

    let mut marks: Vec<usize> = solution.partition.points[1..].to_vec();
    let q = config.checkpoints;
    for j in 1..=q {
        marks.push(start + (end - start) * j / q);
    }
    marks.sort_unstable();
    marks.dedup();
    let contributions = step_contributions(problem, rough, &solution, start, end, config.execution)?;
    solution.residuals = marks
        .into_iter()
        .map(|t| {
            Ok(Checkpoint {
                index: t,
                time: rough.time(t),
                residual: direct_residual(problem, &solution, &contributions, start, start, t)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(solution)
}

/// `c_j = h [psi F(Z_j) + (phi1 - psi) F(Z_{j+1})] + S_h Xi_j(Z_j)` from the
/// stored trajectory.
fn step_contributions(
    problem: &Problem,
    rough: &RoughPathGrid,
    solution: &MildSolution,
    s: usize,
    t: usize,
    exec: Execution,
) -> Result<Vec<SpectralField>> {
    let step = StepWeights::new(problem.semigroup().rates(), rough.dt());
    let locals = par::try_map_indexed(exec, t - s + 1, |k| {
        local(problem, rough, solution.value(s + k), s + k, s + k < t)
    })?;
    Ok((0..t - s)
        .map(|k| increment(&step, &locals[k], locals[k + 1].drift.as_ref()))
        .collect())
}

/// `|Z_t - S_{t-s} Z_s - sum_{s <= j < t} S_{t - t_{j+1}} c_j|_alpha` summed term
/// by term; `contributions[0]` belongs to step `offset`.
fn direct_residual(
    problem: &Problem,
    solution: &MildSolution,
    contributions: &[SpectralField],
    offset: usize,
    s: usize,
    t: usize,
) -> Result<f64> {
    let sg = problem.semigroup();
    let h = solution.dt;
    let mut r = solution.value(t).sub(&sg.apply(solution.value(s), (t - s) as f64 * h)?);
    for j in s..t {
        let f = sg.factors((t - j - 1) as f64 * h)?;
        scale_add(&mut r, &contributions[j - offset], &f.iter().map(|x| -x).collect::<Vec<_>>());
    }
    Ok(r.norm(problem.alpha()))
}

/// Defect of the discrete mild identity between grid points `s <= t` of a
/// solution, with both integrals recomputed from the stored trajectory.
pub fn mild_residual(
    solution: &MildSolution,
    problem: &Problem,
    rough: &RoughPathGrid,
    s: usize,
    t: usize,
) -> Result<f64> {
    if s < solution.start() || t > solution.end() || s > t {
        return Err(Error::OffGrid {
            start: s,
            end: t,
            steps: solution.end(),
        });
    }
    if s == t {
        return Ok(0.0);
    }
    let c = step_contributions(problem, rough, solution, s, t, Execution::default())?;
    direct_residual(problem, solution, &c, s, s, t)
}

#[cfg(test)]
mod tests {
    use super::super::problem::{Diffusion, Drift, ProblemSpec, SemigroupKind};
    use super::*;
    use crate::driver::{lift_piecewise_linear, GridPath};
    use crate::spectral::{Basis, Complex64, TrigPoly};

    fn spec(diffusion: Diffusion, drift: Drift) -> ProblemSpec {
        ProblemSpec {
            basis: Basis::periodic(1.0, 6, true).unwrap(),
            semigroup: SemigroupKind::Heat,
            alpha: 0.0,
            gamma: 0.45,
            sigma: 0.5,
            eta: 0.1,
            theta: 0.0,
            drift,
            diffusion: vec![diffusion],
        }
    }

    fn driver(steps: usize) -> RoughPathGrid {
        lift_piecewise_linear(
            &GridPath::from_fn(1.0, steps, 1, |t| vec![0.4 * (13.0 * t).sin() + 0.2 * (41.0 * t).cos()]).unwrap(),
        )
    }

    #[test]
    fn heat_decay_without_forcing() {
        let p = Problem::new(spec(Diffusion::Zero, Drift::Zero)).unwrap();
        let b = *p.basis();
        let z0 = SpectralField::single_mode(b, 2, Complex64::new(1.0, 0.5)).unwrap();
        let r = driver(64);
        let sol = solve_mild(&p, &r, &z0, 0, 64, &SolverConfig::default()).unwrap();
        let exact = p.semigroup().apply(&z0, 1.0).unwrap();
        assert!(sol.last().distance(&exact, 0.0) <= 1e-12 * exact.norm(0.0));
        assert!(sol.max_residual() < 1e-12);
    }

    #[test]
    fn converged_solution_has_small_residual() {
        let p = Problem::new(spec(
            Diffusion::Sine { amplitude: 0.8 },
            Drift::Saturating {
                linear: -1.0,
                saturating: 0.5,
            },
        ))
        .unwrap();
        let b = *p.basis();
        let z0 = SpectralField::single_mode(b, 1, Complex64::new(0.3, 0.1)).unwrap();
        let r = driver(128);
        let config = SolverConfig {
            tol: 1e-9,
            ..SolverConfig::default()
        };
        let sol = solve_mild(&p, &r, &z0, 0, 128, &config).unwrap();
        assert!(sol.max_residual() <= 1e-9, "{}", sol.max_residual());
        let direct = mild_residual(&sol, &p, &r, 17, 101).unwrap();
        assert!(direct <= 1e-9);
    }

    #[test]
    fn zero_is_a_fixed_point() {
        let p = Problem::new(spec(
            Diffusion::Multiplier {
                g: TrigPoly::constant(0.5),
                power: None,
            },
            Drift::Zero,
        ))
        .unwrap();
        let z0 = SpectralField::zeros(*p.basis());
        let sol = solve_mild(&p, &driver(32), &z0, 0, 32, &SolverConfig::default()).unwrap();
        assert!(sol.trajectory.values.iter().all(|z| z.norm(0.0) == 0.0));
    }

    #[test]
    fn blow_up_is_reported() {
        let p = Problem::new(spec(
            Diffusion::Zero,
            Drift::Polynomial {
                coeffs: vec![0.0, 0.0, 0.0, 50.0],
            },
        ))
        .unwrap();
        let b = *p.basis();
        let z0 = SpectralField::single_mode(b, 1, Complex64::new(3.0, 0.0)).unwrap();
        let config = SolverConfig {
            ceiling: 1e3,
            ..SolverConfig::default()
        };
        let r = solve_mild(&p, &driver(64), &z0, 0, 64, &config);
        assert!(matches!(r, Err(Error::BlowUp { .. }) | Err(Error::NonContraction { .. })), "{r:?}");
    }
}
