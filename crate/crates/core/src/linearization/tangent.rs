use crate::driver::RoughPathGrid;
use crate::par::{self, Execution};
use crate::solver::quadrature::StepWeights;
use crate::solver::{MildSolution, Node, Problem};
use crate::spectral::SpectralField;
use crate::{Error, Result};

/// `zeta_t = D phi^t [zeta_0]` along a base solution, with Gubinelli
/// derivatives `DG_i(Z_t)[zeta_t]`.
#[derive(Clone, Debug)]
pub struct TangentPath {
    pub start: usize,
    pub values: Vec<SpectralField>,
    pub derivs: Vec<Vec<SpectralField>>,
}

impl TangentPath {
    pub fn last(&self) -> &SpectralField {
        self.values.last().unwrap()
    }
}

fn check(base: &MildSolution, start: usize, end: usize) -> Result<()> {
    if start < base.start() || end > base.end() || start > end {
        return Err(Error::GridMismatch(format!(
            "interval [{start}, {end}] is not covered by the base solution on [{}, {}]",
            base.start(),
            base.end()
        )));
    }
    Ok(())
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

/// One tangent step `zeta_k -> zeta_{k+1}`; the implicit drift term is
/// resolved by fixed-point iteration.
fn step(
    problem: &Problem,
    rough: &RoughPathGrid,
    weights: &StepWeights,
    k: usize,
    z_k: &Node,
    z_next: &Node,
    zeta: &SpectralField,
) -> Result<SpectralField> {
    let zeta_node = problem.node(zeta.clone());
    let mut explicit = mul(zeta, &weights.decay);
    if problem.has_noise() {
        let dx = rough.increment(k, k + 1);
        let g = problem.tangent_germ(z_k, &zeta_node, &dx, rough.segment_block(k))?;
        scale_add(&mut explicit, &g, &weights.decay);
    }
    if !problem.has_drift() {
        return Ok(explicit);
    }
    if let Some(f) = problem.drift_derivative(z_k, &zeta_node)? {
        scale_add(&mut explicit, &f, &weights.left);
    }
    let mut next = explicit.clone();
    let scale = explicit.norm(0.0).max(zeta.norm(0.0));
    let mut last = f64::INFINITY;
    for _ in 0..100 {
        let mut cand = explicit.clone();
        if let Some(f) = problem.drift_derivative(z_next, &problem.node(next.clone()))? {
            scale_add(&mut cand, &f, &weights.right);
        }
        let d = cand.distance(&next, 0.0);
        next = cand;
        if d <= 4.0 * f64::EPSILON * scale {
            return Ok(next);
        }
        if d >= last {
            // Stagnation at round-off level is convergence; growth is not.
            if d <= 1e-12 * scale {
                return Ok(next);
            }
            break;
        }
        last = d;
    }
    Err(Error::NonContraction {
        start: k,
        end: k + 1,
        iterations: 100,
        difference: last,
    })
}

fn base_nodes(problem: &Problem, base: &MildSolution, start: usize, end: usize, exec: Execution) -> Vec<Node> {
    par::map_indexed(exec, end - start + 1, |k| problem.node(base.value(start + k).clone()))
}

/// Propagate several initial tangents over `[start, end]` and return the
/// final values.
pub fn propagate(
    problem: &Problem,
    rough: &RoughPathGrid,
    base: &MildSolution,
    zetas: &[SpectralField],
    start: usize,
    end: usize,
    exec: Execution,
) -> Result<Vec<SpectralField>> {
    check(base, start, end)?;
    let nodes = base_nodes(problem, base, start, end, exec);
    let weights = StepWeights::new(problem.semigroup().rates(), rough.dt());
    par::try_map_indexed(exec, zetas.len(), |c| {
        let mut z = zetas[c].clone();
        z.project();
        for k in start..end {
            z = step(problem, rough, &weights, k, &nodes[k - start], &nodes[k + 1 - start], &z)?;
        }
        Ok(z)
    })
}

/// Solve the linearized equation from `zeta0` on `[start, end]`.
pub fn solve_linearized(
    problem: &Problem,
    rough: &RoughPathGrid,
    base: &MildSolution,
    zeta0: &SpectralField,
    start: usize,
    end: usize,
) -> Result<TangentPath> {
    check(base, start, end)?;
    if *zeta0.basis() != *problem.basis() {
        return Err(Error::BasisMismatch);
    }
    let nodes = base_nodes(problem, base, start, end, Execution::default());
    let weights = StepWeights::new(problem.semigroup().rates(), rough.dt());
    let mut z = zeta0.clone();
    z.project();
    let mut values = vec![z];
    for k in start..end {
        let next = step(problem, rough, &weights, k, &nodes[k - start], &nodes[k + 1 - start], values.last().unwrap())?;
        values.push(next);
    }
    let derivs = values
        .iter()
        .zip(&nodes)
        .map(|(v, node)| {
            let vn = problem.node(v.clone());
            (0..problem.channels())
                .map(|i| problem.diffusion_derivative(i, node, &vn))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TangentPath { start, values, derivs })
}
