use serde::{Deserialize, Serialize};

use super::mild::MildSolution;
use super::problem::Problem;
use crate::controlled::dnorm;
use crate::driver::{hoelder_norms, RoughPathGrid};
use crate::Result;

/// Evaluated a priori bound on one solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// Greedy count `N([s,t], eta_1, chi, X)`.
    pub count: usize,
    pub chi: f64,
    pub epsilon: f64,
    pub eta1: f64,
    /// `|X|_gamma` and `|XX|_{2 gamma}` over the solve interval.
    pub path_norm: f64,
    pub area_norm: f64,
    /// `P(x, y) = 1 + y + x + x (x^2 + y)`.
    pub p_value: f64,
    /// Smallest `M >= 1` with `D_n <= 2M (|Z_{tau_n}|_alpha + P)` on every
    /// greedy interval.
    pub m_eps: f64,
    /// `log(2 M)`.
    pub m_tilde: f64,
    /// `exp(N M~) |Z_s| + (exp((N+1) M~) - 1) / (2M - 1) P`.
    pub bound: f64,
    /// Smallest factor `M'` with `|(Z, G(Z))|_D <= M' N (1 + |X|_gamma) bound`.
    pub bound2_factor: f64,
    /// `|(Z, G(Z))|_D` over the whole interval.
    pub dnorm_total: f64,
    /// Controlled-path norm on each greedy interval.
    pub interval_norms: Vec<f64>,
    /// `sup |Z|_alpha`.
    pub observed: f64,
    pub holds: bool,
    /// `M chi^{gamma - eta - epsilon} <= 1/4`.
    pub chi_condition: bool,
    /// `M (t - s)^{1 - max(sigma, 2 gamma)} <= 1/4`.
    pub time_condition: bool,
}

pub fn p_value(x: f64, y: f64) -> f64 {
    1.0 + y + x + x * (x * x + y)
}

/// Evaluate the bound on the solution's greedy partition with an empirically
/// calibrated `M`.
pub fn apriori_bound(solution: &MildSolution, problem: &Problem, rough: &RoughPathGrid) -> Result<BoundReport> {
    let (s, t) = (solution.start(), solution.end());
    let spec = problem.spec();
    let (gamma, eta, alpha) = (spec.gamma, spec.eta, spec.alpha);
    let h = hoelder_norms(rough, gamma, s, t)?;
    let p = p_value(h.path, h.area);
    let part = &solution.partition;
    let mut interval_norms = Vec::with_capacity(part.count);
    let mut m = 1.0f64;
    for w in part.points.windows(2) {
        let d = dnorm(&solution.trajectory, rough, w[0], w[1])?.total;
        let z = solution.value(w[0]).norm(alpha);
        m = m.max(d / (2.0 * (z + p)));
        interval_norms.push(d);
    }
    let n = part.count as f64;
    let two_m = 2.0 * m;
    let m_tilde = two_m.ln();
    let z_s = solution.value(s).norm(alpha);
    let bound = (n * m_tilde).exp() * z_s + (((n + 1.0) * m_tilde).exp() - 1.0) / (two_m - 1.0) * p;
    let observed = solution.sup_norm();
    let dnorm_total = dnorm(&solution.trajectory, rough, s, t)?.total;
    let bound2_factor = dnorm_total / (n * (1.0 + h.path) * bound);
    let sigma_bar = spec.sigma.max(2.0 * gamma);
    let span = rough.time(t) - rough.time(s);
    Ok(BoundReport {
        count: part.count,
        chi: part.chi,
        epsilon: solution.epsilon,
        eta1: part.eta1,
        path_norm: h.path,
        area_norm: h.area,
        p_value: p,
        m_eps: m,
        m_tilde,
        bound,
        bound2_factor,
        dnorm_total,
        interval_norms,
        observed,
        holds: observed <= bound,
        chi_condition: m * part.chi.powf(gamma - eta - solution.epsilon) <= 0.25,
        time_condition: m * span.powf(1.0 - sigma_bar) <= 0.25,
    })
}
