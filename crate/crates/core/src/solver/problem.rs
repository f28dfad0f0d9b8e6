use serde::{Deserialize, Serialize};

use crate::spectral::{Basis, Semigroup, SpectralField, SpectralSpace, TrigPoly};
use crate::{Error, Result};

/// Linear part `A` of the equation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SemigroupKind {
    /// `A = Laplacian`.
    #[default]
    Heat,
    /// `A = 0`.
    Trivial,
}

/// Drift `F`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Drift {
    #[default]
    Zero,
    /// `F(u) = V(x) u`.
    Potential { v: TrigPoly },
    /// `F(u) = u (a + b u^2 / (1 + u^2))`.
    Saturating { linear: f64, saturating: f64 },
    /// `F(u) = sum_j c_j u^j`.
    Polynomial { coeffs: Vec<f64> },
}

/// Diffusion `G_i` of one noise channel.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Diffusion {
    #[default]
    Zero,
    /// `G(u) = h(x)`.
    Additive { h: TrigPoly },
    /// `G(u) = g(x) (-Laplacian)^p u`; `p` defaults to the problem's `eta`.
    Multiplier {
        g: TrigPoly,
        #[serde(default)]
        power: Option<f64>,
    },
    /// `G(u) = a sin(u)`.
    Sine { amplitude: f64 },
}

impl Drift {
    fn scalar(&self) -> Option<(Box<dyn Fn(f64) -> f64 + Send + Sync>, Box<dyn Fn(f64) -> f64 + Send + Sync>)> {
        match self.clone() {
            Drift::Saturating { linear: a, saturating: b } => Some((
                Box::new(move |u: f64| u * (a + b * u * u / (1.0 + u * u))),
                Box::new(move |u: f64| {
                    let u2 = u * u;
                    a + b * (3.0 * u2 + u2 * u2) / ((1.0 + u2) * (1.0 + u2))
                }),
            )),
            Drift::Polynomial { coeffs } => {
                let c2 = coeffs.clone();
                Some((
                    Box::new(move |u: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * u + c)),
                    Box::new(move |u: f64| {
                        c2.iter()
                            .enumerate()
                            .skip(1)
                            .rev()
                            .fold(0.0, |acc, (j, c)| acc * u + j as f64 * c)
                    }),
                ))
            }
            _ => None,
        }
    }

    /// Whether `F(0) = 0`.
    pub fn vanishes_at_zero(&self) -> bool {
        match self {
            Drift::Polynomial { coeffs } => coeffs.first().is_none_or(|c| *c == 0.0),
            _ => true,
        }
    }
}

impl Diffusion {
    pub fn vanishes_at_zero(&self) -> bool {
        match self {
            Diffusion::Additive { h } => h.is_zero(),
            _ => true,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Diffusion::Zero => true,
            Diffusion::Additive { h } => h.is_zero(),
            Diffusion::Multiplier { g, .. } => g.is_zero(),
            Diffusion::Sine { amplitude } => *amplitude == 0.0,
        }
    }

    /// The same family with every coefficient multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        match self {
            Diffusion::Zero => Diffusion::Zero,
            Diffusion::Additive { h } => Diffusion::Additive { h: h.scaled(c) },
            Diffusion::Multiplier { g, power } => Diffusion::Multiplier {
                g: g.scaled(c),
                power: *power,
            },
            Diffusion::Sine { amplitude } => Diffusion::Sine {
                amplitude: amplitude * c,
            },
        }
    }
}

/// Equation `dZ = (A Z + F(Z)) dt + sum_i G_i(Z) o dX^i` together with the
/// exponents of the functional setting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub basis: Basis,
    #[serde(default)]
    pub semigroup: SemigroupKind,
    pub alpha: f64,
    pub gamma: f64,
    pub sigma: f64,
    pub eta: f64,
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub drift: Drift,
    pub diffusion: Vec<Diffusion>,
}

/// One violated structural inequality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// The inequality that fails, e.g. `η<γ`.
    pub constraint: String,
    pub detail: String,
}

impl Violation {
    pub fn new(constraint: &str, detail: String) -> Self {
        Self {
            constraint: constraint.to_string(),
            detail,
        }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ({})", self.constraint, self.detail)
    }
}

impl ProblemSpec {
    pub fn channels(&self) -> usize {
        self.diffusion.len()
    }

    /// Every violated inequality of the standing assumptions.
    pub fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        let (g, s, e, t) = (self.gamma, self.sigma, self.eta, self.theta);
        if !(g > 1.0 / 3.0 && g <= 0.5) {
            v.push(Violation::new("1/3<γ≤1/2", format!("gamma = {g}")));
        }
        if !(s >= 0.0) {
            v.push(Violation::new("0≤σ", format!("sigma = {s}")));
        }
        if !(s < 1.0) {
            v.push(Violation::new("σ<1", format!("sigma = {s}")));
        }
        if !(e >= 0.0) {
            v.push(Violation::new("0≤η", format!("eta = {e}")));
        }
        if !(e < g) {
            v.push(Violation::new("η<γ", format!("eta = {e}, gamma = {g}")));
        }
        if !(t >= 0.0 && t <= 2.0 * g) {
            v.push(Violation::new("0≤θ≤2γ", format!("theta = {t}, gamma = {g}")));
        }
        if self.diffusion.is_empty() {
            v.push(Violation::new("n≥1", "at least one noise channel is required".into()));
        }
        for (i, d) in self.diffusion.iter().enumerate() {
            if let Diffusion::Multiplier { power: Some(p), .. } = d {
                if !(*p >= 0.0 && *p <= e) {
                    v.push(Violation::new(
                        "0≤p≤η",
                        format!("channel {}: multiplier power {p} exceeds eta = {e}", i + 1),
                    ));
                }
            }
        }
        v
    }

    pub fn check(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Assumption(v.iter().map(|x| x.to_string()).collect()))
        }
    }

    /// Whether zero is a stationary point.
    pub fn zero_is_stationary(&self) -> bool {
        self.drift.vanishes_at_zero() && self.diffusion.iter().all(|d| d.vanishes_at_zero())
    }
}

/// A field together with its collocation values.
#[derive(Clone, Debug)]
pub struct Node {
    pub field: SpectralField,
    pub grid: Vec<f64>,
}

#[derive(Debug)]
enum DiffusionOp {
    Zero,
    Constant(SpectralField),
    Multiplier { g: Vec<f64>, power: f64 },
    Sine(f64),
}

enum DriftOp {
    Zero,
    Potential(Vec<f64>),
    Scalar {
        f: Box<dyn Fn(f64) -> f64 + Send + Sync>,
        df: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl std::fmt::Debug for DriftOp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DriftOp::Zero => write!(f, "Zero"),
            DriftOp::Potential(_) => write!(f, "Potential"),
            DriftOp::Scalar { .. } => write!(f, "Scalar"),
        }
    }
}

/// A validated problem with its collocation space and semigroup.
#[derive(Debug)]
pub struct Problem {
    spec: ProblemSpec,
    space: SpectralSpace,
    semigroup: Semigroup,
    drift: DriftOp,
    diffusion: Vec<DiffusionOp>,
}

impl Problem {
    pub fn new(spec: ProblemSpec) -> Result<Self> {
        spec.check()?;
        Self::build(spec)
    }

    /// Build without checking the structural inequalities (used for sanity
    /// cases outside the rough regime, e.g. a smooth driver).
    pub fn new_unchecked(spec: ProblemSpec) -> Result<Self> {
        if spec.diffusion.is_empty() {
            return Err(Error::InvalidParameter("at least one noise channel is required".into()));
        }
        Self::build(spec)
    }

    fn build(spec: ProblemSpec) -> Result<Self> {
        let basis = Basis::new(spec.basis.kind, spec.basis.length, spec.basis.modes, spec.basis.zero_mean)?;
        let space = SpectralSpace::new(basis);
        let semigroup = match spec.semigroup {
            SemigroupKind::Heat => Semigroup::heat(basis),
            SemigroupKind::Trivial => Semigroup::trivial(basis),
        };
        let drift = match &spec.drift {
            Drift::Zero => DriftOp::Zero,
            Drift::Potential { v } => DriftOp::Potential(space.sample(v)),
            d => {
                let (f, df) = d.scalar().unwrap();
                DriftOp::Scalar { f, df }
            }
        };
        let mut diffusion = Vec::new();
        for d in &spec.diffusion {
            diffusion.push(match d {
                d if d.is_zero() => DiffusionOp::Zero,
                Diffusion::Zero => DiffusionOp::Zero,
                Diffusion::Additive { h } => DiffusionOp::Constant(space.project_grid(&space.sample(h))?),
                Diffusion::Multiplier { g, power } => DiffusionOp::Multiplier {
                    g: space.sample(g),
                    power: power.unwrap_or(spec.eta),
                },
                Diffusion::Sine { amplitude } => DiffusionOp::Sine(*amplitude),
            });
        }
        Ok(Self {
            spec,
            space,
            semigroup,
            drift,
            diffusion,
        })
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn basis(&self) -> &Basis {
        self.space.basis()
    }

    pub fn space(&self) -> &SpectralSpace {
        &self.space
    }

    pub fn semigroup(&self) -> &Semigroup {
        &self.semigroup
    }

    pub fn channels(&self) -> usize {
        self.diffusion.len()
    }

    pub fn alpha(&self) -> f64 {
        self.spec.alpha
    }

    pub fn gamma(&self) -> f64 {
        self.spec.gamma
    }

    pub fn has_drift(&self) -> bool {
        !matches!(self.drift, DriftOp::Zero)
    }

    pub fn has_noise(&self) -> bool {
        self.diffusion.iter().any(|d| !matches!(d, DiffusionOp::Zero))
    }

    pub fn node(&self, field: SpectralField) -> Node {
        let grid = self.space.to_grid(&field);
        Node { field, grid }
    }

    fn zero(&self) -> SpectralField {
        SpectralField::zeros(*self.basis())
    }

    /// `F(z)`, or `None` when `F = 0`.
    pub fn drift(&self, z: &Node) -> Result<Option<SpectralField>> {
        match &self.drift {
            DriftOp::Zero => Ok(None),
            DriftOp::Potential(v) => {
                let w: Vec<f64> = z.grid.iter().zip(v).map(|(u, v)| u * v).collect();
                self.space.project_grid(&w).map(Some)
            }
            DriftOp::Scalar { f, .. } => {
                let w: Vec<f64> = z.grid.iter().map(|&u| f(u)).collect();
                self.space.project_grid(&w).map(Some)
            }
        }
    }

    /// `DF(z)[v]`, or `None` when `F = 0`.
    pub fn drift_derivative(&self, z: &Node, v: &Node) -> Result<Option<SpectralField>> {
        match &self.drift {
            DriftOp::Zero => Ok(None),
            DriftOp::Potential(p) => {
                let w: Vec<f64> = v.grid.iter().zip(p).map(|(u, p)| u * p).collect();
                self.space.project_grid(&w).map(Some)
            }
            DriftOp::Scalar { df, .. } => {
                let w: Vec<f64> = z.grid.iter().zip(&v.grid).map(|(&u, w)| df(u) * w).collect();
                self.space.project_grid(&w).map(Some)
            }
        }
    }

    /// `G_i(z)`.
    pub fn diffusion(&self, i: usize, z: &Node) -> Result<SpectralField> {
        match &self.diffusion[i] {
            DiffusionOp::Zero => Ok(self.zero()),
            DiffusionOp::Constant(h) => Ok(h.clone()),
            DiffusionOp::Multiplier { g, power } => self.space.multiply_grid(&z.field, g, *power),
            DiffusionOp::Sine(a) => {
                let w: Vec<f64> = z.grid.iter().map(|u| a * u.sin()).collect();
                self.space.project_grid(&w)
            }
        }
    }

    /// `DG_i(z)[v]`.
    pub fn diffusion_derivative(&self, i: usize, z: &Node, v: &Node) -> Result<SpectralField> {
        match &self.diffusion[i] {
            DiffusionOp::Zero | DiffusionOp::Constant(_) => Ok(self.zero()),
            DiffusionOp::Multiplier { g, power } => self.space.multiply_grid(&v.field, g, *power),
            DiffusionOp::Sine(a) => {
                let w: Vec<f64> = z.grid.iter().zip(&v.grid).map(|(u, v)| a * u.cos() * v).collect();
                self.space.project_grid(&w)
            }
        }
    }

    /// `D^2 G_i(z)[v, w]`, or `None` when it vanishes identically.
    pub fn diffusion_second(&self, i: usize, z: &Node, v: &Node, w: &Node) -> Result<Option<SpectralField>> {
        match &self.diffusion[i] {
            DiffusionOp::Sine(a) => {
                let vals: Vec<f64> = z
                    .grid
                    .iter()
                    .zip(&v.grid)
                    .zip(&w.grid)
                    .map(|((u, v), w)| -a * u.sin() * v * w)
                    .collect();
                self.space.project_grid(&vals).map(Some)
            }
            _ => Ok(None),
        }
    }

    fn is_linear_diffusion(&self, i: usize) -> bool {
        !matches!(self.diffusion[i], DiffusionOp::Sine(_))
    }

    /// Values `G_i(z)` and Gubinelli derivatives `DG_i(z)[G_j(z)]` (index
    /// `i * n + j`) of the rough integrand at `z`.
    pub fn integrand(&self, z: &Node) -> Result<(Vec<SpectralField>, Vec<SpectralField>)> {
        let n = self.channels();
        let mut values = Vec::with_capacity(n);
        let mut nodes = Vec::with_capacity(n);
        for i in 0..n {
            let g = self.diffusion(i, z)?;
            nodes.push(self.node(g.clone()));
            values.push(g);
        }
        let mut derivs = Vec::with_capacity(n * n);
        for i in 0..n {
            for node in &nodes {
                derivs.push(self.diffusion_derivative(i, z, node)?);
            }
        }
        Ok((values, derivs))
    }

    /// `sum_i G_i(z) dX^i + sum_ij DG_i(z)[G_j(z)] XX^{ji}`.
    pub fn germ(&self, z: &Node, dx: &[f64], area: &[f64]) -> Result<SpectralField> {
        let n = self.channels();
        let mut out = self.zero();
        if !self.has_noise() {
            return Ok(out);
        }
        let (values, derivs) = self.integrand(z)?;
        for i in 0..n {
            out.axpy(dx[i], &values[i]);
            for j in 0..n {
                out.axpy(area[j * n + i], &derivs[i * n + j]);
            }
        }
        Ok(out)
    }

    /// Derivative of [`Problem::germ`] at `z` in direction `zeta`:
    /// `sum_i DG_i[zeta] dX^i + sum_ij (D^2G_i[G_j, zeta] + DG_i[DG_j[zeta]]) XX^{ji}`.
    pub fn tangent_germ(&self, z: &Node, zeta: &Node, dx: &[f64], area: &[f64]) -> Result<SpectralField> {
        let n = self.channels();
        let mut out = self.zero();
        if !self.has_noise() {
            return Ok(out);
        }
        let mut first = Vec::with_capacity(n);
        for i in 0..n {
            let d = self.diffusion_derivative(i, z, zeta)?;
            out.axpy(dx[i], &d);
            first.push(self.node(d));
        }
        let nonlinear = (0..n).any(|i| !self.is_linear_diffusion(i));
        let g_nodes = if nonlinear {
            (0..n)
                .map(|j| Ok(self.node(self.diffusion(j, z)?)))
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        for i in 0..n {
            for j in 0..n {
                let c = area[j * n + i];
                if c == 0.0 {
                    continue;
                }
                out.axpy(c, &self.diffusion_derivative(i, z, &first[j])?);
                if nonlinear {
                    if let Some(s) = self.diffusion_second(i, z, &g_nodes[j], zeta)? {
                        out.axpy(c, &s);
                    }
                }
            }
        }
        Ok(out)
    }
}
