//! Spectral Sobolev scale on an interval of length `l`.
//!
//! Two bases are supported: complex exponentials `e^{2 pi i k x / l}`,
//! `|k| <= K` (periodic), and sines `sin(pi k x / l)`, `1 <= k <= K`
//! (homogeneous Dirichlet). The negative Laplacian is diagonal with
//! eigenvalues `mu_k = (2 pi k / l)^2` resp. `(pi k / l)^2`, and the scale
//! `B_alpha` carries the norm `(sum_k (1 + mu_k)^{2 alpha} |c_k|^2)^{1/2}`.

pub mod io;
mod semigroup;
mod space;
mod trig;

pub use rustfft::num_complex::Complex64;
pub use semigroup::Semigroup;
pub use space::SpectralSpace;
pub use trig::TrigPoly;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisKind {
    Periodic,
    Dirichlet,
}

/// A truncated spectral basis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Basis {
    pub kind: BasisKind,
    pub length: f64,
    pub modes: usize,
    /// Periodic only: drop the constant mode from every state.
    #[serde(default)]
    pub zero_mean: bool,
}

impl Basis {
    pub fn new(kind: BasisKind, length: f64, modes: usize, zero_mean: bool) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "domain length must be positive, got {length}"
            )));
        }
        if modes == 0 {
            return Err(Error::InvalidParameter("at least one mode is required".into()));
        }
        Ok(Self {
            kind,
            length,
            modes,
            zero_mean: zero_mean && kind == BasisKind::Periodic,
        })
    }

    pub fn periodic(length: f64, modes: usize, zero_mean: bool) -> Result<Self> {
        Self::new(BasisKind::Periodic, length, modes, zero_mean)
    }

    pub fn dirichlet(length: f64, modes: usize) -> Result<Self> {
        Self::new(BasisKind::Dirichlet, length, modes, false)
    }

    /// Number of stored coefficients.
    pub fn len(&self) -> usize {
        match self.kind {
            BasisKind::Periodic => 2 * self.modes + 1,
            BasisKind::Dirichlet => self.modes,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Wavenumber of storage slot `idx`.
    pub fn wavenumber(&self, idx: usize) -> i64 {
        match self.kind {
            BasisKind::Periodic => idx as i64 - self.modes as i64,
            BasisKind::Dirichlet => idx as i64 + 1,
        }
    }

    /// Storage slot of wavenumber `k`, if retained.
    pub fn index_of(&self, k: i64) -> Option<usize> {
        let kk = self.modes as i64;
        match self.kind {
            BasisKind::Periodic if k.abs() <= kk => Some((k + kk) as usize),
            BasisKind::Dirichlet if k >= 1 && k <= kk => Some((k - 1) as usize),
            _ => None,
        }
    }

    /// Eigenvalue of `-Laplacian` on storage slot `idx`.
    pub fn eigenvalue(&self, idx: usize) -> f64 {
        let k = self.wavenumber(idx) as f64;
        let w = match self.kind {
            BasisKind::Periodic => 2.0 * std::f64::consts::PI * k / self.length,
            BasisKind::Dirichlet => std::f64::consts::PI * k / self.length,
        };
        w * w
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.eigenvalue(i)).collect()
    }

    /// Whether slot `idx` is part of the state space (false only for the
    /// constant mode of a zero-mean periodic basis).
    pub fn is_active(&self, idx: usize) -> bool {
        !(self.zero_mean && self.wavenumber(idx) == 0 && self.kind == BasisKind::Periodic)
    }

    /// Dimension of the real state space.
    pub fn real_dim(&self) -> usize {
        match self.kind {
            BasisKind::Periodic => 2 * self.modes + usize::from(!self.zero_mean),
            BasisKind::Dirichlet => self.modes,
        }
    }

    /// Smallest retained eigenvalue of the state space.
    pub fn min_eigenvalue(&self) -> f64 {
        (0..self.len())
            .filter(|&i| self.is_active(i))
            .map(|i| self.eigenvalue(i))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Truncated coefficient vector on a [`Basis`].
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    basis: Basis,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(basis: Basis) -> Self {
        Self {
            basis,
            coeffs: vec![Complex64::new(0.0, 0.0); basis.len()],
        }
    }

    pub fn from_coeffs(basis: Basis, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::InvalidParameter(format!(
                "{} coefficients for a basis of {}",
                coeffs.len(),
                basis.len()
            )));
        }
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::InvalidParameter("non-finite coefficient".into()));
        }
        Ok(Self { basis, coeffs })
    }

    /// Real function with a single Fourier mode: `value e^{ikx} + conj(value) e^{-ikx}`
    /// on the periodic basis, `value sin(pi k x / l)` (real part) on the sine basis.
    pub fn single_mode(basis: Basis, k: i64, value: Complex64) -> Result<Self> {
        let mut f = Self::zeros(basis);
        let idx = basis
            .index_of(k)
            .ok_or_else(|| Error::InvalidParameter(format!("wavenumber {k} is not retained")))?;
        match basis.kind {
            BasisKind::Periodic => {
                if k == 0 {
                    f.coeffs[idx] = Complex64::new(value.re, 0.0);
                } else {
                    f.coeffs[idx] = value;
                    f.coeffs[basis.index_of(-k).unwrap()] = value.conj();
                }
            }
            BasisKind::Dirichlet => f.coeffs[idx] = Complex64::new(value.re, 0.0),
        }
        Ok(f)
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient of wavenumber `k` (zero when not retained).
    pub fn coeff(&self, k: i64) -> Complex64 {
        self.basis
            .index_of(k)
            .map_or(Complex64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    /// `|x|_alpha`.
    pub fn norm(&self, alpha: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| (1.0 + self.basis.eigenvalue(i)).powf(2.0 * alpha) * c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `|self - other|_alpha`.
    pub fn distance(&self, other: &Self, alpha: f64) -> f64 {
        debug_assert_eq!(self.basis, other.basis);
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .enumerate()
            .map(|(i, (a, b))| (1.0 + self.basis.eigenvalue(i)).powf(2.0 * alpha) * (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&mut self, c: f64) {
        self.coeffs.iter_mut().for_each(|x| *x *= c);
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.scale(c);
        out
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: f64, other: &Self) {
        debug_assert_eq!(self.basis, other.basis);
        self.coeffs
            .iter_mut()
            .zip(&other.coeffs)
            .for_each(|(a, b)| *a += b * c);
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// Zero the constant mode when the basis is zero-mean.
    pub fn project(&mut self) {
        if self.basis.zero_mean {
            if let Some(i) = self.basis.index_of(0) {
                self.coeffs[i] = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Whether `c_{-k} = conj(c_k)` holds to `tol` (always true on the sine basis).
    pub fn is_conjugate_symmetric(&self, tol: f64) -> bool {
        match self.basis.kind {
            BasisKind::Dirichlet => self.coeffs.iter().all(|c| c.im.abs() <= tol),
            BasisKind::Periodic => (0..=self.basis.modes as i64)
                .all(|k| (self.coeff(k) - self.coeff(-k).conj()).norm() <= tol),
        }
    }

    /// Real coordinates `[Re c_0, Re c_1, Im c_1, ..., Re c_K, Im c_K]` (the
    /// first entry omitted on a zero-mean basis) or the sine coefficients.
    pub fn to_real(&self) -> Vec<f64> {
        match self.basis.kind {
            BasisKind::Dirichlet => self.coeffs.iter().map(|c| c.re).collect(),
            BasisKind::Periodic => {
                let mut out = Vec::with_capacity(self.basis.real_dim());
                if !self.basis.zero_mean {
                    out.push(self.coeff(0).re);
                }
                for k in 1..=self.basis.modes as i64 {
                    let c = self.coeff(k);
                    out.push(c.re);
                    out.push(c.im);
                }
                out
            }
        }
    }

    /// Inverse of [`SpectralField::to_real`].
    pub fn from_real(basis: Basis, real: &[f64]) -> Result<Self> {
        if real.len() != basis.real_dim() {
            return Err(Error::InvalidParameter(format!(
                "{} real coordinates for a state space of dimension {}",
                real.len(),
                basis.real_dim()
            )));
        }
        let mut f = Self::zeros(basis);
        match basis.kind {
            BasisKind::Dirichlet => {
                for (c, &r) in f.coeffs.iter_mut().zip(real) {
                    *c = Complex64::new(r, 0.0);
                }
            }
            BasisKind::Periodic => {
                let mut it = real.iter().copied();
                if !basis.zero_mean {
                    f.coeffs[basis.index_of(0).unwrap()] = Complex64::new(it.next().unwrap(), 0.0);
                }
                for k in 1..=basis.modes as i64 {
                    let c = Complex64::new(it.next().unwrap(), it.next().unwrap());
                    f.coeffs[basis.index_of(k).unwrap()] = c;
                    f.coeffs[basis.index_of(-k).unwrap()] = c.conj();
                }
            }
        }
        Ok(f)
    }

    /// Norm weight `(1 + mu)^alpha` of each real coordinate, in the order of
    /// [`SpectralField::to_real`]. On the periodic basis a real coordinate
    /// represents two conjugate coefficients, hence the extra `sqrt 2`.
    pub fn real_weights(basis: &Basis, alpha: f64) -> Vec<f64> {
        match basis.kind {
            BasisKind::Dirichlet => (0..basis.len())
                .map(|i| (1.0 + basis.eigenvalue(i)).powf(alpha))
                .collect(),
            BasisKind::Periodic => {
                let mut out = Vec::with_capacity(basis.real_dim());
                if !basis.zero_mean {
                    out.push(1.0);
                }
                for k in 1..=basis.modes as i64 {
                    let w = (1.0 + basis.eigenvalue(basis.index_of(k).unwrap())).powf(alpha)
                        * std::f64::consts::SQRT_2;
                    out.push(w);
                    out.push(w);
                }
                out
            }
        }
    }
}
