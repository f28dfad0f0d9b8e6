use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use super::{Basis, BasisKind, Complex64, SpectralField, TrigPoly};
use crate::{Error, Result};

/// Collocation machinery for a basis: maps between coefficients and grid
/// values on a dealiasing grid of at least `3x` the retained modes.
///
/// Periodic grids are `x_j = j l / M`, `j = 0..M`, with `M` a power of two
/// `>= 3 (2K + 1)`. Sine grids are the interior points `x_j = j l / M`,
/// `j = 1..M`, with `M >= 3K + 1`. Plans are shared and immutable, so
/// concurrent calls are safe.
#[derive(Clone)]
pub struct SpectralSpace {
    basis: Basis,
    grid: usize,
    plan: Plan,
}

#[derive(Clone)]
enum Plan {
    Fourier {
        forward: Arc<dyn Fft<f64>>,
        inverse: Arc<dyn Fft<f64>>,
    },
    /// Row-major `(M - 1) x K` table of `sin(pi k j / M)`.
    Sine(Arc<Vec<f64>>),
}

impl fmt::Debug for SpectralSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralSpace")
            .field("basis", &self.basis)
            .field("grid", &self.grid)
            .finish()
    }
}

impl SpectralSpace {
    pub fn new(basis: Basis) -> Self {
        match basis.kind {
            BasisKind::Periodic => {
                let grid = (3 * (2 * basis.modes + 1)).next_power_of_two();
                let mut planner = FftPlanner::new();
                let plan = Plan::Fourier {
                    forward: planner.plan_fft_forward(grid),
                    inverse: planner.plan_fft_inverse(grid),
                };
                Self { basis, grid, plan }
            }
            BasisKind::Dirichlet => {
                let grid = (3 * basis.modes + 1).next_power_of_two();
                let k = basis.modes;
                let mut table = Vec::with_capacity((grid - 1) * k);
                for j in 1..grid {
                    for m in 1..=k {
                        let arg = std::f64::consts::PI * (m * j) as f64 / grid as f64;
                        table.push(arg.sin());
                    }
                }
                Self {
                    basis,
                    grid,
                    plan: Plan::Sine(Arc::new(table)),
                }
            }
        }
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    /// Number of collocation points.
    pub fn grid_len(&self) -> usize {
        match self.basis.kind {
            BasisKind::Periodic => self.grid,
            BasisKind::Dirichlet => self.grid - 1,
        }
    }

    pub fn grid_points(&self) -> Vec<f64> {
        let h = self.basis.length / self.grid as f64;
        match self.basis.kind {
            BasisKind::Periodic => (0..self.grid).map(|j| j as f64 * h).collect(),
            BasisKind::Dirichlet => (1..self.grid).map(|j| j as f64 * h).collect(),
        }
    }

    /// Values of a profile at the collocation points.
    pub fn sample(&self, p: &TrigPoly) -> Vec<f64> {
        self.grid_points()
            .into_iter()
            .map(|x| p.eval(x, self.basis.length))
            .collect()
    }

    fn check(&self, field: &SpectralField) -> Result<()> {
        if *field.basis() != self.basis {
            return Err(Error::BasisMismatch);
        }
        Ok(())
    }

    /// Grid values of the real function represented by `field`.
    pub fn to_grid(&self, field: &SpectralField) -> Vec<f64> {
        debug_assert_eq!(*field.basis(), self.basis);
        match &self.plan {
            Plan::Fourier { inverse, .. } => {
                let m = self.grid;
                let mut buf = vec![Complex64::new(0.0, 0.0); m];
                for (i, c) in field.coeffs().iter().enumerate() {
                    let k = self.basis.wavenumber(i);
                    buf[k.rem_euclid(m as i64) as usize] = *c;
                }
                inverse.process(&mut buf);
                buf.into_iter().map(|c| c.re).collect()
            }
            Plan::Sine(table) => {
                let k = self.basis.modes;
                let b: Vec<f64> = field.coeffs().iter().map(|c| c.re).collect();
                table
                    .chunks_exact(k)
                    .map(|row| row.iter().zip(&b).map(|(s, c)| s * c).sum())
                    .collect()
            }
        }
    }

    /// Truncated coefficients of grid values (no projection).
    pub fn from_grid(&self, values: &[f64]) -> SpectralField {
        debug_assert_eq!(values.len(), self.grid_len());
        let mut out = SpectralField::zeros(self.basis);
        match &self.plan {
            Plan::Fourier { forward, .. } => {
                let m = self.grid;
                let mut buf: Vec<Complex64> =
                    values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                forward.process(&mut buf);
                let inv = 1.0 / m as f64;
                for (i, c) in out.coeffs_mut().iter_mut().enumerate() {
                    let k = self.basis.wavenumber(i);
                    *c = buf[k.rem_euclid(m as i64) as usize] * inv;
                }
                // Real input: enforce exact conjugate symmetry.
                let kk = self.basis.modes as i64;
                let zero = self.basis.index_of(0).unwrap();
                out.coeffs_mut()[zero].im = 0.0;
                for k in 1..=kk {
                    let (p, n) = (
                        self.basis.index_of(k).unwrap(),
                        self.basis.index_of(-k).unwrap(),
                    );
                    let avg = (out.coeffs()[p] + out.coeffs()[n].conj()) * 0.5;
                    out.coeffs_mut()[p] = avg;
                    out.coeffs_mut()[n] = avg.conj();
                }
            }
            Plan::Sine(table) => {
                let k = self.basis.modes;
                let scale = 2.0 / self.grid as f64;
                let mut b = vec![0.0; k];
                for (row, v) in table.chunks_exact(k).zip(values) {
                    for (acc, s) in b.iter_mut().zip(row) {
                        *acc += s * v;
                    }
                }
                for (c, v) in out.coeffs_mut().iter_mut().zip(b) {
                    *c = Complex64::new(v * scale, 0.0);
                }
            }
        }
        out
    }

    fn finish(&self, values: &[f64]) -> Result<SpectralField> {
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(j));
        }
        let mut out = self.from_grid(values);
        out.project();
        Ok(out)
    }

    /// Nemytskii map `u -> f(u)`: evaluate on the collocation grid, transform
    /// back and truncate.
    pub fn apply_pointwise<F>(&self, field: &SpectralField, f: F) -> Result<SpectralField>
    where
        F: Fn(f64) -> f64,
    {
        self.check(field)?;
        let v: Vec<f64> = self.to_grid(field).into_iter().map(f).collect();
        self.finish(&v)
    }

    /// `u -> f(x, u)` with access to the collocation index.
    pub fn apply_indexed<F>(&self, field: &SpectralField, f: F) -> Result<SpectralField>
    where
        F: Fn(usize, f64) -> f64,
    {
        self.check(field)?;
        let v: Vec<f64> = self
            .to_grid(field)
            .into_iter()
            .enumerate()
            .map(|(j, u)| f(j, u))
            .collect();
        self.finish(&v)
    }

    /// Map grid values to a field, projecting onto the state space.
    pub fn project_grid(&self, values: &[f64]) -> Result<SpectralField> {
        self.finish(values)
    }

    /// `(-Laplacian)^eta` coefficient-wise, with `0^0 = 1`.
    pub fn fractional_laplacian(&self, field: &SpectralField, eta: f64) -> SpectralField {
        let mut out = field.clone();
        if eta == 0.0 {
            return out;
        }
        for (i, c) in out.coeffs_mut().iter_mut().enumerate() {
            *c *= self.basis.eigenvalue(i).powf(eta);
        }
        out
    }

    /// `g(x) (-Laplacian)^eta u` with `g` given by its grid values.
    pub fn multiply_grid(&self, field: &SpectralField, g: &[f64], eta: f64) -> Result<SpectralField> {
        self.check(field)?;
        let lifted = self.fractional_laplacian(field, eta);
        let v: Vec<f64> = self
            .to_grid(&lifted)
            .into_iter()
            .zip(g)
            .map(|(u, g)| u * g)
            .collect();
        self.finish(&v)
    }

    /// `g (-Laplacian)^eta u` with `g` a field on the same basis.
    pub fn apply_multiplier(
        &self,
        field: &SpectralField,
        g: &SpectralField,
        eta: f64,
    ) -> Result<SpectralField> {
        if !(eta >= 0.0) {
            return Err(Error::InvalidParameter(format!("fractional power must be >= 0, got {eta}")));
        }
        self.check(field)?;
        self.check(g)?;
        let gv = self.to_grid(g);
        self.multiply_grid(field, &gv, eta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_field(basis: Basis, seed: u64) -> SpectralField {
        let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let real: Vec<f64> = (0..basis.real_dim()).map(|_| next()).collect();
        SpectralField::from_real(basis, &real).unwrap()
    }

    #[test]
    fn identity_round_trip() {
        for basis in [
            Basis::periodic(1.3, 7, false).unwrap(),
            Basis::dirichlet(0.8, 9).unwrap(),
        ] {
            let space = SpectralSpace::new(basis);
            let f = random_field(basis, 3);
            let g = space.apply_pointwise(&f, |u| u).unwrap();
            assert!(f.distance(&g, 0.0) <= 1e-12 * f.norm(0.0));
            let z = space.apply_pointwise(&f, |_| 0.0).unwrap();
            assert_eq!(z.norm(0.0), 0.0);
        }
    }

    #[test]
    fn square_matches_convolution() {
        let basis = Basis::periodic(1.0, 4, false).unwrap();
        let space = SpectralSpace::new(basis);
        let mut f = SpectralField::zeros(basis);
        let a = Complex64::new(0.3, -0.2);
        let b = Complex64::new(-0.1, 0.4);
        f.coeffs_mut()[basis.index_of(1).unwrap()] = a;
        f.coeffs_mut()[basis.index_of(-1).unwrap()] = a.conj();
        f.coeffs_mut()[basis.index_of(2).unwrap()] = b;
        f.coeffs_mut()[basis.index_of(-2).unwrap()] = b.conj();
        let sq = space.apply_pointwise(&f, |u| u * u).unwrap();
        for k in -4i64..=4 {
            let mut expect = Complex64::new(0.0, 0.0);
            for p in -4i64..=4 {
                expect += f.coeff(p) * f.coeff(k - p);
            }
            assert!((sq.coeff(k) - expect).norm() < 1e-14, "k = {k}");
        }
    }

    #[test]
    fn multiplier_scales_single_mode() {
        let basis = Basis::periodic(2.0, 5, true).unwrap();
        let space = SpectralSpace::new(basis);
        let f = SpectralField::single_mode(basis, 3, Complex64::new(1.0, 0.5)).unwrap();
        let one = SpectralField::single_mode(Basis { zero_mean: false, ..basis }, 0, Complex64::new(1.0, 0.0));
        assert!(one.is_ok());
        let g = space.sample(&TrigPoly::constant(1.0));
        let out = space.multiply_grid(&f, &g, 0.1).unwrap();
        let mu = basis.eigenvalue(basis.index_of(3).unwrap());
        assert!(out.distance(&f.scaled(mu.powf(0.1)), 0.0) < 1e-12);
        let other = SpectralField::zeros(Basis::periodic(2.0, 4, true).unwrap());
        assert!(matches!(space.apply_multiplier(&f, &other, 0.1), Err(Error::BasisMismatch)));
    }

    #[test]
    fn non_finite_values_are_reported() {
        let basis = Basis::dirichlet(1.0, 3).unwrap();
        let space = SpectralSpace::new(basis);
        let f = random_field(basis, 1);
        assert!(matches!(
            space.apply_pointwise(&f, |u| 1.0 / (u - u)),
            Err(Error::NonFinite(_))
        ));
    }
}
