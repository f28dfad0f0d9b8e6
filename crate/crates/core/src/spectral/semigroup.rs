use super::{Basis, SpectralField};
use crate::{Error, Result};

/// Diagonal semigroup `S_t c_k = e^{-r_k t} c_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Semigroup {
    basis: Basis,
    rates: Vec<f64>,
}

impl Semigroup {
    /// Heat semigroup: rates are the Laplacian eigenvalues.
    pub fn heat(basis: Basis) -> Self {
        Self {
            rates: basis.eigenvalues(),
            basis,
        }
    }

    /// `S_t = I`.
    pub fn trivial(basis: Basis) -> Self {
        Self {
            rates: vec![0.0; basis.len()],
            basis,
        }
    }

    pub fn from_rates(basis: Basis, rates: Vec<f64>) -> Result<Self> {
        if rates.len() != basis.len() {
            return Err(Error::InvalidParameter(format!(
                "{} rates for a basis of {}",
                rates.len(),
                basis.len()
            )));
        }
        if rates.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::InvalidParameter("rates must be finite and nonnegative".into()));
        }
        Ok(Self { basis, rates })
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn factors(&self, t: f64) -> Result<Vec<f64>> {
        if t < 0.0 {
            return Err(Error::InvalidParameter(format!("semigroup time must be >= 0, got {t}")));
        }
        Ok(self.rates.iter().map(|r| (-r * t).exp()).collect())
    }

    pub fn apply(&self, field: &SpectralField, t: f64) -> Result<SpectralField> {
        if *field.basis() != self.basis {
            return Err(Error::BasisMismatch);
        }
        let mut out = field.clone();
        apply_factors(&mut out, &self.factors(t)?);
        Ok(out)
    }

    /// Operator norm of `S_t` on any `B_alpha`: `e^{-r_min t}` over the state space.
    pub fn operator_norm(&self, t: f64) -> f64 {
        let rmin = (0..self.basis.len())
            .filter(|&i| self.basis.is_active(i))
            .map(|i| self.rates[i])
            .fold(f64::INFINITY, f64::min);
        (-rmin * t).exp()
    }
}

pub(crate) fn apply_factors(field: &mut SpectralField, factors: &[f64]) {
    field
        .coeffs_mut()
        .iter_mut()
        .zip(factors)
        .for_each(|(c, f)| *c *= *f);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Complex64;

    fn field() -> SpectralField {
        let b = Basis::periodic(1.0, 3, true).unwrap();
        let c = (0..7).map(|i| Complex64::new(i as f64 - 3.0, 0.5)).collect();
        let mut f = SpectralField::from_coeffs(b, c).unwrap();
        f.project();
        f
    }

    #[test]
    fn identity_at_zero_and_semigroup_property() {
        let f = field();
        let s = Semigroup::heat(*f.basis());
        assert_eq!(s.apply(&f, 0.0).unwrap(), f);
        let a = s.apply(&s.apply(&f, 0.01).unwrap(), 0.02).unwrap();
        let b = s.apply(&f, 0.03).unwrap();
        assert!(a.distance(&b, 0.0) < 1e-15);
        assert!(s.apply(&f, -1.0).is_err());
    }

    #[test]
    fn operator_norm_uses_smallest_active_rate() {
        let f = field();
        let s = Semigroup::heat(*f.basis());
        let mu1 = (2.0 * std::f64::consts::PI).powi(2);
        assert!((s.operator_norm(0.1) - (-mu1 * 0.1).exp()).abs() < 1e-15);
        assert!(s.operator_norm(0.1) < 1.0);
    }
}
