//! Controlled paths and the semigroup rough integral.
//!
//! The sewing germ on `[tau, tau']` is
//! `S_{t - tau} (sum_i Y^i_tau dX^i + sum_ij Y'^{ij}_tau XX^{ji})`, where
//! `Y'^{ij}` is the derivative of `Y^i` in the direction of channel `j`.

use std::fmt::Write as _;
use std::io::Write;

use crate::driver::RoughPathGrid;
use crate::par::{self, Execution};
use crate::spectral::{Semigroup, SpectralField};
use crate::{Error, Result};

/// `(Z, Z')` on grid points `start..=start + len - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlledPath {
    pub start: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub values: Vec<SpectralField>,
    /// `derivs[k][i]`: Gubinelli derivative in channel `i` at time `start + k`.
    pub derivs: Vec<Vec<SpectralField>>,
}

/// Components of the controlled-path norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DNorm {
    /// `sup |Z|_alpha`.
    pub sup: f64,
    /// `max(sup |Z'|_{alpha-gamma}, ||Z'||_{gamma, alpha-2gamma})`.
    pub deriv: f64,
    /// `max(||Z#||_{gamma, alpha-gamma}, ||Z#||_{2gamma, alpha-2gamma})`.
    pub remainder: f64,
    pub total: f64,
}

pub(crate) fn weights(field: &SpectralField, beta: f64) -> Vec<f64> {
    let b = field.basis();
    (0..b.len())
        .map(|i| (1.0 + b.eigenvalue(i)).powf(2.0 * beta))
        .collect()
}

pub(crate) fn weighted_norm(f: &SpectralField, w: &[f64]) -> f64 {
    f.coeffs()
        .iter()
        .zip(w)
        .map(|(c, w)| w * c.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

impl ControlledPath {
    pub fn new(
        start: usize,
        alpha: f64,
        gamma: f64,
        values: Vec<SpectralField>,
        derivs: Vec<Vec<SpectralField>>,
    ) -> Result<Self> {
        if values.is_empty() || values.len() != derivs.len() {
            return Err(Error::InvalidParameter(format!(
                "{} values and {} derivative rows",
                values.len(),
                derivs.len()
            )));
        }
        let n = derivs[0].len();
        if derivs.iter().any(|d| d.len() != n) {
            return Err(Error::InvalidParameter("ragged derivative rows".into()));
        }
        let basis = *values[0].basis();
        if values.iter().chain(derivs.iter().flatten()).any(|f| *f.basis() != basis) {
            return Err(Error::BasisMismatch);
        }
        Ok(Self {
            start,
            alpha,
            gamma,
            values,
            derivs,
        })
    }

    pub fn end(&self) -> usize {
        self.start + self.values.len() - 1
    }

    pub fn channels(&self) -> usize {
        self.derivs[0].len()
    }

    pub fn value_at(&self, i: usize) -> &SpectralField {
        &self.values[i - self.start]
    }

    pub fn deriv_at(&self, i: usize) -> &[SpectralField] {
        &self.derivs[i - self.start]
    }

    fn check_range(&self, s: usize, t: usize) -> Result<()> {
        if s < self.start || t > self.end() || s > t {
            return Err(Error::OffGrid {
                start: s,
                end: t,
                steps: self.end(),
            });
        }
        Ok(())
    }

    /// `Z#_{s,t} = dZ_{s,t} - sum_i Z'^i_s dX^i_{s,t}`.
    pub fn remainder(&self, rough: &RoughPathGrid, s: usize, t: usize) -> Result<SpectralField> {
        self.check_range(s, t)?;
        let dx = rough.increment(s, t);
        let mut r = self.value_at(t).sub(self.value_at(s));
        for (zp, d) in self.deriv_at(s).iter().zip(&dx) {
            r.axpy(-d, zp);
        }
        Ok(r)
    }

    /// The integrand `(Y, Y') = (Z, Z')` of `int S Z dX` for one channel.
    pub fn to_integrand(&self) -> Result<Integrand> {
        if self.channels() != 1 {
            return Err(Error::InvalidParameter(
                "a controlled path is a rough integrand only for a single channel".into(),
            ));
        }
        Ok(Integrand {
            start: self.start,
            alpha: self.alpha,
            gamma: self.gamma,
            values: self.values.iter().map(|v| vec![v.clone()]).collect(),
            derivs: self.derivs.clone(),
        })
    }
}

/// Norm of a controlled path over grid pairs in `[start, end]`.
pub fn dnorm(cp: &ControlledPath, rough: &RoughPathGrid, start: usize, end: usize) -> Result<DNorm> {
    dnorm_with(cp, rough, start, end, Execution::default())
}

pub fn dnorm_with(
    cp: &ControlledPath,
    rough: &RoughPathGrid,
    start: usize,
    end: usize,
    exec: Execution,
) -> Result<DNorm> {
    if start >= end {
        return Err(Error::EmptyInterval(start, end));
    }
    cp.check_range(start, end)?;
    rough.base().check_interval(start, end)?;
    let f0 = &cp.values[0];
    let w0 = weights(f0, cp.alpha);
    let w1 = weights(f0, cp.alpha - cp.gamma);
    let w2 = weights(f0, cp.alpha - 2.0 * cp.gamma);
    let (gamma, dt) = (cp.gamma, rough.dt());
    let rows = par::map_indexed(exec, end - start + 1, |k| {
        let s = start + k;
        let z = weighted_norm(cp.value_at(s), &w0);
        let zp: f64 = cp.deriv_at(s).iter().map(|d| weighted_norm(d, &w1)).sum();
        let (mut dzp, mut r1, mut r2) = (0.0f64, 0.0f64, 0.0f64);
        let zs = cp.value_at(s);
        let ds = cp.deriv_at(s);
        let mut x = vec![0.0; rough.channels()];
        for t in s + 1..=end {
            let len = (t - s) as f64 * dt;
            let inc = rough.increment(t - 1, t);
            x.iter_mut().zip(&inc).for_each(|(a, b)| *a += b);
            let mut r = cp.value_at(t).sub(zs);
            for (d, c) in ds.iter().zip(&x) {
                r.axpy(-c, d);
            }
            r1 = r1.max(weighted_norm(&r, &w1) / len.powf(gamma));
            r2 = r2.max(weighted_norm(&r, &w2) / len.powf(2.0 * gamma));
            let diff: f64 = cp
                .deriv_at(t)
                .iter()
                .zip(ds)
                .map(|(a, b)| weighted_norm(&a.sub(b), &w2))
                .sum();
            dzp = dzp.max(diff / len.powf(gamma));
        }
        [z, zp, dzp, r1, r2]
    });
    let m = rows.into_iter().fold([0.0f64; 5], |mut acc, r| {
        for (a, b) in acc.iter_mut().zip(r) {
            *a = a.max(b);
        }
        acc
    });
    let sup = m[0];
    let deriv = m[1].max(m[2]);
    let remainder = m[3].max(m[4]);
    Ok(DNorm {
        sup,
        deriv,
        remainder,
        total: sup + deriv + remainder,
    })
}

/// Rough integrand `(Y, Y')` with `n` channels on grid points
/// `start..=start + len - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Integrand {
    pub start: usize,
    /// Scale used when reporting defects: norms in `B_{alpha - i gamma}`.
    pub alpha: f64,
    pub gamma: f64,
    /// `values[k][i]`.
    pub values: Vec<Vec<SpectralField>>,
    /// `derivs[k][i * n + j]`.
    pub derivs: Vec<Vec<SpectralField>>,
}

impl Integrand {
    pub fn channels(&self) -> usize {
        self.values[0].len()
    }

    pub fn end(&self) -> usize {
        self.start + self.values.len() - 1
    }

    /// Constant integrand `Y^i = y^i`, `Y' = 0` on `start..=end`.
    pub fn constant(start: usize, end: usize, alpha: f64, gamma: f64, y: Vec<SpectralField>) -> Self {
        let n = y.len();
        let zero = SpectralField::zeros(*y[0].basis());
        Self {
            start,
            alpha,
            gamma,
            values: vec![y; end - start + 1],
            derivs: vec![vec![zero; n * n]; end - start + 1],
        }
    }

    /// The germ before the semigroup is applied, on `[a, b]`.
    pub fn local(&self, rough: &RoughPathGrid, a: usize, b: usize) -> SpectralField {
        let n = self.channels();
        let dx = rough.increment(a, b);
        let area = rough.second_level(a, b);
        self.local_with(a, &dx, &area, n)
    }

    fn local_with(&self, a: usize, dx: &[f64], area: &[f64], n: usize) -> SpectralField {
        let k = a - self.start;
        let mut out = SpectralField::zeros(*self.values[k][0].basis());
        for i in 0..n {
            out.axpy(dx[i], &self.values[k][i]);
            for j in 0..n {
                out.axpy(area[j * n + i], &self.derivs[k][i * n + j]);
            }
        }
        out
    }

    fn check(&self, rough: &RoughPathGrid, s: usize, t: usize) -> Result<()> {
        rough.base().check_interval(s, t)?;
        if s < self.start || t > self.end() {
            return Err(Error::OffGrid {
                start: s,
                end: t,
                steps: self.end(),
            });
        }
        if rough.channels() != self.channels() {
            return Err(Error::GridMismatch(format!(
                "{} driver channels for a {}-channel integrand",
                rough.channels(),
                self.channels()
            )));
        }
        Ok(())
    }
}

fn add_scaled_by_semigroup(acc: &mut SpectralField, f: &SpectralField, factors: &[f64]) {
    acc.coeffs_mut()
        .iter_mut()
        .zip(f.coeffs())
        .zip(factors)
        .for_each(|((a, b), s)| *a += b * *s);
}

/// Full-resolution sum `sum_j S_{t - t_j} Xi_{t_j, t_{j+1}}` over `[s, t]`,
/// evaluated term by term.
pub fn rough_sum(
    integrand: &Integrand,
    rough: &RoughPathGrid,
    semigroup: &Semigroup,
    s: usize,
    t: usize,
) -> Result<SpectralField> {
    integrand.check(rough, s, t)?;
    let n = integrand.channels();
    let mut acc = SpectralField::zeros(*semigroup.basis());
    for j in s..t {
        let dx = rough.increment(j, j + 1);
        let xi = integrand.local_with(j, &dx, rough.segment_block(j), n);
        let f = semigroup.factors((t - j) as f64 * rough.dt())?;
        add_scaled_by_semigroup(&mut acc, &xi, &f);
    }
    Ok(acc)
}

/// Result of a dyadic sewing evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct Sewing {
    /// `Gamma^levels_{s,t}`.
    pub integral: SpectralField,
    /// `defects[m][i] = |Gamma^{m+1} - Gamma^m|_{alpha - i gamma}`.
    pub defects: Vec<[f64; 3]>,
}

fn dyadic_sum(
    integrand: &Integrand,
    rough: &RoughPathGrid,
    semigroup: &Semigroup,
    s: usize,
    t: usize,
    level: usize,
) -> Result<SpectralField> {
    let n = integrand.channels();
    let step = (t - s) >> level;
    let mut acc = SpectralField::zeros(*semigroup.basis());
    for k in 0..1usize << level {
        let a = s + k * step;
        let b = a + step;
        let dx = rough.increment(a, b);
        let area = rough.second_level(a, b);
        let xi = integrand.local_with(a, &dx, &area, n);
        let f = semigroup.factors((t - a) as f64 * rough.dt())?;
        add_scaled_by_semigroup(&mut acc, &xi, &f);
    }
    Ok(acc)
}

/// Dyadic sewing `Gamma^m_{s,t} = sum_{n < 2^m} S_{t - tau_n} Xi_{tau_n, tau_{n+1}}`
/// up to depth `levels`, with the level-to-level defects.
pub fn sewing_integral(
    integrand: &Integrand,
    rough: &RoughPathGrid,
    semigroup: &Semigroup,
    s: usize,
    t: usize,
    levels: usize,
) -> Result<Sewing> {
    integrand.check(rough, s, t)?;
    let len = t - s;
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::NotDyadic(len));
    }
    let available = len.trailing_zeros() as usize;
    if levels > available {
        return Err(Error::InsufficientResolution { levels, available });
    }
    let sums = par::try_map_indexed(Execution::default(), levels + 1, |m| {
        dyadic_sum(integrand, rough, semigroup, s, t, m)
    })?;
    let w: Vec<Vec<f64>> = (0..3)
        .map(|i| weights(&sums[0], integrand.alpha - i as f64 * integrand.gamma))
        .collect();
    let defects = sums
        .windows(2)
        .map(|p| {
            let d = p[1].sub(&p[0]);
            [
                weighted_norm(&d, &w[0]),
                weighted_norm(&d, &w[1]),
                weighted_norm(&d, &w[2]),
            ]
        })
        .collect();
    Ok(Sewing {
        integral: sums.into_iter().last().unwrap(),
        defects,
    })
}

/// `|int_s^t - S_{t-s} Xi_{s,t}|_{alpha - i gamma}` for `i = 0, 1, 2`, with the
/// integral at full grid resolution.
pub fn local_expansion_defect(
    integrand: &Integrand,
    rough: &RoughPathGrid,
    semigroup: &Semigroup,
    s: usize,
    t: usize,
) -> Result<[f64; 3]> {
    integrand.check(rough, s, t)?;
    if s == t {
        return Ok([0.0; 3]);
    }
    let full = rough_sum(integrand, rough, semigroup, s, t)?;
    let one = semigroup.apply(&integrand.local(rough, s, t), (t - s) as f64 * rough.dt())?;
    let d = full.sub(&one);
    let mut out = [0.0; 3];
    for (i, o) in out.iter_mut().enumerate() {
        *o = d.norm(integrand.alpha - i as f64 * integrand.gamma);
    }
    Ok(out)
}

/// Defect trace CSV: `m,defect_i0,defect_i1,defect_i2`.
pub fn write_defects<W: Write>(defects: &[[f64; 3]], mut out: W) -> Result<()> {
    let mut buf = String::from("m,defect_i0,defect_i1,defect_i2\n");
    for (m, d) in defects.iter().enumerate() {
        writeln!(buf, "{m},{:?},{:?},{:?}", d[0], d[1], d[2]).unwrap();
    }
    out.write_all(buf.as_bytes())?;
    Ok(())
}
