//! Field CSV: header `k,re,im`, one row per retained wavenumber.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use super::{Basis, Complex64, SpectralField};
use crate::{Error, Result};

pub fn write_field<W: Write>(field: &SpectralField, mut out: W) -> Result<()> {
    let mut buf = String::from("k,re,im\n");
    for (i, c) in field.coeffs().iter().enumerate() {
        writeln!(buf, "{},{:?},{:?}", field.basis().wavenumber(i), c.re, c.im).unwrap();
    }
    out.write_all(buf.as_bytes())?;
    Ok(())
}

pub fn read_field<R: BufRead>(basis: Basis, input: R) -> Result<SpectralField> {
    let mut out = SpectralField::zeros(basis);
    for (n, line) in input.lines().enumerate().skip(1) {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        let bad = || Error::Parse(format!("line {}: {line:?}", n + 1));
        if f.len() != 3 {
            return Err(bad());
        }
        let k: i64 = f[0].parse().map_err(|_| bad())?;
        let re: f64 = f[1].parse().map_err(|_| bad())?;
        let im: f64 = f[2].parse().map_err(|_| bad())?;
        let idx = basis
            .index_of(k)
            .ok_or_else(|| Error::Parse(format!("line {}: wavenumber {k} not retained", n + 1)))?;
        out.coeffs_mut()[idx] = Complex64::new(re, im);
    }
    Ok(out)
}
