//! CSV serialization of grid paths and second-level blocks.
//!
//! Paths: header `t,x_1,...,x_n`, one row per grid point. Blocks: header
//! `i,a,b,XX_ab` with the segment index `i` counted from 0 and channels `a, b`
//! from 1. Floats are written with Rust's shortest round-trip formatting, so
//! reading back reproduces every bit.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use super::{GridPath, RoughPathGrid};
use crate::{Error, Result};

pub fn write_path<W: Write>(path: &GridPath, mut out: W) -> Result<()> {
    let mut buf = String::from("t");
    for c in 1..=path.channels() {
        write!(buf, ",x_{c}").unwrap();
    }
    buf.push('\n');
    for i in 0..=path.steps() {
        write!(buf, "{:?}", path.time(i)).unwrap();
        for v in path.value(i) {
            write!(buf, ",{v:?}").unwrap();
        }
        buf.push('\n');
    }
    out.write_all(buf.as_bytes())?;
    Ok(())
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: bad number {s:?}")))
}

pub fn read_path<R: BufRead>(input: R) -> Result<GridPath> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty path file".into()))??;
    let channels = header.split(',').count().saturating_sub(1);
    if channels == 0 || !header.starts_with('t') {
        return Err(Error::Parse(format!("bad path header {header:?}")));
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != channels + 1 {
            return Err(Error::Parse(format!(
                "line {}: expected {} columns, found {}",
                k + 2,
                channels + 1,
                fields.len()
            )));
        }
        times.push(parse_f64(fields[0], k + 2)?);
        for f in &fields[1..] {
            values.push(parse_f64(f, k + 2)?);
        }
    }
    if times.len() < 2 || times[0] != 0.0 {
        return Err(Error::Parse("a path needs at least two rows starting at t = 0".into()));
    }
    let horizon = *times.last().unwrap();
    let path = GridPath::new(horizon, channels, values)?;
    for (i, &t) in times.iter().enumerate() {
        if (t - path.time(i)).abs() > 1e-9 * horizon {
            return Err(Error::Parse(format!("row {i}: time {t} is not on a uniform grid")));
        }
    }
    Ok(path)
}

pub fn write_levy<W: Write>(rough: &RoughPathGrid, mut out: W) -> Result<()> {
    let n = rough.channels();
    let mut buf = String::from("i,a,b,XX_ab\n");
    for i in 0..rough.steps() {
        let blk = rough.segment_block(i);
        for a in 0..n {
            for b in 0..n {
                writeln!(buf, "{i},{},{},{:?}", a + 1, b + 1, blk[a * n + b]).unwrap();
            }
        }
    }
    out.write_all(buf.as_bytes())?;
    Ok(())
}

/// Rebuild a rough path from its base path and a block file.
pub fn read_levy<R: BufRead>(base: GridPath, input: R) -> Result<RoughPathGrid> {
    let n = base.channels();
    let mut levy = vec![f64::NAN; base.steps() * n * n];
    for (k, line) in input.lines().enumerate().skip(1) {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(Error::Parse(format!("line {}: expected 4 columns", k + 1)));
        }
        let idx = |s: &str| -> Result<usize> {
            s.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad index {s:?}", k + 1)))
        };
        let (i, a, b) = (idx(f[0])?, idx(f[1])?, idx(f[2])?);
        if i >= base.steps() || a == 0 || b == 0 || a > n || b > n {
            return Err(Error::Parse(format!("line {}: index out of range", k + 1)));
        }
        levy[i * n * n + (a - 1) * n + (b - 1)] = parse_f64(f[3], k + 1)?;
    }
    if levy.iter().any(|v| v.is_nan()) {
        return Err(Error::Parse("block file does not cover every segment".into()));
    }
    let cap = base.hurst().unwrap_or(0.5);
    RoughPathGrid::from_parts(base, levy, cap)
}

#[cfg(test)]
mod tests {
    use super::super::lift_piecewise_linear;
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let p = GridPath::from_fn(0.7, 9, 2, |t| vec![(3.1 * t).sin() / 3.0, t.exp()]).unwrap();
        let mut buf = Vec::new();
        write_path(&p, &mut buf).unwrap();
        let q = read_path(buf.as_slice()).unwrap();
        assert_eq!(p.values(), q.values());
        assert_eq!(p.horizon(), q.horizon());

        let r = lift_piecewise_linear(&p);
        let mut buf = Vec::new();
        write_levy(&r, &mut buf).unwrap();
        let s = read_levy(q, buf.as_slice()).unwrap();
        assert_eq!(r.segment_blocks(), s.segment_blocks());
    }

    #[test]
    fn incomplete_block_file_is_rejected() {
        let p = GridPath::zeros(1.0, 2, 1).unwrap();
        let text = "i,a,b,XX_ab\n0,1,1,0.0\n";
        assert!(read_levy(p, text.as_bytes()).is_err());
    }
}
