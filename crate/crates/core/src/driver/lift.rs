use super::GridPath;
use crate::par::{self, Execution};
use crate::{Error, Result};

/// A discrete rough path: grid values plus one second-level block per grid
/// segment. Blocks over longer intervals are obtained by Chen composition
/// `XX_{s,t} = XX_{s,u} + XX_{u,t} + dX_{s,u} (x) dX_{u,t}`.
#[derive(Clone, Debug, PartialEq)]
pub struct RoughPathGrid {
    base: GridPath,
    /// `steps` blocks of `n x n`, row-major; entry `(a, b)` approximates
    /// `int dX^a dX^b` over the segment.
    levy: Vec<f64>,
    gamma_cap: f64,
}

/// Canonical lift of the piecewise-linear interpolant: on each segment the
/// second level is `1/2 dX (x) dX`.
pub fn lift_piecewise_linear(path: &GridPath) -> RoughPathGrid {
    let n = path.channels();
    let mut levy = Vec::with_capacity(path.steps() * n * n);
    for i in 0..path.steps() {
        let d = path.increment(i, i + 1);
        for a in 0..n {
            for b in 0..n {
                levy.push(0.5 * d[a] * d[b]);
            }
        }
    }
    RoughPathGrid {
        gamma_cap: path.hurst().unwrap_or(0.5),
        base: path.clone(),
        levy,
    }
}

impl RoughPathGrid {
    /// Assemble from explicit segment blocks (`steps * n * n` values).
    pub fn from_parts(base: GridPath, levy: Vec<f64>, gamma_cap: f64) -> Result<Self> {
        let n = base.channels();
        if levy.len() != base.steps() * n * n {
            return Err(Error::GridMismatch(format!(
                "{} second-level values for {} segments of {n}x{n} blocks",
                levy.len(),
                base.steps()
            )));
        }
        if levy.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite second-level value".into()));
        }
        Ok(Self {
            base,
            levy,
            gamma_cap,
        })
    }

    pub fn base(&self) -> &GridPath {
        &self.base
    }

    pub fn gamma_cap(&self) -> f64 {
        self.gamma_cap
    }

    pub fn steps(&self) -> usize {
        self.base.steps()
    }

    pub fn channels(&self) -> usize {
        self.base.channels()
    }

    pub fn dt(&self) -> f64 {
        self.base.dt()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.base.time(i)
    }

    pub fn increment(&self, s: usize, t: usize) -> Vec<f64> {
        self.base.increment(s, t)
    }

    /// Second-level block of grid segment `[t_i, t_{i+1}]`.
    pub fn segment_block(&self, i: usize) -> &[f64] {
        let nn = self.channels() * self.channels();
        &self.levy[i * nn..(i + 1) * nn]
    }

    pub fn segment_blocks(&self) -> &[f64] {
        &self.levy
    }

    /// `XX_{s,t}` by left-to-right Chen composition; zero for `s == t`.
    pub fn second_level(&self, s: usize, t: usize) -> Vec<f64> {
        let n = self.channels();
        let mut area = vec![0.0; n * n];
        let mut dx = vec![0.0; n];
        for i in s..t {
            let d = self.base.increment(i, i + 1);
            let blk = self.segment_block(i);
            for a in 0..n {
                for b in 0..n {
                    area[a * n + b] += blk[a * n + b] + dx[a] * d[b];
                }
            }
            for a in 0..n {
                dx[a] += d[a];
            }
        }
        area
    }

    /// Sub-path on grid points `start..=end`, re-based at time zero.
    pub fn window(&self, start: usize, end: usize) -> Result<Self> {
        let base = self.base.window(start, end)?;
        let nn = self.channels() * self.channels();
        Ok(Self {
            base,
            levy: self.levy[start * nn..end * nn].to_vec(),
            gamma_cap: self.gamma_cap,
        })
    }

    /// Visit `(t, dX_{s,t}, XX_{s,t})` for `t = s+1..=end`, extending one
    /// segment at a time.
    pub fn for_each_right<F>(&self, s: usize, end: usize, mut f: F)
    where
        F: FnMut(usize, &[f64], &[f64]),
    {
        let n = self.channels();
        let mut dx = vec![0.0; n];
        let mut area = vec![0.0; n * n];
        for t in s..end {
            let d = self.base.increment(t, t + 1);
            let blk = self.segment_block(t);
            for a in 0..n {
                for b in 0..n {
                    area[a * n + b] += blk[a * n + b] + dx[a] * d[b];
                }
            }
            for a in 0..n {
                dx[a] += d[a];
            }
            f(t + 1, &dx, &area);
        }
    }

    /// Visit `(s, dX_{s,t}, XX_{s,t})` for `s = t-1` down to `start`, extending
    /// one segment to the left at a time.
    pub fn for_each_left<F>(&self, start: usize, t: usize, mut f: F)
    where
        F: FnMut(usize, &[f64], &[f64]),
    {
        let n = self.channels();
        let mut dx = vec![0.0; n];
        let mut area = vec![0.0; n * n];
        for s in (start..t).rev() {
            let d = self.base.increment(s, s + 1);
            let blk = self.segment_block(s);
            for a in 0..n {
                for b in 0..n {
                    area[a * n + b] += blk[a * n + b] + d[a] * dx[b];
                }
            }
            for a in 0..n {
                dx[a] += d[a];
            }
            f(s, &dx, &area);
        }
    }
}

pub(crate) fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Hölder seminorms of both levels over grid pairs in an interval, and
/// `rho = 1 + |X|_gamma + |XX|_{2 gamma}`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct HoelderNorms {
    pub path: f64,
    pub area: f64,
    pub rho: f64,
}

/// Exact suprema over all grid pairs `s < t` in `[start, end]` (Euclidean norm
/// on `dX`, Frobenius norm on `XX`).
pub fn hoelder_norms(
    rough: &RoughPathGrid,
    gamma: f64,
    start: usize,
    end: usize,
) -> Result<HoelderNorms> {
    hoelder_norms_with(rough, gamma, start, end, Execution::default())
}

pub fn hoelder_norms_with(
    rough: &RoughPathGrid,
    gamma: f64,
    start: usize,
    end: usize,
    exec: Execution,
) -> Result<HoelderNorms> {
    rough.base().check_interval(start, end)?;
    if start >= end {
        return Err(Error::EmptyInterval(start, end));
    }
    let dt = rough.dt();
    let per_start = par::map_indexed(exec, end - start, |k| {
        let s = start + k;
        let mut best = (0.0f64, 0.0f64);
        rough.for_each_right(s, end, |t, dx, area| {
            let len = (t - s) as f64 * dt;
            best.0 = best.0.max(euclid(dx) / len.powf(gamma));
            best.1 = best.1.max(euclid(area) / len.powf(2.0 * gamma));
        });
        best
    });
    let (path, area) = per_start
        .into_iter()
        .fold((0.0f64, 0.0f64), |acc, b| (acc.0.max(b.0), acc.1.max(b.1)));
    Ok(HoelderNorms {
        path,
        area,
        rho: 1.0 + path + area,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_segment_scalar() {
        let p = GridPath::new(1.0, 1, vec![0.0, 0.3]).unwrap();
        let r = lift_piecewise_linear(&p);
        assert!((r.second_level(0, 1)[0] - 0.045).abs() < 1e-15);
    }

    #[test]
    fn scalar_area_is_symmetric() {
        let p = GridPath::from_fn(1.0, 8, 1, |t| vec![(7.0 * t).sin()]).unwrap();
        let r = lift_piecewise_linear(&p);
        for s in 0..8 {
            for t in s..=8 {
                let d = r.increment(s, t)[0];
                assert!((r.second_level(s, t)[0] - 0.5 * d * d).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn left_and_right_scans_agree() {
        let p = GridPath::from_fn(1.0, 6, 2, |t| vec![(5.0 * t).sin(), t * t]).unwrap();
        let r = lift_piecewise_linear(&p);
        let mut right = Vec::new();
        r.for_each_right(1, 6, |t, _, a| right.push((t, a.to_vec())));
        let mut left = Vec::new();
        r.for_each_left(1, 6, |s, _, a| left.push((s, a.to_vec())));
        let xx16 = r.second_level(1, 6);
        assert_eq!(right.last().unwrap().1.len(), 4);
        for k in 0..4 {
            assert!((right.last().unwrap().1[k] - xx16[k]).abs() < 1e-14);
            assert!((left.last().unwrap().1[k] - xx16[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_path_has_zero_norms() {
        let p = GridPath::new(1.0, 1, vec![2.0; 9]).unwrap();
        let h = hoelder_norms(&lift_piecewise_linear(&p), 0.4, 0, 8).unwrap();
        assert_eq!((h.path, h.area, h.rho), (0.0, 0.0, 1.0));
    }

    #[test]
    fn linear_path_attains_speed() {
        let v = -1.7;
        let p = GridPath::from_fn(1.0, 16, 1, |t| vec![v * t]).unwrap();
        let h = hoelder_norms(&lift_piecewise_linear(&p), 0.4, 0, 16).unwrap();
        // |v| (t-s)^{1-gamma} is maximal on the full interval.
        assert!((h.path - v.abs()).abs() < 1e-12);
    }

    #[test]
    fn empty_interval_is_rejected() {
        let p = GridPath::zeros(1.0, 4, 1).unwrap();
        let r = lift_piecewise_linear(&p);
        assert!(matches!(hoelder_norms(&r, 0.4, 2, 2), Err(Error::EmptyInterval(2, 2))));
        assert!(matches!(hoelder_norms(&r, 0.4, 2, 9), Err(Error::OffGrid { .. })));
    }
}
