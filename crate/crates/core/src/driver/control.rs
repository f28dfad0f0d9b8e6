use super::lift::{euclid, RoughPathGrid};
use super::GridPath;
use crate::{Error, Result};

fn check_exponents(gamma: f64, eta1: f64) -> Result<()> {
    if !(eta1 >= 0.0 && eta1 < gamma) {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= eta1 < gamma, got eta1 = {eta1}, gamma = {gamma}"
        )));
    }
    Ok(())
}

/// Cost of one partition interval of length `len` in the control functional.
fn rough_cost(len: f64, dx: &[f64], area: &[f64], gamma: f64, eta1: f64) -> f64 {
    let p = 1.0 / (gamma - eta1);
    len.powf(-eta1 * p) * (euclid(dx).powf(p) + euclid(area).powf(0.5 * p))
}

/// Incremental evaluation of `W(start, j)` for `j = start+1, start+2, ...`.
///
/// `best[j - start]` is the supremum over grid partitions of `[start, j]`,
/// obtained by maximizing over the last breakpoint.
#[derive(Debug)]
pub struct ControlScan<'a> {
    rough: &'a RoughPathGrid,
    gamma: f64,
    eta1: f64,
    start: usize,
    best: Vec<f64>,
}

impl<'a> ControlScan<'a> {
    pub fn new(rough: &'a RoughPathGrid, gamma: f64, eta1: f64, start: usize) -> Result<Self> {
        check_exponents(gamma, eta1)?;
        rough.base().check_interval(start, start)?;
        Ok(Self {
            rough,
            gamma,
            eta1,
            start,
            best: vec![0.0],
        })
    }

    /// Grid index of the last evaluated endpoint.
    pub fn end(&self) -> usize {
        self.start + self.best.len() - 1
    }

    /// Current value `W(start, end)`.
    pub fn value(&self) -> f64 {
        *self.best.last().unwrap()
    }

    /// Extend by one grid step and return the new `W(start, end)`, or `None`
    /// at the end of the grid.
    pub fn advance(&mut self) -> Option<f64> {
        let j = self.end() + 1;
        if j > self.rough.steps() {
            return None;
        }
        let dt = self.rough.dt();
        let mut w = 0.0f64;
        let (start, gamma, eta1) = (self.start, self.gamma, self.eta1);
        let best = &self.best;
        self.rough.for_each_left(start, j, |i, dx, area| {
            let len = (j - i) as f64 * dt;
            w = w.max(best[i - start] + rough_cost(len, dx, area, gamma, eta1));
        });
        self.best.push(w);
        Some(w)
    }
}

/// `W_{X,gamma,eta1}(s, t)`: supremum over grid partitions `s = k_0 < ... < k_r = t`
/// of `sum (dk)^{-eta1/(gamma-eta1)} [|dX|^{1/(gamma-eta1)} + |XX|^{1/(2(gamma-eta1))}]`.
pub fn control_value(
    rough: &RoughPathGrid,
    gamma: f64,
    eta1: f64,
    s: usize,
    t: usize,
) -> Result<f64> {
    check_exponents(gamma, eta1)?;
    rough.base().check_interval(s, t)?;
    let mut scan = ControlScan::new(rough, gamma, eta1, s)?;
    while scan.end() < t {
        scan.advance();
    }
    Ok(scan.value())
}

/// Greedy points `tau_0 < ... < tau_N` on a grid interval.
#[derive(Clone, Debug, PartialEq)]
pub struct GreedyPartition {
    /// Grid indices of the greedy points.
    pub points: Vec<usize>,
    pub chi: f64,
    pub eta1: f64,
    /// Number of greedy intervals.
    pub count: usize,
}

impl GreedyPartition {
    pub fn times(&self, rough: &RoughPathGrid) -> Vec<f64> {
        self.points.iter().map(|&i| rough.time(i)).collect()
    }
}

/// `tau_{n+1}` is the largest grid point with `W(tau_n, tau_{n+1})^{gamma-eta1} <= chi`.
pub fn greedy_partition(
    rough: &RoughPathGrid,
    gamma: f64,
    eta1: f64,
    chi: f64,
    start: usize,
    end: usize,
) -> Result<GreedyPartition> {
    check_exponents(gamma, eta1)?;
    if !(chi > 0.0) {
        return Err(Error::InvalidParameter(format!("chi must be positive, got {chi}")));
    }
    rough.base().check_interval(start, end)?;
    if start == end {
        return Err(Error::EmptyInterval(start, end));
    }
    let q = gamma - eta1;
    let mut points = vec![start];
    let mut tau = start;
    while tau < end {
        let mut scan = ControlScan::new(rough, gamma, eta1, tau)?;
        let first = scan.advance().expect("tau < end");
        if first.powf(q) > chi {
            return Err(Error::ThresholdTooSmall {
                step: tau,
                value: first.powf(q),
                chi,
            });
        }
        while scan.end() < end {
            let w = scan.advance().expect("end inside grid");
            if w.powf(q) > chi {
                break;
            }
        }
        let next = if scan.value().powf(q) > chi {
            scan.end() - 1
        } else {
            scan.end()
        };
        points.push(next);
        tau = next;
    }
    let count = points.len() - 1;
    Ok(GreedyPartition {
        points,
        chi,
        eta1,
        count,
    })
}

/// Variation functional of a (Cameron–Martin) path `h` over `[0, T]`: the
/// grid-partition supremum of `sum (dk)^{-eta1/(gamma'-eta1)} |dh|^{1/(gamma'-eta1)}`.
pub fn cm_variation(h: &GridPath, gamma_prime: f64, eta1: f64) -> Result<f64> {
    check_exponents(gamma_prime, eta1)?;
    let p = 1.0 / (gamma_prime - eta1);
    let m = h.steps();
    let dt = h.dt();
    let mut best = vec![0.0f64; m + 1];
    for j in 1..=m {
        let hj = h.value(j);
        let mut w = 0.0f64;
        for i in 0..j {
            let d: f64 = h
                .value(i)
                .iter()
                .zip(hj)
                .map(|(a, b)| (b - a) * (b - a))
                .sum::<f64>()
                .sqrt();
            let len = (j - i) as f64 * dt;
            w = w.max(best[i] + len.powf(-eta1 * p) * d.powf(p));
        }
        best[j] = w;
    }
    Ok(best[m])
}

#[cfg(test)]
mod tests {
    use super::super::lift_piecewise_linear;
    use super::*;
    use crate::rng::stream_rng;
    use rand_distr::{Distribution, StandardNormal};

    fn random_rough(seed: u64, steps: usize, channels: usize) -> RoughPathGrid {
        let mut rng = stream_rng(seed, 0, 0);
        let mut values = vec![0.0; channels];
        for i in 1..=steps {
            for c in 0..channels {
                let prev = values[(i - 1) * channels + c];
                let z: f64 = StandardNormal.sample(&mut rng);
                values.push(prev + z * 0.2);
            }
        }
        lift_piecewise_linear(&GridPath::new(1.0, channels, values).unwrap())
    }

    fn brute(rough: &RoughPathGrid, gamma: f64, eta1: f64, s: usize, t: usize) -> f64 {
        let inner = t - s - 1;
        let mut best = 0.0f64;
        for mask in 0u32..(1 << inner) {
            let mut pts = vec![s];
            pts.extend((0..inner).filter(|b| mask >> b & 1 == 1).map(|b| s + 1 + b));
            pts.push(t);
            let total: f64 = pts
                .windows(2)
                .map(|w| {
                    let len = (w[1] - w[0]) as f64 * rough.dt();
                    rough_cost(len, &rough.increment(w[0], w[1]), &rough.second_level(w[0], w[1]), gamma, eta1)
                })
                .sum();
            best = best.max(total);
        }
        best
    }

    #[test]
    fn zero_on_degenerate_interval() {
        let r = random_rough(1, 8, 2);
        assert_eq!(control_value(&r, 0.4, 0.1, 3, 3).unwrap(), 0.0);
    }

    #[test]
    fn dp_matches_exhaustive_search() {
        for seed in 0..10 {
            let r = random_rough(seed, 9, 2);
            let dp = control_value(&r, 0.45, 0.15, 0, 9).unwrap();
            let bf = brute(&r, 0.45, 0.15, 0, 9);
            assert!((dp - bf).abs() <= 1e-12 * bf.max(1.0), "{dp} vs {bf}");
        }
    }

    #[test]
    fn rejects_bad_exponents() {
        let r = random_rough(2, 4, 1);
        assert!(control_value(&r, 0.4, 0.4, 0, 4).is_err());
        assert!(control_value(&r, 0.4, 0.1, 0, 5).is_err());
    }

    #[test]
    fn greedy_large_chi_is_one_interval() {
        let r = random_rough(3, 16, 1);
        let w = control_value(&r, 0.4, 0.1, 0, 16).unwrap();
        let g = greedy_partition(&r, 0.4, 0.1, w.powf(0.3) * 1.001, 0, 16).unwrap();
        assert_eq!(g.points, vec![0, 16]);
        assert_eq!(g.count, 1);
    }

    #[test]
    fn greedy_points_are_maximal() {
        let r = random_rough(4, 15, 2);
        let (gamma, eta1, chi) = (0.4, 0.1, 0.9);
        let g = greedy_partition(&r, gamma, eta1, chi, 0, 15).unwrap();
        for w in g.points.windows(2) {
            let v = control_value(&r, gamma, eta1, w[0], w[1]).unwrap();
            assert!(v.powf(gamma - eta1) <= chi);
            if w[1] < 15 {
                let over = control_value(&r, gamma, eta1, w[0], w[1] + 1).unwrap();
                assert!(over.powf(gamma - eta1) > chi);
            }
        }
    }

    #[test]
    fn tiny_chi_reports_the_step() {
        let r = random_rough(5, 8, 1);
        match greedy_partition(&r, 0.4, 0.1, 1e-9, 0, 8) {
            Err(Error::ThresholdTooSmall { step: 0, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cm_variation_of_zero_path() {
        let h = GridPath::zeros(1.0, 8, 2).unwrap();
        assert_eq!(cm_variation(&h, 0.9, 0.2).unwrap(), 0.0);
        assert!(cm_variation(&h, 0.2, 0.2).is_err());
    }
}
