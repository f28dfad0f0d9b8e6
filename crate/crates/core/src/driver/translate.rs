use super::lift::RoughPathGrid;
use super::GridPath;
use crate::{Error, Result};

/// Cameron–Martin translation `T_h(X) = (X + h, XX + int h(x)dh + int h(x)dX + int X(x)dh)`.
///
/// The cross integrals are Young integrals (`gamma + gamma' > 1`). For `h`
/// piecewise linear on the grid of `X` each segment contributes
/// `1/2 dh(x)dX` and `1/2 dX(x)dh` exactly.
pub fn translate(
    rough: &RoughPathGrid,
    h: &GridPath,
    gamma: f64,
    gamma_prime: f64,
) -> Result<RoughPathGrid> {
    if gamma + gamma_prime <= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "translation needs gamma + gamma' > 1, got {gamma} + {gamma_prime}"
        )));
    }
    rough.base().check_same_grid(h)?;
    let n = rough.channels();
    let mut levy = rough.segment_blocks().to_vec();
    for i in 0..rough.steps() {
        let dx = rough.increment(i, i + 1);
        let dh = h.increment(i, i + 1);
        let blk = &mut levy[i * n * n..(i + 1) * n * n];
        for a in 0..n {
            for b in 0..n {
                blk[a * n + b] += 0.5 * (dh[a] * dh[b] + dh[a] * dx[b] + dx[a] * dh[b]);
            }
        }
    }
    let mut base = rough.base().added(h)?;
    if let Some(seed) = rough.base().seed() {
        base = base.with_seed(seed);
    }
    RoughPathGrid::from_parts(base, levy, rough.gamma_cap())
}

#[cfg(test)]
mod tests {
    use super::super::lift_piecewise_linear;
    use super::*;

    fn sample() -> (RoughPathGrid, GridPath) {
        let x = GridPath::from_fn(1.0, 12, 2, |t| vec![(9.0 * t).sin(), (5.0 * t).cos() * t])
            .unwrap();
        let h = GridPath::from_fn(1.0, 12, 2, |t| vec![t * t, -0.5 * t]).unwrap();
        (lift_piecewise_linear(&x), h)
    }

    #[test]
    fn zero_shift_is_identity() {
        let (r, _) = sample();
        let z = GridPath::zeros(1.0, 12, 2).unwrap();
        let t = translate(&r, &z, 0.4, 0.9).unwrap();
        assert_eq!(t.segment_blocks(), r.segment_blocks());
        assert_eq!(t.base().values(), r.base().values());
    }

    #[test]
    fn shift_of_zero_path_is_canonical_lift() {
        let (_, h) = sample();
        let zero = lift_piecewise_linear(&GridPath::zeros(1.0, 12, 2).unwrap());
        let t = translate(&zero, &h, 0.4, 0.9).unwrap();
        let l = lift_piecewise_linear(&h);
        for (a, b) in t.segment_blocks().iter().zip(l.segment_blocks()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn round_trip() {
        let (r, h) = sample();
        let back = translate(&translate(&r, &h, 0.4, 0.9).unwrap(), &h.scaled(-1.0), 0.4, 0.9).unwrap();
        for (a, b) in back.segment_blocks().iter().zip(r.segment_blocks()) {
            assert!((a - b).abs() <= 1e-10 * b.abs().max(1e-3));
        }
    }

    #[test]
    fn rejects_mismatch_and_young_violation() {
        let (r, _) = sample();
        let h = GridPath::zeros(1.0, 6, 2).unwrap();
        assert!(matches!(translate(&r, &h, 0.4, 0.9), Err(Error::GridMismatch(_))));
        let h = GridPath::zeros(1.0, 12, 2).unwrap();
        assert!(translate(&r, &h, 0.4, 0.5).is_err());
    }
}
