use proptest::prelude::*;
use rough_spde::driver::{control_value, greedy_partition, lift_piecewise_linear, translate, GridPath, RoughPathGrid};
use rough_spde::spectral::{Basis, SpectralField};

fn path_strategy(max_steps: usize, channels: usize) -> impl Strategy<Value = GridPath> {
    (2..=max_steps).prop_flat_map(move |steps| {
        prop::collection::vec(-1.0f64..1.0, steps * channels).prop_map(move |inc| {
            let mut v = vec![0.0; channels];
            for (i, d) in inc.iter().enumerate() {
                v.push(v[i] + d);
            }
            GridPath::new(1.0, channels, v).unwrap()
        })
    })
}

fn frob(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn area_defect(r: &RoughPathGrid, s: usize, u: usize, t: usize) -> f64 {
    let n = r.channels();
    let (a, b, c) = (r.second_level(s, t), r.second_level(s, u), r.second_level(u, t));
    let (d1, d2) = (r.increment(s, u), r.increment(u, t));
    let mut e = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            e = e.max((a[i * n + j] - b[i * n + j] - c[i * n + j] - d1[i] * d2[j]).abs());
        }
    }
    e / (1.0 + frob(&b) + frob(&c) + frob(&d1) * frob(&d2))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chen_relation(path in path_strategy(40, 2), a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0) {
        let r = lift_piecewise_linear(&path);
        let m = r.steps() as f64;
        let mut p = [(a * m) as usize, (b * m) as usize, (c * m) as usize];
        p.sort_unstable();
        prop_assert!(area_defect(&r, p[0], p[1], p[2]) <= 1e-13);
    }

    #[test]
    fn control_is_superadditive(path in path_strategy(24, 2), a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0) {
        let r = lift_piecewise_linear(&path);
        let m = r.steps() as f64;
        let mut p = [(a * m) as usize, (b * m) as usize, (c * m) as usize];
        p.sort_unstable();
        let w = |s, t| control_value(&r, 0.45, 0.15, s, t).unwrap();
        prop_assert!(w(p[0], p[1]) + w(p[1], p[2]) <= w(p[0], p[2]) * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn greedy_count_is_monotone(path in path_strategy(48, 1), k in 1.0f64..4.0) {
        let r = lift_piecewise_linear(&path);
        let q = 0.45 - 0.15;
        let floor = (0..r.steps())
            .map(|j| control_value(&r, 0.45, 0.15, j, j + 1).unwrap().powf(q))
            .fold(0.0, f64::max);
        let lo = greedy_partition(&r, 0.45, 0.15, floor * k, 0, r.steps()).unwrap();
        let hi = greedy_partition(&r, 0.45, 0.15, floor * k * 1.7, 0, r.steps()).unwrap();
        prop_assert!(hi.count <= lo.count);
        prop_assert_eq!(lo.points[0], 0);
        prop_assert_eq!(*lo.points.last().unwrap(), r.steps());
    }

    #[test]
    fn translations_compose(
        (x, h1, h2) in (2usize..24).prop_flat_map(|m| {
            let p = move || prop::collection::vec(-1.0f64..1.0, m).prop_map(|inc| {
                let mut v = vec![0.0];
                for (i, d) in inc.iter().enumerate() {
                    v.push(v[i] + d);
                }
                GridPath::new(1.0, 1, v).unwrap()
            });
            (p(), p(), p())
        })
    ) {
        let r = lift_piecewise_linear(&x);
        let once = translate(&translate(&r, &h1, 0.45, 0.9).unwrap(), &h2, 0.45, 0.9).unwrap();
        let both = translate(&r, &h1.added(&h2).unwrap(), 0.45, 0.9).unwrap();
        let m = r.steps();
        let diff: Vec<f64> = once.second_level(0, m).iter().zip(both.second_level(0, m)).map(|(a, b)| a - b).collect();
        prop_assert!(frob(&diff) <= 1e-12 * (1.0 + frob(&both.second_level(0, m))));
        prop_assert!(frob(&once.increment(0, m)) - frob(&both.increment(0, m)) <= 1e-12);
    }

    #[test]
    fn interpolation_inequality(
        re in prop::collection::vec(-1.0f64..1.0, 8),
        im in prop::collection::vec(-1.0f64..1.0, 8),
        a in -1.0f64..0.5,
        span in 0.1f64..2.0,
        theta in 0.0f64..1.0,
    ) {
        let b = Basis::periodic(1.0, 8, true).unwrap();
        let real: Vec<f64> = re.iter().zip(&im).flat_map(|(x, y)| [*x, *y]).collect();
        let f = SpectralField::from_real(b, &real).unwrap();
        let c = a + span;
        let mid = theta * a + (1.0 - theta) * c;
        let lhs = f.norm(mid);
        let rhs = f.norm(a).powf(theta) * f.norm(c).powf(1.0 - theta);
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }
}
