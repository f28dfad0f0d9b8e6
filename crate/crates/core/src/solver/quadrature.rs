//! Exponential trapezoid weights.
//!
//! For a mode with rate `r` and step `h`,
//! `int_0^h e^{-r (h - s)} f(s) ds = h [psi(rh) f(0) + (phi1(rh) - psi(rh)) f(h)]`
//! exactly when `f` is linear on the step.

/// `phi1(z) = (1 - e^{-z}) / z`.
pub fn phi1(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0
    } else {
        -(-z).exp_m1() / z
    }
}

/// `psi(z) = (1 - (1 + z) e^{-z}) / z^2`.
pub fn psi(z: f64) -> f64 {
    if z.abs() < 0.1 {
        // sum_n (-z)^n / (n! (n + 2))
        let mut term = 1.0;
        let mut sum = 0.5;
        for n in 1..20 {
            term *= -z / n as f64;
            sum += term / (n + 2) as f64;
        }
        sum
    } else {
        (1.0 - (1.0 + z) * (-z).exp()) / (z * z)
    }
}

/// Per-mode factors of one uniform step: `e^{-rh}` and the weights of the
/// left and right drift values.
#[derive(Clone, Debug, PartialEq)]
pub struct StepWeights {
    pub decay: Vec<f64>,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl StepWeights {
    pub fn new(rates: &[f64], h: f64) -> Self {
        let mut decay = Vec::with_capacity(rates.len());
        let mut left = Vec::with_capacity(rates.len());
        let mut right = Vec::with_capacity(rates.len());
        for &r in rates {
            let z = r * h;
            decay.push((-z).exp());
            let p = psi(z);
            left.push(h * p);
            right.push(h * (phi1(z) - p));
        }
        Self { decay, left, right }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_and_closed_forms_agree() {
        for &z in &[0.09f64, 0.11, 0.5, 3.0] {
            let closed = (1.0 - (1.0 + z) * (-z).exp()) / (z * z);
            assert!((psi(z) - closed).abs() < 1e-9, "{z}");
            assert!((phi1(z) - (1.0 - (-z).exp()) / z).abs() < 1e-12);
        }
        assert!((psi(0.0) - 0.5).abs() < 1e-16);
        assert!((psi(1e-5) - (0.5 - 1e-5 / 3.0)).abs() < 1e-10);
        assert_eq!(phi1(0.0), 1.0);
    }

    #[test]
    fn exact_on_linear_integrands() {
        let (r, h) = (3.7, 0.2);
        let w = StepWeights::new(&[r], h);
        let (a, b) = (1.3, -0.4);
        // Midpoint rule on a fine grid.
        let n = 200_000;
        let ds = h / n as f64;
        let exact: f64 = (0..n)
            .map(|i| {
                let s = (i as f64 + 0.5) * ds;
                (-r * (h - s)).exp() * (a + (b - a) * s / h) * ds
            })
            .sum();
        assert!((w.left[0] * a + w.right[0] * b - exact).abs() < 1e-10);
    }
}
