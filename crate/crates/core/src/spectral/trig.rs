use serde::{Deserialize, Serialize};

/// Real trigonometric polynomial
/// `mean + sum_j cos[j] cos(2 pi (j+1) x / l) + sin[j] sin(2 pi (j+1) x / l)`,
/// used for coefficient profiles such as `g(x)` or `V(x)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrigPoly {
    #[serde(default)]
    pub mean: f64,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl TrigPoly {
    pub fn constant(c: f64) -> Self {
        Self {
            mean: c,
            ..Self::default()
        }
    }

    pub fn eval(&self, x: f64, length: f64) -> f64 {
        let w = 2.0 * std::f64::consts::PI * x / length;
        let mut v = self.mean;
        for (j, c) in self.cos.iter().enumerate() {
            v += c * (w * (j + 1) as f64).cos();
        }
        for (j, s) in self.sin.iter().enumerate() {
            v += s * (w * (j + 1) as f64).sin();
        }
        v
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            mean: self.mean * c,
            cos: self.cos.iter().map(|v| v * c).collect(),
            sin: self.sin.iter().map(|v| v * c).collect(),
        }
    }

    /// `sup |p|` bounded by the sum of absolute coefficients.
    pub fn sup_bound(&self) -> f64 {
        self.mean.abs() + self.cos.iter().chain(&self.sin).map(|v| v.abs()).sum::<f64>()
    }

    pub fn is_zero(&self) -> bool {
        self.sup_bound() == 0.0
    }

    pub fn is_constant(&self) -> bool {
        self.cos.iter().chain(&self.sin).all(|v| *v == 0.0)
    }
}
