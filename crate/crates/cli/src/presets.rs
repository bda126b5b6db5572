//! Built-in analytic load fields.

use micromorph::tensor::{Mat3, Vec3};
use std::f64::consts::PI;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetKind {
    Zero,
    Constant,
    /// `Π sin(π ξ_i)` on the normalized box.
    Trig,
    /// `64 Π ξ_i (1 − ξ_i)` on the normalized box.
    Poly,
}

impl FromStr for PresetKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "zero" => Ok(Self::Zero),
            "constant" => Ok(Self::Constant),
            "trig" => Ok(Self::Trig),
            "poly" => Ok(Self::Poly),
            other => Err(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preset {
    pub kind: PresetKind,
    pub amplitude: f64,
}

const VECTOR_DIRECTION: Vec3 = [1.0, -0.5, 0.75];
const TENSOR_PATTERN: [[f64; 3]; 3] = [[1.0, 0.5, 0.0], [-0.5, 1.0, 0.25], [0.0, -0.25, 1.0]];

impl Preset {
    pub fn zero() -> Self {
        Self { kind: PresetKind::Zero, amplitude: 0.0 }
    }

    pub fn is_zero(&self) -> bool {
        self.kind == PresetKind::Zero || self.amplitude == 0.0
    }

    /// Scalar profile on the box `[lo, hi]`.
    pub fn profile(&self, x: Vec3, lo: Vec3, hi: Vec3) -> f64 {
        let xi: Vec3 = std::array::from_fn(|i| (x[i] - lo[i]) / (hi[i] - lo[i]));
        let shape = match self.kind {
            PresetKind::Zero => return 0.0,
            PresetKind::Constant => 1.0,
            PresetKind::Trig => xi.iter().map(|s| (PI * s).sin()).product(),
            PresetKind::Poly => xi.iter().map(|s| 4.0 * s * (1.0 - s)).product(),
        };
        self.amplitude * shape
    }

    pub fn vector(&self, x: Vec3, lo: Vec3, hi: Vec3) -> Vec3 {
        let s = self.profile(x, lo, hi);
        VECTOR_DIRECTION.map(|d| d * s)
    }

    pub fn tensor(&self, x: Vec3, lo: Vec3, hi: Vec3) -> Mat3 {
        Mat3(TENSOR_PATTERN) * self.profile(x, lo, hi)
    }
}

/// Largest `|Div σ⁰ + f|` over interior sample points by central differences,
/// relative to `1 + max|σ⁰|/L + max|f|`.
pub fn balance_defect(sigma0: &Preset, force: &Preset, lo: Vec3, hi: Vec3) -> f64 {
    let size: Vec3 = std::array::from_fn(|i| hi[i] - lo[i]);
    let h = 1e-4 * size.iter().cloned().fold(f64::INFINITY, f64::min);
    let samples = 5;
    let mut worst = 0.0_f64;
    let mut scale = 0.0_f64;
    for a in 1..samples {
        for b in 1..samples {
            for c in 1..samples {
                let t = [a, b, c].map(|k| k as f64 / samples as f64);
                let x: Vec3 = std::array::from_fn(|i| lo[i] + t[i] * size[i]);
                let f = force.vector(x, lo, hi);
                let s = sigma0.tensor(x, lo, hi);
                for i in 0..3 {
                    let mut div = 0.0;
                    for j in 0..3 {
                        let mut xp = x;
                        let mut xm = x;
                        xp[j] += h;
                        xm[j] -= h;
                        div += (sigma0.tensor(xp, lo, hi).0[i][j] - sigma0.tensor(xm, lo, hi).0[i][j]) / (2.0 * h);
                    }
                    worst = worst.max((div + f[i]).abs());
                    scale = scale.max(f[i].abs());
                }
                scale = scale.max(s.max_abs() / size.iter().cloned().fold(f64::INFINITY, f64::min));
            }
        }
    }
    worst / (1.0 + scale)
}
