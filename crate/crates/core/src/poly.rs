//! Exact polynomials in three variables and 3×3 matrices of them.

use crate::tensor::{levi_civita, Mat3, Vec3};
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};
use thiserror::Error;

/// Highest total degree carried internally.
pub const MAX_DEGREE: u32 = 4;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("polynomial degree {degree} exceeds the supported maximum {max}")]
pub struct DegreeOverflow {
    pub degree: u32,
    pub max: u32,
}

/// Sparse polynomial keyed by exponent triples.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly(BTreeMap<[u32; 3], f64>);

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: f64) -> Self {
        Poly::monomial(c, [0, 0, 0])
    }

    /// The coordinate `x_i`.
    pub fn var(i: usize) -> Self {
        let mut e = [0; 3];
        e[i] = 1;
        Poly::monomial(1.0, e)
    }

    pub fn monomial(c: f64, exps: [u32; 3]) -> Self {
        let mut m = BTreeMap::new();
        if c != 0.0 {
            m.insert(exps, c);
        }
        Poly(m)
    }

    pub fn terms(&self) -> impl Iterator<Item = ([u32; 3], f64)> + '_ {
        self.0.iter().map(|(e, c)| (*e, *c))
    }

    pub fn degree(&self) -> u32 {
        self.0.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.values().all(|c| *c == 0.0)
    }

    pub fn eval(&self, x: Vec3) -> f64 {
        self.0
            .iter()
            .map(|(e, c)| c * x[0].powi(e[0] as i32) * x[1].powi(e[1] as i32) * x[2].powi(e[2] as i32))
            .sum()
    }

    pub fn derivative(&self, i: usize) -> Self {
        let mut out = BTreeMap::new();
        for (e, c) in &self.0 {
            if e[i] > 0 {
                let mut f = *e;
                f[i] -= 1;
                *out.entry(f).or_insert(0.0) += c * e[i] as f64;
            }
        }
        Poly(out)
    }

    pub fn scale(&self, s: f64) -> Self {
        Poly(self.0.iter().map(|(e, c)| (*e, c * s)).collect())
    }

    /// Product, refusing results above [`MAX_DEGREE`].
    pub fn checked_mul(&self, o: &Poly) -> Result<Poly, DegreeOverflow> {
        let degree = self.degree() + o.degree();
        if !self.is_zero() && !o.is_zero() && degree > MAX_DEGREE {
            return Err(DegreeOverflow { degree, max: MAX_DEGREE });
        }
        let mut out = BTreeMap::new();
        for (ea, ca) in &self.0 {
            for (eb, cb) in &o.0 {
                let e = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]];
                *out.entry(e).or_insert(0.0) += ca * cb;
            }
        }
        Ok(Poly(out))
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let mut out = self.0.clone();
        for (e, c) in &o.0 {
            *out.entry(*e).or_insert(0.0) += c;
        }
        Poly(out)
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        self + &(-o)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &Poly {
    type Output = Poly;
    fn mul(self, s: f64) -> Poly {
        self.scale(s)
    }
}

/// 3×3 matrix of polynomials.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PolyMat3(pub [[Poly; 3]; 3]);

impl PolyMat3 {
    pub fn from_fn(mut f: impl FnMut(usize, usize) -> Poly) -> Self {
        PolyMat3(std::array::from_fn(|i| std::array::from_fn(|j| f(i, j))))
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().flatten().map(Poly::degree).max().unwrap_or(0)
    }

    /// Rejects entries above `max` total degree.
    pub fn check_degree(&self, max: u32) -> Result<(), DegreeOverflow> {
        let degree = self.degree();
        if degree > max {
            Err(DegreeOverflow { degree, max })
        } else {
            Ok(())
        }
    }

    pub fn eval(&self, x: Vec3) -> Mat3 {
        Mat3::from_fn(|i, j| self.0[i][j].eval(x))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(|i, j| self.0[j][i].clone())
    }

    pub fn trace(&self) -> Poly {
        &(&self.0[0][0] + &self.0[1][1]) + &self.0[2][2]
    }

    pub fn sym(&self) -> Self {
        Self::from_fn(|i, j| (&self.0[i][j] + &self.0[j][i]).scale(0.5))
    }

    pub fn skew(&self) -> Self {
        Self::from_fn(|i, j| (&self.0[i][j] - &self.0[j][i]).scale(0.5))
    }

    pub fn dev(&self) -> Self {
        let t = self.trace().scale(1.0 / 3.0);
        Self::from_fn(|i, j| if i == j { &self.0[i][j] - &t } else { self.0[i][j].clone() })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_fn(|i, j| self.0[i][j].scale(s))
    }

    /// `p · 1`.
    pub fn spherical(p: &Poly) -> Self {
        Self::from_fn(|i, j| if i == j { p.clone() } else { Poly::zero() })
    }

    /// Row-wise curl `(Curl P)_ij = ε_jkl ∂_k P_il`.
    pub fn curl(&self) -> Self {
        Self::from_fn(|i, j| {
            let mut acc = Poly::zero();
            for k in 0..3 {
                for l in 0..3 {
                    let e = levi_civita(j, k, l);
                    if e != 0.0 {
                        acc = &acc + &self.0[i][l].derivative(k).scale(e);
                    }
                }
            }
            acc
        })
    }
}

impl Add for &PolyMat3 {
    type Output = PolyMat3;
    fn add(self, o: &PolyMat3) -> PolyMat3 {
        PolyMat3::from_fn(|i, j| &self.0[i][j] + &o.0[i][j])
    }
}

impl Sub for &PolyMat3 {
    type Output = PolyMat3;
    fn sub(self, o: &PolyMat3) -> PolyMat3 {
        PolyMat3::from_fn(|i, j| &self.0[i][j] - &o.0[i][j])
    }
}
