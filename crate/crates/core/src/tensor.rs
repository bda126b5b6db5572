//! Dense 3×3 and 3×3×3×3 tensor algebra.
//!
//! Curls are taken row-wise: `(Curl P)_ij = ε_jkl ∂_k P_il`.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

pub type Vec3 = [f64; 3];

/// Levi-Civita symbol.
pub fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

pub fn kronecker(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

pub fn dot3(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross3(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn sub3(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn norm3(a: Vec3) -> f64 {
    dot3(a, a).sqrt()
}

/// A real 3×3 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const ZERO: Mat3 = Mat3([[0.0; 3]; 3]);

    pub fn identity() -> Self {
        Self::diag([1.0, 1.0, 1.0])
    }

    pub fn diag(d: Vec3) -> Self {
        let mut m = Self::ZERO;
        for i in 0..3 {
            m.0[i][i] = d[i];
        }
        m
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = f(i, j);
            }
        }
        m
    }

    /// Row-major construction from nine entries.
    pub fn from_row_slice(v: &[f64]) -> Self {
        assert_eq!(v.len(), 9, "Mat3 needs nine entries");
        Self::from_fn(|i, j| v[3 * i + j])
    }

    pub fn to_row_vec(&self) -> [f64; 9] {
        let mut out = [0.0; 9];
        for i in 0..3 {
            for j in 0..3 {
                out[3 * i + j] = self.0[i][j];
            }
        }
        out
    }

    /// Outer product `a ⊗ b`.
    pub fn outer(a: Vec3, b: Vec3) -> Self {
        Self::from_fn(|i, j| a[i] * b[j])
    }

    pub fn row(&self, i: usize) -> Vec3 {
        self.0[i]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(|i, j| self.0[j][i])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn sym(&self) -> Self {
        Self::from_fn(|i, j| 0.5 * (self.0[i][j] + self.0[j][i]))
    }

    pub fn skew(&self) -> Self {
        Self::from_fn(|i, j| 0.5 * (self.0[i][j] - self.0[j][i]))
    }

    pub fn dev(&self) -> Self {
        let t = self.trace() / 3.0;
        Self::from_fn(|i, j| self.0[i][j] - t * kronecker(i, j))
    }

    pub fn dev_sym(&self) -> Self {
        self.sym().dev()
    }

    /// `(tr X / 3) · 1`.
    pub fn spherical(&self) -> Self {
        Self::identity() * (self.trace() / 3.0)
    }

    pub fn matmul(&self, other: &Mat3) -> Self {
        Self::from_fn(|i, j| (0..3).map(|k| self.0[i][k] * other.0[k][j]).sum())
    }

    pub fn mul_vec(&self, v: Vec3) -> Vec3 {
        [dot3(self.0[0], v), dot3(self.0[1], v), dot3(self.0[2], v)]
    }

    pub fn norm(&self) -> f64 {
        frobenius(self, self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }
}

impl Index<(usize, usize)> for Mat3 {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Mat3 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.0[i][j]
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(self, rhs: Mat3) -> Mat3 {
        Mat3::from_fn(|i, j| self.0[i][j] + rhs.0[i][j])
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(self, rhs: Mat3) -> Mat3 {
        Mat3::from_fn(|i, j| self.0[i][j] - rhs.0[i][j])
    }
}

impl AddAssign for Mat3 {
    fn add_assign(&mut self, rhs: Mat3) {
        *self = *self + rhs;
    }
}

impl SubAssign for Mat3 {
    fn sub_assign(&mut self, rhs: Mat3) {
        *self = *self - rhs;
    }
}

impl Neg for Mat3 {
    type Output = Mat3;
    fn neg(self) -> Mat3 {
        self * -1.0
    }
}

impl Mul<f64> for Mat3 {
    type Output = Mat3;
    fn mul(self, s: f64) -> Mat3 {
        Mat3::from_fn(|i, j| self.0[i][j] * s)
    }
}

impl Mul<Mat3> for f64 {
    type Output = Mat3;
    fn mul(self, m: Mat3) -> Mat3 {
        m * self
    }
}

/// Frobenius product `tr(X Yᵀ)`.
pub fn frobenius(x: &Mat3, y: &Mat3) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += x.0[i][j] * y.0[i][j];
        }
    }
    s
}

/// Orthogonal split `X = dev sym X + skew X + (tr X / 3) 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartanParts {
    pub devsym: Mat3,
    pub skew: Mat3,
    pub spherical: Mat3,
}

impl CartanParts {
    pub fn recombine(&self) -> Mat3 {
        self.devsym + self.skew + self.spherical
    }
}

pub fn cartan_decompose(x: &Mat3) -> CartanParts {
    let skew = x.skew();
    let spherical = x.spherical();
    // Remainder form keeps the reconstruction exact in floating point.
    let devsym = *x - skew - spherical;
    CartanParts {
        devsym,
        skew,
        spherical,
    }
}

/// The SO(3)-irreducible pieces of a dislocation density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrreducibleDislocation {
    pub tentor: Mat3,
    pub trator: Mat3,
    pub axitor: Mat3,
}

pub fn irreducible_split(alpha: &Mat3) -> IrreducibleDislocation {
    let c = cartan_decompose(alpha);
    IrreducibleDislocation {
        tentor: c.devsym,
        trator: c.skew,
        axitor: c.spherical,
    }
}

/// Nye tensor `κ = αᵀ − ½ tr(α) 1`.
pub fn nye_from_alpha(alpha: &Mat3) -> Mat3 {
    alpha.transpose() - Mat3::identity() * (0.5 * alpha.trace())
}

/// Inverse of [`nye_from_alpha`]: `α = κᵀ − tr(κ) 1`.
pub fn alpha_from_nye(kappa: &Mat3) -> Mat3 {
    kappa.transpose() - Mat3::identity() * kappa.trace()
}

pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DislocationKind {
    None,
    Screw,
    Edge,
    Mixed,
}

/// Screw content lives on the diagonal, edge content off it.
pub fn classify_dislocation(alpha: &Mat3, tol: f64) -> DislocationKind {
    let mut diag: f64 = 0.0;
    let mut off: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let a = alpha.0[i][j].abs();
            if i == j {
                diag = diag.max(a);
            } else {
                off = off.max(a);
            }
        }
    }
    match (diag > tol, off > tol) {
        (false, false) => DislocationKind::None,
        (true, false) => DislocationKind::Screw,
        (false, true) => DislocationKind::Edge,
        (true, true) => DislocationKind::Mixed,
    }
}

/// A 3×3×3×3 array acting on matrices by `(T.X)_ij = T_ijkl X_kl`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4(pub [f64; 81]);

impl Default for Tensor4 {
    fn default() -> Self {
        Self::zero()
    }
}

impl Tensor4 {
    pub fn zero() -> Self {
        Tensor4([0.0; 81])
    }

    #[inline]
    fn idx(i: usize, j: usize, k: usize, l: usize) -> usize {
        27 * i + 9 * j + 3 * k + l
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        t.0[Self::idx(i, j, k, l)] = f(i, j, k, l);
                    }
                }
            }
        }
        t
    }

    /// The identity map `T_ijkl = δik δjl`.
    pub fn identity() -> Self {
        Self::from_fn(|i, j, k, l| kronecker(i, k) * kronecker(j, l))
    }

    /// Tensor realizing a linear map on matrices, sampled on the unit basis.
    pub fn from_linear_map(f: impl Fn(&Mat3) -> Mat3) -> Self {
        let mut t = Self::zero();
        for k in 0..3 {
            for l in 0..3 {
                let mut e = Mat3::ZERO;
                e.0[k][l] = 1.0;
                let image = f(&e);
                for i in 0..3 {
                    for j in 0..3 {
                        t.0[Self::idx(i, j, k, l)] = image.0[i][j];
                    }
                }
            }
        }
        t
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.0[Self::idx(i, j, k, l)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        self.0[Self::idx(i, j, k, l)] = v;
    }

    pub fn apply(&self, x: &Mat3) -> Mat3 {
        apply_fourth_order(self, x)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut t = self.clone();
        t.0.iter_mut().for_each(|x| *x *= s);
        t
    }

    /// `max |T_ijkl − T_klij|`.
    pub fn major_asymmetry(&self) -> f64 {
        self.scan(|i, j, k, l| self.get(i, j, k, l) - self.get(k, l, i, j))
    }

    /// `max |T_ijkl − T_jikl|` together with `max |T_ijkl − T_ijlk|`.
    pub fn minor_asymmetry(&self) -> f64 {
        self.scan(|i, j, k, l| self.get(i, j, k, l) - self.get(j, i, k, l))
            .max(self.scan(|i, j, k, l| self.get(i, j, k, l) - self.get(i, j, l, k)))
    }

    /// Largest coupling between symmetric and antisymmetric matrices.
    pub fn sym_skew_coupling(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let syms = sym_basis();
        let skews = skew_basis();
        for s in &syms {
            let ts = self.apply(s);
            for w in &skews {
                worst = worst.max(frobenius(&ts, w).abs());
                worst = worst.max(frobenius(&self.apply(w), s).abs());
            }
        }
        worst
    }

    fn scan(&self, f: impl Fn(usize, usize, usize, usize) -> f64) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        worst = worst.max(f(i, j, k, l).abs());
                    }
                }
            }
        }
        worst
    }
}

impl Add for &Tensor4 {
    type Output = Tensor4;
    fn add(self, rhs: &Tensor4) -> Tensor4 {
        let mut t = self.clone();
        t.0.iter_mut().zip(rhs.0.iter()).for_each(|(a, b)| *a += b);
        t
    }
}

pub fn apply_fourth_order(t: &Tensor4, x: &Mat3) -> Mat3 {
    let mut out = Mat3::ZERO;
    for i in 0..3 {
        for j in 0..3 {
            let base = 27 * i + 9 * j;
            let mut s = 0.0;
            for k in 0..3 {
                for l in 0..3 {
                    s += t.0[base + 3 * k + l] * x.0[k][l];
                }
            }
            out.0[i][j] = s;
        }
    }
    out
}

/// Orthonormal basis of symmetric matrices (6 elements).
pub fn sym_basis() -> [Mat3; 6] {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut b = [Mat3::ZERO; 6];
    for i in 0..3 {
        b[i].0[i][i] = 1.0;
    }
    for (n, (i, j)) in [(0, 1), (0, 2), (1, 2)].into_iter().enumerate() {
        b[3 + n].0[i][j] = r;
        b[3 + n].0[j][i] = r;
    }
    b
}

/// Orthonormal basis of antisymmetric matrices (3 elements).
pub fn skew_basis() -> [Mat3; 3] {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut b = [Mat3::ZERO; 3];
    for (n, (i, j)) in [(0, 1), (0, 2), (1, 2)].into_iter().enumerate() {
        b[n].0[i][j] = r;
        b[n].0[j][i] = -r;
    }
    b
}

/// Orthonormal basis of all matrices: the symmetric basis followed by the skew basis.
pub fn full_basis() -> [Mat3; 9] {
    let s = sym_basis();
    let w = skew_basis();
    [s[0], s[1], s[2], s[3], s[4], s[5], w[0], w[1], w[2]]
}
