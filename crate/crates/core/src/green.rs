//! Closed-form analytics of the isotropic dislocation gauge theory:
//! characteristic lengths, Green tensors of the force-stress operator `□_G`,
//! a finite-difference `□_G`, and superposition of point stresses.

use crate::constitutive::IsotropicParams;
use crate::tensor::{kronecker, Mat3, Tensor4, Vec3};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GreenError {
    #[error("invalid parameters: {0}")]
    InvalidParams(&'static str),
    #[error("characteristic length {0} is undefined or not real and positive")]
    BadLength(usize),
    #[error("evaluation point too close to the source (r = {0:.3e})")]
    Singular(f64),
    #[error("coinciding characteristic lengths make the completed tensor degenerate")]
    DegenerateLengths,
}

/// Squared characteristic lengths; `None` marks a length that is not defined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicLengths {
    pub l1_sq: f64,
    pub l2_sq: Option<f64>,
    pub l3_sq: Option<f64>,
    pub l4_sq: Option<f64>,
}

impl CharacteristicLengths {
    pub fn squares(&self) -> [Option<f64>; 4] {
        [Some(self.l1_sq), self.l2_sq, self.l3_sq, self.l4_sq]
    }

    pub fn defined(&self) -> [bool; 4] {
        self.squares().map(|s| s.is_some())
    }

    /// Lengths whose square is negative.
    pub fn imaginary(&self) -> [bool; 4] {
        self.squares().map(|s| s.is_some_and(|v| v < 0.0))
    }

    /// All four lengths real and strictly positive.
    pub fn all_positive(&self) -> bool {
        self.squares().iter().all(|s| s.is_some_and(|v| v > 0.0))
    }
}

fn check_mu_e(p: &IsotropicParams) -> Result<(), GreenError> {
    if p.mu_e > 0.0 {
        Ok(())
    } else {
        Err(GreenError::InvalidParams("mu_e must be positive"))
    }
}

/// `ℓ1² = α1/(2μe)`, `ℓ2² = (1−ν)α2/(2μe(1+ν))`, `ℓ3² = (μe+μc)(α1+α2)/(8μeμc)`,
/// `ℓ4² = (α1+6α3)/(6μc)`. For `μc = 0`, `ℓ3` and `ℓ4` are undefined unless
/// both numerators vanish, in which case both squares are zero.
pub fn lengths(p: &IsotropicParams) -> Result<CharacteristicLengths, GreenError> {
    check_mu_e(p)?;
    let l1_sq = p.a1 / (2.0 * p.mu_e);
    let l2_sq = p
        .nu()
        .filter(|nu| *nu != -1.0)
        .map(|nu| (1.0 - nu) * p.a2 / (2.0 * p.mu_e * (1.0 + nu)));
    let (l3_sq, l4_sq) = if p.mu_c != 0.0 {
        (
            Some((p.mu_e + p.mu_c) * (p.a1 + p.a2) / (8.0 * p.mu_e * p.mu_c)),
            Some((p.a1 + 6.0 * p.a3) / (6.0 * p.mu_c)),
        )
    } else if p.a1 + p.a2 == 0.0 && p.a1 + 6.0 * p.a3 == 0.0 {
        (Some(0.0), Some(0.0))
    } else {
        (None, None)
    };
    Ok(CharacteristicLengths {
        l1_sq,
        l2_sq,
        l3_sq,
        l4_sq,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitDirection {
    ToInfinity,
    ToZero,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Limit {
    Finite(f64),
    Divergent,
}

/// Limits of `(ℓ3², ℓ4²)` as `μc` tends to infinity or to zero.
pub fn lengths_limit_mu_c(p: &IsotropicParams, direction: LimitDirection) -> Result<(Limit, Limit), GreenError> {
    check_mu_e(p)?;
    Ok(match direction {
        LimitDirection::ToInfinity => (Limit::Finite((p.a1 + p.a2) / (8.0 * p.mu_e)), Limit::Finite(0.0)),
        LimitDirection::ToZero => {
            let l3 = if p.a1 + p.a2 == 0.0 { Limit::Finite(0.0) } else { Limit::Divergent };
            let l4 = if p.a1 + 6.0 * p.a3 == 0.0 { Limit::Finite(0.0) } else { Limit::Divergent };
            (l3, l4)
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenCoeffs {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

pub fn green_coeffs(p: &IsotropicParams) -> GreenCoeffs {
    GreenCoeffs {
        c1: (2.0 * p.a1 + 3.0 * p.a3) / 3.0,
        c2: (3.0 * p.a3 - p.a1) / 3.0,
        c3: 0.5 * (p.a2 - p.a1),
    }
}

/// Scalar `e^{−q r} Σ_m c_m r^{−m}`; `q = 1/ℓ`, with `q = 0` giving pure powers.
#[derive(Debug, Clone, PartialEq)]
struct ExpPoly {
    q: f64,
    c: Vec<f64>,
}

impl ExpPoly {
    /// `e^{−q r}/r`.
    fn yukawa(q: f64) -> Self {
        ExpPoly { q, c: vec![0.0, 1.0] }
    }

    fn eval(&self, r: f64) -> f64 {
        let e = (-self.q * r).exp();
        e * self.c.iter().enumerate().map(|(m, c)| c * r.powi(-(m as i32))).sum::<f64>()
    }

    /// `(1/r) d/dr`.
    fn radial_step(&self) -> Self {
        let mut c = vec![0.0; self.c.len() + 2];
        for (m, &cm) in self.c.iter().enumerate() {
            c[m + 1] -= self.q * cm;
            c[m + 2] -= m as f64 * cm;
        }
        ExpPoly { q: self.q, c }
    }
}

/// `g_n = ((1/r) d/dr)^n f` for `n = 0..=4` of `f = e^{−q r}/r`.
fn radial_ladder(q: f64, r: f64) -> [f64; 5] {
    let mut f = ExpPoly::yukawa(q);
    let mut out = [0.0; 5];
    for o in out.iter_mut() {
        *o = f.eval(r);
        f = f.radial_step();
    }
    out
}

/// `(f, f′, f″)` for `f = e^{−q r}/r`.
fn yukawa_derivatives(q: f64, r: f64) -> (f64, f64, f64) {
    let e = (-q * r).exp();
    let f = e / r;
    let f1 = -e * (q / r + 1.0 / (r * r));
    let f2 = e * (q * q / r + 2.0 * q / (r * r) + 2.0 / (r * r * r));
    (f, f1, f2)
}

/// `∂i∂j f(r) = (δij/r − xixj/r³) f′ + (xixj/r²) f″`.
fn radial_hessian(x: Vec3, f1: f64, f2: f64) -> Mat3 {
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    Mat3::from_fn(|i, j| (kronecker(i, j) / r - x[i] * x[j] / (r * r * r)) * f1 + x[i] * x[j] / (r * r) * f2)
}

fn yukawa_hessian(q: f64, x: Vec3) -> Mat3 {
    let r = radius(x);
    let (_, f1, f2) = yukawa_derivatives(q, r);
    radial_hessian(x, f1, f2)
}

/// `∂i∂j∂k∂l` of `e^{−q r}/r`.
fn yukawa_fourth(q: f64, x: Vec3) -> Tensor4 {
    let g = radial_ladder(q, radius(x));
    let d = kronecker;
    Tensor4::from_fn(|i, j, k, l| {
        g[4] * x[i] * x[j] * x[k] * x[l]
            + g[3]
                * (d(i, j) * x[k] * x[l]
                    + d(i, k) * x[j] * x[l]
                    + d(i, l) * x[j] * x[k]
                    + d(j, k) * x[i] * x[l]
                    + d(j, l) * x[i] * x[k]
                    + d(k, l) * x[i] * x[j])
            + g[2] * (d(i, j) * d(k, l) + d(i, k) * d(j, l) + d(i, l) * d(j, k))
    })
}

fn radius(x: Vec3) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

fn positive_lengths(p: &IsotropicParams) -> Result<[f64; 4], GreenError> {
    if !(p.mu_c > 0.0) {
        return Err(GreenError::InvalidParams("the Green tensor needs mu_c > 0"));
    }
    let ls = lengths(p)?;
    let sq = ls.squares();
    let mut out = [0.0; 4];
    for (i, s) in sq.iter().enumerate() {
        match s {
            Some(v) if *v > 0.0 => out[i] = *v,
            _ => return Err(GreenError::BadLength(i + 1)),
        }
    }
    Ok(out)
}

fn check_radius(x: Vec3, sq: &[f64]) -> Result<f64, GreenError> {
    let r = radius(x);
    let lmax = sq.iter().fold(0.0f64, |m, v| m.max(v.sqrt()));
    if !(r >= 1e-12 * lmax) || r == 0.0 {
        return Err(GreenError::Singular(r));
    }
    Ok(r)
}

/// The five bracketed terms of the Green tensor, each already scaled by `1/(8π)`:
/// the `ℓ1` symmetric block, the `ℓ4` antisymmetric block, the dilatational
/// `ℓ1/ℓ2` term and the two `ℓ3` coupling terms.
pub fn green_terms(x: Vec3, p: &IsotropicParams) -> Result<[Tensor4; 5], GreenError> {
    let sq = positive_lengths(p)?;
    let r = check_radius(x, &sq)?;
    let q = sq.map(|s| 1.0 / s.sqrt());
    let e1 = (-r * q[0]).exp() / r;
    let e4 = (-r * q[3]).exp() / r;
    let h1 = yukawa_hessian(q[0], x);
    let h2 = yukawa_hessian(q[1], x);
    let h3 = yukawa_hessian(q[2], x);
    let h4 = yukawa_hessian(q[3], x);
    Ok(assemble_terms(e1 / sq[0], Some(e4 / sq[3]), h1 - h2, h1 - h3, Some(h4 - h3)))
}

fn assemble_terms(
    sym_amp: f64,
    skew_amp: Option<f64>,
    h12: Mat3,
    h13: Mat3,
    h43: Option<Mat3>,
) -> [Tensor4; 5] {
    let d = kronecker;
    let s = 1.0 / (8.0 * PI);
    let t0 = Tensor4::from_fn(|i, j, k, l| s * (d(i, k) * d(j, l) + d(i, l) * d(j, k)) * sym_amp);
    let t1 = Tensor4::from_fn(|i, j, k, l| s * (d(i, k) * d(j, l) - d(i, l) * d(j, k)) * skew_amp.unwrap_or(0.0));
    let lap12 = h12.trace();
    let t2 = Tensor4::from_fn(|i, j, k, l| -s * (d(i, j) * lap12 - h12.0[i][j]) * d(k, l));
    let t3 = Tensor4::from_fn(|i, j, k, l| -s * (d(j, l) * h13.0[i][k] + d(i, l) * h13.0[j][k]));
    let t4 = match h43 {
        Some(h) => Tensor4::from_fn(|i, j, k, l| -s * (d(j, l) * h.0[i][k] - d(i, l) * h.0[j][k])),
        None => Tensor4::zero(),
    };
    [t0, t1, t2, t3, t4]
}

fn sum_terms(terms: &[Tensor4; 5]) -> Tensor4 {
    let mut g = Tensor4::zero();
    for t in terms {
        g = &g + t;
    }
    g
}

/// The transverse Green tensor of the unbounded medium with `μc > 0`.
pub fn green_tensor(x: Vec3, p: &IsotropicParams) -> Result<Tensor4, GreenError> {
    Ok(sum_terms(&green_terms(x, p)?))
}

/// The reduced tensor of the `μc → 0` limit, in which the `ℓ4` block drops
/// and `e^{−r/ℓ3}` tends to one.
pub fn green_tensor_mu_c_zero(x: Vec3, p: &IsotropicParams) -> Result<Tensor4, GreenError> {
    let ls = lengths(&IsotropicParams { mu_c: 0.0, ..*p })?;
    let l1 = ls.l1_sq;
    let l2 = match ls.l2_sq {
        Some(v) if v > 0.0 => v,
        _ => return Err(GreenError::BadLength(2)),
    };
    if !(l1 > 0.0) {
        return Err(GreenError::BadLength(1));
    }
    let r = check_radius(x, &[l1, l2])?;
    let (q1, q2) = (1.0 / l1.sqrt(), 1.0 / l2.sqrt());
    let e1 = (-r * q1).exp() / r;
    let h1 = yukawa_hessian(q1, x);
    let h2 = yukawa_hessian(q2, x);
    let h0 = yukawa_hessian(0.0, x);
    Ok(sum_terms(&assemble_terms(e1 / l1, None, h1 - h2, h1 - h0, None)))
}

/// Pole data of the longitudinal completion: `(ℓp², A_p, B_p, C_p, D_p)` for
/// `p = 1..5`, with `ℓ5² = β/(4μeμc)`.
fn completion_poles(p: &IsotropicParams) -> Result<Vec<(f64, [f64; 4])>, GreenError> {
    let sq = positive_lengths(p)?;
    let nu = p.nu().ok_or(GreenError::InvalidParams("Poisson ratio undefined"))?;
    let (me, mc) = (p.mu_e, p.mu_c);
    let (a1, a2, a3) = (p.a1, p.a2, p.a3);
    let gc = green_coeffs(p);
    let beta = gc.c1 * (mc + me) - gc.c2 * (mc - me);
    let l5 = beta / (4.0 * me * mc);
    if !(l5 > 0.0) {
        return Err(GreenError::InvalidParams("the longitudinal length must be real"));
    }
    let d1 = a1 * mc * nu + a1 * mc + a1 * me * nu + a1 * me + 5.0 * a2 * mc * nu - 3.0 * a2 * mc + a2 * me * nu + a2 * me;
    let d2 = 3.0 * a1 * mc - a1 * me - 3.0 * a2 * mc - 3.0 * a2 * me + 12.0 * a3 * me;
    let scale = (a1.abs() + a2.abs() + a3.abs()) * (mc + me);
    if d1.abs() <= 1e-12 * scale || d2.abs() <= 1e-12 * scale {
        return Err(GreenError::DegenerateLengths);
    }
    let q = 3.0 * a1 * mc - a1 * me - a2 * mc - a2 * me;
    let n3 = 6.0 * a1 * a1 * mc * mc * nu + 6.0 * a1 * a1 * mc * mc + a1 * a1 * mc * me * nu + a1 * a1 * mc * me
        - a1 * a1 * me * me * nu
        - a1 * a1 * me * me
        + 15.0 * a1 * a2 * mc * mc * nu
        - 15.0 * a1 * a2 * mc * mc
        - 6.0 * a1 * a2 * mc * me * nu
        + 4.0 * a1 * a2 * mc * me
        - a1 * a2 * me * me * nu
        - a1 * a2 * me * me
        + 6.0 * a1 * a3 * mc * me * nu
        + 6.0 * a1 * a3 * mc * me
        - 6.0 * a1 * a3 * me * me * nu
        - 6.0 * a1 * a3 * me * me
        - 3.0 * a2 * a2 * mc * mc * nu
        + 3.0 * a2 * a2 * mc * mc
        - 3.0 * a2 * a2 * mc * me * nu
        + 3.0 * a2 * a2 * mc * me
        - 18.0 * a2 * a3 * mc * me * nu
        + 6.0 * a2 * a3 * mc * me
        - 6.0 * a2 * a3 * me * me * nu
        - 6.0 * a2 * a3 * me * me;
    let rc3 = 2.0 * (3.0 * a1 * mc - a1 * me - 6.0 * a3 * me) / d2;
    let ra = [
        -0.5,
        -(nu + 1.0) * q / (2.0 * d1),
        2.0 * mc * (a1 * nu + a1 + a2 * nu - a2) / d1,
        0.0,
        0.0,
    ];
    let rb = [0.5, 0.0, 0.0, 0.5, -1.0];
    let rc = [0.5, 0.0, rc3, -0.5, -rc3];
    let rd = [
        a1 / (4.0 * me),
        a2 * (nu - 1.0) * q / (4.0 * me * d1),
        (a1 + a2) * (mc + me) * n3 / (4.0 * mc * me * d2 * d1),
        0.0,
        -(3.0 * a1 * mc + a1 * me + 6.0 * a3 * me) * q / (4.0 * mc * me * d2),
    ];
    let all_sq = [sq[0], sq[1], sq[2], sq[3], l5];
    Ok((0..5).map(|k| (all_sq[k], [ra[k], rb[k], rc[k], rd[k]])).collect())
}

/// Fundamental solution of `□_G Σ = δ L` for general (not only
/// divergence-free) `L`: the transverse tensor plus its longitudinal completion
/// `(1/4π) Σ_p [−A_p δij ∂k∂l − B_p δik ∂j∂l − C_p δjk ∂i∂l + D_p ∂i∂j∂k∂l](e^{−r/ℓp}/r)`.
pub fn fundamental_solution(x: Vec3, p: &IsotropicParams) -> Result<Tensor4, GreenError> {
    let mut g = green_tensor(x, p)?;
    let poles = completion_poles(p)?;
    let d = kronecker;
    let s = 1.0 / (4.0 * PI);
    for (l_sq, [a, b, c, dd]) in poles {
        if a == 0.0 && b == 0.0 && c == 0.0 && dd == 0.0 {
            continue;
        }
        let q = 1.0 / l_sq.sqrt();
        let h = yukawa_hessian(q, x);
        let f4 = yukawa_fourth(q, x);
        let corr = Tensor4::from_fn(|i, j, k, l| {
            s * (-a * d(i, j) * h.0[k][l] - b * d(i, k) * h.0[j][l] - c * d(j, k) * h.0[i][l]
                + dd * f4.get(i, j, k, l))
        });
        g = &g + &corr;
    }
    Ok(g)
}

/// `□_G` applied to a field value and its second derivatives `hess[a][b] = ∂a∂b σ̂`.
pub fn box_operator_apply(sigma: &Mat3, hess: &[[Mat3; 3]; 3], p: &IsotropicParams) -> Result<Mat3, GreenError> {
    check_mu_e(p)?;
    if !(p.mu_c > 0.0) {
        return Err(GreenError::InvalidParams("the box operator needs mu_c > 0"));
    }
    let nu = p.nu().ok_or(GreenError::InvalidParams("Poisson ratio undefined"))?;
    let (me, mc) = (p.mu_e, p.mu_c);
    let GreenCoeffs { c1, c2, c3 } = green_coeffs(p);
    let gamma = (c1 - c2 + 2.0 * c3) * 2.0 * mc * nu / (1.0 + nu) - 2.0 * c3 * mc;
    let beta = c1 * (mc + me) - c2 * (mc - me);
    let zeta = c1 * (mc - me) - c2 * (mc + me);
    let eta = 2.0 * c2 * me - c3 * (mc + me);
    let lap = hess[0][0] + hess[1][1] + hess[2][2];
    let lap_tr = lap.trace();
    Ok(Mat3::from_fn(|i, j| {
        let mut out = gamma * (kronecker(i, j) * lap_tr - hess[i][j].trace());
        out -= beta * lap.0[i][j];
        let div_ji: f64 = (0..3).map(|k| hess[j][k].0[k][i]).sum();
        out += zeta * (div_ji - lap.0[j][i]);
        let div_ij: f64 = (0..3).map(|k| hess[i][k].0[k][j]).sum();
        out += eta * div_ij;
        out += 4.0 * me * mc * sigma.0[i][j];
        out / (4.0 * me * mc)
    }))
}

/// `□_G` with all second derivatives by central differences of step `h`.
pub fn box_operator_fd(
    field: &dyn Fn(Vec3) -> Mat3,
    x: Vec3,
    p: &IsotropicParams,
    h: f64,
) -> Result<Mat3, GreenError> {
    let at = |da: [f64; 3]| field([x[0] + da[0], x[1] + da[1], x[2] + da[2]]);
    let center = field(x);
    let mut hess = [[Mat3::ZERO; 3]; 3];
    for a in 0..3 {
        for b in a..3 {
            let v = if a == b {
                let mut e = [0.0; 3];
                e[a] = h;
                (at(e) - center * 2.0 + at(e.map(|v| -v))) * (1.0 / (h * h))
            } else {
                let step = |sa: f64, sb: f64| {
                    let mut e = [0.0; 3];
                    e[a] = sa * h;
                    e[b] = sb * h;
                    at(e)
                };
                (step(1.0, 1.0) - step(1.0, -1.0) - step(-1.0, 1.0) + step(-1.0, -1.0)) * (0.25 / (h * h))
            };
            hess[a][b] = v;
            hess[b][a] = v;
        }
    }
    box_operator_apply(&center, &hess, p)
}

/// A concentrated background stress of magnitude `magnitude` at `location`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointStress {
    pub location: Vec3,
    pub magnitude: Mat3,
}

/// Which kernel a superposition uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GreenKernel {
    #[default]
    Transverse,
    Completed,
}

/// `Σ_s G(x − x_s).L_s`.
pub fn superpose(sources: &[PointStress], x: Vec3, p: &IsotropicParams, kernel: GreenKernel) -> Result<Mat3, GreenError> {
    let mut out = Mat3::ZERO;
    for s in sources {
        let rel = [x[0] - s.location[0], x[1] - s.location[1], x[2] - s.location[2]];
        if rel == [0.0; 3] {
            return Err(GreenError::Singular(0.0));
        }
        let g = match kernel {
            GreenKernel::Transverse => green_tensor(rel, p)?,
            GreenKernel::Completed => fundamental_solution(rel, p)?,
        };
        out += g.apply(&s.magnitude);
    }
    Ok(out)
}
