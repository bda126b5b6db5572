//! Material parameters, validity conditions and constitutive maps.

use crate::tensor::{apply_fourth_order, frobenius, full_basis, sym_basis, Mat3, Tensor4};
use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConstitutiveError {
    #[error("constitutive relation is not invertible: {0}")]
    NotInvertible(&'static str),
    #[error("Poisson ratio undefined (lambda_e + mu_e = 0)")]
    PoissonUndefined,
    #[error("invalid special-case input: {0}")]
    InvalidSpecialCase(&'static str),
    #[error("{name} violates {which} symmetry (relative defect {defect:.3e})")]
    Asymmetric {
        name: &'static str,
        which: &'static str,
        defect: f64,
    },
    #[error("quadratic form is not self-adjoint on the chosen domain (relative defect {0:.3e})")]
    NotSelfAdjoint(f64),
}

/// Isotropic moduli. `a1, a2, a3` are the curvature moduli α1, α2, α3.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IsotropicParams {
    pub mu_e: f64,
    pub lambda_e: f64,
    pub mu_c: f64,
    pub mu_h: f64,
    pub lambda_h: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

impl IsotropicParams {
    /// Poisson ratio `λe / (2(λe + μe))`, `None` when `λe + μe = 0`.
    pub fn nu(&self) -> Option<f64> {
        let s = self.lambda_e + self.mu_e;
        (s != 0.0).then(|| self.lambda_e / (2.0 * s))
    }

    pub fn with_curvature(mut self, a1: f64, a2: f64, a3: f64) -> Self {
        self.a1 = a1;
        self.a2 = a2;
        self.a3 = a3;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Condition {
    MuEPositive,
    BulkEPositive,
    MuHPositive,
    BulkHPositive,
    A1Positive,
    A2Positive,
    A3Positive,
    MuENonNegative,
    BulkENonNegative,
    MuCNonNegative,
    A1NonNegative,
    A2NonNegative,
    A3NonNegative,
}

impl Condition {
    pub fn describe(&self) -> &'static str {
        match self {
            Condition::MuEPositive => "mu_e > 0",
            Condition::BulkEPositive => "2 mu_e + 3 lambda_e > 0",
            Condition::MuHPositive => "mu_h > 0",
            Condition::BulkHPositive => "2 mu_h + 3 lambda_h > 0",
            Condition::A1Positive => "alpha1 > 0",
            Condition::A2Positive => "alpha2 > 0",
            Condition::A3Positive => "alpha3 > 0",
            Condition::MuENonNegative => "mu_e >= 0",
            Condition::BulkENonNegative => "2 mu_e + 3 lambda_e >= 0",
            Condition::MuCNonNegative => "mu_c >= 0",
            Condition::A1NonNegative => "alpha1 >= 0",
            Condition::A2NonNegative => "alpha2 >= 0",
            Condition::A3NonNegative => "alpha3 >= 0",
        }
    }
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.describe())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    RelaxedStrict,
    GaugeSemidefinite,
    Invalid,
}

/// Extreme eigenvalues of the constitutive quadratic forms.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ModuliBounds {
    pub c: Option<(f64, f64)>,
    pub h: Option<(f64, f64)>,
    pub lc: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamReport {
    pub valid: bool,
    pub regime: Regime,
    pub violated: Vec<Condition>,
    pub bounds: ModuliBounds,
}

fn check(list: &mut Vec<Condition>, ok: bool, c: Condition) {
    if !ok {
        list.push(c);
    }
}

/// Strict conditions of the relaxed model. `μc ≥ 0` is tolerated and not checked.
pub fn validate_relaxed(p: &IsotropicParams) -> ParamReport {
    let mut v = Vec::new();
    check(&mut v, p.mu_e > 0.0, Condition::MuEPositive);
    check(&mut v, 2.0 * p.mu_e + 3.0 * p.lambda_e > 0.0, Condition::BulkEPositive);
    check(&mut v, p.mu_h > 0.0, Condition::MuHPositive);
    check(&mut v, 2.0 * p.mu_h + 3.0 * p.lambda_h > 0.0, Condition::BulkHPositive);
    check(&mut v, p.a1 > 0.0, Condition::A1Positive);
    check(&mut v, p.a2 > 0.0, Condition::A2Positive);
    check(&mut v, p.a3 > 0.0, Condition::A3Positive);
    let valid = v.is_empty();
    let bounds = if valid {
        let t = iso_to_tensors(p);
        ModuliBounds {
            c: eigen_bounds(&t.c, Domain::Sym3).ok(),
            h: eigen_bounds(&t.h, Domain::Sym3).ok(),
            lc: eigen_bounds(&t.lc, Domain::Full9).ok(),
        }
    } else {
        ModuliBounds::default()
    };
    ParamReport {
        valid,
        regime: if valid { Regime::RelaxedStrict } else { Regime::Invalid },
        violated: v,
        bounds,
    }
}

/// Non-strict conditions of the gauge model; the microstress moduli play no role.
pub fn validate_gauge(p: &IsotropicParams) -> ParamReport {
    let mut v = Vec::new();
    check(&mut v, p.mu_e >= 0.0, Condition::MuENonNegative);
    check(&mut v, 2.0 * p.mu_e + 3.0 * p.lambda_e >= 0.0, Condition::BulkENonNegative);
    check(&mut v, p.mu_c >= 0.0, Condition::MuCNonNegative);
    check(&mut v, p.a1 >= 0.0, Condition::A1NonNegative);
    check(&mut v, p.a2 >= 0.0, Condition::A2NonNegative);
    check(&mut v, p.a3 >= 0.0, Condition::A3NonNegative);
    let valid = v.is_empty();
    let bounds = if valid {
        let t = iso_to_tensors(p);
        ModuliBounds {
            c: eigen_bounds(&t.c, Domain::Full9).ok(),
            h: None,
            lc: eigen_bounds(&t.lc, Domain::Full9).ok(),
        }
    } else {
        ModuliBounds::default()
    };
    ParamReport {
        valid,
        regime: if valid { Regime::GaugeSemidefinite } else { Regime::Invalid },
        violated: v,
        bounds,
    }
}

/// Force stress `2μe sym e + 2μc skew e + λe tr(e) 1`.
pub fn sigma_iso(e: &Mat3, p: &IsotropicParams) -> Mat3 {
    e.sym() * (2.0 * p.mu_e) + e.skew() * (2.0 * p.mu_c) + Mat3::identity() * (p.lambda_e * e.trace())
}

/// Microstress `2μh sym P + λh tr(P) 1`.
pub fn microstress_s(pm: &Mat3, p: &IsotropicParams) -> Mat3 {
    pm.sym() * (2.0 * p.mu_h) + Mat3::identity() * (p.lambda_h * pm.trace())
}

/// Moment stress `α1 dev sym X + α2 skew X + α3 tr(X) 1` for `X = Curl P`.
pub fn moment_m(curl_p: &Mat3, p: &IsotropicParams) -> Mat3 {
    curl_p.dev_sym() * p.a1 + curl_p.skew() * p.a2 + Mat3::identity() * (p.a3 * curl_p.trace())
}

/// Constitutive tensors of the anisotropic models.
///
/// `c` must be major-symmetric and must not couple symmetric with antisymmetric
/// matrices; a skew (Cosserat) block is allowed. `h` carries full minor and major
/// symmetry, `lc` major symmetry. `b` is unrestricted.
#[derive(Debug, Clone, PartialEq)]
pub struct AnisoTensors {
    pub c: Tensor4,
    pub h: Tensor4,
    pub lc: Tensor4,
    pub b: Tensor4,
}

const SYMMETRY_TOL: f64 = 1e-13;

fn rel(defect: f64, t: &Tensor4) -> f64 {
    let s = t.max_abs();
    if s == 0.0 {
        defect
    } else {
        defect / s
    }
}

impl AnisoTensors {
    pub fn new(c: Tensor4, h: Tensor4, lc: Tensor4, b: Option<Tensor4>) -> Result<Self, ConstitutiveError> {
        let fail = |name, which, defect| Err(ConstitutiveError::Asymmetric { name, which, defect });
        let d = rel(c.major_asymmetry(), &c);
        if d > SYMMETRY_TOL {
            return fail("C", "major", d);
        }
        let d = rel(c.sym_skew_coupling(), &c);
        if d > SYMMETRY_TOL {
            return fail("C", "sym/skew block", d);
        }
        let d = rel(h.major_asymmetry(), &h);
        if d > SYMMETRY_TOL {
            return fail("H", "major", d);
        }
        let d = rel(h.minor_asymmetry(), &h);
        if d > SYMMETRY_TOL {
            return fail("H", "minor", d);
        }
        let d = rel(lc.major_asymmetry(), &lc);
        if d > SYMMETRY_TOL {
            return fail("Lc", "major", d);
        }
        Ok(Self {
            c,
            h,
            lc,
            b: b.unwrap_or_else(Tensor4::zero),
        })
    }
}

pub fn iso_to_tensors(p: &IsotropicParams) -> AnisoTensors {
    let q = *p;
    AnisoTensors {
        c: Tensor4::from_linear_map(|x| sigma_iso(x, &q)),
        h: Tensor4::from_linear_map(|x| microstress_s(x, &q)),
        lc: Tensor4::from_linear_map(|x| moment_m(x, &q)),
        b: Tensor4::zero(),
    }
}

/// Strain from force stress, available only for a positive couple modulus.
pub fn inverse_strain_from_stress(sigma: &Mat3, p: &IsotropicParams) -> Result<Mat3, ConstitutiveError> {
    if p.mu_c <= 0.0 {
        return Err(ConstitutiveError::NotInvertible("requires mu_c > 0"));
    }
    if p.mu_e <= 0.0 {
        return Err(ConstitutiveError::NotInvertible("requires mu_e > 0"));
    }
    let nu = p.nu().ok_or(ConstitutiveError::PoissonUndefined)?;
    if 1.0 + nu == 0.0 {
        return Err(ConstitutiveError::NotInvertible("requires 1 + nu != 0"));
    }
    let d = 4.0 * p.mu_e * p.mu_c;
    Ok(*sigma * ((p.mu_c + p.mu_e) / d) + sigma.transpose() * ((p.mu_c - p.mu_e) / d)
        - Mat3::identity() * (nu / (2.0 * p.mu_e * (1.0 + nu)) * sigma.trace()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecialCase {
    Edelen,
    PopovKroener,
    Einstein,
    StrainGradient,
}

/// Curvature moduli of the named special choices, all with `μc = 0`.
/// `d` is the mesoscopic length used by the Popov–Kröner choice.
pub fn special_case_params(
    case: SpecialCase,
    a1: f64,
    base: &IsotropicParams,
    d: Option<f64>,
) -> Result<IsotropicParams, ConstitutiveError> {
    let mut p = *base;
    p.mu_c = 0.0;
    match case {
        SpecialCase::Edelen => {
            p.a1 = a1;
            p.a2 = a1;
            p.a3 = a1 / 3.0;
        }
        SpecialCase::Einstein => {
            p.a1 = a1;
            p.a2 = -a1;
            p.a3 = -a1 / 6.0;
        }
        SpecialCase::PopovKroener => {
            let d = d.ok_or(ConstitutiveError::InvalidSpecialCase("Popov-Kroener needs a length d"))?;
            if !(d > 0.0) {
                return Err(ConstitutiveError::InvalidSpecialCase("Popov-Kroener needs d > 0"));
            }
            let nu = base.nu().ok_or(ConstitutiveError::PoissonUndefined)?;
            if nu == 1.0 {
                return Err(ConstitutiveError::InvalidSpecialCase("nu = 1"));
            }
            let g = base.mu_e * (2.0 * d).powi(2) / 24.0;
            p.a1 = 3.0 * g;
            p.a2 = g * (3.0 + nu) / (1.0 - nu);
            p.a3 = 0.0;
        }
        SpecialCase::StrainGradient => {
            let nu = base.nu().ok_or(ConstitutiveError::PoissonUndefined)?;
            if nu == 1.0 {
                return Err(ConstitutiveError::InvalidSpecialCase("nu = 1"));
            }
            p.a1 = a1;
            p.a2 = a1 * (1.0 + nu) / (1.0 - nu);
            p.a3 = -a1 / 6.0;
        }
    }
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Sym3,
    Full9,
}

/// Gram matrix `Q_ab = ⟨T.E_a, E_b⟩` in an orthonormal basis of the domain.
pub fn quadratic_form_matrix(t: &Tensor4, domain: Domain) -> DMatrix<f64> {
    let basis: Vec<Mat3> = match domain {
        Domain::Sym3 => sym_basis().to_vec(),
        Domain::Full9 => full_basis().to_vec(),
    };
    let n = basis.len();
    DMatrix::from_fn(n, n, |a, b| frobenius(&apply_fourth_order(t, &basis[a]), &basis[b]))
}

/// Extreme eigenvalues of `X ↦ ⟨T.X, X⟩` on the domain.
pub fn eigen_bounds(t: &Tensor4, domain: Domain) -> Result<(f64, f64), ConstitutiveError> {
    let q = quadratic_form_matrix(t, domain);
    let scale = q.amax();
    let defect = (&q - q.transpose()).amax();
    if scale > 0.0 && defect > 1e-12 * scale {
        return Err(ConstitutiveError::NotSelfAdjoint(defect / scale));
    }
    let eig = SymmetricEigen::new(q).eigenvalues;
    let lo = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(vals: [f64; 8]) -> IsotropicParams {
        IsotropicParams {
            mu_e: vals[0],
            lambda_e: vals[1],
            mu_c: vals[2],
            mu_h: vals[3],
            lambda_h: vals[4],
            a1: vals[5],
            a2: vals[6],
            a3: vals[7],
        }
    }

    #[test]
    fn relaxed_validation_examples() {
        assert!(validate_relaxed(&p([1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 1.0])).valid);
        let r = validate_relaxed(&p([0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 1.0, 1.0]));
        assert_eq!(r.violated, vec![Condition::MuEPositive]);
        let r = validate_relaxed(&p([1.0, -1.0, 0.0, 1.0, 0.0, 1.0, 1.0, 1.0]));
        assert_eq!(r.violated, vec![Condition::BulkEPositive]);
        assert_eq!(r.regime, Regime::Invalid);
    }

    #[test]
    fn gauge_validation_examples() {
        assert!(validate_gauge(&IsotropicParams::default()).valid);
        let e = p([1.0, 1.0, 0.0, 0.0, 0.0, 6.0, -6.0, -1.0]);
        let r = validate_gauge(&e);
        assert!(!r.valid);
        assert_eq!(r.violated, vec![Condition::A2NonNegative, Condition::A3NonNegative]);
        let r = validate_gauge(&p([1.0, 1.0, -0.1, 0.0, 0.0, 1.0, 1.0, 1.0]));
        assert_eq!(r.violated, vec![Condition::MuCNonNegative]);
    }

    #[test]
    fn stress_laws() {
        let q = p([1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 5.0, 2.0]);
        assert_eq!(sigma_iso(&Mat3::identity(), &q), Mat3::identity() * 2.0);
        let a = Mat3::from_row_slice(&[0.0, 1.0, 2.0, -1.0, 0.0, 3.0, -2.0, -3.0, 0.0]);
        assert_eq!(sigma_iso(&a, &q), Mat3::ZERO);
        let q2 = IsotropicParams { mu_c: 2.0, ..q };
        assert_eq!(sigma_iso(&a, &q2), a * 4.0);
        assert_eq!(microstress_s(&Mat3::identity(), &q), Mat3::identity() * 5.0);
        assert_eq!(microstress_s(&a, &q), Mat3::ZERO);
        let q3 = IsotropicParams { lambda_h: 0.0, ..q };
        assert_eq!(microstress_s(&Mat3::diag([1.0, 2.0, 3.0]), &q3), Mat3::diag([2.0, 4.0, 6.0]));
        assert_eq!(moment_m(&Mat3::identity(), &q), Mat3::identity() * 6.0);
        assert_eq!(moment_m(&a, &q), a * 5.0);
    }

    #[test]
    fn inverse_examples() {
        let q = p([1.0, 0.0, 0.7, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let e = inverse_strain_from_stress(&Mat3::identity(), &q).unwrap();
        assert!((e - Mat3::identity() * 0.5).max_abs() < 1e-15);
        let q0 = IsotropicParams { mu_c: 0.0, ..q };
        assert!(matches!(
            inverse_strain_from_stress(&Mat3::identity(), &q0),
            Err(ConstitutiveError::NotInvertible(_))
        ));
    }

    #[test]
    fn special_cases() {
        let base = p([1.0, 0.0, 0.3, 1.0, 0.0, 1.0, 1.0, 1.0]);
        let e = special_case_params(SpecialCase::Edelen, 3.0, &base, None).unwrap();
        assert_eq!((e.a1, e.a2, e.a3, e.mu_c), (3.0, 3.0, 1.0, 0.0));
        let h = special_case_params(SpecialCase::Einstein, 6.0, &base, None).unwrap();
        assert_eq!((h.a1, h.a2, h.a3, h.mu_c), (6.0, -6.0, -1.0, 0.0));
        let k = special_case_params(SpecialCase::PopovKroener, 0.0, &base, Some(1.0)).unwrap();
        assert!((k.a1 - 0.5).abs() < 1e-15 && (k.a2 - 0.5).abs() < 1e-15 && k.a3 == 0.0);
        assert!(special_case_params(SpecialCase::PopovKroener, 0.0, &base, None).is_err());
        let bad = IsotropicParams { lambda_e: -1.0, ..base };
        assert_eq!(
            special_case_params(SpecialCase::StrainGradient, 1.0, &bad, None),
            Err(ConstitutiveError::PoissonUndefined)
        );
    }

    #[test]
    fn bounds_examples() {
        let t = iso_to_tensors(&p([1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 2.0, 3.0]));
        let (lo, hi) = eigen_bounds(&t.c, Domain::Sym3).unwrap();
        assert!((lo - 2.0).abs() < 1e-12 && (hi - 2.0).abs() < 1e-12);
        let (lo, hi) = eigen_bounds(&t.lc, Domain::Full9).unwrap();
        assert!((lo - 1.0).abs() < 1e-12 && (hi - 9.0).abs() < 1e-12);
        let t = iso_to_tensors(&p([1.0, 1.0, 0.0, 1.0, 0.0, 1.0, 2.0, 3.0]));
        let (lo, hi) = eigen_bounds(&t.c, Domain::Sym3).unwrap();
        assert!((lo - 2.0).abs() < 1e-12 && (hi - 5.0).abs() < 1e-12);
    }

    #[test]
    fn aniso_rejects_asymmetric_h() {
        let t = iso_to_tensors(&p([1.0, 1.0, 0.5, 1.0, 0.0, 1.0, 2.0, 3.0]));
        let mut bad_h = t.h.clone();
        bad_h.set(0, 1, 0, 0, bad_h.get(0, 1, 0, 0) + 0.1);
        assert!(AnisoTensors::new(t.c.clone(), bad_h, t.lc.clone(), None).is_err());
        assert!(AnisoTensors::new(t.c, t.h, t.lc, None).is_ok());
    }
}
