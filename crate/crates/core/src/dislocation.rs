//! Dislocation density from discrete fields, its conservation law, translation
//! gauge transforms, and the closed-form moment-stress algebra.

use crate::assembly::{assemble_form, assemble_gauge, FormTerm, Operand, Unknowns};
use crate::constitutive::{AnisoTensors, IsotropicParams};
use crate::fe::{gradient_inclusion, DiscreteField, EdgeField, FeError, NodalField};
use crate::mesh::BoxMesh;
use crate::poly::{DegreeOverflow, Poly, PolyMat3};
use crate::sparse::{dot, CsrMatrix};
use crate::tensor::{kronecker, levi_civita, Mat3, Tensor4, Vec3};
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DislocationError {
    #[error("expected {expected} element values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Fe(#[from] FeError),
    #[error(transparent)]
    Degree(#[from] DegreeOverflow),
}

/// Which field the density is derived from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaSource {
    /// `α = −Curl P`
    Distortion,
    /// `α = Curl e`
    Elastic,
}

/// Element-wise constant dislocation density.
#[derive(Debug, Clone)]
pub struct DislocationField<'m> {
    mesh: &'m BoxMesh,
    values: Vec<Mat3>,
}

impl<'m> DislocationField<'m> {
    pub fn new(mesh: &'m BoxMesh, values: Vec<Mat3>) -> Result<Self, DislocationError> {
        if values.len() != mesh.n_tets() {
            return Err(DislocationError::LengthMismatch { expected: mesh.n_tets(), got: values.len() });
        }
        Ok(Self { mesh, values })
    }

    pub fn mesh(&self) -> &'m BoxMesh {
        self.mesh
    }

    pub fn values(&self) -> &[Mat3] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Mat3] {
        &mut self.values
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().map(Mat3::max_abs).fold(0.0, f64::max)
    }
}

pub fn alpha_from_field<'m>(field: &EdgeField<'_, 'm>, source: AlphaSource) -> DislocationField<'m> {
    let mesh = field.space().mesh();
    let sign = match source {
        AlphaSource::Distortion => -1.0,
        AlphaSource::Elastic => 1.0,
    };
    let values = (0..mesh.n_tets())
        .map(|t| field.eval_curl_p(t).expect("element in range") * sign)
        .collect();
    DislocationField { mesh, values }
}

/// Largest row flux through closed element unions, each divided by
/// `max |α| · surface area`.
#[derive(Debug, Clone, PartialEq)]
pub struct BianchiReport {
    pub max_element_flux: f64,
    pub max_vertex_flux: f64,
    pub max_box_flux: f64,
    pub worst_vertex: Option<usize>,
    /// Lower and upper cell corners (exclusive upper) of the worst box.
    pub worst_box: Option<([usize; 3], [usize; 3])>,
    pub vertices_checked: usize,
    pub boxes_checked: usize,
}

impl BianchiReport {
    pub fn max_flux(&self) -> f64 {
        self.max_element_flux.max(self.max_vertex_flux).max(self.max_box_flux)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_flux() <= tol
    }
}

fn row_flux(alpha: &Mat3, normal: Vec3, area: f64) -> Vec3 {
    alpha.mul_vec(normal).map(|v| v * area)
}

fn relative(flux: Vec3, scale: f64) -> f64 {
    let m = flux.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if scale > 0.0 {
        m / scale
    } else {
        m
    }
}

const SIDES: usize = 6;

/// Grid coordinates of a vertex.
fn grid_coords(mesh: &BoxMesh, v: usize) -> [usize; 3] {
    let nx = mesh.n[0] + 1;
    let ny = mesh.n[1] + 1;
    [v % nx, (v / nx) % ny, v / (nx * ny)]
}

/// Side index `2·axis + {0: low, 1: high}` of a cell that a tet face lies on.
fn cell_side(mesh: &BoxMesh, cell: [usize; 3], face: [usize; 3]) -> Option<usize> {
    let g = face.map(|v| grid_coords(mesh, v));
    (0..3).find_map(|axis| {
        [0, 1].into_iter().find_map(|hi| {
            let plane = cell[axis] + hi;
            g.iter().all(|c| c[axis] == plane).then_some(2 * axis + hi)
        })
    })
}

pub fn bianchi_check(alpha: &DislocationField) -> BianchiReport {
    let mesh = alpha.mesh;
    let amax = alpha.max_norm();
    let n = mesh.n;

    let mut max_element_flux = 0.0_f64;
    let mut star_flux = vec![[0.0; 3]; mesh.vertices.len()];
    let mut star_area = vec![0.0; mesh.vertices.len()];
    let mut side_flux = vec![[[0.0; 3]; SIDES]; n[0] * n[1] * n[2]];
    for (t, verts) in mesh.tets.iter().enumerate() {
        let a = &alpha.values[t];
        let c = t / 6;
        let cell = [c % n[0], (c / n[0]) % n[1], c / (n[0] * n[1])];
        let mut own = [0.0; 3];
        let mut own_area = 0.0;
        for (skip, &v) in verts.iter().enumerate() {
            let (normal, area) = mesh.face_normal_area(t, skip);
            let f = row_flux(a, normal, area);
            for r in 0..3 {
                own[r] += f[r];
                star_flux[v][r] += f[r];
            }
            own_area += area;
            star_area[v] += area;
            let face: Vec<usize> = (0..4).filter(|&k| k != skip).map(|k| verts[k]).collect();
            if let Some(side) = cell_side(mesh, cell, [face[0], face[1], face[2]]) {
                for r in 0..3 {
                    side_flux[c][side][r] += f[r];
                }
            }
        }
        max_element_flux = max_element_flux.max(relative(own, amax * own_area));
    }

    let mut max_vertex_flux = 0.0_f64;
    let mut worst_vertex = None;
    let mut vertices_checked = 0;
    for v in (0..mesh.vertices.len()).filter(|&v| !mesh.boundary_vertex[v]) {
        vertices_checked += 1;
        let r = relative(star_flux[v], amax * star_area[v]);
        if worst_vertex.is_none() || r > max_vertex_flux {
            max_vertex_flux = r;
            worst_vertex = Some(v);
        }
    }

    let h = [0, 1, 2].map(|a| (mesh.hi[a] - mesh.lo[a]) / n[a] as f64);
    let cell_index = |i: usize, j: usize, k: usize| i + n[0] * (j + n[1] * k);
    let mut max_box_flux = 0.0_f64;
    let mut worst_box = None;
    let mut boxes_checked = 0;
    for lo in cell_ranges_lo(n) {
        for hi in cell_ranges_hi(n, lo) {
            boxes_checked += 1;
            let mut total = [0.0; 3];
            for k in lo[2]..hi[2] {
                for j in lo[1]..hi[1] {
                    for i in lo[0]..hi[0] {
                        let p = [i, j, k];
                        let c = cell_index(i, j, k);
                        for axis in 0..3 {
                            for (side, on_surface) in
                                [(2 * axis, p[axis] == lo[axis]), (2 * axis + 1, p[axis] + 1 == hi[axis])]
                            {
                                if on_surface {
                                    for r in 0..3 {
                                        total[r] += side_flux[c][side][r];
                                    }
                                }
                            }
                        }
                    }
                }
            }
            let len = [0, 1, 2].map(|a| (hi[a] - lo[a]) as f64 * h[a]);
            let area = 2.0 * (len[0] * len[1] + len[1] * len[2] + len[0] * len[2]);
            let r = relative(total, amax * area);
            if worst_box.is_none() || r > max_box_flux {
                max_box_flux = r;
                worst_box = Some((lo, hi));
            }
        }
    }

    BianchiReport {
        max_element_flux,
        max_vertex_flux,
        max_box_flux,
        worst_vertex,
        worst_box,
        vertices_checked,
        boxes_checked,
    }
}

fn cell_ranges_lo(n: [usize; 3]) -> impl Iterator<Item = [usize; 3]> {
    (0..n[2]).flat_map(move |k| (0..n[1]).flat_map(move |j| (0..n[0]).map(move |i| [i, j, k])))
}

fn cell_ranges_hi(n: [usize; 3], lo: [usize; 3]) -> impl Iterator<Item = [usize; 3]> {
    (lo[2] + 1..=n[2])
        .flat_map(move |k| (lo[1] + 1..=n[1]).flat_map(move |j| (lo[0] + 1..=n[0]).map(move |i| [i, j, k])))
}

/// `(u + τ, P + ∇τ)`.
pub fn gauge_transform<'a, 'm>(
    u: &NodalField<'a, 'm>,
    p: &EdgeField<'a, 'm>,
    tau: &NodalField<'_, 'm>,
) -> Result<(NodalField<'a, 'm>, EdgeField<'a, 'm>), FeError> {
    if !std::ptr::eq(u.space().mesh(), tau.space().mesh()) || !std::ptr::eq(u.space().mesh(), p.space().mesh()) {
        return Err(FeError::MeshMismatch);
    }
    if tau.coeffs().len() != u.coeffs().len() {
        return Err(FeError::LengthMismatch { expected: u.coeffs().len(), got: tau.coeffs().len() });
    }
    let shifted: Vec<f64> = u.coeffs().iter().zip(tau.coeffs()).map(|(a, b)| a + b).collect();
    let grad_tau = gradient_inclusion(tau, p.space())?;
    let moved: Vec<f64> = p.coeffs().iter().zip(grad_tau.coeffs()).map(|(a, b)| a + b).collect();
    Ok((DiscreteField::new(u.space(), shifted)?, DiscreteField::new(p.space(), moved)?))
}

/// Discrete `e = ∇u − P` in the edge space.
pub fn elastic_distortion<'a, 'm>(u: &NodalField<'_, 'm>, p: &EdgeField<'a, 'm>) -> Result<EdgeField<'a, 'm>, FeError> {
    let grad = gradient_inclusion(u, p.space())?;
    let coeffs = grad.coeffs().iter().zip(p.coeffs()).map(|(g, q)| g - q).collect();
    DiscreteField::new(p.space(), coeffs)
}

fn half_energy(a: &CsrMatrix, x: &[f64]) -> f64 {
    0.5 * dot(x, &a.matvec(x))
}

/// Stored energy of the gauge model at the elastic distortion `e`.
pub fn gauge_energy(e: &EdgeField, t: &AnisoTensors) -> f64 {
    half_energy(&assemble_gauge(e.space(), t), e.coeffs())
}

/// `½ ∫ ⟨ℍ sym P, sym P⟩`.
pub fn micro_energy(p: &EdgeField, h: &Tensor4) -> f64 {
    let a = assemble_form(&Unknowns::distortion(p.space()), &[FormTerm::diagonal(Some(h), Operand::SymP)]);
    half_energy(&a, p.coeffs())
}

/// Moment-stress coefficients in the three-parameter Λ form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TeisseyreCoeffs {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
}

/// Curvature moduli `(α1, α2, α3)` weighting dev sym, skew and trace of `Curl P`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LazarCoeffs {
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
}

impl LazarCoeffs {
    pub fn new(alpha1: f64, alpha2: f64, alpha3: f64) -> Self {
        Self { alpha1, alpha2, alpha3 }
    }

    pub fn from_params(p: &IsotropicParams) -> Self {
        Self::new(p.a1, p.a2, p.a3)
    }
}

pub fn lazar_from_teisseyre(t: TeisseyreCoeffs) -> LazarCoeffs {
    LazarCoeffs {
        alpha1: t.t2 - t.t3,
        alpha2: t.t2 - t.t3 - 2.0 * t.t1,
        alpha3: (2.0 * t.t3 + t.t2) / 3.0,
    }
}

pub fn teisseyre_from_lazar(l: LazarCoeffs) -> TeisseyreCoeffs {
    let t3 = l.alpha3 - l.alpha1 / 3.0;
    TeisseyreCoeffs {
        t1: 0.5 * (l.alpha1 - l.alpha2),
        t2: l.alpha1 + t3,
        t3,
    }
}

/// Third-order tensor indexed `[p][l][k]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tensor3(pub [[[f64; 3]; 3]; 3]);

impl Tensor3 {
    pub fn get(&self, p: usize, l: usize, k: usize) -> f64 {
        self.0[p][l][k]
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().flatten().fold(0.0, |a, v| a.max(v.abs()))
    }
}

/// `Λ_plk = t1 α_rn(ε_prn δ_kl − ε_krn δ_pl) + t2 ε_kpn α_ln + t3(ε_pln α_kn − ε_kln α_pn)`.
pub fn lambda_tensor(alpha: &Mat3, t: TeisseyreCoeffs) -> Tensor3 {
    let a = &alpha.0;
    let mut out = [[[0.0; 3]; 3]; 3];
    for (p, slab) in out.iter_mut().enumerate() {
        for (l, row) in slab.iter_mut().enumerate() {
            for (k, entry) in row.iter_mut().enumerate() {
                let mut s = 0.0;
                for n in 0..3 {
                    for r in 0..3 {
                        s += t.t1
                            * a[r][n]
                            * (levi_civita(p, r, n) * kronecker(k, l) - levi_civita(k, r, n) * kronecker(p, l));
                    }
                    s += t.t2 * levi_civita(k, p, n) * a[l][n];
                    s += t.t3 * (levi_civita(p, l, n) * a[k][n] - levi_civita(k, l, n) * a[p][n]);
                }
                *entry = s;
            }
        }
    }
    Tensor3(out)
}

/// `m_kl = ½ ε_kmn Λ_mln`.
pub fn m_from_lambda(lambda: &Tensor3) -> Mat3 {
    Mat3::from_fn(|k, l| {
        let mut s = 0.0;
        for m in 0..3 {
            for n in 0..3 {
                s += levi_civita(k, m, n) * lambda.get(m, l, n);
            }
        }
        0.5 * s
    })
}

/// `t3 tr(Curl P)·1 + 2 t1 skew Curl P + (t2 − t3)(Curl P)ᵀ`.
pub fn teisseyre_moment(curl_p: &Mat3, t: TeisseyreCoeffs) -> Mat3 {
    Mat3::identity() * (t.t3 * curl_p.trace()) + curl_p.skew() * (2.0 * t.t1) + curl_p.transpose() * (t.t2 - t.t3)
}

fn check_cubic(field: &PolyMat3) -> Result<(), DegreeOverflow> {
    field.check_degree(3)
}

/// `α1 dev sym Curl P + α2 skew Curl P + α3 tr(Curl P)·1` as a polynomial field.
pub fn moment_poly(alphas: LazarCoeffs, p: &PolyMat3) -> Result<PolyMat3, DegreeOverflow> {
    check_cubic(p)?;
    let c = p.curl();
    let devsym = c.sym().dev().scale(alphas.alpha1);
    let skew = c.skew().scale(alphas.alpha2);
    let trace = PolyMat3::spherical(&c.trace().scale(alphas.alpha3));
    Ok(&(&devsym + &skew) + &trace)
}

/// `|skew Curl m|` at `x` for the moment `m` built from `P`.
pub fn einstein_symmetry_check(alphas: LazarCoeffs, p: &PolyMat3, x: Vec3) -> Result<f64, DegreeOverflow> {
    Ok(moment_poly(alphas, p)?.curl().skew().eval(x).norm())
}

/// `Curl((Curl F)ᵀ)` as a polynomial field.
pub fn incompatibility(field: &PolyMat3) -> Result<PolyMat3, DegreeOverflow> {
    check_cubic(field)?;
    Ok(field.curl().transpose().curl())
}

pub fn inc_operator(field: &PolyMat3, x: Vec3) -> Result<Mat3, DegreeOverflow> {
    Ok(incompatibility(field)?.eval(x))
}

/// Dense polynomial of total degree ≤ `degree` with uniform coefficients in [-1, 1].
pub fn random_poly(rng: &mut impl Rng, degree: u32) -> Poly {
    let mut p = Poly::zero();
    for a in 0..=degree {
        for b in 0..=degree - a {
            for c in 0..=degree - a - b {
                p = &p + &Poly::monomial(rng.gen_range(-1.0..1.0), [a, b, c]);
            }
        }
    }
    p
}

pub fn random_poly_field(rng: &mut impl Rng, degree: u32, symmetric: bool) -> PolyMat3 {
    let f = PolyMat3::from_fn(|_, _| random_poly(rng, degree));
    if symmetric {
        f.sym()
    } else {
        f
    }
}

/// One parameter family of the symmetry verification.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryRow {
    pub family: String,
    pub alphas: LazarCoeffs,
    pub symmetric_input: bool,
    pub max_skew: f64,
    /// Whether the moment balance is expected to stay symmetric.
    pub expect_zero: bool,
    pub passed: bool,
}

/// Families: general `P` with `(−6, 6, 1)`, symmetric `P` with `α1 = −α2`,
/// and symmetric `P` with `α1 = α2 = 1, α3 = 0`.
pub fn symmetry_study(rng: &mut impl Rng, samples: usize, zero_tol: f64, witness_tol: f64) -> Vec<SymmetryRow> {
    let families = [
        ("trace_coupled", LazarCoeffs::new(-6.0, 6.0, 1.0), false, true),
        ("opposite_pair", LazarCoeffs::new(1.0, -1.0, 3.0 / 7.0), true, true),
        ("equal_pair", LazarCoeffs::new(1.0, 1.0, 0.0), true, false),
    ];
    families
        .into_iter()
        .map(|(name, alphas, symmetric_input, expect_zero)| {
            let mut max_skew = 0.0_f64;
            for _ in 0..samples {
                let p = random_poly_field(rng, 3, symmetric_input);
                let x = [0, 1, 2].map(|_| rng.gen_range(-1.0..1.0));
                let s = einstein_symmetry_check(alphas, &p, x).expect("cubic input");
                max_skew = max_skew.max(s);
            }
            let passed = if expect_zero { max_skew <= zero_tol } else { max_skew > witness_tol };
            SymmetryRow { family: name.to_string(), alphas, symmetric_input, max_skew, expect_zero, passed }
        })
        .collect()
}

pub fn symmetry_csv(rows: &[SymmetryRow]) -> String {
    let mut s = String::from("family,alpha1,alpha2,alpha3,symmetric_input,max_skew,verdict\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{:e},{}\n",
            r.family,
            r.alphas.alpha1,
            r.alphas.alpha2,
            r.alphas.alpha3,
            r.symmetric_input,
            r.max_skew,
            if r.passed { "pass" } else { "fail" }
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn teisseyre_condition_maps_to_einstein_relations() {
        let l = lazar_from_teisseyre(TeisseyreCoeffs { t1: 2.0, t2: 1.0, t3: -1.0 });
        assert_eq!((l.alpha1, l.alpha2), (2.0, -2.0));
        assert!((l.alpha3 + 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn lambda_contraction_matches_moment_form() {
        let alpha = Mat3::from_fn(|i, j| (i as f64 + 1.0) * 0.3 - j as f64 * 0.7 + (i * j) as f64 * 0.11);
        let t = TeisseyreCoeffs { t1: 0.4, t2: -1.3, t3: 0.9 };
        let m = m_from_lambda(&lambda_tensor(&alpha, t));
        let expected = teisseyre_moment(&(alpha * -1.0), t);
        assert!((m - expected).max_abs() < 1e-13);
    }
}
