//! Galerkin assembly of the quadratic forms and load functionals.
//!
//! Unknowns are numbered with the displacement block first, then the
//! micro-distortion (or elastic distortion) block.

use crate::constitutive::AnisoTensors;
use crate::fe::{DisplacementSpace, MicroDistortionSpace};
use crate::mesh::BoxMesh;
use crate::quadrature::QUAD4;
use crate::sparse::CsrMatrix;
use crate::tensor::{frobenius, Mat3, Tensor4, Vec3};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Relaxed,
    FurtherRelaxed,
    Gauge,
}

impl std::str::FromStr for ModelKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "relaxed" => Ok(ModelKind::Relaxed),
            "further_relaxed" => Ok(ModelKind::FurtherRelaxed),
            "gauge" => Ok(ModelKind::Gauge),
            other => Err(format!("unknown model '{other}'")),
        }
    }
}

/// Pointwise quantity entering a quadratic form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operand {
    /// `∇u − P`
    Elastic,
    P,
    SymP,
    DevSymP,
    CurlP,
    DevCurlP,
    GradU,
    SymGradU,
    DevSymGradU,
}

/// `∫ ⟨T.left(w), right(w̃)⟩`, plus the same with `w` and `w̃` swapped when `paired`.
#[derive(Debug, Clone, Copy)]
pub struct FormTerm<'t> {
    pub tensor: Option<&'t Tensor4>,
    pub left: Operand,
    pub right: Operand,
    pub paired: bool,
}

impl<'t> FormTerm<'t> {
    pub fn new(tensor: Option<&'t Tensor4>, left: Operand, right: Operand) -> Self {
        Self {
            tensor,
            left,
            right,
            paired: false,
        }
    }

    /// `∫ ⟨T.op(w), op(w̃)⟩`.
    pub fn diagonal(tensor: Option<&'t Tensor4>, op: Operand) -> Self {
        Self::new(tensor, op, op)
    }
}

/// The spaces carrying the unknowns of a form.
#[derive(Debug, Clone, Copy)]
pub struct Unknowns<'a, 'm> {
    pub u: Option<&'a DisplacementSpace<'m>>,
    pub p: Option<&'a MicroDistortionSpace<'m>>,
}

impl<'a, 'm> Unknowns<'a, 'm> {
    pub fn coupled(u: &'a DisplacementSpace<'m>, p: &'a MicroDistortionSpace<'m>) -> Self {
        Self { u: Some(u), p: Some(p) }
    }

    pub fn displacement(u: &'a DisplacementSpace<'m>) -> Self {
        Self { u: Some(u), p: None }
    }

    pub fn distortion(p: &'a MicroDistortionSpace<'m>) -> Self {
        Self { u: None, p: Some(p) }
    }

    pub fn mesh(&self) -> &'m BoxMesh {
        match (self.u, self.p) {
            (Some(u), _) => u.mesh(),
            (None, Some(p)) => p.mesh(),
            (None, None) => panic!("form without unknowns"),
        }
    }

    pub fn u_dofs(&self) -> usize {
        self.u.map_or(0, |u| u.n_dofs())
    }

    pub fn dim(&self) -> usize {
        self.u_dofs() + self.p.map_or(0, |p| p.n_dofs())
    }

    fn local_basis(&self, t: usize) -> Vec<(usize, Basis)> {
        let mut out = Vec::with_capacity(30);
        if let Some(u) = self.u {
            for (i, d) in u.local_dofs(t).into_iter().enumerate() {
                if let Some(d) = d {
                    out.push((d, Basis::U { vertex: i / 3, comp: i % 3 }));
                }
            }
        }
        if let Some(p) = self.p {
            let off = self.u_dofs();
            for (i, d) in p.local_dofs(t).into_iter().enumerate() {
                if let Some(d) = d {
                    out.push((off + d, Basis::P { edge: i / 3, row: i % 3 }));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
enum Basis {
    U { vertex: usize, comp: usize },
    P { edge: usize, row: usize },
}

fn row_matrix(row: usize, v: Vec3) -> Mat3 {
    let mut m = Mat3::ZERO;
    m.0[row] = v;
    m
}

fn operand_value(mesh: &BoxMesh, t: usize, op: Operand, b: Basis, bary: [f64; 4]) -> Option<Mat3> {
    match b {
        Basis::U { vertex, comp } => {
            let g = row_matrix(comp, mesh.geometry[t].grads[vertex]);
            match op {
                Operand::Elastic | Operand::GradU => Some(g),
                Operand::SymGradU => Some(g.sym()),
                Operand::DevSymGradU => Some(g.dev_sym()),
                _ => None,
            }
        }
        Basis::P { edge, row } => match op {
            Operand::Elastic => Some(-row_matrix(row, crate::fe::edge_shape(mesh, t, edge, bary))),
            Operand::P => Some(row_matrix(row, crate::fe::edge_shape(mesh, t, edge, bary))),
            Operand::SymP => Some(row_matrix(row, crate::fe::edge_shape(mesh, t, edge, bary)).sym()),
            Operand::DevSymP => Some(row_matrix(row, crate::fe::edge_shape(mesh, t, edge, bary)).dev_sym()),
            Operand::CurlP => Some(row_matrix(row, crate::fe::edge_curl(mesh, t, edge))),
            Operand::DevCurlP => Some(row_matrix(row, crate::fe::edge_curl(mesh, t, edge)).dev()),
            _ => None,
        },
    }
}

struct ElementMatrix {
    dofs: Vec<usize>,
    k: Vec<f64>,
}

fn element_matrix(unknowns: &Unknowns, terms: &[FormTerm], t: usize) -> ElementMatrix {
    let mesh = unknowns.mesh();
    let basis = unknowns.local_basis(t);
    let n = basis.len();
    let mut k = vec![0.0; n * n];
    let vol = mesh.geometry[t].volume;
    let mut lv: Vec<Option<Mat3>> = vec![None; n];
    let mut rv: Vec<Option<Mat3>> = vec![None; n];
    for (bary, w) in QUAD4 {
        let w = w * vol;
        for term in terms {
            for (i, (_, b)) in basis.iter().enumerate() {
                lv[i] = operand_value(mesh, t, term.left, *b, bary).map(|x| match term.tensor {
                    Some(tt) => tt.apply(&x),
                    None => x,
                });
                rv[i] = operand_value(mesh, t, term.right, *b, bary);
            }
            for i in 0..n {
                for j in 0..n {
                    // Row i tests with basis i, column j is the trial function.
                    let mut s = 0.0;
                    if let (Some(l), Some(r)) = (&lv[j], &rv[i]) {
                        s += frobenius(l, r);
                    }
                    if term.paired {
                        if let (Some(l), Some(r)) = (&lv[i], &rv[j]) {
                            s += frobenius(l, r);
                        }
                    }
                    k[i * n + j] += w * s;
                }
            }
        }
    }
    ElementMatrix {
        dofs: basis.into_iter().map(|(d, _)| d).collect(),
        k,
    }
}

/// Assembles an arbitrary sum of form terms. Element matrices are computed in
/// parallel on the current rayon pool and merged in element order.
pub fn assemble_form(unknowns: &Unknowns, terms: &[FormTerm]) -> CsrMatrix {
    let mesh = unknowns.mesh();
    let elements: Vec<ElementMatrix> = (0..mesh.n_tets())
        .into_par_iter()
        .map(|t| element_matrix(unknowns, terms, t))
        .collect();
    let mut triplets = Vec::with_capacity(elements.iter().map(|e| e.k.len()).sum());
    for e in &elements {
        let n = e.dofs.len();
        for i in 0..n {
            for j in 0..n {
                triplets.push((e.dofs[i], e.dofs[j], e.k[i * n + j]));
            }
        }
    }
    CsrMatrix::from_triplets(unknowns.dim(), triplets)
}

/// Terms of the model's quadratic form.
pub fn model_terms(model: ModelKind, t: &AnisoTensors) -> Vec<FormTerm<'_>> {
    match model {
        ModelKind::Relaxed => vec![
            FormTerm::diagonal(Some(&t.c), Operand::Elastic),
            FormTerm::diagonal(Some(&t.h), Operand::SymP),
            FormTerm::diagonal(Some(&t.lc), Operand::CurlP),
        ],
        ModelKind::FurtherRelaxed => vec![
            FormTerm::diagonal(Some(&t.c), Operand::Elastic),
            FormTerm::diagonal(Some(&t.h), Operand::DevSymP),
            FormTerm::diagonal(Some(&t.lc), Operand::DevCurlP),
        ],
        ModelKind::Gauge => {
            let mut terms = vec![
                FormTerm::diagonal(Some(&t.c), Operand::P),
                FormTerm::diagonal(Some(&t.lc), Operand::CurlP),
            ];
            if t.b.max_abs() > 0.0 {
                terms.push(FormTerm {
                    tensor: Some(&t.b),
                    left: Operand::CurlP,
                    right: Operand::P,
                    paired: true,
                });
            }
            terms
        }
    }
}

pub fn assemble_relaxed(u: &DisplacementSpace, p: &MicroDistortionSpace, t: &AnisoTensors) -> CsrMatrix {
    assemble_form(&Unknowns::coupled(u, p), &model_terms(ModelKind::Relaxed, t))
}

pub fn assemble_further_relaxed(u: &DisplacementSpace, p: &MicroDistortionSpace, t: &AnisoTensors) -> CsrMatrix {
    assemble_form(&Unknowns::coupled(u, p), &model_terms(ModelKind::FurtherRelaxed, t))
}

pub fn assemble_gauge(e: &MicroDistortionSpace, t: &AnisoTensors) -> CsrMatrix {
    assemble_form(&Unknowns::distortion(e), &model_terms(ModelKind::Gauge, t))
}

pub type VectorLoad<'f> = &'f (dyn Fn(Vec3) -> Vec3 + Sync);
pub type TensorLoad<'f> = &'f (dyn Fn(Vec3) -> Mat3 + Sync);

/// `∫ f·ũ + ⟨M, P̃⟩` over the unknowns; a missing load contributes nothing.
pub fn assemble_load_on(unknowns: &Unknowns, f: Option<VectorLoad>, m: Option<TensorLoad>) -> Vec<f64> {
    let mesh = unknowns.mesh();
    let locals: Vec<Vec<(usize, f64)>> = (0..mesh.n_tets())
        .into_par_iter()
        .map(|t| {
            let basis = unknowns.local_basis(t);
            let mut vals = vec![0.0; basis.len()];
            let vol = mesh.geometry[t].volume;
            for (bary, w) in QUAD4 {
                let x = mesh.point_in(t, bary);
                let fv = f.map(|f| f(x));
                let mv = m.map(|m| m(x));
                for (k, (_, b)) in basis.iter().enumerate() {
                    let contrib = match *b {
                        Basis::U { vertex, comp } => fv.map_or(0.0, |fv| fv[comp] * bary[vertex]),
                        Basis::P { .. } => match (&mv, operand_value(mesh, t, Operand::P, *b, bary)) {
                            (Some(mv), Some(phi)) => frobenius(mv, &phi),
                            _ => 0.0,
                        },
                    };
                    vals[k] += w * vol * contrib;
                }
            }
            basis.iter().map(|(d, _)| *d).zip(vals).collect()
        })
        .collect();
    let mut out = vec![0.0; unknowns.dim()];
    for local in locals {
        for (d, v) in local {
            out[d] += v;
        }
    }
    out
}

pub fn assemble_load(
    u: &DisplacementSpace,
    p: &MicroDistortionSpace,
    f: VectorLoad,
    m: TensorLoad,
) -> Vec<f64> {
    assemble_load_on(&Unknowns::coupled(u, p), Some(f), Some(m))
}

/// `∫ ⟨σ⁰, ẽ⟩`.
pub fn assemble_gauge_load(e: &MicroDistortionSpace, sigma0: TensorLoad) -> Vec<f64> {
    assemble_load_on(&Unknowns::distortion(e), None, Some(sigma0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::{iso_to_tensors, IsotropicParams};
    use crate::fe::build_spaces;
    use crate::mesh::build_box_mesh;

    fn params() -> IsotropicParams {
        IsotropicParams {
            mu_e: 1.0,
            lambda_e: 0.5,
            mu_c: 0.0,
            mu_h: 0.8,
            lambda_h: 0.3,
            a1: 1.0,
            a2: 0.7,
            a3: 0.4,
        }
    }

    #[test]
    fn single_cell_relaxed_system_is_spd() {
        let m = build_box_mesh([1; 3], [0.0; 3], [1.0; 3]).unwrap();
        let (u, p) = build_spaces(&m);
        let a = assemble_relaxed(&u, &p, &iso_to_tensors(&params()));
        assert_eq!(a.dim(), 3);
        let eig = nalgebra::SymmetricEigen::new(a.to_dense()).eigenvalues;
        assert!(eig.iter().all(|&l| l > 0.0));
    }

    #[test]
    fn constant_body_force_load() {
        let m = build_box_mesh([2; 3], [0.0; 3], [1.0; 3]).unwrap();
        let (u, p) = build_spaces(&m);
        let f = |_: Vec3| [1.0, 2.0, 3.0];
        let zero = |_: Vec3| Mat3::ZERO;
        let b = assemble_load(&u, &p, &f, &zero);
        let centre = m.vertices.iter().position(|x| *x == [0.5; 3]).unwrap();
        let support: f64 = (0..m.n_tets())
            .filter(|&t| m.tets[t].contains(&centre))
            .map(|t| m.geometry[t].volume)
            .sum();
        for c in 0..3 {
            assert!((b[c] - (c + 1) as f64 * support / 4.0).abs() < 1e-15);
        }
        assert!(b[3..].iter().all(|v| *v == 0.0));
    }
}
