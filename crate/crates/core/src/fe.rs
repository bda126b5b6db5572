//! Conforming finite-element spaces: vector P1 displacements and row-wise
//! lowest-order edge (Whitney) elements for the micro-distortion.

use crate::mesh::{BoxMesh, LOCAL_EDGES};
use crate::tensor::{cross3, dot3, sub3, Mat3, Vec3};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FeError {
    #[error("coefficient vector has length {got}, space has {expected} dofs")]
    LengthMismatch { expected: usize, got: usize },
    #[error("element id {0} out of range")]
    ElementOutOfRange(usize),
    #[error("fields live on different meshes")]
    MeshMismatch,
}

/// Vector P1 functions vanishing on the boundary.
#[derive(Debug, Clone)]
pub struct DisplacementSpace<'m> {
    mesh: &'m BoxMesh,
    vertex_slot: Vec<Option<usize>>,
    n_dofs: usize,
}

/// Three rows of lowest-order edge functions; constrained spaces have zero
/// tangential trace on the boundary.
#[derive(Debug, Clone)]
pub struct MicroDistortionSpace<'m> {
    mesh: &'m BoxMesh,
    edge_slot: Vec<Option<usize>>,
    n_dofs: usize,
}

pub fn build_spaces(mesh: &BoxMesh) -> (DisplacementSpace<'_>, MicroDistortionSpace<'_>) {
    (DisplacementSpace::new(mesh), MicroDistortionSpace::new(mesh))
}

fn slots(boundary: &[bool], keep_boundary: bool) -> (Vec<Option<usize>>, usize) {
    let mut next = 0;
    let map = boundary
        .iter()
        .map(|&b| {
            if b && !keep_boundary {
                None
            } else {
                next += 1;
                Some(next - 1)
            }
        })
        .collect();
    (map, next)
}

impl<'m> DisplacementSpace<'m> {
    pub fn new(mesh: &'m BoxMesh) -> Self {
        let (vertex_slot, n) = slots(&mesh.boundary_vertex, false);
        Self {
            mesh,
            vertex_slot,
            n_dofs: 3 * n,
        }
    }

    pub fn mesh(&self) -> &'m BoxMesh {
        self.mesh
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    /// Global dof of component `comp` at vertex `v`.
    pub fn dof(&self, v: usize, comp: usize) -> Option<usize> {
        self.vertex_slot[v].map(|s| 3 * s + comp)
    }

    /// Dofs of tet `t`, ordered (local vertex, component).
    pub fn local_dofs(&self, t: usize) -> [Option<usize>; 12] {
        let tet = self.mesh.tets[t];
        std::array::from_fn(|i| self.dof(tet[i / 3], i % 3))
    }
}

impl<'m> MicroDistortionSpace<'m> {
    pub fn new(mesh: &'m BoxMesh) -> Self {
        let (edge_slot, n) = slots(&mesh.boundary_edge, false);
        Self {
            mesh,
            edge_slot,
            n_dofs: 3 * n,
        }
    }

    /// Edge space without the tangential boundary condition.
    pub fn unconstrained(mesh: &'m BoxMesh) -> Self {
        let (edge_slot, n) = slots(&mesh.boundary_edge, true);
        Self {
            mesh,
            edge_slot,
            n_dofs: 3 * n,
        }
    }

    pub fn mesh(&self) -> &'m BoxMesh {
        self.mesh
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    /// Global dof of row `row` on edge `e`.
    pub fn dof(&self, e: usize, row: usize) -> Option<usize> {
        self.edge_slot[e].map(|s| 3 * s + row)
    }

    /// Dofs of tet `t`, ordered (local edge, row).
    pub fn local_dofs(&self, t: usize) -> [Option<usize>; 18] {
        let te = &self.mesh.tet_to_edges[t];
        std::array::from_fn(|i| self.dof(te[i / 3].id, i % 3))
    }

    /// Whitney function of local edge `m` in tet `t`, oriented along the global edge.
    pub fn edge_shape(&self, t: usize, m: usize, bary: [f64; 4]) -> Vec3 {
        edge_shape(self.mesh, t, m, bary)
    }

    /// Constant curl of the Whitney function of local edge `m`.
    pub fn edge_curl(&self, t: usize, m: usize) -> Vec3 {
        edge_curl(self.mesh, t, m)
    }
}

pub(crate) fn edge_shape(mesh: &BoxMesh, t: usize, m: usize, bary: [f64; 4]) -> Vec3 {
    let (a, b) = LOCAL_EDGES[m];
    let g = &mesh.geometry[t].grads;
    let s = mesh.tet_to_edges[t][m].sign as f64;
    std::array::from_fn(|d| s * (bary[a] * g[b][d] - bary[b] * g[a][d]))
}

pub(crate) fn edge_curl(mesh: &BoxMesh, t: usize, m: usize) -> Vec3 {
    let (a, b) = LOCAL_EDGES[m];
    let g = &mesh.geometry[t].grads;
    let s = 2.0 * mesh.tet_to_edges[t][m].sign as f64;
    cross3(g[a], g[b]).map(|v| s * v)
}

/// Coefficient vector over a space.
#[derive(Debug, Clone)]
pub struct DiscreteField<'a, S> {
    space: &'a S,
    coeffs: Vec<f64>,
}

pub trait FeSpace {
    fn n_dofs(&self) -> usize;
    fn mesh(&self) -> &BoxMesh;
}

impl FeSpace for DisplacementSpace<'_> {
    fn n_dofs(&self) -> usize {
        self.n_dofs
    }
    fn mesh(&self) -> &BoxMesh {
        self.mesh
    }
}

impl FeSpace for MicroDistortionSpace<'_> {
    fn n_dofs(&self) -> usize {
        self.n_dofs
    }
    fn mesh(&self) -> &BoxMesh {
        self.mesh
    }
}

impl<'a, S: FeSpace> DiscreteField<'a, S> {
    pub fn new(space: &'a S, coeffs: Vec<f64>) -> Result<Self, FeError> {
        if coeffs.len() != space.n_dofs() {
            return Err(FeError::LengthMismatch {
                expected: space.n_dofs(),
                got: coeffs.len(),
            });
        }
        Ok(Self { space, coeffs })
    }

    pub fn zeros(space: &'a S) -> Self {
        Self {
            space,
            coeffs: vec![0.0; space.n_dofs()],
        }
    }

    pub fn space(&self) -> &'a S {
        self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    fn check_element(&self, t: usize) -> Result<(), FeError> {
        if t >= self.space.mesh().n_tets() {
            return Err(FeError::ElementOutOfRange(t));
        }
        Ok(())
    }
}

pub type NodalField<'a, 'm> = DiscreteField<'a, DisplacementSpace<'m>>;
pub type EdgeField<'a, 'm> = DiscreteField<'a, MicroDistortionSpace<'m>>;

impl NodalField<'_, '_> {
    pub fn eval_u(&self, t: usize, bary: [f64; 4]) -> Result<Vec3, FeError> {
        self.check_element(t)?;
        let dofs = self.space.local_dofs(t);
        let mut u = [0.0; 3];
        for (i, d) in dofs.iter().enumerate() {
            if let Some(d) = d {
                u[i % 3] += bary[i / 3] * self.coeffs[*d];
            }
        }
        Ok(u)
    }

    /// Constant gradient `(∇u)_ij = ∂_j u_i` on tet `t`.
    pub fn eval_grad_u(&self, t: usize) -> Result<Mat3, FeError> {
        self.check_element(t)?;
        let g = &self.space.mesh.geometry[t].grads;
        let dofs = self.space.local_dofs(t);
        let mut m = Mat3::ZERO;
        for (i, d) in dofs.iter().enumerate() {
            if let Some(d) = d {
                let (a, c) = (i / 3, i % 3);
                for j in 0..3 {
                    m.0[c][j] += self.coeffs[*d] * g[a][j];
                }
            }
        }
        Ok(m)
    }
}

impl EdgeField<'_, '_> {
    pub fn eval_p(&self, t: usize, bary: [f64; 4]) -> Result<Mat3, FeError> {
        self.check_element(t)?;
        let dofs = self.space.local_dofs(t);
        let mut p = Mat3::ZERO;
        for m in 0..6 {
            let w = self.space.edge_shape(t, m, bary);
            for r in 0..3 {
                if let Some(d) = dofs[3 * m + r] {
                    let c = self.coeffs[d];
                    for j in 0..3 {
                        p.0[r][j] += c * w[j];
                    }
                }
            }
        }
        Ok(p)
    }

    /// Row-wise curl, constant on tet `t`.
    pub fn eval_curl_p(&self, t: usize) -> Result<Mat3, FeError> {
        self.check_element(t)?;
        let dofs = self.space.local_dofs(t);
        let mut p = Mat3::ZERO;
        for m in 0..6 {
            let w = self.space.edge_curl(t, m);
            for r in 0..3 {
                if let Some(d) = dofs[3 * m + r] {
                    let c = self.coeffs[d];
                    for j in 0..3 {
                        p.0[r][j] += c * w[j];
                    }
                }
            }
        }
        Ok(p)
    }
}

/// Vertex-value interpolant; boundary values of `g` are discarded.
pub fn interpolate_u<'a, 'm>(space: &'a DisplacementSpace<'m>, g: impl Fn(Vec3) -> Vec3) -> NodalField<'a, 'm> {
    let mut f = DiscreteField::zeros(space);
    for (v, x) in space.mesh.vertices.iter().enumerate() {
        if space.vertex_slot[v].is_some() {
            let val = g(*x);
            for c in 0..3 {
                f.coeffs[space.dof(v, c).unwrap()] = val[c];
            }
        }
    }
    f
}

const GAUSS2: [f64; 2] = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];

/// Tangential edge moments `∫_e (row_i G)·t ds`, 2-point Gauss per edge.
pub fn interpolate_p<'a, 'm>(space: &'a MicroDistortionSpace<'m>, g: impl Fn(Vec3) -> Mat3) -> EdgeField<'a, 'm> {
    let mesh = space.mesh;
    let mut f = DiscreteField::zeros(space);
    for (e, &[a, b]) in mesh.edges.iter().enumerate() {
        if space.edge_slot[e].is_none() {
            continue;
        }
        let xa = mesh.vertices[a];
        let t = sub3(mesh.vertices[b], xa);
        let mut m = [0.0; 3];
        for s in GAUSS2 {
            let gv = g(std::array::from_fn(|d| xa[d] + s * t[d]));
            for r in 0..3 {
                m[r] += 0.5 * dot3(gv.row(r), t);
            }
        }
        for r in 0..3 {
            f.coeffs[space.dof(e, r).unwrap()] = m[r];
        }
    }
    f
}

/// Exact embedding of `∇u` into the edge space: the dof of row `i` on edge `a→b` is `u_i(b) − u_i(a)`.
pub fn gradient_inclusion<'a, 'm>(
    u: &NodalField<'_, 'm>,
    space: &'a MicroDistortionSpace<'m>,
) -> Result<EdgeField<'a, 'm>, FeError> {
    if !std::ptr::eq(u.space.mesh, space.mesh) {
        return Err(FeError::MeshMismatch);
    }
    let us = u.space;
    let val = |v: usize, c: usize| us.dof(v, c).map_or(0.0, |d| u.coeffs[d]);
    let mut f = DiscreteField::zeros(space);
    for (e, &[a, b]) in space.mesh.edges.iter().enumerate() {
        for r in 0..3 {
            if let Some(d) = space.dof(e, r) {
                f.coeffs[d] = val(b, r) - val(a, r);
            }
        }
    }
    Ok(f)
}

/// Coarse nodal field expressed in the refined space.
pub fn prolongate_u<'a, 'm>(coarse: &NodalField<'_, '_>, fine: &'a DisplacementSpace<'m>) -> NodalField<'a, 'm> {
    let cm = coarse.space.mesh;
    interpolate_u(fine, |x| {
        let t = cm.locate(x);
        coarse.eval_u(t, cm.barycentric(t, x)).expect("located element")
    })
}

/// Coarse edge field expressed in the refined space. Each fine edge lies in a
/// single coarse tet, where the coarse field is linear.
pub fn prolongate_p<'a, 'm>(coarse: &EdgeField<'_, '_>, fine: &'a MicroDistortionSpace<'m>) -> EdgeField<'a, 'm> {
    let cm = coarse.space.mesh;
    let fm = fine.mesh;
    let mut f = DiscreteField::zeros(fine);
    for (e, &[a, b]) in fm.edges.iter().enumerate() {
        if fine.edge_slot[e].is_none() {
            continue;
        }
        let xa = fm.vertices[a];
        let t = sub3(fm.vertices[b], xa);
        let mid = std::array::from_fn(|d| xa[d] + 0.5 * t[d]);
        let host = cm.locate(mid);
        let mut m = [0.0; 3];
        for s in GAUSS2 {
            let x = std::array::from_fn(|d| xa[d] + s * t[d]);
            let pv = coarse.eval_p(host, cm.barycentric(host, x)).expect("located element");
            for r in 0..3 {
                m[r] += 0.5 * dot3(pv.row(r), t);
            }
        }
        for r in 0..3 {
            f.coeffs[fine.dof(e, r).unwrap()] = m[r];
        }
    }
    f
}
