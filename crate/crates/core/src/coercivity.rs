//! Discrete best constants of coercivity inequalities as generalized
//! eigenvalue problems `N x = λ D x` on finite-element subspaces.

use crate::assembly::{assemble_form, FormTerm, Operand, Unknowns};
use crate::constitutive::{iso_to_tensors, IsotropicParams};
use crate::fe::{DisplacementSpace, MicroDistortionSpace};
use crate::mesh::{build_box_mesh, MeshError};
use crate::solver::{solve_cg, solve_pcg, CgOptions, IncompleteCholesky, SolverError, DENSE_LIMIT};
use crate::sparse::{dot, CsrMatrix};
use crate::tensor::{Tensor4, Vec3};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CoercivityError {
    #[error("eigen-iteration stagnated after {steps} Krylov steps (relative residual {residual:.3e})")]
    Stagnation { steps: usize, residual: f64 },
    #[error("pencil dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("denominator vanishes on the whole space")]
    ZeroDenominator,
    #[error("at least two levels are required")]
    TooFewLevels,
    #[error("unknown inequality kind `{0}`")]
    UnknownKind(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// The inequalities as numerator/denominator pairs of squared norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InequalityKind {
    /// `‖P‖² ≤ c² (‖sym P‖² + ‖Curl P‖²)`
    SymCurlVsL2,
    /// `c² ‖P‖²_H(Curl) ≤ ‖sym P‖² + ‖Curl P‖²`
    SymCurlVsHCurl,
    /// `‖Curl P‖² ≤ c² ‖dev Curl P‖²`
    DevCurl,
    /// `‖P‖² ≤ c² (‖dev sym P‖² + ‖dev Curl P‖²)`
    DevSymDevCurl,
    /// `‖P‖² + ‖Curl P‖² ≤ c² (‖dev sym P‖² + ‖dev Curl P‖²)`
    DevSymDevCurlVsHCurl,
    /// `‖∇u‖² ≤ c² ‖dev sym ∇u‖²`
    DevSymGrad,
    /// `a (‖sym ∇u‖² + ‖sym P‖²) ≤ ⟨C sym(∇u−P), sym(∇u−P)⟩ + ⟨H sym P, sym P⟩`
    KornCombined,
    /// `a (‖∇u‖² + ‖dev sym P‖²) ≤ ⟨C sym(∇u−P), sym(∇u−P)⟩ + ⟨H dev sym P, dev sym P⟩`
    DevCombined,
}

impl InequalityKind {
    pub const ALL: [InequalityKind; 8] = [
        InequalityKind::SymCurlVsL2,
        InequalityKind::SymCurlVsHCurl,
        InequalityKind::DevCurl,
        InequalityKind::DevSymDevCurl,
        InequalityKind::DevSymDevCurlVsHCurl,
        InequalityKind::DevSymGrad,
        InequalityKind::KornCombined,
        InequalityKind::DevCombined,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InequalityKind::SymCurlVsL2 => "sym_curl_vs_l2",
            InequalityKind::SymCurlVsHCurl => "sym_curl_vs_hcurl",
            InequalityKind::DevCurl => "dev_curl",
            InequalityKind::DevSymDevCurl => "dev_sym_dev_curl",
            InequalityKind::DevSymDevCurlVsHCurl => "dev_sym_dev_curl_vs_hcurl",
            InequalityKind::DevSymGrad => "dev_sym_grad",
            InequalityKind::KornCombined => "korn_combined",
            InequalityKind::DevCombined => "dev_combined",
        }
    }

    pub fn uses_displacement(self) -> bool {
        matches!(
            self,
            InequalityKind::DevSymGrad | InequalityKind::KornCombined | InequalityKind::DevCombined
        )
    }

    pub fn uses_distortion(self) -> bool {
        self != InequalityKind::DevSymGrad
    }
}

impl fmt::Display for InequalityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InequalityKind {
    type Err = CoercivityError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        InequalityKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| CoercivityError::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantEstimate {
    pub lambda_min: f64,
    /// `λ_min^{-1/2}`
    pub constant: f64,
    pub level: usize,
    pub dofs: usize,
    /// Relative eigen-residual of the iterative path; zero for the dense path.
    pub residual: f64,
}

impl ConstantEstimate {
    fn new(lambda_min: f64, dofs: usize, residual: f64) -> Self {
        Self {
            lambda_min,
            constant: if lambda_min > 0.0 { lambda_min.powf(-0.5) } else { f64::INFINITY },
            level: 0,
            dofs,
            residual,
        }
    }
}

/// Material parameters for the combined inequalities when none are given.
pub fn default_combined_params() -> IsotropicParams {
    IsotropicParams {
        mu_e: 1.0,
        lambda_e: 1.0,
        mu_c: 0.0,
        mu_h: 1.0,
        lambda_h: 1.0,
        a1: 1.0,
        a2: 1.0,
        a3: 1.0,
    }
}

/// Builds `(N, D)` for `kind` over the given spaces. Spaces not used by the
/// kind are ignored; a missing space that is needed yields an empty pencil.
pub fn assemble_pencil(
    kind: InequalityKind,
    u: Option<&DisplacementSpace>,
    p: Option<&MicroDistortionSpace>,
    params: Option<&IsotropicParams>,
) -> (CsrMatrix, CsrMatrix) {
    use Operand::*;
    let unknowns = match (kind.uses_displacement(), kind.uses_distortion(), u, p) {
        (true, true, Some(u), Some(p)) => Unknowns::coupled(u, p),
        (true, false, Some(u), _) => Unknowns::displacement(u),
        (false, true, _, Some(p)) => Unknowns::distortion(p),
        _ => return (CsrMatrix::from_triplets(0, vec![]), CsrMatrix::from_triplets(0, vec![])),
    };
    let tensors = iso_to_tensors(params.unwrap_or(&default_combined_params()));
    let c_sym = Tensor4::from_linear_map(|x| tensors.c.apply(&x.sym()).sym());
    let d = |op| FormTerm::diagonal(None, op);
    let (num, den): (Vec<FormTerm>, Vec<FormTerm>) = match kind {
        InequalityKind::SymCurlVsL2 => (vec![d(SymP), d(CurlP)], vec![d(P)]),
        InequalityKind::SymCurlVsHCurl => (vec![d(SymP), d(CurlP)], vec![d(P), d(CurlP)]),
        InequalityKind::DevCurl => (vec![d(DevCurlP)], vec![d(CurlP)]),
        InequalityKind::DevSymDevCurl => (vec![d(DevSymP), d(DevCurlP)], vec![d(P)]),
        InequalityKind::DevSymDevCurlVsHCurl => (vec![d(DevSymP), d(DevCurlP)], vec![d(P), d(CurlP)]),
        InequalityKind::DevSymGrad => (vec![d(DevSymGradU)], vec![d(GradU)]),
        InequalityKind::KornCombined => (
            vec![
                FormTerm::diagonal(Some(&c_sym), Elastic),
                FormTerm::diagonal(Some(&tensors.h), SymP),
            ],
            vec![d(SymGradU), d(SymP)],
        ),
        InequalityKind::DevCombined => (
            vec![
                FormTerm::diagonal(Some(&c_sym), Elastic),
                FormTerm::diagonal(Some(&tensors.h), DevSymP),
            ],
            vec![d(GradU), d(DevSymP)],
        ),
    };
    (assemble_form(&unknowns, &num), assemble_form(&unknowns, &den))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Relative eigen-residual target of the iterative path.
    pub tol: f64,
    /// The iterative path also stops once the Ritz value moves by less than
    /// this relative amount over ten Krylov steps.
    pub stall_tol: f64,
    /// Spectral shift `σ` of the iterative operator `(N + σD)⁻¹ D`.
    pub shift: f64,
    pub max_krylov: usize,
    /// Use the dense path whenever the dimension is below this.
    pub dense_limit: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            stall_tol: 1e-7,
            shift: 0.0,
            max_krylov: 200,
            dense_limit: DENSE_LIMIT,
            seed: 7,
        }
    }
}

/// Sparse basis of a subspace shared by `ker N` and `ker D`, used to keep
/// Krylov iterates away from it.
#[derive(Debug, Clone)]
pub struct KernelBasis {
    columns: Vec<Vec<(usize, f64)>>,
    gram: CsrMatrix,
}

impl KernelBasis {
    pub fn new(dim: usize, columns: Vec<Vec<(usize, f64)>>) -> Self {
        let mut by_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dim];
        for (c, col) in columns.iter().enumerate() {
            for &(r, v) in col {
                by_row[r].push((c, v));
            }
        }
        let mut triplets = Vec::new();
        for entries in &by_row {
            for &(a, va) in entries {
                for &(b, vb) in entries {
                    triplets.push((a, b, va * vb));
                }
            }
        }
        let gram = CsrMatrix::from_triplets(columns.len(), triplets);
        Self { columns, gram }
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    /// `scale · K Kᵀ` with `K` the basis as columns.
    pub fn outer(&self, dim: usize, scale: f64) -> CsrMatrix {
        let mut triplets = Vec::new();
        for col in &self.columns {
            for &(a, va) in col {
                for &(b, vb) in col {
                    triplets.push((a, b, scale * va * vb));
                }
            }
        }
        CsrMatrix::from_triplets(dim, triplets)
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Euclidean-orthogonal projection onto the complement of the span.
    pub fn project(&self, x: &mut [f64]) -> Result<(), CoercivityError> {
        if self.columns.is_empty() {
            return Ok(());
        }
        let rhs: Vec<f64> = self.columns.iter().map(|c| c.iter().map(|&(r, v)| v * x[r]).sum()).collect();
        let coef = solve_cg(&self.gram, &rhs, CgOptions { tol: 1e-14, max_iter: None }, None)?.x;
        for (c, col) in coef.iter().zip(&self.columns) {
            for &(r, v) in col {
                x[r] -= c * v;
            }
        }
        Ok(())
    }
}

/// Row-wise gradients of interior nodal hat functions, the common kernel of
/// `‖Curl P‖²` and `‖dev Curl P‖²` on the edge space.
pub fn gradient_kernel(p: &MicroDistortionSpace) -> KernelBasis {
    let mesh = p.mesh();
    let mut slot = vec![None; mesh.vertices.len()];
    let mut count = 0;
    for (v, s) in slot.iter_mut().enumerate() {
        if !mesh.boundary_vertex[v] {
            *s = Some(count);
            count += 1;
        }
    }
    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); 3 * count];
    for (e, &[a, b]) in mesh.edges.iter().enumerate() {
        for row in 0..3 {
            if let Some(dof) = p.dof(e, row) {
                if let Some(sb) = slot[b] {
                    columns[3 * sb + row].push((dof, 1.0));
                }
                if let Some(sa) = slot[a] {
                    columns[3 * sa + row].push((dof, -1.0));
                }
            }
        }
    }
    KernelBasis::new(p.n_dofs(), columns)
}

/// The known shared kernel of a pencil, if any.
pub fn pencil_kernel(kind: InequalityKind, p: &MicroDistortionSpace) -> Option<KernelBasis> {
    (kind == InequalityKind::DevCurl).then(|| gradient_kernel(p))
}

/// Smallest `λ` of `N x = λ D x` over vectors with `D x ≠ 0`, with a dense
/// kernel reduction below the dense limit and a Krylov method above it.
/// Directions in `ker N` on which `D` does not vanish give `λ_min = 0`.
pub fn smallest_eigenvalue(n: &CsrMatrix, d: &CsrMatrix, opts: EigenOptions) -> Result<ConstantEstimate, CoercivityError> {
    smallest_eigenvalue_with_kernel(n, d, None, opts)
}

/// As [`smallest_eigenvalue`], projecting a known shared kernel out of the Krylov iterates.
pub fn smallest_eigenvalue_with_kernel(
    n: &CsrMatrix,
    d: &CsrMatrix,
    kernel: Option<&KernelBasis>,
    opts: EigenOptions,
) -> Result<ConstantEstimate, CoercivityError> {
    if n.dim() != d.dim() {
        return Err(CoercivityError::DimensionMismatch(n.dim(), d.dim()));
    }
    let dim = n.dim();
    if dim == 0 {
        return Err(CoercivityError::ZeroDenominator);
    }
    let (lambda, residual) = if dim < opts.dense_limit {
        (dense_smallest(&n.to_dense(), &d.to_dense())?.0, 0.0)
    } else {
        krylov_smallest(n, d, kernel, opts)?
    };
    Ok(ConstantEstimate::new(lambda, dim, residual))
}

const KERNEL_REL: f64 = 1e-10;

/// Dense reduction: eigen-decompose `N`, discard its kernel after checking
/// that `D` vanishes there, and invert the remaining pencil. Returns the
/// eigenvalue and a coefficient vector attaining it.
pub fn dense_smallest(n: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<(f64, Vec<f64>), CoercivityError> {
    let dim = n.nrows();
    let ns = (n + n.transpose()) * 0.5;
    let ds = (d + d.transpose()) * 0.5;
    let eig = SymmetricEigen::new(ns);
    let top = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let dscale = ds.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if dscale == 0.0 {
        return Err(CoercivityError::ZeroDenominator);
    }
    let cut = KERNEL_REL * top.max(f64::MIN_POSITIVE);
    let (kernel, range): (Vec<usize>, Vec<usize>) = (0..dim).partition(|&i| eig.eigenvalues[i] <= cut);
    if !kernel.is_empty() {
        let w = eig.eigenvectors.select_columns(kernel.iter());
        let wdw = w.transpose() * &ds * &w;
        let defect = wdw.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if defect > KERNEL_REL * dscale {
            let sym = SymmetricEigen::new((&wdw + wdw.transpose()) * 0.5);
            let k = sym.eigenvalues.imax();
            let x = &w * sym.eigenvectors.column(k);
            return Ok((0.0, x.as_slice().to_vec()));
        }
    }
    if range.is_empty() {
        return Err(CoercivityError::ZeroDenominator);
    }
    let v = eig.eigenvectors.select_columns(range.iter());
    let scale: Vec<f64> = range.iter().map(|&i| eig.eigenvalues[i].sqrt().recip()).collect();
    let mut m = v.transpose() * &ds * &v;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            m[(i, j)] *= scale[i] * scale[j];
        }
    }
    let sym = SymmetricEigen::new((&m + m.transpose()) * 0.5);
    let k = sym.eigenvalues.imax();
    let mu = sym.eigenvalues[k];
    if mu <= 0.0 {
        return Err(CoercivityError::ZeroDenominator);
    }
    let y: Vec<f64> = sym.eigenvectors.column(k).iter().zip(&scale).map(|(a, s)| a * s).collect();
    let x = &v * nalgebra::DVector::from_vec(y);
    Ok((1.0 / mu, x.as_slice().to_vec()))
}

fn axpy_into(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

/// Krylov subspace of `(N + σD)⁻¹ D`, `D`-orthonormalized, followed by
/// Rayleigh–Ritz through [`dense_smallest`]. Ritz values are Rayleigh
/// quotients, so every returned value bounds the true minimum from above.
fn krylov_smallest(
    n: &CsrMatrix,
    d: &CsrMatrix,
    kernel: Option<&KernelBasis>,
    opts: EigenOptions,
) -> Result<(f64, f64), CoercivityError> {
    let dim = n.dim();
    let mut op = if opts.shift != 0.0 {
        n.linear_combination(1.0, d, opts.shift)
    } else {
        n.clone()
    };
    if let Some(k) = kernel {
        // On the complement of the shared kernel this leaves the pencil unchanged
        // and makes the inner systems definite.
        let diag = op.diagonal();
        let scale = diag.iter().sum::<f64>() / diag.len() as f64;
        op = op.linear_combination(1.0, &k.outer(dim, scale), 1.0);
    }
    let inner = CgOptions {
        tol: 1e-9,
        max_iter: Some(20 * dim),
    };
    let pre = IncompleteCholesky::new(&op)?;
    let apply = |x: &[f64]| -> Result<Vec<f64>, CoercivityError> {
        let rhs = d.matvec(x);
        if rhs.iter().all(|v| *v == 0.0) {
            return Ok(vec![0.0; dim]);
        }
        let mut y = solve_pcg(&op, &rhs, inner, None, &pre)?.x;
        if let Some(k) = kernel {
            k.project(&mut y)?;
        }
        Ok(y)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut start: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    if let Some(k) = kernel {
        k.project(&mut start)?;
    }
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut dbasis: Vec<Vec<f64>> = Vec::new();
    let mut nbasis: Vec<Vec<f64>> = Vec::new();
    let mut next = apply(&start)?;
    let mut last_residual = f64::INFINITY;
    let mut history: Vec<f64> = Vec::new();
    let max_steps = opts.max_krylov.min(dim);
    while basis.len() < max_steps {
        let mut w = next;
        for _ in 0..2 {
            for (v, dv) in basis.iter().zip(&dbasis) {
                let c = dot(dv, &w);
                axpy_into(-c, v, &mut w);
            }
        }
        let dw = d.matvec(&w);
        let wn = dot(&w, &dw);
        if !(wn > 0.0) {
            break;
        }
        let s = wn.sqrt().recip();
        w.iter_mut().for_each(|v| *v *= s);
        let dw: Vec<f64> = dw.into_iter().map(|v| v * s).collect();
        nbasis.push(n.matvec(&w));
        next = apply(&w)?;
        basis.push(w);
        dbasis.push(dw);
        let m = basis.len();
        if m.is_multiple_of(5) || m == max_steps {
            let (lambda, resid) = ritz(&basis, &nbasis, &dbasis)?;
            last_residual = resid;
            history.push(lambda);
            let stalled = history.len() >= 3 && {
                let old = history[history.len() - 3];
                (old - lambda).abs() <= opts.stall_tol * lambda.abs()
            };
            if resid <= opts.tol || stalled {
                return Ok((lambda, resid));
            }
        }
    }
    if !basis.is_empty() {
        let (lambda, resid) = ritz(&basis, &nbasis, &dbasis)?;
        if resid <= opts.tol {
            return Ok((lambda, resid));
        }
        last_residual = resid;
    }
    Err(CoercivityError::Stagnation {
        steps: basis.len(),
        residual: last_residual,
    })
}

/// Ritz value and the relative residual `‖N x − λ D x‖ / ‖N x‖` of its vector.
fn ritz(basis: &[Vec<f64>], nbasis: &[Vec<f64>], dbasis: &[Vec<f64>]) -> Result<(f64, f64), CoercivityError> {
    let m = basis.len();
    let nt = DMatrix::from_fn(m, m, |i, j| dot(&basis[i], &nbasis[j]));
    let dt = DMatrix::from_fn(m, m, |i, j| dot(&basis[i], &dbasis[j]));
    let (lambda, y) = dense_smallest(&nt, &dt)?;
    let dim = basis[0].len();
    let mut nx = vec![0.0; dim];
    let mut dx = vec![0.0; dim];
    for k in 0..m {
        axpy_into(y[k], &nbasis[k], &mut nx);
        axpy_into(y[k], &dbasis[k], &mut dx);
    }
    let nn = dot(&nx, &nx).sqrt();
    let mut r = nx;
    axpy_into(-lambda, &dx, &mut r);
    let resid = if nn > 0.0 { dot(&r, &r).sqrt() / nn } else { dot(&r, &r).sqrt() };
    Ok((lambda, resid))
}

/// `λ_min` on unit-box meshes with `2^level` cells per side for each level.
/// `constrained = false` drops the boundary conditions of the edge space.
pub fn monotonicity_study(
    kind: InequalityKind,
    levels: &[usize],
    lo: Vec3,
    hi: Vec3,
    params: Option<&IsotropicParams>,
    constrained: bool,
    opts: EigenOptions,
) -> Result<Vec<ConstantEstimate>, CoercivityError> {
    if levels.len() < 2 {
        return Err(CoercivityError::TooFewLevels);
    }
    levels
        .iter()
        .map(|&level| {
            let cells = 1usize << level;
            let mesh = build_box_mesh([cells; 3], lo, hi)?;
            let us = DisplacementSpace::new(&mesh);
            let ps = if constrained {
                MicroDistortionSpace::new(&mesh)
            } else {
                MicroDistortionSpace::unconstrained(&mesh)
            };
            let (n, d) = assemble_pencil(kind, Some(&us), Some(&ps), params);
            let kernel = pencil_kernel(kind, &ps);
            let mut est = smallest_eigenvalue_with_kernel(&n, &d, kernel.as_ref(), opts)?;
            est.level = level;
            Ok(est)
        })
        .collect()
}

/// Whether `λ_min(ℓ+1) ≤ λ_min(ℓ) + tol` across consecutive rows.
pub fn is_non_increasing(rows: &[ConstantEstimate], tol: f64) -> bool {
    rows.windows(2).all(|w| w[1].lambda_min <= w[0].lambda_min + tol)
}

pub fn estimates_csv(rows: &[(InequalityKind, ConstantEstimate)]) -> String {
    let mut s = String::from("spec,level,dofs,lambda_min,constant\n");
    for (k, e) in rows {
        s.push_str(&format!(
            "{},{},{},{:.12e},{:.12e}\n",
            k, e.level, e.dofs, e.lambda_min, e.constant
        ));
    }
    s
}
