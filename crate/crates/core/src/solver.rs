//! Jacobi-preconditioned conjugate gradients, a dense fallback, and energy evaluation.

use crate::sparse::{axpy, dot, norm, CsrMatrix};
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DENSE_LIMIT: usize = 500;

#[derive(Debug, Error, PartialEq)]
pub enum SolverError {
    #[error("no convergence after {iterations} iterations (relative residual {residual:.3e})")]
    MaxIterations { iterations: usize, residual: f64 },
    #[error("matrix is not positive definite: curvature {curvature:.3e} at iteration {iteration}")]
    Breakdown { iteration: usize, curvature: f64 },
    #[error("dimension mismatch: matrix {matrix}, vector {vector}")]
    DimensionMismatch { matrix: usize, vector: usize },
    #[error("dense factorization failed: matrix is singular")]
    Singular,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    pub relative_residual: f64,
    pub x: Vec<f64>,
    pub energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    pub tol: f64,
    /// Defaults to `20 · dim`.
    pub max_iter: Option<usize>,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: None,
        }
    }
}

/// `½ xᵀ A x − bᵀ x`.
pub fn energy_value(a: &CsrMatrix, b: &[f64], x: &[f64]) -> f64 {
    0.5 * a.bilinear(x, x) - dot(b, x)
}

/// Approximate inverse applied once per CG iteration.
pub trait Preconditioner: Sync {
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

/// Inverse diagonal; zero diagonal entries act as identity.
#[derive(Debug, Clone)]
pub struct Jacobi(Vec<f64>);

impl Jacobi {
    pub fn new(a: &CsrMatrix) -> Result<Self, SolverError> {
        a.diagonal()
            .into_iter()
            .map(|d| {
                if d < 0.0 {
                    Err(SolverError::Breakdown {
                        iteration: 0,
                        curvature: d,
                    })
                } else if d == 0.0 {
                    Ok(1.0)
                } else {
                    Ok(1.0 / d)
                }
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Jacobi)
    }
}

impl Preconditioner for Jacobi {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.iter_mut().zip(r.iter().zip(&self.0)).for_each(|(zi, (ri, di))| *zi = ri * di);
    }
}

/// Zero-fill incomplete Cholesky factor `L Lᵀ ≈ A + s·diag(A)`, with the
/// diagonal shift `s` raised until every pivot is positive.
#[derive(Debug, Clone)]
pub struct IncompleteCholesky {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    shift: f64,
}

impl IncompleteCholesky {
    pub fn new(a: &CsrMatrix) -> Result<Self, SolverError> {
        let mut shift = 0.0;
        for _ in 0..30 {
            if let Some(f) = Self::factor(a, shift) {
                return Ok(f);
            }
            shift = if shift == 0.0 { 1e-4 } else { shift * 4.0 };
        }
        Err(SolverError::Singular)
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    fn factor(a: &CsrMatrix, shift: f64) -> Option<Self> {
        let n = a.dim();
        let mut row_ptr = vec![0usize];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for i in 0..n {
            for (j, v) in a.row(i) {
                if j < i {
                    cols.push(j);
                    vals.push(v);
                } else if j == i {
                    cols.push(j);
                    vals.push(v * (1.0 + shift));
                }
            }
            if cols.last() != Some(&i) {
                return None;
            }
            row_ptr.push(cols.len());
        }
        for i in 0..n {
            let (ri0, ri1) = (row_ptr[i], row_ptr[i + 1]);
            for p in ri0..ri1 {
                let k = cols[p];
                // Dot product of row i and row k over columns below k.
                let (mut a_pos, mut b_pos) = (ri0, row_ptr[k]);
                let b_end = row_ptr[k + 1] - 1;
                let mut acc = 0.0;
                while a_pos < p && b_pos < b_end {
                    match cols[a_pos].cmp(&cols[b_pos]) {
                        std::cmp::Ordering::Less => a_pos += 1,
                        std::cmp::Ordering::Greater => b_pos += 1,
                        std::cmp::Ordering::Equal => {
                            acc += vals[a_pos] * vals[b_pos];
                            a_pos += 1;
                            b_pos += 1;
                        }
                    }
                }
                if k == i {
                    let piv = vals[p] - acc;
                    if !(piv > 0.0) {
                        return None;
                    }
                    vals[p] = piv.sqrt();
                } else {
                    vals[p] = (vals[p] - acc) / vals[row_ptr[k + 1] - 1];
                }
            }
        }
        Some(Self {
            row_ptr,
            cols,
            vals,
            shift,
        })
    }
}

impl Preconditioner for IncompleteCholesky {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let n = r.len();
        for i in 0..n {
            let end = self.row_ptr[i + 1] - 1;
            let mut s = r[i];
            for p in self.row_ptr[i]..end {
                s -= self.vals[p] * z[self.cols[p]];
            }
            z[i] = s / self.vals[end];
        }
        for i in (0..n).rev() {
            let end = self.row_ptr[i + 1] - 1;
            z[i] /= self.vals[end];
            let zi = z[i];
            for p in self.row_ptr[i]..end {
                z[self.cols[p]] -= self.vals[p] * zi;
            }
        }
    }
}

/// Solves `A x = b` to `‖b − A x‖ ≤ tol ‖b‖` with Jacobi preconditioning.
/// Consistent singular semidefinite systems are accepted.
pub fn solve_cg(a: &CsrMatrix, b: &[f64], opts: CgOptions, x0: Option<&[f64]>) -> Result<SolveReport, SolverError> {
    let pre = Jacobi::new(a)?;
    solve_pcg(a, b, opts, x0, &pre)
}

/// Preconditioned conjugate gradients.
pub fn solve_pcg(
    a: &CsrMatrix,
    b: &[f64],
    opts: CgOptions,
    x0: Option<&[f64]>,
    pre: &dyn Preconditioner,
) -> Result<SolveReport, SolverError> {
    let n = a.dim();
    if b.len() != n {
        return Err(SolverError::DimensionMismatch { matrix: n, vector: b.len() });
    }
    if let Some(x0) = x0 {
        if x0.len() != n {
            return Err(SolverError::DimensionMismatch { matrix: n, vector: x0.len() });
        }
    }
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(SolveReport {
            iterations: 0,
            relative_residual: 0.0,
            x: vec![0.0; n],
            energy: 0.0,
        });
    }
    let max_iter = opts.max_iter.unwrap_or(20 * n.max(1));
    let mut x = x0.map_or_else(|| vec![0.0; n], |v| v.to_vec());
    let mut r = b.to_vec();
    let mut ap = vec![0.0; n];
    a.matvec_into(&x, &mut ap);
    axpy(-1.0, &ap, &mut r);
    let mut z = vec![0.0; n];
    pre.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let target = opts.tol * bnorm;
    let mut it = 0;
    loop {
        if norm(&r) <= target {
            // Confirm against the true residual; restart from it if drift crept in.
            a.matvec_into(&x, &mut ap);
            let mut rt = b.to_vec();
            axpy(-1.0, &ap, &mut rt);
            if norm(&rt) <= target {
                let res = norm(&rt) / bnorm;
                let energy = energy_value(a, b, &x);
                return Ok(SolveReport {
                    iterations: it,
                    relative_residual: res,
                    x,
                    energy,
                });
            }
            r = rt;
            pre.apply(&r, &mut z);
            p = z.clone();
            rz = dot(&r, &z);
        }
        if it >= max_iter {
            return Err(SolverError::MaxIterations {
                iterations: it,
                residual: norm(&r) / bnorm,
            });
        }
        a.matvec_into(&p, &mut ap);
        let curv = dot(&p, &ap);
        if !(curv > 0.0) {
            return Err(SolverError::Breakdown {
                iteration: it,
                curvature: curv,
            });
        }
        let alpha = rz / curv;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        pre.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.iter_mut().zip(&z).for_each(|(pi, zi)| *pi = zi + beta * *pi);
        it += 1;
    }
}

/// Dense Cholesky solve with an LU fallback, intended for small systems and oracles.
pub fn solve_dense(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>, SolverError> {
    if b.len() != a.dim() {
        return Err(SolverError::DimensionMismatch { matrix: a.dim(), vector: b.len() });
    }
    let m: DMatrix<f64> = a.to_dense();
    let rhs = DVector::from_column_slice(b);
    if let Some(ch) = m.clone().cholesky() {
        return Ok(ch.solve(&rhs).as_slice().to_vec());
    }
    m.lu().solve(&rhs).map(|x| x.as_slice().to_vec()).ok_or(SolverError::Singular)
}

/// CG, or the dense path below [`DENSE_LIMIT`] when `prefer_dense` is set.
pub fn solve(a: &CsrMatrix, b: &[f64], opts: CgOptions, prefer_dense: bool) -> Result<SolveReport, SolverError> {
    if prefer_dense && a.dim() < DENSE_LIMIT {
        let x = solve_dense(a, b)?;
        let mut r = b.to_vec();
        axpy(-1.0, &a.matvec(&x), &mut r);
        let bn = norm(b);
        let energy = energy_value(a, b, &x);
        return Ok(SolveReport {
            iterations: 0,
            relative_residual: if bn == 0.0 { 0.0 } else { norm(&r) / bn },
            x,
            energy,
        });
    }
    solve_cg(a, b, opts, None)
}
