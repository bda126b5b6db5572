//! Manufactured-solution convergence studies for the relaxed and
//! further-relaxed models.

use crate::assembly::{assemble_form, assemble_load_on, model_terms, ModelKind, TensorLoad, Unknowns, VectorLoad};
use crate::constitutive::AnisoTensors;
use crate::fe::{build_spaces, DiscreteField};
use crate::jet::Jet;
use crate::mesh::{build_box_mesh, BoxMesh, MeshError};
use crate::quadrature::conical_rule;
use crate::solver::{solve_cg, CgOptions, SolverError};
use crate::tensor::{levi_civita, Mat3, Vec3};
use rayon::prelude::*;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StudyError {
    #[error("exact fields violate the boundary conditions (defect {0:.3e})")]
    BoundaryViolation(f64),
    #[error("the manufactured study covers the relaxed and further-relaxed models only")]
    UnsupportedModel,
    #[error("at least one level is required")]
    NoLevels,
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Smooth exact displacement and micro-distortion, evaluated on jets.
pub trait ExactFields: Sync {
    fn u(&self, x: [Jet; 3]) -> [Jet; 3];
    fn p(&self, x: [Jet; 3]) -> [[Jet; 3]; 3];
}

/// Sine bubbles on a box: `u_i = c_i ∏ sin(π s_k)` and
/// `P_ij = d_ij (1 + s_j) ∏_{k≠j} sin(π s_k)` with `s` the unit-box coordinates.
/// Both vanish in the sense required by the boundary conditions.
#[derive(Debug, Clone, Copy)]
pub struct SineBubbles {
    pub lo: Vec3,
    pub hi: Vec3,
    pub c: [f64; 3],
    pub d: [[f64; 3]; 3],
}

impl SineBubbles {
    pub fn unit_cube() -> Self {
        Self {
            lo: [0.0; 3],
            hi: [1.0; 3],
            c: [1.0, -0.5, 0.75],
            d: [[0.8, -0.3, 0.5], [0.2, 1.0, -0.6], [-0.4, 0.35, 0.9]],
        }
    }

    fn unit(&self, x: [Jet; 3]) -> [Jet; 3] {
        std::array::from_fn(|k| (x[k] + (-self.lo[k])) * (1.0 / (self.hi[k] - self.lo[k])))
    }
}

impl ExactFields for SineBubbles {
    fn u(&self, x: [Jet; 3]) -> [Jet; 3] {
        let s = self.unit(x);
        let b = (s[0] * PI).sin() * (s[1] * PI).sin() * (s[2] * PI).sin();
        self.c.map(|c| b * c)
    }

    fn p(&self, x: [Jet; 3]) -> [[Jet; 3]; 3] {
        let s = self.unit(x);
        let sn = s.map(|v| (v * PI).sin());
        let col: [Jet; 3] = std::array::from_fn(|j| {
            let (a, b) = ((j + 1) % 3, (j + 2) % 3);
            sn[a] * sn[b] * (s[j] + 1.0)
        });
        std::array::from_fn(|i| std::array::from_fn(|j| col[j] * self.d[i][j]))
    }
}

fn values_u(ex: &dyn ExactFields, x: Vec3) -> Vec3 {
    ex.u(Jet::point(x)).map(|j| j.v)
}

fn values_p(ex: &dyn ExactFields, x: Vec3) -> Mat3 {
    let p = ex.p(Jet::point(x));
    Mat3::from_fn(|i, j| p[i][j].v)
}

fn curl_from_derivatives(dp: &[Mat3; 3]) -> Mat3 {
    // (Curl P)_mn = ε_npq ∂_p P_mq
    Mat3::from_fn(|m, n| {
        let mut s = 0.0;
        for p in 0..3 {
            for q in 0..3 {
                s += levi_civita(n, p, q) * dp[p].0[m][q];
            }
        }
        s
    })
}

/// Moment-stress map applied to `Curl P` and microstress map applied to `P` for each model.
fn moment_map(model: ModelKind, t: &AnisoTensors, x: &Mat3) -> Mat3 {
    match model {
        ModelKind::FurtherRelaxed => t.lc.apply(&x.dev()).dev(),
        _ => t.lc.apply(x),
    }
}

fn micro_map(model: ModelKind, t: &AnisoTensors, p: &Mat3) -> Mat3 {
    match model {
        ModelKind::FurtherRelaxed => t.h.apply(&p.dev_sym()).dev_sym(),
        _ => t.h.apply(&p.sym()),
    }
}

/// Closed-form loads `f = −Div σ` and `M = Curl(moment) − σ + microstress`.
pub fn strong_loads(model: ModelKind, t: &AnisoTensors, ex: &dyn ExactFields, x: Vec3) -> (Vec3, Mat3) {
    let pt = Jet::point(x);
    let u = ex.u(pt);
    let p = ex.p(pt);
    let pv = Mat3::from_fn(|i, j| p[i][j].v);
    let grad_u = Mat3::from_fn(|k, l| u[k].d[l]);
    let e = grad_u - pv;
    let de: [Mat3; 3] = std::array::from_fn(|j| Mat3::from_fn(|k, l| u[k].h[j][l] - p[k][l].d[j]));
    let mut f = [0.0; 3];
    for (j, dej) in de.iter().enumerate() {
        let ds = t.c.apply(dej);
        for i in 0..3 {
            f[i] -= ds.0[i][j];
        }
    }
    // ∂_k Curl P from second derivatives of P.
    let dcurl: [Mat3; 3] = std::array::from_fn(|k| {
        let dp: [Mat3; 3] = std::array::from_fn(|q| Mat3::from_fn(|a, b| p[a][b].h[k][q]));
        curl_from_derivatives(&dp)
    });
    let dx: [Mat3; 3] = dcurl.map(|d| moment_map(model, t, &d));
    let curl_x = curl_from_derivatives(&dx);
    let m = curl_x - t.c.apply(&e) + micro_map(model, t, &pv);
    (f, m)
}

fn fd_grad(g: impl Fn(Vec3) -> Vec3, x: Vec3, h: f64) -> Mat3 {
    let mut out = Mat3::ZERO;
    for l in 0..3 {
        let mut xp = x;
        let mut xm = x;
        xp[l] += h;
        xm[l] -= h;
        let (a, b) = (g(xp), g(xm));
        for k in 0..3 {
            out.0[k][l] = (a[k] - b[k]) / (2.0 * h);
        }
    }
    out
}

fn fd_partials(g: &dyn Fn(Vec3) -> Mat3, x: Vec3, h: f64) -> [Mat3; 3] {
    std::array::from_fn(|k| {
        let mut xp = x;
        let mut xm = x;
        xp[k] += h;
        xm[k] -= h;
        (g(xp) - g(xm)) * (0.5 / h)
    })
}

/// Loads from nested central differences of the field values only.
pub fn strong_loads_fd(model: ModelKind, t: &AnisoTensors, ex: &dyn ExactFields, x: Vec3, h: f64) -> (Vec3, Mat3) {
    let e = |y: Vec3| fd_grad(|z| values_u(ex, z), y, h) - values_p(ex, y);
    let sigma = |y: Vec3| t.c.apply(&e(y));
    let ds = fd_partials(&sigma, x, h);
    let f: Vec3 = std::array::from_fn(|i| -(0..3).map(|j| ds[j].0[i][j]).sum::<f64>());
    let curl_p = |y: Vec3| curl_from_derivatives(&fd_partials(&|z| values_p(ex, z), y, h));
    let moment = |y: Vec3| moment_map(model, t, &curl_p(y));
    let curl_m = curl_from_derivatives(&fd_partials(&moment, x, h));
    let m = curl_m - sigma(x) + micro_map(model, t, &values_p(ex, x));
    (f, m)
}

/// Largest relative mismatch between closed-form and finite-difference loads
/// over the sample points, normalized by the largest closed-form load.
pub fn load_mismatch(model: ModelKind, t: &AnisoTensors, ex: &dyn ExactFields, points: &[Vec3], h: f64) -> f64 {
    let mut diff: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for &x in points {
        let (f, m) = strong_loads(model, t, ex, x);
        let (ff, mf) = strong_loads_fd(model, t, ex, x, h);
        let df = (0..3).map(|i| (f[i] - ff[i]).powi(2)).sum::<f64>().sqrt();
        diff = diff.max(df).max((m - mf).norm());
        scale = scale.max((0..3).map(|i| f[i] * f[i]).sum::<f64>().sqrt()).max(m.norm());
    }
    diff / scale
}

/// Boundary defect of exact fields: `|u|` and the tangential part of each row of `P` at boundary-face samples.
pub fn boundary_defect(mesh: &BoxMesh, ex: &dyn ExactFields) -> f64 {
    let mut worst: f64 = 0.0;
    for t in 0..mesh.n_tets() {
        for skip in 0..4 {
            if !mesh.boundary_face[mesh.tet_to_faces[t][skip]] {
                continue;
            }
            let (n, _) = mesh.face_normal_area(t, skip);
            for corner in 0..4 {
                if corner == skip {
                    continue;
                }
                let mut bary = [0.0; 4];
                for (a, b) in bary.iter_mut().enumerate() {
                    if a != skip {
                        *b = if a == corner { 0.6 } else { 0.2 };
                    }
                }
                let x = mesh.point_in(t, bary);
                let u = values_u(ex, x);
                worst = worst.max(u.iter().fold(0.0, |m, v| m.max(v.abs())));
                let p = values_p(ex, x);
                for r in 0..3 {
                    let row = p.row(r);
                    let pn = crate::tensor::dot3(row, n);
                    let tang = crate::tensor::norm3(std::array::from_fn(|d| row[d] - pn * n[d]));
                    worst = worst.max(tang);
                }
            }
        }
    }
    worst
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub level: usize,
    pub n: usize,
    pub h: f64,
    pub err_u: f64,
    pub err_p: f64,
    pub combined: f64,
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,h,err_u,err_P,combined,rate\n");
        for r in &self.rows {
            let rate = r.rate.map_or(String::new(), |v| format!("{v:.6}"));
            s.push_str(&format!(
                "{},{:.6e},{:.6e},{:.6e},{:.6e},{}\n",
                r.level, r.h, r.err_u, r.err_p, r.combined, rate
            ));
        }
        s
    }

    pub fn last_rate(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.rate)
    }
}

/// Errors of a discrete solution against the exact fields: (`‖u‖_H¹`, `‖P‖_H(Curl)`, combined `⫴·⫴_X`).
pub fn solution_errors(
    u: &DiscreteField<crate::fe::DisplacementSpace>,
    p: &DiscreteField<crate::fe::MicroDistortionSpace>,
    ex: &dyn ExactFields,
) -> (f64, f64, f64) {
    let mesh = u.space().mesh();
    let rule = conical_rule();
    let sums: Vec<[f64; 4]> = (0..mesh.n_tets())
        .into_par_iter()
        .map(|t| {
            let vol = mesh.geometry[t].volume;
            let gu = u.eval_grad_u(t).expect("valid element");
            let cp = p.eval_curl_p(t).expect("valid element");
            let mut acc = [0.0; 4];
            for (bary, w) in &rule {
                let x = mesh.point_in(t, *bary);
                let pt = Jet::point(x);
                let ue = ex.u(pt);
                let pe = ex.p(pt);
                let uh = u.eval_u(t, *bary).expect("valid element");
                let ph = p.eval_p(t, *bary).expect("valid element");
                let du: f64 = (0..3).map(|k| (ue[k].v - uh[k]).powi(2)).sum();
                let dgu = (Mat3::from_fn(|k, l| ue[k].d[l]) - gu).norm().powi(2);
                let pev = Mat3::from_fn(|i, j| pe[i][j].v);
                let dp = pev - ph;
                let dpe: [Mat3; 3] = std::array::from_fn(|k| Mat3::from_fn(|a, b| pe[a][b].d[k]));
                let dc = (curl_from_derivatives(&dpe) - cp).norm().powi(2);
                let ww = w * vol;
                acc[0] += ww * (du + dgu);
                acc[1] += ww * dp.norm().powi(2);
                acc[2] += ww * dc;
                acc[3] += ww * dp.sym().norm().powi(2);
            }
            acc
        })
        .collect();
    let tot = sums.iter().fold([0.0; 4], |mut a, s| {
        for i in 0..4 {
            a[i] += s[i];
        }
        a
    });
    let err_u = tot[0].sqrt();
    let err_p = (tot[1] + tot[2]).sqrt();
    let combined = (tot[0] + tot[3] + tot[2]).sqrt();
    (err_u, err_p, combined)
}

/// Solves on `n × n × n` meshes of the exact fields' box for each `n` in `levels`
/// and tabulates errors with observed rates `log2(e_coarse / e_fine)`.
pub fn manufactured_study(
    model: ModelKind,
    ex: &dyn ExactFields,
    tensors: &AnisoTensors,
    lo: Vec3,
    hi: Vec3,
    levels: &[usize],
    opts: CgOptions,
) -> Result<ConvergenceTable, StudyError> {
    if model == ModelKind::Gauge {
        return Err(StudyError::UnsupportedModel);
    }
    if levels.is_empty() {
        return Err(StudyError::NoLevels);
    }
    let mut table = ConvergenceTable::default();
    for (level, &n) in levels.iter().enumerate() {
        let mesh = build_box_mesh([n; 3], lo, hi)?;
        if level == 0 {
            let defect = boundary_defect(&mesh, ex);
            if defect > 1e-10 {
                return Err(StudyError::BoundaryViolation(defect));
            }
        }
        let (us, ps) = build_spaces(&mesh);
        let unknowns = Unknowns::coupled(&us, &ps);
        let a = assemble_form(&unknowns, &model_terms(model, tensors));
        let fload = |x: Vec3| strong_loads(model, tensors, ex, x).0;
        let mload = |x: Vec3| strong_loads(model, tensors, ex, x).1;
        let b = assemble_load_on(&unknowns, Some(&fload as VectorLoad), Some(&mload as TensorLoad));
        let sol = solve_cg(&a, &b, opts, None)?;
        let nu = us.n_dofs();
        let uf = DiscreteField::new(&us, sol.x[..nu].to_vec()).expect("sizes match");
        let pf = DiscreteField::new(&ps, sol.x[nu..].to_vec()).expect("sizes match");
        let (err_u, err_p, combined) = solution_errors(&uf, &pf, ex);
        let rate = table.rows.last().map(|prev: &ConvergenceRow| {
            (prev.combined / combined).ln() / (prev.h / mesh.mesh_size()).ln()
        });
        table.rows.push(ConvergenceRow {
            level,
            n,
            h: mesh.mesh_size(),
            err_u,
            err_p,
            combined,
            rate,
        });
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::{iso_to_tensors, IsotropicParams};

    #[test]
    fn bubbles_satisfy_boundary_conditions() {
        let m = build_box_mesh([2; 3], [0.0; 3], [1.0; 3]).unwrap();
        assert!(boundary_defect(&m, &SineBubbles::unit_cube()) < 1e-12);
    }

    #[test]
    fn closed_form_loads_match_finite_differences() {
        let p = IsotropicParams {
            mu_e: 1.3,
            lambda_e: 0.7,
            mu_c: 0.2,
            mu_h: 0.9,
            lambda_h: 0.4,
            a1: 0.6,
            a2: 1.1,
            a3: 0.5,
        };
        let t = iso_to_tensors(&p);
        let ex = SineBubbles::unit_cube();
        let pts = [[0.3, 0.4, 0.7], [0.81, 0.15, 0.52]];
        for model in [ModelKind::Relaxed, ModelKind::FurtherRelaxed] {
            assert!(load_mismatch(model, &t, &ex, &pts, 1e-4) < 1e-6);
        }
    }
}
