//! Assembled boundary-value problems of the three models.

use crate::assembly::{assemble_form, assemble_load_on, model_terms, ModelKind, TensorLoad, Unknowns, VectorLoad};
use crate::constitutive::AnisoTensors;
use crate::fe::{DiscreteField, DisplacementSpace, EdgeField, MicroDistortionSpace, NodalField};
use crate::solver::{solve_pcg, CgOptions, IncompleteCholesky, SolveReport, SolverError};
use crate::sparse::{norm, CsrMatrix};

/// Loads; absent entries are zero. The gauge model reads only `background_stress`.
#[derive(Clone, Copy, Default)]
pub struct Loads<'f> {
    pub body_force: Option<VectorLoad<'f>>,
    pub moment: Option<TensorLoad<'f>>,
    pub background_stress: Option<TensorLoad<'f>>,
}

/// Stiffness matrix and load vector.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub model: ModelKind,
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Leading displacement unknowns; zero for the gauge model.
    pub u_dofs: usize,
}

pub fn unknowns_for<'a, 'm>(
    model: ModelKind,
    us: &'a DisplacementSpace<'m>,
    ps: &'a MicroDistortionSpace<'m>,
) -> Unknowns<'a, 'm> {
    match model {
        ModelKind::Gauge => Unknowns::distortion(ps),
        _ => Unknowns::coupled(us, ps),
    }
}

pub fn assemble_system(
    model: ModelKind,
    us: &DisplacementSpace,
    ps: &MicroDistortionSpace,
    tensors: &AnisoTensors,
    loads: &Loads,
) -> LinearSystem {
    let unknowns = unknowns_for(model, us, ps);
    let matrix = assemble_form(&unknowns, &model_terms(model, tensors));
    let rhs = match model {
        ModelKind::Gauge => assemble_load_on(&unknowns, None, loads.background_stress),
        _ => assemble_load_on(&unknowns, loads.body_force, loads.moment),
    };
    LinearSystem { model, matrix, rhs, u_dofs: unknowns.u_dofs() }
}

impl LinearSystem {
    /// IC(0)-preconditioned CG from `x0`, or from zero.
    pub fn solve(&self, opts: CgOptions, x0: Option<&[f64]>) -> Result<SolveReport, SolverError> {
        if norm(&self.rhs) == 0.0 && x0.is_none() {
            let x = vec![0.0; self.rhs.len()];
            return Ok(SolveReport { iterations: 0, relative_residual: 0.0, x, energy: 0.0 });
        }
        let pre = IncompleteCholesky::new(&self.matrix)?;
        solve_pcg(&self.matrix, &self.rhs, opts, x0, &pre)
    }

    /// Splits a coefficient vector into displacement and distortion fields.
    /// For the gauge model the distortion field is the elastic distortion `e`.
    pub fn split<'a, 'm>(
        &self,
        x: &[f64],
        us: &'a DisplacementSpace<'m>,
        ps: &'a MicroDistortionSpace<'m>,
    ) -> (NodalField<'a, 'm>, EdgeField<'a, 'm>) {
        let u = DiscreteField::new(us, x[..self.u_dofs].to_vec()).unwrap_or_else(|_| DiscreteField::zeros(us));
        let p = DiscreteField::new(ps, x[self.u_dofs..].to_vec()).expect("distortion block matches space");
        (u, p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::{iso_to_tensors, IsotropicParams};
    use crate::fe::build_spaces;
    use crate::mesh::build_box_mesh;

    #[test]
    fn zero_loads_give_zero_solution() {
        let mesh = build_box_mesh([2, 2, 2], [0.0; 3], [1.0; 3]).unwrap();
        let (us, ps) = build_spaces(&mesh);
        let p = IsotropicParams { mu_e: 1.0, lambda_e: 1.0, mu_c: 0.5, mu_h: 1.0, lambda_h: 1.0, a1: 1.0, a2: 1.0, a3: 1.0 };
        let t = iso_to_tensors(&p);
        for model in [ModelKind::Relaxed, ModelKind::FurtherRelaxed, ModelKind::Gauge] {
            let sys = assemble_system(model, &us, &ps, &t, &Loads::default());
            let r = sys.solve(CgOptions::default(), None).unwrap();
            assert!(r.x.iter().all(|v| *v == 0.0));
            assert_eq!(r.energy, 0.0);
        }
    }
}
