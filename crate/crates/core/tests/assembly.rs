use micromorph::assembly::*;
use micromorph::constitutive::{iso_to_tensors, AnisoTensors, IsotropicParams};
use micromorph::fe::*;
use micromorph::mesh::{build_box_mesh, BoxMesh};
use micromorph::sparse::dot;
use micromorph::tensor::{frobenius, Mat3, Tensor4};
use nalgebra::SymmetricEigen;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params() -> IsotropicParams {
    IsotropicParams { mu_e: 1.0, lambda_e: 1.5, mu_c: 0.7, mu_h: 0.8, lambda_h: 0.4, a1: 1.2, a2: 0.9, a3: 0.4 }
}

fn mesh(n: usize) -> BoxMesh {
    build_box_mesh([n; 3], [0.0; 3], [1.0, 0.8, 1.3]).unwrap()
}

fn random_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn coupled_tensors() -> AnisoTensors {
    let t = iso_to_tensors(&params());
    let b = Tensor4::from_fn(|i, j, k, l| 0.05 * ((i + 2 * j + 3 * k + 5 * l) as f64).cos());
    AnisoTensors::new(t.c, t.h, t.lc, Some(b)).unwrap()
}

fn min_eigenvalue(m: &micromorph::sparse::CsrMatrix) -> f64 {
    SymmetricEigen::new(m.to_dense()).eigenvalues.min()
}

#[test]
fn model_matrices_are_symmetric() {
    let m = mesh(2);
    let (us, ps) = build_spaces(&m);
    let iso = iso_to_tensors(&params());
    let coupled = coupled_tensors();
    let matrices = [
        assemble_relaxed(&us, &ps, &iso),
        assemble_further_relaxed(&us, &ps, &iso),
        assemble_gauge(&ps, &iso),
        assemble_gauge(&ps, &coupled),
    ];
    for a in &matrices {
        assert!(a.asymmetry() <= 1e-12 * a.max_abs());
    }
}

#[test]
fn small_systems_are_positive_definite() {
    let m = mesh(2);
    let (us, ps) = build_spaces(&m);
    let iso = iso_to_tensors(&params());
    assert!(min_eigenvalue(&assemble_relaxed(&us, &ps, &iso)) > 0.0);
    assert!(min_eigenvalue(&assemble_further_relaxed(&us, &ps, &iso)) > 0.0);
    assert!(min_eigenvalue(&assemble_gauge(&ps, &iso)) > 0.0);
}

#[test]
fn gradient_pairs_store_only_micro_energy() {
    let m = mesh(2);
    let (us, ps) = build_spaces(&m);
    let t = iso_to_tensors(&params());
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let u = DiscreteField::new(&us, random_vec(&mut rng, us.n_dofs())).unwrap();
    let p = gradient_inclusion(&u, &ps).unwrap();
    let w: Vec<f64> = u.coeffs().iter().chain(p.coeffs()).copied().collect();
    let expected: f64 = (0..m.n_tets())
        .map(|k| {
            let g = u.eval_grad_u(k).unwrap().sym();
            m.geometry[k].volume * frobenius(&t.h.apply(&g), &g)
        })
        .sum();
    let got = assemble_relaxed(&us, &ps, &t).bilinear(&w, &w);
    assert!((got - expected).abs() <= 1e-12 * expected);
}

#[test]
fn constant_distortion_energy_is_exact() {
    let m = mesh(2);
    let ps = MicroDistortionSpace::unconstrained(&m);
    let t = iso_to_tensors(&params());
    let c = Mat3::from_row_slice(&[1.0, -0.4, 0.2, 0.3, 0.5, -1.0, 0.8, 0.1, -0.6]);
    let f = interpolate_p(&ps, |_| c);
    let volume = 1.0 * 0.8 * 1.3;
    let a = assemble_gauge(&ps, &t);
    let expected = volume * frobenius(&t.c.apply(&c), &c);
    assert!((a.bilinear(f.coeffs(), f.coeffs()) - expected).abs() <= 1e-12 * expected);
    let sym = assemble_form(&Unknowns::distortion(&ps), &[FormTerm::diagonal(Some(&t.h), Operand::SymP)]);
    let expected = volume * frobenius(&t.h.apply(&c.sym()), &c.sym());
    assert!((sym.bilinear(f.coeffs(), f.coeffs()) - expected).abs() <= 1e-12 * expected);
}

#[test]
fn loads_integrate_exactly_for_linear_integrands() {
    let m = mesh(3);
    let (us, ps) = build_spaces(&m);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let u = DiscreteField::new(&us, random_vec(&mut rng, us.n_dofs())).unwrap();
    let force = [0.3, -1.0, 2.0];
    let fl = |_: [f64; 3]| force;
    let load = assemble_load_on(&Unknowns::displacement(&us), Some(&fl), None);
    let expected: f64 = (0..m.n_tets())
        .map(|k| {
            let mean = u.eval_u(k, [0.25; 4]).unwrap();
            m.geometry[k].volume * (0..3).map(|d| force[d] * mean[d]).sum::<f64>()
        })
        .sum();
    assert!((dot(&load, u.coeffs()) - expected).abs() <= 1e-13 * (1.0 + expected.abs()));

    let p = DiscreteField::new(&ps, random_vec(&mut rng, ps.n_dofs())).unwrap();
    let moment = Mat3::from_row_slice(&[1.0, 2.0, 0.0, -1.0, 0.5, 0.3, 0.0, 0.0, 1.0]);
    let ml = |_: [f64; 3]| moment;
    let load = assemble_gauge_load(&ps, &ml);
    let expected: f64 = (0..m.n_tets())
        .map(|k| m.geometry[k].volume * frobenius(&moment, &p.eval_p(k, [0.25; 4]).unwrap()))
        .sum();
    assert!((dot(&load, p.coeffs()) - expected).abs() <= 1e-13 * (1.0 + expected.abs()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn forms_are_nonnegative_and_symmetric(seed in any::<u64>()) {
        let m = mesh(2);
        let (us, ps) = build_spaces(&m);
        let t = iso_to_tensors(&params());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for model in [ModelKind::Relaxed, ModelKind::FurtherRelaxed, ModelKind::Gauge] {
            let unknowns = match model {
                ModelKind::Gauge => Unknowns::distortion(&ps),
                _ => Unknowns::coupled(&us, &ps),
            };
            let a = assemble_form(&unknowns, &model_terms(model, &t));
            let x = random_vec(&mut rng, a.dim());
            let y = random_vec(&mut rng, a.dim());
            prop_assert!(a.bilinear(&x, &x) > 0.0);
            let (xy, yx) = (a.bilinear(&x, &y), a.bilinear(&y, &x));
            prop_assert!((xy - yx).abs() <= 1e-12 * a.max_abs() * a.dim() as f64);
        }
    }
}
