use micromorph::constitutive::{iso_to_tensors, IsotropicParams};
use micromorph::dislocation::*;
use micromorph::fe::{build_spaces, gradient_inclusion, DiscreteField};
use micromorph::mesh::build_box_mesh;
use micromorph::poly::{Poly, PolyMat3};
use micromorph::tensor::Mat3;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params() -> IsotropicParams {
    IsotropicParams { mu_e: 1.0, lambda_e: 1.5, mu_c: 0.4, mu_h: 2.0, lambda_h: 0.5, a1: 1.0, a2: 0.7, a3: 0.3 }
}

fn random_coeffs(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

#[test]
fn gradient_fields_carry_no_dislocations() {
    let mesh = build_box_mesh([3, 3, 3], [0.0; 3], [1.0; 3]).unwrap();
    let (us, ps) = build_spaces(&mesh);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let u = DiscreteField::new(&us, random_coeffs(&mut rng, us.n_dofs())).unwrap();
    let p = gradient_inclusion(&u, &ps).unwrap();
    let alpha = alpha_from_field(&p, AlphaSource::Distortion);
    assert!(alpha.max_norm() < 1e-13);
    let zero = alpha_from_field(&DiscreteField::zeros(&ps), AlphaSource::Elastic);
    assert_eq!(zero.max_norm(), 0.0);
}

#[test]
fn sign_follows_source() {
    let mesh = build_box_mesh([2, 2, 2], [0.0; 3], [1.0; 3]).unwrap();
    let (_, ps) = build_spaces(&mesh);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let p = DiscreteField::new(&ps, random_coeffs(&mut rng, ps.n_dofs())).unwrap();
    let from_p = alpha_from_field(&p, AlphaSource::Distortion);
    let from_e = alpha_from_field(&p, AlphaSource::Elastic);
    for (t, (a, b)) in from_p.values().iter().zip(from_e.values()).enumerate() {
        assert_eq!(*a, *b * -1.0);
        assert_eq!(*b, p.eval_curl_p(t).unwrap());
    }
}

#[test]
fn discrete_density_is_divergence_free() {
    let mesh = build_box_mesh([4, 3, 3], [0.0, -1.0, 0.5], [2.0, 0.5, 1.5]).unwrap();
    let (_, ps) = build_spaces(&mesh);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = DiscreteField::new(&ps, random_coeffs(&mut rng, ps.n_dofs())).unwrap();
    let report = bianchi_check(&alpha_from_field(&p, AlphaSource::Distortion));
    assert_eq!(report.vertices_checked, mesh.interior_vertex_count());
    assert_eq!(report.boxes_checked, (4 * 5 / 2) * 6 * 6);
    assert!(report.passes(1e-12), "{report:?}");
}

#[test]
fn overwritten_element_breaks_conservation() {
    let mesh = build_box_mesh([3, 3, 3], [0.0; 3], [1.0; 3]).unwrap();
    let (_, ps) = build_spaces(&mesh);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let p = DiscreteField::new(&ps, random_coeffs(&mut rng, ps.n_dofs())).unwrap();
    let mut alpha = alpha_from_field(&p, AlphaSource::Distortion);
    let middle = mesh.locate([0.5, 0.5, 0.5]);
    alpha.values_mut()[middle] = alpha.values()[middle] + Mat3::identity() * 3.0;
    let report = bianchi_check(&alpha);
    assert!(report.max_vertex_flux > 1e-3);
    assert!(report.max_box_flux > 1e-3);
    assert!(!report.passes(1e-12));
}

#[test]
fn zero_density_has_zero_flux() {
    let mesh = build_box_mesh([2, 2, 2], [0.0; 3], [1.0; 3]).unwrap();
    let alpha = DislocationField::new(&mesh, vec![Mat3::ZERO; mesh.n_tets()]).unwrap();
    assert_eq!(bianchi_check(&alpha).max_flux(), 0.0);
    assert!(DislocationField::new(&mesh, vec![]).is_err());
}

#[test]
fn gauge_transform_invariants() {
    let mesh = build_box_mesh([3, 3, 3], [0.0; 3], [1.0; 3]).unwrap();
    let (us, ps) = build_spaces(&mesh);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let u = DiscreteField::new(&us, random_coeffs(&mut rng, us.n_dofs())).unwrap();
    let p = DiscreteField::new(&ps, random_coeffs(&mut rng, ps.n_dofs())).unwrap();
    let tau = DiscreteField::new(&us, random_coeffs(&mut rng, us.n_dofs())).unwrap();
    let (u2, p2) = gauge_transform(&u, &p, &tau).unwrap();

    let e = elastic_distortion(&u, &p).unwrap();
    let e2 = elastic_distortion(&u2, &p2).unwrap();
    let bary = [0.1, 0.2, 0.3, 0.4];
    for t in 0..mesh.n_tets() {
        assert!((e.eval_p(t, bary).unwrap() - e2.eval_p(t, bary).unwrap()).max_abs() <= 1e-13);
    }
    let a = alpha_from_field(&p, AlphaSource::Distortion);
    let a2 = alpha_from_field(&p2, AlphaSource::Distortion);
    for (x, y) in a.values().iter().zip(a2.values()) {
        assert!((*x - *y).max_abs() <= 1e-12);
    }

    let tensors = iso_to_tensors(&params());
    let w = gauge_energy(&e, &tensors);
    assert!((gauge_energy(&e2, &tensors) - w).abs() <= 1e-12 * w);
    let h1 = micro_energy(&p, &tensors.h);
    let h2 = micro_energy(&p2, &tensors.h);
    assert!((h1 - h2).abs() > 1e-3 * h1);
}

#[test]
fn zero_gauge_is_identity() {
    let mesh = build_box_mesh([2, 2, 2], [0.0; 3], [1.0; 3]).unwrap();
    let (us, ps) = build_spaces(&mesh);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let u = DiscreteField::new(&us, random_coeffs(&mut rng, us.n_dofs())).unwrap();
    let p = DiscreteField::new(&ps, random_coeffs(&mut rng, ps.n_dofs())).unwrap();
    let (u2, p2) = gauge_transform(&u, &p, &DiscreteField::zeros(&us)).unwrap();
    assert_eq!(u2.coeffs(), u.coeffs());
    assert_eq!(p2.coeffs(), p.coeffs());
}

#[test]
fn gauge_on_another_mesh_is_rejected() {
    let mesh = build_box_mesh([2, 2, 2], [0.0; 3], [1.0; 3]).unwrap();
    let other = build_box_mesh([2, 2, 2], [0.0; 3], [1.0; 3]).unwrap();
    let (us, ps) = build_spaces(&mesh);
    let (vs, _) = build_spaces(&other);
    let u = DiscreteField::zeros(&us);
    let p = DiscreteField::zeros(&ps);
    assert!(gauge_transform(&u, &p, &DiscreteField::zeros(&vs)).is_err());
}

#[test]
fn coefficient_map_examples() {
    let einstein = lazar_from_teisseyre(TeisseyreCoeffs { t1: 2.0, t2: 1.0, t3: -1.0 });
    assert_eq!(einstein.alpha2, -einstein.alpha1);
    assert!((einstein.alpha3 + einstein.alpha1 / 6.0).abs() < 1e-15);
    let edelen = lazar_from_teisseyre(TeisseyreCoeffs { t1: 0.0, t2: 1.0, t3: 0.0 });
    assert_eq!(edelen, LazarCoeffs::new(1.0, 1.0, 1.0 / 3.0));
}

fn finite() -> impl Strategy<Value = f64> {
    -10.0..10.0_f64
}

fn mat() -> impl Strategy<Value = Mat3> {
    prop::array::uniform9(finite()).prop_map(|v| Mat3::from_row_slice(&v))
}

proptest! {
    #[test]
    fn coefficient_maps_roundtrip(t1 in finite(), t2 in finite(), t3 in finite()) {
        let t = TeisseyreCoeffs { t1, t2, t3 };
        let back = teisseyre_from_lazar(lazar_from_teisseyre(t));
        prop_assert!((back.t1 - t1).abs() <= 1e-14 * (1.0 + t1.abs()) * 10.0);
        prop_assert!((back.t2 - t2).abs() <= 1e-14 * (1.0 + t2.abs() + t3.abs()) * 10.0);
        prop_assert!((back.t3 - t3).abs() <= 1e-14 * (1.0 + t2.abs() + t3.abs()) * 10.0);
    }

    #[test]
    fn lambda_is_antisymmetric_in_outer_slots(alpha in mat(), t1 in finite(), t2 in finite(), t3 in finite()) {
        let l = lambda_tensor(&alpha, TeisseyreCoeffs { t1, t2, t3 });
        for p in 0..3 { for m in 0..3 { for k in 0..3 {
            prop_assert!((l.get(p, m, k) + l.get(k, m, p)).abs() <= 1e-12);
        }}}
    }

    #[test]
    fn lambda_contraction_is_the_moment_form(alpha in mat(), t1 in finite(), t2 in finite(), t3 in finite()) {
        let t = TeisseyreCoeffs { t1, t2, t3 };
        let m = m_from_lambda(&lambda_tensor(&alpha, t));
        let expected = teisseyre_moment(&(alpha * -1.0), t);
        prop_assert!((m - expected).max_abs() <= 1e-13 * (1.0 + expected.max_abs()));
    }
}

#[test]
fn zero_density_gives_zero_lambda() {
    let l = lambda_tensor(&Mat3::ZERO, TeisseyreCoeffs { t1: 1.0, t2: 2.0, t3: 3.0 });
    assert_eq!(l.max_abs(), 0.0);
}

#[test]
fn remark_families_and_counterexample() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let rows = symmetry_study(&mut rng, 50, 1e-13, 1e-3);
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert!(r.passed, "{r:?}");
    }
    let csv = symmetry_csv(&rows);
    assert!(csv.starts_with("family,"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn quartic_input_is_rejected() {
    let mut p = PolyMat3::default();
    p.0[0][1] = Poly::monomial(1.0, [2, 2, 0]);
    assert!(einstein_symmetry_check(LazarCoeffs::new(1.0, 1.0, 1.0), &p, [0.0; 3]).is_err());
    assert!(inc_operator(&p, [0.0; 3]).is_err());
}

#[test]
fn inc_annihilates_compatible_strains() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let v: Vec<Poly> = (0..3).map(|_| random_poly(&mut rng, 4)).collect();
        let grad = PolyMat3::from_fn(|i, j| v[i].derivative(j));
        let x = [0.3, -0.2, 0.7];
        assert!(inc_operator(&grad.sym(), x).unwrap().max_abs() < 1e-12);
    }
    let constant = PolyMat3::from_fn(|i, j| Poly::constant((i + 2 * j) as f64));
    assert_eq!(inc_operator(&constant, [1.0, 2.0, 3.0]).unwrap().max_abs(), 0.0);
}

#[test]
fn inc_preserves_symmetry() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..10 {
        let s = random_poly_field(&mut rng, 3, true);
        let r = inc_operator(&s, [0.4, 0.1, -0.5]).unwrap();
        assert!((r - r.transpose()).max_abs() < 1e-12);
    }
}

#[test]
fn einstein_balance_is_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let p = IsotropicParams { mu_c: 0.0, ..params() };
    for _ in 0..10 {
        let e = random_poly_field(&mut rng, 3, false);
        let x = [0.2, 0.5, -0.3];
        let ex = e.eval(x);
        let stress = micromorph::constitutive::sigma_iso(&ex, &p);
        let balance = stress - inc_operator(&e.sym(), x).unwrap() * p.a1;
        assert!((balance - balance.transpose()).max_abs() < 1e-12);
    }
}
