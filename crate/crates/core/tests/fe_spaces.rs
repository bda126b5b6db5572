use micromorph::fe::*;
use micromorph::mesh::{build_box_mesh, refine, BoxMesh};
use micromorph::tensor::{dot3, Mat3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit(n: usize) -> BoxMesh {
    build_box_mesh([n; 3], [0.0; 3], [1.0; 3]).unwrap()
}

fn random_coeffs(seed: u64, len: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

const SAMPLE_BARY: [[f64; 4]; 3] = [[0.25; 4], [0.1, 0.2, 0.3, 0.4], [0.7, 0.1, 0.1, 0.1]];

#[test]
fn constants_are_reproduced_by_the_unconstrained_space() {
    let m = unit(2);
    let space = MicroDistortionSpace::unconstrained(&m);
    let c = Mat3::from_row_slice(&[1.0, -2.0, 0.5, 0.3, 4.0, -1.0, 2.0, 0.0, -0.7]);
    let f = interpolate_p(&space, |_| c);
    for t in 0..m.n_tets() {
        for b in SAMPLE_BARY {
            assert!((f.eval_p(t, b).unwrap() - c).max_abs() < 1e-13);
        }
        assert!(f.eval_curl_p(t).unwrap().max_abs() < 1e-12);
    }
}

#[test]
fn rotation_field_has_constant_curl() {
    let m = unit(2);
    let space = MicroDistortionSpace::unconstrained(&m);
    // Row r of P is a_r × x, whose curl is 2 a_r.
    let a = [[1.0, 0.0, 0.0], [0.0, -2.0, 1.0], [0.5, 0.5, 0.5]];
    let f = interpolate_p(&space, |x| {
        Mat3::from_fn(|r, j| micromorph::tensor::cross3(a[r], x)[j])
    });
    let expected = Mat3::from_fn(|r, j| 2.0 * a[r][j]);
    for t in 0..m.n_tets() {
        assert!((f.eval_curl_p(t).unwrap() - expected).max_abs() < 1e-12);
    }
}

#[test]
fn rejects_wrong_lengths_and_meshes() {
    let m = unit(1);
    let other = unit(1);
    let (u, p) = build_spaces(&m);
    assert!(matches!(DiscreteField::new(&p, vec![0.0; 1]), Err(FeError::LengthMismatch { .. })));
    let q = MicroDistortionSpace::new(&other);
    assert_eq!(gradient_inclusion(&DiscreteField::zeros(&u), &q).unwrap_err(), FeError::MeshMismatch);
    let f = DiscreteField::zeros(&p);
    assert_eq!(f.eval_curl_p(m.n_tets()).unwrap_err(), FeError::ElementOutOfRange(m.n_tets()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gradient_inclusion_is_exact_and_curl_free(seed in any::<u64>()) {
        let m = unit(3);
        let (us, ps) = build_spaces(&m);
        let u = DiscreteField::new(&us, random_coeffs(seed, us.n_dofs())).unwrap();
        let g = gradient_inclusion(&u, &ps).unwrap();
        for t in 0..m.n_tets() {
            let grad = u.eval_grad_u(t).unwrap();
            prop_assert!(g.eval_curl_p(t).unwrap().max_abs() <= 1e-12);
            for b in SAMPLE_BARY {
                prop_assert!((g.eval_p(t, b).unwrap() - grad).max_abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn constrained_fields_have_zero_tangential_trace(seed in any::<u64>()) {
        let m = unit(2);
        let ps = MicroDistortionSpace::new(&m);
        let f = DiscreteField::new(&ps, random_coeffs(seed, ps.n_dofs())).unwrap();
        for t in 0..m.n_tets() {
            for skip in 0..4 {
                if !m.boundary_face[m.tet_to_faces[t][skip]] {
                    continue;
                }
                let (normal, _) = m.face_normal_area(t, skip);
                let mut bary = [1.0 / 3.0; 4];
                bary[skip] = 0.0;
                let p = f.eval_p(t, bary).unwrap();
                let x = m.tet_vertices(t);
                let corners: Vec<_> = (0..4).filter(|&a| a != skip).map(|a| x[a]).collect();
                for (a, b) in [(0, 1), (1, 2)] {
                    let tangent = micromorph::tensor::sub3(corners[b], corners[a]);
                    prop_assert!(dot3(tangent, normal).abs() < 1e-14);
                    for r in 0..3 {
                        prop_assert!(dot3(p.row(r), tangent).abs() <= 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn prolongation_preserves_fields(seed in any::<u64>(), pts in prop::collection::vec(prop::array::uniform3(0.0..1.0_f64), 8)) {
        let coarse = unit(2);
        let fine = refine(&coarse);
        let (cu, cp) = build_spaces(&coarse);
        let (fu, fp) = build_spaces(&fine);
        let u = DiscreteField::new(&cu, random_coeffs(seed, cu.n_dofs())).unwrap();
        let p = DiscreteField::new(&cp, random_coeffs(seed ^ 1, cp.n_dofs())).unwrap();
        let uf = prolongate_u(&u, &fu);
        let pf = prolongate_p(&p, &fp);
        for x in pts {
            let (tc, tf) = (coarse.locate(x), fine.locate(x));
            let (bc, bf) = (coarse.barycentric(tc, x), fine.barycentric(tf, x));
            let du = u.eval_u(tc, bc).unwrap();
            let dfu = uf.eval_u(tf, bf).unwrap();
            prop_assert!((0..3).all(|d| (du[d] - dfu[d]).abs() <= 1e-13));
            prop_assert!((p.eval_p(tc, bc).unwrap() - pf.eval_p(tf, bf).unwrap()).max_abs() <= 1e-13);
            prop_assert!((p.eval_curl_p(tc).unwrap() - pf.eval_curl_p(tf).unwrap()).max_abs() <= 1e-12);
        }
    }
}
