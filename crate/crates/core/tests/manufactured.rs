use micromorph::assembly::ModelKind;
use micromorph::constitutive::{iso_to_tensors, IsotropicParams};
use micromorph::jet::Jet;
use micromorph::manufactured::*;
use micromorph::mesh::build_box_mesh;
use micromorph::solver::CgOptions;
use micromorph::tensor::Mat3;
use proptest::prelude::*;

fn params() -> IsotropicParams {
    IsotropicParams { mu_e: 1.0, lambda_e: 1.0, mu_c: 0.5, mu_h: 1.0, lambda_h: 1.0, a1: 1.0, a2: 1.0, a3: 1.0 }
}

struct ConstantDistortion(Mat3);

impl ExactFields for ConstantDistortion {
    fn u(&self, _: [Jet; 3]) -> [Jet; 3] {
        [Jet::constant(0.0); 3]
    }
    fn p(&self, _: [Jet; 3]) -> [[Jet; 3]; 3] {
        std::array::from_fn(|i| std::array::from_fn(|j| Jet::constant(self.0 .0[i][j])))
    }
}

#[test]
fn constant_distortion_loads_by_hand() {
    let t = iso_to_tensors(&params());
    let k = Mat3::from_row_slice(&[1.0, 2.0, -1.0, 0.0, 0.5, 0.3, -0.7, 0.2, 1.5]);
    let (f, m) = strong_loads(ModelKind::Relaxed, &t, &ConstantDistortion(k), [0.2, 0.4, 0.9]);
    assert_eq!(f, [0.0; 3]);
    let expected = t.c.apply(&k) + t.h.apply(&k.sym());
    assert!((m - expected).max_abs() <= 1e-14 * expected.max_abs());
    let (_, m) = strong_loads(ModelKind::FurtherRelaxed, &t, &ConstantDistortion(k), [0.2, 0.4, 0.9]);
    let expected = t.c.apply(&k) + t.h.apply(&k.dev_sym()).dev_sym();
    assert!((m - expected).max_abs() <= 1e-14 * expected.max_abs());
}

#[test]
fn bubbles_respect_boundary_conditions_only_on_their_box() {
    let mesh = build_box_mesh([3; 3], [0.0; 3], [1.0; 3]).unwrap();
    assert!(boundary_defect(&mesh, &SineBubbles::unit_cube()) <= 1e-14);
    let stretched = SineBubbles { hi: [2.0, 1.0, 1.0], ..SineBubbles::unit_cube() };
    assert!(boundary_defect(&mesh, &stretched) > 0.1);
    let t = iso_to_tensors(&params());
    let err = manufactured_study(ModelKind::Relaxed, &stretched, &t, [0.0; 3], [1.0; 3], &[2], CgOptions::default());
    assert!(matches!(err, Err(StudyError::BoundaryViolation(_))));
}

#[test]
fn study_rejects_bad_requests() {
    let t = iso_to_tensors(&params());
    let ex = SineBubbles::unit_cube();
    let study = |model, levels: &[usize]| manufactured_study(model, &ex, &t, [0.0; 3], [1.0; 3], levels, CgOptions::default());
    assert_eq!(study(ModelKind::Gauge, &[2]).unwrap_err(), StudyError::UnsupportedModel);
    assert_eq!(study(ModelKind::Relaxed, &[]).unwrap_err(), StudyError::NoLevels);
}

#[test]
fn errors_shrink_under_refinement() {
    let t = iso_to_tensors(&params());
    for model in [ModelKind::Relaxed, ModelKind::FurtherRelaxed] {
        let table = manufactured_study(model, &SineBubbles::unit_cube(), &t, [0.0; 3], [1.0; 3], &[2, 4], CgOptions::default()).unwrap();
        let [a, b] = [&table.rows[0], &table.rows[1]];
        assert!(b.combined < a.combined && b.err_u < a.err_u && b.err_p < a.err_p, "{model:?}");
        assert!((b.h - 0.5 * a.h).abs() < 1e-15);
        assert!(table.last_rate().unwrap() > 0.5, "{model:?} {:?}", table.last_rate());
        assert!(table.to_csv().lines().count() == 3);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn closed_form_loads_match_finite_differences(points in prop::collection::vec(prop::array::uniform3(0.05..0.95_f64), 4)) {
        let t = iso_to_tensors(&params());
        let ex = SineBubbles::unit_cube();
        for model in [ModelKind::Relaxed, ModelKind::FurtherRelaxed] {
            prop_assert!(load_mismatch(model, &t, &ex, &points, 1e-4) <= 1e-6);
        }
    }
}
