use micromorph::coercivity::*;
use micromorph::fe::{DisplacementSpace, MicroDistortionSpace};
use micromorph::mesh::build_box_mesh;
use micromorph::sparse::CsrMatrix;
use nalgebra::DMatrix;

fn study(kind: InequalityKind, levels: &[usize], constrained: bool, opts: EigenOptions) -> Vec<ConstantEstimate> {
    monotonicity_study(kind, levels, [0.0; 3], [1.0; 3], None, constrained, opts).unwrap()
}

#[test]
fn names_round_trip() {
    for kind in InequalityKind::ALL {
        assert_eq!(kind.name().parse::<InequalityKind>().unwrap(), kind);
    }
    assert!(matches!("korn".parse::<InequalityKind>(), Err(CoercivityError::UnknownKind(_))));
}

#[test]
fn dense_pencil_example() {
    let n = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 1.0, 8.0]));
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0, 4.0]));
    let (lambda, v) = dense_smallest(&n, &d).unwrap();
    assert!((lambda - 0.5).abs() < 1e-15);
    assert!(v[0].abs() < 1e-15 && v[2].abs() < 1e-15);
}

#[test]
fn constants_are_positive_and_non_increasing() {
    for kind in InequalityKind::ALL {
        let rows = study(kind, &[1, 2], true, EigenOptions::default());
        assert!(rows.iter().all(|r| r.lambda_min > 0.0 && r.constant.is_finite()), "{kind}");
        assert!(is_non_increasing(&rows, 1e-10), "{kind} {rows:?}");
        assert_eq!(rows.iter().map(|r| r.level).collect::<Vec<_>>(), vec![1, 2]);
    }
}

#[test]
fn stronger_denominator_gives_smaller_eigenvalue() {
    let l2 = study(InequalityKind::SymCurlVsL2, &[1, 2], true, EigenOptions::default());
    let hcurl = study(InequalityKind::SymCurlVsHCurl, &[1, 2], true, EigenOptions::default());
    for (a, b) in l2.iter().zip(&hcurl) {
        assert!(b.lambda_min <= a.lambda_min + 1e-12);
    }
}

#[test]
fn iterative_path_matches_dense_path() {
    let mesh = build_box_mesh([2; 3], [0.0; 3], [1.0; 3]).unwrap();
    let us = DisplacementSpace::new(&mesh);
    let ps = MicroDistortionSpace::new(&mesh);
    for kind in [InequalityKind::SymCurlVsL2, InequalityKind::DevSymGrad, InequalityKind::KornCombined] {
        let (n, d) = assemble_pencil(kind, Some(&us), Some(&ps), None);
        let kernel = pencil_kernel(kind, &ps);
        let dense = smallest_eigenvalue_with_kernel(&n, &d, kernel.as_ref(), EigenOptions::default()).unwrap();
        let krylov_opts = EigenOptions { dense_limit: 0, stall_tol: 0.0, ..Default::default() };
        let krylov = smallest_eigenvalue_with_kernel(&n, &d, kernel.as_ref(), krylov_opts).unwrap();
        assert!((dense.lambda_min - krylov.lambda_min).abs() <= 1e-8 * dense.lambda_min, "{kind}: {dense:?} {krylov:?}");
    }
}

#[test]
fn unconstrained_space_loses_coercivity() {
    let opts = EigenOptions { shift: 1.0, ..Default::default() };
    let rows = study(InequalityKind::SymCurlVsL2, &[1, 2], false, opts);
    assert!(rows.iter().all(|r| r.lambda_min <= 1e-10), "{rows:?}");
}

#[test]
fn pencil_errors() {
    let n = CsrMatrix::identity(2);
    let d = CsrMatrix::identity(3);
    assert_eq!(smallest_eigenvalue(&n, &d, EigenOptions::default()).unwrap_err(), CoercivityError::DimensionMismatch(2, 3));
    let zero = CsrMatrix::from_triplets(2, vec![]);
    assert_eq!(smallest_eigenvalue(&n, &zero, EigenOptions::default()).unwrap_err(), CoercivityError::ZeroDenominator);
    let err = monotonicity_study(InequalityKind::DevCurl, &[1], [0.0; 3], [1.0; 3], None, true, EigenOptions::default());
    assert_eq!(err.unwrap_err(), CoercivityError::TooFewLevels);
}
