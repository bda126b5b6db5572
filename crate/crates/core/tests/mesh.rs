use micromorph::mesh::*;
use micromorph::tensor::{norm3, sub3, Vec3};
use proptest::prelude::*;
use std::collections::HashMap;

fn boxed(n: [usize; 3], lo: Vec3, hi: Vec3) -> BoxMesh {
    build_box_mesh(n, lo, hi).unwrap()
}

fn extent(lo: Vec3, hi: Vec3) -> Vec3 {
    sub3(hi, lo)
}

#[test]
fn counts_match_closed_forms() {
    for n in [1, 2, 3] {
        let m = boxed([n; 3], [0.0; 3], [1.0; 3]);
        let (v, e, f, t) = m.entity_counts();
        let c = n * n * n;
        assert_eq!(v, (n + 1).pow(3));
        assert_eq!(t, 6 * c);
        assert_eq!(m.euler_characteristic(), 1);
        assert_eq!(f, (4 * t + m.boundary_face.iter().filter(|b| **b).count()) / 2);
        assert!(e > v);
        assert_eq!(m.interior_vertex_count(), (n - 1).pow(3));
    }
}

#[test]
fn faces_are_shared_by_two_tets_inside() {
    let m = boxed([2, 3, 2], [0.0; 3], [1.0, 1.5, 0.5]);
    let mut uses: HashMap<usize, usize> = HashMap::new();
    for faces in &m.tet_to_faces {
        for f in faces {
            *uses.entry(*f).or_default() += 1;
        }
    }
    assert_eq!(uses.len(), m.faces.len());
    for (f, count) in uses {
        assert_eq!(count, if m.boundary_face[f] { 1 } else { 2 }, "face {f}");
    }
}

#[test]
fn boundary_area_equals_box_surface() {
    let (lo, hi) = ([-1.0, 0.0, 0.5], [1.0, 0.5, 2.0]);
    let m = boxed([2, 2, 3], lo, hi);
    let mut area = 0.0;
    for t in 0..m.n_tets() {
        for skip in 0..4 {
            if m.boundary_face[m.tet_to_faces[t][skip]] {
                area += m.face_normal_area(t, skip).1;
            }
        }
    }
    let [a, b, c] = extent(lo, hi);
    assert!((area - 2.0 * (a * b + b * c + c * a)).abs() < 1e-13);
}

#[test]
fn normals_of_closed_tets_balance() {
    let m = boxed([2; 3], [0.0; 3], [1.0; 3]);
    for t in 0..m.n_tets() {
        let mut s = [0.0; 3];
        for skip in 0..4 {
            let (n, a) = m.face_normal_area(t, skip);
            assert!((norm3(n) - 1.0).abs() < 1e-14);
            for d in 0..3 {
                s[d] += a * n[d];
            }
        }
        assert!(norm3(s) < 1e-14);
    }
}

#[test]
fn refinement_halves_mesh_size_and_keeps_coarse_vertices() {
    let coarse = boxed([1, 2, 1], [0.0; 3], [2.0, 1.0, 1.0]);
    let fine = refine(&coarse);
    assert_eq!(fine.n, [2, 4, 2]);
    assert!((fine.mesh_size() - 0.5 * coarse.mesh_size()).abs() < 1e-15);
    for (v, &f) in coarse_vertex_map(&coarse, &fine).iter().enumerate() {
        assert_eq!(coarse.vertices[v], fine.vertices[f]);
    }
}

#[test]
fn rejects_bad_input() {
    assert_eq!(build_box_mesh([0, 1, 1], [0.0; 3], [1.0; 3]).unwrap_err(), MeshError::EmptyGrid([0, 1, 1]));
    assert!(matches!(build_box_mesh([1; 3], [0.0; 3], [1.0, 0.0, 1.0]), Err(MeshError::DegenerateBounds { .. })));
}

proptest! {
    #[test]
    fn volumes_are_positive_and_sum_to_box(
        n in prop::array::uniform3(1usize..4),
        lo in prop::array::uniform3(-2.0..2.0_f64),
        size in prop::array::uniform3(0.1..3.0_f64),
    ) {
        let hi = std::array::from_fn(|d| lo[d] + size[d]);
        let m = boxed(n, lo, hi);
        prop_assert!(m.geometry.iter().all(|g| g.volume > 0.0));
        let total: f64 = m.geometry.iter().map(|g| g.volume).sum();
        let expected = size.iter().product::<f64>();
        prop_assert!((total - expected).abs() <= 1e-13 * expected);
    }

    #[test]
    fn located_tet_contains_point(x in prop::array::uniform3(0.0..1.0_f64)) {
        let m = boxed([3, 2, 4], [0.0; 3], [1.0; 3]);
        let t = m.locate(x);
        let bary = m.barycentric(t, x);
        prop_assert!(bary.iter().all(|b| *b >= -1e-12));
        let back = m.point_in(t, bary);
        prop_assert!(norm3(sub3(back, x)) < 1e-14);
    }
}
