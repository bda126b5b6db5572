//! Structured tetrahedral meshes of boxes (Kuhn subdivision).

use crate::tensor::{cross3, dot3, norm3, sub3, Vec3};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MeshError {
    #[error("cell counts must be positive, got {0:?}")]
    EmptyGrid([usize; 3]),
    #[error("degenerate bounds: lo {lo:?} must be below hi {hi:?} componentwise")]
    DegenerateBounds { lo: Vec3, hi: Vec3 },
    #[error("element id {0} out of range")]
    ElementOutOfRange(usize),
}

/// Local vertex pairs of the six tet edges.
pub const LOCAL_EDGES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Axis orders of the six Kuhn tets in a cell.
const PERMUTATIONS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Constant geometric data of one tetrahedron.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TetGeometry {
    pub volume: f64,
    /// Gradients of the four barycentric coordinates.
    pub grads: [Vec3; 4],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignedEdge {
    pub id: usize,
    /// +1 when the local edge direction agrees with the global low→high orientation.
    pub sign: i8,
}

#[derive(Debug, Clone)]
pub struct BoxMesh {
    pub n: [usize; 3],
    pub lo: Vec3,
    pub hi: Vec3,
    pub vertices: Vec<Vec3>,
    pub tets: Vec<[usize; 4]>,
    pub edges: Vec<[usize; 2]>,
    pub faces: Vec<[usize; 3]>,
    pub tet_to_edges: Vec<[SignedEdge; 6]>,
    /// Face opposite each local vertex.
    pub tet_to_faces: Vec<[usize; 4]>,
    pub boundary_vertex: Vec<bool>,
    pub boundary_edge: Vec<bool>,
    pub boundary_face: Vec<bool>,
    pub geometry: Vec<TetGeometry>,
}

fn tet_geometry(x: [Vec3; 4]) -> TetGeometry {
    let a = sub3(x[1], x[0]);
    let b = sub3(x[2], x[0]);
    let c = sub3(x[3], x[0]);
    let det = dot3(a, cross3(b, c));
    // Rows of the inverse Jacobian are the barycentric gradients of vertices 1..3.
    let g1 = cross3(b, c).map(|v| v / det);
    let g2 = cross3(c, a).map(|v| v / det);
    let g3 = cross3(a, b).map(|v| v / det);
    let g0 = [-(g1[0] + g2[0] + g3[0]), -(g1[1] + g2[1] + g3[1]), -(g1[2] + g2[2] + g3[2])];
    TetGeometry {
        volume: det / 6.0,
        grads: [g0, g1, g2, g3],
    }
}

fn lookup<const N: usize>(table: &[[usize; N]], key: [usize; N]) -> usize {
    table.binary_search(&key).expect("entity present in table")
}

pub fn build_box_mesh(n: [usize; 3], lo: Vec3, hi: Vec3) -> Result<BoxMesh, MeshError> {
    if n.contains(&0) {
        return Err(MeshError::EmptyGrid(n));
    }
    if (0..3).any(|d| !(hi[d] > lo[d])) {
        return Err(MeshError::DegenerateBounds { lo, hi });
    }
    let [nx, ny, nz] = n;
    let vid = |i: usize, j: usize, k: usize| i + (nx + 1) * (j + (ny + 1) * k);
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                let idx = [i, j, k];
                vertices.push(std::array::from_fn(|d| {
                    lo[d] + (hi[d] - lo[d]) * idx[d] as f64 / n[d] as f64
                }));
            }
        }
    }

    let mut tets = Vec::with_capacity(6 * nx * ny * nz);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                for perm in PERMUTATIONS {
                    let mut c = [i, j, k];
                    let mut path = [vid(c[0], c[1], c[2]); 4];
                    for (step, &axis) in perm.iter().enumerate() {
                        c[axis] += 1;
                        path[step + 1] = vid(c[0], c[1], c[2]);
                    }
                    let odd = matches!(perm, [0, 2, 1] | [1, 0, 2] | [2, 1, 0]);
                    if odd {
                        path.swap(2, 3);
                    }
                    tets.push(path);
                }
            }
        }
    }

    let mut edges: Vec<[usize; 2]> = Vec::with_capacity(7 * tets.len());
    let mut faces: Vec<[usize; 3]> = Vec::with_capacity(4 * tets.len());
    for t in &tets {
        for (a, b) in LOCAL_EDGES {
            edges.push([t[a].min(t[b]), t[a].max(t[b])]);
        }
        for skip in 0..4 {
            faces.push(face_key(t, skip));
        }
    }
    edges.sort_unstable();
    edges.dedup();
    faces.sort_unstable();
    faces.dedup();

    let mut tet_to_edges = Vec::with_capacity(tets.len());
    let mut tet_to_faces = Vec::with_capacity(tets.len());
    let mut face_count = vec![0u8; faces.len()];
    for t in &tets {
        tet_to_edges.push(LOCAL_EDGES.map(|(a, b)| SignedEdge {
            id: lookup(&edges, [t[a].min(t[b]), t[a].max(t[b])]),
            sign: if t[a] < t[b] { 1 } else { -1 },
        }));
        let tf: [usize; 4] = std::array::from_fn(|skip| lookup(&faces, face_key(t, skip)));
        for &f in &tf {
            face_count[f] += 1;
        }
        tet_to_faces.push(tf);
    }

    let boundary_face: Vec<bool> = face_count.iter().map(|&c| c == 1).collect();
    let mut boundary_vertex = vec![false; vertices.len()];
    let mut boundary_edge = vec![false; edges.len()];
    for (f, verts) in faces.iter().enumerate() {
        if !boundary_face[f] {
            continue;
        }
        for &v in verts {
            boundary_vertex[v] = true;
        }
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            boundary_edge[lookup(&edges, [verts[a], verts[b]])] = true;
        }
    }

    let geometry = tets
        .iter()
        .map(|t| tet_geometry(t.map(|v| vertices[v])))
        .collect();

    Ok(BoxMesh {
        n,
        lo,
        hi,
        vertices,
        tets,
        edges,
        faces,
        tet_to_edges,
        tet_to_faces,
        boundary_vertex,
        boundary_edge,
        boundary_face,
        geometry,
    })
}

fn face_key(t: &[usize; 4], skip: usize) -> [usize; 3] {
    let mut f = [0; 3];
    let mut m = 0;
    for (a, &v) in t.iter().enumerate() {
        if a != skip {
            f[m] = v;
            m += 1;
        }
    }
    f.sort_unstable();
    f
}

/// Uniform refinement: the Kuhn mesh with doubled cell counts on the same box.
pub fn refine(m: &BoxMesh) -> BoxMesh {
    build_box_mesh(m.n.map(|k| 2 * k), m.lo, m.hi).expect("refinement of a valid mesh")
}

/// Id of each coarse vertex inside the refined mesh.
pub fn coarse_vertex_map(coarse: &BoxMesh, fine: &BoxMesh) -> Vec<usize> {
    let [nx, ny, _] = coarse.n;
    let [fx, fy, _] = fine.n;
    assert_eq!(fine.n, coarse.n.map(|k| 2 * k), "meshes are not one refinement apart");
    (0..coarse.vertices.len())
        .map(|v| {
            let i = v % (nx + 1);
            let j = (v / (nx + 1)) % (ny + 1);
            let k = v / ((nx + 1) * (ny + 1));
            2 * i + (fx + 1) * (2 * j + (fy + 1) * 2 * k)
        })
        .collect()
}

impl BoxMesh {
    pub fn entity_counts(&self) -> (usize, usize, usize, usize) {
        (self.vertices.len(), self.edges.len(), self.faces.len(), self.tets.len())
    }

    pub fn euler_characteristic(&self) -> i64 {
        let (v, e, f, t) = self.entity_counts();
        v as i64 - e as i64 + f as i64 - t as i64
    }

    /// Longest edge length.
    pub fn mesh_size(&self) -> f64 {
        self.edges
            .iter()
            .map(|&[a, b]| norm3(sub3(self.vertices[b], self.vertices[a])))
            .fold(0.0, f64::max)
    }

    pub fn n_tets(&self) -> usize {
        self.tets.len()
    }

    pub fn tet_vertices(&self, t: usize) -> [Vec3; 4] {
        self.tets[t].map(|v| self.vertices[v])
    }

    /// Point with the given barycentric coordinates in tet `t`.
    pub fn point_in(&self, t: usize, bary: [f64; 4]) -> Vec3 {
        let x = self.tet_vertices(t);
        std::array::from_fn(|d| (0..4).map(|a| bary[a] * x[a][d]).sum())
    }

    /// Barycentric coordinates of `x` relative to tet `t`.
    pub fn barycentric(&self, t: usize, x: Vec3) -> [f64; 4] {
        let g = &self.geometry[t];
        let x0 = self.vertices[self.tets[t][0]];
        let d = sub3(x, x0);
        let l1 = dot3(g.grads[1], d);
        let l2 = dot3(g.grads[2], d);
        let l3 = dot3(g.grads[3], d);
        [1.0 - l1 - l2 - l3, l1, l2, l3]
    }

    /// Tet containing `x` (points on shared faces resolve to one of the neighbours).
    pub fn locate(&self, x: Vec3) -> usize {
        let mut cell = [0usize; 3];
        let mut t = [0.0; 3];
        for d in 0..3 {
            let s = (x[d] - self.lo[d]) / (self.hi[d] - self.lo[d]) * self.n[d] as f64;
            let c = (s.floor().max(0.0) as usize).min(self.n[d] - 1);
            cell[d] = c;
            t[d] = s - c as f64;
        }
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| t[b].partial_cmp(&t[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
        let p = PERMUTATIONS.iter().position(|q| *q == order).expect("valid permutation");
        let c = cell[0] + self.n[0] * (cell[1] + self.n[1] * cell[2]);
        6 * c + p
    }

    /// Outward unit normal and area of local face `skip` (opposite local vertex `skip`).
    pub fn face_normal_area(&self, t: usize, skip: usize) -> (Vec3, f64) {
        let g = self.geometry[t].grads[skip];
        let gn = norm3(g);
        // |∇λ| = area / (3 V) for the face opposite the vertex.
        let area = 3.0 * self.geometry[t].volume * gn;
        (g.map(|v| -v / gn), area)
    }

    pub fn interior_vertex_count(&self) -> usize {
        self.boundary_vertex.iter().filter(|b| !**b).count()
    }

    pub fn interior_edge_count(&self) -> usize {
        self.boundary_edge.iter().filter(|b| !**b).count()
    }
}
