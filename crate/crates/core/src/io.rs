//! Legacy ASCII VTK output of meshes and fields.

use crate::fe::{EdgeField, NodalField};
use crate::mesh::BoxMesh;
use crate::tensor::{Mat3, Vec3};
use std::io::{self, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("field `{name}` has {got} entries, expected {expected}")]
    LengthMismatch { name: String, expected: usize, got: usize },
}

const VTK_TETRA: u8 = 10;
const CENTROID: [f64; 4] = [0.25; 4];

enum CellData {
    Scalars(Vec<f64>),
    Tensors(Vec<Mat3>),
}

/// Unstructured-grid file with point vectors and cell data.
pub struct VtkFile<'m> {
    mesh: &'m BoxMesh,
    title: String,
    point_vectors: Vec<(String, Vec<Vec3>)>,
    cell_data: Vec<(String, CellData)>,
}

fn check_len(name: &str, expected: usize, got: usize) -> Result<(), IoError> {
    if expected == got {
        Ok(())
    } else {
        Err(IoError::LengthMismatch { name: name.to_string(), expected, got })
    }
}

impl<'m> VtkFile<'m> {
    pub fn new(mesh: &'m BoxMesh, title: &str) -> Self {
        Self { mesh, title: title.replace('\n', " "), point_vectors: Vec::new(), cell_data: Vec::new() }
    }

    pub fn point_vectors(mut self, name: &str, data: Vec<Vec3>) -> Result<Self, IoError> {
        check_len(name, self.mesh.vertices.len(), data.len())?;
        self.point_vectors.push((name.to_string(), data));
        Ok(self)
    }

    pub fn cell_tensors(mut self, name: &str, data: Vec<Mat3>) -> Result<Self, IoError> {
        check_len(name, self.mesh.n_tets(), data.len())?;
        self.cell_data.push((name.to_string(), CellData::Tensors(data)));
        Ok(self)
    }

    pub fn cell_scalars(mut self, name: &str, data: Vec<f64>) -> Result<Self, IoError> {
        check_len(name, self.mesh.n_tets(), data.len())?;
        self.cell_data.push((name.to_string(), CellData::Scalars(data)));
        Ok(self)
    }

    pub fn write<W: Write>(&self, mut w: W) -> io::Result<()> {
        let m = self.mesh;
        writeln!(w, "# vtk DataFile Version 3.0")?;
        writeln!(w, "{}", self.title)?;
        writeln!(w, "ASCII")?;
        writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
        writeln!(w, "POINTS {} double", m.vertices.len())?;
        for x in &m.vertices {
            writeln!(w, "{:e} {:e} {:e}", x[0], x[1], x[2])?;
        }
        writeln!(w, "CELLS {} {}", m.n_tets(), 5 * m.n_tets())?;
        for t in &m.tets {
            writeln!(w, "4 {} {} {} {}", t[0], t[1], t[2], t[3])?;
        }
        writeln!(w, "CELL_TYPES {}", m.n_tets())?;
        for _ in &m.tets {
            writeln!(w, "{VTK_TETRA}")?;
        }
        if !self.point_vectors.is_empty() {
            writeln!(w, "POINT_DATA {}", m.vertices.len())?;
            for (name, data) in &self.point_vectors {
                writeln!(w, "VECTORS {name} double")?;
                for v in data {
                    writeln!(w, "{:e} {:e} {:e}", v[0], v[1], v[2])?;
                }
            }
        }
        if !self.cell_data.is_empty() {
            writeln!(w, "CELL_DATA {}", m.n_tets())?;
            for (name, data) in &self.cell_data {
                match data {
                    CellData::Scalars(values) => {
                        writeln!(w, "SCALARS {name} double 1")?;
                        writeln!(w, "LOOKUP_TABLE default")?;
                        for v in values {
                            writeln!(w, "{v:e}")?;
                        }
                    }
                    CellData::Tensors(values) => {
                        writeln!(w, "TENSORS {name} double")?;
                        for t in values {
                            for row in &t.0 {
                                writeln!(w, "{:e} {:e} {:e}", row[0], row[1], row[2])?;
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn write_to_path(&self, path: &Path) -> io::Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = io::BufWriter::new(file);
        self.write(&mut w)?;
        w.flush()
    }
}

/// Nodal values, zero on constrained vertices.
pub fn vertex_values(u: &NodalField) -> Vec<Vec3> {
    let space = u.space();
    (0..space.mesh().vertices.len())
        .map(|v| std::array::from_fn(|c| space.dof(v, c).map_or(0.0, |d| u.coeffs()[d])))
        .collect()
}

/// Field value at each element centroid.
pub fn centroid_values(p: &EdgeField) -> Vec<Mat3> {
    (0..p.space().mesh().n_tets())
        .map(|t| p.eval_p(t, CENTROID).expect("element in range"))
        .collect()
}
