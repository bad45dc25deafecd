//! Legacy ASCII VTK unstructured-grid snapshots: the triangulation with the
//! level set, the material indicator, and the displacement as point data.

use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::Result;
use crate::fem::DisplacementField;
use crate::mesh2d::TriMesh;

pub fn write_vtk_snapshot_to(
    mesh: &TriMesh,
    phi: &[f64],
    chi: &[f64],
    displacement: &DisplacementField,
    mut w: impl Write,
) -> Result<()> {
    let n = mesh.node_count();
    assert_eq!(phi.len(), n);
    assert_eq!(chi.len(), n);
    assert_eq!(displacement.node_count(), n);

    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "topopt snapshot")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {n} double")?;
    for &[x, y] in mesh.nodes() {
        writeln!(w, "{x} {y} 0")?;
    }
    let m = mesh.triangle_count();
    writeln!(w, "CELLS {m} {}", 4 * m)?;
    for &[a, b, c] in mesh.triangles() {
        writeln!(w, "3 {a} {b} {c}")?;
    }
    writeln!(w, "CELL_TYPES {m}")?;
    for _ in 0..m {
        writeln!(w, "5")?;
    }
    writeln!(w, "POINT_DATA {n}")?;
    writeln!(w, "SCALARS phi double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for v in phi {
        writeln!(w, "{v}")?;
    }
    writeln!(w, "SCALARS chi double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for v in chi {
        writeln!(w, "{v}")?;
    }
    writeln!(w, "VECTORS displacement double")?;
    for i in 0..n {
        let [ux, uy] = displacement.node(i);
        writeln!(w, "{ux} {uy} 0")?;
    }
    Ok(())
}

pub fn write_vtk_snapshot(
    mesh: &TriMesh,
    phi: &[f64],
    chi: &[f64],
    displacement: &DisplacementField,
    path: &Path,
) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    write_vtk_snapshot_to(mesh, phi, chi, displacement, &mut w)?;
    w.flush()?;
    Ok(())
}
