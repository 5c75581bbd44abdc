//! Legacy ASCII VTK export using the polyhedron cell type (42).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{MeshError, PolyMesh};

/// A scalar field attached to the exported mesh.
#[derive(Debug, Clone, Copy)]
pub enum VtkField<'a> {
    Point(&'a str, &'a [f64]),
    Cell(&'a str, &'a [f64]),
}

pub fn write_vtk(mesh: &PolyMesh, fields: &[VtkField<'_>], path: &Path) -> Result<(), MeshError> {
    fs::write(path, to_vtk_string(mesh, fields))?;
    Ok(())
}

pub(crate) fn to_vtk_string(mesh: &PolyMesh, fields: &[VtkField<'_>]) -> String {
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\npolyvem mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {} double", mesh.num_vertices());
    for v in &mesh.vertices {
        let _ = writeln!(s, "{:.16e} {:.16e} {:.16e}", v.x, v.y, v.z);
    }

    // Polyhedron stream per cell: nfaces, then (k, v1..vk) per face; the
    // CELLS line prefixes it with its length.
    let mut entries = Vec::with_capacity(mesh.num_cells());
    for c in &mesh.cells {
        let mut e = vec![c.faces.len()];
        for cf in &c.faces {
            let lp = mesh.outward_loop(*cf);
            e.push(lp.len());
            e.extend(lp);
        }
        entries.push(e);
    }
    let total: usize = entries.iter().map(|e| e.len() + 1).sum();
    let _ = writeln!(s, "CELLS {} {}", mesh.num_cells(), total);
    for e in &entries {
        let _ = write!(s, "{}", e.len());
        for x in e {
            let _ = write!(s, " {x}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "CELL_TYPES {}", mesh.num_cells());
    for _ in 0..mesh.num_cells() {
        s.push_str("42\n");
    }

    let points: Vec<_> = fields.iter().filter_map(|f| match f {
        VtkField::Point(n, v) => Some((n, v)),
        _ => None,
    }).collect();
    let cells: Vec<_> = fields.iter().filter_map(|f| match f {
        VtkField::Cell(n, v) => Some((n, v)),
        _ => None,
    }).collect();
    if !points.is_empty() {
        let _ = writeln!(s, "POINT_DATA {}", mesh.num_vertices());
        for (name, vals) in points {
            let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
            for v in vals.iter() {
                let _ = writeln!(s, "{v:.16e}");
            }
        }
    }
    if !cells.is_empty() {
        let _ = writeln!(s, "CELL_DATA {}", mesh.num_cells());
        for (name, vals) in cells {
            let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
            for v in vals.iter() {
                let _ = writeln!(s, "{v:.16e}");
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::unit_cube_mesh;

    #[test]
    fn cube_cell_stream_has_expected_size() {
        let m = unit_cube_mesh();
        let s = to_vtk_string(&m, &[VtkField::Cell("rho", &[0.5])]);
        // 1 (nfaces) + 6 * (1 + 4) = 31 entries, plus the leading count.
        assert!(s.contains("CELLS 1 32\n31 6 4 "));
        assert!(s.contains("CELL_TYPES 1\n42\n"));
        assert!(s.contains("CELL_DATA 1\nSCALARS rho double 1"));
        assert!(!s.contains("POINT_DATA"));
    }
}
