//! Hexahedral meshes of tensor-product point grids.

use std::collections::HashMap;

use thiserror::Error;

use crate::mesh::{build_mesh, MeshError, PolyMesh};
use crate::point::Point3;

#[derive(Debug, Error)]
pub enum HexError {
    #[error("point cloud is not a tensor-product grid")]
    NotAGrid,
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

fn distinct(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Meshes a cloud whose points are exactly the nodes of a grid
/// `xs x ys x zs` (in any order) with one hexahedron per grid box.
pub fn hex_mesh(points: &[Point3]) -> Result<PolyMesh, HexError> {
    let xs = distinct(points.iter().map(|p| p.x).collect());
    let ys = distinct(points.iter().map(|p| p.y).collect());
    let zs = distinct(points.iter().map(|p| p.z).collect());
    let (nx, ny, nz) = (xs.len(), ys.len(), zs.len());
    if nx < 2 || ny < 2 || nz < 2 || nx * ny * nz != points.len() {
        return Err(HexError::NotAGrid);
    }
    let key = |p: &Point3| (p.x.to_bits(), p.y.to_bits(), p.z.to_bits());
    let lookup: HashMap<_, usize> = points.iter().enumerate().map(|(i, p)| (key(p), i)).collect();
    if lookup.len() != points.len() {
        return Err(HexError::NotAGrid);
    }
    let mut node = vec![0usize; nx * ny * nz];
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let p = Point3::new(xs[i], ys[j], zs[k]);
                node[i + nx * (j + ny * k)] = *lookup.get(&key(&p)).ok_or(HexError::NotAGrid)?;
            }
        }
    }
    let v = |i: usize, j: usize, k: usize| node[i + nx * (j + ny * k)];

    let mut faces = Vec::new();
    let xf = |i: usize, j: usize, k: usize| i + nx * (j + (ny - 1) * k);
    for k in 0..nz - 1 {
        for j in 0..ny - 1 {
            for i in 0..nx {
                faces.push(vec![v(i, j, k), v(i, j + 1, k), v(i, j + 1, k + 1), v(i, j, k + 1)]);
            }
        }
    }
    let y0 = faces.len();
    let yf = |i: usize, j: usize, k: usize| y0 + i + (nx - 1) * (j + ny * k);
    for k in 0..nz - 1 {
        for j in 0..ny {
            for i in 0..nx - 1 {
                faces.push(vec![v(i, j, k), v(i, j, k + 1), v(i + 1, j, k + 1), v(i + 1, j, k)]);
            }
        }
    }
    let z0 = faces.len();
    let zf = |i: usize, j: usize, k: usize| z0 + i + (nx - 1) * (j + (ny - 1) * k);
    for k in 0..nz {
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                faces.push(vec![v(i, j, k), v(i + 1, j, k), v(i + 1, j + 1, k), v(i, j + 1, k)]);
            }
        }
    }
    let mut cells = Vec::with_capacity((nx - 1) * (ny - 1) * (nz - 1));
    for k in 0..nz - 1 {
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                cells.push(vec![
                    xf(i, j, k),
                    xf(i + 1, j, k),
                    yf(i, j, k),
                    yf(i, j + 1, k),
                    zf(i, j, k),
                    zf(i, j, k + 1),
                ]);
            }
        }
    }
    Ok(build_mesh(points.to_vec(), faces, cells)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::mesh_size;
    use crate::sampling::{sample_anisotropic, sample_parallel, sample_poisson, sample_uniform};
    use approx::assert_relative_eq;

    #[test]
    fn uniform_t2() {
        let m = hex_mesh(&sample_uniform(2).points).unwrap();
        assert_eq!(m.num_cells(), 8);
        assert_eq!(m.num_vertices(), 27);
        assert_relative_eq!(mesh_size(&m), 3f64.sqrt() / 2.0, epsilon = 1e-15);
        assert!(m.covers_unit_cube());
    }

    #[test]
    fn anisotropic_t4() {
        let m = hex_mesh(&sample_anisotropic(4).points).unwrap();
        assert_eq!(m.num_cells(), 48);
        assert!(m.covers_unit_cube());
    }

    #[test]
    fn parallel_faces_stay_planar() {
        let m = hex_mesh(&sample_parallel(5, 3).points).unwrap();
        assert_eq!(m.num_cells(), 125);
        assert!(m.covers_unit_cube());
        assert!(m.faces.iter().all(|f| f.geometry.planarity_deviation < 1e-14));
    }

    #[test]
    fn poisson_is_not_a_grid() {
        let c = sample_poisson(4, 1).unwrap();
        assert!(matches!(hex_mesh(&c.points), Err(HexError::NotAGrid)));
    }
}
