//! Measures, kernels, tetrahedral decomposition and quadrature.

pub mod convex;
pub mod kernel;
pub mod measures;
pub mod quadrature;

pub use convex::{ConvexPolygon2, ConvexPolyhedron};
pub use kernel::{face_kernel, face_kernel_area, kernel2d, kernel3d, kernel_volume, winding_number};
pub use measures::{CellGeometry, FaceFrame, FaceGeometry, EPS_GEOM, EPS_PLANAR};
pub use quadrature::{
    cell_quadrature, decompose_into_tets, face_quadrature, integrate_cell, integrate_face,
    tet_volume, GeometryError, QuadPoint,
};

use crate::mesh::PolyMesh;
use crate::point::Point3;

/// Cached measures of face `f`: area, centroid, diameter, unit normal and
/// local frame.
pub fn face_measures(mesh: &PolyMesh, f: usize) -> &FaceGeometry {
    &mesh.faces[f].geometry
}

/// Volume, barycenter and diameter of cell `c`.
pub fn cell_measures(mesh: &PolyMesh, c: usize) -> (f64, Point3, f64) {
    let g = &mesh.cells[c].geometry;
    (g.volume, g.barycenter, g.diameter)
}
