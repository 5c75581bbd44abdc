//! Composite Gauss quadrature on polygons and star-shaped polyhedra.
//!
//! Cells are split into tetrahedra `(anchor, face anchor, v_i, v_{i+1})`,
//! faces into triangles `(face anchor, v_i, v_{i+1})`. The tetrahedron rule
//! has 14 points and degree 5; the triangle rule has 6 points and degree 4.

use thiserror::Error;

use crate::geometry::kernel::{face_kernel, kernel3d};
use crate::mesh::PolyMesh;
use crate::point::Point3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("cell {cell} has an empty kernel")]
    NoKernelPoint { cell: usize },
}

/// A quadrature point and its weight (weights sum to the measure).
pub type QuadPoint = (Point3, f64);

/// Barycentric points and weights of the 14-point rule, weights normalized
/// to sum to one.
fn tet_rule() -> &'static [([f64; 4], f64)] {
    use std::sync::OnceLock;
    static RULE: OnceLock<Vec<([f64; 4], f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let mut r = Vec::with_capacity(14);
        for &(a, w) in &[
            (0.310_885_919_263_300_609_8_f64, 0.018_781_320_953_002_641_8_f64),
            (0.092_735_250_310_891_226_402, 0.012_248_840_519_393_658_257),
        ] {
            let b = 1.0 - 3.0 * a;
            for k in 0..4 {
                let mut l = [a; 4];
                l[k] = b;
                r.push((l, 6.0 * w));
            }
        }
        let a = 0.045_503_704_125_649_649_492;
        let b = 0.5 - a;
        let w = 6.0 * 0.007_091_003_462_846_911_073;
        for (i, j) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
            let mut l = [b; 4];
            l[i] = a;
            l[j] = a;
            r.push((l, w));
        }
        r
    })
}

/// Barycentric points and weights of the 6-point triangle rule, weights
/// summing to one.
const TRI_RULE: [([f64; 3], f64); 6] = {
    const A1: f64 = 0.445_948_490_915_965;
    const W1: f64 = 0.223_381_589_678_011;
    const A2: f64 = 0.091_576_213_509_771;
    const W2: f64 = 0.109_951_743_655_322;
    [
        ([A1, A1, 1.0 - 2.0 * A1], W1),
        ([A1, 1.0 - 2.0 * A1, A1], W1),
        ([1.0 - 2.0 * A1, A1, A1], W1),
        ([A2, A2, 1.0 - 2.0 * A2], W2),
        ([A2, 1.0 - 2.0 * A2, A2], W2),
        ([1.0 - 2.0 * A2, A2, A2], W2),
    ]
};

/// Signed volume of a tetrahedron.
pub fn tet_volume(t: &[Point3; 4]) -> f64 {
    (t[1] - t[0]).dot((t[2] - t[0]).cross(t[3] - t[0])) / 6.0
}

/// Quadrature points of one tetrahedron; weights carry the signed volume.
pub fn tet_quadrature(t: &[Point3; 4], out: &mut Vec<QuadPoint>) {
    let vol = tet_volume(t);
    for (l, w) in tet_rule() {
        let p = t[0] * l[0] + t[1] * l[1] + t[2] * l[2] + t[3] * l[3];
        out.push((p, w * vol));
    }
}

fn triangle_quadrature(a: Point3, b: Point3, c: Point3, normal: Point3, out: &mut Vec<QuadPoint>) {
    let area = 0.5 * (b - a).cross(c - a).dot(normal);
    for (l, w) in TRI_RULE {
        out.push((a * l[0] + b * l[1] + c * l[2], w * area));
    }
}

/// Point of the face from which all of it is visible: its centroid when that
/// works, otherwise the centroid of the face kernel. Falls back to the
/// centroid (giving a signed decomposition) for non-star-shaped faces.
pub fn face_anchor(mesh: &PolyMesh, f: usize) -> Point3 {
    let face = &mesh.faces[f];
    let c = face.centroid();
    let frame = face.geometry.frame;
    let local: Vec<_> = face.vertices.iter().map(|&v| frame.to_local(mesh.vertices[v])).collect();
    let cl = frame.to_local(c);
    let n = local.len();
    let tol = 1e-12 * face.diameter();
    let visible = (0..n).all(|i| {
        let (a, b) = (local[i], local[(i + 1) % n]);
        let e = b - a;
        e.cross(cl - a) >= -tol * e.norm()
    });
    if visible {
        return c;
    }
    match face_kernel(mesh, f).centroid() {
        Some(k) => frame.to_global(k),
        None => c,
    }
}

/// Point of the cell from which its whole boundary is visible: the
/// barycenter if possible, otherwise the kernel centroid.
pub fn cell_anchor(mesh: &PolyMesh, c: usize) -> Result<Point3, GeometryError> {
    let cell = &mesh.cells[c];
    let x = cell.barycenter();
    let tol = 1e-12 * cell.diameter();
    let inside = cell.faces.iter().all(|cf| {
        mesh.outward_normal(*cf).dot(x - mesh.faces[cf.face].centroid()) <= -tol
    });
    if inside {
        return Ok(x);
    }
    let k = kernel3d(mesh, c);
    if k.is_empty() {
        return Err(GeometryError::NoKernelPoint { cell: c });
    }
    Ok(k.volume_and_centroid().1)
}

/// Splits a cell into tetrahedra fanned from a kernel point.
pub fn decompose_into_tets(mesh: &PolyMesh, c: usize) -> Result<Vec<[Point3; 4]>, GeometryError> {
    let anchor = cell_anchor(mesh, c)?;
    let mut tets = Vec::new();
    for cf in &mesh.cells[c].faces {
        let fa = face_anchor(mesh, cf.face);
        let lp = mesh.outward_loop(*cf);
        for k in 0..lp.len() {
            let a = mesh.vertices[lp[k]];
            let b = mesh.vertices[lp[(k + 1) % lp.len()]];
            tets.push([anchor, fa, a, b]);
        }
    }
    Ok(tets)
}

/// Quadrature points over a cell, exact for polynomials of degree 5.
pub fn cell_quadrature(mesh: &PolyMesh, c: usize) -> Result<Vec<QuadPoint>, GeometryError> {
    let tets = decompose_into_tets(mesh, c)?;
    let mut out = Vec::with_capacity(14 * tets.len());
    for t in &tets {
        tet_quadrature(t, &mut out);
    }
    Ok(out)
}

/// Quadrature points over a face, exact for polynomials of degree 4.
pub fn face_quadrature(mesh: &PolyMesh, f: usize) -> Vec<QuadPoint> {
    let face = &mesh.faces[f];
    let fa = face_anchor(mesh, f);
    let mut out = Vec::with_capacity(6 * face.vertices.len());
    for (a, b) in face.edges() {
        triangle_quadrature(fa, mesh.vertices[a], mesh.vertices[b], face.normal(), &mut out);
    }
    out
}

pub fn integrate_cell(
    mesh: &PolyMesh,
    c: usize,
    f: impl Fn(Point3) -> f64,
) -> Result<f64, GeometryError> {
    Ok(cell_quadrature(mesh, c)?.iter().map(|&(p, w)| w * f(p)).sum())
}

pub fn integrate_face(mesh: &PolyMesh, face: usize, f: impl Fn(Point3) -> f64) -> f64 {
    face_quadrature(mesh, face).iter().map(|&(p, w)| w * f(p)).sum()
}
