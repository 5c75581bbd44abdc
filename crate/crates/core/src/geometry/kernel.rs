//! Kernels of star-shaped polygons and polyhedra.
//!
//! The kernel of a planar-faced polyhedron is the intersection of the inner
//! half-spaces of its face planes (and likewise for polygons and edge lines),
//! computed here by clipping a bounding box one plane at a time.

use crate::geometry::convex::{ConvexPolygon2, ConvexPolyhedron};
use crate::mesh::PolyMesh;
use crate::point::{Point2, Point3};

/// Relative clipping tolerance; scaled by the bounding-box diameter.
pub const CLIP_TOL: f64 = 1e-12;

/// Kernel of a simple counterclockwise polygon.
pub fn kernel2d(polygon: &[Point2]) -> ConvexPolygon2 {
    if polygon.len() < 3 {
        return ConvexPolygon2::default();
    }
    let mut lo = polygon[0];
    let mut hi = polygon[0];
    for p in polygon {
        lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let tol = CLIP_TOL * (hi - lo).norm();
    let mut k = ConvexPolygon2::rectangle(lo, hi);
    let n = polygon.len();
    for i in 0..n {
        let (a, b) = (polygon[i], polygon[(i + 1) % n]);
        let e = b - a;
        let len = e.norm();
        if len == 0.0 {
            continue;
        }
        // Interior lies to the left of a counterclockwise edge; the outward
        // normal is (e.y, -e.x).
        let nrm = Point2::new(e.y, -e.x) / len;
        k = k.clip(nrm, nrm.dot(a), tol);
        if k.is_empty() {
            break;
        }
    }
    k
}

/// Kernel of face `f` in the face's local frame.
pub fn face_kernel(mesh: &PolyMesh, f: usize) -> ConvexPolygon2 {
    let face = &mesh.faces[f];
    let local: Vec<Point2> =
        face.vertices.iter().map(|&v| face.geometry.frame.to_local(mesh.vertices[v])).collect();
    kernel2d(&local)
}

/// Kernel of cell `c`.
pub fn kernel3d(mesh: &PolyMesh, c: usize) -> ConvexPolyhedron {
    let cell = &mesh.cells[c];
    let mut lo = mesh.vertices[cell.vertices[0]];
    let mut hi = lo;
    for &v in &cell.vertices {
        lo = lo.min(mesh.vertices[v]);
        hi = hi.max(mesh.vertices[v]);
    }
    let tol = CLIP_TOL * (hi - lo).norm();
    let mut k = ConvexPolyhedron::cuboid(lo, hi);
    for cf in &cell.faces {
        let n = mesh.outward_normal(*cf);
        let d = n.dot(mesh.faces[cf.face].centroid());
        k = k.clip(n, d, tol, Some(cf.face));
        if k.is_empty() {
            break;
        }
    }
    // Slivers left by roundoff on non-star-shaped cells count as empty.
    if k.volume() <= 1e-12 * cell.volume() {
        return ConvexPolyhedron::default();
    }
    k
}

/// Kernel volume `k(P)`.
pub fn kernel_volume(mesh: &PolyMesh, c: usize) -> f64 {
    kernel3d(mesh, c).volume()
}

/// Kernel area `k(F)`.
pub fn face_kernel_area(mesh: &PolyMesh, f: usize) -> f64 {
    let a = face_kernel(mesh, f).area();
    if a <= 1e-12 * mesh.faces[f].area() {
        0.0
    } else {
        a
    }
}

/// Generalized winding number of the boundary of cell `c` around `p`: 1
/// inside, 0 outside, fractional on the boundary.
pub fn winding_number(mesh: &PolyMesh, c: usize, p: Point3) -> f64 {
    let mut total = 0.0;
    for cf in &mesh.cells[c].faces {
        let lp = mesh.outward_loop(*cf);
        let fc = mesh.faces[cf.face].centroid();
        for k in 0..lp.len() {
            let a = mesh.vertices[lp[k]];
            let b = mesh.vertices[lp[(k + 1) % lp.len()]];
            total += solid_angle(fc - p, a - p, b - p);
        }
    }
    total / (4.0 * std::f64::consts::PI)
}

/// Signed solid angle of triangle `(a, b, c)` seen from the origin
/// (Van Oosterom and Strackee).
fn solid_angle(a: Point3, b: Point3, c: Point3) -> f64 {
    let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
    let num = a.dot(b.cross(c));
    let den = la * lb * lc + a.dot(b) * lc + a.dot(c) * lb + b.dot(c) * la;
    2.0 * num.atan2(den)
}
