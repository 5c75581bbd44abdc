//! Areas, volumes, centroids, diameters and local face frames.

use serde::{Deserialize, Serialize};

use crate::point::{diameter, polygon_signed_area, Point2, Point3};

/// Areas at or below `EPS_GEOM * diam^2` and volumes at or below
/// `EPS_GEOM * diam^3` are degenerate.
pub const EPS_GEOM: f64 = 1e-12;

/// Relative planarity tolerance: a face is planar when every vertex lies
/// within `EPS_PLANAR * h_F` of its best-fit plane.
pub const EPS_PLANAR: f64 = 1e-9;

/// Orthonormal in-plane frame of a face.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaceFrame {
    pub origin: Point3,
    pub e1: Point3,
    pub e2: Point3,
}

impl FaceFrame {
    /// Local `(xi, eta)` coordinates of a point.
    #[inline]
    pub fn to_local(&self, p: Point3) -> Point2 {
        let d = p - self.origin;
        Point2::new(d.dot(self.e1), d.dot(self.e2))
    }

    #[inline]
    pub fn to_global(&self, q: Point2) -> Point3 {
        self.origin + self.e1 * q.x + self.e2 * q.y
    }
}

/// Cached measures of a planar polygonal face.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceGeometry {
    pub area: f64,
    pub centroid: Point3,
    pub diameter: f64,
    /// Unit normal; the loop is counterclockwise around it.
    pub normal: Point3,
    pub frame: FaceFrame,
    /// Largest distance of a loop vertex from the face plane.
    pub planarity_deviation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceDefect {
    Degenerate,
    NonPlanar,
}

/// Measures of the polygon with the given vertex loop.
///
/// The normal comes from Newell's formula, so the loop is counterclockwise
/// around it by construction and the shoelace area in the local frame is
/// positive.
pub fn polygon_geometry(loop_pts: &[Point3]) -> Result<FaceGeometry, (FaceDefect, f64)> {
    let n = loop_pts.len();
    if n < 3 {
        return Err((FaceDefect::Degenerate, 0.0));
    }
    // Offsets from the vertex mean keep the cross products well scaled for
    // small faces far from the origin.
    let mean = loop_pts.iter().fold(Point3::ZERO, |a, &p| a + p) / n as f64;
    let mut newell = Point3::ZERO;
    for i in 0..n {
        newell += (loop_pts[i] - mean).cross(loop_pts[(i + 1) % n] - mean);
    }
    let twice_area = newell.norm();
    let diam = diameter(loop_pts);
    // Relative to the squared diameter, so that scaling never makes a
    // valid face degenerate.
    let min_area = EPS_GEOM * diam * diam;
    if !(0.5 * twice_area > min_area) {
        return Err((FaceDefect::Degenerate, 0.5 * twice_area));
    }
    let normal = newell / twice_area;
    let p0 = loop_pts[0];
    // First in-plane direction: the longest vertex offset from p0 gives a
    // well-conditioned axis even for loops with short leading edges.
    let mut axis = Point3::ZERO;
    for &p in &loop_pts[1..] {
        let d = p - p0;
        let d = d - normal * d.dot(normal);
        if d.norm_squared() > axis.norm_squared() {
            axis = d;
        }
    }
    let e1 = axis.normalized();
    let e2 = normal.cross(e1);
    let provisional = FaceFrame { origin: p0, e1, e2 };
    let local: Vec<Point2> = loop_pts.iter().map(|&p| provisional.to_local(p)).collect();
    let area = polygon_signed_area(&local);
    if !(area > min_area) {
        return Err((FaceDefect::Degenerate, area));
    }
    // Area centroid in the local frame.
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..n {
        let (a, b) = (local[i], local[(i + 1) % n]);
        let w = a.cross(b);
        cx += (a.x + b.x) * w;
        cy += (a.y + b.y) * w;
    }
    let c2 = Point2::new(cx / (6.0 * area), cy / (6.0 * area));
    // Mean offset along the normal places the centroid on the best-fit plane.
    let mean_off = loop_pts.iter().map(|&p| (p - p0).dot(normal)).sum::<f64>() / n as f64;
    let centroid = provisional.to_global(c2) + normal * mean_off;
    let deviation = loop_pts
        .iter()
        .map(|&p| (p - centroid).dot(normal).abs())
        .fold(0.0, f64::max);
    if deviation > EPS_PLANAR * diam {
        return Err((FaceDefect::NonPlanar, deviation));
    }
    Ok(FaceGeometry {
        area,
        centroid,
        diameter: diam,
        normal,
        frame: FaceFrame { origin: centroid, e1, e2 },
        planarity_deviation: deviation,
    })
}

/// Cached measures of a polyhedral cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellGeometry {
    pub volume: f64,
    /// Volume centroid.
    pub barycenter: Point3,
    pub diameter: f64,
}

/// Signed volume and first moment of a closed surface given by outward
/// oriented face loops, using a fan of tetrahedra from `reference` through
/// each face centroid. Exact for planar faces regardless of convexity.
pub fn signed_volume_and_moment(
    reference: Point3,
    faces: impl IntoIterator<Item = (Vec<Point3>, Point3)>,
) -> (f64, Point3) {
    let mut vol = 0.0;
    let mut moment = Point3::ZERO;
    for (pts, center) in faces {
        let n = pts.len();
        for i in 0..n {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            let v = (center - reference).dot((a - reference).cross(b - reference)) / 6.0;
            vol += v;
            moment += (reference + center + a + b) * (v / 4.0);
        }
    }
    (vol, moment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(x: f64, y: f64, z: f64) -> Point3 {
        Point3::new(x, y, z)
    }

    #[test]
    fn unit_square_face() {
        let g = polygon_geometry(&[p(0., 0., 0.), p(1., 0., 0.), p(1., 1., 0.), p(0., 1., 0.)])
            .unwrap();
        assert_relative_eq!(g.area, 1.0, epsilon = 1e-15);
        assert_relative_eq!(g.diameter, 2f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(g.normal.z, 1.0);
        assert_relative_eq!(g.centroid.x, 0.5, epsilon = 1e-15);
        assert_relative_eq!(g.centroid.y, 0.5, epsilon = 1e-15);
        assert!(g.frame.e1.dot(g.frame.e2).abs() < 1e-15);
        assert!(g.frame.e1.cross(g.frame.e2).dot(g.normal) > 0.999_999);
    }

    #[test]
    fn equilateral_triangle_face() {
        let g = polygon_geometry(&[p(0., 0., 0.), p(1., 0., 0.), p(0.5, 3f64.sqrt() / 2., 0.)])
            .unwrap();
        assert_relative_eq!(g.area, 3f64.sqrt() / 4.0, epsilon = 1e-15);
        assert_relative_eq!(g.diameter, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn collinear_face_is_degenerate() {
        let e = polygon_geometry(&[p(0., 0., 0.), p(1., 0., 0.), p(2., 0., 0.)]).unwrap_err();
        assert_eq!(e.0, FaceDefect::Degenerate);
    }

    #[test]
    fn warped_quad_is_non_planar() {
        let e = polygon_geometry(&[p(0., 0., 0.), p(1., 0., 0.), p(1., 1., 0.1), p(0., 1., 0.)])
            .unwrap_err();
        assert_eq!(e.0, FaceDefect::NonPlanar);
    }

    #[test]
    fn tilted_face_centroid_lies_on_plane() {
        let pts = [p(0., 0., 1.), p(2., 0., 0.), p(2., 1., 0.), p(0., 1., 1.)];
        let g = polygon_geometry(&pts).unwrap();
        assert_relative_eq!(g.area, 5f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(g.centroid.x, 1.0, epsilon = 1e-14);
        assert_relative_eq!(g.centroid.y, 0.5, epsilon = 1e-14);
        assert_relative_eq!(g.centroid.z, 0.5, epsilon = 1e-14);
    }
}
