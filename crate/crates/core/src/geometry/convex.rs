//! Convex polygons and polyhedra with half-space clipping.

use std::collections::HashMap;

use crate::geometry::measures::signed_volume_and_moment;
use crate::point::{polygon_signed_area, Point2, Point3};

/// A convex polygon in a face's local frame, counterclockwise. An empty
/// point list represents the empty set.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvexPolygon2 {
    pub points: Vec<Point2>,
}

impl ConvexPolygon2 {
    pub fn rectangle(lo: Point2, hi: Point2) -> Self {
        ConvexPolygon2 {
            points: vec![lo, Point2::new(hi.x, lo.y), hi, Point2::new(lo.x, hi.y)],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.points.len() < 3
    }

    pub fn area(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            polygon_signed_area(&self.points).max(0.0)
        }
    }

    /// Keeps the part where `n . x <= d`; points within `tol` of the line
    /// count as inside.
    pub fn clip(&self, n: Point2, d: f64, tol: f64) -> ConvexPolygon2 {
        if self.is_empty() {
            return ConvexPolygon2::default();
        }
        let s: Vec<f64> = self.points.iter().map(|p| n.dot(*p) - d).collect();
        if s.iter().all(|&v| v <= tol) {
            return self.clone();
        }
        if s.iter().all(|&v| v >= -tol) {
            return ConvexPolygon2::default();
        }
        let m = self.points.len();
        let mut out = Vec::with_capacity(m + 1);
        for i in 0..m {
            let j = (i + 1) % m;
            let (p, q) = (self.points[i], self.points[j]);
            let (sp, sq) = (s[i], s[j]);
            if sp <= tol {
                out.push(p);
            }
            if (sp < -tol && sq > tol) || (sp > tol && sq < -tol) {
                let t = sp / (sp - sq);
                out.push(p + (q - p) * t);
            }
        }
        dedup_cyclic2(&mut out, tol);
        let poly = ConvexPolygon2 { points: out };
        if poly.area() <= tol * tol {
            ConvexPolygon2::default()
        } else {
            poly
        }
    }

    pub fn centroid(&self) -> Option<Point2> {
        let a = self.area();
        if a <= 0.0 {
            return None;
        }
        let n = self.points.len();
        let (mut cx, mut cy) = (0.0, 0.0);
        for i in 0..n {
            let (p, q) = (self.points[i], self.points[(i + 1) % n]);
            let w = p.cross(q);
            cx += (p.x + q.x) * w;
            cy += (p.y + q.y) * w;
        }
        Some(Point2::new(cx / (6.0 * a), cy / (6.0 * a)))
    }
}

fn dedup_cyclic2(pts: &mut Vec<Point2>, tol: f64) {
    let mut out: Vec<Point2> = Vec::with_capacity(pts.len());
    for &p in pts.iter() {
        if out.last().is_none_or(|&q: &Point2| (p - q).norm() > tol) {
            out.push(p);
        }
    }
    while out.len() > 1 && (out[0] - *out.last().unwrap()).norm() <= tol {
        out.pop();
    }
    *pts = out;
}

/// A convex polyhedron with outward counterclockwise face loops. No faces
/// means the empty set.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvexPolyhedron {
    pub vertices: Vec<Point3>,
    pub faces: Vec<Vec<usize>>,
    /// Label carried by each face: the id of the clipping plane that created
    /// it, or `None` for faces of the seed box.
    pub face_tags: Vec<Option<usize>>,
}

impl ConvexPolyhedron {
    /// The box `[lo, hi]`; every face tagged `None`.
    pub fn cuboid(lo: Point3, hi: Point3) -> Self {
        let v = |i: usize| {
            Point3::new(
                if i & 1 == 0 { lo.x } else { hi.x },
                if i & 2 == 0 { lo.y } else { hi.y },
                if i & 4 == 0 { lo.z } else { hi.z },
            )
        };
        ConvexPolyhedron {
            vertices: (0..8).map(v).collect(),
            faces: vec![
                vec![0, 2, 3, 1],
                vec![4, 5, 7, 6],
                vec![0, 1, 5, 4],
                vec![2, 6, 7, 3],
                vec![0, 4, 6, 2],
                vec![1, 3, 7, 5],
            ],
            face_tags: vec![None; 6],
        }
    }

    /// Box with the six faces tagged by caller-provided labels, ordered
    /// `-x, +x, -y, +y, -z, +z`.
    pub fn cuboid_tagged(lo: Point3, hi: Point3, tags: [usize; 6]) -> Self {
        let mut c = Self::cuboid(lo, hi);
        // cuboid() face order is -z, +z, -y, +y, -x, +x.
        let order = [4, 5, 2, 3, 0, 1];
        for (k, &fi) in order.iter().enumerate() {
            c.face_tags[fi] = Some(tags[k]);
        }
        c
    }

    pub fn is_empty(&self) -> bool {
        self.faces.len() < 4
    }

    pub fn volume_and_centroid(&self) -> (f64, Point3) {
        if self.is_empty() {
            return (0.0, Point3::ZERO);
        }
        let reference = self.vertices.iter().fold(Point3::ZERO, |a, &p| a + p)
            / self.vertices.len() as f64;
        let loops = self.faces.iter().map(|f| {
            let pts: Vec<Point3> = f.iter().map(|&i| self.vertices[i]).collect();
            let c = pts.iter().fold(Point3::ZERO, |a, &p| a + p) / pts.len() as f64;
            (pts, c)
        });
        let (v, m) = signed_volume_and_moment(reference, loops);
        if v <= 0.0 {
            (0.0, reference)
        } else {
            (v, m / v)
        }
    }

    pub fn volume(&self) -> f64 {
        self.volume_and_centroid().0
    }

    /// Keeps the part where `n . x <= d`. Vertices within `tol` of the plane
    /// are treated as lying on it. The new cap face is tagged with `tag`.
    pub fn clip(&self, n: Point3, d: f64, tol: f64, tag: Option<usize>) -> ConvexPolyhedron {
        if self.is_empty() {
            return ConvexPolyhedron::default();
        }
        let s: Vec<f64> = self.vertices.iter().map(|p| n.dot(*p) - d).collect();
        if s.iter().all(|&v| v <= tol) {
            return self.clone();
        }
        if s.iter().all(|&v| v >= -tol) {
            return ConvexPolyhedron::default();
        }

        let mut vertices: Vec<Point3> = Vec::new();
        let mut old_to_new: Vec<Option<usize>> = vec![None; self.vertices.len()];
        let mut on_plane: Vec<usize> = Vec::new();
        for (i, &si) in s.iter().enumerate() {
            if si <= tol {
                old_to_new[i] = Some(vertices.len());
                if si >= -tol {
                    on_plane.push(vertices.len());
                }
                vertices.push(self.vertices[i]);
            }
        }
        let mut edge_points: HashMap<(usize, usize), usize> = HashMap::new();
        let mut faces = Vec::with_capacity(self.faces.len() + 1);
        let mut face_tags = Vec::with_capacity(self.faces.len() + 1);
        for (f, tagf) in self.faces.iter().zip(&self.face_tags) {
            let m = f.len();
            let mut lp = Vec::with_capacity(m + 1);
            for k in 0..m {
                let (a, b) = (f[k], f[(k + 1) % m]);
                if let Some(na) = old_to_new[a] {
                    lp.push(na);
                }
                let (sa, sb) = (s[a], s[b]);
                if (sa < -tol && sb > tol) || (sa > tol && sb < -tol) {
                    let key = (a.min(b), a.max(b));
                    let id = *edge_points.entry(key).or_insert_with(|| {
                        let (p, q, sp, sq) = if a < b {
                            (self.vertices[a], self.vertices[b], sa, sb)
                        } else {
                            (self.vertices[b], self.vertices[a], sb, sa)
                        };
                        let t = sp / (sp - sq);
                        vertices.push(p + (q - p) * t);
                        on_plane.push(vertices.len() - 1);
                        vertices.len() - 1
                    });
                    lp.push(id);
                }
            }
            lp.dedup();
            while lp.len() > 1 && lp[0] == *lp.last().unwrap() {
                lp.pop();
            }
            // A face entirely on the plane would coincide with the cap.
            let all_on = f.iter().all(|&v| s[v].abs() <= tol);
            if lp.len() >= 3 && !all_on {
                faces.push(lp);
                face_tags.push(*tagf);
            }
        }

        on_plane.sort_unstable();
        on_plane.dedup();
        if on_plane.len() >= 3 {
            let cap = order_cap(&vertices, &on_plane, n, tol);
            if cap.len() >= 3 {
                faces.push(cap);
                face_tags.push(tag);
            }
        }
        let mut out = ConvexPolyhedron { vertices, faces, face_tags };
        out.compact(tol);
        if out.faces.len() < 4 {
            ConvexPolyhedron::default()
        } else {
            out
        }
    }

    /// Merges coincident vertices, drops degenerate faces and unused
    /// vertices.
    fn compact(&mut self, tol: f64) {
        let n = self.vertices.len();
        let mut rep: Vec<usize> = (0..n).collect();
        for i in 0..n {
            if rep[i] != i {
                continue;
            }
            for j in i + 1..n {
                if rep[j] == j && (self.vertices[i] - self.vertices[j]).norm() <= tol {
                    rep[j] = i;
                }
            }
        }
        let mut faces = Vec::with_capacity(self.faces.len());
        let mut tags = Vec::with_capacity(self.faces.len());
        for (f, t) in self.faces.iter().zip(&self.face_tags) {
            let mut lp: Vec<usize> = f.iter().map(|&v| rep[v]).collect();
            lp.dedup();
            while lp.len() > 1 && lp[0] == *lp.last().unwrap() {
                lp.pop();
            }
            if lp.len() >= 3 && !self.is_sliver(&lp, tol) {
                faces.push(lp);
                tags.push(*t);
            }
        }
        let mut remap = vec![usize::MAX; n];
        let mut verts = Vec::new();
        for f in faces.iter_mut() {
            for v in f.iter_mut() {
                if remap[*v] == usize::MAX {
                    remap[*v] = verts.len();
                    verts.push(self.vertices[*v]);
                }
                *v = remap[*v];
            }
        }
        self.vertices = verts;
        self.faces = faces;
        self.face_tags = tags;
    }

    /// A face whose vertices are (nearly) collinear, e.g. the cap left by
    /// a plane that only touches an edge.
    fn is_sliver(&self, lp: &[usize], tol: f64) -> bool {
        let m = lp.len();
        let mut area = Point3::ZERO;
        let mut longest: f64 = 0.0;
        for k in 0..m {
            let (a, b) = (self.vertices[lp[k]], self.vertices[lp[(k + 1) % m]]);
            area += a.cross(b);
            longest = longest.max((b - a).norm());
        }
        0.5 * area.norm() <= tol * longest
    }

    /// Whether `p` satisfies every face plane up to `tol`.
    pub fn contains(&self, p: Point3, tol: f64) -> bool {
        if self.is_empty() {
            return false;
        }
        self.faces.iter().all(|f| {
            let pts: Vec<Point3> = f.iter().map(|&i| self.vertices[i]).collect();
            let m = pts.len();
            let mut nrm = Point3::ZERO;
            for k in 0..m {
                nrm += pts[k].cross(pts[(k + 1) % m]);
            }
            let nrm = nrm.normalized();
            nrm.dot(p - pts[0]) <= tol
        })
    }
}

/// Orders points lying on a plane counterclockwise around `n`.
fn order_cap(vertices: &[Point3], ids: &[usize], n: Point3, tol: f64) -> Vec<usize> {
    let c = ids.iter().fold(Point3::ZERO, |a, &i| a + vertices[i]) / ids.len() as f64;
    let a = [n.x.abs(), n.y.abs(), n.z.abs()];
    let helper = if a[0] <= a[1] && a[0] <= a[2] {
        Point3::new(1.0, 0.0, 0.0)
    } else if a[1] <= a[2] {
        Point3::new(0.0, 1.0, 0.0)
    } else {
        Point3::new(0.0, 0.0, 1.0)
    };
    let e1 = n.cross(helper).normalized();
    let e2 = n.normalized().cross(e1);
    let mut keyed: Vec<(f64, usize)> = ids
        .iter()
        .map(|&i| {
            let d = vertices[i] - c;
            (d.dot(e2).atan2(d.dot(e1)), i)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut out: Vec<usize> = Vec::with_capacity(keyed.len());
    for (_, i) in keyed {
        if out.last().is_none_or(|&j| (vertices[i] - vertices[j]).norm() > tol) {
            out.push(i);
        }
    }
    while out.len() > 1 && (vertices[out[0]] - vertices[*out.last().unwrap()]).norm() <= tol {
        out.pop();
    }
    out
}
