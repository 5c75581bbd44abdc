//! Independent oracles shared by the integration tests and the acceptance
//! suite. Nothing here calls into the code paths it checks.

#![allow(dead_code)]

use std::collections::HashMap;

use polyvem::mesh::{prism_mesh, PolyMesh};
use polyvem::Point3;
use rand::Rng;

/// Distinct vertex ids of a cell, ascending.
pub fn cell_vertices(mesh: &PolyMesh, c: usize) -> Vec<usize> {
    let mut v: Vec<usize> = mesh.cells[c].faces.iter().flat_map(|cf| mesh.faces[cf.face].vertices.clone()).collect();
    v.sort_unstable();
    v.dedup();
    v
}

fn det3(a: Point3, b: Point3, c: Point3) -> f64 {
    a.x * (b.y * c.z - b.z * c.y) - a.y * (b.x * c.z - b.z * c.x) + a.z * (b.x * c.y - b.y * c.x)
}

/// Classical linear finite element stiffness matrix of a tetrahedral mesh,
/// from the barycentric gradients of every tet.
pub fn fem_stiffness(mesh: &PolyMesh) -> HashMap<(usize, usize), f64> {
    let mut k = HashMap::new();
    for c in 0..mesh.num_cells() {
        let ids = cell_vertices(mesh, c);
        assert_eq!(ids.len(), 4, "cell {c} is not a tetrahedron");
        let p: Vec<Point3> = ids.iter().map(|&i| mesh.vertices[i]).collect();
        let (a, b, d) = (p[1] - p[0], p[2] - p[0], p[3] - p[0]);
        let det = det3(a, b, d);
        let vol = det.abs() / 6.0;
        // Rows of the inverse Jacobian are the gradients of lambda_1..3.
        let g1 = b.cross(d) * (1.0 / det);
        let g2 = d.cross(a) * (1.0 / det);
        let g3 = a.cross(b) * (1.0 / det);
        let g0 = (g1 + g2 + g3) * -1.0;
        let g = [g0, g1, g2, g3];
        for i in 0..4 {
            for j in 0..4 {
                *k.entry((ids[i], ids[j])).or_insert(0.0) += vol * g[i].dot(g[j]);
            }
        }
    }
    k
}

/// Circumcenter and radius of a tetrahedron.
pub fn circumsphere(p: [Point3; 4]) -> (Point3, f64) {
    let (a, b, c) = (p[1] - p[0], p[2] - p[0], p[3] - p[0]);
    let det = det3(a, b, c);
    let num = b.cross(c) * a.norm_squared() + c.cross(a) * b.norm_squared() + a.cross(b) * c.norm_squared();
    let off = num * (1.0 / (2.0 * det));
    (p[0] + off, off.norm())
}

/// Rotation about a random axis followed by a translation.
#[derive(Debug, Clone, Copy)]
pub struct RigidMotion {
    axis: Point3,
    angle: f64,
    shift: Point3,
}

impl RigidMotion {
    pub fn random(rng: &mut impl Rng) -> Self {
        let axis = loop {
            let a = Point3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            if a.norm() > 0.1 {
                break a.normalized();
            }
        };
        let shift = Point3::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        RigidMotion { axis, angle: rng.random_range(0.0..std::f64::consts::TAU), shift }
    }

    /// Rodrigues' rotation formula.
    pub fn apply(&self, p: Point3) -> Point3 {
        let (s, c) = self.angle.sin_cos();
        let k = self.axis;
        p * c + k.cross(p) * s + k * (k.dot(p) * (1.0 - c)) + self.shift
    }
}

/// A prism over a polygon with an explicit triangulation of its boundary
/// and a set of boundary points whose visibility decides kernel
/// membership.
pub struct TestCell {
    pub mesh: PolyMesh,
    pub triangles: Vec<[Point3; 3]>,
    pub targets: Vec<Point3>,
}

/// Builds the prism and its boundary model. `fan` is a point of the
/// polygon's kernel; when `None` the polygon is triangulated by ear
/// clipping, which is only used for the non-star-shaped shapes.
pub fn prism_cell(polygon: &[(f64, f64)], height: f64, fan: Option<(f64, f64)>, motion: &RigidMotion) -> TestCell {
    let n = polygon.len();
    let mesh = prism_mesh(polygon, height).unwrap().map_vertices(|p| motion.apply(p)).unwrap();
    let at = |(x, y): (f64, f64), z: f64| motion.apply(Point3::new(x, y, z));
    let mut triangles = Vec::new();
    let mut targets = Vec::new();
    let caps: Vec<[(f64, f64); 3]> = match fan {
        Some(c) => (0..n).map(|i| [c, polygon[i], polygon[(i + 1) % n]]).collect(),
        None => ear_clip(polygon),
    };
    for z in [0.0, height] {
        for t in &caps {
            let tri = [at(t[0], z), at(t[1], z), at(t[2], z)];
            targets.push((tri[0] + tri[1] + tri[2]) * (1.0 / 3.0));
            triangles.push(tri);
        }
    }
    for i in 0..n {
        let (a, b) = (polygon[i], polygon[(i + 1) % n]);
        let q = [at(a, 0.0), at(b, 0.0), at(b, height), at(a, height)];
        triangles.push([q[0], q[1], q[2]]);
        triangles.push([q[0], q[2], q[3]]);
        targets.push((q[0] + q[1] + q[2] + q[3]) * 0.25);
        targets.push(q[0]);
        targets.push(q[3]);
    }
    TestCell { mesh, triangles, targets }
}

fn ear_clip(polygon: &[(f64, f64)]) -> Vec<[(f64, f64); 3]> {
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    // Closed triangle test; the triangle's own corners are skipped by index.
    let inside = |p: (f64, f64), t: [(f64, f64); 3]| {
        cross(t[0], t[1], p) >= 0.0 && cross(t[1], t[2], p) >= 0.0 && cross(t[2], t[0], p) >= 0.0
    };
    let mut idx: Vec<usize> = (0..polygon.len()).collect();
    let mut out = Vec::new();
    while idx.len() > 3 {
        let m = idx.len();
        let corner = |k: usize| [idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]];
        // Collinear corners carry no area and are dropped first.
        if let Some(k) = (0..m).find(|&k| {
            let c = corner(k);
            cross(polygon[c[0]], polygon[c[1]], polygon[c[2]]) == 0.0
        }) {
            idx.remove(k);
            continue;
        }
        let ear = (0..m)
            .find(|&k| {
                let c = corner(k);
                let t = [polygon[c[0]], polygon[c[1]], polygon[c[2]]];
                cross(t[0], t[1], t[2]) > 0.0 && idx.iter().all(|&j| c.contains(&j) || !inside(polygon[j], t))
            })
            .expect("simple counterclockwise polygon");
        let c = corner(ear);
        out.push([polygon[c[0]], polygon[c[1]], polygon[c[2]]]);
        idx.remove(ear);
    }
    out.push([polygon[idx[0]], polygon[idx[1]], polygon[idx[2]]]);
    out
}

/// Parameter in (0, 1) where segment `a b` crosses triangle `t`, if any.
fn segment_hits(a: Point3, b: Point3, t: &[Point3; 3]) -> Option<f64> {
    let d = b - a;
    let (e1, e2) = (t[1] - t[0], t[2] - t[0]);
    let p = d.cross(e2);
    let det = e1.dot(p);
    if det.abs() < 1e-14 {
        return None;
    }
    let s = a - t[0];
    let u = s.dot(p) / det;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(e1);
    let v = d.dot(q) / det;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    Some(e2.dot(q) / det)
}

/// Whether `x` sees every target without crossing the boundary.
pub fn sees_all(cell: &TestCell, x: Point3) -> bool {
    const END: f64 = 1e-9;
    cell.targets.iter().all(|&y| {
        cell.triangles.iter().all(|t| match segment_hits(x, y, t) {
            Some(s) => s <= END || s >= 1.0 - END,
            None => true,
        })
    })
}

/// Monte-Carlo volume of the visibility kernel, on a jittered grid of
/// `n^3` samples over the bounding box.
pub fn monte_carlo_kernel_volume(cell: &TestCell, n: usize, rng: &mut impl Rng) -> f64 {
    let (mut lo, mut hi) = (Point3::new(f64::MAX, f64::MAX, f64::MAX), Point3::new(f64::MIN, f64::MIN, f64::MIN));
    for v in &cell.mesh.vertices {
        lo = Point3::new(lo.x.min(v.x), lo.y.min(v.y), lo.z.min(v.z));
        hi = Point3::new(hi.x.max(v.x), hi.y.max(v.y), hi.z.max(v.z));
    }
    let size = hi - lo;
    let mut hits = 0usize;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let x = Point3::new(
                    lo.x + size.x * (i as f64 + rng.random::<f64>()) / n as f64,
                    lo.y + size.y * (j as f64 + rng.random::<f64>()) / n as f64,
                    lo.z + size.z * (k as f64 + rng.random::<f64>()) / n as f64,
                );
                if sees_all(cell, x) {
                    hits += 1;
                }
            }
        }
    }
    hits as f64 / (n * n * n) as f64 * size.x * size.y * size.z
}

/// Random polygon, star-shaped with respect to the origin.
pub fn random_star_polygon(rng: &mut impl Rng) -> Vec<(f64, f64)> {
    let n = rng.random_range(5..=10);
    let mut angles: Vec<f64> =
        (0..n).map(|i| (i as f64 + rng.random_range(0.1..0.9)) * std::f64::consts::TAU / n as f64).collect();
    angles.sort_by(f64::total_cmp);
    angles
        .into_iter()
        .map(|a| {
            let r = rng.random_range(0.3..1.0);
            (r * a.cos(), r * a.sin())
        })
        .collect()
}

/// Polygons whose prisms have an empty kernel.
pub fn non_star_polygons() -> Vec<Vec<(f64, f64)>> {
    vec![
        // Z
        vec![(1., 0.), (3., 0.), (3., 1.), (2., 1.), (2., 2.), (0., 2.), (0., 1.2), (1., 1.2)],
        // U
        vec![(0., 0.), (3., 0.), (3., 3.), (2., 3.), (2., 1.), (1., 1.), (1., 3.), (0., 3.)],
        // H
        vec![
            (0., 0.), (1., 0.), (1., 1.), (2., 1.), (2., 0.), (3., 0.),
            (3., 3.), (2., 3.), (2., 2.), (1., 2.), (1., 3.), (0., 3.),
        ],
        // E
        vec![
            (0., 0.), (3., 0.), (3., 1.), (1., 1.), (1., 2.), (3., 2.),
            (3., 3.), (1., 3.), (1., 4.), (3., 4.), (3., 5.), (0., 5.),
        ],
        // S
        vec![
            (0., 0.), (3., 0.), (3., 3.), (1., 3.), (1., 4.), (3., 4.),
            (3., 5.), (0., 5.), (0., 2.), (2., 2.), (2., 1.), (0., 1.),
        ],
    ]
}
