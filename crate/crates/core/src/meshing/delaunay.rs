//! Incremental (Bowyer-Watson) Delaunay tetrahedralization of point sets
//! whose convex hull is an axis-aligned box with all 8 corners present.
//!
//! The corners are triangulated first by brute force; every other point is
//! then inserted by locating it with a visibility walk, growing the cavity of
//! tetrahedra whose circumsphere contains it, and connecting the point to the
//! cavity boundary. Cospherical ties are broken by a symbolic perturbation
//! of the lifted coordinates, so the output is the unique Delaunay
//! triangulation of the perturbed problem and does not depend on insertion
//! order.

use std::collections::HashMap;

use thiserror::Error;

use crate::mesh::{build_mesh, MeshError, PolyMesh};
use crate::point::Point3;
use crate::predicates::{insphere_perturbed, orient3d};

#[derive(Debug, Error)]
pub enum DelaunayError {
    #[error("fewer than 4 points or all points coplanar")]
    DegenerateInput,
    #[error("bounding-box corner {0:?} is not an input point")]
    MissingHullCorner(Point3),
    #[error("point {0} duplicates an earlier point")]
    DuplicatePoint(usize),
    #[error("point {0} lies outside the bounding box")]
    OutsideHull(usize),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

const NONE: usize = usize::MAX;

/// Faces of a tetrahedron opposite each vertex, oriented consistently.
const FACE_OF: [[usize; 3]; 4] = [[1, 2, 3], [0, 3, 2], [0, 1, 3], [0, 2, 1]];

struct Triangulation<'a> {
    pts: &'a [Point3],
    tets: Vec<[usize; 4]>,
    /// Neighbor across the face opposite each vertex.
    adj: Vec<[usize; 4]>,
    alive: Vec<bool>,
    free: Vec<usize>,
}

impl<'a> Triangulation<'a> {
    fn orient(&self, t: [usize; 4]) -> f64 {
        orient3d(self.pts[t[0]], self.pts[t[1]], self.pts[t[2]], self.pts[t[3]])
    }

    fn in_sphere(&self, t: usize, p: usize) -> bool {
        let v = self.tets[t];
        insphere_perturbed(
            [self.pts[v[0]], self.pts[v[1]], self.pts[v[2]], self.pts[v[3]], self.pts[p]],
            [v[0], v[1], v[2], v[3], p],
        ) > 0.0
    }

    fn push(&mut self, t: [usize; 4]) -> usize {
        if let Some(i) = self.free.pop() {
            self.tets[i] = t;
            self.adj[i] = [NONE; 4];
            self.alive[i] = true;
            i
        } else {
            self.tets.push(t);
            self.adj.push([NONE; 4]);
            self.alive.push(true);
            self.tets.len() - 1
        }
    }

    /// Positive orientation: `orient3d > 0`.
    fn oriented(&self, mut t: [usize; 4]) -> Option<[usize; 4]> {
        let o = self.orient(t);
        if o == 0.0 {
            return None;
        }
        if o < 0.0 {
            t.swap(0, 1);
        }
        Some(t)
    }

    /// Walks from `start` to a tetrahedron containing `p` (closed).
    fn locate(&self, start: usize, p: usize, salt: &mut u64) -> usize {
        let mut t = start;
        let mut steps = 0usize;
        'walk: loop {
            steps += 1;
            debug_assert!(steps < 10 * self.tets.len() + 100, "walk does not terminate");
            let v = self.tets[t];
            *salt = salt.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let off = (*salt >> 62) as usize;
            for k in 0..4 {
                let f = (k + off) % 4;
                // p replaces vertex f: negative orientation means p is across face f.
                let mut w = v;
                w[f] = p;
                if self.orient(w) < 0.0 && self.adj[t][f] != NONE {
                    t = self.adj[t][f];
                    continue 'walk;
                }
            }
            return t;
        }
    }

    fn insert(&mut self, p: usize, start: usize, salt: &mut u64) -> usize {
        let t0 = self.locate(start, p, salt);
        let mut cavity = vec![t0];
        let mut in_cavity: HashMap<usize, ()> = HashMap::new();
        in_cavity.insert(t0, ());
        let mut i = 0;
        while i < cavity.len() {
            let t = cavity[i];
            i += 1;
            for k in 0..4 {
                let n = self.adj[t][k];
                if n != NONE && !in_cavity.contains_key(&n) && self.in_sphere(n, p) {
                    in_cavity.insert(n, ());
                    cavity.push(n);
                }
            }
        }

        let mut created = Vec::new();
        let mut boundary_links = Vec::new();
        for &t in &cavity {
            for k in 0..4 {
                let n = self.adj[t][k];
                if n != NONE && in_cavity.contains_key(&n) {
                    continue;
                }
                let mut nt = self.tets[t];
                nt[k] = p;
                // Zero orientation only for hull faces coplanar with p.
                if self.orient(nt) <= 0.0 {
                    debug_assert!(n == NONE, "cavity is not star-shaped");
                    continue;
                }
                created.push(nt);
                boundary_links.push((k, n, self.tets[t]));
            }
        }
        for &t in &cavity {
            self.alive[t] = false;
            self.free.push(t);
        }
        let mut ids = Vec::with_capacity(created.len());
        for (nt, &(k, n, old)) in created.iter().zip(&boundary_links) {
            let id = self.push(*nt);
            self.adj[id][k] = n;
            if n != NONE {
                // Point the outside neighbor back at the new tetrahedron.
                let back = (0..4).find(|&j| !old.contains(&self.tets[n][j])).unwrap();
                self.adj[n][back] = id;
            }
            ids.push(id);
        }
        // Link new tetrahedra to each other through faces containing p.
        let mut open: HashMap<[usize; 3], (usize, usize)> = HashMap::new();
        for &id in &ids {
            let v = self.tets[id];
            for f in 0..4 {
                if v[f] == p {
                    continue;
                }
                let mut key = [v[FACE_OF[f][0]], v[FACE_OF[f][1]], v[FACE_OF[f][2]]];
                key.sort_unstable();
                if let Some((other, of)) = open.remove(&key) {
                    self.adj[id][f] = other;
                    self.adj[other][of] = id;
                } else {
                    open.insert(key, (id, f));
                }
            }
        }
        ids[0]
    }
}

/// Delaunay tetrahedralization of `points` as raw vertex quadruples with
/// positive [`orient3d`].
pub fn delaunay_tets(points: &[Point3]) -> Result<Vec<[usize; 4]>, DelaunayError> {
    if points.len() < 4 {
        return Err(DelaunayError::DegenerateInput);
    }
    let mut lo = points[0];
    let mut hi = points[0];
    for p in points {
        lo = lo.min(*p);
        hi = hi.max(*p);
    }
    if lo.x == hi.x || lo.y == hi.y || lo.z == hi.z {
        return Err(DelaunayError::DegenerateInput);
    }

    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        let (p, q) = (points[a], points[b]);
        p.x.total_cmp(&q.x).then(p.y.total_cmp(&q.y)).then(p.z.total_cmp(&q.z))
    });
    for w in order.windows(2) {
        if points[w[0]] == points[w[1]] {
            return Err(DelaunayError::DuplicatePoint(w[0].max(w[1])));
        }
    }

    let mut corners = [0usize; 8];
    for (i, slot) in corners.iter_mut().enumerate() {
        let c = Point3::new(
            if i & 1 == 0 { lo.x } else { hi.x },
            if i & 2 == 0 { lo.y } else { hi.y },
            if i & 4 == 0 { lo.z } else { hi.z },
        );
        *slot = points.iter().position(|&p| p == c).ok_or(DelaunayError::MissingHullCorner(c))?;
    }

    let mut tri = Triangulation { pts: points, tets: Vec::new(), adj: Vec::new(), alive: Vec::new(), free: Vec::new() };

    // Perturbed Delaunay triangulation of the corners: all empty-sphere tets.
    for a in 0..8 {
        for b in a + 1..8 {
            for c in b + 1..8 {
                for d in c + 1..8 {
                    let Some(t) = tri.oriented([corners[a], corners[b], corners[c], corners[d]]) else {
                        continue;
                    };
                    let empty = corners.iter().all(|&q| {
                        t.contains(&q)
                            || insphere_perturbed(
                                [points[t[0]], points[t[1]], points[t[2]], points[t[3]], points[q]],
                                [t[0], t[1], t[2], t[3], q],
                            ) < 0.0
                    });
                    if empty {
                        tri.push(t);
                    }
                }
            }
        }
    }
    let mut faces: HashMap<[usize; 3], (usize, usize)> = HashMap::new();
    for t in 0..tri.tets.len() {
        for f in 0..4 {
            let v = tri.tets[t];
            let mut key = [v[FACE_OF[f][0]], v[FACE_OF[f][1]], v[FACE_OF[f][2]]];
            key.sort_unstable();
            if let Some((o, of)) = faces.remove(&key) {
                tri.adj[t][f] = o;
                tri.adj[o][of] = t;
            } else {
                faces.insert(key, (t, f));
            }
        }
    }

    // Insert the remaining points in a locality-preserving order: sweep
    // slabs in z, rows in y (alternating), columns in x (alternating).
    let is_corner: Vec<bool> = {
        let mut v = vec![false; points.len()];
        for &c in &corners {
            v[c] = true;
        }
        v
    };
    let n_rest = points.len() - 8;
    let bins = ((n_rest as f64).cbrt().ceil() as usize).max(1);
    let bin = |x: f64, l: f64, h: f64| (((x - l) / (h - l) * bins as f64) as usize).min(bins - 1);
    let mut rest: Vec<(usize, usize, usize, usize)> = (0..points.len())
        .filter(|&i| !is_corner[i])
        .map(|i| {
            let p = points[i];
            let bz = bin(p.z, lo.z, hi.z);
            let mut by = bin(p.y, lo.y, hi.y);
            if bz % 2 == 1 {
                by = bins - 1 - by;
            }
            let mut bx = bin(p.x, lo.x, hi.x);
            if (bz * bins + by) % 2 == 1 {
                bx = bins - 1 - bx;
            }
            (bz, by, bx, i)
        })
        .collect();
    rest.sort_unstable();

    let mut last = 0usize;
    let mut salt = 0x2545_f491_4f6c_dd1du64;
    for &(_, _, _, i) in &rest {
        let p = points[i];
        if p.x < lo.x || p.x > hi.x || p.y < lo.y || p.y > hi.y || p.z < lo.z || p.z > hi.z {
            return Err(DelaunayError::OutsideHull(i));
        }
        last = tri.insert(i, last, &mut salt);
    }

    let mut out: Vec<[usize; 4]> =
        tri.tets.iter().zip(&tri.alive).filter(|(_, &a)| a).map(|(t, _)| *t).collect();
    // Canonical order for reproducible output.
    for t in out.iter_mut() {
        canonicalize(t);
    }
    out.sort_unstable();
    Ok(out)
}

/// Rotates a positively oriented tet so its smallest index comes first,
/// preserving orientation.
fn canonicalize(t: &mut [usize; 4]) {
    let m = (0..4).min_by_key(|&i| t[i]).unwrap();
    // Even permutations of (0,1,2,3) that move position m to the front.
    let perm: [usize; 4] = match m {
        0 => [0, 1, 2, 3],
        1 => [1, 0, 3, 2],
        2 => [2, 3, 0, 1],
        _ => [3, 2, 1, 0],
    };
    let old = *t;
    for k in 0..4 {
        t[k] = old[perm[k]];
    }
    // Order the remaining three by a rotation (even permutation).
    let r = (1..4).min_by_key(|&i| t[i]).unwrap();
    let rest = [t[1], t[2], t[3]];
    let s = r - 1;
    for k in 0..3 {
        t[1 + k] = rest[(s + k) % 3];
    }
}

/// Tetrahedral mesh of a point cloud whose hull is its bounding box.
pub fn delaunay_tet(points: &[Point3]) -> Result<PolyMesh, DelaunayError> {
    let tets = delaunay_tets(points)?;
    Ok(tets_to_mesh(points.to_vec(), &tets)?)
}

/// Builds a mesh with one triangle per distinct tet face.
pub fn tets_to_mesh(vertices: Vec<Point3>, tets: &[[usize; 4]]) -> Result<PolyMesh, MeshError> {
    let mut face_id: HashMap<[usize; 3], usize> = HashMap::new();
    let mut faces: Vec<Vec<usize>> = Vec::new();
    let mut cells = Vec::with_capacity(tets.len());
    for t in tets {
        let mut cell = Vec::with_capacity(4);
        for f in FACE_OF {
            let tri = [t[f[0]], t[f[1]], t[f[2]]];
            let mut key = tri;
            key.sort_unstable();
            let id = *face_id.entry(key).or_insert_with(|| {
                faces.push(tri.to_vec());
                faces.len() - 1
            });
            cell.push(id);
        }
        cells.push(cell);
    }
    build_mesh(vertices, faces, cells)
}
