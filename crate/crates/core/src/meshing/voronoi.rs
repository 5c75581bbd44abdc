//! Voronoi meshes of the unit cube by per-cell convex clipping.
//!
//! Each cell starts as the cube and is cut by the bisector planes of nearby
//! generators, nearest first, until no remaining generator can reach it
//! (its distance exceeds twice the cell's radius). Cells are clipped
//! independently and in parallel; shared faces are then matched by the pair
//! of generators that produced them and their vertices welded globally.

use std::collections::HashMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{ConvexPolyhedron, EPS_GEOM};
use crate::mesh::{build_mesh, MeshError, PolyMesh};
use crate::point::Point3;

#[derive(Debug, Error)]
pub enum VoronoiError {
    #[error("need at least 2 generators")]
    TooFewPoints,
    #[error("generator {0} lies outside the unit cube")]
    OutsideDomain(usize),
    #[error("cell {0} collapsed during clipping")]
    ClippingDegenerate(usize),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Vertices closer than this are merged when cells are stitched together.
pub const WELD_TOL: f64 = 1e-9;

const CLIP_TOL: f64 = 1e-12;

/// Uniform background grid over the unit cube for neighbor search.
struct Grid {
    n: usize,
    cells: Vec<Vec<usize>>,
}

impl Grid {
    fn new(points: &[Point3]) -> Self {
        let n = ((points.len() as f64 / 2.0).cbrt().ceil() as usize).clamp(1, 64);
        let mut cells = vec![Vec::new(); n * n * n];
        for (i, p) in points.iter().enumerate() {
            let [a, b, c] = Self::coords(n, *p);
            cells[a + n * (b + n * c)].push(i);
        }
        Grid { n, cells }
    }

    fn coords(n: usize, p: Point3) -> [usize; 3] {
        let f = |x: f64| ((x * n as f64) as usize).min(n - 1);
        [f(p.x), f(p.y), f(p.z)]
    }

    /// Generators in grid cells at Chebyshev distance exactly `r` from the
    /// home cell of `p`.
    fn ring(&self, p: Point3, r: usize, out: &mut Vec<usize>) {
        let n = self.n as isize;
        let h = Self::coords(self.n, p).map(|x| x as isize);
        let r = r as isize;
        for c in (h[2] - r).max(0)..=(h[2] + r).min(n - 1) {
            for b in (h[1] - r).max(0)..=(h[1] + r).min(n - 1) {
                for a in (h[0] - r).max(0)..=(h[0] + r).min(n - 1) {
                    let d = (a - h[0]).abs().max((b - h[1]).abs()).max((c - h[2]).abs());
                    if d == r {
                        out.extend_from_slice(&self.cells[(a + n * (b + n * c)) as usize]);
                    }
                }
            }
        }
    }
}

/// Face tags: generator ids for bisector faces, `n + side` for cube sides
/// (sides ordered `-x, +x, -y, +y, -z, +z`).
pub fn voronoi_cell(points: &[Point3], i: usize) -> ConvexPolyhedron {
    voronoi_cell_with(points, i, &Grid::new(points))
}

fn voronoi_cell_with(points: &[Point3], i: usize, grid: &Grid) -> ConvexPolyhedron {
    let n = points.len();
    let g = points[i];
    let mut cell = ConvexPolyhedron::cuboid_tagged(
        Point3::ZERO,
        Point3::new(1.0, 1.0, 1.0),
        [n, n + 1, n + 2, n + 3, n + 4, n + 5],
    );
    let spacing = 1.0 / grid.n as f64;
    let mut ring = Vec::new();
    for r in 0..=grid.n {
        ring.clear();
        grid.ring(g, r, &mut ring);
        ring.retain(|&j| j != i);
        ring.sort_by(|&a, &b| {
            g.distance(points[a]).total_cmp(&g.distance(points[b])).then(a.cmp(&b))
        });
        for &j in &ring {
            let radius = cell.vertices.iter().map(|v| v.distance(g)).fold(0.0, f64::max);
            if g.distance(points[j]) > 2.0 * radius {
                break;
            }
            let nrm = points[j] - g;
            let d = nrm.dot((points[j] + g) * 0.5);
            cell = cell.clip(nrm, d, CLIP_TOL * nrm.norm(), Some(j));
            if cell.is_empty() {
                return cell;
            }
        }
        // Generators beyond ring r are at least r grid spacings away.
        let radius = cell.vertices.iter().map(|v| v.distance(g)).fold(0.0, f64::max);
        if r as f64 * spacing > 2.0 * radius {
            break;
        }
    }
    cell
}

/// Voronoi mesh of the unit cube; generators are not mesh vertices.
pub fn voronoi_mesh(points: &[Point3]) -> Result<PolyMesh, VoronoiError> {
    let n = points.len();
    if n < 2 {
        return Err(VoronoiError::TooFewPoints);
    }
    for (i, p) in points.iter().enumerate() {
        if !(0.0..=1.0).contains(&p.x) || !(0.0..=1.0).contains(&p.y) || !(0.0..=1.0).contains(&p.z) {
            return Err(VoronoiError::OutsideDomain(i));
        }
    }
    let grid = Grid::new(points);
    let cells: Vec<ConvexPolyhedron> =
        (0..n).into_par_iter().map(|i| voronoi_cell_with(points, i, &grid)).collect();
    for (i, c) in cells.iter().enumerate() {
        if c.is_empty() || c.volume() <= EPS_GEOM {
            return Err(VoronoiError::ClippingDegenerate(i));
        }
    }
    stitch(&cells, n)
}

/// Welds cell vertices and shares faces between neighboring cells.
fn stitch(cells: &[ConvexPolyhedron], n: usize) -> Result<PolyMesh, VoronoiError> {
    let mut welder = Welder::default();
    let mut vertices = Vec::new();
    let local_ids: Vec<Vec<usize>> = cells
        .iter()
        .map(|c| c.vertices.iter().map(|&p| welder.id(p, &mut vertices)).collect())
        .collect();

    // One loop per face: bisector faces once per generator pair, cube-side
    // faces once per cell.
    let mut faces: Vec<Vec<usize>> = Vec::new();
    let mut owners: Vec<Vec<usize>> = Vec::new();
    let mut shared: HashMap<(usize, usize), usize> = HashMap::new();
    for (i, c) in cells.iter().enumerate() {
        for (f, tag) in c.faces.iter().zip(&c.face_tags) {
            let tag = tag.expect("every Voronoi face is tagged");
            let lp: Vec<usize> = f.iter().map(|&v| local_ids[i][v]).collect();
            if tag >= n {
                owners.push(vec![i]);
                faces.push(lp);
                continue;
            }
            let key = (i.min(tag), i.max(tag));
            match shared.get(&key) {
                Some(&id) => owners[id].push(i),
                None => {
                    shared.insert(key, faces.len());
                    owners.push(vec![i]);
                    faces.push(lp);
                }
            }
        }
    }

    let mut cell_faces: Vec<Vec<usize>> = vec![Vec::new(); cells.len()];
    let mut kept = Vec::with_capacity(faces.len());
    for (lp, own) in faces.into_iter().zip(owners) {
        let Some(lp) = clean_loop(lp) else { continue };
        for c in own {
            cell_faces[c].push(kept.len());
        }
        kept.push(lp);
    }
    Ok(build_mesh(vertices, kept, cell_faces)?)
}

/// Drops repeated vertices; `None` when fewer than 3 distinct remain or the
/// loop revisits a vertex.
fn clean_loop(mut lp: Vec<usize>) -> Option<Vec<usize>> {
    lp.dedup();
    while lp.len() > 1 && lp[0] == *lp.last().unwrap() {
        lp.pop();
    }
    let mut uniq = lp.clone();
    uniq.sort_unstable();
    uniq.dedup();
    (uniq.len() >= 3 && uniq.len() == lp.len()).then_some(lp)
}

/// Tolerance-based vertex deduplication over a hashed lattice.
#[derive(Default)]
struct Welder {
    buckets: HashMap<[i64; 3], Vec<usize>>,
}

impl Welder {
    fn id(&mut self, p: Point3, vertices: &mut Vec<Point3>) -> usize {
        let q = |x: f64| (x / WELD_TOL).floor() as i64;
        let k = [q(p.x), q(p.y), q(p.z)];
        for dz in -1..=1 {
            for dy in -1..=1 {
                for dx in -1..=1 {
                    if let Some(ids) = self.buckets.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) {
                        for &id in ids {
                            if vertices[id].distance(p) <= WELD_TOL {
                                return id;
                            }
                        }
                    }
                }
            }
        }
        vertices.push(p);
        self.buckets.entry(k).or_default().push(vertices.len() - 1);
        vertices.len() - 1
    }
}
