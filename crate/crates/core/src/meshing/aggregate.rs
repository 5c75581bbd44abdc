//! Pairwise aggregation of tetrahedra into non-convex polyhedra.

use std::collections::HashMap;

use crate::mesh::{build_mesh, MeshError, PolyMesh};
use crate::point::Point3;

/// Share of tetrahedra absorbed into pairs by default.
pub const DEFAULT_FRACTION: f64 = 0.2;

/// Faces whose normals differ by at most this angle (radians) count as
/// coplanar.
pub const COPLANAR_ANGLE: f64 = 1e-6;

/// Cell pairs merged by [`aggregate_poly`], as `(larger cell, partner)`.
pub fn select_pairs(mesh: &PolyMesh, fraction: f64) -> Vec<(usize, usize)> {
    let n = mesh.num_cells();
    let target = (fraction * n as f64).ceil() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        mesh.cells[b].volume().total_cmp(&mesh.cells[a].volume()).then(a.cmp(&b))
    });
    let mut used = vec![false; n];
    let mut pairs = Vec::new();
    let mut absorbed = 0;
    for c in order {
        if absorbed >= target {
            break;
        }
        if used[c] {
            continue;
        }
        let best = mesh.cells[c]
            .faces
            .iter()
            .filter_map(|cf| {
                let (a, b) = mesh.face_cells[cf.face];
                let other = if a == c { b? } else { a };
                (!used[other]).then_some((mesh.faces[cf.face].area(), other))
            })
            .max_by(|x, y| x.0.total_cmp(&y.0).then(y.1.cmp(&x.1)));
        if let Some((_, other)) = best {
            used[c] = true;
            used[other] = true;
            pairs.push((c, other));
            absorbed += 2;
        }
    }
    pairs
}

/// Merges pairs of face-adjacent cells: the largest cells first, each with
/// the neighbor across its widest free face, until `fraction` of the cells
/// have been absorbed. Coplanar faces of a merged cell that share an edge
/// are then fused. Vertices are never removed.
pub fn aggregate_poly(mesh: &PolyMesh, fraction: f64) -> Result<PolyMesh, MeshError> {
    let pairs = select_pairs(mesh, fraction);
    let n = mesh.num_cells();

    // New cell id for every old cell; a pair takes the slot of its lower id.
    let mut partner: Vec<Option<usize>> = vec![None; n];
    for &(a, b) in &pairs {
        partner[a] = Some(b);
        partner[b] = Some(a);
    }
    let mut new_id = vec![usize::MAX; n];
    let mut count = 0;
    for c in 0..n {
        match partner[c] {
            Some(p) if p < c => new_id[c] = new_id[p],
            _ => {
                new_id[c] = count;
                count += 1;
            }
        }
    }

    let mut faces: Vec<Option<Vec<usize>>> =
        mesh.faces.iter().map(|f| Some(f.vertices.clone())).collect();
    let mut face_cells: Vec<(usize, Option<usize>)> = Vec::with_capacity(faces.len());
    for (f, &(a, b)) in mesh.face_cells.iter().enumerate() {
        let (a, b) = (new_id[a], b.map(|b| new_id[b]));
        if b == Some(a) {
            faces[f] = None;
        }
        face_cells.push((a, b));
    }
    let mut cells: Vec<Vec<usize>> = vec![Vec::new(); count];
    for (f, &(a, b)) in face_cells.iter().enumerate() {
        if faces[f].is_none() {
            continue;
        }
        cells[a].push(f);
        if let Some(b) = b {
            cells[b].push(f);
        }
    }

    let mut edge_use: HashMap<(usize, usize), usize> = HashMap::new();
    for f in faces.iter().flatten() {
        for k in 0..f.len() {
            let (u, v) = (f[k], f[(k + 1) % f.len()]);
            *edge_use.entry((u.min(v), u.max(v))).or_default() += 1;
        }
    }
    let merged_cells: Vec<usize> = pairs.iter().map(|&(a, _)| new_id[a]).collect();
    for &c in &merged_cells {
        while let Some((f, g, lp)) = find_coplanar(&mesh.vertices, &faces, &face_cells, &cells[c], c, &edge_use) {
            let (u, v) = shared_edge(faces[f].as_ref().unwrap(), faces[g].as_ref().unwrap()).unwrap();
            edge_use.remove(&(u.min(v), u.max(v)));
            faces[f] = Some(lp);
            faces[g] = None;
            let (a, b) = face_cells[g];
            cells[a].retain(|&x| x != g);
            if let Some(b) = b {
                cells[b].retain(|&x| x != g);
            }
        }
    }

    let mut remap = vec![usize::MAX; faces.len()];
    let mut out_faces = Vec::new();
    for (f, lp) in faces.into_iter().enumerate() {
        if let Some(lp) = lp {
            remap[f] = out_faces.len();
            out_faces.push(lp);
        }
    }
    let out_cells = cells.into_iter().map(|fs| fs.into_iter().map(|f| remap[f]).collect()).collect();
    build_mesh(mesh.vertices.clone(), out_faces, out_cells)
}

/// The single edge `(u, v)` traversed `u -> v` by `a` and `v -> u` or
/// `u -> v` by `b`, if `a` and `b` share exactly one edge.
fn shared_edge(a: &[usize], b: &[usize]) -> Option<(usize, usize)> {
    let edges = |f: &[usize]| -> Vec<(usize, usize)> {
        (0..f.len()).map(|k| (f[k], f[(k + 1) % f.len()])).collect()
    };
    let eb = edges(b);
    let mut found = None;
    for (u, v) in edges(a) {
        if eb.contains(&(u, v)) || eb.contains(&(v, u)) {
            if found.is_some() {
                return None;
            }
            found = Some((u, v));
        }
    }
    found
}

fn newell(vertices: &[Point3], f: &[usize]) -> Point3 {
    let mut n = Point3::ZERO;
    for k in 0..f.len() {
        n += vertices[f[k]].cross(vertices[f[(k + 1) % f.len()]]);
    }
    n
}

/// Finds two faces of cell `c` that lie in one plane, border the same
/// neighbor (or both the boundary) and share an edge used by no other
/// face. Returns them with the fused loop.
fn find_coplanar(
    vertices: &[Point3],
    faces: &[Option<Vec<usize>>],
    face_cells: &[(usize, Option<usize>)],
    cell: &[usize],
    c: usize,
    edge_use: &HashMap<(usize, usize), usize>,
) -> Option<(usize, usize, Vec<usize>)> {
    let other = |f: usize| {
        let (a, b) = face_cells[f];
        if a == c {
            b
        } else {
            Some(a)
        }
    };
    for (i, &f) in cell.iter().enumerate() {
        for &g in &cell[i + 1..] {
            if other(f) != other(g) {
                continue;
            }
            let (lf, lg) = (faces[f].as_ref()?, faces[g].as_ref()?);
            let Some((u, v)) = shared_edge(lf, lg) else { continue };
            if edge_use.get(&(u.min(v), u.max(v))) != Some(&2) {
                continue;
            }
            // Orient g opposite to f along the shared edge so both loops
            // describe the same side of the plane.
            let mut lg = lg.clone();
            let k = lg.iter().position(|&x| x == u).unwrap();
            if lg[(k + 1) % lg.len()] == v {
                lg.reverse();
            }
            let (nf, ng) = (newell(vertices, lf), newell(vertices, &lg));
            let cos = nf.dot(ng) / (nf.norm() * ng.norm());
            if cos < COPLANAR_ANGLE.cos() {
                continue;
            }
            return Some((f, g, fuse(lf, &lg, u, v)));
        }
    }
    None
}

/// Joins loop `a` (containing `u -> v`) and loop `b` (containing `v -> u`)
/// across their common edge.
fn fuse(a: &[usize], b: &[usize], u: usize, v: usize) -> Vec<usize> {
    let rot = |f: &[usize], start: usize| -> Vec<usize> {
        let k = f.iter().position(|&x| x == start).unwrap();
        f[k..].iter().chain(&f[..k]).copied().collect()
    };
    // a from v around to u, then b from u around to v (endpoints dropped).
    let mut out = rot(a, v);
    let rb = rot(b, u);
    out.extend_from_slice(&rb[1..rb.len() - 1]);
    out
}
