//! Polyhedral mesh data model.
//!
//! A [`PolyMesh`] stores vertices, globally shared planar faces and cells that
//! reference faces together with an orientation flag. Everything is validated
//! and all geometric quantities are cached by [`build_mesh`]; the structure is
//! immutable afterwards.

mod pmesh;
mod vtk;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::measures::{
    polygon_geometry, signed_volume_and_moment, CellGeometry, FaceDefect, FaceGeometry, EPS_GEOM,
};
use crate::point::{diameter, Point3};

pub use pmesh::{read_pmesh, read_pmesh_with_data, write_pmesh, write_pmesh_with_data, PointData};
pub use vtk::{write_vtk, VtkField};

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("face {face} is not planar (deviation {deviation:e})")]
    NonPlanarFace { face: usize, deviation: f64 },
    #[error("boundary of cell {cell} is not closed and orientable")]
    OpenCellBoundary { cell: usize },
    #[error("face {face} is referenced by {count} cells")]
    DanglingFace { face: usize, count: usize },
    #[error("{kind} {id} is degenerate (measure {measure:e})")]
    DegenerateElement { kind: ElementKind, id: usize, measure: f64 },
    #[error("face {face} is malformed: {reason}")]
    MalformedFace { face: usize, reason: String },
    #[error("index {index} out of range in {context}")]
    IndexOutOfRange { context: String, index: usize },
    #[error("vertex {vertex} has non-finite coordinates")]
    NonFiniteVertex { vertex: usize },
    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("unsupported mesh format `{0}`")]
    UnsupportedFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    Face,
    Cell,
}

impl std::fmt::Display for ElementKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ElementKind::Face => f.write_str("face"),
            ElementKind::Cell => f.write_str("cell"),
        }
    }
}

/// A planar polygon shared by one or two cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyFace {
    /// Vertex loop, counterclockwise around `geometry.normal`.
    pub vertices: Vec<usize>,
    pub geometry: FaceGeometry,
}

impl PolyFace {
    pub fn area(&self) -> f64 {
        self.geometry.area
    }
    pub fn centroid(&self) -> Point3 {
        self.geometry.centroid
    }
    pub fn diameter(&self) -> f64 {
        self.geometry.diameter
    }
    pub fn normal(&self) -> Point3 {
        self.geometry.normal
    }
    pub fn num_edges(&self) -> usize {
        self.vertices.len()
    }

    /// Iterator over the loop edges `(v_i, v_{i+1})`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }
}

/// Reference from a cell to one of its faces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellFace {
    pub face: usize,
    /// Whether the face's stored normal points out of the cell.
    pub outward: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyCell {
    pub faces: Vec<CellFace>,
    /// Sorted, deduplicated vertex indices.
    pub vertices: Vec<usize>,
    pub num_edges: usize,
    pub geometry: CellGeometry,
}

impl PolyCell {
    pub fn volume(&self) -> f64 {
        self.geometry.volume
    }
    pub fn barycenter(&self) -> Point3 {
        self.geometry.barycenter
    }
    pub fn diameter(&self) -> f64 {
        self.geometry.diameter
    }
    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyMesh {
    pub vertices: Vec<Point3>,
    pub faces: Vec<PolyFace>,
    pub cells: Vec<PolyCell>,
    /// Unique undirected edges `[a, b]` with `a < b`.
    pub edges: Vec<[usize; 2]>,
    /// Cells adjacent to each face; the second entry is `None` on the boundary.
    pub face_cells: Vec<(usize, Option<usize>)>,
    pub boundary_vertex: Vec<bool>,
    pub boundary_face: Vec<bool>,
    /// Mesh size: the largest cell diameter.
    pub h: f64,
}

/// Bookkeeping attached to every generated mesh.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeshMetadata {
    pub sampling: String,
    pub meshing: String,
    /// Sampling parameter, at least 1.
    pub t: u32,
    pub seed: u64,
    pub level: usize,
}

/// Builds and validates a mesh from raw connectivity.
///
/// `cells` lists face indices per cell; orientation flags are resolved so
/// that every cell sees its faces' normals pointing outward.
pub fn build_mesh(
    vertices: Vec<Point3>,
    faces: Vec<Vec<usize>>,
    cells: Vec<Vec<usize>>,
) -> Result<PolyMesh, MeshError> {
    for (i, v) in vertices.iter().enumerate() {
        if !v.is_finite() {
            return Err(MeshError::NonFiniteVertex { vertex: i });
        }
    }

    let mut poly_faces = Vec::with_capacity(faces.len());
    for (fi, lp) in faces.into_iter().enumerate() {
        if lp.len() < 3 {
            return Err(MeshError::MalformedFace {
                face: fi,
                reason: format!("{} vertices", lp.len()),
            });
        }
        for &v in &lp {
            if v >= vertices.len() {
                return Err(MeshError::IndexOutOfRange { context: format!("face {fi}"), index: v });
            }
        }
        let mut sorted = lp.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(MeshError::MalformedFace { face: fi, reason: "repeated vertex".into() });
        }
        let pts: Vec<Point3> = lp.iter().map(|&v| vertices[v]).collect();
        let geometry = match polygon_geometry(&pts) {
            Ok(g) => g,
            Err((FaceDefect::Degenerate, m)) => {
                return Err(MeshError::DegenerateElement { kind: ElementKind::Face, id: fi, measure: m })
            }
            Err((FaceDefect::NonPlanar, d)) => {
                return Err(MeshError::NonPlanarFace { face: fi, deviation: d })
            }
        };
        poly_faces.push(PolyFace { vertices: lp, geometry });
    }

    let mut incidence: Vec<Vec<usize>> = vec![Vec::new(); poly_faces.len()];
    let mut poly_cells = Vec::with_capacity(cells.len());
    for (ci, face_list) in cells.into_iter().enumerate() {
        for &f in &face_list {
            if f >= poly_faces.len() {
                return Err(MeshError::IndexOutOfRange { context: format!("cell {ci}"), index: f });
            }
            incidence[f].push(ci);
        }
        poly_cells.push(build_cell(ci, &face_list, &poly_faces, &vertices)?);
    }

    let mut face_cells = Vec::with_capacity(poly_faces.len());
    let mut boundary_face = vec![false; poly_faces.len()];
    let mut boundary_vertex = vec![false; vertices.len()];
    for (f, inc) in incidence.iter().enumerate() {
        match inc.as_slice() {
            [a] => {
                face_cells.push((*a, None));
                boundary_face[f] = true;
                for &v in &poly_faces[f].vertices {
                    boundary_vertex[v] = true;
                }
            }
            [a, b] if a != b => face_cells.push((*a, Some(*b))),
            _ => return Err(MeshError::DanglingFace { face: f, count: inc.len() }),
        }
    }

    let mut edge_set: HashMap<(usize, usize), ()> = HashMap::new();
    let mut edges = Vec::new();
    for f in &poly_faces {
        for (a, b) in f.edges() {
            let key = (a.min(b), a.max(b));
            if edge_set.insert(key, ()).is_none() {
                edges.push([key.0, key.1]);
            }
        }
    }

    let h = poly_cells.iter().map(|c| c.diameter()).fold(0.0, f64::max);
    Ok(PolyMesh {
        vertices,
        faces: poly_faces,
        cells: poly_cells,
        edges,
        face_cells,
        boundary_vertex,
        boundary_face,
        h,
    })
}

fn build_cell(
    ci: usize,
    face_list: &[usize],
    faces: &[PolyFace],
    vertices: &[Point3],
) -> Result<PolyCell, MeshError> {
    let open = || MeshError::OpenCellBoundary { cell: ci };
    if face_list.len() < 4 {
        return Err(open());
    }
    let mut uniq = face_list.to_vec();
    uniq.sort_unstable();
    if uniq.windows(2).any(|w| w[0] == w[1]) {
        return Err(open());
    }

    // Undirected edge -> [(local face, traversed forward a->b with a<b)].
    let mut edge_faces: HashMap<(usize, usize), Vec<(usize, bool)>> = HashMap::new();
    for (lf, &f) in face_list.iter().enumerate() {
        for (a, b) in faces[f].edges() {
            edge_faces.entry((a.min(b), a.max(b))).or_default().push((lf, a < b));
        }
    }
    let mut neighbors: Vec<Vec<(usize, bool)>> = vec![Vec::new(); face_list.len()];
    for uses in edge_faces.values() {
        if uses.len() != 2 {
            return Err(open());
        }
        let ((f0, d0), (f1, d1)) = (uses[0], uses[1]);
        if f0 == f1 {
            return Err(open());
        }
        // Same traversal direction means the two faces need opposite flips.
        let differ = d0 == d1;
        neighbors[f0].push((f1, differ));
        neighbors[f1].push((f0, differ));
    }

    let mut flip: Vec<Option<bool>> = vec![None; face_list.len()];
    flip[0] = Some(false);
    let mut stack = vec![0usize];
    while let Some(f) = stack.pop() {
        let ff = flip[f].unwrap();
        for &(g, differ) in &neighbors[f] {
            let want = ff ^ differ;
            match flip[g] {
                None => {
                    flip[g] = Some(want);
                    stack.push(g);
                }
                Some(x) if x != want => return Err(open()),
                _ => {}
            }
        }
    }
    if flip.iter().any(|f| f.is_none()) {
        return Err(open());
    }

    let mut cell_vertices: Vec<usize> =
        face_list.iter().flat_map(|&f| faces[f].vertices.iter().copied()).collect();
    cell_vertices.sort_unstable();
    cell_vertices.dedup();
    let pts: Vec<Point3> = cell_vertices.iter().map(|&v| vertices[v]).collect();
    let reference = pts.iter().fold(Point3::ZERO, |a, &p| a + p) / pts.len() as f64;

    let loops = face_list.iter().zip(&flip).map(|(&f, fl)| {
        let mut lp: Vec<Point3> = faces[f].vertices.iter().map(|&v| vertices[v]).collect();
        if fl.unwrap() {
            lp.reverse();
        }
        (lp, faces[f].centroid())
    });
    let (vol, moment) = signed_volume_and_moment(reference, loops);
    let diam = diameter(&pts);
    if !(vol.abs() > EPS_GEOM * diam.powi(3)) {
        return Err(MeshError::DegenerateElement { kind: ElementKind::Cell, id: ci, measure: vol });
    }
    let flip_all = vol < 0.0;
    let cell_faces = face_list
        .iter()
        .zip(&flip)
        .map(|(&f, fl)| CellFace { face: f, outward: !(fl.unwrap() ^ flip_all) })
        .collect();
    let volume = vol.abs();
    let barycenter = moment / vol;

    Ok(PolyCell {
        faces: cell_faces,
        vertices: cell_vertices,
        num_edges: edge_faces.len(),
        geometry: CellGeometry { volume, barycenter, diameter: diam },
    })
}

impl PolyMesh {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }
    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }
    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    /// Vertex loop of a cell face, oriented counterclockwise around the
    /// outward normal.
    pub fn outward_loop(&self, cf: CellFace) -> Vec<usize> {
        let mut lp = self.faces[cf.face].vertices.clone();
        if !cf.outward {
            lp.reverse();
        }
        lp
    }

    /// Outward unit normal of a cell face.
    pub fn outward_normal(&self, cf: CellFace) -> Point3 {
        let n = self.faces[cf.face].normal();
        if cf.outward {
            n
        } else {
            -n
        }
    }

    /// Face connectivity as raw loops and cell face lists, the input format of
    /// [`build_mesh`].
    pub fn topology(&self) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
        let faces = self.faces.iter().map(|f| f.vertices.clone()).collect();
        let cells = self
            .cells
            .iter()
            .map(|c| c.faces.iter().map(|cf| cf.face).collect())
            .collect();
        (faces, cells)
    }

    /// Rebuilds the mesh with every vertex mapped through `f`.
    pub fn map_vertices(&self, f: impl Fn(Point3) -> Point3) -> Result<PolyMesh, MeshError> {
        let (faces, cells) = self.topology();
        build_mesh(self.vertices.iter().map(|&p| f(p)).collect(), faces, cells)
    }

    /// Total cell volume.
    pub fn total_volume(&self) -> f64 {
        self.cells.iter().map(|c| c.volume()).sum()
    }

    /// Euler characteristic `V - E + F` of a cell's boundary surface.
    pub fn cell_euler_characteristic(&self, c: usize) -> i64 {
        let cell = &self.cells[c];
        cell.vertices.len() as i64 - cell.num_edges as i64 + cell.faces.len() as i64
    }

    /// Length of the shortest edge on the boundary of a cell.
    pub fn cell_min_edge(&self, c: usize) -> f64 {
        self.cells[c]
            .faces
            .iter()
            .flat_map(|cf| self.faces[cf.face].edges())
            .map(|(a, b)| self.vertices[a].distance(self.vertices[b]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Shortest loop edge of a face.
    pub fn face_min_edge(&self, f: usize) -> f64 {
        self.faces[f]
            .edges()
            .map(|(a, b)| self.vertices[a].distance(self.vertices[b]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Checks that the cells tile the unit cube: total volume 1 within `1e-8`
    /// and every boundary face lying on a cube side.
    pub fn covers_unit_cube(&self) -> bool {
        if (self.total_volume() - 1.0).abs() > 1e-8 {
            return false;
        }
        self.faces.iter().zip(&self.boundary_face).filter(|(_, &b)| b).all(|(f, _)| {
            (0..3).any(|ax| {
                let vals = f.vertices.iter().map(|&v| self.vertices[v][ax]);
                vals.clone().all(|x| x.abs() < 1e-9) || vals.clone().all(|x| (x - 1.0).abs() < 1e-9)
            })
        })
    }
}

/// On-disk mesh formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Pmesh,
    /// Legacy ASCII VTK; write-only.
    Vtk,
}

impl MeshFormat {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &std::path::Path) -> Result<MeshFormat, MeshError> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("pmesh") => Ok(MeshFormat::Pmesh),
            Some("vtk") => Ok(MeshFormat::Vtk),
            other => Err(MeshError::UnsupportedFormat(other.unwrap_or("").to_string())),
        }
    }
}

pub fn write_mesh(mesh: &PolyMesh, path: &std::path::Path, format: MeshFormat) -> Result<(), MeshError> {
    match format {
        MeshFormat::Pmesh => write_pmesh(mesh, path),
        MeshFormat::Vtk => write_vtk(mesh, &[], path),
    }
}

/// Reads a PMESH file. VTK input is not supported.
pub fn read_mesh(path: &std::path::Path) -> Result<PolyMesh, MeshError> {
    match MeshFormat::from_path(path) {
        Ok(MeshFormat::Vtk) => Err(MeshError::UnsupportedFormat("vtk".into())),
        _ => read_pmesh(path),
    }
}

/// Largest cell diameter of a mesh.
pub fn mesh_size(mesh: &PolyMesh) -> f64 {
    mesh.h
}

/// Axis-aligned box `[lo, hi]` as a single-cell mesh. Handy for tests and
/// examples.
pub fn box_mesh(lo: Point3, hi: Point3) -> Result<PolyMesh, MeshError> {
    let v = |i: usize| {
        Point3::new(
            if i & 1 == 0 { lo.x } else { hi.x },
            if i & 2 == 0 { lo.y } else { hi.y },
            if i & 4 == 0 { lo.z } else { hi.z },
        )
    };
    let vertices = (0..8).map(v).collect();
    let faces = vec![
        vec![0, 2, 3, 1],
        vec![4, 5, 7, 6],
        vec![0, 1, 5, 4],
        vec![2, 6, 7, 3],
        vec![0, 4, 6, 2],
        vec![1, 3, 7, 5],
    ];
    build_mesh(vertices, faces, vec![(0..6).collect()])
}

/// The unit cube `(0,1)^3` as a single hexahedral cell.
pub fn unit_cube_mesh() -> PolyMesh {
    box_mesh(Point3::ZERO, Point3::new(1.0, 1.0, 1.0)).expect("unit cube is valid")
}

/// A single tetrahedron.
pub fn tetrahedron_mesh(p: [Point3; 4]) -> Result<PolyMesh, MeshError> {
    let faces = vec![vec![0, 2, 1], vec![0, 1, 3], vec![1, 2, 3], vec![0, 3, 2]];
    build_mesh(p.to_vec(), faces, vec![vec![0, 1, 2, 3]])
}

/// Extrudes a simple polygon (counterclockwise, in the xy-plane) into a
/// prism of the given height; a single-cell mesh.
pub fn prism_mesh(polygon: &[(f64, f64)], height: f64) -> Result<PolyMesh, MeshError> {
    let n = polygon.len();
    let mut vertices = Vec::with_capacity(2 * n);
    for &(x, y) in polygon {
        vertices.push(Point3::new(x, y, 0.0));
    }
    for &(x, y) in polygon {
        vertices.push(Point3::new(x, y, height));
    }
    let mut faces = vec![(0..n).rev().collect::<Vec<_>>(), (n..2 * n).collect()];
    for i in 0..n {
        let j = (i + 1) % n;
        faces.push(vec![i, j, n + j, n + i]);
    }
    let cells = vec![(0..faces.len()).collect()];
    build_mesh(vertices, faces, cells)
}
