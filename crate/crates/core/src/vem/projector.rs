//! Elliptic projections onto linear polynomials for faces and cells.

use crate::mesh::PolyMesh;
use crate::point::{Point2, Point3};

use super::basis::{CellBasis, FaceBasis};
use super::VemError;

/// Maps the vertex values of a face to the coefficients of its projection
/// in the face basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceProjector {
    pub basis: FaceBasis,
    /// Face vertices in loop order; the columns of `coeffs`.
    pub vertices: Vec<usize>,
    /// `coeffs[k][j]`: coefficient of basis function `k` for the `j`-th
    /// vertex dof.
    pub coeffs: [Vec<f64>; 3],
    /// `integrals[j]`: integral over the face of the projection of the
    /// `j`-th dof function, which equals the integral of the function
    /// itself.
    pub integrals: Vec<f64>,
}

impl FaceProjector {
    /// Applies the projector to vertex values listed in loop order.
    pub fn apply(&self, values: &[f64]) -> [f64; 3] {
        let mut c = [0.0; 3];
        for (k, row) in self.coeffs.iter().enumerate() {
            c[k] = row.iter().zip(values).map(|(a, b)| a * b).sum();
        }
        c
    }

    /// Evaluates the projection with coefficients `c` at local point `q`.
    pub fn eval(&self, c: [f64; 3], q: Point2) -> f64 {
        let m = self.basis.eval(q);
        c[0] * m[0] + c[1] * m[1] + c[2] * m[2]
    }
}

/// Projector of face `f`.
///
/// Gradient part from the edge form of the Green identity (trapezoid rule is
/// exact for the linear traces); constant part from a vanishing boundary
/// mean of `v - Pi v`.
pub fn face_projector(mesh: &PolyMesh, f: usize) -> Result<FaceProjector, VemError> {
    let face = &mesh.faces[f];
    let g = &face.geometry;
    let area = g.area;
    let h = g.diameter;
    if !(area > 0.0) || !(h > 0.0) {
        return Err(VemError::SingularGram { kind: "face", id: f });
    }
    // The frame origin is the centroid, so the basis is centered at 0.
    let basis = FaceBasis { center: Point2::new(0.0, 0.0), h };
    let local: Vec<Point2> = face.vertices.iter().map(|&v| g.frame.to_local(mesh.vertices[v])).collect();
    let n = local.len();

    let mut gx = vec![0.0; n];
    let mut gy = vec![0.0; n];
    let mut bnd = vec![0.0; n];
    let mut perimeter = 0.0;
    let mut m_bnd = [0.0; 3];
    for a in 0..n {
        let b = (a + 1) % n;
        let d = local[b] - local[a];
        let len = d.norm();
        // Loop is counterclockwise in the frame: outward normal (dy, -dx)/len.
        for &k in &[a, b] {
            gx[k] += 0.5 * d.y;
            gy[k] -= 0.5 * d.x;
            bnd[k] += 0.5 * len;
        }
        perimeter += len;
        let (ma, mb) = (basis.eval(local[a]), basis.eval(local[b]));
        for k in 0..3 {
            m_bnd[k] += 0.5 * len * (ma[k] + mb[k]);
        }
    }
    // Gram block of the gradients is |F|/h^2 times the identity.
    let scale = h / area;
    let c1: Vec<f64> = gx.iter().map(|x| x * scale).collect();
    let c2: Vec<f64> = gy.iter().map(|y| y * scale).collect();
    let c0: Vec<f64> = (0..n).map(|j| (bnd[j] - c1[j] * m_bnd[1] - c2[j] * m_bnd[2]) / perimeter).collect();
    let integrals = c0.iter().map(|c| c * area).collect();
    Ok(FaceProjector { basis, vertices: face.vertices.clone(), coeffs: [c0, c1, c2], integrals })
}

/// Maps the vertex values of a cell to the coefficients of its projection
/// in the cell basis.
#[derive(Debug, Clone, PartialEq)]
pub struct CellProjector {
    pub cell: usize,
    pub basis: CellBasis,
    pub volume: f64,
    /// Cell vertices in ascending order; the columns of `coeffs`.
    pub vertices: Vec<usize>,
    pub coeffs: [Vec<f64>; 4],
}

impl CellProjector {
    pub fn num_dofs(&self) -> usize {
        self.vertices.len()
    }

    pub fn apply(&self, values: &[f64]) -> [f64; 4] {
        let mut c = [0.0; 4];
        for (k, row) in self.coeffs.iter().enumerate() {
            c[k] = row.iter().zip(values).map(|(a, b)| a * b).sum();
        }
        c
    }

    /// Projection with coefficients `c` evaluated at `x`.
    pub fn eval(&self, c: [f64; 4], x: Point3) -> f64 {
        let m = self.basis.eval(x);
        c.iter().zip(m).map(|(a, b)| a * b).sum()
    }

    /// Constant gradient of the projection with coefficients `c`.
    pub fn gradient(&self, c: [f64; 4]) -> Point3 {
        Point3::new(c[1], c[2], c[3]) / self.basis.h
    }

    /// Local values of a global vertex vector.
    pub fn gather(&self, global: &[f64]) -> Vec<f64> {
        self.vertices.iter().map(|&v| global[v]).collect()
    }
}

/// Projector of cell `c`, built on the projectors of its faces.
///
/// The gradient uses `int_P grad v = sum_F n_F int_F v`, with the face
/// integrals taken from the face projections. The constant makes the
/// boundary integral of `v - Pi v` vanish.
pub fn cell_projector(mesh: &PolyMesh, c: usize, faces: &[FaceProjector]) -> Result<CellProjector, VemError> {
    let cell = &mesh.cells[c];
    let volume = cell.volume();
    let h = cell.diameter();
    if !(volume > 0.0) || !(h > 0.0) {
        return Err(VemError::SingularGram { kind: "cell", id: c });
    }
    let basis = CellBasis { center: cell.barycenter(), h };
    let nv = cell.vertices.len();
    let local = |v: usize| cell.vertices.binary_search(&v).expect("face vertex belongs to its cell");

    let mut grad = [vec![0.0; nv], vec![0.0; nv], vec![0.0; nv]];
    let mut surface = vec![0.0; nv];
    let mut area_total = 0.0;
    let mut m_surface = [0.0; 4];
    for &cf in &cell.faces {
        let fp = &faces[cf.face];
        let n = mesh.outward_normal(cf);
        let g = &mesh.faces[cf.face].geometry;
        for (j, &v) in fp.vertices.iter().enumerate() {
            let lj = local(v);
            let w = fp.integrals[j];
            grad[0][lj] += n.x * w;
            grad[1][lj] += n.y * w;
            grad[2][lj] += n.z * w;
            surface[lj] += w;
        }
        area_total += g.area;
        // Basis functions are linear: exact face integral at the centroid.
        let m = basis.eval(g.centroid);
        for k in 0..4 {
            m_surface[k] += g.area * m[k];
        }
    }
    // Gram block of the gradients is |P|/h^2 times the identity.
    let scale = h / volume;
    let [gx, gy, gz] = grad;
    let c1: Vec<f64> = gx.iter().map(|x| x * scale).collect();
    let c2: Vec<f64> = gy.iter().map(|x| x * scale).collect();
    let c3: Vec<f64> = gz.iter().map(|x| x * scale).collect();
    let c0: Vec<f64> = (0..nv)
        .map(|j| (surface[j] - c1[j] * m_surface[1] - c2[j] * m_surface[2] - c3[j] * m_surface[3]) / area_total)
        .collect();
    Ok(CellProjector { cell: c, basis, volume, vertices: cell.vertices.clone(), coeffs: [c0, c1, c2, c3] })
}

/// Projectors of every face of the mesh.
pub fn face_projectors(mesh: &PolyMesh) -> Result<Vec<FaceProjector>, VemError> {
    (0..mesh.num_faces()).map(|f| face_projector(mesh, f)).collect()
}
