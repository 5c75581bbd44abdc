//! Element stiffness matrices and load vectors.

use crate::geometry::{cell_quadrature, QuadPoint};
use crate::mesh::PolyMesh;
use crate::point::Point3;

use super::projector::CellProjector;

/// Dense symmetric matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j) * x[j]).sum()).collect()
    }
}

/// Dof values of the projection, i.e. the matrix `D * Pi` applied to the
/// basis: `proj[i][j]` is the projection of dof function `j` evaluated at
/// vertex `i`.
fn projection_dofs(mesh: &PolyMesh, cp: &CellProjector) -> DenseMatrix {
    let n = cp.num_dofs();
    let mut out = DenseMatrix::zeros(n);
    for (i, &v) in cp.vertices.iter().enumerate() {
        let m = cp.basis.eval(mesh.vertices[v]);
        for j in 0..n {
            let s: f64 = (0..4).map(|k| m[k] * cp.coeffs[k][j]).sum();
            out.set(i, j, s);
        }
    }
    out
}

/// Consistency part of the element stiffness: `|P| grad Pi phi_i . grad Pi phi_j`.
pub fn consistency_matrix(cp: &CellProjector) -> DenseMatrix {
    let n = cp.num_dofs();
    let s = cp.volume / (cp.basis.h * cp.basis.h);
    let mut k = DenseMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let v = s * (1..4).map(|r| cp.coeffs[r][i] * cp.coeffs[r][j]).sum::<f64>();
            k.set(i, j, v);
            k.set(j, i, v);
        }
    }
    k
}

/// dofi-dofi stabilization of `v - Pi v`, without the `h_P` factor.
pub fn stabilization_matrix(mesh: &PolyMesh, cp: &CellProjector) -> DenseMatrix {
    let n = cp.num_dofs();
    let mut r = projection_dofs(mesh, cp);
    // r <- I - D Pi
    for i in 0..n {
        for j in 0..n {
            let v = if i == j { 1.0 } else { 0.0 } - r.get(i, j);
            r.set(i, j, v);
        }
    }
    let mut s = DenseMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let v: f64 = (0..n).map(|k| r.get(k, i) * r.get(k, j)).sum();
            s.set(i, j, v);
            s.set(j, i, v);
        }
    }
    s
}

/// Element stiffness: consistency plus `h_P` times the stabilization.
pub fn local_stiffness(mesh: &PolyMesh, cp: &CellProjector) -> DenseMatrix {
    let mut k = consistency_matrix(cp);
    let s = stabilization_matrix(mesh, cp);
    let h = cp.basis.h;
    for (a, b) in k.data.iter_mut().zip(&s.data) {
        *a += h * b;
    }
    k
}

/// Element load `b_i = int_P f Pi phi_i` on the given quadrature.
pub fn local_load_with(cp: &CellProjector, quad: &[QuadPoint], f: &(impl Fn(Point3) -> f64 + ?Sized)) -> Vec<f64> {
    let n = cp.num_dofs();
    let mut b = vec![0.0; n];
    for &(x, w) in quad {
        let fx = f(x) * w;
        if fx == 0.0 {
            continue;
        }
        let m = cp.basis.eval(x);
        for (j, bj) in b.iter_mut().enumerate() {
            *bj += fx * (0..4).map(|k| m[k] * cp.coeffs[k][j]).sum::<f64>();
        }
    }
    b
}

/// Element load on the cell's tetrahedral quadrature.
pub fn local_load(
    mesh: &PolyMesh,
    cp: &CellProjector,
    f: &(impl Fn(Point3) -> f64 + ?Sized),
) -> Result<Vec<f64>, crate::geometry::GeometryError> {
    Ok(local_load_with(cp, &cell_quadrature(mesh, cp.cell)?, f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{box_mesh, unit_cube_mesh};
    use crate::vem::projector::{cell_projector, face_projectors};
    use approx::assert_relative_eq;

    fn projector(mesh: &PolyMesh) -> CellProjector {
        cell_projector(mesh, 0, &face_projectors(mesh).unwrap()).unwrap()
    }

    #[test]
    fn cube_stiffness_kernel_is_constants() {
        let m = unit_cube_mesh();
        let cp = projector(&m);
        let k = local_stiffness(&m, &cp);
        let row = k.mul_vec(&[1.0; 8]);
        assert!(row.iter().all(|r| r.abs() < 1e-14));
        for i in 0..8 {
            for j in 0..8 {
                assert_eq!(k.get(i, j), k.get(j, i));
            }
        }
        // Positive on non-constant vectors.
        for i in 0..8 {
            let mut e = vec![0.0; 8];
            e[i] = 1.0;
            let q: f64 = e.iter().zip(k.mul_vec(&e)).map(|(a, b)| a * b).sum();
            assert!(q > 0.0);
        }
    }

    #[test]
    fn stabilization_annihilates_linears() {
        let m = box_mesh(Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 0.5, 2.0)).unwrap();
        let cp = projector(&m);
        let s = stabilization_matrix(&m, &cp);
        let lin: Vec<f64> = cp.vertices.iter().map(|&v| {
            let x = m.vertices[v];
            x.x - 2.0 * x.y + 0.5 * x.z
        }).collect();
        assert!(s.mul_vec(&lin).iter().all(|r| r.abs() < 1e-13));
    }

    #[test]
    fn scaling_doubles_consistency() {
        let m1 = unit_cube_mesh();
        let m2 = box_mesh(Point3::ZERO, Point3::new(2.0, 2.0, 2.0)).unwrap();
        let (k1, k2) = (consistency_matrix(&projector(&m1)), consistency_matrix(&projector(&m2)));
        for (a, b) in k1.data.iter().zip(&k2.data) {
            assert_relative_eq!(2.0 * a, *b, epsilon = 1e-14);
        }
    }

    #[test]
    fn load_sums() {
        let m = unit_cube_mesh();
        let cp = projector(&m);
        let one: f64 = local_load(&m, &cp, &|_| 1.0).unwrap().iter().sum();
        assert_relative_eq!(one, 1.0, epsilon = 1e-14);
        let zero = local_load(&m, &cp, &|_| 0.0).unwrap();
        assert!(zero.iter().all(|&b| b == 0.0));
        let x: f64 = local_load(&m, &cp, &|p: Point3| p.x).unwrap().iter().sum();
        assert_relative_eq!(x, 0.5, epsilon = 1e-14);
    }
}
