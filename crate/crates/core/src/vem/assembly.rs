//! Global assembly, Dirichlet elimination and the discrete solution.

use rayon::prelude::*;

use crate::geometry::cell_quadrature;
use crate::mesh::PolyMesh;
use crate::point::Point3;

use super::local::{local_load_with, local_stiffness, DenseMatrix};
use super::projector::{cell_projector, face_projectors, CellProjector};
use super::sparse::{pcg, CsrMatrix, CG_TOLERANCE};
use super::VemError;

/// Element matrices, vectors and projectors of every cell.
#[derive(Debug, Clone)]
pub struct LocalSystems {
    pub projectors: Vec<CellProjector>,
    pub stiffness: Vec<DenseMatrix>,
    pub load: Vec<Vec<f64>>,
}

/// Computes all element contributions in parallel. Cells without an
/// interior kernel point are reported together.
pub fn local_systems(mesh: &PolyMesh, f: &(dyn Fn(Point3) -> f64 + Sync)) -> Result<LocalSystems, VemError> {
    let fps = face_projectors(mesh)?;
    let per_cell: Vec<Result<(CellProjector, DenseMatrix, Vec<f64>), VemError>> = (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| {
            let cp = cell_projector(mesh, c, &fps)?;
            let quad = cell_quadrature(mesh, c).map_err(|_| VemError::NoKernelPoint { cells: vec![c] })?;
            let k = local_stiffness(mesh, &cp);
            let b = local_load_with(&cp, &quad, f);
            Ok((cp, k, b))
        })
        .collect();
    let mut out = LocalSystems { projectors: Vec::new(), stiffness: Vec::new(), load: Vec::new() };
    let mut bad = Vec::new();
    for r in per_cell {
        match r {
            Ok((cp, k, b)) => {
                out.projectors.push(cp);
                out.stiffness.push(k);
                out.load.push(b);
            }
            Err(VemError::NoKernelPoint { cells }) => bad.extend(cells),
            Err(e) => return Err(e),
        }
    }
    if !bad.is_empty() {
        return Err(VemError::NoKernelPoint { cells: bad });
    }
    Ok(out)
}

/// Global stiffness matrix and load vector over all vertices, before any
/// boundary condition.
pub fn assemble_full(mesh: &PolyMesh, local: &LocalSystems) -> (CsrMatrix, Vec<f64>) {
    let n = mesh.num_vertices();
    let mut triplets = Vec::new();
    let mut load = vec![0.0; n];
    for ((cp, k), b) in local.projectors.iter().zip(&local.stiffness).zip(&local.load) {
        for (i, &vi) in cp.vertices.iter().enumerate() {
            load[vi] += b[i];
            for (j, &vj) in cp.vertices.iter().enumerate() {
                triplets.push((vi, vj, k.get(i, j)));
            }
        }
    }
    (CsrMatrix::from_triplets(n, triplets), load)
}

/// Reduced system on the free vertices.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Vertex of every unknown.
    pub dof_vertex: Vec<usize>,
    /// Whether each vertex carries a prescribed value.
    pub dirichlet: Vec<bool>,
    /// Prescribed values (zero at free vertices).
    pub boundary_values: Vec<f64>,
    pub projectors: Vec<CellProjector>,
}

impl LinearSystem {
    pub fn num_unknowns(&self) -> usize {
        self.dof_vertex.len()
    }
}

/// Assembles `-Delta u = f` with `u = g` at the boundary vertices.
pub fn assemble(
    mesh: &PolyMesh,
    f: &(dyn Fn(Point3) -> f64 + Sync),
    g: &dyn Fn(Point3) -> f64,
) -> Result<LinearSystem, VemError> {
    assemble_with_mask(mesh, f, g, &mesh.boundary_vertex)
}

/// As [`assemble`], with an explicit set of constrained vertices.
pub fn assemble_with_mask(
    mesh: &PolyMesh,
    f: &(dyn Fn(Point3) -> f64 + Sync),
    g: &dyn Fn(Point3) -> f64,
    dirichlet: &[bool],
) -> Result<LinearSystem, VemError> {
    let local = local_systems(mesh, f)?;
    let (full, load) = assemble_full(mesh, &local);
    let n = mesh.num_vertices();
    let boundary_values: Vec<f64> =
        (0..n).map(|v| if dirichlet[v] { g(mesh.vertices[v]) } else { 0.0 }).collect();
    let mut index = vec![usize::MAX; n];
    let mut dof_vertex = Vec::new();
    for v in 0..n {
        if !dirichlet[v] {
            index[v] = dof_vertex.len();
            dof_vertex.push(v);
        }
    }
    let mut triplets = Vec::with_capacity(full.nnz());
    let mut rhs: Vec<f64> = dof_vertex.iter().map(|&v| load[v]).collect();
    for (i, &v) in dof_vertex.iter().enumerate() {
        for (w, a) in full.row(v) {
            if dirichlet[w] {
                rhs[i] -= a * boundary_values[w];
            } else {
                triplets.push((i, index[w], a));
            }
        }
    }
    let matrix = CsrMatrix::from_triplets(dof_vertex.len(), triplets);
    Ok(LinearSystem {
        matrix,
        rhs,
        dof_vertex,
        dirichlet: dirichlet.to_vec(),
        boundary_values,
        projectors: local.projectors,
    })
}

/// Vertex values of the discrete solution with its cell projectors.
#[derive(Debug, Clone)]
pub struct DiscreteSolution {
    pub values: Vec<f64>,
    pub projectors: Vec<CellProjector>,
    pub iterations: usize,
    pub residual: f64,
}

impl DiscreteSolution {
    /// Projection coefficients on cell `c`.
    pub fn cell_coefficients(&self, c: usize) -> [f64; 4] {
        let cp = &self.projectors[c];
        cp.apply(&cp.gather(&self.values))
    }
}

/// Solves the reduced system with Jacobi-preconditioned CG (relative
/// residual [`CG_TOLERANCE`], at most `20 n` iterations).
pub fn solve(system: &LinearSystem) -> Result<DiscreteSolution, VemError> {
    if !system.dirichlet.iter().any(|&d| d) {
        // Pure Neumann: constants are in the kernel.
        return Err(VemError::SingularSystem);
    }
    let n = system.num_unknowns();
    let r = pcg(&system.matrix, &system.rhs, CG_TOLERANCE, 20 * n.max(1))?;
    let mut values = system.boundary_values.clone();
    for (i, &v) in system.dof_vertex.iter().enumerate() {
        values[v] = r.x[i];
    }
    Ok(DiscreteSolution { values, projectors: system.projectors.clone(), iterations: r.iterations, residual: r.residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{unit_cube_mesh, MeshError};
    use crate::meshing::hex_mesh;
    use crate::sampling::sample_uniform;

    #[test]
    fn single_cube_is_all_boundary() {
        let m = unit_cube_mesh();
        let sys = assemble(&m, &|_| 1.0, &|p: Point3| p.x + p.y).unwrap();
        assert_eq!(sys.num_unknowns(), 0);
        let sol = solve(&sys).unwrap();
        for (v, p) in m.vertices.iter().enumerate() {
            assert_eq!(sol.values[v], p.x + p.y);
        }
    }

    #[test]
    fn two_by_two_grid_has_one_unknown() {
        let m = hex_mesh(&sample_uniform(2).points).unwrap();
        let sys = assemble(&m, &|_| 1.0, &|_| 0.0).unwrap();
        assert_eq!(sys.num_unknowns(), 1);
        assert!(sys.matrix.get(0, 0) > 0.0);
        let sol = solve(&sys).unwrap();
        assert!(sol.values.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn no_dirichlet_is_singular() {
        let m = hex_mesh(&sample_uniform(2).points).unwrap();
        let sys = assemble_with_mask(&m, &|_| 1.0, &|_| 0.0, &vec![false; m.num_vertices()]).unwrap();
        assert!(matches!(solve(&sys), Err(VemError::SingularSystem)));
    }

    #[test]
    fn non_star_cell_is_reported() -> Result<(), MeshError> {
        // Z-shaped prism: its kernel is empty.
        let z = [(1., 0.), (3., 0.), (3., 1.), (2., 1.), (2., 2.), (0., 2.), (0., 1.2), (1., 1.2)];
        let m = crate::mesh::prism_mesh(&z, 1.0)?;
        match assemble(&m, &|_| 1.0, &|_| 0.0) {
            Err(VemError::NoKernelPoint { cells }) => assert_eq!(cells, vec![0]),
            other => panic!("expected NoKernelPoint, got {other:?}"),
        }
        Ok(())
    }
}
