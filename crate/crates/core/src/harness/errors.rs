//! Relative errors of a discrete solution against the exact one.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{cell_quadrature, GeometryError};
use crate::mesh::PolyMesh;
use crate::vem::DiscreteSolution;

use super::problem::Problem;

/// Errors on one mesh, each divided by the matching norm of `u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub h: f64,
    pub dofs: usize,
    /// `|u - Pi u_h|_0 / |u|_0`.
    pub err_l2: f64,
    /// `|grad u - grad Pi u_h|_0 / |grad u|_0`.
    pub err_h1: f64,
    /// `max_v |u(v) - u_h(v)| / max_v |u(v)|` over the vertices.
    pub err_linf: f64,
}

/// Integrates the error of the cellwise projection of `solution` on every
/// cell's quadrature.
pub fn compute_errors(mesh: &PolyMesh, solution: &DiscreteSolution, problem: &Problem) -> Result<ErrorRow, GeometryError> {
    let sums: Vec<Result<[f64; 4], GeometryError>> = (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| {
            let cp = &solution.projectors[c];
            let coef = solution.cell_coefficients(c);
            let grad_h = cp.gradient(coef);
            let mut s = [0.0; 4];
            for (x, w) in cell_quadrature(mesh, c)? {
                let u = (problem.u)(x);
                let gu = (problem.grad)(x);
                let e = u - cp.eval(coef, x);
                s[0] += w * e * e;
                s[1] += w * u * u;
                s[2] += w * (gu - grad_h).norm_squared();
                s[3] += w * gu.norm_squared();
            }
            Ok(s)
        })
        .collect();
    // Fixed summation order keeps the result independent of scheduling.
    let mut total = [0.0; 4];
    for s in sums {
        let s = s?;
        for k in 0..4 {
            total[k] += s[k];
        }
    }
    let mut max_err: f64 = 0.0;
    let mut max_u: f64 = 0.0;
    for (v, &x) in mesh.vertices.iter().enumerate() {
        let u = (problem.u)(x);
        max_err = max_err.max((u - solution.values[v]).abs());
        max_u = max_u.max(u.abs());
    }
    let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { a };
    Ok(ErrorRow {
        h: mesh.h,
        dofs: mesh.num_vertices(),
        err_l2: ratio(total[0].sqrt(), total[1].sqrt()),
        err_h1: ratio(total[2].sqrt(), total[3].sqrt()),
        err_linf: ratio(max_err, max_u),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::problem::{manufactured_problem, patch_problem};
    use crate::meshing::hex_mesh;
    use crate::sampling::sample_uniform;
    use crate::vem::{assemble, solve};
    use approx::assert_relative_eq;

    #[test]
    fn zero_solution_has_unit_errors() {
        let m = hex_mesh(&sample_uniform(3).points).unwrap();
        let pb = manufactured_problem();
        let sys = assemble(&m, &pb.f, &|_| 0.0).unwrap();
        let mut sol = solve(&sys).unwrap();
        sol.values.iter_mut().for_each(|v| *v = 0.0);
        let e = compute_errors(&m, &sol, &pb).unwrap();
        assert_relative_eq!(e.err_l2, 1.0, epsilon = 1e-14);
        assert_relative_eq!(e.err_h1, 1.0, epsilon = 1e-14);
        assert_relative_eq!(e.err_linf, 1.0, epsilon = 1e-14);
        assert_eq!(e.dofs, 64);
    }

    #[test]
    fn patch_problem_is_exact() {
        let m = hex_mesh(&sample_uniform(3).points).unwrap();
        let pb = patch_problem();
        let sys = assemble(&m, &pb.f, &|x| pb.g(x)).unwrap();
        let sol = solve(&sys).unwrap();
        let e = compute_errors(&m, &sol, &pb).unwrap();
        assert!(e.err_l2 < 1e-10 && e.err_h1 < 1e-10 && e.err_linf < 1e-10, "{e:?}");
    }
}
