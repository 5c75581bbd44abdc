//! Model problems with known solutions.

use std::f64::consts::PI;

use crate::point::Point3;

/// `-Delta u = f` on the unit cube with `u` prescribed on the boundary.
#[derive(Debug, Clone, Copy)]
pub struct Problem {
    pub name: &'static str,
    pub u: fn(Point3) -> f64,
    pub grad: fn(Point3) -> Point3,
    pub f: fn(Point3) -> f64,
}

impl Problem {
    /// Boundary data; the exact solution itself.
    pub fn g(&self, x: Point3) -> f64 {
        (self.u)(x)
    }
}

const W: f64 = 2.0 * PI;

fn smooth_u(p: Point3) -> f64 {
    let (x, y, z) = (p.x, p.y, p.z);
    x.powi(3) * y * y * z + x * (W * x * y).sin() * (W * y * z).sin() * (W * z).sin()
}

fn smooth_grad(p: Point3) -> Point3 {
    let (x, y, z) = (p.x, p.y, p.z);
    let (a, ac) = ((W * x * y).sin(), (W * x * y).cos());
    let (b, bc) = ((W * y * z).sin(), (W * y * z).cos());
    let (c, cc) = ((W * z).sin(), (W * z).cos());
    Point3::new(
        3.0 * x * x * y * y * z + a * b * c + W * x * y * ac * b * c,
        2.0 * x.powi(3) * y * z + W * x * x * ac * b * c + W * x * z * a * bc * c,
        x.powi(3) * y * y + W * x * y * a * bc * c + W * x * a * b * cc,
    )
}

fn smooth_f(p: Point3) -> f64 {
    let (x, y, z) = (p.x, p.y, p.z);
    let (a, ac) = ((W * x * y).sin(), (W * x * y).cos());
    let (b, bc) = ((W * y * z).sin(), (W * y * z).cos());
    let (c, cc) = ((W * z).sin(), (W * z).cos());
    let lap = 6.0 * x * y * y * z
        + 2.0 * x.powi(3) * z
        + 2.0 * W * y * ac * b * c
        + 2.0 * W * W * x * x * z * ac * bc * c
        + 2.0 * W * W * x * y * a * bc * cc
        - W * W * x * a * b * c * (2.0 * y * y + x * x + z * z + 1.0);
    -lap
}

/// `u = x^3 y^2 z + x sin(2 pi x y) sin(2 pi y z) sin(2 pi z)`.
pub fn manufactured_problem() -> Problem {
    Problem { name: "paper", u: smooth_u, grad: smooth_grad, f: smooth_f }
}

/// `u = 2x - y + 3z + 1`, `f = 0`: reproduced exactly by the method.
pub fn patch_problem() -> Problem {
    Problem {
        name: "patch",
        u: |p| 2.0 * p.x - p.y + 3.0 * p.z + 1.0,
        grad: |_| Point3::new(2.0, -1.0, 3.0),
        f: |_| 0.0,
    }
}

/// Problem by name: `paper` or `patch`.
pub fn problem_by_name(name: &str) -> Option<Problem> {
    match name {
        "paper" => Some(manufactured_problem()),
        "patch" => Some(patch_problem()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fd_laplacian(u: fn(Point3) -> f64, p: Point3, h: f64) -> f64 {
        let mut s = -6.0 * u(p);
        for d in [Point3::new(h, 0.0, 0.0), Point3::new(0.0, h, 0.0), Point3::new(0.0, 0.0, h)] {
            s += u(p + d) + u(p - d);
        }
        s / (h * h)
    }

    #[test]
    fn corner_values() {
        let pb = manufactured_problem();
        assert_eq!((pb.u)(Point3::ZERO), 0.0);
        assert_relative_eq!((pb.u)(Point3::new(1.0, 1.0, 1.0)), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn source_matches_finite_differences() {
        let pb = manufactured_problem();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut pts = vec![Point3::new(0.5, 0.5, 0.5)];
        for _ in 0..10 {
            pts.push(Point3::new(rng.random(), rng.random(), rng.random()));
        }
        for p in pts {
            let fd = -fd_laplacian(pb.u, p, 1e-4);
            let f = (pb.f)(p);
            assert!((fd - f).abs() <= 1e-6 * f.abs().max(1.0), "{p:?}: {fd} vs {f}");
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let pb = manufactured_problem();
        let p = Point3::new(0.3, 0.7, 0.45);
        let h = 1e-6;
        let g = (pb.grad)(p);
        let e = [Point3::new(h, 0.0, 0.0), Point3::new(0.0, h, 0.0), Point3::new(0.0, 0.0, h)];
        let gd = [g.x, g.y, g.z];
        for k in 0..3 {
            let fd = ((pb.u)(p + e[k]) - (pb.u)(p - e[k])) / (2.0 * h);
            assert_relative_eq!(fd, gd[k], max_relative = 1e-7, epsilon = 1e-8);
        }
    }
}
