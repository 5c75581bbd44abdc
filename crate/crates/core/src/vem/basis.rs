//! Scaled monomials of degree at most one.

use crate::point::{Point2, Point3};

/// `{1, (x - x_P)/h, (y - y_P)/h, (z - z_P)/h}` on a cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellBasis {
    pub center: Point3,
    pub h: f64,
}

impl CellBasis {
    pub const DIM: usize = 4;

    pub fn eval(&self, x: Point3) -> [f64; 4] {
        let d = (x - self.center) / self.h;
        [1.0, d.x, d.y, d.z]
    }

    /// Gradient of basis function `i`; zero for the constant.
    pub fn grad(&self, i: usize) -> Point3 {
        match i {
            1 => Point3::new(1.0 / self.h, 0.0, 0.0),
            2 => Point3::new(0.0, 1.0 / self.h, 0.0),
            3 => Point3::new(0.0, 0.0, 1.0 / self.h),
            _ => Point3::ZERO,
        }
    }
}

/// `{1, (xi - xi_F)/h, (eta - eta_F)/h}` in a face's local frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceBasis {
    pub center: Point2,
    pub h: f64,
}

impl FaceBasis {
    pub const DIM: usize = 3;

    pub fn eval(&self, q: Point2) -> [f64; 3] {
        let d = (q - self.center) / self.h;
        [1.0, d.x, d.y]
    }
}

/// `{1, (s - s_E)/h}` along an edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeBasis {
    pub center: f64,
    pub h: f64,
}

impl EdgeBasis {
    pub const DIM: usize = 2;

    pub fn eval(&self, s: f64) -> [f64; 2] {
        [1.0, (s - self.center) / self.h]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_function_is_one() {
        let b = CellBasis { center: Point3::new(0.5, 0.5, 0.5), h: 2.0 };
        assert_eq!(b.eval(Point3::new(1.5, 0.5, -0.5)), [1.0, 0.5, 0.0, -0.5]);
        assert_eq!(b.grad(0), Point3::ZERO);
        let f = FaceBasis { center: Point2::new(1.0, 1.0), h: 0.5 };
        assert_eq!(f.eval(Point2::new(1.5, 1.0)), [1.0, 1.0, 0.0]);
        let e = EdgeBasis { center: 0.5, h: 1.0 };
        assert_eq!(e.eval(1.0), [1.0, 0.5]);
    }
}
