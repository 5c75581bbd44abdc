//! Compressed sparse rows and a Jacobi-preconditioned conjugate gradient.

use rayon::prelude::*;

use super::VemError;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col: Vec<usize>,
    pub val: Vec<f64>,
}

impl CsrMatrix {
    /// Sums duplicate entries in the order they were given, so the result
    /// only depends on the triplet order.
    pub fn from_triplets(n: usize, mut t: Vec<(usize, usize, f64)>) -> Self {
        t.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col = Vec::with_capacity(t.len());
        let mut val: Vec<f64> = Vec::with_capacity(t.len());
        let mut last = None;
        for (i, j, v) in t {
            if last == Some((i, j)) {
                *val.last_mut().unwrap() += v;
            } else {
                col.push(j);
                val.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix { n, row_ptr, col, val }
    }

    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col[r.clone()].binary_search(&j) {
            Ok(k) => self.val[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col[r.clone()].iter().copied().zip(self.val[r].iter().copied())
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().with_min_len(256).for_each(|(i, yi)| {
            *yi = self.row(i).map(|(j, a)| a * x[j]).sum();
        });
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// Exact (bitwise) symmetry of the stored entries.
    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| self.row(i).all(|(j, a)| self.get(j, i) == a))
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Outcome of a conjugate gradient run.
#[derive(Debug, Clone, PartialEq)]
pub struct CgResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final `|b - A x| / |b|`.
    pub residual: f64,
}

/// Relative residual at which [`pcg`] stops by default.
pub const CG_TOLERANCE: f64 = 1e-12;

/// Jacobi-preconditioned CG for a symmetric positive definite matrix,
/// stopping at relative residual `tol` or after `max_iter` iterations.
pub fn pcg(a: &CsrMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<CgResult, VemError> {
    let n = a.n;
    let bnorm = dot(b, b).sqrt();
    if n == 0 || bnorm == 0.0 {
        return Ok(CgResult { x: vec![0.0; n], iterations: 0, residual: 0.0 });
    }
    let diag = a.diagonal();
    if diag.iter().any(|&d| !(d > 0.0)) {
        return Err(VemError::SingularSystem);
    }
    let inv: Vec<f64> = diag.iter().map(|d| 1.0 / d).collect();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv).map(|(a, b)| a * b).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    for it in 1..=max_iter {
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(VemError::SingularSystem);
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let res = dot(&r, &r).sqrt() / bnorm;
        if res <= tol {
            return Ok(CgResult { x, iterations: it, residual: res });
        }
        for i in 0..n {
            z[i] = r[i] * inv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let res = dot(&r, &r).sqrt() / bnorm;
    Err(VemError::NoConvergence { residual: res, iterations: max_iter })
}

/// Spectral condition number `lambda_max / lambda_min` of an SPD matrix,
/// by power and inverse power iteration (the inverse applied with CG).
pub fn estimate_condition(a: &CsrMatrix) -> Result<f64, VemError> {
    let n = a.n;
    if n == 0 {
        return Err(VemError::SingularSystem);
    }
    const REL_CHANGE: f64 = 1e-4;
    const MAX_SWEEPS: usize = 5000;
    // Deterministic start with components along every eigenvector.
    let start: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7919) % 101) as f64 / 101.0).collect();
    let normalize = |v: &mut Vec<f64>| {
        let s = dot(v, v).sqrt();
        v.iter_mut().for_each(|x| *x /= s);
    };

    let mut v = start.clone();
    normalize(&mut v);
    let mut lmax = 0.0;
    for _ in 0..MAX_SWEEPS {
        let mut w = a.mul_vec(&v);
        let l = dot(&v, &w);
        normalize(&mut w);
        v = w;
        if (l - lmax).abs() <= REL_CHANGE * l.abs() {
            lmax = l;
            break;
        }
        lmax = l;
    }

    let mut v = start;
    normalize(&mut v);
    let mut mu = 0.0;
    let cap = 20 * n.max(1);
    for _ in 0..MAX_SWEEPS {
        let mut w = pcg(a, &v, 1e-10, cap)?.x;
        // Rayleigh quotient of the inverse.
        let m = dot(&v, &w);
        normalize(&mut w);
        v = w;
        if (m - mu).abs() <= REL_CHANGE * m.abs() {
            mu = m;
            break;
        }
        mu = m;
    }
    if !(mu > 0.0) || !(lmax > 0.0) {
        return Err(VemError::SingularSystem);
    }
    Ok(lmax * mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn laplacian_1d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
                t.push((i - 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, t)
    }

    #[test]
    fn triplets_sum_duplicates() {
        let m = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (1, 0, 2.0), (0, 0, 3.0), (0, 1, 2.0)]);
        assert_eq!(m.get(0, 0), 4.0);
        assert_eq!(m.get(1, 1), 0.0);
        assert_eq!(m.nnz(), 3);
        assert!(m.is_symmetric());
        assert_eq!(m.mul_vec(&[1.0, 1.0]), vec![6.0, 2.0]);
    }

    #[test]
    fn one_by_one_in_one_iteration() {
        let a = CsrMatrix::from_triplets(1, vec![(0, 0, 4.0)]);
        let r = pcg(&a, &[2.0], CG_TOLERANCE, 20).unwrap();
        assert_eq!(r.iterations, 1);
        assert_eq!(r.x, vec![0.5]);
        assert_relative_eq!(estimate_condition(&a).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn diagonal_condition() {
        let a = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (1, 1, 10.0)]);
        assert_relative_eq!(estimate_condition(&a).unwrap(), 10.0, max_relative = 1e-3);
    }

    #[test]
    fn laplacian_solve_and_condition() {
        let n = 50;
        let a = laplacian_1d(n);
        let b = vec![1.0; n];
        let r = pcg(&a, &b, CG_TOLERANCE, 20 * n).unwrap();
        assert!(r.residual <= CG_TOLERANCE);
        let h = 1.0 / (n + 1) as f64;
        for (i, xi) in r.x.iter().enumerate() {
            let s = (i + 1) as f64 * h;
            assert_relative_eq!(*xi, 0.5 * s * (1.0 - s) / (h * h), max_relative = 1e-9);
        }
        let pi = std::f64::consts::PI;
        let exact = (pi * n as f64 * h / 2.0).sin().powi(2) / (pi * h / 2.0).sin().powi(2);
        assert_relative_eq!(estimate_condition(&a).unwrap(), exact, max_relative = 1e-2);
    }

    #[test]
    fn singular_guard() {
        let a = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 1.0)]);
        assert!(matches!(pcg(&a, &[1.0, 0.0], CG_TOLERANCE, 40), Err(VemError::SingularSystem)));
        let z = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0)]);
        assert!(matches!(pcg(&z, &[1.0, 1.0], CG_TOLERANCE, 40), Err(VemError::SingularSystem)));
    }
}
