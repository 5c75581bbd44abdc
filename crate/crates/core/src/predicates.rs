//! Orientation and in-sphere predicates with exact fallback.
//!
//! Both predicates are first evaluated in plain floating point together with
//! a conservative bound on the rounding error. When the bound cannot certify
//! the sign, the determinant is recomputed exactly with floating-point
//! expansions (sums of non-overlapping doubles).

use crate::point::Point3;

/// Relative error factor used by the floating-point filters. Far larger than
/// the tight forward error constants, so the filter never certifies a wrong
/// sign.
const FILTER: f64 = 1e-12;

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bv = s - a;
    let av = s - bv;
    (s, (a - av) + (b - bv))
}

#[inline]
fn two_diff(a: f64, b: f64) -> (f64, f64) {
    let d = a - b;
    let bv = a - d;
    let av = d + bv;
    (d, (a - av) + (bv - b))
}

#[inline]
fn two_product(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Exact value represented as a sum of non-overlapping components in
/// increasing magnitude. Zero components are dropped.
#[derive(Debug, Clone, Default)]
struct Expansion(Vec<f64>);

impl Expansion {
    fn from_diff(a: f64, b: f64) -> Self {
        let (d, e) = two_diff(a, b);
        let mut v = Vec::with_capacity(2);
        if e != 0.0 {
            v.push(e);
        }
        if d != 0.0 {
            v.push(d);
        }
        Expansion(v)
    }

    fn grow(&mut self, b: f64) {
        let mut q = b;
        let mut out = Vec::with_capacity(self.0.len() + 1);
        for &e in &self.0 {
            let (s, h) = two_sum(q, e);
            q = s;
            if h != 0.0 {
                out.push(h);
            }
        }
        if q != 0.0 {
            out.push(q);
        }
        self.0 = out;
    }

    fn add(&self, other: &Expansion) -> Expansion {
        let (mut acc, small) = if self.0.len() >= other.0.len() {
            (self.clone(), other)
        } else {
            (other.clone(), self)
        };
        for &c in &small.0 {
            acc.grow(c);
        }
        acc
    }

    fn neg(&self) -> Expansion {
        Expansion(self.0.iter().map(|c| -c).collect())
    }

    fn sub(&self, other: &Expansion) -> Expansion {
        self.add(&other.neg())
    }

    fn scale(&self, b: f64) -> Expansion {
        let mut acc = Expansion::default();
        for &e in &self.0 {
            let (p, err) = two_product(e, b);
            acc.grow(err);
            acc.grow(p);
        }
        acc
    }

    fn mul(&self, other: &Expansion) -> Expansion {
        let mut acc = Expansion::default();
        for &c in &other.0 {
            acc = acc.add(&self.scale(c));
        }
        acc
    }

    fn sign(&self) -> f64 {
        // The largest component carries the sign of a non-overlapping expansion.
        match self.0.last() {
            Some(&v) if v > 0.0 => 1.0,
            Some(&v) if v < 0.0 => -1.0,
            _ => 0.0,
        }
    }
}

fn det3_exact(r: [[&Expansion; 3]; 3]) -> Expansion {
    let m0 = r[1][1].mul(r[2][2]).sub(&r[1][2].mul(r[2][1]));
    let m1 = r[1][0].mul(r[2][2]).sub(&r[1][2].mul(r[2][0]));
    let m2 = r[1][0].mul(r[2][1]).sub(&r[1][1].mul(r[2][0]));
    r[0][0].mul(&m0).sub(&r[0][1].mul(&m1)).add(&r[0][2].mul(&m2))
}

/// Sign of the orientation determinant of `(a, b, c, d)`.
///
/// Positive when `d` lies below the plane through `a, b, c` (the plane's
/// normal being `(b - a) x (c - a)`), i.e. `(a - d) . ((b - d) x (c - d)) > 0`.
/// Returns `1.0`, `-1.0` or `0.0`.
pub fn orient3d(a: Point3, b: Point3, c: Point3, d: Point3) -> f64 {
    let ad = a - d;
    let bd = b - d;
    let cd = c - d;
    let det = ad.x * (bd.y * cd.z - bd.z * cd.y) - ad.y * (bd.x * cd.z - bd.z * cd.x)
        + ad.z * (bd.x * cd.y - bd.y * cd.x);
    let perm = ad.x.abs() * ((bd.y * cd.z).abs() + (bd.z * cd.y).abs())
        + ad.y.abs() * ((bd.x * cd.z).abs() + (bd.z * cd.x).abs())
        + ad.z.abs() * ((bd.x * cd.y).abs() + (bd.y * cd.x).abs());
    if det.abs() > FILTER * perm {
        return det.signum();
    }
    orient3d_exact(a, b, c, d)
}

fn orient3d_exact(a: Point3, b: Point3, c: Point3, d: Point3) -> f64 {
    let row = |p: Point3| {
        [
            Expansion::from_diff(p.x, d.x),
            Expansion::from_diff(p.y, d.y),
            Expansion::from_diff(p.z, d.z),
        ]
    };
    let (ra, rb, rc) = (row(a), row(b), row(c));
    det3_exact([
        [&ra[0], &ra[1], &ra[2]],
        [&rb[0], &rb[1], &rb[2]],
        [&rc[0], &rc[1], &rc[2]],
    ])
    .sign()
}

/// Sign of the in-sphere determinant.
///
/// For `(a, b, c, d)` with positive [`orient3d`], the result is positive when
/// `e` lies strictly inside their circumsphere, negative when outside and zero
/// when cospherical.
pub fn insphere(a: Point3, b: Point3, c: Point3, d: Point3, e: Point3) -> f64 {
    let rows = [a - e, b - e, c - e, d - e];
    let lift: Vec<f64> = rows.iter().map(|r| r.norm_squared()).collect();
    // 4x4 determinant of [r_i, lift_i] by expansion along the lift column.
    let m3 = |i: usize, j: usize, k: usize| -> (f64, f64) {
        let (p, q, r) = (rows[i], rows[j], rows[k]);
        let v = p.x * (q.y * r.z - q.z * r.y) - p.y * (q.x * r.z - q.z * r.x)
            + p.z * (q.x * r.y - q.y * r.x);
        let m = p.x.abs() * ((q.y * r.z).abs() + (q.z * r.y).abs())
            + p.y.abs() * ((q.x * r.z).abs() + (q.z * r.x).abs())
            + p.z.abs() * ((q.x * r.y).abs() + (q.y * r.x).abs());
        (v, m)
    };
    let (m0, p0) = m3(1, 2, 3);
    let (m1, p1) = m3(0, 2, 3);
    let (m2, p2) = m3(0, 1, 3);
    let (m3v, p3) = m3(0, 1, 2);
    let det = -lift[0] * m0 + lift[1] * m1 - lift[2] * m2 + lift[3] * m3v;
    let perm = lift[0] * p0 + lift[1] * p1 + lift[2] * p2 + lift[3] * p3;
    if det.abs() > FILTER * perm {
        return det.signum();
    }
    insphere_exact(a, b, c, d, e)
}

fn insphere_exact(a: Point3, b: Point3, c: Point3, d: Point3, e: Point3) -> f64 {
    let row = |p: Point3| {
        let x = Expansion::from_diff(p.x, e.x);
        let y = Expansion::from_diff(p.y, e.y);
        let z = Expansion::from_diff(p.z, e.z);
        let l = x.mul(&x).add(&y.mul(&y)).add(&z.mul(&z));
        [x, y, z, l]
    };
    let r = [row(a), row(b), row(c), row(d)];
    let minor = |i: usize, j: usize, k: usize| {
        det3_exact([
            [&r[i][0], &r[i][1], &r[i][2]],
            [&r[j][0], &r[j][1], &r[j][2]],
            [&r[k][0], &r[k][1], &r[k][2]],
        ])
    };
    let t0 = r[0][3].mul(&minor(1, 2, 3));
    let t1 = r[1][3].mul(&minor(0, 2, 3));
    let t2 = r[2][3].mul(&minor(0, 1, 3));
    let t3 = r[3][3].mul(&minor(0, 1, 2));
    t1.sub(&t0).sub(&t2).add(&t3).sign()
}

/// Per-index lifting offset in `[1, 2)` used by [`insphere_perturbed`].
pub fn lift_offset(index: usize) -> f64 {
    let mut z = (index as u64).wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    1.0 + (z >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// [`insphere`] with ties broken by an infinitesimal perturbation of the
/// lifted coordinate `|p|^2 + eps * lift_offset(id)`.
///
/// The perturbed test is the power test of a regular triangulation with
/// generic infinitesimal weights, so it never returns zero for distinct
/// points and is consistent across all tetrahedra: the Delaunay
/// triangulation it induces is unique.
pub fn insphere_perturbed(p: [Point3; 5], ids: [usize; 5]) -> f64 {
    let s = insphere(p[0], p[1], p[2], p[3], p[4]);
    if s != 0.0 {
        return s;
    }
    // d det / d eps = sum_i (delta_i - delta_e) C_i, with C_i the cofactor
    // of the lift entry of row i in the translated 4x4 determinant.
    let e = p[4];
    let rows: Vec<[Expansion; 3]> = p[..4]
        .iter()
        .map(|q| {
            [
                Expansion::from_diff(q.x, e.x),
                Expansion::from_diff(q.y, e.y),
                Expansion::from_diff(q.z, e.z),
            ]
        })
        .collect();
    let minor = |i: usize, j: usize, k: usize| {
        let (a, b, c) = (&rows[i], &rows[j], &rows[k]);
        det3_exact([[&a[0], &a[1], &a[2]], [&b[0], &b[1], &b[2]], [&c[0], &c[1], &c[2]]])
    };
    let cof = [minor(1, 2, 3).neg(), minor(0, 2, 3), minor(0, 1, 3).neg(), minor(0, 1, 2)];
    let de = lift_offset(ids[4]);
    let mut total = Expansion::default();
    for (i, c) in cof.iter().enumerate() {
        total = total.add(&c.scale(lift_offset(ids[i]))).sub(&c.scale(de));
    }
    let sign = total.sign();
    if sign != 0.0 {
        return sign;
    }
    // Only reachable for coincident points.
    if ids[4] < ids[..4].iter().copied().min().unwrap_or(usize::MAX) {
        1.0
    } else {
        -1.0
    }
}
