//! Point clouds in the closed unit cube.
//!
//! Every strategy takes an integer resolution `t`; the stochastic ones also
//! take a seed and draw from ChaCha8 streams, so results are identical
//! across platforms.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::distr::{Distribution, Open01, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::point::Point3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    Uniform,
    Anisotropic,
    Parallel,
    Bcl,
    Poisson,
    Random,
}

impl Sampling {
    pub const ALL: [Sampling; 6] = [
        Sampling::Uniform,
        Sampling::Anisotropic,
        Sampling::Parallel,
        Sampling::Bcl,
        Sampling::Poisson,
        Sampling::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Sampling::Uniform => "uniform",
            Sampling::Anisotropic => "anisotropic",
            Sampling::Parallel => "parallel",
            Sampling::Bcl => "bcl",
            Sampling::Poisson => "poisson",
            Sampling::Random => "random",
        }
    }

    /// Smallest admissible `t`.
    pub fn min_t(self) -> u32 {
        match self {
            Sampling::Anisotropic | Sampling::Parallel | Sampling::Poisson => 2,
            _ => 1,
        }
    }

    /// Whether the output is a tensor-product grid.
    pub fn is_grid(self) -> bool {
        matches!(self, Sampling::Uniform | Sampling::Anisotropic | Sampling::Parallel)
    }
}

impl fmt::Display for Sampling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Sampling {
    type Err = SamplingError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Sampling::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| SamplingError::UnknownStrategy(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SamplingError {
    #[error("unknown sampling strategy `{0}`")]
    UnknownStrategy(String),
    #[error("{strategy} sampling needs t >= {min}, got {t}")]
    InvalidParameter { strategy: Sampling, t: u32, min: u32 },
    #[error("Poisson sampling placed no interior points")]
    SamplingFailed,
}

/// Which part of the cube boundary a point lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointTag {
    Interior,
    Face,
    Edge,
    Corner,
}

impl PointTag {
    /// Classifies a point of the closed cube by how many of its coordinates
    /// are exactly 0 or 1.
    pub fn of(p: Point3) -> PointTag {
        let on = [p.x, p.y, p.z].iter().filter(|&&c| c == 0.0 || c == 1.0).count();
        match on {
            0 => PointTag::Interior,
            1 => PointTag::Face,
            2 => PointTag::Edge,
            _ => PointTag::Corner,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PointTag::Interior => "interior",
            PointTag::Face => "face",
            PointTag::Edge => "edge",
            PointTag::Corner => "corner",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Point3>,
    pub tags: Vec<PointTag>,
    pub strategy: Sampling,
    pub t: u32,
    pub seed: u64,
}

impl PointCloud {
    fn new(points: Vec<Point3>, strategy: Sampling, t: u32, seed: u64) -> Self {
        let tags = points.iter().map(|&p| PointTag::of(p)).collect();
        PointCloud { points, tags, strategy, t, seed }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn count(&self, tag: PointTag) -> usize {
        self.tags.iter().filter(|&&t| t == tag).count()
    }

    /// Writes `x y z tag` lines.
    pub fn write_xyz(&self, mut w: impl Write) -> std::io::Result<()> {
        for (p, t) in self.points.iter().zip(&self.tags) {
            writeln!(w, "{:.16e} {:.16e} {:.16e} {}", p.x, p.y, p.z, t.name())?;
        }
        Ok(())
    }
}

/// Generates a cloud with the given strategy.
pub fn sample(strategy: Sampling, t: u32, seed: u64) -> Result<PointCloud, SamplingError> {
    if t < strategy.min_t() {
        return Err(SamplingError::InvalidParameter { strategy, t, min: strategy.min_t() });
    }
    match strategy {
        Sampling::Uniform => Ok(sample_uniform(t)),
        Sampling::Anisotropic => Ok(sample_anisotropic(t)),
        Sampling::Parallel => Ok(sample_parallel(t, seed)),
        Sampling::Bcl => Ok(sample_bcl(t)),
        Sampling::Poisson => sample_poisson(t, seed),
        Sampling::Random => Ok(sample_random(t, seed)),
    }
    .map(|mut c| {
        c.seed = seed;
        c
    })
}

/// Closed-form vertex count for the deterministic strategies.
pub fn expected_count(strategy: Sampling, t: u32) -> Option<usize> {
    let n = t as usize;
    match strategy {
        Sampling::Uniform | Sampling::Parallel => Some((n + 1).pow(3)),
        Sampling::Bcl => Some((n + 1).pow(3) + n.pow(3)),
        Sampling::Anisotropic => Some((n + 1).pow(2) * anisotropic_levels(t).len()),
        Sampling::Random => Some(8 + 12 * n + 6 * n * n + n.pow(3)),
        Sampling::Poisson => None,
    }
}

fn grid_axis(t: u32) -> Vec<f64> {
    (0..=t).map(|i| i as f64 / t as f64).collect()
}

fn tensor(xs: &[f64], ys: &[f64], zs: &[f64]) -> Vec<Point3> {
    let mut pts = Vec::with_capacity(xs.len() * ys.len() * zs.len());
    for &z in zs {
        for &y in ys {
            for &x in xs {
                pts.push(Point3::new(x, y, z));
            }
        }
    }
    pts
}

/// Equispaced grid `{0, 1/t, ..., 1}^3`.
pub fn sample_uniform(t: u32) -> PointCloud {
    let a = grid_axis(t.max(1));
    PointCloud::new(tensor(&a, &a, &a), Sampling::Uniform, t, 0)
}

/// z-levels `k (k + 1) / (2t)` (steps `1/t, 2/t, ...`) below 1, then 1.
pub fn anisotropic_levels(t: u32) -> Vec<f64> {
    let mut z = vec![0.0];
    let mut k = 1u64;
    loop {
        let v = (k * (k + 1)) as f64 / (2.0 * t as f64);
        if v >= 1.0 {
            break;
        }
        z.push(v);
        k += 1;
    }
    z.push(1.0);
    z
}

/// Uniform spacing in x and y, linearly growing spacing along z.
pub fn sample_anisotropic(t: u32) -> PointCloud {
    let a = grid_axis(t);
    PointCloud::new(tensor(&a, &a, &anisotropic_levels(t)), Sampling::Anisotropic, t, 0)
}

/// Bound on the random shift of each interior grid plane, in units of `1/t`.
pub const PARALLEL_SHIFT: f64 = 0.48;

/// Plane positions of one axis of the parallel strategy.
fn parallel_axis(t: u32, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let h = 1.0 / t as f64;
    let shift = Uniform::new_inclusive(-PARALLEL_SHIFT * h, PARALLEL_SHIFT * h).unwrap();
    let mut a = grid_axis(t);
    for v in a.iter_mut().take(t as usize).skip(1) {
        *v += shift.sample(rng);
    }
    a
}

/// Uniform grid whose interior planes are shifted at random along their
/// normal axis.
pub fn sample_parallel(t: u32, seed: u64) -> PointCloud {
    let mut axes = Vec::with_capacity(3);
    for stream in 0..3 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        axes.push(parallel_axis(t, &mut rng));
    }
    PointCloud::new(tensor(&axes[0], &axes[1], &axes[2]), Sampling::Parallel, t, seed)
}

/// Uniform grid plus the center of every grid cube (body-centered lattice).
pub fn sample_bcl(t: u32) -> PointCloud {
    let mut pts = sample_uniform(t).points;
    let c: Vec<f64> = (0..t).map(|i| (2 * i + 1) as f64 / (2.0 * t as f64)).collect();
    pts.extend(tensor(&c, &c, &c));
    PointCloud::new(pts, Sampling::Bcl, t, 0)
}

/// Bridson's dart throwing in an axis-aligned box of dimension `D`.
fn bridson<const D: usize>(lo: [f64; D], hi: [f64; D], r: f64, rng: &mut ChaCha8Rng) -> Vec<[f64; D]> {
    const K: usize = 30;
    let cell = r / (D as f64).sqrt();
    let dims: Vec<usize> =
        (0..D).map(|d| (((hi[d] - lo[d]) / cell).ceil() as usize).max(1)).collect();
    let total: usize = dims.iter().product();
    let mut grid: Vec<Option<usize>> = vec![None; total];
    let index = |p: &[f64; D]| -> [usize; D] {
        let mut ix = [0usize; D];
        for d in 0..D {
            ix[d] = (((p[d] - lo[d]) / cell) as usize).min(dims[d] - 1);
        }
        ix
    };
    let flat = |ix: &[usize; D]| -> usize {
        let mut f = 0;
        for d in (0..D).rev() {
            f = f * dims[d] + ix[d];
        }
        f
    };
    let inside = |p: &[f64; D]| (0..D).all(|d| p[d] >= lo[d] && p[d] <= hi[d]);

    let mut pts: Vec<[f64; D]> = Vec::new();
    let mut active: Vec<usize> = Vec::new();
    let mut first = [0.0; D];
    for d in 0..D {
        first[d] = lo[d] + (hi[d] - lo[d]) * rng.random::<f64>();
    }
    grid[flat(&index(&first))] = Some(0);
    pts.push(first);
    active.push(0);

    while !active.is_empty() {
        let slot = rng.random_range(0..active.len());
        let base = pts[active[slot]];
        let mut placed = false;
        for _ in 0..K {
            // Uniform direction and radius in [r, 2r).
            let mut dir = [0.0; D];
            let len = loop {
                let mut s = 0.0;
                for v in dir.iter_mut() {
                    *v = 2.0 * rng.random::<f64>() - 1.0;
                    s += *v * *v;
                }
                if s > 1e-12 && s <= 1.0 {
                    break s.sqrt();
                }
            };
            let rad = r * (1.0 + rng.random::<f64>());
            let mut cand = [0.0; D];
            for d in 0..D {
                cand[d] = base[d] + dir[d] / len * rad;
            }
            if !inside(&cand) {
                continue;
            }
            let ix = index(&cand);
            let mut ok = true;
            let mut lo_ix = [0usize; D];
            let mut hi_ix = [0usize; D];
            for d in 0..D {
                lo_ix[d] = ix[d].saturating_sub(2);
                hi_ix[d] = (ix[d] + 2).min(dims[d] - 1);
            }
            let mut cur = lo_ix;
            'scan: loop {
                if let Some(j) = grid[flat(&cur)] {
                    let q = &pts[j];
                    let d2: f64 = (0..D).map(|d| (q[d] - cand[d]).powi(2)).sum();
                    if d2 < r * r {
                        ok = false;
                        break 'scan;
                    }
                }
                let mut d = 0;
                loop {
                    if d == D {
                        break 'scan;
                    }
                    if cur[d] < hi_ix[d] {
                        cur[d] += 1;
                        break;
                    }
                    cur[d] = lo_ix[d];
                    d += 1;
                }
            }
            if ok {
                let id = pts.len();
                grid[flat(&ix)] = Some(id);
                pts.push(cand);
                active.push(id);
                placed = true;
                break;
            }
        }
        if !placed {
            active.swap_remove(slot);
        }
    }
    pts
}

/// Poisson-disk interior and face points with radius `1/t`, equispaced edge
/// points and the corners.
pub fn sample_poisson(t: u32, seed: u64) -> Result<PointCloud, SamplingError> {
    let r = 1.0 / t as f64;
    let (a, b) = (r, 1.0 - r);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let interior = bridson::<3>([a; 3], [b; 3], r, &mut rng);
    if interior.is_empty() {
        return Err(SamplingError::SamplingFailed);
    }
    let mut pts = corners();
    for k in 1..t {
        let s = k as f64 / t as f64;
        pts.extend(edge_points(s));
    }
    for (face, (axis, side)) in FACES.iter().enumerate() {
        let mut frng = ChaCha8Rng::seed_from_u64(seed);
        frng.set_stream(1 + face as u64);
        for q in bridson::<2>([a; 2], [b; 2], r, &mut frng) {
            pts.push(on_face(*axis, *side, q[0], q[1]));
        }
    }
    pts.extend(interior.into_iter().map(|p| Point3::new(p[0], p[1], p[2])));
    Ok(PointCloud::new(pts, Sampling::Poisson, t, seed))
}

/// 8 corners, `t` random points inside each edge, `t^2` inside each face and
/// `t^3` inside the cube, all i.i.d. uniform.
pub fn sample_random(t: u32, seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = || -> f64 { rng.sample(Open01) };
    let n = t as usize;
    let mut pts = corners();
    for e in 0..12 {
        for _ in 0..n {
            pts.push(edge_points(u())[e]);
        }
    }
    for (axis, side) in FACES {
        for _ in 0..n * n {
            let (s, r) = (u(), u());
            pts.push(on_face(axis, side, s, r));
        }
    }
    for _ in 0..n * n * n {
        let (x, y, z) = (u(), u(), u());
        pts.push(Point3::new(x, y, z));
    }
    PointCloud::new(pts, Sampling::Random, t, seed)
}

fn corners() -> Vec<Point3> {
    (0..8)
        .map(|i| Point3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64))
        .collect()
}

/// The point at parameter `s` on each of the 12 cube edges.
fn edge_points(s: f64) -> [Point3; 12] {
    let mut out = [Point3::ZERO; 12];
    let mut k = 0;
    for axis in 0..3 {
        for a in [0.0, 1.0] {
            for b in [0.0, 1.0] {
                out[k] = match axis {
                    0 => Point3::new(s, a, b),
                    1 => Point3::new(a, s, b),
                    _ => Point3::new(a, b, s),
                };
                k += 1;
            }
        }
    }
    out
}

/// Cube faces as (normal axis, coordinate).
const FACES: [(usize, f64); 6] = [(0, 0.0), (0, 1.0), (1, 0.0), (1, 1.0), (2, 0.0), (2, 1.0)];

fn on_face(axis: usize, side: f64, s: f64, r: f64) -> Point3 {
    match axis {
        0 => Point3::new(side, s, r),
        1 => Point3::new(s, side, r),
        _ => Point3::new(s, r, side),
    }
}

/// Smallest pairwise distance (brute force; for tests and small clouds).
pub fn min_separation(points: &[Point3]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            best = best.min(points[i].distance(points[j]));
        }
    }
    best
}
