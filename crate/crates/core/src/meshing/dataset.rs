//! Refinement datasets: one sampling strategy, one meshing technique, and a
//! sequence of resolutions calibrated to target vertex counts.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{aggregate, delaunay, hex, voronoi};
use crate::mesh::{read_pmesh, write_pmesh, MeshError, MeshMetadata, PolyMesh};
use crate::sampling::{expected_count, sample, Sampling, SamplingError};

/// Approximate vertex counts of successive levels.
pub const LEVEL_TARGETS: [usize; 5] = [60, 500, 4000, 32000, 120000];

/// Accepted relative deviation from a level's target vertex count.
pub const TARGET_TOLERANCE: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Meshing {
    Tet,
    Hex,
    Voro,
    Poly,
}

impl Meshing {
    pub const ALL: [Meshing; 4] = [Meshing::Tet, Meshing::Hex, Meshing::Voro, Meshing::Poly];

    pub fn name(self) -> &'static str {
        match self {
            Meshing::Tet => "tet",
            Meshing::Hex => "hex",
            Meshing::Voro => "voro",
            Meshing::Poly => "poly",
        }
    }

    /// Sampling strategies this technique is combined with.
    pub fn samplings(self) -> &'static [Sampling] {
        use Sampling::*;
        match self {
            Meshing::Tet => &[Uniform, Anisotropic, Parallel, Bcl, Poisson, Random],
            Meshing::Hex => &[Uniform, Anisotropic, Parallel],
            Meshing::Voro => &[Bcl, Poisson, Random],
            Meshing::Poly => &[Parallel, Poisson, Random],
        }
    }

    /// Whether mesh vertices are exactly the sampled points.
    pub fn keeps_points(self) -> bool {
        self != Meshing::Voro
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("unknown dataset label `{0}`")]
    UnknownLabel(String),
    #[error("level {level} cannot reach {target} vertices (largest count: {best})")]
    CalibrationFailed { level: usize, target: usize, best: usize },
    #[error("level {0} is not finer than the previous one")]
    NotRefining(usize),
    #[error("at least one level is required")]
    NoLevels,
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Delaunay(#[from] delaunay::DelaunayError),
    #[error(transparent)]
    Hex(#[from] hex::HexError),
    #[error(transparent)]
    Voronoi(#[from] voronoi::VoronoiError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("metadata: {0}")]
    Metadata(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A sampling/meshing combination such as `tet-uniform`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DatasetLabel {
    pub meshing: Meshing,
    pub sampling: Sampling,
}

impl DatasetLabel {
    pub fn new(meshing: Meshing, sampling: Sampling) -> Option<Self> {
        meshing.samplings().contains(&sampling).then_some(DatasetLabel { meshing, sampling })
    }

    /// The 15 supported combinations.
    pub fn all() -> Vec<DatasetLabel> {
        Meshing::ALL
            .iter()
            .flat_map(|&m| m.samplings().iter().map(move |&s| DatasetLabel { meshing: m, sampling: s }))
            .collect()
    }
}

impl fmt::Display for DatasetLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.meshing.name(), self.sampling.name())
    }
}

impl FromStr for DatasetLabel {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || DatasetError::UnknownLabel(s.to_string());
        let (m, rest) = s.split_once('-').ok_or_else(bad)?;
        let meshing = Meshing::ALL.into_iter().find(|x| x.name() == m).ok_or_else(bad)?;
        let sampling: Sampling = rest.parse().map_err(|_| bad())?;
        DatasetLabel::new(meshing, sampling).ok_or_else(bad)
    }
}

impl Serialize for DatasetLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DatasetLabel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Refinement sequence with strictly decreasing mesh size.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub label: DatasetLabel,
    pub levels: Vec<(PolyMesh, MeshMetadata)>,
}

/// Contents of `metadata.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMetadata {
    pub label: DatasetLabel,
    pub seed: u64,
    pub levels: Vec<LevelMetadata>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelMetadata {
    #[serde(flatten)]
    pub mesh: MeshMetadata,
    pub target: usize,
    pub vertices: usize,
    pub cells: usize,
    pub h: f64,
    pub file: String,
}

/// Seed used for the sampling of one level.
pub fn level_seed(seed: u64, level: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(level as u64)
}

/// Samples with resolution `t` and meshes the cloud.
pub fn build_mesh_for(label: DatasetLabel, t: u32, seed: u64) -> Result<PolyMesh, DatasetError> {
    let cloud = sample(label.sampling, t, seed)?;
    Ok(match label.meshing {
        Meshing::Tet => delaunay::delaunay_tet(&cloud.points)?,
        Meshing::Hex => hex::hex_mesh(&cloud.points)?,
        Meshing::Voro => voronoi::voronoi_mesh(&cloud.points)?,
        Meshing::Poly => {
            let tets = delaunay::delaunay_tet(&cloud.points)?;
            aggregate::aggregate_poly(&tets, aggregate::DEFAULT_FRACTION)?
        }
    })
}

/// Redraws allowed for a stochastic cloud whose mesh is degenerate.
pub const MAX_REDRAWS: u64 = 8;

fn is_stochastic(s: Sampling) -> bool {
    matches!(s, Sampling::Parallel | Sampling::Poisson | Sampling::Random)
}

/// Like [`build_mesh_for`], but a stochastic cloud that meshes into
/// degenerate elements (e.g. a face below the area threshold) is redrawn
/// with a derived seed. Returns the mesh and the seed that produced it.
pub fn build_mesh_redraw(label: DatasetLabel, t: u32, seed: u64) -> Result<(PolyMesh, u64), DatasetError> {
    let mut attempt = 0;
    loop {
        let s = seed ^ (attempt << 40);
        match build_mesh_for(label, t, s) {
            Ok(m) => return Ok((m, s)),
            Err(DatasetError::Sampling(e)) => return Err(e.into()),
            Err(e) if !is_stochastic(label.sampling) || attempt + 1 >= MAX_REDRAWS => return Err(e),
            Err(e) => log::warn!("{label} t = {t} seed {s}: {e}; redrawing"),
        }
        attempt += 1;
    }
}

/// Vertex counts per resolution, from the closed-form law where one exists
/// and by building the mesh otherwise.
struct Counter {
    label: DatasetLabel,
    seed: u64,
    cache: BTreeMap<u32, (usize, Option<(PolyMesh, u64)>)>,
}

impl Counter {
    fn count(&mut self, t: u32) -> Result<usize, DatasetError> {
        if let Some((n, _)) = self.cache.get(&t) {
            return Ok(*n);
        }
        let law = if self.label.meshing.keeps_points() {
            expected_count(self.label.sampling, t)
        } else {
            None
        };
        let entry = match law {
            Some(n) => (n, None),
            None => {
                let built = build_mesh_redraw(self.label, t, self.seed)?;
                (built.0.num_vertices(), Some(built))
            }
        };
        let n = entry.0;
        self.cache.insert(t, entry);
        Ok(n)
    }

    fn take_mesh(&mut self, t: u32) -> Result<(PolyMesh, u64), DatasetError> {
        match self.cache.get_mut(&t).and_then(|e| e.1.take()) {
            Some(m) => Ok(m),
            None => build_mesh_redraw(self.label, t, self.seed),
        }
    }
}

fn relative_miss(count: usize, target: usize) -> f64 {
    (count as f64 - target as f64).abs() / target as f64
}

/// Upper bound on the resolution searched by the calibration.
pub const MAX_T: u32 = 256;

/// Closest-count resolution `t >= t_min` for `target` vertices, assuming
/// counts grow with `t`. The second value tells whether the count is
/// within [`TARGET_TOLERANCE`].
fn calibrate(counter: &mut Counter, target: usize, t_min: u32) -> Result<(u32, bool), DatasetError> {
    let mut t = t_min;
    // Counts grow roughly like t^3; jump close to the target first.
    let n0 = counter.count(t)?;
    if n0 < target {
        let guess = ((t + 1) as f64 * (target as f64 / n0 as f64).cbrt()).round() as u32;
        t = guess.saturating_sub(1).clamp(t_min, MAX_T);
    }
    while t > t_min && counter.count(t)? > target {
        t -= 1;
    }
    while counter.count(t)? < target {
        t += 1;
        if t > MAX_T {
            return Err(DatasetError::CalibrationFailed { level: 0, target, best: counter.count(MAX_T)? });
        }
    }
    // Now count(t) >= target and either t == t_min or count(t - 1) < target.
    if t > t_min && relative_miss(counter.count(t - 1)?, target) < relative_miss(counter.count(t)?, target) {
        t -= 1;
    }
    let within = relative_miss(counter.count(t)?, target) <= TARGET_TOLERANCE;
    Ok((t, within))
}

/// Builds `levels` meshes aiming at [`LEVEL_TARGETS`].
pub fn build_dataset(label: DatasetLabel, levels: usize, seed: u64) -> Result<Dataset, DatasetError> {
    build_dataset_with_targets(label, &LEVEL_TARGETS[..levels.min(LEVEL_TARGETS.len())], seed)
}

pub fn build_dataset_with_targets(
    label: DatasetLabel,
    targets: &[usize],
    seed: u64,
) -> Result<Dataset, DatasetError> {
    if targets.is_empty() {
        return Err(DatasetError::NoLevels);
    }
    let mut out: Vec<(PolyMesh, MeshMetadata)> = Vec::with_capacity(targets.len());
    let mut t_min = label.sampling.min_t();
    for (level, &target) in targets.iter().enumerate() {
        let s = level_seed(seed, level);
        let mut counter = Counter { label, seed: s, cache: BTreeMap::new() };
        let (t, within) = calibrate(&mut counter, target, t_min).map_err(|e| match e {
            DatasetError::CalibrationFailed { target, best, .. } => {
                DatasetError::CalibrationFailed { level, target, best }
            }
            e => e,
        })?;
        if !within {
            // The count law jumps over the tolerance band; the closest
            // resolution is the best available.
            log::warn!(
                "{label} level {level}: {} vertices is the closest count to {target}",
                counter.count(t)?
            );
        }
        let (mesh, s) = counter.take_mesh(t)?;
        if let Some((prev, _)) = out.last() {
            if mesh.h >= prev.h {
                return Err(DatasetError::NotRefining(level));
            }
        }
        log::info!("{label} level {level}: t = {t}, {} vertices, {} cells", mesh.num_vertices(), mesh.num_cells());
        let meta = MeshMetadata {
            sampling: label.sampling.name().to_string(),
            meshing: label.meshing.name().to_string(),
            t,
            seed: s,
            level,
        };
        out.push((mesh, meta));
        t_min = t + 1;
    }
    Ok(Dataset { label, levels: out })
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn meshes(&self) -> impl Iterator<Item = &PolyMesh> {
        self.levels.iter().map(|(m, _)| m)
    }

    pub fn metadata(&self, seed: u64) -> DatasetMetadata {
        let mut notes = Vec::new();
        if matches!(self.label.meshing, Meshing::Tet | Meshing::Poly) {
            notes.push("tetrahedra are the plain Delaunay tetrahedralization of the sampled points; no Steiner points are inserted".to_string());
        }
        if self.label.meshing == Meshing::Poly {
            notes.push("20% of the tetrahedra are merged pairwise; no vertices are removed".to_string());
        }
        let levels = self
            .levels
            .iter()
            .map(|(m, meta)| LevelMetadata {
                mesh: meta.clone(),
                target: LEVEL_TARGETS.get(meta.level).copied().unwrap_or(0),
                vertices: m.num_vertices(),
                cells: m.num_cells(),
                h: m.h,
                file: format!("level{}.pmesh", meta.level),
            })
            .collect();
        DatasetMetadata { label: self.label, seed, levels, notes }
    }

    /// Writes `level<n>.pmesh` files and `metadata.json` into `dir`.
    pub fn write(&self, dir: &Path, seed: u64) -> Result<(), DatasetError> {
        fs::create_dir_all(dir)?;
        let meta = self.metadata(seed);
        for ((mesh, _), lm) in self.levels.iter().zip(&meta.levels) {
            write_pmesh(mesh, &dir.join(&lm.file))?;
        }
        fs::write(dir.join("metadata.json"), serde_json::to_string_pretty(&meta)?)?;
        Ok(())
    }

    /// Reads a directory written by [`Dataset::write`].
    pub fn read(dir: &Path) -> Result<(Dataset, DatasetMetadata), DatasetError> {
        let meta: DatasetMetadata = serde_json::from_str(&fs::read_to_string(dir.join("metadata.json"))?)?;
        let mut levels = Vec::with_capacity(meta.levels.len());
        for lm in &meta.levels {
            levels.push((read_pmesh(&dir.join(&lm.file))?, lm.mesh.clone()));
        }
        Ok((Dataset { label: meta.label, levels }, meta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fifteen_labels_round_trip() {
        let all = DatasetLabel::all();
        assert_eq!(all.len(), 15);
        for l in all {
            assert_eq!(l.to_string().parse::<DatasetLabel>().unwrap(), l);
        }
        assert!("hex-random".parse::<DatasetLabel>().is_err());
        assert!("voro-uniform".parse::<DatasetLabel>().is_err());
        assert!("tet".parse::<DatasetLabel>().is_err());
    }

    #[test]
    fn tet_uniform_resolutions() {
        let label: DatasetLabel = "tet-uniform".parse().unwrap();
        let d = build_dataset(label, 2, 1).unwrap();
        let ts: Vec<u32> = d.levels.iter().map(|(_, m)| m.t).collect();
        assert_eq!(ts, vec![3, 7]);
        assert_eq!(d.levels[0].0.num_vertices(), 64);
        assert_eq!(d.levels[1].0.num_vertices(), 512);
    }

    #[test]
    fn hex_uniform_level0() {
        let d = build_dataset("hex-uniform".parse().unwrap(), 1, 0).unwrap();
        assert_eq!(d.levels[0].1.t, 3);
        assert_eq!(d.levels[0].0.num_vertices(), 64);
        assert_eq!(d.levels[0].0.num_cells(), 27);
    }

    #[test]
    fn write_and_read_back() {
        let d = build_dataset("voro-random".parse().unwrap(), 1, 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        d.write(dir.path(), 3).unwrap();
        let (back, meta) = Dataset::read(dir.path()).unwrap();
        assert_eq!(back.label, d.label);
        assert_eq!(meta.levels[0].vertices, d.levels[0].0.num_vertices());
        assert_eq!(back.levels[0].0.num_cells(), d.levels[0].0.num_cells());
    }
}
