//! The a-priori mesh quality indicator.
//!
//! Each face gets three scores `rho1..3` (kernel ratio, size balance, edge
//! count); each cell combines its own kernel ratio, size balance and face
//! count with the scores of its faces. The global indicator is
//!
//! ```text
//! rho = sqrt( mean over cells of (rho1 rho2 + rho1 rho3) / 2 )
//! ```
//!
//! and lies in `[0, 1]`, higher being better.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{face_kernel_area, kernel_volume};
use crate::mesh::PolyMesh;

/// Scores of a single face.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaceQuality {
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementQuality {
    pub id: usize,
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
    /// `k(P) / |P|` alone, without the face factors.
    #[serde(skip)]
    pub kernel_ratio: f64,
    /// Scores of the cell's faces, in cell face order.
    #[serde(skip)]
    pub faces: Vec<FaceQuality>,
}

impl ElementQuality {
    /// The cell's contribution `(rho1 rho2 + rho1 rho3) / 2` to the mean
    /// under the square root.
    pub fn contribution(&self) -> f64 {
        0.5 * (self.rho1 * self.rho2 + self.rho1 * self.rho3)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualitySummary {
    pub min_rho1: f64,
    pub mean_rho1: f64,
    pub min_rho2: f64,
    pub mean_rho2: f64,
    pub min_rho3: f64,
    pub mean_rho3: f64,
    /// Counts of cell contributions in ten equal bins over `[0, 1]`.
    pub histogram: [usize; 10],
}

/// Per-mesh evidence for the geometric assumptions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionEvidence {
    /// Cells whose `rho1` vanishes (empty cell or face kernel).
    pub non_star_cells: usize,
    /// Smallest ratio of an edge length to the diameter of a cell containing
    /// it.
    pub min_edge_ratio: f64,
    pub max_faces_per_cell: usize,
    pub max_edges_per_cell: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub global_rho: f64,
    pub per_element: Vec<ElementQuality>,
    pub summary: QualitySummary,
    pub flags: AssumptionEvidence,
}

/// `k(F) / |F|`.
pub fn rho1_face(mesh: &PolyMesh, f: usize) -> f64 {
    (face_kernel_area(mesh, f) / mesh.faces[f].area()).clamp(0.0, 1.0)
}

/// `min(sqrt|F|, min_E h_E) / max(sqrt|F|, h_F)`.
pub fn rho2_face(mesh: &PolyMesh, f: usize) -> f64 {
    let face = &mesh.faces[f];
    let s = face.area().sqrt();
    s.min(mesh.face_min_edge(f)) / s.max(face.diameter())
}

/// `3 / #edges`.
pub fn rho3_face(mesh: &PolyMesh, f: usize) -> f64 {
    3.0 / mesh.faces[f].num_edges() as f64
}

pub fn face_quality(mesh: &PolyMesh, f: usize) -> FaceQuality {
    FaceQuality { rho1: rho1_face(mesh, f), rho2: rho2_face(mesh, f), rho3: rho3_face(mesh, f) }
}

fn cell_quality(mesh: &PolyMesh, c: usize, faces: &[FaceQuality]) -> ElementQuality {
    let cell = &mesh.cells[c];
    let fq: Vec<FaceQuality> = cell.faces.iter().map(|cf| faces[cf.face]).collect();
    let nf = fq.len() as f64;

    let face_product: f64 = fq.iter().map(|q| q.rho1).product();
    // A non-star-shaped face already zeroes the score; skip the clipping.
    let kernel_ratio = if face_product == 0.0 {
        0.0
    } else {
        (kernel_volume(mesh, c) / cell.volume()).clamp(0.0, 1.0)
    };
    let rho1 = kernel_ratio * face_product;

    let cbrt = cell.volume().cbrt();
    let min_hf = cell.faces.iter().map(|cf| mesh.faces[cf.face].diameter()).fold(f64::INFINITY, f64::min);
    let rho2 = 0.5 * (cbrt.min(min_hf) / cbrt.max(cell.diameter())
        + fq.iter().map(|q| q.rho2).sum::<f64>() / nf);

    let rho3 = 0.5 * (4.0 / nf + fq.iter().map(|q| q.rho3).sum::<f64>() / nf);

    ElementQuality { id: c, rho1, rho2, rho3, kernel_ratio, faces: fq }
}

/// Scores of cell `c` alone.
pub fn element_quality(mesh: &PolyMesh, c: usize) -> ElementQuality {
    let mut faces = vec![FaceQuality { rho1: 0.0, rho2: 0.0, rho3: 0.0 }; mesh.num_faces()];
    for cf in &mesh.cells[c].faces {
        faces[cf.face] = face_quality(mesh, cf.face);
    }
    cell_quality(mesh, c, &faces)
}

pub fn rho1_cell(mesh: &PolyMesh, c: usize) -> f64 {
    element_quality(mesh, c).rho1
}

pub fn rho2_cell(mesh: &PolyMesh, c: usize) -> f64 {
    element_quality(mesh, c).rho2
}

pub fn rho3_cell(mesh: &PolyMesh, c: usize) -> f64 {
    element_quality(mesh, c).rho3
}

/// Evaluates every face and cell and the global indicator.
pub fn mesh_quality(mesh: &PolyMesh) -> QualityReport {
    let faces: Vec<FaceQuality> =
        (0..mesh.num_faces()).into_par_iter().map(|f| face_quality(mesh, f)).collect();
    let per_element: Vec<ElementQuality> =
        (0..mesh.num_cells()).into_par_iter().map(|c| cell_quality(mesh, c, &faces)).collect();

    let n = per_element.len().max(1) as f64;
    let mean_contribution = per_element.iter().map(|e| e.contribution()).sum::<f64>() / n;
    let global_rho = mean_contribution.max(0.0).sqrt().min(1.0);

    let stat = |g: fn(&ElementQuality) -> f64| {
        let min = per_element.iter().map(g).fold(f64::INFINITY, f64::min);
        let mean = per_element.iter().map(g).sum::<f64>() / n;
        (min, mean)
    };
    let (min_rho1, mean_rho1) = stat(|e| e.rho1);
    let (min_rho2, mean_rho2) = stat(|e| e.rho2);
    let (min_rho3, mean_rho3) = stat(|e| e.rho3);
    let mut histogram = [0usize; 10];
    for e in &per_element {
        let b = ((e.contribution() * 10.0) as usize).min(9);
        histogram[b] += 1;
    }

    let flags = evidence(mesh, &per_element);
    QualityReport {
        global_rho,
        per_element,
        summary: QualitySummary {
            min_rho1,
            mean_rho1,
            min_rho2,
            mean_rho2,
            min_rho3,
            mean_rho3,
            histogram,
        },
        flags,
    }
}

fn evidence(mesh: &PolyMesh, per_element: &[ElementQuality]) -> AssumptionEvidence {
    let min_edge_ratio = (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| mesh.cell_min_edge(c) / mesh.cells[c].diameter())
        .collect::<Vec<_>>()
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    AssumptionEvidence {
        non_star_cells: per_element.iter().filter(|e| e.rho1 == 0.0).count(),
        min_edge_ratio,
        max_faces_per_cell: mesh.cells.iter().map(|c| c.num_faces()).max().unwrap_or(0),
        max_edges_per_cell: mesh.cells.iter().map(|c| c.num_edges).max().unwrap_or(0),
    }
}

/// Factor by which the smallest edge-to-diameter ratio must shrink over a
/// refinement series before the size assumption is flagged.
pub const G2_THETA: f64 = 4.0;

/// Relative decrease below which two edge ratios count as equal.
const STEADY_DROP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum QualityError {
    #[error("assumption report needs at least 2 levels, got {0}")]
    InsufficientLevels(usize),
}

/// Trend-based flags for the three geometric assumptions over a refinement
/// series. They are evidence from finitely many meshes, not proofs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssumptionFlags {
    /// Some cell is not star-shaped (or has a non-star-shaped face).
    pub g1: bool,
    /// Edges shrink faster than cells: the smallest edge ratio drops by more
    /// than [`G2_THETA`], or it drops at every refinement step.
    pub g2: bool,
    /// The number of faces or edges per cell keeps growing.
    pub g3: bool,
}

pub fn assumption_report(series: &[QualityReport]) -> Result<AssumptionFlags, QualityError> {
    assumption_report_with(series, G2_THETA)
}

pub fn assumption_report_with(
    series: &[QualityReport],
    theta: f64,
) -> Result<AssumptionFlags, QualityError> {
    if series.len() < 2 {
        return Err(QualityError::InsufficientLevels(series.len()));
    }
    let first = &series[0].flags;
    let last = &series[series.len() - 1].flags;
    let min_ratio = series.iter().map(|r| r.flags.min_edge_ratio).fold(f64::INFINITY, f64::min);
    Ok(AssumptionFlags {
        g1: series.iter().any(|r| r.flags.non_star_cells > 0),
        g2: first.min_edge_ratio > theta * min_ratio
            || series.windows(2).all(|w| {
                w[1].flags.min_edge_ratio < (1.0 - STEADY_DROP) * w[0].flags.min_edge_ratio
            }),
        g3: last.max_faces_per_cell > first.max_faces_per_cell
            || last.max_edges_per_cell > first.max_edges_per_cell,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{box_mesh, build_mesh, prism_mesh, tetrahedron_mesh, unit_cube_mesh};
    use crate::point::Point3;
    use approx::assert_relative_eq;

    fn regular_tet() -> PolyMesh {
        let s = 1.0 / 8f64.sqrt();
        tetrahedron_mesh([
            Point3::new(s, s, s),
            Point3::new(s, -s, -s),
            Point3::new(-s, s, -s),
            Point3::new(-s, -s, s),
        ])
        .unwrap()
    }

    #[test]
    fn unit_cube_scores() {
        let m = unit_cube_mesh();
        let q = element_quality(&m, 0);
        assert_eq!(q.rho1, 1.0);
        assert_relative_eq!(q.rho2, 0.5 * (1.0 / 3f64.sqrt() + 1.0 / 2f64.sqrt()), epsilon = 1e-14);
        assert_relative_eq!(q.rho3, 0.5 * (4.0 / 6.0 + 0.75), epsilon = 1e-15);
        for f in 0..6 {
            assert_relative_eq!(rho2_face(&m, f), 1.0 / 2f64.sqrt(), epsilon = 1e-15);
            assert_eq!(rho3_face(&m, f), 0.75);
        }
        let r = mesh_quality(&m);
        assert!((r.global_rho - 0.82176).abs() < 1e-4);
    }

    #[test]
    fn regular_tetrahedron_scores() {
        let m = regular_tet();
        let q = element_quality(&m, 0);
        assert_eq!(q.rho3, 1.0);
        // |P| = sqrt(2)/12, |F| = sqrt(3)/4, h_P = h_F = 1.
        let oracle = 0.5 * ((2f64.sqrt() / 12.0).cbrt() + (3f64.sqrt() / 4.0).sqrt());
        assert_relative_eq!(q.rho2, oracle, epsilon = 1e-14);
        assert!((q.rho2 - 0.57420).abs() < 1e-4);
        assert!((rho2_face(&m, 0) - 0.65804).abs() < 1e-5);
        let rho = mesh_quality(&m).global_rho;
        assert_relative_eq!(rho, (0.5 * (oracle + 1.0)).sqrt(), epsilon = 1e-14);
        assert!((rho - 0.88719).abs() < 1e-4);
    }

    #[test]
    fn split_edge_square_penalized() {
        // Unit cube whose bottom face has a midpoint on one edge; the
        // adjacent side face carries the same vertex.
        let mut v: Vec<Point3> = unit_cube_mesh().vertices.clone();
        v.push(Point3::new(0.5, 0.0, 0.0));
        let faces = vec![
            vec![0, 2, 3, 1, 8],
            vec![4, 5, 7, 6],
            vec![0, 8, 1, 5, 4],
            vec![2, 6, 7, 3],
            vec![0, 4, 6, 2],
            vec![1, 3, 7, 5],
        ];
        let m = build_mesh(v, faces, vec![(0..6).collect()]).unwrap();
        assert_relative_eq!(rho2_face(&m, 0), 0.5 / 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(rho3_face(&m, 0), 0.6);
    }

    #[test]
    fn slab_rho2_decreases() {
        let vals: Vec<f64> = [0.5, 0.1, 0.01]
            .iter()
            .map(|&e| rho2_cell(&box_mesh(Point3::ZERO, Point3::new(1.0, 1.0, e)).unwrap(), 0))
            .collect();
        assert!(vals[0] > vals[1] && vals[1] > vals[2]);
    }

    #[test]
    fn l_prism_kernel_ratio() {
        let l = [(0., 0.), (2., 0.), (2., 1.), (1., 1.), (1., 2.), (0., 2.)];
        let m = prism_mesh(&l, 1.0).unwrap();
        let top = (0..m.num_faces()).find(|&f| m.faces[f].num_edges() == 6).unwrap();
        assert_relative_eq!(rho1_face(&m, top), 1.0 / 3.0, epsilon = 1e-12);
        // Two L-shaped faces and a cell kernel ratio of 1/3.
        assert_relative_eq!(rho1_cell(&m, 0), 1.0 / 27.0, epsilon = 1e-12);
    }

    #[test]
    fn non_star_cell_scores_zero() {
        let z = [(1., 0.), (3., 0.), (3., 1.), (2., 1.), (2., 2.), (0., 2.), (0., 1.2), (1., 1.2)];
        let m = prism_mesh(&z, 1.0).unwrap();
        let r = mesh_quality(&m);
        assert_eq!(r.per_element[0].rho1, 0.0);
        assert_eq!(r.global_rho, 0.0);
        assert_eq!(r.flags.non_star_cells, 1);
    }

    #[test]
    fn report_needs_two_levels() {
        let r = mesh_quality(&unit_cube_mesh());
        assert_eq!(assumption_report(std::slice::from_ref(&r)), Err(QualityError::InsufficientLevels(1)));
        let f = assumption_report(&[r.clone(), r]).unwrap();
        assert!(!f.g1 && !f.g2 && !f.g3);
    }

    #[test]
    fn edge_ratio_trends() {
        let base = mesh_quality(&unit_cube_mesh());
        let series = |ratios: &[f64]| -> Vec<QualityReport> {
            ratios
                .iter()
                .map(|&r| {
                    let mut q = base.clone();
                    q.flags.min_edge_ratio = r;
                    q
                })
                .collect()
        };
        let g2 = |ratios: &[f64]| assumption_report(&series(ratios)).unwrap().g2;
        assert!(!g2(&[0.5, 0.5, 0.5]));
        assert!(!g2(&[0.3, 0.25, 0.25]));
        assert!(!g2(&[0.3, 0.4, 0.2]));
        assert!(g2(&[0.4, 0.3, 0.16]));
        assert!(g2(&[0.4, 0.05, 0.2]));
    }

    #[test]
    fn json_shape() {
        let r = mesh_quality(&unit_cube_mesh());
        let j = serde_json::to_value(&r).unwrap();
        assert!(j["global_rho"].is_number());
        assert_eq!(j["per_element"][0]["id"], 0);
        assert!(j["per_element"][0].get("faces").is_none());
        assert!(j["summary"]["histogram"].is_array());
    }
}
