//! Convergence studies, quality series and their rank correlation.

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::meshing::Dataset;
use crate::quality::{assumption_report, mesh_quality, AssumptionFlags, QualityReport};
use crate::vem::{assemble, solve};

use super::errors::{compute_errors, ErrorRow};
use super::problem::Problem;
use super::HarnessError;

/// Outcome of one refinement level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelErrors {
    pub level: usize,
    pub h: f64,
    pub dofs: usize,
    /// `None` when the level failed; see `failure`.
    pub errors: Option<ErrorRow>,
    pub failure: Option<String>,
    pub cg_iterations: usize,
    /// Rates against `h` from the previous level.
    pub rate_l2: Option<f64>,
    pub rate_h1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub problem: String,
    pub levels: Vec<LevelErrors>,
    /// Least-squares slopes of log error against log h over all levels.
    pub rate_l2: Option<f64>,
    pub rate_h1: Option<f64>,
    /// The same fits against the vertex count, as `-3 d log e / d log N`,
    /// which equals the h-rate on quasi-uniform meshes.
    pub dof_rate_l2: Option<f64>,
    pub dof_rate_h1: Option<f64>,
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn solve_level(mesh: &crate::mesh::PolyMesh, problem: &Problem) -> Result<(ErrorRow, usize), String> {
    let system = assemble(mesh, &problem.f, &|x| problem.g(x)).map_err(|e| e.to_string())?;
    let solution = solve(&system).map_err(|e| e.to_string())?;
    let row = compute_errors(mesh, &solution, problem).map_err(|e| e.to_string())?;
    Ok((row, solution.iterations))
}

/// Solves `problem` on every level. A failing level is recorded and the
/// study goes on with the others.
pub fn run_convergence(dataset: &Dataset, problem: &Problem) -> ErrorReport {
    let results: Vec<Result<(ErrorRow, usize), String>> =
        dataset.levels.par_iter().map(|(mesh, _)| solve_level(mesh, problem)).collect();
    let mut levels = Vec::with_capacity(results.len());
    for (level, ((mesh, _), r)) in dataset.levels.iter().zip(results).enumerate() {
        let (errors, failure, cg_iterations) = match r {
            Ok((row, it)) => (Some(row), None, it),
            Err(e) => {
                warn!("{} level {level}: {e}", dataset.label);
                (None, Some(e), 0)
            }
        };
        levels.push(LevelErrors {
            level,
            h: mesh.h,
            dofs: mesh.num_vertices(),
            errors,
            failure,
            cg_iterations,
            rate_l2: None,
            rate_h1: None,
        });
    }
    for n in 1..levels.len() {
        if let (Some(a), Some(b)) = (levels[n - 1].errors, levels[n].errors) {
            let dh = (b.h / a.h).ln();
            levels[n].rate_l2 = Some((b.err_l2 / a.err_l2).ln() / dh);
            levels[n].rate_h1 = Some((b.err_h1 / a.err_h1).ln() / dh);
        }
    }

    let ok: Vec<ErrorRow> = levels.iter().filter_map(|l| l.errors).collect();
    let log_h: Vec<f64> = ok.iter().map(|e| e.h.ln()).collect();
    let log_n: Vec<f64> = ok.iter().map(|e| (e.dofs as f64).ln()).collect();
    let log_l2: Vec<f64> = ok.iter().map(|e| e.err_l2.ln()).collect();
    let log_h1: Vec<f64> = ok.iter().map(|e| e.err_h1.ln()).collect();
    let report = ErrorReport {
        problem: problem.name.to_string(),
        rate_l2: ls_slope(&log_h, &log_l2),
        rate_h1: ls_slope(&log_h, &log_h1),
        dof_rate_l2: ls_slope(&log_n, &log_l2).map(|s| -3.0 * s),
        dof_rate_h1: ls_slope(&log_n, &log_h1).map(|s| -3.0 * s),
        levels,
    };
    info!(
        "{}: rates vs h l2 {:?} h1 {:?}; vs dofs l2 {:?} h1 {:?}",
        dataset.label, report.rate_l2, report.rate_h1, report.dof_rate_l2, report.dof_rate_h1
    );
    report
}

/// Global indicator per level with its trend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualitySeries {
    pub rho: Vec<f64>,
    /// Least-squares slope of rho against the level index.
    pub slope: Option<f64>,
    /// Assumption trend flags; needs two levels.
    pub flags: Option<AssumptionFlags>,
}

impl QualitySeries {
    pub fn from_reports(reports: &[QualityReport]) -> Self {
        let rho: Vec<f64> = reports.iter().map(|r| r.global_rho).collect();
        let idx: Vec<f64> = (0..rho.len()).map(|i| i as f64).collect();
        QualitySeries { slope: ls_slope(&idx, &rho), flags: assumption_report(reports).ok(), rho }
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        self.rho.windows(2).all(|w| w[1] < w[0])
    }
}

pub fn quality_series(dataset: &Dataset) -> QualitySeries {
    let reports: Vec<QualityReport> = dataset.meshes().map(mesh_quality).collect();
    QualitySeries::from_reports(&reports)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetCorrelation {
    pub dataset: String,
    pub rho: Vec<f64>,
    pub err_h1: Vec<f64>,
    pub rho_slope: Option<f64>,
    pub mean_rho: f64,
    pub mean_err_h1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    /// Number of leading levels present (and solved) in every dataset.
    pub matched_levels: usize,
    pub datasets: Vec<DatasetCorrelation>,
    /// Spearman correlation of mean rho against mean relative H1 error.
    pub spearman: f64,
}

/// Ranks starting at 1, ties sharing their average rank.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation of the average ranks. `None` when either side is
/// constant.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let sxy: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = rx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = ry.iter().map(|b| (b - my) * (b - my)).sum();
    (sxx > 0.0 && syy > 0.0).then(|| (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Correlates quality and H1 error over the levels every dataset shares.
pub fn correlate(
    labels: &[String],
    series: &[QualitySeries],
    errors: &[ErrorReport],
) -> Result<CorrelationReport, HarnessError> {
    if labels.len() < 3 || series.len() != labels.len() || errors.len() != labels.len() {
        return Err(HarnessError::InsufficientData(format!("{} datasets, need at least 3", labels.len())));
    }
    let solved = |e: &ErrorReport| e.levels.iter().take_while(|l| l.errors.is_some()).count();
    let matched = series.iter().map(|s| s.rho.len()).chain(errors.iter().map(solved)).min().unwrap_or(0);
    if matched == 0 {
        return Err(HarnessError::InsufficientData("no level is solved in every dataset".into()));
    }
    let datasets: Vec<DatasetCorrelation> = labels
        .iter()
        .zip(series)
        .zip(errors)
        .map(|((label, s), e)| {
            let rho = s.rho[..matched].to_vec();
            let err_h1: Vec<f64> = e.levels[..matched].iter().map(|l| l.errors.unwrap().err_h1).collect();
            DatasetCorrelation {
                dataset: label.clone(),
                mean_rho: rho.iter().sum::<f64>() / matched as f64,
                mean_err_h1: err_h1.iter().sum::<f64>() / matched as f64,
                rho_slope: s.slope,
                rho,
                err_h1,
            }
        })
        .collect();
    let x: Vec<f64> = datasets.iter().map(|d| d.mean_rho).collect();
    let y: Vec<f64> = datasets.iter().map(|d| d.mean_err_h1).collect();
    let spearman = spearman(&x, &y)
        .ok_or_else(|| HarnessError::InsufficientData("ties: all datasets have the same mean".into()))?;
    Ok(CorrelationReport { matched_levels: matched, datasets, spearman })
}
