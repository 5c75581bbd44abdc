//! The a-priori study pipeline and its CSV, JSON and SVG outputs.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::meshing::Dataset;
use crate::quality::mesh_quality;

use super::convergence::{correlate, run_convergence, CorrelationReport, ErrorReport, QualitySeries};
use super::problem::Problem;
use super::HarnessError;

pub const CSV_HEADER: &str = "dataset,level,h,dofs,rho,err_l2,err_h1,err_linf,rate_l2,rate_h1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyEntry {
    pub dataset: String,
    pub quality: QualitySeries,
    pub errors: ErrorReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Study {
    pub entries: Vec<StudyEntry>,
    /// Present when at least three datasets could be compared.
    pub correlation: Option<CorrelationReport>,
}

/// Evaluates the quality of every mesh, then solves `problem` on them.
/// No solve starts before all indicators are known.
pub fn run_study(datasets: &[Dataset], problem: &Problem) -> Study {
    let start = Instant::now();
    let quality: Vec<QualitySeries> = datasets
        .par_iter()
        .map(|d| {
            let reports: Vec<_> = d.meshes().map(mesh_quality).collect();
            QualitySeries::from_reports(&reports)
        })
        .collect();
    info!("quality of {} datasets done at {:.3}s", datasets.len(), start.elapsed().as_secs_f64());
    info!("solves start at {:.3}s", start.elapsed().as_secs_f64());
    let errors: Vec<ErrorReport> = datasets.par_iter().map(|d| run_convergence(d, problem)).collect();
    info!("solves done at {:.3}s", start.elapsed().as_secs_f64());

    let labels: Vec<String> = datasets.iter().map(|d| d.label.to_string()).collect();
    let correlation = if datasets.len() >= 3 {
        match correlate(&labels, &quality, &errors) {
            Ok(c) => Some(c),
            Err(e) => {
                info!("no correlation: {e}");
                None
            }
        }
    } else {
        None
    };
    let entries = labels
        .into_iter()
        .zip(quality)
        .zip(errors)
        .map(|((dataset, quality), errors)| StudyEntry { dataset, quality, errors })
        .collect();
    Study { entries, correlation }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per dataset and level; rates are empty at level 0 and on failed
/// levels.
pub fn study_csv(study: &Study) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for e in &study.entries {
        for l in &e.errors.levels {
            let rho = e.quality.rho.get(l.level).copied();
            let (l2, h1, li) = match l.errors {
                Some(r) => (Some(r.err_l2), Some(r.err_h1), Some(r.err_linf)),
                None => (None, None, None),
            };
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{}",
                e.dataset,
                l.level,
                l.h,
                l.dofs,
                opt(rho),
                opt(l2),
                opt(h1),
                opt(li),
                opt(l.rate_l2),
                opt(l.rate_h1)
            );
        }
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

/// Writes the table (`report.csv` or `report.json`), `errors.svg` and
/// `quality.svg` into `dir`.
pub fn write_report(study: &Study, dir: &Path, format: ReportFormat) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir)?;
    match format {
        ReportFormat::Csv => std::fs::write(dir.join("report.csv"), study_csv(study))?,
        ReportFormat::Json => std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(study)?)?,
    }
    std::fs::write(dir.join("errors.svg"), errors_svg(study))?;
    std::fs::write(dir.join("quality.svg"), quality_svg(study))?;
    Ok(())
}

const W: f64 = 720.0;
const H: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

/// Maps data to the plot area; `log` axes work on log10 values.
struct Frame {
    x: (f64, f64),
    y: (f64, f64),
    log_x: bool,
    log_y: bool,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        let x = if self.log_x { x.log10() } else { x };
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        let y = if self.log_y { y.log10() } else { y };
        H - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (H - TOP - BOTTOM)
    }
}

fn padded_range(values: impl Iterator<Item = f64>, log: bool) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| v.is_finite() && (!log || *v > 0.0)) {
        let v = if log { v.log10() } else { v };
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if log {
        (lo.floor(), hi.ceil().max(lo.floor() + 1.0))
    } else {
        let pad = ((hi - lo) * 0.1).max(0.05);
        (lo - pad, hi + pad)
    }
}

fn svg_open(title: &str, xlabel: &str, ylabel: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{title}</text>"#, (LEFT + W - RIGHT) / 2.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{xlabel}</text>"#, (LEFT + W - RIGHT) / 2.0, H - 12.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{y}" text-anchor="middle" transform="rotate(-90 16 {y})">{ylabel}</text>"#,
        y = (TOP + H - BOTTOM) / 2.0
    );
    s
}

fn axes(s: &mut String, f: &Frame) {
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    let _ = writeln!(s, r#"<rect x="{x0}" y="{y0}" width="{}" height="{}" fill="none" stroke="black"/>"#, x1 - x0, y1 - y0);
    let ticks = |lo: f64, hi: f64, log: bool| -> Vec<f64> {
        if log {
            (lo as i32..=hi as i32).map(|k| 10f64.powi(k)).collect()
        } else {
            let step = ((hi - lo) / 5.0 * 10.0).ceil() / 10.0;
            let first = (lo / step).ceil() as i64;
            (first..).map(|k| k as f64 * step).take_while(|v| *v <= hi + 1e-12).collect()
        }
    };
    let label = |v: f64, log: bool| if log { format!("1e{}", v.log10().round()) } else { format!("{v:.1}") };
    for v in ticks(f.x.0, f.x.1, f.log_x) {
        let x = f.px(v);
        let _ = writeln!(s, r##"<line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{y1}" stroke="#ddd"/>"##);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, y1 + 16.0, label(v, f.log_x));
    }
    for v in ticks(f.y.0, f.y.1, f.log_y) {
        let y = f.py(v);
        let _ = writeln!(s, r##"<line x1="{x0}" y1="{y:.2}" x2="{x1}" y2="{y:.2}" stroke="#ddd"/>"##);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, x0 - 6.0, y + 4.0, label(v, f.log_y));
    }
}

fn polyline(s: &mut String, f: &Frame, pts: &[(f64, f64)], color: &str, dash: &str) {
    if pts.is_empty() {
        return;
    }
    let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(y))).collect();
    let _ = writeln!(
        s,
        r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5" stroke-dasharray="{dash}"/>"#,
        coords.join(" ")
    );
    for &(x, y) in pts {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, f.px(x), f.py(y));
    }
}

fn legend(s: &mut String, row: usize, text: &str, color: &str, dash: &str) {
    let x = W - RIGHT + 12.0;
    let y = TOP + 10.0 + 16.0 * row as f64;
    let _ = writeln!(
        s,
        r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="1.5" stroke-dasharray="{dash}"/>"#,
        x + 24.0
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}">{text}</text>"#, x + 30.0, y + 4.0);
}

/// Slope triangle under the segment ending at `(x, y)`, for a law
/// `e ~ N^slope`.
fn slope_triangle(s: &mut String, f: &Frame, x: f64, y: f64, slope: f64, text: &str) {
    let xa = x / 4.0;
    let ya = y * 0.5 / 4f64.powf(slope);
    let (xb, yb) = (x, y * 0.5);
    let pts = [(f.px(xa), f.py(ya)), (f.px(xb), f.py(yb)), (f.px(xb), f.py(ya))];
    let _ = writeln!(
        s,
        r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="none" stroke="black"/>"#,
        pts[0].0, pts[0].1, pts[1].0, pts[1].1, pts[2].0, pts[2].1
    );
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{text}</text>"#, pts[2].0 + 4.0, (pts[1].1 + pts[2].1) / 2.0 + 4.0);
}

/// Relative errors against the vertex count, log-log.
pub fn errors_svg(study: &Study) -> String {
    let rows: Vec<(usize, &str, f64, f64, f64, f64)> = study
        .entries
        .iter()
        .enumerate()
        .flat_map(|(i, e)| {
            e.errors.levels.iter().filter_map(move |l| {
                l.errors.map(|r| (i, e.dataset.as_str(), l.dofs as f64, r.err_l2, r.err_h1, r.err_linf))
            })
        })
        .collect();
    let frame = Frame {
        x: padded_range(rows.iter().map(|r| r.2), true),
        y: padded_range(rows.iter().flat_map(|r| [r.3, r.4, r.5]), true),
        log_x: true,
        log_y: true,
    };
    let mut s = svg_open("Relative errors", "vertices", "relative error");
    axes(&mut s, &frame);
    let norms = [("L2", ""), ("H1", "6 3"), ("Linf", "2 3")];
    let mut row = 0;
    for (i, e) in study.entries.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        for (k, (name, dash)) in norms.iter().enumerate() {
            let pts: Vec<(f64, f64)> =
                rows.iter().filter(|r| r.0 == i).map(|r| (r.2, [r.3, r.4, r.5][k])).filter(|p| p.1 > 0.0).collect();
            polyline(&mut s, &frame, &pts, color, dash);
            legend(&mut s, row, &format!("{} {name}", e.dataset), color, dash);
            row += 1;
        }
    }
    // Reference slopes of first and second order in h, i.e. N^(-1/3) and
    // N^(-2/3), under the last point of the first series.
    if let Some(last) = rows.iter().rfind(|r| r.0 == 0) {
        if last.4 > 0.0 {
            slope_triangle(&mut s, &frame, last.2, last.4, -1.0 / 3.0, "1/3");
        }
        if last.3 > 0.0 {
            slope_triangle(&mut s, &frame, last.2, last.3, -2.0 / 3.0, "2/3");
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Global indicator against the level.
pub fn quality_svg(study: &Study) -> String {
    let n = study.entries.iter().map(|e| e.quality.rho.len()).max().unwrap_or(1);
    let frame = Frame {
        x: (-0.25, (n.max(2) - 1) as f64 + 0.25),
        y: padded_range(study.entries.iter().flat_map(|e| e.quality.rho.iter().copied()), false),
        log_x: false,
        log_y: false,
    };
    let mut s = svg_open("Quality indicator", "level", "rho");
    axes(&mut s, &frame);
    for (i, e) in study.entries.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<(f64, f64)> = e.quality.rho.iter().enumerate().map(|(l, &r)| (l as f64, r)).collect();
        polyline(&mut s, &frame, &pts, color, "");
        legend(&mut s, i, &e.dataset, color, "");
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::errors::ErrorRow;
    use crate::harness::convergence::LevelErrors;

    fn study() -> Study {
        let levels = (0..3)
            .map(|level| {
                let h = 0.5f64.powi(level as i32);
                LevelErrors {
                    level,
                    h,
                    dofs: 8usize.pow(level as u32 + 1),
                    errors: (level != 1).then_some(ErrorRow { h, dofs: 8, err_l2: h * h, err_h1: h, err_linf: h * h }),
                    failure: (level == 1).then(|| "diverged".to_string()),
                    cg_iterations: 3,
                    rate_l2: (level == 2).then_some(2.0),
                    rate_h1: None,
                }
            })
            .collect();
        let errors = ErrorReport {
            problem: "paper".into(),
            levels,
            rate_l2: Some(2.0),
            rate_h1: Some(1.0),
            dof_rate_l2: None,
            dof_rate_h1: None,
        };
        let quality = QualitySeries { rho: vec![0.8, 0.7, 0.6], slope: Some(-0.1), flags: None };
        Study { entries: vec![StudyEntry { dataset: "tet-uniform".into(), quality, errors }], correlation: None }
    }

    #[test]
    fn csv_layout() {
        let csv = study_csv(&study());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1], "tet-uniform,0,1,8,0.8,1,1,1,,");
        assert_eq!(lines[2], "tet-uniform,1,0.5,64,0.7,,,,,");
        assert!(lines[3].ends_with(",2,"));
        assert!(lines.iter().all(|l| l.split(',').count() == 10));
    }

    #[test]
    fn svgs_are_documents() {
        let st = study();
        for svg in [errors_svg(&st), quality_svg(&st)] {
            assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
            assert!(svg.contains("<polyline"));
            assert!(!svg.contains("NaN") && !svg.replace("Linf", "").contains("inf"));
        }
        assert!(errors_svg(&st).contains("<polygon"));
    }
}
