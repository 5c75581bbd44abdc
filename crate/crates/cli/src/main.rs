use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use polyvem::harness::{compute_errors, problem_by_name, run_study, write_report, ReportFormat};
use polyvem::mesh::{read_mesh, write_pmesh_with_data, write_vtk, MeshFormat, PointData, VtkField};
use polyvem::meshing::{build_dataset, Dataset, DatasetLabel};
use polyvem::quality::{mesh_quality, QualityReport};
use polyvem::vem::{assemble, solve};

/// Polyhedral mesh datasets, their quality indicator and VEM convergence
/// studies on the unit cube.
#[derive(Debug, Parser)]
#[command(name = "polyvem", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a refinement dataset and write it as a directory.
    Generate {
        #[command(flatten)]
        dataset: DatasetArgs,
        /// Output directory (`<out>/level<n>.pmesh` and `metadata.json`).
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate the quality indicator of a mesh or of a dataset directory.
    Quality {
        #[arg(long, conflicts_with = "dataset", required_unless_present = "dataset")]
        mesh: Option<PathBuf>,
        /// Dataset directory; prints the per-level indicator and the
        /// assumption flags.
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve a model problem on one mesh and print its relative errors.
    Solve {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long, default_value = "paper")]
        problem: String,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Solution output, `.pmesh` (with a POINT_DATA block) or `.vtk`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Quality, convergence and correlation report for one or more
    /// datasets (directories or labels).
    Report {
        #[arg(long = "dataset", required = true)]
        datasets: Vec<String>,
        /// Levels to build for datasets given by label.
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "paper")]
        problem: String,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Output directory; defaults to the first dataset directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct DatasetArgs {
    /// Dataset label such as `tet-uniform` or `voro-bcl`.
    #[arg(long)]
    dataset: DatasetLabel,
    #[arg(long, default_value_t = 3)]
    levels: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = configure_threads().and_then(|_| run(cli)) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("POLYVEM_THREADS") {
        let n: usize = v.parse().with_context(|| format!("POLYVEM_THREADS={v:?} is not a thread count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn quality_csv(report: &QualityReport) -> String {
    let mut s = String::from("id,rho1,rho2,rho3\n");
    for e in &report.per_element {
        s.push_str(&format!("{},{},{},{}\n", e.id, e.rho1, e.rho2, e.rho3));
    }
    s
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { dataset, out } => {
            let d = build_dataset(dataset.dataset, dataset.levels, dataset.seed)?;
            d.write(&out, dataset.seed)?;
            for (m, meta) in &d.levels {
                info!("level {}: t = {}, {} vertices, {} cells", meta.level, meta.t, m.num_vertices(), m.num_cells());
            }
        }
        Command::Quality { mesh, dataset, format, out } => {
            if let Some(path) = mesh {
                let m = read_mesh(&path).with_context(|| format!("reading {}", path.display()))?;
                let r = mesh_quality(&m);
                let text = match format {
                    Format::Json => serde_json::to_string_pretty(&r)? + "\n",
                    Format::Csv => quality_csv(&r),
                };
                emit(&text, out.as_deref())?;
            } else if let Some(dir) = dataset {
                let (d, _) = Dataset::read(&dir)?;
                let series = polyvem::harness::quality_series(&d);
                let text = match format {
                    Format::Json => serde_json::to_string_pretty(&series)? + "\n",
                    Format::Csv => {
                        let mut s = String::from("level,rho\n");
                        for (l, r) in series.rho.iter().enumerate() {
                            s.push_str(&format!("{l},{r}\n"));
                        }
                        s
                    }
                };
                emit(&text, out.as_deref())?;
            }
        }
        Command::Solve { mesh, problem, format, out } => {
            let pb = problem_by_name(&problem).with_context(|| format!("unknown problem {problem:?}"))?;
            let m = read_mesh(&mesh).with_context(|| format!("reading {}", mesh.display()))?;
            let system = assemble(&m, &pb.f, &|x| pb.g(x))?;
            let sol = solve(&system)?;
            info!("CG: {} iterations, residual {:e}", sol.iterations, sol.residual);
            let row = compute_errors(&m, &sol, &pb)?;
            let text = match format {
                Format::Json => serde_json::to_string_pretty(&row)? + "\n",
                Format::Csv => format!(
                    "h,dofs,err_l2,err_h1,err_linf\n{},{},{},{},{}\n",
                    row.h, row.dofs, row.err_l2, row.err_h1, row.err_linf
                ),
            };
            print!("{text}");
            if let Some(path) = out {
                match MeshFormat::from_path(&path)? {
                    MeshFormat::Pmesh => {
                        let data = PointData { name: "u_h".into(), values: sol.values.clone() };
                        write_pmesh_with_data(&m, Some(&data), &path)?
                    }
                    MeshFormat::Vtk => write_vtk(&m, &[VtkField::Point("u_h", &sol.values)], &path)?,
                }
            }
        }
        Command::Report { datasets, levels, seed, problem, format, out } => {
            let pb = problem_by_name(&problem).with_context(|| format!("unknown problem {problem:?}"))?;
            let mut loaded = Vec::new();
            let mut first_dir = None;
            for arg in &datasets {
                let path = Path::new(arg);
                if path.is_dir() {
                    first_dir.get_or_insert_with(|| path.to_path_buf());
                    loaded.push(Dataset::read(path)?.0);
                } else {
                    let label: DatasetLabel = match arg.parse() {
                        Ok(l) => l,
                        Err(_) => bail!("{arg:?} is neither a dataset directory nor a dataset label"),
                    };
                    loaded.push(build_dataset(label, levels, seed)?);
                }
            }
            let Some(out) = out.or(first_dir) else {
                bail!("--out is required when no dataset directory is given");
            };
            let study = run_study(&loaded, &pb);
            let format = match format {
                Format::Csv => ReportFormat::Csv,
                Format::Json => ReportFormat::Json,
            };
            write_report(&study, &out, format)?;
            if let Some(c) = &study.correlation {
                std::fs::write(out.join("correlation.json"), serde_json::to_string_pretty(c)? + "\n")?;
                info!("Spearman correlation of rho and H1 error: {}", c.spearman);
            }
        }
    }
    Ok(())
}
