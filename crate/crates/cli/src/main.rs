use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use landau_cli::bench::bench;
use landau_cli::config::{bench_preset, convergence_preset, RunConfig};
use landau_cli::converge::{converge, parse_grids, DEFAULT_GRIDS};
use landau_cli::error::{CliError, Result};
use landau_cli::run::run;
use landau_core::exec::{with_workers, Execution};
use landau_core::vtk::write_vtk;

#[derive(Parser)]
#[command(
    name = "landau",
    version,
    about = "Multi-species Landau collision solver in axisymmetric velocity space"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Worker threads for assembly; 0 uses the default pool, 1 runs sequentially.
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Relaxation run: writes moments.csv and optional fields_XXXX.vtk.
    Run(Common),
    /// Cartesian grid-refinement study of the thermal flux: writes convergence.csv.
    Converge {
        #[command(flatten)]
        common: Common,
        /// Nested grids, e.g. 8x16,16x32,32x64,64x128.
        #[arg(long, value_name = "NR0xNZ0,...")]
        grids: Option<String>,
    },
    /// Step-cost benchmark and cost-model fit: writes bench.csv.
    Bench {
        #[command(flatten)]
        common: Common,
        /// Species counts to time, e.g. 1,2,3.
        #[arg(long, value_name = "S", value_delimiter = ',')]
        species: Option<Vec<usize>>,
    },
    /// Writes the configured mesh as mesh.vtk and prints its statistics.
    MeshDump(Common),
}

fn load(common: &Common, fallback: fn() -> RunConfig) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::from_path(path)?,
        None => fallback(),
    };
    if let Some(w) = common.workers {
        cfg.workers = w;
    }
    Ok(cfg)
}

fn policy(cfg: &RunConfig) -> Execution {
    if cfg.workers == 1 {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn mesh_dump(cfg: &RunConfig, out: &Path) -> Result<()> {
    let mesh = cfg.build_mesh()?;
    landau_cli::output::ensure_dir(out)?;
    let path = out.join("mesh.vtk");
    let file = std::fs::File::create(&path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    write_vtk(std::io::BufWriter::new(file), &mesh, None, "landau mesh").map_err(|e| CliError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    println!("{}", mesh.stats());
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(common) => {
            let cfg = load(&common, convergence_preset)?;
            let summary = with_workers(cfg.workers, || run(&cfg, Some(&common.out), policy(&cfg)))?;
            let last = summary.rows.last().expect("initial row");
            println!(
                "{} steps on {} cells; t = {}; max drift: mass {:.3e}, momentum {:.3e}, energy {:.3e}",
                summary.rows.len() - 1,
                summary.mesh_cells,
                last.t,
                summary.max_mass_drift(),
                summary.max_momentum_drift(),
                summary.max_energy_drift()
            );
        }
        Command::Converge { common, grids } => {
            let cfg = load(&common, convergence_preset)?;
            let grids = match grids {
                Some(g) => parse_grids(&g)?,
                None => DEFAULT_GRIDS.to_vec(),
            };
            let report = with_workers(cfg.workers, || converge(&cfg, &grids, Some(&common.out), policy(&cfg)))?;
            for (k, p) in report.analysis.pairwise.iter().enumerate() {
                let g = report.grids[k + 1];
                println!("order around {}x{}: {p:.3}", g.0, g.1);
            }
            println!("aggregate order: {:.3}", report.analysis.aggregate);
        }
        Command::Bench { common, species } => {
            let cfg = load(&common, bench_preset)?;
            let counts = species.unwrap_or_else(|| cfg.bench.species.clone());
            let report = with_workers(cfg.workers, || bench(&cfg, &counts, Some(&common.out), policy(&cfg)))?;
            println!("{} cells, N = {}", report.cells, report.points);
            for s in &report.samples {
                println!(
                    "S={}: step {:.4}s, kernel {:.4}s, {:.2} Gflop/s (model), timers cover {:.1}%",
                    s.species,
                    s.wall.as_secs_f64(),
                    s.timings.assembly.kernel.as_secs_f64(),
                    s.kernel_gflops(),
                    100.0 * s.timer_coverage()
                );
            }
            let f = report.fit;
            println!("fit: a={:.4e} b={:.4e} c={:.4e}", f.a, f.b, f.c);
            println!("min S0 share: {:.1}%", 100.0 * report.min_s0_share());
            println!("N^2 scaling ratio: {:.3}", report.scaling.normalized_ratio());
        }
        Command::MeshDump(common) => {
            let cfg = load(&common, bench_preset)?;
            mesh_dump(&cfg, &common.out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
