//! Cartesian grid-refinement study of the total thermal flux.
//!
//! Every grid is run with the same `dt` so the histories are compared at
//! identical times. With `d_k(t) = |q_k(t) − q_{k+1}(t)|` between grids `k`
//! and `k+1`, the observed order at `t` is `p_k(t) = log2(d_k(t) / d_{k+1}(t))`.
//! The pairwise order `P_k = log2(‖d_k‖₂ / ‖d_{k+1}‖₂)` uses the samples with
//! `t > 0`, and the aggregate order is the mean of the `P_k`.

use std::path::Path;

use landau_core::exec::Execution;
use landau_core::fem::build_reference_element;
use landau_core::physics::{collision_params, maxwellian_init, moments};
use landau_core::solver::Integrator;

use crate::config::{MeshConfig, RunConfig};
use crate::error::{CliError, Result};
use crate::output::{ensure_dir, num, CsvOutput};

pub const DEFAULT_GRIDS: [(usize, usize); 4] = [(8, 16), (16, 32), (32, 64), (64, 128)];

/// Parses `"8x16,16x32,32x64"`.
pub fn parse_grids(text: &str) -> Result<Vec<(usize, usize)>> {
    text.split(',')
        .map(|g| {
            let g = g.trim();
            let (a, b) = g
                .split_once(['x', 'X'])
                .ok_or_else(|| CliError::InvalidArgument(format!("grid {g:?} is not of the form NRxNZ")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<usize>()
                    .ok()
                    .filter(|&n| n > 0)
                    .ok_or_else(|| CliError::InvalidArgument(format!("grid {g:?} has an invalid size")))
            };
            Ok((parse(a)?, parse(b)?))
        })
        .collect()
}

/// At least three grids, each twice as fine as the previous one in both directions.
pub fn check_grids(grids: &[(usize, usize)]) -> Result<()> {
    if grids.len() < 3 {
        return Err(CliError::InvalidArgument(format!(
            "a convergence study needs at least 3 grids, got {}",
            grids.len()
        )));
    }
    for w in grids.windows(2) {
        if w[1].0 != 2 * w[0].0 || w[1].1 != 2 * w[0].1 {
            return Err(CliError::InvalidArgument(format!(
                "grids {}x{} and {}x{} are not nested by a factor of 2",
                w[0].0, w[0].1, w[1].0, w[1].1
            )));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceAnalysis {
    pub times: Vec<f64>,
    /// `differences[k][t]` between grids `k` and `k+1`.
    pub differences: Vec<Vec<f64>>,
    /// `orders[k][t]` from differences `k` and `k+1`; NaN where undefined.
    pub orders: Vec<Vec<f64>>,
    /// `P_k` over the samples with `t > 0`.
    pub pairwise: Vec<f64>,
    pub aggregate: f64,
}

/// Orders from flux histories `fluxes[grid][sample]` on successively halved grids.
pub fn observed_orders(times: &[f64], fluxes: &[Vec<f64>]) -> Result<ConvergenceAnalysis> {
    if fluxes.len() < 3 {
        return Err(CliError::InvalidArgument(format!(
            "observed orders need at least 3 grids, got {}",
            fluxes.len()
        )));
    }
    if fluxes.iter().any(|f| f.len() != times.len()) {
        return Err(CliError::InvalidArgument(
            "flux histories have different lengths".into(),
        ));
    }
    let differences: Vec<Vec<f64>> = fluxes
        .windows(2)
        .map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).abs()).collect())
        .collect();
    let orders = differences
        .windows(2)
        .map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (a / b).log2()).collect())
        .collect();
    let norm = |d: &[f64]| -> f64 {
        d.iter()
            .zip(times)
            .filter(|(_, &t)| t > 0.0)
            .map(|(v, _)| v * v)
            .sum::<f64>()
            .sqrt()
    };
    let pairwise: Vec<f64> = differences
        .windows(2)
        .map(|w| (norm(&w[0]) / norm(&w[1])).log2())
        .collect();
    let aggregate = pairwise.iter().sum::<f64>() / pairwise.len() as f64;
    Ok(ConvergenceAnalysis {
        times: times.to_vec(),
        differences,
        orders,
        pairwise,
        aggregate,
    })
}

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub grids: Vec<(usize, usize)>,
    /// `fluxes[grid][sample]`: total thermal flux `Σ_α q_z,α`.
    pub fluxes: Vec<Vec<f64>>,
    pub analysis: ConvergenceAnalysis,
}

/// Total thermal flux history of `cfg` on one Cartesian grid.
pub fn flux_history(cfg: &RunConfig, nr: usize, nz: usize, exec: Execution) -> Result<(Vec<f64>, Vec<f64>)> {
    let cfg = RunConfig {
        mesh: MeshConfig::Cartesian { nr, nz },
        ..cfg.clone()
    };
    cfg.validate()?;
    let species = cfg.core_species()?;
    let mesh = cfg.build_mesh()?;
    let reference = build_reference_element();
    let params = collision_params(&species, cfg.coulomb_log, 1.0, 1.0)?;
    let f0 = maxwellian_init(&mesh, &reference, &species, cfg.theta_policy())?;
    let mut integ = Integrator::new(&mesh, params, exec);
    let (mut times, mut flux) = (Vec::new(), Vec::new());
    let mut last_step = 0;
    integ
        .advance(f0, cfg.t_end, &cfg.step_config(), |rep, f| {
            last_step = rep.step;
            let m = moments(&mesh, &reference, f, &species)?;
            times.push(rep.t);
            flux.push(m.heat_flux_z.iter().sum());
            Ok(())
        })
        .map_err(|source| CliError::Solver {
            step: last_step + 1,
            source,
        })?;
    Ok((times, flux))
}

/// Runs every grid, analyses the histories and writes `convergence.csv`
/// into `out_dir` if one is given.
pub fn converge(
    cfg: &RunConfig,
    grids: &[(usize, usize)],
    out_dir: Option<&Path>,
    exec: Execution,
) -> Result<ConvergenceReport> {
    check_grids(grids)?;
    cfg.validate()?;
    let mut times = Vec::new();
    let mut fluxes = Vec::new();
    for &(nr, nz) in grids {
        let (t, q) = flux_history(cfg, nr, nz, exec)?;
        times = t;
        fluxes.push(q);
    }
    let analysis = observed_orders(&times, &fluxes)?;
    let report = ConvergenceReport {
        grids: grids.to_vec(),
        fluxes,
        analysis,
    };
    if let Some(dir) = out_dir {
        ensure_dir(dir)?;
        write_report(cfg, &report, &dir.join("convergence.csv"))?;
    }
    Ok(report)
}

fn write_report(cfg: &RunConfig, report: &ConvergenceReport, path: &Path) -> Result<()> {
    let a = &report.analysis;
    let label = |g: &(usize, usize)| format!("{}x{}", g.0, g.1);
    let mut header = vec!["t".to_string()];
    header.extend(report.grids.iter().map(|g| format!("q_{}", label(g))));
    for w in report.grids.windows(2) {
        header.push(format!("d_{}_{}", label(&w[0]), label(&w[1])));
    }
    for w in report.grids.windows(3) {
        header.push(format!("p_{}", label(&w[1])));
    }
    let comments = vec![
        "landau converge".to_string(),
        format!("config: {}", cfg.to_json()),
        format!(
            "pairwise_orders: {}",
            a.pairwise
                .iter()
                .map(|p| format!("{p:.4}"))
                .collect::<Vec<_>>()
                .join(" ")
        ),
        format!("aggregate_order: {:.4}", a.aggregate),
    ];
    let mut csv = CsvOutput::create(path, &comments, &header)?;
    for (k, t) in a.times.iter().enumerate() {
        let mut row = vec![num(*t)];
        row.extend(report.fluxes.iter().map(|q| num(q[k])));
        row.extend(a.differences.iter().map(|d| num(d[k])));
        row.extend(a.orders.iter().map(|p| num(p[k])));
        csv.row(row)?;
    }
    csv.finish()
}
