//! Relaxation run: time series of moments, drifts and entropy.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use landau_core::exec::Execution;
use landau_core::fem::{build_reference_element, StateVector};
use landau_core::physics::{collision_params, entropy, maxwellian_init, moments, MomentSet};
use landau_core::solver::{Integrator, StepReport};
use landau_core::vtk::write_vtk;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::output::{ensure_dir, num, CsvOutput};

/// One row of `moments.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentRow {
    pub step: usize,
    pub t: f64,
    pub newton_iterations: usize,
    pub residual: f64,
    pub converged: bool,
    pub moments: MomentSet,
    /// Largest per-species `|n − n₀| / n₀`.
    pub mass_drift: f64,
    /// `|P − P₀|` over the thermal momentum scale `Σ_α sqrt(2 m_α n_α E_α)` at t = 0.
    pub momentum_drift: f64,
    /// `|E − E₀| / E₀`.
    pub energy_drift: f64,
    pub entropy: f64,
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub rows: Vec<MomentRow>,
    pub final_state: StateVector,
    pub mesh_cells: usize,
    pub dofs: usize,
}

impl RunSummary {
    pub fn max_mass_drift(&self) -> f64 {
        self.rows.iter().map(|r| r.mass_drift).fold(0.0, f64::max)
    }

    pub fn max_momentum_drift(&self) -> f64 {
        self.rows.iter().map(|r| r.momentum_drift).fold(0.0, f64::max)
    }

    pub fn max_energy_drift(&self) -> f64 {
        self.rows.iter().map(|r| r.energy_drift).fold(0.0, f64::max)
    }
}

/// Column names of `moments.csv` for the given species names.
pub fn moment_columns(names: &[String]) -> Vec<String> {
    let mut cols: Vec<String> = ["step", "t", "newton_iterations", "residual", "converged"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for n in names {
        for q in ["n", "pz", "E", "qz"] {
            cols.push(format!("{q}_{n}"));
        }
    }
    for c in [
        "total_pz",
        "total_E",
        "mass_drift",
        "momentum_drift",
        "energy_drift",
        "entropy",
    ] {
        cols.push(c.to_string());
    }
    cols
}

fn row_fields(r: &MomentRow) -> Vec<String> {
    let m = &r.moments;
    let mut out = vec![
        r.step.to_string(),
        num(r.t),
        r.newton_iterations.to_string(),
        num(r.residual),
        r.converged.to_string(),
    ];
    for a in 0..m.density.len() {
        out.extend([m.density[a], m.momentum_z[a], m.energy[a], m.heat_flux_z[a]].map(num));
    }
    out.extend(
        [
            m.total_momentum_z(),
            m.total_energy(),
            r.mass_drift,
            r.momentum_drift,
            r.energy_drift,
            r.entropy,
        ]
        .map(num),
    );
    out
}

/// Runs the configured relaxation, writing `moments.csv` (and VTK snapshots
/// when enabled) into `out_dir` if one is given.
pub fn run(cfg: &RunConfig, out_dir: Option<&Path>, exec: Execution) -> Result<RunSummary> {
    cfg.validate()?;
    let species = cfg.core_species()?;
    let names = cfg.species_names();
    let mesh = cfg.build_mesh()?;
    let reference = build_reference_element();
    let params = collision_params(&species, cfg.coulomb_log, 1.0, 1.0)?;
    let f0 = maxwellian_init(&mesh, &reference, &species, cfg.theta_policy())?;

    let mut csv = match out_dir {
        Some(dir) => {
            ensure_dir(dir)?;
            let comments = [
                "landau run".to_string(),
                format!("config: {}", cfg.to_json()),
                format!("mesh: {} cells, {} dofs", mesh.num_cells(), mesh.num_dofs()),
            ];
            Some(CsvOutput::create(
                &dir.join("moments.csv"),
                &comments,
                &moment_columns(&names),
            )?)
        }
        None => None,
    };

    let m0 = moments(&mesh, &reference, &f0, &species)?;
    let p_scale: f64 = (0..species.len())
        .map(|a| (2.0 * species[a].mass * m0.density[a] * m0.energy[a]).sqrt())
        .sum();
    let mut rows = Vec::new();
    let mut last_step = 0;
    let mut output_failure: Option<CliError> = None;
    let mut integ = Integrator::new(&mesh, params, exec);
    let advanced = {
        let mut on_step = |rep: &StepReport, f: &StateVector| -> landau_core::Result<()> {
            last_step = rep.step;
            let m = moments(&mesh, &reference, f, &species)?;
            let mass_drift = m
                .density
                .iter()
                .zip(&m0.density)
                .map(|(n, n0)| ((n - n0) / n0).abs())
                .fold(0.0, f64::max);
            let row = MomentRow {
                step: rep.step,
                t: rep.t,
                newton_iterations: rep.newton_iterations,
                residual: rep.residual,
                converged: rep.converged,
                mass_drift,
                momentum_drift: (m.total_momentum_z() - m0.total_momentum_z()).abs() / p_scale,
                energy_drift: ((m.total_energy() - m0.total_energy()) / m0.total_energy()).abs(),
                entropy: entropy(&mesh, &reference, f)?,
                moments: m,
            };
            let written = write_outputs(cfg, out_dir, csv.as_mut(), &row, &mesh, f, &names);
            rows.push(row);
            written.map_err(|e| {
                output_failure = Some(e);
                landau_core::Error::InvalidArgument("output failed".into())
            })
        };
        integ.advance(f0, cfg.t_end, &cfg.step_config(), &mut on_step)
    };
    if let Some(e) = output_failure {
        return Err(e);
    }
    let final_state = advanced.map_err(|source| CliError::Solver {
        step: last_step + 1,
        source,
    })?;
    if let Some(w) = csv {
        w.finish()?;
    }
    Ok(RunSummary {
        rows,
        final_state,
        mesh_cells: mesh.num_cells(),
        dofs: mesh.num_dofs(),
    })
}

fn write_outputs(
    cfg: &RunConfig,
    out_dir: Option<&Path>,
    csv: Option<&mut CsvOutput>,
    row: &MomentRow,
    mesh: &landau_core::mesh::VelocityMesh,
    f: &StateVector,
    names: &[String],
) -> Result<()> {
    if let Some(w) = csv {
        w.row(row_fields(row))?;
    }
    let Some(dir) = out_dir else { return Ok(()) };
    if cfg.output.vtk_every > 0 && row.step.is_multiple_of(cfg.output.vtk_every) {
        let path = dir.join(format!("fields_{:04}.vtk", row.step));
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        write_vtk(
            BufWriter::new(file),
            mesh,
            Some((f, names)),
            &format!("landau t={}", row.t),
        )
        .map_err(|e| CliError::io(&path, e))?;
    }
    Ok(())
}
