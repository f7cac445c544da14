//! Step-cost benchmark and the `time(S) = a + bS + cS²` cost model.
//!
//! The measured unit is one time step with a single Newton iteration from a
//! cold start: two operator assemblies and one solve per species.

use std::path::Path;
use std::time::{Duration, Instant};

use landau_core::exec::Execution;
use landau_core::fem::{build_reference_element, sample_state, NQ};
use landau_core::kernel::{flop_count, transform_flops};
use landau_core::mesh::{DomainSpec, VelocityMesh};
use landau_core::physics::{collision_params, maxwellian_init, Species};
use landau_core::solver::{Integrator, StepConfig, StepTimings};

use crate::config::{bench_species, RunConfig};
use crate::error::{CliError, Result};
use crate::output::{ensure_dir, num, CsvOutput};

/// Cartesian grids for the `N²` scaling check: the second has twice the
/// quadrature points of the first.
pub const SCALING_GRIDS: [(usize, usize); 2] = [(11, 16), (22, 16)];

/// `time(S) = a + b S + c S²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostModelFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl CostModelFit {
    /// Least-squares fit through `(S, time)` samples; exact for three
    /// distinct `S`.
    pub fn fit(samples: &[(f64, f64)]) -> Result<Self> {
        let mut distinct: Vec<f64> = samples.iter().map(|s| s.0).collect();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        if distinct.len() < 3 {
            return Err(CliError::InvalidArgument(format!(
                "cost model needs at least 3 distinct species counts, got {}",
                distinct.len()
            )));
        }
        let mut ata = [[0.0; 3]; 3];
        let mut atb = [0.0; 3];
        for &(s, t) in samples {
            let row = [1.0, s, s * s];
            for i in 0..3 {
                for j in 0..3 {
                    ata[i][j] += row[i] * row[j];
                }
                atb[i] += row[i] * t;
            }
        }
        let [a, b, c] =
            solve3(ata, atb).ok_or_else(|| CliError::InvalidArgument("cost model system is singular".into()))?;
        Ok(Self { a, b, c })
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.a + self.b * s + self.c * s * s
    }

    /// Fractions of `time(S)` in the `S⁰`, `S¹` and `S²` terms.
    pub fn shares(&self, s: f64) -> [f64; 3] {
        let t = self.eval(s);
        if t == 0.0 {
            return [0.0; 3];
        }
        [self.a / t, self.b * s / t, self.c * s * s / t]
    }
}

/// Gaussian elimination with partial pivoting.
fn solve3(mut m: [[f64; 3]; 3], mut r: [f64; 3]) -> Option<[f64; 3]> {
    for k in 0..3 {
        let p = (k..3).max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))?;
        if m[p][k] == 0.0 {
            return None;
        }
        m.swap(k, p);
        r.swap(k, p);
        for i in k + 1..3 {
            let f = m[i][k] / m[k][k];
            for j in k..3 {
                m[i][j] -= f * m[k][j];
            }
            r[i] -= f * r[k];
        }
    }
    let mut x = [0.0; 3];
    for k in (0..3).rev() {
        let s: f64 = (k + 1..3).map(|j| m[k][j] * x[j]).sum();
        x[k] = (r[k] - s) / m[k][k];
    }
    Some(x)
}

/// Timings of the fastest repetition of one benchmark step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepSample {
    pub species: usize,
    pub wall: Duration,
    pub timings: StepTimings,
    pub assemblies: usize,
    /// Model flops of the kernel over the step.
    pub kernel_flops: u64,
    /// Model flops of the transforms and element updates over the step.
    pub transform_flops: u64,
}

impl StepSample {
    /// Fraction of the wall time covered by the component timers.
    pub fn timer_coverage(&self) -> f64 {
        self.timings.total().as_secs_f64() / self.wall.as_secs_f64()
    }

    /// Model kernel flop rate in Gflop/s.
    pub fn kernel_gflops(&self) -> f64 {
        self.kernel_flops as f64 / self.timings.assembly.kernel.as_secs_f64() / 1e9
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingCheck {
    pub points: [usize; 2],
    pub kernel: [Duration; 2],
}

impl ScalingCheck {
    /// `t₂/t₁` normalized by `(N₂/N₁)²`; 1 for exact quadratic scaling.
    pub fn normalized_ratio(&self) -> f64 {
        let tr = self.kernel[1].as_secs_f64() / self.kernel[0].as_secs_f64();
        let nr = self.points[1] as f64 / self.points[0] as f64;
        tr / (nr * nr)
    }
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub cells: usize,
    pub points: usize,
    pub dofs: usize,
    pub samples: Vec<StepSample>,
    pub fit: CostModelFit,
    pub scaling: ScalingCheck,
}

impl BenchReport {
    /// Smallest `S⁰` share of the fitted step time over the measured `S`.
    pub fn min_s0_share(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| self.fit.shares(s.species as f64)[0])
            .fold(f64::INFINITY, f64::min)
    }
}

fn to_core(cfg: &RunConfig, s: usize) -> Result<Vec<Species>> {
    let c = RunConfig {
        species: bench_species(s),
        ..cfg.clone()
    };
    Ok(c.core_species()?)
}

/// One cold-start step with a single Newton iteration, best of `reps`.
pub fn time_step(
    mesh: &VelocityMesh,
    species: &[Species],
    cfg: &RunConfig,
    reps: usize,
    exec: Execution,
) -> Result<StepSample> {
    let reference = build_reference_element();
    let params = collision_params(species, cfg.coulomb_log, 1.0, 1.0)?;
    let f0 = maxwellian_init(mesh, &reference, species, cfg.theta_policy())?;
    let step = StepConfig {
        dt: cfg.dt,
        newton_tol: cfg.newton.tol,
        max_newton: 1,
    };
    let mut integ = Integrator::new(mesh, params, exec);
    let mut best: Option<StepSample> = None;
    for _ in 0..reps {
        integ.clear_cache();
        integ.reset_counters();
        let t0 = Instant::now();
        integ
            .step(&f0, &step)
            .map_err(|source| CliError::Solver { step: 1, source })?;
        let wall = t0.elapsed();
        let n = (NQ * mesh.num_cells()) as u64;
        let evals = integ.assemblies() as u64 * n;
        let sample = StepSample {
            species: species.len(),
            wall,
            timings: integ.timings(),
            assemblies: integ.assemblies(),
            kernel_flops: flop_count(n, species.len() as u64, evals),
            transform_flops: transform_flops(species.len() as u64, evals),
        };
        if best.is_none_or(|b| wall < b.wall) {
            best = Some(sample);
        }
    }
    Ok(best.expect("at least one repetition"))
}

/// Kernel time of one assembly on each scaling grid, best of `reps`.
pub fn scaling_check(domain: f64, species: &[Species], reps: usize, exec: Execution) -> Result<ScalingCheck> {
    let reference = build_reference_element();
    let params = collision_params(species, 10.0, 1.0, 1.0)?;
    let mut points = [0; 2];
    let mut kernel = [Duration::MAX; 2];
    for (k, &(nr, nz)) in SCALING_GRIDS.iter().enumerate() {
        let mesh = VelocityMesh::cartesian(DomainSpec::new(domain)?, nr, nz)?;
        let f = maxwellian_init(
            &mesh,
            &reference,
            species,
            landau_core::physics::ThetaPolicy::QuasiNeutral,
        )?;
        let data = sample_state(&mesh, &reference, &f)?;
        points[k] = data.len();
        for _ in 0..reps {
            let (_, t) = landau_core::assembly::assemble_collision_timed(&mesh, &reference, &data, &params, exec)?;
            kernel[k] = kernel[k].min(t.kernel);
        }
    }
    Ok(ScalingCheck { points, kernel })
}

/// Times every species count in `species_counts` on the configured mesh,
/// fits the cost model and checks kernel scaling. Writes `bench.csv` into
/// `out_dir` if one is given.
pub fn bench(
    cfg: &RunConfig,
    species_counts: &[usize],
    out_dir: Option<&Path>,
    exec: Execution,
) -> Result<BenchReport> {
    cfg.validate()?;
    if species_counts.is_empty() || species_counts.contains(&0) {
        return Err(CliError::InvalidArgument("species counts must be at least 1".into()));
    }
    let mesh = cfg.build_mesh()?;
    let reps = cfg.bench.repetitions;
    let mut samples = Vec::new();
    for &s in species_counts {
        samples.push(time_step(&mesh, &to_core(cfg, s)?, cfg, reps, exec)?);
    }
    let fit = CostModelFit::fit(
        &samples
            .iter()
            .map(|s| (s.species as f64, s.wall.as_secs_f64()))
            .collect::<Vec<_>>(),
    )?;
    let scaling = scaling_check(cfg.domain, &to_core(cfg, 1)?, reps, exec)?;
    let report = BenchReport {
        cells: mesh.num_cells(),
        points: NQ * mesh.num_cells(),
        dofs: mesh.num_dofs(),
        samples,
        fit,
        scaling,
    };
    if let Some(dir) = out_dir {
        ensure_dir(dir)?;
        write_report(cfg, &report, &dir.join("bench.csv"))?;
    }
    Ok(report)
}

fn write_report(cfg: &RunConfig, r: &BenchReport, path: &Path) -> Result<()> {
    let f = &r.fit;
    let mut comments = vec![
        "landau bench".to_string(),
        format!("config: {}", cfg.to_json()),
        format!(
            "mesh: {} cells, {} quadrature points, {} dofs",
            r.cells, r.points, r.dofs
        ),
        format!("fit: a={:e} b={:e} c={:e}", f.a, f.b, f.c),
    ];
    for s in &r.samples {
        let sh = f.shares(s.species as f64);
        comments.push(format!(
            "shares at S={}: S0={:.3} S1={:.3} S2={:.3}",
            s.species, sh[0], sh[1], sh[2]
        ));
    }
    comments.push(format!(
        "scaling: N={} kernel={:e}s, N={} kernel={:e}s, normalized ratio {:.3}",
        r.scaling.points[0],
        r.scaling.kernel[0].as_secs_f64(),
        r.scaling.points[1],
        r.scaling.kernel[1].as_secs_f64(),
        r.scaling.normalized_ratio()
    ));
    let header: Vec<String> = [
        "species",
        "assemblies",
        "wall_s",
        "setup_s",
        "kernel_s",
        "transform_s",
        "scatter_s",
        "solve_s",
        "timer_coverage",
        "kernel_model_flops",
        "transform_model_flops",
        "kernel_gflops",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let mut csv = CsvOutput::create(path, &comments, &header)?;
    for s in &r.samples {
        let t = &s.timings;
        csv.row([
            s.species.to_string(),
            s.assemblies.to_string(),
            num(s.wall.as_secs_f64()),
            num(t.setup.as_secs_f64()),
            num(t.assembly.kernel.as_secs_f64()),
            num(t.assembly.transform.as_secs_f64()),
            num(t.assembly.scatter.as_secs_f64()),
            num(t.solve.as_secs_f64()),
            num(s.timer_coverage()),
            s.kernel_flops.to_string(),
            s.transform_flops.to_string(),
            num(s.kernel_gflops()),
        ])?;
    }
    csv.finish()
}
