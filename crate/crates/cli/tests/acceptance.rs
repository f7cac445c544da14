//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Pass criterion numbers as arguments to run a subset.

use std::process::ExitCode;
use std::time::Instant;

use landau_cli::bench::{bench, CostModelFit};
use landau_cli::config::{bench_preset, convergence_preset, realistic_preset, MeshConfig, RunConfig, SpeciesConfig};
use landau_cli::converge::{converge, DEFAULT_GRIDS};
use landau_cli::run::run;
use landau_core::assembly::{assemble_collision, assemble_naive, CollisionMatrix};
use landau_core::exec::Execution;
use landau_core::fem::{build_reference_element, sample_state, StateVector};
use landau_core::kernel::{axisym_tensor_pair, elliptic_ke, landau_tensor_3v};
use landau_core::mesh::{adapt_for_species, DomainSpec, VelocityMesh};
use landau_core::physics::{collision_params, maxwellian_init, Species, ThetaPolicy};
use landau_core::reference::{agm_elliptic_ke, azimuthal_tensor_pair};
use landau_core::solver::{Integrator, StepConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EXEC: Execution = Execution::Parallel;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail }
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn domain() -> DomainSpec {
    DomainSpec::new(2.0).unwrap()
}

fn electron_ion() -> Vec<Species> {
    vec![
        Species::new("e", 1.0, -1.0, 0.2, -0.3).unwrap(),
        Species::new("i", 4.0, 1.0, 0.05, 0.1).unwrap(),
    ]
}

fn random_state(mesh: &VelocityMesh, species: usize, rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> StateVector {
    let values = (0..species)
        .map(|_| (0..mesh.num_dofs()).map(|_| rng.random_range(lo..hi)).collect())
        .collect();
    StateVector::from_species(values).unwrap()
}

fn fused(mesh: &VelocityMesh, f: &StateVector, species: &[Species]) -> CollisionMatrix {
    let re = build_reference_element();
    let p = collision_params(species, 10.0, 1.0, 1.0).unwrap();
    let data = sample_state(mesh, &re, f).unwrap();
    assemble_collision(mesh, &re, &data, &p, EXEC).unwrap()
}

fn convergence_order() -> Outcome {
    let report = converge(&convergence_preset(), &DEFAULT_GRIDS, None, EXEC).unwrap();
    let a = &report.analysis;
    let pairwise: Vec<String> = a.pairwise.iter().map(|p| format!("{p:.2}")).collect();
    Outcome::new(
        a.aggregate >= 3.5,
        format!(
            "thermal-flux order {:.2} (pairwise {}; need >= 3.5)",
            a.aggregate,
            pairwise.join(", ")
        ),
    )
}

fn kernel_oracles() -> Outcome {
    let mut rng = rng(2);
    let mut worst_ke = 0.0_f64;
    for k in 0..1000 {
        let m: f64 = if k % 2 == 0 {
            rng.random()
        } else {
            1.0 - 10f64.powf(-15.0 * rng.random::<f64>())
        };
        let (k1, e1) = elliptic_ke(m).unwrap();
        let (k2, e2) = agm_elliptic_ke(m).unwrap();
        worst_ke = worst_ke.max(((k1 - k2) / k2).abs()).max(((e1 - e2) / e2).abs());
    }
    let mut worst_pair = 0.0_f64;
    let mut n = 0;
    while n < 1000 {
        let p: [f64; 4] = [
            rng.random_range(0.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(0.0..2.0),
            rng.random_range(-2.0..2.0),
        ];
        if (p[0] - p[2]).hypot(p[1] - p[3]) <= 2e-3 {
            continue;
        }
        let a = axisym_tensor_pair(p[0], p[1], p[2], p[3]);
        let o = azimuthal_tensor_pair(p[0], p[1], p[2], p[3]);
        for (x, y) in [(a.uk, o.uk), (a.ud, o.ud)] {
            for i in 0..2 {
                for j in 0..2 {
                    worst_pair = worst_pair.max((x[i][j] - y[i][j]).abs() / y[i][j].abs());
                }
            }
        }
        n += 1;
    }
    Outcome::new(
        worst_ke <= 1e-10 && worst_pair <= 1e-8,
        format!("elliptic vs AGM {worst_ke:.1e} (<= 1e-10), tensor pair vs quadrature {worst_pair:.1e} (<= 1e-8)"),
    )
}

fn assembly_oracle() -> Outcome {
    let re = build_reference_element();
    let sp = electron_ion();
    let mut rng = rng(3);
    let mut worst = 0.0_f64;
    for (nr, nz) in [(2, 2), (4, 4)] {
        let mesh = VelocityMesh::cartesian(domain(), nr, nz).unwrap();
        for s in [1, 2] {
            let p = collision_params(&sp[..s], 10.0, 1.0, 1.0).unwrap();
            for _ in 0..10 {
                let f = random_state(&mesh, s, &mut rng, 0.0, 1.0);
                let a = fused(&mesh, &f, &sp[..s]);
                let b = assemble_naive(&mesh, &re, &f, &p).unwrap();
                let diff = a
                    .blocks
                    .iter()
                    .zip(&b.blocks)
                    .flat_map(|(x, y)| x.values().iter().zip(y.values()).map(|(u, v)| (u - v).abs()))
                    .fold(0.0, f64::max);
                worst = worst.max(diff / b.max_abs());
            }
        }
    }
    Outcome::new(
        worst <= 1e-12,
        format!("fused vs naive, max entry diff / max entry {worst:.1e} (<= 1e-12)"),
    )
}

fn weighted_defect(mesh: &VelocityMesh, cf: &[Vec<f64>], masses: &[f64], u: impl Fn(f64, f64) -> f64) -> f64 {
    let u = mesh.interpolate(u);
    let (mut sum, mut scale) = (0.0, 0.0);
    for (c, m) in cf.iter().zip(masses) {
        for (ui, ci) in u.iter().zip(c) {
            sum += m * ui * ci;
            scale += m * (ui * ci).abs();
        }
    }
    sum.abs() / scale
}

fn conservation() -> Outcome {
    let sp = electron_ion();
    let masses: Vec<f64> = sp.iter().map(|s| s.mass).collect();
    let mut rng = rng(4);
    let mesh = VelocityMesh::cartesian(domain(), 4, 8).unwrap();
    let (mut dm, mut dp, mut de) = (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..10 {
        let f = random_state(&mesh, 2, &mut rng, 0.1, 1.0);
        let cf = fused(&mesh, &f, &sp).apply(&f);
        for c in &cf {
            let scale: f64 = c.iter().map(|v| v.abs()).sum();
            dm = dm.max(c.iter().sum::<f64>().abs() / scale);
        }
        dp = dp.max(weighted_defect(&mesh, &cf, &masses, |_, z| z));
        de = de.max(weighted_defect(&mesh, &cf, &masses, |r, z| r * r + z * z));
    }

    let tmesh = adapt_for_species(domain(), 4, 8, &sp, 2).unwrap();
    let re = build_reference_element();
    let f0 = maxwellian_init(&tmesh, &re, &sp, ThetaPolicy::QuasiNeutral).unwrap();
    let params = collision_params(&sp, 10.0, 1.0, 1.0).unwrap();
    let mut integ = Integrator::new(&tmesh, params, EXEC);
    let cfg = StepConfig {
        dt: 0.1,
        newton_tol: 1e-12,
        max_newton: 40,
    };
    let traj = integ.advance_recording(f0, 1.0, &cfg, &sp).unwrap();
    let m0 = &traj[0].moments;
    let p_scale: f64 = m0.momentum_z.iter().map(|p| p.abs()).sum();
    let (mut tm, mut tp, mut te) = (0.0_f64, 0.0_f64, 0.0_f64);
    for pt in &traj[1..] {
        let m = &pt.moments;
        for s in 0..sp.len() {
            tm = tm.max((m.density[s] - m0.density[s]).abs() / m0.density[s]);
        }
        tp = tp.max((m.total_momentum_z() - m0.total_momentum_z()).abs() / p_scale);
        te = te.max((m.total_energy() - m0.total_energy()).abs() / m0.total_energy());
    }
    let pass = dm <= 1e-11 && dp <= 1e-8 && de <= 1e-8 && tm <= 1e-11 && tp <= 1e-8 && te <= 1e-8 && traj.len() == 11;
    Outcome::new(
        pass,
        format!(
            "identities: mass {dm:.1e}, momentum {dp:.1e}, energy {de:.1e}; \
             {} steps: mass {tm:.1e}, momentum {tp:.1e}, energy {te:.1e}",
            traj.len() - 1
        ),
    )
}

fn tensor_identities() -> Outcome {
    let mut rng = rng(5);
    let (mut null, mut trace, mut homog) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut symmetric = true;
    let mut n = 0;
    while n < 10_000 {
        let v: [f64; 3] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
        let vb: [f64; 3] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
        let d = [v[0] - vb[0], v[1] - vb[1], v[2] - vb[2]];
        let dn = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        if dn < 1e-6 {
            continue;
        }
        let u = landau_tensor_3v(v, vb);
        let norm = u.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
        for row in &u {
            let ud = row[0] * d[0] + row[1] * d[1] + row[2] * d[2];
            null = null.max(ud.abs() / (norm * dn.max(1.0)));
        }
        trace = trace.max((u[0][0] + u[1][1] + u[2][2] - 2.0 / dn).abs() * dn / 2.0);
        symmetric &= (0..3).all(|a| (0..3).all(|b| u[a][b] == u[b][a])) && u == landau_tensor_3v(vb, v);
        let s = rng.random_range(0.25..4.0);
        let us = landau_tensor_3v(v.map(|x| s * x), vb.map(|x| s * x));
        for a in 0..3 {
            for b in 0..3 {
                homog = homog.max((s * us[a][b] - u[a][b]).abs() / norm);
            }
        }
        n += 1;
    }
    Outcome::new(
        null <= 1e-12 && trace <= 1e-12 && homog <= 1e-12 && symmetric,
        format!(
            "null vector {null:.1e}, trace {trace:.1e}, 1/s scaling {homog:.1e} (all <= 1e-12), symmetric {symmetric}"
        ),
    )
}

fn cost_model() -> Outcome {
    let report = bench(&bench_preset(), &[1, 2, 3], None, EXEC).unwrap();
    let samples: Vec<(f64, f64)> = report
        .samples
        .iter()
        .map(|s| (s.species as f64, s.wall.as_secs_f64()))
        .collect();
    let fit = CostModelFit::fit(&samples).unwrap();
    let misfit = samples
        .iter()
        .map(|&(s, t)| (fit.eval(s) - t).abs() / t)
        .fold(0.0, f64::max);
    let shares: Vec<String> = samples
        .iter()
        .map(|&(s, _)| format!("{:.1}%", 100.0 * fit.shares(s)[0]))
        .collect();
    let s0 = fit.shares(2.0)[0];
    let ratio = report.scaling.normalized_ratio();
    Outcome::new(
        misfit <= 1e-9 && s0 > 0.6 && (0.75..=1.25).contains(&ratio),
        format!(
            "{} cells; fit misfit {misfit:.1e}; S0 share at S=2 {:.1}% (> 60%), at S=1,2,3: {}; N^2 ratio {ratio:.3} (1 +- 0.25)",
            report.cells,
            100.0 * s0,
            shares.join(", ")
        ),
    )
}

fn nondecreasing(h: &[f64]) -> bool {
    h.windows(2).all(|w| w[1] >= w[0] - 1e-12 * w[0].abs())
}

fn physics_sanity() -> Outcome {
    let real = run(&realistic_preset(), None, EXEC).unwrap();
    let finite = real.final_state.is_finite();
    let steps = real.rows.len() - 1;
    let all_converged = real.rows.iter().all(|r| r.converged);
    let real_entropy: Vec<f64> = real.rows.iter().map(|r| r.entropy).collect();
    let real_ok = finite
        && steps == 10
        && all_converged
        && real.max_mass_drift() <= 1e-11
        && real.max_momentum_drift() <= 1e-8
        && real.max_energy_drift() <= 1e-8
        && nondecreasing(&real_entropy);

    let species = |name: &str, charge: f64, temperature: f64| SpeciesConfig {
        name: name.into(),
        mass: 1.0,
        charge,
        temperature,
        shift: 0.0,
    };
    let equal = RunConfig {
        mesh: MeshConfig::Adaptive {
            base_nr: 4,
            base_nz: 8,
            levels: 2,
            radii_in_sigma: None,
            min_size_in_sigma: 0.5,
        },
        species: vec![species("a", -1.0, 0.2), species("b", 1.0, 0.05)],
        dt: 0.1,
        t_end: 2.0,
        newton: landau_cli::config::NewtonConfig {
            tol: 1e-12,
            max_iterations: 40,
        },
        ..convergence_preset()
    };
    let eq = run(&equal, None, EXEC).unwrap();
    let gap: Vec<f64> = eq
        .rows
        .iter()
        .map(|r| {
            let m = &r.moments;
            let t: Vec<f64> = (0..2)
                .map(|s| (m.energy[s] - m.momentum_z[s].powi(2) / (2.0 * m.density[s])) / (1.5 * m.density[s]))
                .collect();
            t[0] - t[1]
        })
        .collect();
    // the first step is the transient
    let monotone = gap[1..].windows(2).all(|w| w[1].abs() <= w[0].abs()) && gap.iter().all(|g| *g > 0.0);
    let relaxed = gap[gap.len() - 1] < 0.5 * gap[0];
    let eq_entropy: Vec<f64> = eq.rows.iter().map(|r| r.entropy).collect();
    let eq_ok = monotone && relaxed && nondecreasing(&eq_entropy);

    Outcome::new(
        real_ok && eq_ok,
        format!(
            "mass ratio 1836.5: {steps} steps, finite {finite}, converged {all_converged}, drift mass {:.1e} momentum {:.1e} energy {:.1e}, \
             entropy nondecreasing {}; equal mass: dT {:.4} -> {:.4}, monotone {monotone}, entropy nondecreasing {}",
            real.max_mass_drift(),
            real.max_momentum_drift(),
            real.max_energy_drift(),
            nondecreasing(&real_entropy),
            gap[0],
            gap[gap.len() - 1],
            nondecreasing(&eq_entropy),
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("convergence order", convergence_order),
        ("kernel oracles", kernel_oracles),
        ("assembly oracle", assembly_oracle),
        ("conservation", conservation),
        ("tensor identities", tensor_identities),
        ("cost model", cost_model),
        ("physics sanity", physics_sanity),
    ];
    let selected: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .filter(|n| (1..=criteria.len()).contains(n))
        .collect();
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        if !selected.is_empty() && !selected.contains(&(k + 1)) {
            continue;
        }
        let start = Instant::now();
        let out = check();
        failed += usize::from(!out.pass);
        println!(
            "criterion {} ({name}): {} [{:.1}s] {}",
            k + 1,
            if out.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            out.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
