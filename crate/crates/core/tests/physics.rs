mod common;

use landau_core::fem::build_reference_element;
use landau_core::mesh::{DomainSpec, VelocityMesh};
use landau_core::physics::{collision_params, maxwellian_init, moments, MomentSet, Species, ThetaPolicy};

fn unit_species(shift: f64) -> Species {
    // σ² = 2T/m = 1
    Species::new("a", 1.0, 1.0, 0.5, shift).unwrap()
}

fn wide_mesh(nr: usize, nz: usize) -> VelocityMesh {
    VelocityMesh::cartesian(DomainSpec::new(6.0).unwrap(), nr, nz).unwrap()
}

fn density(mesh: &VelocityMesh, s: &Species) -> f64 {
    let re = build_reference_element();
    let f = maxwellian_init(mesh, &re, std::slice::from_ref(s), ThetaPolicy::Unit).unwrap();
    moments(mesh, &re, &f, std::slice::from_ref(s)).unwrap().density[0]
}

#[test]
fn unshifted_density_is_one_half() {
    let s = unit_species(0.0);
    let n = density(&wide_mesh(24, 48), &s);
    assert!((n - 0.5).abs() <= 5e-5 * 0.5, "n = {n}");
}

#[test]
fn shifted_mean_velocity() {
    let re = build_reference_element();
    let s = unit_species(-1.0);
    let mesh = wide_mesh(24, 48);
    let f = maxwellian_init(&mesh, &re, std::slice::from_ref(&s), ThetaPolicy::Unit).unwrap();
    let m = moments(&mesh, &re, &f, std::slice::from_ref(&s)).unwrap();
    let mean = m.momentum_z[0] / (s.mass * m.density[0]);
    assert!((mean + 1.0).abs() <= 1e-8, "mean = {mean}");
    // E = n(3T/2 + m s²/2) for a drifting Maxwellian
    let e = m.density[0] * (1.5 * s.temperature + 0.5 * s.mass);
    assert!((m.energy[0] - e).abs() <= 5e-5 * e, "{m:?} {e}");
}

#[test]
fn moments_converge_under_refinement() {
    let s = unit_species(0.3);
    let errs: Vec<f64> = [(4, 8), (8, 16), (16, 32)]
        .iter()
        .map(|&(nr, nz)| (density(&wide_mesh(nr, nz), &s) - 0.5).abs())
        .collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 3.0, "{errs:?}");
    }
}

#[test]
fn moments_are_linear() {
    let re = build_reference_element();
    let mesh = common::hanging_mesh();
    let sp = common::electron_ion(4.0);
    let mut rng = common::rng(41);
    let f = common::random_state(&mesh, 2, &mut rng, 0.0, 1.0);
    let g = common::random_state(&mesh, 2, &mut rng, 0.0, 1.0);
    let (a, b) = (0.75, -1.25);
    let h = f.lin_comb(a, &g, b);
    let mf = moments(&mesh, &re, &f, &sp).unwrap();
    let mg = moments(&mesh, &re, &g, &sp).unwrap();
    let mh = moments(&mesh, &re, &h, &sp).unwrap();
    let flat = |m: &MomentSet| -> Vec<f64> {
        [&m.density, &m.momentum_z, &m.energy, &m.heat_flux_z]
            .into_iter()
            .flatten()
            .copied()
            .collect()
    };
    for ((x, y), z) in flat(&mf).iter().zip(flat(&mg)).zip(flat(&mh)) {
        assert!((a * x + b * y - z).abs() <= 1e-13 * (x.abs() + y.abs()));
    }
}

#[test]
fn quasi_neutral_initial_state() {
    let re = build_reference_element();
    let mesh = common::cartesian(8, 16).refine(&[40, 41]).unwrap();
    let sp = vec![
        Species::new("e", 1.0, -1.0, 0.2, 0.0).unwrap(),
        Species::new("i", 4.0, 1.0, 0.2, 0.0).unwrap(),
    ];
    let f = maxwellian_init(&mesh, &re, &sp, ThetaPolicy::QuasiNeutral).unwrap();
    let m = moments(&mesh, &re, &f, &sp).unwrap();
    assert!((m.density[0] - m.density[1]).abs() <= 1e-12 * m.density[0], "{m:?}");
    assert!(m.energy.iter().all(|&e| e > 0.0));
    assert!(m.charge_density(&sp).abs() <= 1e-12 * m.density[0]);
}

#[test]
fn frequency_table_ignores_mass() {
    let sp = common::electron_ion(1836.5);
    let p = collision_params(&sp, 10.0, 1.0, 1.0).unwrap();
    for a in 0..2 {
        for b in 0..2 {
            assert_eq!(p.nu_hat(a, b), 1.0);
        }
    }
    assert_eq!(p.mass_ratio_o(1), 1.0 / 1836.5);
    assert!(collision_params(&[], 10.0, 1.0, 1.0).is_err());
}
