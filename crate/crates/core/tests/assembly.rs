mod common;

use landau_core::assembly::{assemble_collision, assemble_naive, CollisionMatrix};
use landau_core::exec::{with_workers, Execution};
use landau_core::fem::{build_reference_element, sample_state, ReferenceElement, StateVector};
use landau_core::kernel::CollisionParams;
use landau_core::mesh::VelocityMesh;
use landau_core::physics::collision_params;

fn params(s: usize) -> CollisionParams {
    collision_params(&common::electron_ion(4.0)[..s], 10.0, 1.0, 1.0).unwrap()
}

fn fused(
    mesh: &VelocityMesh,
    re: &ReferenceElement,
    f: &StateVector,
    p: &CollisionParams,
    exec: Execution,
) -> CollisionMatrix {
    let data = sample_state(mesh, re, f).unwrap();
    assemble_collision(mesh, re, &data, p, exec).unwrap()
}

fn max_block_diff(a: &CollisionMatrix, b: &CollisionMatrix) -> f64 {
    a.blocks
        .iter()
        .zip(&b.blocks)
        .flat_map(|(x, y)| x.values().iter().zip(y.values()).map(|(u, v)| (u - v).abs()))
        .fold(0.0, f64::max)
}

#[test]
fn fused_matches_naive_on_small_meshes() {
    let re = build_reference_element();
    let mut rng = common::rng(31);
    for (nr, nz) in [(2, 2), (4, 4)] {
        let mesh = common::cartesian(nr, nz);
        for s in [1, 2] {
            let p = params(s);
            for _ in 0..10 {
                let f = common::random_state(&mesh, s, &mut rng, 0.0, 1.0);
                let a = fused(&mesh, &re, &f, &p, Execution::Parallel);
                let b = assemble_naive(&mesh, &re, &f, &p).unwrap();
                let scale = b.max_abs();
                assert!(scale > 0.0);
                let diff = max_block_diff(&a, &b);
                assert!(diff <= 1e-12 * scale, "{nr}x{nz} S={s}: {diff:e} vs {scale:e}");
            }
        }
    }
}

#[test]
fn fused_matches_naive_with_hanging_nodes() {
    let re = build_reference_element();
    let mesh = common::hanging_mesh();
    let mut rng = common::rng(32);
    let p = params(2);
    let f = common::random_state(&mesh, 2, &mut rng, 0.0, 1.0);
    let a = fused(&mesh, &re, &f, &p, Execution::Parallel);
    let b = assemble_naive(&mesh, &re, &f, &p).unwrap();
    assert!(max_block_diff(&a, &b) <= 1e-12 * b.max_abs());
}

#[test]
fn zero_state_gives_zero_matrix() {
    let re = build_reference_element();
    let mesh = common::hanging_mesh();
    let p = params(2);
    let f = StateVector::zeros(2, mesh.num_dofs());
    let c = fused(&mesh, &re, &f, &p, Execution::Parallel);
    assert_eq!(c.max_abs(), 0.0);
    assert_eq!(assemble_naive(&mesh, &re, &f, &p).unwrap().max_abs(), 0.0);
}

fn mass_defects(c: &CollisionMatrix, f: &StateVector) -> Vec<f64> {
    c.apply(f)
        .iter()
        .map(|cf| {
            let sum: f64 = cf.iter().sum();
            let scale: f64 = cf.iter().map(|v| v.abs()).sum();
            sum.abs() / scale
        })
        .collect()
}

#[test]
fn mass_identity_for_random_states() {
    let re = build_reference_element();
    let mut rng = common::rng(33);
    let meshes = [common::cartesian(2, 4), common::hanging_mesh()];
    for k in 0..100 {
        let mesh = &meshes[k % 2];
        let s = 1 + k % 2;
        let f = common::random_state(mesh, s, &mut rng, 0.0, 1.0);
        let c = fused(mesh, &re, &f, &params(s), Execution::Parallel);
        for d in mass_defects(&c, &f) {
            assert!(d <= 1e-11, "state {k}: {d:e}");
        }
    }
}

/// `|Σ_α m_α uᵀ(C_α f_α)|` relative to `Σ_α m_α Σ_i |u_i (C_α f_α)_i|`.
fn weighted_defect(
    mesh: &VelocityMesh,
    c: &CollisionMatrix,
    f: &StateVector,
    masses: &[f64],
    u: impl Fn(f64, f64) -> f64,
) -> f64 {
    let u = mesh.interpolate(u);
    let (mut sum, mut scale) = (0.0, 0.0);
    for (cf, m) in c.apply(f).iter().zip(masses) {
        for (ui, ci) in u.iter().zip(cf) {
            sum += m * ui * ci;
            scale += m * (ui * ci).abs();
        }
    }
    sum.abs() / scale
}

#[test]
fn momentum_and_energy_identities() {
    let re = build_reference_element();
    let mut rng = common::rng(34);
    let sp = common::electron_ion(4.0);
    let masses: Vec<f64> = sp.iter().map(|s| s.mass).collect();
    let p = params(2);
    for mesh in [common::cartesian(4, 8), common::hanging_mesh()] {
        for _ in 0..5 {
            let f = common::random_state(&mesh, 2, &mut rng, 0.1, 1.0);
            let c = fused(&mesh, &re, &f, &p, Execution::Parallel);
            let dp = weighted_defect(&mesh, &c, &f, &masses, |_, z| z);
            let de = weighted_defect(&mesh, &c, &f, &masses, |r, z| r * r + z * z);
            assert!(dp <= 1e-8, "momentum {dp:e}");
            assert!(de <= 1e-8, "energy {de:e}");
        }
    }
}

#[test]
fn constant_state_has_no_friction_part() {
    let re = build_reference_element();
    let mesh = common::cartesian(1, 1);
    let p = params(1);
    let f = StateVector::from_species(vec![vec![1.0; mesh.num_dofs()]]).unwrap();
    let full = fused(&mesh, &re, &f, &p, Execution::Sequential);
    let naive = assemble_naive(&mesh, &re, &f, &p).unwrap();
    assert!(max_block_diff(&full, &naive) <= 1e-12 * naive.max_abs());
    // ∇f = 0 leaves only the diffusive part, which is symmetric
    let c = &full.blocks[0];
    for (i, j, v) in c.entries() {
        assert!((v - c.get(j, i)).abs() <= 1e-12 * c.max_abs());
    }
}

#[test]
fn assembly_is_bitwise_deterministic() {
    let re = build_reference_element();
    let mesh = common::hanging_mesh();
    let mut rng = common::rng(35);
    let p = params(2);
    let f = common::random_state(&mesh, 2, &mut rng, 0.0, 1.0);
    let reference = fused(&mesh, &re, &f, &p, Execution::Sequential);
    let runs = [
        fused(&mesh, &re, &f, &p, Execution::Sequential),
        fused(&mesh, &re, &f, &p, Execution::Parallel),
        with_workers(1, || fused(&mesh, &re, &f, &p, Execution::Parallel)),
        with_workers(3, || fused(&mesh, &re, &f, &p, Execution::Parallel)),
    ];
    for run in &runs {
        for (a, b) in run.blocks.iter().zip(&reference.blocks) {
            assert_eq!(a.values(), b.values());
        }
    }
}

#[test]
fn sparsity_follows_element_connectivity() {
    let re = build_reference_element();
    let mesh = common::hanging_mesh();
    let mut rng = common::rng(36);
    let f = common::random_state(&mesh, 1, &mut rng, 0.0, 1.0);
    let c = fused(&mesh, &re, &f, &params(1), Execution::Parallel);
    let mut coupled = std::collections::HashSet::new();
    for nodes in mesh.cell_nodes() {
        let dofs: Vec<usize> = nodes
            .iter()
            .flat_map(|&n| mesh.expansion(n).iter().map(|&(d, _)| d))
            .collect();
        for &i in &dofs {
            for &j in &dofs {
                coupled.insert((i, j));
            }
        }
    }
    for (i, j, v) in c.blocks[0].entries() {
        assert!(v.is_finite());
        assert!(v == 0.0 || coupled.contains(&(i, j)));
    }
}

#[test]
fn mismatched_data_is_rejected() {
    let re = build_reference_element();
    let mesh = common::cartesian(2, 2);
    let other = common::cartesian(2, 4);
    let f = StateVector::zeros(1, other.num_dofs());
    let data = sample_state(&other, &re, &f).unwrap();
    assert!(assemble_collision(&mesh, &re, &data, &params(1), Execution::Parallel).is_err());
    assert!(assemble_collision(&other, &re, &data, &params(2), Execution::Parallel).is_err());
}
