#![allow(dead_code)]

use landau_core::fem::StateVector;
use landau_core::mesh::{DomainSpec, VelocityMesh};
use landau_core::physics::Species;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn domain() -> DomainSpec {
    DomainSpec::new(2.0).unwrap()
}

pub fn cartesian(nr: usize, nz: usize) -> VelocityMesh {
    VelocityMesh::cartesian(domain(), nr, nz).unwrap()
}

/// 2×4 base with one corner cell refined twice, so hanging nodes appear on
/// two levels.
pub fn hanging_mesh() -> VelocityMesh {
    let m = cartesian(2, 4).refine(&[3]).unwrap();
    let target = m.cells().iter().position(|c| c.key.level == 1).unwrap();
    m.refine(&[target]).unwrap()
}

pub fn electron_ion(mass_ratio: f64) -> Vec<Species> {
    vec![
        Species::new("e", 1.0, -1.0, 0.2, -0.3).unwrap(),
        Species::new("i", mass_ratio, 1.0, 0.05, 0.1).unwrap(),
    ]
}

/// Uniform random coefficients in `[lo, hi)` for every species.
pub fn random_state(mesh: &VelocityMesh, species: usize, rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> StateVector {
    let values = (0..species)
        .map(|_| (0..mesh.num_dofs()).map(|_| rng.random_range(lo..hi)).collect())
        .collect();
    StateVector::from_species(values).unwrap()
}

/// Relative max-norm distance between two equally shaped value lists.
pub fn rel_max_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let diff = a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}
