//! Species, collision frequencies, Maxwellian initial states and moments.
//!
//! Units: masses in units of the reference mass `m_o = 1`, charges in units
//! of the elementary charge, velocities and temperatures dimensionless.

use std::f64::consts::PI;

use crate::fem::{sample_state, ReferenceElement, StateVector};
use crate::kernel::CollisionParams;
use crate::mesh::VelocityMesh;
use crate::{Error, Result};

/// Default Coulomb logarithm shared by every species pair.
pub const DEFAULT_COULOMB_LOG: f64 = 10.0;

#[derive(Clone, Debug, PartialEq)]
pub struct Species {
    pub name: String,
    pub mass: f64,
    pub charge: f64,
    pub temperature: f64,
    /// Drift of the initial Maxwellian along `z`.
    pub shift: f64,
}

impl Species {
    pub fn new(name: &str, mass: f64, charge: f64, temperature: f64, shift: f64) -> Result<Self> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::InvalidArgument(format!("species {name}: mass must be positive")));
        }
        if !(temperature > 0.0) || !temperature.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "species {name}: temperature must be positive"
            )));
        }
        if !charge.is_finite() || !shift.is_finite() {
            return Err(Error::InvalidArgument(format!("species {name}: non-finite parameter")));
        }
        Ok(Self {
            name: name.to_string(),
            mass,
            charge,
            temperature,
            shift,
        })
    }

    /// `σ² = 2 T m_o / m`.
    pub fn thermal_width_sq(&self) -> f64 {
        2.0 * self.temperature / self.mass
    }

    pub fn thermal_width(&self) -> f64 {
        self.thermal_width_sq().sqrt()
    }

    /// `θ/2 (πσ²)^{-3/2} exp(-(r² + (z - s)²)/σ²)`.
    pub fn maxwellian(&self, theta: f64, r: f64, z: f64) -> f64 {
        let s2 = self.thermal_width_sq();
        let dz = z - self.shift;
        theta * 0.5 * (PI * s2).powf(-1.5) * (-(r * r + dz * dz) / s2).exp()
    }
}

/// `ν_αβ = e_α² e_β² lnΛ / (8π m_o² ε₀²)` normalized by `ν_o = ν_11`.
pub fn collision_params(species: &[Species], coulomb_log: f64, m_o: f64, eps0: f64) -> Result<CollisionParams> {
    if species.is_empty() {
        return Err(Error::InvalidArgument("species list is empty".into()));
    }
    if species.iter().any(|s| s.charge == 0.0) {
        return Err(Error::InvalidArgument("neutral species do not collide".into()));
    }
    let nu = |a: &Species, b: &Species| {
        a.charge.powi(2) * b.charge.powi(2) * coulomb_log / (8.0 * PI * m_o * m_o * eps0 * eps0)
    };
    let nu_o = nu(&species[0], &species[0]);
    let nu_hat = species
        .iter()
        .flat_map(|a| species.iter().map(move |b| nu(a, b) / nu_o))
        .collect();
    let mass_ratio_o = species.iter().map(|s| m_o / s.mass).collect();
    CollisionParams::new(nu_hat, mass_ratio_o)
}

/// Scaling of each species' Maxwellian.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ThetaPolicy {
    /// `θ = 1` for every species.
    Unit,
    /// `θ = 1` for the first species; every later species is scaled so that
    /// it carries an equal share of the charge needed for `Σ e_α n_α = 0`.
    #[default]
    QuasiNeutral,
}

/// Nodal interpolant of each species' shifted Maxwellian.
pub fn maxwellian_init(
    mesh: &VelocityMesh,
    reference: &ReferenceElement,
    species: &[Species],
    policy: ThetaPolicy,
) -> Result<StateVector> {
    if species.is_empty() {
        return Err(Error::InvalidArgument("species list is empty".into()));
    }
    let mut values: Vec<Vec<f64>> = species
        .iter()
        .map(|s| mesh.interpolate(|r, z| s.maxwellian(1.0, r, z)))
        .collect();
    if policy == ThetaPolicy::QuasiNeutral && species.len() > 1 {
        let state = StateVector::from_species(values.clone())?;
        let m = moments(mesh, reference, &state, species)?;
        let target = -species[0].charge * m.density[0] / (species.len() - 1) as f64;
        for (a, s) in species.iter().enumerate().skip(1) {
            let theta = target / (s.charge * m.density[a]);
            if !(theta > 0.0) || !theta.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "species {} cannot neutralize species {} (charges of equal sign)",
                    s.name, species[0].name
                )));
            }
            values[a].iter_mut().for_each(|v| *v *= theta);
        }
    }
    StateVector::from_species(values)
}

/// Velocity moments per species, integrated with `dμ = 2π r dr dz`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSet {
    pub density: Vec<f64>,
    /// `m ∫ z f dμ`
    pub momentum_z: Vec<f64>,
    /// `m/2 ∫ (r² + z²) f dμ`
    pub energy: Vec<f64>,
    /// `m/2 ∫ (r² + z²) z f dμ`
    pub heat_flux_z: Vec<f64>,
}

impl MomentSet {
    pub fn total_momentum_z(&self) -> f64 {
        self.momentum_z.iter().sum()
    }

    pub fn total_energy(&self) -> f64 {
        self.energy.iter().sum()
    }

    pub fn charge_density(&self, species: &[Species]) -> f64 {
        species.iter().zip(&self.density).map(|(s, n)| s.charge * n).sum()
    }
}

pub fn moments(
    mesh: &VelocityMesh,
    reference: &ReferenceElement,
    state: &StateVector,
    species: &[Species],
) -> Result<MomentSet> {
    if species.len() != state.num_species() {
        return Err(Error::DimensionMismatch {
            what: "species in state",
            expected: species.len(),
            got: state.num_species(),
        });
    }
    let data = sample_state(mesh, reference, state)?;
    let s = species.len();
    let mut out = MomentSet {
        density: vec![0.0; s],
        momentum_z: vec![0.0; s],
        energy: vec![0.0; s],
        heat_flux_z: vec![0.0; s],
    };
    let two_pi = 2.0 * PI;
    for (a, sp) in species.iter().enumerate() {
        let f = data.f(a);
        let (mut n, mut p, mut e, mut q) = (0.0, 0.0, 0.0, 0.0);
        for k in 0..data.len() {
            let (r, z) = (data.r()[k], data.z()[k]);
            let wf = data.w()[k] * f[k];
            let v2 = r * r + z * z;
            n += wf;
            p += z * wf;
            e += v2 * wf;
            q += v2 * z * wf;
        }
        out.density[a] = two_pi * n;
        out.momentum_z[a] = two_pi * sp.mass * p;
        out.energy[a] = two_pi * 0.5 * sp.mass * e;
        out.heat_flux_z[a] = two_pi * 0.5 * sp.mass * q;
    }
    Ok(out)
}

/// `-Σ_α ∫ f ln f dμ` over quadrature points where `f > 0`.
pub fn entropy(mesh: &VelocityMesh, reference: &ReferenceElement, state: &StateVector) -> Result<f64> {
    let data = sample_state(mesh, reference, state)?;
    let mut h = 0.0;
    for a in 0..data.species() {
        for (k, &f) in data.f(a).iter().enumerate() {
            if f > 0.0 {
                h -= data.w()[k] * f * f.ln();
            }
        }
    }
    Ok(2.0 * PI * h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::build_reference_element;
    use crate::mesh::{DomainSpec, VelocityMesh};

    #[test]
    fn single_species_self_normalized() {
        let e = Species::new("e", 1.0, -1.0, 0.5, 0.0).unwrap();
        let p = collision_params(&[e], 10.0, 1.0, 1.0).unwrap();
        assert_eq!(p.nu_hat(0, 0), 1.0);
    }

    #[test]
    fn charge_squared_scaling() {
        let e = Species::new("e", 1.0, -1.0, 0.5, 0.0).unwrap();
        let i1 = Species::new("i", 2.0, 1.0, 0.5, 0.0).unwrap();
        let i2 = Species::new("i", 2.0, 2.0, 0.5, 0.0).unwrap();
        let p1 = collision_params(&[e.clone(), i1], 10.0, 1.0, 1.0).unwrap();
        let p2 = collision_params(&[e, i2], 10.0, 1.0, 1.0).unwrap();
        assert!((p2.nu_hat(0, 1) - 4.0 * p1.nu_hat(0, 1)).abs() < 1e-14);
    }

    #[test]
    fn electron_proton_all_ones() {
        let e = Species::new("e", 1.0, -1.0, 0.02, -1.0).unwrap();
        let i = Species::new("i", 1836.5, 1.0, 0.002, 0.0).unwrap();
        let p = collision_params(&[e, i], 10.0, 1.0, 1.0).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                assert!((p.nu_hat(a, b) - 1.0).abs() < 1e-15);
            }
        }
        assert!((p.mass_ratio_o(1) - 1.0 / 1836.5).abs() < 1e-18);
    }

    #[test]
    fn maxwellian_peak() {
        // σ = 1 ⇔ 2T/m = 1
        let s = Species::new("x", 1.0, 1.0, 0.5, 0.0).unwrap();
        let peak = s.maxwellian(1.0, 0.0, 0.0);
        assert!((peak - 0.5 * PI.powf(-1.5)).abs() < 1e-15);
        assert!((peak - 0.089_793_56).abs() < 1e-8);
    }

    #[test]
    fn invalid_species() {
        assert!(Species::new("x", 0.0, 1.0, 1.0, 0.0).is_err());
        assert!(Species::new("x", 1.0, 1.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn zero_state_has_zero_moments() {
        let mesh = VelocityMesh::cartesian(DomainSpec::new(2.0).unwrap(), 2, 4).unwrap();
        let s = Species::new("e", 1.0, -1.0, 0.2, 0.0).unwrap();
        let st = StateVector::zeros(1, mesh.num_dofs());
        let m = moments(&mesh, &build_reference_element(), &st, &[s]).unwrap();
        assert_eq!(m.density[0], 0.0);
        assert_eq!(m.heat_flux_z[0], 0.0);
    }

    #[test]
    fn unshifted_maxwellian_is_z_symmetric() {
        let mesh = VelocityMesh::cartesian(DomainSpec::new(2.0).unwrap(), 8, 16).unwrap();
        let re = build_reference_element();
        let s = Species::new("e", 1.0, -1.0, 0.2, 0.0).unwrap();
        let st = maxwellian_init(&mesh, &re, std::slice::from_ref(&s), ThetaPolicy::Unit).unwrap();
        let m = moments(&mesh, &re, &st, &[s]).unwrap();
        assert!(m.momentum_z[0].abs() < 1e-12);
        assert!(m.heat_flux_z[0].abs() < 1e-12);
    }

    #[test]
    fn quasi_neutral_scaling() {
        let mesh = VelocityMesh::cartesian(DomainSpec::new(2.0).unwrap(), 8, 16).unwrap();
        let re = build_reference_element();
        let sp = vec![
            Species::new("e", 1.0, -1.0, 0.2, -1.0).unwrap(),
            Species::new("i", 4.0, 1.0, 0.05, 0.0).unwrap(),
        ];
        let st = maxwellian_init(&mesh, &re, &sp, ThetaPolicy::QuasiNeutral).unwrap();
        let m = moments(&mesh, &re, &st, &sp).unwrap();
        assert!((m.density[0] - m.density[1]).abs() / m.density[0] <= 1e-12);
    }

    #[test]
    fn equal_sign_charges_cannot_neutralize() {
        let mesh = VelocityMesh::cartesian(DomainSpec::new(2.0).unwrap(), 2, 4).unwrap();
        let sp = vec![
            Species::new("a", 1.0, 1.0, 0.2, 0.0).unwrap(),
            Species::new("b", 1.0, 1.0, 0.2, 0.0).unwrap(),
        ];
        assert!(maxwellian_init(&mesh, &build_reference_element(), &sp, ThetaPolicy::QuasiNeutral).is_err());
    }
}
