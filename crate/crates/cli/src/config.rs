//! JSON run configuration.
//!
//! ```json
//! {
//!   "domain": 2.0,
//!   "mesh": { "kind": "cartesian", "nr": 8, "nz": 16 },
//!   "species": [
//!     { "name": "e", "mass": 1.0, "charge": -1.0, "temperature": 0.2, "shift": -1.0 },
//!     { "name": "i", "mass": 4.0, "charge": 1.0, "temperature": 0.02 }
//!   ],
//!   "coulomb_log": 10.0,
//!   "theta": "quasi_neutral",
//!   "dt": 0.1,
//!   "t_end": 1.0,
//!   "newton": { "tol": 1e-10, "max_iterations": 10 },
//!   "output": { "vtk_every": 0 },
//!   "bench": { "repetitions": 5, "species": [1, 2, 3] },
//!   "workers": 0
//! }
//! ```
//!
//! Every field except `species` has a default. Adaptive meshes use
//! `{ "kind": "adaptive", "base_nr": 4, "base_nz": 8, "levels": 2 }` with
//! optional `radii_in_sigma` (one entry per round, overrides `levels`) and
//! `min_size_in_sigma`. `workers = 0` uses the default thread pool.

use std::fmt;
use std::path::Path;

use landau_core::mesh::{
    adapt_with_schedule, DomainSpec, VelocityMesh, DEFAULT_MIN_SIZE_IN_SIGMA, DEFAULT_RADIUS_IN_SIGMA,
};
use landau_core::physics::{Species, ThetaPolicy, DEFAULT_COULOMB_LOG};
use landau_core::solver::{StepConfig, DEFAULT_DT, DEFAULT_MAX_NEWTON, DEFAULT_NEWTON_TOL};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Half-width `L` of the velocity domain.
    #[serde(default = "default_domain")]
    pub domain: f64,
    #[serde(default)]
    pub mesh: MeshConfig,
    pub species: Vec<SpeciesConfig>,
    #[serde(default = "default_coulomb_log")]
    pub coulomb_log: f64,
    #[serde(default)]
    pub theta: ThetaConfig,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub t_end: f64,
    #[serde(default)]
    pub newton: NewtonConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub bench: BenchConfig,
    #[serde(default)]
    pub workers: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeshConfig {
    Cartesian {
        nr: usize,
        nz: usize,
    },
    Adaptive {
        base_nr: usize,
        base_nz: usize,
        #[serde(default)]
        levels: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radii_in_sigma: Option<Vec<f64>>,
        #[serde(default = "default_min_size")]
        min_size_in_sigma: f64,
    },
}

impl Default for MeshConfig {
    fn default() -> Self {
        MeshConfig::Cartesian { nr: 8, nz: 16 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesConfig {
    pub name: String,
    pub mass: f64,
    pub charge: f64,
    pub temperature: f64,
    #[serde(default)]
    pub shift: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaConfig {
    Unit,
    #[default]
    QuasiNeutral,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewtonConfig {
    #[serde(default = "default_newton_tol")]
    pub tol: f64,
    #[serde(default = "default_max_newton")]
    pub max_iterations: usize,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            tol: DEFAULT_NEWTON_TOL,
            max_iterations: DEFAULT_MAX_NEWTON,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Write `fields_XXXX.vtk` every this many steps; 0 disables field output.
    #[serde(default)]
    pub vtk_every: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default = "default_bench_species")]
    pub species: Vec<usize>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            repetitions: default_repetitions(),
            species: default_bench_species(),
        }
    }
}

fn default_domain() -> f64 {
    2.0
}
fn default_coulomb_log() -> f64 {
    DEFAULT_COULOMB_LOG
}
fn default_dt() -> f64 {
    DEFAULT_DT
}
fn default_min_size() -> f64 {
    DEFAULT_MIN_SIZE_IN_SIGMA
}
fn default_newton_tol() -> f64 {
    DEFAULT_NEWTON_TOL
}
fn default_max_newton() -> usize {
    DEFAULT_MAX_NEWTON
}
fn default_repetitions() -> usize {
    5
}
fn default_bench_species() -> Vec<usize> {
    vec![1, 2, 3]
}

/// Config failure with the offending location when it is known.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl ConfigError {
    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Self {
            line: None,
            column: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "line {l}, column {c}: {}", self.message),
            _ => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

impl RunConfig {
    /// Parses and validates a JSON document.
    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| ConfigError {
            line: Some(e.line()),
            column: Some(e.column()),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_json_str(&text).map_err(|e| {
            CliError::Config(ConfigError {
                message: format!("{}: {}", path.display(), e.message),
                ..e
            })
        })
    }

    /// Compact JSON with every default filled in.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        DomainSpec::new(self.domain).map_err(|e| ConfigError::invalid(format!("domain: {e}")))?;
        if self.species.is_empty() {
            return Err(ConfigError::invalid("species list is empty"));
        }
        let species = self.core_species()?;
        if self.theta == ThetaConfig::QuasiNeutral {
            let first = species[0].charge;
            if let Some(s) = species[1..].iter().find(|s| s.charge * first >= 0.0) {
                return Err(ConfigError::invalid(format!(
                    "species {} cannot neutralize species {}: charges must have opposite signs",
                    s.name, species[0].name
                )));
            }
        }
        if !(self.coulomb_log > 0.0 && self.coulomb_log.is_finite()) {
            return Err(ConfigError::invalid("coulomb_log must be positive"));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(ConfigError::invalid("t_end must be non-negative"));
        }
        self.step_config()
            .validate()
            .map_err(|e| ConfigError::invalid(e.to_string()))?;
        match &self.mesh {
            MeshConfig::Cartesian { nr, nz } => {
                if *nr == 0 || *nz == 0 {
                    return Err(ConfigError::invalid("mesh: nr and nz must be at least 1"));
                }
            }
            MeshConfig::Adaptive {
                base_nr,
                base_nz,
                radii_in_sigma,
                min_size_in_sigma,
                ..
            } => {
                if *base_nr == 0 || *base_nz == 0 {
                    return Err(ConfigError::invalid("mesh: base_nr and base_nz must be at least 1"));
                }
                if radii_in_sigma.iter().flatten().any(|r| !(*r > 0.0)) {
                    return Err(ConfigError::invalid("mesh: radii_in_sigma must be positive"));
                }
                if !(*min_size_in_sigma >= 0.0) {
                    return Err(ConfigError::invalid("mesh: min_size_in_sigma must be non-negative"));
                }
            }
        }
        if self.bench.repetitions == 0 {
            return Err(ConfigError::invalid("bench.repetitions must be at least 1"));
        }
        if self.bench.species.contains(&0) {
            return Err(ConfigError::invalid("bench.species entries must be at least 1"));
        }
        Ok(())
    }

    pub fn core_species(&self) -> Result<Vec<Species>, ConfigError> {
        self.species
            .iter()
            .map(|s| {
                Species::new(&s.name, s.mass, s.charge, s.temperature, s.shift)
                    .map_err(|e| ConfigError::invalid(e.to_string()))
            })
            .collect()
    }

    pub fn species_names(&self) -> Vec<String> {
        self.species.iter().map(|s| s.name.clone()).collect()
    }

    pub fn theta_policy(&self) -> ThetaPolicy {
        match self.theta {
            ThetaConfig::Unit => ThetaPolicy::Unit,
            ThetaConfig::QuasiNeutral => ThetaPolicy::QuasiNeutral,
        }
    }

    pub fn step_config(&self) -> StepConfig {
        StepConfig {
            dt: self.dt,
            newton_tol: self.newton.tol,
            max_newton: self.newton.max_iterations,
        }
    }

    /// Builds the configured mesh; adaptive meshes are refined for every species.
    pub fn build_mesh(&self) -> Result<VelocityMesh, CliError> {
        let domain = DomainSpec::new(self.domain).map_err(|e| ConfigError::invalid(e.to_string()))?;
        let invalid = |e: landau_core::Error| ConfigError::invalid(format!("mesh: {e}"));
        let mesh = match &self.mesh {
            MeshConfig::Cartesian { nr, nz } => VelocityMesh::cartesian(domain, *nr, *nz).map_err(invalid)?,
            MeshConfig::Adaptive {
                base_nr,
                base_nz,
                levels,
                radii_in_sigma,
                min_size_in_sigma,
            } => {
                let radii = radii_in_sigma
                    .clone()
                    .unwrap_or_else(|| vec![DEFAULT_RADIUS_IN_SIGMA; *levels]);
                adapt_with_schedule(
                    domain,
                    *base_nr,
                    *base_nz,
                    &self.core_species()?,
                    &radii,
                    *min_size_in_sigma,
                )
                .map_err(invalid)?
            }
        };
        Ok(mesh)
    }
}

fn species(name: &str, mass: f64, charge: f64, temperature: f64, shift: f64) -> SpeciesConfig {
    SpeciesConfig {
        name: name.into(),
        mass,
        charge,
        temperature,
        shift,
    }
}

/// Mass ratio 4 with `T_e = 0.2`, `T_i = 0.02`, electrons shifted to `s = -1`.
pub fn convergence_preset() -> RunConfig {
    RunConfig {
        domain: 2.0,
        mesh: MeshConfig::Cartesian { nr: 8, nz: 16 },
        species: vec![species("e", 1.0, -1.0, 0.2, -1.0), species("i", 4.0, 1.0, 0.02, 0.0)],
        coulomb_log: DEFAULT_COULOMB_LOG,
        theta: ThetaConfig::QuasiNeutral,
        dt: DEFAULT_DT,
        t_end: 0.2,
        newton: NewtonConfig {
            tol: DEFAULT_NEWTON_TOL,
            max_iterations: 1,
        },
        output: OutputConfig::default(),
        bench: BenchConfig::default(),
        workers: 0,
    }
}

/// Electron–proton relaxation at the physical mass ratio.
pub fn realistic_preset() -> RunConfig {
    RunConfig {
        mesh: MeshConfig::Adaptive {
            base_nr: 4,
            base_nz: 8,
            levels: 8,
            radii_in_sigma: None,
            min_size_in_sigma: DEFAULT_MIN_SIZE_IN_SIGMA,
        },
        species: vec![
            species("e", 1.0, -1.0, 0.02, -1.0),
            species("i", 1836.5, 1.0, 0.002, 0.0),
        ],
        dt: 0.02,
        t_end: 0.2,
        newton: NewtonConfig {
            tol: DEFAULT_NEWTON_TOL,
            max_iterations: 30,
        },
        ..convergence_preset()
    }
}

/// Refinement radii (in σ) and minimum cell size of the electron-only
/// benchmark mesh: 176 leaves on a 4×8 base.
pub const BENCH_RADII_IN_SIGMA: [f64; 2] = [1.25, 1.75];
pub const BENCH_MIN_SIZE_IN_SIGMA: f64 = 0.25;

/// Equal masses and temperatures (`T = 0.2`), no shifts, electron-adapted mesh.
pub fn bench_preset() -> RunConfig {
    RunConfig {
        mesh: MeshConfig::Adaptive {
            base_nr: 4,
            base_nz: 8,
            levels: BENCH_RADII_IN_SIGMA.len(),
            radii_in_sigma: Some(BENCH_RADII_IN_SIGMA.to_vec()),
            min_size_in_sigma: BENCH_MIN_SIZE_IN_SIGMA,
        },
        species: vec![species("e", 1.0, -1.0, 0.2, 0.0)],
        t_end: 0.1,
        newton: NewtonConfig {
            tol: DEFAULT_NEWTON_TOL,
            max_iterations: 1,
        },
        ..convergence_preset()
    }
}

/// The first `s` species of the benchmark family: electrons, then unit-mass
/// ions, all at `T = 0.2` and unshifted.
pub fn bench_species(s: usize) -> Vec<SpeciesConfig> {
    (0..s)
        .map(|k| match k {
            0 => species("e", 1.0, -1.0, 0.2, 0.0),
            _ => species(&format!("i{k}"), 1.0, 1.0, 0.2, 0.0),
        })
        .collect()
}
