//! Crank–Nicolson time integration of `M ḟ_α = C_α[f] f_α` with a
//! frozen-coefficient Newton iteration and a direct solve per species.
//!
//! The iteration matrix is `M - dt/2 C[f_guess]`; the `∂C/∂f` terms are
//! dropped. Each iteration assembles `C` once at its new iterate to evaluate
//! the residual, so one iteration from a cold start costs two assemblies.

use std::time::{Duration, Instant};

use crate::assembly::{assemble_collision_timed, AssemblyTimings, CollisionMatrix};
use crate::exec::Execution;
use crate::fem::{mass_matrix, sample_state, ReferenceElement, StateVector};
use crate::kernel::CollisionParams;
use crate::mesh::VelocityMesh;
use crate::physics::{moments, MomentSet, Species};
use crate::sparse::{solve_for_species, CsrMatrix};
use crate::{Error, Result};

pub const DEFAULT_DT: f64 = 0.1;
pub const DEFAULT_NEWTON_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_NEWTON: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepConfig {
    pub dt: f64,
    /// Relative residual `‖R‖ / ‖M f_old‖` at which an iteration stops.
    pub newton_tol: f64,
    /// Iteration cap. A step that hits the cap is still accepted.
    pub max_newton: usize,
}

impl Default for StepConfig {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            newton_tol: DEFAULT_NEWTON_TOL,
            max_newton: DEFAULT_MAX_NEWTON,
        }
    }
}

impl StepConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.newton_tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "newton_tol must be positive, got {}",
                self.newton_tol
            )));
        }
        if self.max_newton == 0 {
            return Err(Error::InvalidArgument("max_newton must be at least 1".into()));
        }
        Ok(())
    }
}

/// Per-species residual `R_α = M(f_new − f_old) − dt/2 (C_new f_new + C_old f_old)`.
pub fn residual(
    f_new: &StateVector,
    f_old: &StateVector,
    c_new: &CollisionMatrix,
    c_old: &CollisionMatrix,
    mass: &CsrMatrix,
    dt: f64,
) -> Result<Vec<Vec<f64>>> {
    let s = f_old.num_species();
    if f_new.num_species() != s || c_new.species() != s || c_old.species() != s {
        return Err(Error::DimensionMismatch {
            what: "species",
            expected: s,
            got: f_new.num_species().min(c_new.species()).min(c_old.species()),
        });
    }
    if f_new.num_dofs() != mass.dim() || f_old.num_dofs() != mass.dim() {
        return Err(Error::DimensionMismatch {
            what: "state dofs",
            expected: mass.dim(),
            got: f_new.num_dofs(),
        });
    }
    let diff = f_new.lin_comb(1.0, f_old, -1.0);
    Ok((0..s)
        .map(|a| {
            let md = mass.mul_vec(diff.species(a));
            let cn = c_new.blocks[a].mul_vec(f_new.species(a));
            let co = c_old.blocks[a].mul_vec(f_old.species(a));
            md.iter()
                .zip(cn.iter().zip(&co))
                .map(|(m, (x, y))| m - 0.5 * dt * (x + y))
                .collect()
        })
        .collect())
}

fn norm2(v: &[Vec<f64>]) -> f64 {
    v.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

/// One Crank–Nicolson step with a fixed operator:
/// `(M − dt/2 C) f_new = (M + dt/2 C) f`.
pub fn linear_cn_step(mass: &CsrMatrix, c: &CollisionMatrix, f: &StateVector, dt: f64) -> Result<StateVector> {
    let values = (0..f.num_species())
        .map(|a| {
            let lhs = mass.lin_comb(1.0, &c.blocks[a], -0.5 * dt);
            let rhs = mass.lin_comb(1.0, &c.blocks[a], 0.5 * dt).mul_vec(f.species(a));
            solve_for_species(&lhs, &rhs, a)
        })
        .collect::<Result<Vec<_>>>()?;
    StateVector::from_species(values)
}

/// Wall time by solver phase, cumulative over the lifetime of an integrator.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepTimings {
    /// Sampling the state at the quadrature points.
    pub setup: Duration,
    pub assembly: AssemblyTimings,
    pub solve: Duration,
}

impl StepTimings {
    pub fn total(&self) -> Duration {
        self.setup + self.assembly.total() + self.solve
    }
}

/// Outcome of one accepted step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepReport {
    pub step: usize,
    pub t: f64,
    pub newton_iterations: usize,
    /// Relative residual after the last iteration.
    pub residual: f64,
    pub converged: bool,
}

/// One point of a recorded trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub state: StateVector,
    pub moments: MomentSet,
}

/// Time integrator bound to one mesh and one set of collision parameters.
///
/// The operator assembled at the end of a step is kept and reused as
/// `C_old` by the next step.
pub struct Integrator<'m> {
    mesh: &'m VelocityMesh,
    reference: ReferenceElement,
    params: CollisionParams,
    mass: CsrMatrix,
    exec: Execution,
    cached: Option<(StateVector, CollisionMatrix)>,
    assemblies: usize,
    timings: StepTimings,
}

impl<'m> Integrator<'m> {
    pub fn new(mesh: &'m VelocityMesh, params: CollisionParams, exec: Execution) -> Self {
        let reference = ReferenceElement::default();
        let mass = mass_matrix(mesh, &reference);
        Self {
            mesh,
            reference,
            params,
            mass,
            exec,
            cached: None,
            assemblies: 0,
            timings: StepTimings::default(),
        }
    }

    pub fn mesh(&self) -> &VelocityMesh {
        self.mesh
    }

    pub fn reference(&self) -> &ReferenceElement {
        &self.reference
    }

    pub fn params(&self) -> &CollisionParams {
        &self.params
    }

    pub fn mass(&self) -> &CsrMatrix {
        &self.mass
    }

    /// Number of collision-operator assemblies so far.
    pub fn assemblies(&self) -> usize {
        self.assemblies
    }

    pub fn timings(&self) -> StepTimings {
        self.timings
    }

    pub fn reset_counters(&mut self) {
        self.assemblies = 0;
        self.timings = StepTimings::default();
    }

    /// Drops the cached operator so the next step assembles from scratch.
    pub fn clear_cache(&mut self) {
        self.cached = None;
    }

    /// Samples `state` and assembles `C[state]`.
    pub fn assemble(&mut self, state: &StateVector) -> Result<CollisionMatrix> {
        let t0 = Instant::now();
        let data = sample_state(self.mesh, &self.reference, state)?;
        self.timings.setup += t0.elapsed();
        let (c, t) = assemble_collision_timed(self.mesh, &self.reference, &data, &self.params, self.exec)?;
        self.timings.assembly += t;
        self.assemblies += 1;
        Ok(c)
    }

    fn operator_at(&mut self, state: &StateVector) -> Result<CollisionMatrix> {
        if let Some((s, c)) = &self.cached {
            if s == state {
                return Ok(c.clone());
            }
        }
        self.assemble(state)
    }

    /// Frozen-coefficient Newton update from `f_guess`, with `c_guess =
    /// C[f_guess]`. Returns the new iterate, its operator, and the relative
    /// residual at the new iterate.
    pub fn newton_step(
        &mut self,
        f_guess: &StateVector,
        c_guess: &CollisionMatrix,
        f_old: &StateVector,
        c_old: &CollisionMatrix,
        dt: f64,
    ) -> Result<(StateVector, CollisionMatrix, f64)> {
        let r = residual(f_guess, f_old, c_guess, c_old, &self.mass, dt)?;
        let t0 = Instant::now();
        let mass = &self.mass;
        let deltas = self.exec.map_indexed(f_old.num_species(), |a| {
            let lhs = mass.lin_comb(1.0, &c_guess.blocks[a], -0.5 * dt);
            let rhs: Vec<f64> = r[a].iter().map(|v| -v).collect();
            solve_for_species(&lhs, &rhs, a)
        });
        self.timings.solve += t0.elapsed();
        let delta = StateVector::from_species(deltas.into_iter().collect::<Result<Vec<_>>>()?)?;
        let f_next = f_guess.lin_comb(1.0, &delta, 1.0);
        if !f_next.is_finite() {
            return Err(Error::SingularSystem {
                species: 0,
                reason: "Newton update is not finite".into(),
            });
        }
        let c_next = self.assemble(&f_next)?;
        let r_next = residual(&f_next, f_old, &c_next, c_old, &self.mass, dt)?;
        let scale = self.state_scale(f_old);
        Ok((f_next, c_next, norm2(&r_next) / scale))
    }

    fn state_scale(&self, f: &StateVector) -> f64 {
        let mf: Vec<Vec<f64>> = (0..f.num_species()).map(|a| self.mass.mul_vec(f.species(a))).collect();
        let s = norm2(&mf);
        if s > 0.0 {
            s
        } else {
            1.0
        }
    }

    /// Advances `f_old` by one step of size `dt`.
    pub fn step(&mut self, f_old: &StateVector, cfg: &StepConfig) -> Result<(StateVector, usize, f64, bool)> {
        cfg.validate()?;
        let c_old = self.operator_at(f_old)?;
        let mut f = f_old.clone();
        let mut c = c_old.clone();
        let mut res = f64::INFINITY;
        let mut iters = 0;
        while iters < cfg.max_newton {
            let (fn_, cn, r) = self.newton_step(&f, &c, f_old, &c_old, cfg.dt)?;
            f = fn_;
            c = cn;
            res = r;
            iters += 1;
            if res <= cfg.newton_tol {
                break;
            }
        }
        let converged = res <= cfg.newton_tol;
        self.cached = Some((f.clone(), c));
        Ok((f, iters, res, converged))
    }

    /// Steps from `t = 0` to `t_end`; the last step is shortened to land on
    /// `t_end`. `on_step` sees every accepted state, starting with the
    /// initial one (step 0).
    pub fn advance<F>(
        &mut self,
        state: StateVector,
        t_end: f64,
        cfg: &StepConfig,
        mut on_step: F,
    ) -> Result<StateVector>
    where
        F: FnMut(&StepReport, &StateVector) -> Result<()>,
    {
        cfg.validate()?;
        if !(t_end >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "t_end must be non-negative, got {t_end}"
            )));
        }
        let steps = step_count(t_end, cfg.dt);
        on_step(
            &StepReport {
                step: 0,
                t: 0.0,
                newton_iterations: 0,
                residual: 0.0,
                converged: true,
            },
            &state,
        )?;
        let mut f = state;
        let mut t = 0.0;
        for k in 1..=steps {
            let dt = if k == steps { t_end - t } else { cfg.dt };
            let step_cfg = StepConfig { dt, ..*cfg };
            let (next, iters, res, converged) = self.step(&f, &step_cfg)?;
            f = next;
            t = if k == steps { t_end } else { t + dt };
            on_step(
                &StepReport {
                    step: k,
                    t,
                    newton_iterations: iters,
                    residual: res,
                    converged,
                },
                &f,
            )?;
        }
        Ok(f)
    }

    /// [`advance`](Self::advance) recording state and moments at every step.
    pub fn advance_recording(
        &mut self,
        state: StateVector,
        t_end: f64,
        cfg: &StepConfig,
        species: &[Species],
    ) -> Result<Vec<TrajectoryPoint>> {
        let mesh = self.mesh;
        let reference = self.reference.clone();
        let mut out = Vec::new();
        self.advance(state, t_end, cfg, |rep, f| {
            out.push(TrajectoryPoint {
                t: rep.t,
                state: f.clone(),
                moments: moments(mesh, &reference, f, species)?,
            });
            Ok(())
        })?;
        Ok(out)
    }
}

/// Number of steps of size at most `dt` needed to reach `t_end`.
pub fn step_count(t_end: f64, dt: f64) -> usize {
    if t_end <= 0.0 {
        return 0;
    }
    let n = t_end / dt;
    let rounded = n.round();
    if (n - rounded).abs() <= 1e-9 * n.max(1.0) {
        rounded as usize
    } else {
        n.ceil() as usize
    }
}
