//! Conservative finite-element discretization of the multi-species Landau
//! collision operator in axisymmetric velocity coordinates `(r, z)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`mesh`]: uniform and quadtree-adapted Q2 meshes with hanging-node constraints.
//! * [`fem`]: reference element, mass matrix and the structure-of-arrays sampling
//!   of the state at every global quadrature point.
//! * [`kernel`]: Landau tensors, complete elliptic integrals and the fused
//!   O(N²) inner loop.
//! * [`assembly`]: element transforms and the global collision matrices.
//! * [`solver`]: Crank–Nicolson stepping with a frozen-coefficient Newton iteration.
//! * [`physics`]: species, collision frequencies, Maxwellian initial states and moments.
//!
//! [`reference`] holds slow, independent implementations used to check the
//! fast paths.

#![allow(
    clippy::excessive_precision,
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop
)]

pub mod assembly;
pub mod error;
pub mod exec;
pub mod fem;
pub mod kernel;
pub mod mesh;
pub mod physics;
pub mod reference;
pub mod solver;
pub mod sparse;
pub mod vtk;

pub use error::{Error, Result};
pub use exec::Execution;
