//! Batch front-end for the Landau collision solver: relaxation runs, the
//! Cartesian convergence study and the step-cost benchmark.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bench;
pub mod config;
pub mod converge;
pub mod error;
pub mod output;
pub mod run;

pub use config::RunConfig;
pub use error::{CliError, Result};
