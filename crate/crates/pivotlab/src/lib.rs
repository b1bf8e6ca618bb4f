//! Fixed pivot sectional discretization of the truncated aggregation
//! population balance equation, plus a convergence laboratory for
//! measuring experimental orders of convergence on five mesh families.

// `!(x > 0.0)` is used deliberately in validation code so NaN fails too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod convergence_lab;
pub mod error;
pub mod fixed_pivot;
pub mod grid;
pub mod initial_condition;
pub mod kernel;
pub mod oracles;
pub mod quadrature;
pub mod state;
pub mod time_integrator;

pub use error::{PivotError, Result};
pub use grid::{Grid, MeshFamily};
pub use kernel::{KernelKind, KernelSpec};
pub use state::StateVector;
