//! Reversed-barrier Skorokhod embeddings for Brownian motion.
//!
//! Given a target law `μ` with no atom at the origin, [`solver::solve`]
//! computes a pair of step functions `b` (nondecreasing, positive) and `c`
//! (nonincreasing, negative) such that `B` stopped at the first time it is
//! above `b(t)` or below `c(t)` has law `μ`. The [`verify`] module checks the
//! result by simulation.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod float_repr;
pub mod kernels;
pub mod law;
pub mod quadrature;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use kernels::KernelConfig;
pub use law::{DiscreteLaw, SupportCase, TargetLawSpec};
pub use solver::{Barrier, Breakpoint, SolveReport, SolverConfig};

pub use verify::{EmbedReport, Scheme, SimConfig};
