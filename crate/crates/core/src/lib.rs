//! Simulation and analysis engine for a two-sector DSGE model in which a
//! leveraged asset (housing, the "loan good") acts as a monetary reservoir.
//!
//! The crate is organised bottom-up:
//!
//! - [`loan_contracts`]: closed-form mortgage, fiscal and producer leverage algebra.
//! - [`params`]: the calibration record and its flat `key = value` config format.
//! - [`equilibrium`]: per-period structural equations, the residual system and
//!   the damped-Newton steady-state solver.
//! - [`shocks`] and [`simulation`]: seeded AR(1) shock panels and model paths.
//! - [`econometrics`]: VAR/BIC, Cholesky and local-projection IRFs, FEVD,
//!   random-walk Metropolis estimation and the Fourier amplitude-rank statistic.
//! - [`decomposition`]: growth-rate decompositions of premia, allocations and fiscal flows.
//! - [`growth`]: the endogenous-growth (R&D labour) side model.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decomposition;
pub mod econometrics;
pub mod equilibrium;
pub mod error;
pub mod growth;
pub mod loan_contracts;
pub mod params;
pub mod shocks;
pub mod simulation;

pub use equilibrium::{solve_steady_state, EconomyState, SteadyState};
pub use error::{ModelError, Result};
pub use params::ModelParams;
pub use shocks::{ShockPanel, ShockProcess, ShockSpec};
pub use simulation::{impulse_path, simulate, SimPath};

/// Growth rate `x_t / x_{t-1} - 1`, the `%(x)` operator used throughout.
#[inline]
pub fn pct(prev: f64, cur: f64) -> f64 {
    cur / prev - 1.0
}
