//! Structural equations, the period residual system and the steady-state solver.

pub mod equations;
pub mod residuals;
pub mod solver;
pub mod state;

pub use equations::{
    demand_curves, discounted_payment_factor, externality, factor_prices, government_budget_check, implied_lambda_p,
    production, taylor_rate, Sector,
};
pub use residuals::{step_residuals, Anchors, Drivers, N_RESIDUALS, RESIDUAL_NAMES};
pub use solver::{solve_steady_state, SteadyState};
pub use state::EconomyState;
