//! The stacked period system.
//!
//! Residual order (29 rows):
//!
//! | row | condition |
//! |----:|-----------|
//! | 0 | marginal utility `C^{-σ} - λ` |
//! | 1, 2 | labour FOCs `-κ + λ W_s + ν` for h, f |
//! | 3 | money FOC `χ - λ + β λ' (1+R)` |
//! | 4 | borrowing FOC `-χ + γ + λ - β i λ'`, `i = ω_h^ξ R` |
//! | 5, 6 | demand curves for f, h |
//! | 7, 8 | production h, f |
//! | 9, 10 | wage bills h, f |
//! | 11, 12 | land rents h, f |
//! | 13, 14 | capital h, f (log partial adjustment toward `φ P Y / i^P`) |
//! | 15 | single land price |
//! | 16 | externality |
//! | 17 | capital accumulation |
//! | 18 | interest-rate rule with policy shock |
//! | 19 | goods clearing |
//! | 20 | labour clearing |
//! | 21 | land clearing |
//! | 22 | household leverage |
//! | 23 | government leverage |
//! | 24 | public investment rule |
//! | 25 | deficit |
//! | 26 | public stock ledger |
//! | 27 | household budget, stationary form |
//! | 28 | mortgage principal `B = (1-θ) P_h Y_h` |
//!
//! Row 3 is not part of the solved system: with the money weight calibrated it
//! holds at the steady state by construction, and money balances are pinned
//! by the budget instead.

use crate::loan_contracts::{annuity_factor, government_leverage_unchecked, producer_rate_unchecked, refi_leverage};
use crate::params::ModelParams;

use super::equations::{payment_factor_frozen, production};
use super::state::EconomyState;

pub const N_RESIDUALS: usize = 29;
/// Index of the money condition, excluded from the solved system.
pub const MONEY_ROW: usize = 3;

pub const RESIDUAL_NAMES: [&str; N_RESIDUALS] = [
    "marginal_utility",
    "labor_foc_h",
    "labor_foc_f",
    "money_foc",
    "borrowing_foc",
    "demand_f",
    "demand_h",
    "production_h",
    "production_f",
    "wage_h",
    "wage_f",
    "land_rent_h",
    "land_rent_f",
    "capital_h",
    "capital_f",
    "land_price",
    "externality",
    "capital_accumulation",
    "rate_rule",
    "goods_clearing",
    "labor_clearing",
    "land_clearing",
    "household_leverage",
    "government_leverage",
    "investment_rule",
    "deficit",
    "public_stock",
    "household_budget",
    "mortgage_principal",
];

/// Exogenous drivers of one period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drivers {
    pub theta: f64,
    pub mu: f64,
    pub xi: f64,
    /// Latent rate-policy state this period and last.
    pub x_r: f64,
    pub x_r_prev: f64,
}

impl Drivers {
    pub fn steady(params: &ModelParams) -> Self {
        Self {
            theta: params.theta_bar,
            mu: params.mu_bar,
            xi: params.xi_bar,
            x_r: 0.0,
            x_r_prev: 0.0,
        }
    }
}

/// Quantities fixed outside the period system.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Anchors {
    /// Money utility weight; `None` takes it from the money FOC at the iterate.
    pub chi: Option<f64>,
    /// Output level the rate rule targets; `None` uses current output.
    pub gdp_bar: Option<f64>,
}

/// Evaluate all residuals into `out` (length [`N_RESIDUALS`]).
///
/// `next` supplies expected next-period marginal utility.
pub fn step_residuals_into(
    prev: &EconomyState,
    cur: &EconomyState,
    next: &EconomyState,
    drv: &Drivers,
    params: &ModelParams,
    anchors: &Anchors,
    out: &mut [f64],
) {
    let p = params;
    let s = cur;
    let lam_next = next.lambda;
    let chi = anchors
        .chi
        .unwrap_or(s.lambda - p.beta * lam_next * (1.0 + s.r));
    let loan_rate = s.omega_h.powf(drv.xi) * s.r;
    let v_h = s.p_h * s.y_h;
    let v_f = s.p_f * s.y_f;
    let a_h = p.labor_share_h();
    let a_f = p.labor_share_f();
    let d = payment_factor_frozen(s.lambda, s.r, p.beta);
    let (omega_g, i_g) = government_leverage_unchecked(s.r, drv.xi);
    let land_value = s.pl_h * s.l_h + s.pl_f * s.l_f;
    let wage_bill = s.w_h * s.n_h + s.w_f * s.n_f;
    let annuity = annuity_factor(i_g, s.omega_g);
    let taxes = p.tax_g * wage_bill + p.tax_q * (v_h + v_f);
    let z = p.capital_adjustment;
    let target_h = p.phi_h * v_h / producer_rate_unchecked(s.r, drv.xi, p.phi_h);
    let target_f = p.phi_f * v_f / producer_rate_unchecked(s.r, drv.xi, p.phi_f);
    let gdp_bar = anchors.gdp_bar.unwrap_or_else(|| s.gdp());
    let rule = p.r_bar
        * (prev.r / p.r_bar).powf(p.rho_r)
        * (s.gdp() / gdp_bar).powf(p.rho_y)
        * (drv.x_r - p.rho_r * drv.x_r_prev).exp();

    out[0] = s.c.powf(-p.sigma) - s.lambda;
    out[1] = -p.kappa + s.lambda * s.w_h + s.nu;
    out[2] = -p.kappa + s.lambda * s.w_f + s.nu;
    out[3] = chi - s.lambda + p.beta * lam_next * (1.0 + s.r);
    out[4] = -chi + s.gamma + s.lambda - p.beta * loan_rate * lam_next;
    out[5] = v_f - p.j_f;
    out[6] = v_h - p.j_h * s.omega_h / d;
    out[7] = s.y_h - production(s.k_h, s.l_h, s.n_h, s.phi, p.phi_h, p.psi_h);
    out[8] = s.y_f - production(s.k_f, s.l_f, s.n_f, s.phi, p.phi_f, p.psi_f);
    out[9] = s.w_h * s.n_h - a_h * v_h;
    out[10] = s.w_f * s.n_f - a_f * v_f;
    out[11] = s.pl_h * s.l_h - p.psi_h * v_h;
    out[12] = s.pl_f * s.l_f - p.psi_f * v_f;
    out[13] = s.k_h.ln() - (1.0 - z) * prev.k_h.ln() - z * target_h.ln();
    out[14] = s.k_f.ln() - (1.0 - z) * prev.k_f.ln() - z * target_f.ln();
    out[15] = s.pl_h - s.pl_f;
    out[16] = s.phi - (p.lambda_p * (s.g - p.delta_k * prev.g_cum)).exp();
    out[17] = s.k_h + s.k_f - (1.0 - p.delta_k) * (prev.k_h + prev.k_f) - s.i;
    out[18] = s.r - rule;
    out[19] = s.y_h + s.y_f - s.c - s.i - s.g;
    out[20] = s.n_h + s.n_f - p.labor_supply;
    out[21] = s.l_h + s.l_f - p.land_supply;
    out[22] = s.omega_h - refi_leverage(drv.theta, s.r, drv.xi, drv.mu);
    out[23] = s.omega_g - omega_g;
    out[24] = s.g - p.gamma_d * land_value * (s.omega_g - annuity);
    out[25] = s.deficit - (s.g + land_value * annuity - land_value * s.omega_g - taxes);
    out[26] = s.g_cum - ((1.0 - p.delta_k) * prev.g_cum + s.g);
    out[27] = s.c + v_h / (s.r * s.omega_h) + v_f + drv.theta * v_h + loan_rate * s.b
        - s.r * s.m
        - s.b
        - wage_bill;
    out[28] = s.b - (1.0 - drv.theta) * v_h;
}

/// Allocating wrapper around [`step_residuals_into`].
pub fn step_residuals(
    prev: &EconomyState,
    cur: &EconomyState,
    next: &EconomyState,
    drv: &Drivers,
    params: &ModelParams,
    anchors: &Anchors,
) -> Vec<f64> {
    let mut out = vec![0.0; N_RESIDUALS];
    step_residuals_into(prev, cur, next, drv, params, anchors, &mut out);
    out
}

/// Infinity norm; any non-finite entry yields `inf`.
pub fn inf_norm(r: &[f64]) -> f64 {
    r.iter().try_fold(0.0f64, |m, &x| if x.is_finite() { Some(m.max(x.abs())) } else { None })
        .unwrap_or(f64::INFINITY)
}
