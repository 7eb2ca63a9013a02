//! Mortgage-contract algebra: optimal term, leverage and loan-rate premia for
//! households, the local government and producers.
//!
//! Leverage `ω` here is total contract value over the equal per-period payment,
//! not a debt/equity ratio. The lender's rate is `i = f(ω)·R` with premium
//! `f(ω) = ω^ξ`.

use std::f64::consts::E;

use crate::error::{ModelError, Result};

/// Validated contract inputs. Construction rejects anything outside
/// `θ ∈ [0,1)`, `R > 0`, `ξ ∈ (0,1)`, `μ ∈ [0,1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractInputs {
    down_payment: f64,
    base_rate: f64,
    premium_coeff: f64,
    refinance_ratio: f64,
}

impl ContractInputs {
    pub fn new(down_payment: f64, base_rate: f64, premium_coeff: f64, refinance_ratio: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&down_payment) {
            return Err(ModelError::InvalidParameter {
                name: "down_payment",
                reason: format!("{down_payment} not in [0,1)"),
            });
        }
        if !(base_rate > 0.0 && base_rate.is_finite()) {
            return Err(ModelError::InvalidParameter {
                name: "base_rate",
                reason: format!("{base_rate} must be positive"),
            });
        }
        if !(premium_coeff > 0.0 && premium_coeff < 1.0) {
            return Err(ModelError::InvalidParameter {
                name: "premium_coeff",
                reason: format!("{premium_coeff} not in (0,1)"),
            });
        }
        if !(0.0..1.0).contains(&refinance_ratio) {
            return Err(ModelError::InvalidParameter {
                name: "refinance_ratio",
                reason: format!("{refinance_ratio} not in [0,1)"),
            });
        }
        Ok(Self {
            down_payment,
            base_rate,
            premium_coeff,
            refinance_ratio,
        })
    }

    pub fn down_payment(&self) -> f64 {
        self.down_payment
    }
    pub fn base_rate(&self) -> f64 {
        self.base_rate
    }
    pub fn premium_coeff(&self) -> f64 {
        self.premium_coeff
    }
    pub fn refinance_ratio(&self) -> f64 {
        self.refinance_ratio
    }
}

/// Leverage, loan rate and the (real-valued) optimal term of a contract.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeverageResult {
    pub leverage: f64,
    pub loan_rate: f64,
    pub term: f64,
}

/// Continuous optimal term `T* = 1/i`.
pub fn optimal_term(rate: f64) -> Result<f64> {
    if !(rate > 0.0) {
        return Err(ModelError::Domain(format!("optimal term needs a positive rate, got {rate}")));
    }
    Ok(1.0 / rate)
}

/// Leverage of an equal-instalment contract of term `term` at rate `rate`:
/// `T / ((1-θ)(1+i)^T)`.
pub fn contract_leverage(down_payment: f64, rate: f64, term: f64) -> f64 {
    term / ((1.0 - down_payment) * (1.0 + rate).powf(term))
}

/// Household loan rate once the premium feedback `i = ω^ξ R` is closed with
/// `ω ≈ 1/((1-θ) e i)`.
pub fn household_loan_rate(c: &ContractInputs) -> f64 {
    let xi = c.premium_coeff;
    let k = xi / (1.0 + xi);
    c.base_rate.powf(1.0 / (1.0 + xi)) * (1.0 / ((1.0 - c.down_payment) * E)).powf(k)
}

/// Household leverage at the optimal term, with the premium feedback closed.
///
/// `ω = (1-θ)^{ξ/(1+ξ)-1} · e^{ξ/(1+ξ)-1} · R^{-1/(1+ξ)}`, which is exactly
/// `1/((1-θ) e i)` at the loan rate of [`household_loan_rate`], so `i = ω^ξ R`
/// holds identically. The refinancing ratio is ignored.
pub fn household_leverage(c: &ContractInputs) -> LeverageResult {
    let xi = c.premium_coeff;
    let k = xi / (1.0 + xi);
    let leverage = (1.0 - c.down_payment).powf(k - 1.0) * (k - 1.0).exp() * c.base_rate.powf(-1.0 / (1.0 + xi));
    let loan_rate = household_loan_rate(c);
    LeverageResult {
        leverage,
        loan_rate,
        term: 1.0 / loan_rate,
    }
}

/// Household leverage with a refinancing channel:
/// `(1-θ)^{-1/(1+ξ)} · e^{-1/(1-ξ)} · R^{-1/(1+ξ)} · (1-μ)^{-ξ/(1+ξ)}`.
///
/// This is the form the equilibrium uses for `ω_h`.
pub fn household_leverage_with_refi(c: &ContractInputs) -> f64 {
    refi_leverage(c.down_payment, c.base_rate, c.premium_coeff, c.refinance_ratio)
}

/// Unchecked kernel of [`household_leverage_with_refi`] for hot loops whose
/// inputs are already known to be in-domain.
#[inline]
pub fn refi_leverage(theta: f64, rate: f64, xi: f64, mu: f64) -> f64 {
    let inv = 1.0 / (1.0 + xi);
    (1.0 - theta).powf(-inv) * (-1.0 / (1.0 - xi)).exp() * rate.powf(-inv) * (1.0 - mu).powf(-xi * inv)
}

/// Fiscal leverage and loan rate of the government's zero-down-payment
/// contract: `ω_G = e^{-1-ξ/(1-ξ)} R^{-1/(1+ξ)}`, `i_G = R^{1/(1+ξ)} e^{-ξ/(1+ξ)}`.
pub fn government_leverage(rate: f64, xi: f64) -> Result<(f64, f64)> {
    check_rate_coeff(rate, xi)?;
    Ok(government_leverage_unchecked(rate, xi))
}

#[inline]
pub(crate) fn government_leverage_unchecked(rate: f64, xi: f64) -> (f64, f64) {
    let inv = 1.0 / (1.0 + xi);
    let omega = (-1.0 - xi / (1.0 - xi)).exp() * rate.powf(-inv);
    let i_g = rate.powf(inv) * (-xi * inv).exp();
    (omega, i_g)
}

/// Producer borrowing rate solving `i = R (i/φ)^ξ`: `i^P = (R/φ^ξ)^{1/(1-ξ)}`.
pub fn producer_capital_rate(rate: f64, xi: f64, capital_share: f64) -> Result<f64> {
    check_rate_coeff(rate, xi)?;
    if !(capital_share > 0.0 && capital_share < 1.0 + f64::EPSILON) {
        return Err(ModelError::Domain(format!("capital share {capital_share} not in (0,1]")));
    }
    Ok(producer_rate_unchecked(rate, xi, capital_share))
}

#[inline]
pub(crate) fn producer_rate_unchecked(rate: f64, xi: f64, capital_share: f64) -> f64 {
    (rate / capital_share.powf(xi)).powf(1.0 / (1.0 - xi))
}

fn check_rate_coeff(rate: f64, xi: f64) -> Result<()> {
    if !(rate > 0.0) {
        return Err(ModelError::Domain(format!("base rate must be positive, got {rate}")));
    }
    if !(xi > 0.0 && xi < 1.0) {
        return Err(ModelError::Domain(format!("premium coefficient {xi} not in (0,1)")));
    }
    Ok(())
}

/// Present value of an annuity paying 1 for `periods` (real-valued) periods,
/// first payment one period ahead: `(1 - (1+i)^{-n}) / i`.
pub fn annuity_factor(rate: f64, periods: f64) -> f64 {
    if rate.abs() < 1e-12 {
        return periods;
    }
    (1.0 - (1.0 + rate).powf(-periods)) / rate
}
