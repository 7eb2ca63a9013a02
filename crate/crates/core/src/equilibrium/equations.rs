//! Per-period structural relations shared by the residual system, the
//! simulator and the decompositions.

use crate::error::{ModelError, Result};
use crate::loan_contracts::annuity_factor;
use crate::params::ModelParams;

use super::state::EconomyState;

const TERM_FLOOR: f64 = 1e-12;
const MAX_TERMS: usize = 400;

/// Discounted payment factor `Σ_k β^k λ_k / (1+R_k)^k`.
///
/// Paths are held at their last value beyond their end. Summation stops once
/// a term falls below 1e-12 or after 400 terms.
pub fn discounted_payment_factor(lambda_path: &[f64], rate_path: &[f64], beta: f64) -> Result<f64> {
    if lambda_path.is_empty() || rate_path.is_empty() {
        return Err(ModelError::Domain("empty path".into()));
    }
    if !(0.0..1.0).contains(&beta) {
        return Err(ModelError::Domain(format!("beta {beta} not in [0,1)")));
    }
    let at = |path: &[f64], k: usize| path[k.min(path.len() - 1)];
    let lam_tail = *lambda_path.last().unwrap();
    let r_tail = *rate_path.last().unwrap();
    if lam_tail.abs() > 0.0 && beta / (1.0 + r_tail) >= 1.0 {
        return Err(ModelError::Divergent(format!(
            "beta/(1+R) = {} >= 1 with non-vanishing lambda",
            beta / (1.0 + r_tail)
        )));
    }
    let mut sum = 0.0;
    for k in 0..MAX_TERMS {
        let r = at(rate_path, k);
        if r <= -1.0 {
            return Err(ModelError::Domain(format!("rate {r} <= -1 at k={k}")));
        }
        let term = beta.powi(k as i32) * at(lambda_path, k) / (1.0 + r).powi(k as i32);
        if !term.is_finite() {
            return Err(ModelError::Divergent(format!("non-finite term at k={k}")));
        }
        sum += term;
        if term.abs() < TERM_FLOOR {
            break;
        }
    }
    Ok(sum)
}

/// Discount sum `1/(1-β/(1+R))` for a constant rate.
pub fn rate_discount_sum(beta: f64, rate: f64) -> f64 {
    1.0 / (1.0 - beta / (1.0 + rate))
}

/// Closed-form discounted payment factor with `λ` and `R` frozen at current values.
pub fn payment_factor_frozen(lambda: f64, rate: f64, beta: f64) -> f64 {
    lambda * rate_discount_sum(beta, rate)
}

/// Sector market values `(P_f Y_f, P_h Y_h)` given a payment factor.
///
/// `P_h Y_h = j_h ω_h / D`: the housing demand condition with the down-payment
/// term netted against the credit multiplier.
pub fn demand_curves_with_factor(payment_factor: f64, omega_h: f64, params: &ModelParams) -> Result<(f64, f64)> {
    if !(payment_factor > 0.0) {
        return Err(ModelError::Domain(format!("payment factor {payment_factor} must be positive")));
    }
    Ok((params.j_f, params.j_h * omega_h / payment_factor))
}

/// Sector market values implied by a state under frozen expectations.
pub fn demand_curves(state: &EconomyState, params: &ModelParams) -> Result<(f64, f64)> {
    let d = payment_factor_frozen(state.lambda, state.r, params.beta);
    demand_curves_with_factor(d, state.omega_h, params)
}

/// Cobb-Douglas output `Φ K^φ L^ψ n^{1-φ-ψ}`.
pub fn production(capital: f64, land: f64, labor: f64, phi_mult: f64, phi: f64, psi: f64) -> f64 {
    phi_mult * capital.powf(phi) * land.powf(psi) * labor.powf(1.0 - phi - psi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sector {
    Housing,
    Other,
}

/// Factor prices `(W, PL, PK)` from marginal products.
pub fn factor_prices(state: &EconomyState, params: &ModelParams, sector: Sector) -> Result<(f64, f64, f64)> {
    let (p, y, n, l, k, phi, psi) = match sector {
        Sector::Housing => (state.p_h, state.y_h, state.n_h, state.l_h, state.k_h, params.phi_h, params.psi_h),
        Sector::Other => (state.p_f, state.y_f, state.n_f, state.l_f, state.k_f, params.phi_f, params.psi_f),
    };
    marginal_products(p * y, k, l, n, phi, psi)
}

/// `(W, PL, PK)` for revenue `v = P·Y` and factor quantities.
pub fn marginal_products(v: f64, k: f64, l: f64, n: f64, phi: f64, psi: f64) -> Result<(f64, f64, f64)> {
    if n == 0.0 || l == 0.0 || k == 0.0 {
        return Err(ModelError::Domain("zero factor quantity".into()));
    }
    Ok(((1.0 - phi - psi) * v / n, psi * v / l, phi * v / k))
}

/// Productivity multiplier `Φ = exp(λ_P (G - δ_k G_cum))`.
pub fn externality(g: f64, g_cum: f64, lambda_p: f64, delta_k: f64) -> f64 {
    (lambda_p * (g - delta_k * g_cum)).exp()
}

/// Stock entering the externality: last period's, recovered from the ledger
/// `G_cum = (1-δ_k) G_cum_prev + G`.
pub fn prior_public_stock(state: &EconomyState, delta_k: f64) -> f64 {
    (state.g_cum - state.g) / (1.0 - delta_k)
}

/// Recover `λ_P` from a goods-clearing state as
/// `[ln(C+I+G) - ln(Y_h^raw + Y_f^raw)] / (G - δ_k G_cum_prev)`, where raw
/// output is production at `Φ = 1`.
pub fn implied_lambda_p(state: &EconomyState, params: &ModelParams) -> Result<f64> {
    let denom = state.g - params.delta_k * prior_public_stock(state, params.delta_k);
    if denom.abs() < 1e-12 {
        return Err(ModelError::Singular(format!("net public investment {denom:.3e} is zero")));
    }
    let raw = production(state.k_h, state.l_h, state.n_h, 1.0, params.phi_h, params.psi_h)
        + production(state.k_f, state.l_f, state.n_f, 1.0, params.phi_f, params.psi_f);
    let absorbed = state.c + state.i + state.g;
    if !(raw > 0.0 && absorbed > 0.0) {
        return Err(ModelError::Domain("non-positive output or absorption".into()));
    }
    Ok((absorbed.ln() - raw.ln()) / denom)
}

/// Interest-rate rule `R = R̄ (R_prev/R̄)^{ρ_R} (gdp/gdp̄)^{ρ_Y}`.
pub fn taylor_rate(r_prev: f64, gdp: f64, gdp_bar: f64, params: &ModelParams) -> f64 {
    params.r_bar * (r_prev / params.r_bar).powf(params.rho_r) * (gdp / gdp_bar).powf(params.rho_y)
}

/// `G + A·annuity(i_G, ω_G) - A·ω_G` for land value `A`.
pub fn budget_slack(g: f64, land_value: f64, omega_g: f64, i_g: f64) -> f64 {
    g + land_value * annuity_factor(i_g, omega_g) - land_value * omega_g
}

/// Government borrowing check: negative is slack, positive a violation.
/// The loan rate `i_G` is implied by the state's base rate and `ξ`.
pub fn government_budget_check(state: &EconomyState, xi: f64) -> Result<f64> {
    let (_, i_g) = crate::loan_contracts::government_leverage(state.r, xi)?;
    Ok(budget_slack(state.g, state.land_value(), state.omega_g, i_g))
}

/// Public investment rule `G = γ_d · A · (ω_G - annuity(i_G, ω_G))`.
pub fn fiscal_rule(land_value: f64, omega_g: f64, i_g: f64, gamma_d: f64) -> f64 {
    gamma_d * land_value * (omega_g - annuity_factor(i_g, omega_g))
}

/// Tax receipts on labour income and sector revenue.
pub fn tax_revenue(state: &EconomyState, params: &ModelParams) -> f64 {
    params.tax_g * state.wage_bill() + params.tax_q * (state.value_h() + state.value_f())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn payment_factor_geometric() {
        let d = discounted_payment_factor(&[1.0], &[0.032], 0.98).unwrap();
        // 400-term cap: the omitted tail is b^400 / (1 - b)
        let b: f64 = 0.98 / 1.032;
        let tail = b.powi(400) / (1.0 - b);
        assert!((d + tail - 19.846_153_846_153_846).abs() < 1e-12);
        assert!((d - 19.85).abs() < 0.01);
        assert_relative_eq!(payment_factor_frozen(1.0, 0.032, 0.98), 19.846_153_846_153_846, max_relative = 1e-14);
    }

    #[test]
    fn payment_factor_decaying_lambda_matches_long_sum() {
        let lam: Vec<f64> = (0..300).map(|k| 0.9f64.powi(k)).collect();
        let rates: Vec<f64> = (0..300).map(|k| 0.03 + 0.001 * (k % 7) as f64).collect();
        let beta = 0.98;
        let got = discounted_payment_factor(&lam, &rates, beta).unwrap();
        let mut direct = 0.0;
        for k in 0..1_000_000usize {
            let l = lam[k.min(299)];
            let r = rates[k.min(299)];
            let t = beta.powi(k as i32) * l / (1.0 + r).powi(k as i32);
            if t == 0.0 {
                break;
            }
            direct += t;
        }
        assert!((got - direct).abs() < 1e-10, "{got} vs {direct}");
    }

    #[test]
    fn payment_factor_edge_cases() {
        assert_eq!(discounted_payment_factor(&[0.7, 0.2], &[0.03], 0.0).unwrap(), 0.7);
        assert!(matches!(
            discounted_payment_factor(&[1.0], &[-0.05], 0.98),
            Err(ModelError::Divergent(_))
        ));
        assert!(discounted_payment_factor(&[], &[0.03], 0.9).is_err());
    }

    #[test]
    fn demand_examples() {
        let p = ModelParams::default();
        let (vf, vh) = demand_curves_with_factor(19.85, 1.0, &p).unwrap();
        assert_eq!(vf, 0.2);
        assert!((vh - 0.010076).abs() < 1e-5);
        let d = rate_discount_sum(0.98, 0.032);
        let (_, vh) = demand_curves_with_factor(d, 1.0, &p).unwrap();
        assert_relative_eq!(vh, 0.010_077_519_379_844_961, max_relative = 1e-13);
        let mut p2 = p.clone();
        p2.j_h *= 2.0;
        let (_, vh2) = demand_curves_with_factor(d, 1.0, &p2).unwrap();
        assert_relative_eq!(vh2, 2.0 * vh, max_relative = 1e-15);
        assert!(demand_curves_with_factor(0.0, 1.0, &p).is_err());
    }

    #[test]
    fn production_examples() {
        assert_eq!(production(1.0, 1.0, 1.0, 1.0, 0.4, 0.3), 1.0);
        assert_eq!(production(1.0, 1.0, 1.0, 2.0, 0.4, 0.3), 2.0);
        assert_relative_eq!(production(2.0, 1.0, 1.0, 1.0, 0.4, 0.3), 1.319_507_910_772_894_3, max_relative = 1e-14);
    }

    #[test]
    fn factor_price_examples() {
        let (w, _, _) = marginal_products(1.0, 1.0, 1.0, 1.0, 0.4, 0.3).unwrap();
        assert_relative_eq!(w, 0.3, max_relative = 1e-14);
        let (k, l, n) = (2.0, 2.0, 2.0);
        let y = production(k, l, n, 1.0, 0.4, 0.3);
        let (w, pl, pk) = marginal_products(y, k, l, n, 0.4, 0.3).unwrap();
        assert_relative_eq!(w * n + pl * l + pk * k, y, max_relative = 1e-14);
        let (_, pl, _) = marginal_products(1.0, 1.0, 1.0, 1.0, 0.4, 0.0).unwrap();
        assert_eq!(pl, 0.0);
        assert!(marginal_products(1.0, 1.0, 1.0, 0.0, 0.4, 0.3).is_err());
    }

    #[test]
    fn externality_examples() {
        assert_eq!(externality(0.1, 10.0, 0.3, 0.01), 1.0);
        assert!(externality(1.0, 10.0, -0.1, 0.01) < 1.0);
        assert_relative_eq!(externality(1.0, 10.0, 0.1, 0.01), 1.094_174_283_705_210_4, max_relative = 1e-14);
    }

    fn clearing_state(lambda_p: f64, params: &ModelParams) -> EconomyState {
        let g_prev_stock = 4.0;
        let g = 0.3;
        let phi = externality(g, g_prev_stock, lambda_p, params.delta_k);
        let (k_h, k_f, l_h, n_h) = (3.0, 2.5, 0.6, 0.55);
        let y_h = production(k_h, l_h, n_h, phi, params.phi_h, params.psi_h);
        let y_f = production(k_f, 1.0 - l_h, 1.0 - n_h, phi, params.phi_f, params.psi_f);
        let i = 0.05;
        EconomyState {
            k_h,
            k_f,
            l_h,
            l_f: 1.0 - l_h,
            n_h,
            n_f: 1.0 - n_h,
            y_h,
            y_f,
            phi,
            g,
            i,
            c: y_h + y_f - i - g,
            g_cum: (1.0 - params.delta_k) * g_prev_stock + g,
            ..Default::default()
        }
    }

    #[test]
    fn lambda_p_round_trip_and_singularity() {
        let p = ModelParams::default();
        let s = clearing_state(0.05, &p);
        assert!((implied_lambda_p(&s, &p).unwrap() - 0.05).abs() < 1e-10);
        let s0 = clearing_state(0.0, &p);
        assert!(implied_lambda_p(&s0, &p).unwrap().abs() < 1e-14);

        let mut s = clearing_state(0.0, &p);
        s.g_cum = (1.0 - p.delta_k) * (s.g / p.delta_k) + s.g;
        assert!(matches!(implied_lambda_p(&s, &p), Err(ModelError::Singular(_))));
    }

    #[test]
    fn taylor_examples() {
        let p = ModelParams::default();
        assert_relative_eq!(taylor_rate(p.r_bar, 2.0, 2.0, &p), p.r_bar, max_relative = 1e-15);
        assert_relative_eq!(
            taylor_rate(p.r_bar, 2.2, 2.0, &p),
            p.r_bar * 1.000_676_931_291_251_6,
            max_relative = 1e-13
        );
        let mut inert = p.clone();
        inert.rho_r = 1.0;
        inert.rho_y = 0.0;
        assert_relative_eq!(taylor_rate(0.05, 3.0, 2.0, &inert), 0.05, max_relative = 1e-15);
    }

    #[test]
    fn budget_examples() {
        let (omega_g, i_g) = (9.84, 0.0348);
        assert!(budget_slack(0.0, 0.3, omega_g, i_g) < 0.0);
        assert_relative_eq!(budget_slack(0.2, 0.3, omega_g, 1e-14), 0.2, max_relative = 1e-9);

        // bisection oracle for the binding investment level
        let (mut lo, mut hi) = (0.0, 10.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if budget_slack(mid, 0.3, omega_g, i_g) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert!(budget_slack(0.5 * (lo + hi), 0.3, omega_g, i_g).abs() < 1e-10);

        let grid: Vec<f64> = (0..50).map(|k| budget_slack(k as f64 * 0.01, 0.3, omega_g, i_g)).collect();
        assert!(grid.windows(2).all(|w| w[1] > w[0]));
    }
}
