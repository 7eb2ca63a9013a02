//! Damped Newton with a finite-difference Jacobian, a chord variant that
//! reuses a factorisation across periods, and the steady-state solve.

use log::{debug, warn};
use nalgebra::{DMatrix, DVector, LU};
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::loan_contracts::{annuity_factor, government_leverage_unchecked, producer_rate_unchecked, refi_leverage};
use crate::params::ModelParams;

use super::equations::{payment_factor_frozen, production};
use super::residuals::{inf_norm, step_residuals_into, Anchors, Drivers, MONEY_ROW, N_RESIDUALS};
use super::state::EconomyState;

/// Iteration controls for [`damped_newton`].
#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub max_iter: usize,
    /// Stop once the residual infinity norm is below this.
    pub tol: f64,
    pub min_damping: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            tol: 1e-12,
            min_damping: 1e-10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub x: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Forward-difference Jacobian of `f` at `x`, given `fx = f(x)`.
pub fn fd_jacobian<F>(f: &F, x: &[f64], fx: &[f64]) -> DMatrix<f64>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = x.len();
    let m = fx.len();
    let mut jac = DMatrix::zeros(m, n);
    let mut xp = x.to_vec();
    let mut fp = vec![0.0; m];
    for j in 0..n {
        let h = 1e-7 * x[j].abs().max(1e-4);
        xp[j] = x[j] + h;
        let h = xp[j] - x[j];
        f(&xp, &mut fp);
        for i in 0..m {
            jac[(i, j)] = (fp[i] - fx[i]) / h;
        }
        xp[j] = x[j];
    }
    jac
}

/// Damped Newton on a square system. The step length halves whenever the
/// residual norm fails to decrease or turns non-finite.
pub fn damped_newton<F>(f: F, x0: &[f64], opts: &NewtonOptions) -> Result<NewtonOutcome>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = vec![0.0; n];
    f(&x, &mut fx);
    let mut norm = inf_norm(&fx);
    let mut best = norm;
    let mut trial = vec![0.0; n];
    let mut ftrial = vec![0.0; n];
    for iter in 0..opts.max_iter {
        if norm < opts.tol {
            return Ok(NewtonOutcome { x, residual: norm, iterations: iter });
        }
        let jac = fd_jacobian(&f, &x, &fx);
        let step = LU::new(jac)
            .solve(&DVector::from_column_slice(&fx))
            .ok_or_else(|| ModelError::Singular(format!("Jacobian singular at iteration {iter}")))?;
        let mut t = 1.0;
        loop {
            for i in 0..n {
                trial[i] = x[i] - t * step[i];
            }
            f(&trial, &mut ftrial);
            let tn = inf_norm(&ftrial);
            if tn < norm {
                x.copy_from_slice(&trial);
                fx.copy_from_slice(&ftrial);
                norm = tn;
                best = best.min(norm);
                break;
            }
            t *= 0.5;
            if t < opts.min_damping {
                // Accept stagnation at round-off level.
                if norm < 1e3 * opts.tol {
                    return Ok(NewtonOutcome { x, residual: norm, iterations: iter });
                }
                return Err(ModelError::NonConvergence { iterations: iter, residual: best });
            }
        }
    }
    if norm < opts.tol {
        Ok(NewtonOutcome { x, residual: norm, iterations: opts.max_iter })
    } else {
        Err(ModelError::NonConvergence { iterations: opts.max_iter, residual: best })
    }
}

/// Chord iteration with a cached LU factorisation. The factorisation is
/// refreshed at the current iterate when contraction stalls.
pub struct ChordSolver {
    lu: Option<LU<f64, nalgebra::Dyn, nalgebra::Dyn>>,
    pub refreshes: usize,
}

impl Default for ChordSolver {
    fn default() -> Self {
        Self::new()
    }
}

impl ChordSolver {
    pub fn new() -> Self {
        Self { lu: None, refreshes: 0 }
    }

    pub fn solve<F>(&mut self, f: F, x0: &[f64], tol: f64, max_iter: usize) -> Result<NewtonOutcome>
    where
        F: Fn(&[f64], &mut [f64]),
    {
        let n = x0.len();
        let mut x = x0.to_vec();
        let mut fx = vec![0.0; n];
        f(&x, &mut fx);
        let mut norm = inf_norm(&fx);
        let mut fresh = false;
        if self.lu.is_none() {
            self.refresh(&f, &x, &fx);
            fresh = true;
        }
        let mut trial = vec![0.0; n];
        let mut ftrial = vec![0.0; n];
        for iter in 0..max_iter {
            if norm < tol {
                return Ok(NewtonOutcome { x, residual: norm, iterations: iter });
            }
            let step = self
                .lu
                .as_ref()
                .and_then(|lu| lu.solve(&DVector::from_column_slice(&fx)))
                .ok_or_else(|| ModelError::Singular("cached Jacobian singular".into()))?;
            for i in 0..n {
                trial[i] = x[i] - step[i];
            }
            f(&trial, &mut ftrial);
            let tn = inf_norm(&ftrial);
            if tn < 0.5 * norm || (tn < norm && tn < 1e3 * tol) {
                x.copy_from_slice(&trial);
                fx.copy_from_slice(&ftrial);
                norm = tn;
                fresh = false;
            } else if !fresh {
                self.refresh(&f, &x, &fx);
                fresh = true;
            } else {
                // Fresh Jacobian and still no contraction: hand over to damped Newton.
                return damped_newton(&f, &x, &NewtonOptions { tol, ..Default::default() });
            }
        }
        Err(ModelError::NonConvergence { iterations: max_iter, residual: norm })
    }

    fn refresh<F>(&mut self, f: &F, x: &[f64], fx: &[f64])
    where
        F: Fn(&[f64], &mut [f64]),
    {
        self.lu = Some(LU::new(fd_jacobian(f, x, fx)));
        self.refreshes += 1;
    }
}

/// Solved steady state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub state: EconomyState,
    /// Infinity norm of the full residual vector, money condition included.
    pub residual_norm: f64,
    /// Money utility weight in force (calibrated unless supplied).
    pub chi: f64,
    pub iterations: usize,
}

impl SteadyState {
    pub fn anchors(&self) -> Anchors {
        Anchors {
            chi: Some(self.chi),
            gdp_bar: Some(self.state.gdp()),
        }
    }
}

/// Variables that may change sign; all others are solved in logs.
const SIGNED: [&str; 5] = ["M", "I", "gamma", "nu", "deficit"];

fn signed_mask() -> [bool; EconomyState::LEN] {
    let mut mask = [false; EconomyState::LEN];
    for (slot, name) in mask.iter_mut().zip(EconomyState::NAMES) {
        *slot = SIGNED.contains(name);
    }
    mask
}

/// Map a state to solver coordinates (logs of the positive variables).
pub fn encode(state: &EconomyState) -> Vec<f64> {
    let mask = signed_mask();
    state
        .to_vec()
        .into_iter()
        .zip(mask)
        .map(|(v, signed)| if signed { v } else { v.ln() })
        .collect()
}

/// Inverse of [`encode`].
pub fn decode(z: &[f64]) -> EconomyState {
    let mask = signed_mask();
    let mut v = [0.0; EconomyState::LEN];
    for ((slot, &zi), signed) in v.iter_mut().zip(z).zip(mask) {
        *slot = if signed { zi } else { zi.exp() };
    }
    EconomyState::from_slice(&v)
}

/// Reduced residual map in solver coordinates: all rows but the money condition.
pub(crate) fn reduced<'a>(
    full: impl Fn(&EconomyState, &mut [f64]) + 'a,
) -> impl Fn(&[f64], &mut [f64]) + 'a {
    move |z: &[f64], out: &mut [f64]| {
        let s = decode(z);
        let mut r = [0.0; N_RESIDUALS];
        full(&s, &mut r);
        let mut k = 0;
        for (i, v) in r.iter().enumerate() {
            if i != MONEY_ROW {
                out[k] = *v;
                k += 1;
            }
        }
    }
}

/// Documented starting point: symmetric allocation, unit prices, `C = 0.5`,
/// capital consistent with replacement investment.
pub fn initial_guess(params: &ModelParams) -> EconomyState {
    let p = params;
    let c: f64 = 0.5;
    let lambda = c.powf(-p.sigma);
    let k = 1.0;
    let g = 0.1;
    let omega_h = refi_leverage(p.theta_bar, p.r_bar, p.xi_bar, p.mu_bar);
    let (omega_g, _) = government_leverage_unchecked(p.r_bar, p.xi_bar);
    EconomyState {
        c,
        m: 0.0,
        b: 1.0 - p.theta_bar,
        n_h: 0.5 * p.labor_supply,
        n_f: 0.5 * p.labor_supply,
        y_h: 1.0,
        y_f: 1.0,
        p_h: 1.0,
        p_f: 1.0,
        k_h: k,
        k_f: k,
        l_h: 0.5 * p.land_supply,
        l_f: 0.5 * p.land_supply,
        i: 2.0 * p.delta_k * k,
        g,
        phi: 1.0,
        w_h: 1.0,
        w_f: 1.0,
        pl_h: 1.0,
        pl_f: 1.0,
        r: p.r_bar,
        omega_h,
        omega_g,
        lambda,
        gamma: 0.0,
        nu: 0.0,
        deficit: 0.0,
        g_cum: g / p.delta_k,
    }
}

/// Build the state implied by consumption `c` and rate `r` by solving the
/// system recursively. Goods clearing is the only condition left open.
/// With `prev = None` stocks sit at their stationary values.
pub fn assemble_state(
    c: f64,
    r: f64,
    drv: &Drivers,
    prev: Option<&EconomyState>,
    params: &ModelParams,
    chi: Option<f64>,
) -> EconomyState {
    let p = params;
    let lambda = c.powf(-p.sigma);
    let d = payment_factor_frozen(lambda, r, p.beta);
    let omega_h = refi_leverage(drv.theta, r, drv.xi, drv.mu);
    let v_h = p.j_h * omega_h / d;
    let v_f = p.j_f;
    let (a_h, a_f) = (p.labor_share_h(), p.labor_share_f());
    let target_h = p.phi_h * v_h / producer_rate_unchecked(r, drv.xi, p.phi_h);
    let target_f = p.phi_f * v_f / producer_rate_unchecked(r, drv.xi, p.phi_f);
    let z = p.capital_adjustment;
    let (k_h, k_f) = match prev {
        Some(s) => (
            ((1.0 - z) * s.k_h.ln() + z * target_h.ln()).exp(),
            ((1.0 - z) * s.k_f.ln() + z * target_f.ln()).exp(),
        ),
        None => (target_h, target_f),
    };
    let land_h = p.psi_h * v_h;
    let land_f = p.psi_f * v_f;
    let l_h = p.land_supply * land_h / (land_h + land_f);
    let l_f = p.land_supply - l_h;
    let n_h = p.labor_supply * a_h * v_h / (a_h * v_h + a_f * v_f);
    let n_f = p.labor_supply - n_h;
    let (omega_g, i_g) = government_leverage_unchecked(r, drv.xi);
    let annuity = annuity_factor(i_g, omega_g);
    let land_value = land_h + land_f;
    let g = p.gamma_d * land_value * (omega_g - annuity);
    let g_cum_prev = prev.map_or(g / p.delta_k, |s| s.g_cum);
    let phi = (p.lambda_p * (g - p.delta_k * g_cum_prev)).exp();
    let g_cum = (1.0 - p.delta_k) * g_cum_prev + g;
    let y_h = production(k_h, l_h, n_h, phi, p.phi_h, p.psi_h);
    let y_f = production(k_f, l_f, n_f, phi, p.phi_f, p.psi_f);
    let k_prev = prev.map_or(k_h + k_f, |s| s.k_h + s.k_f);
    let i = k_h + k_f - (1.0 - p.delta_k) * k_prev;
    let wage_bill = a_h * v_h + a_f * v_f;
    let taxes = p.tax_g * wage_bill + p.tax_q * (v_h + v_f);
    let deficit = g + land_value * annuity - land_value * omega_g - taxes;
    let b = (1.0 - drv.theta) * v_h;
    let loan_rate = omega_h.powf(drv.xi) * r;
    let m = (c + v_h / (r * omega_h) + v_f + drv.theta * v_h + loan_rate * b - b - wage_bill) / r;
    let chi = chi.unwrap_or(lambda * (1.0 - p.beta * (1.0 + r)));
    let w_h = a_h * v_h / n_h;
    EconomyState {
        c,
        m,
        b,
        n_h,
        n_f,
        y_h,
        y_f,
        p_h: v_h / y_h,
        p_f: v_f / y_f,
        k_h,
        k_f,
        l_h,
        l_f,
        i,
        g,
        phi,
        w_h,
        w_f: a_f * v_f / n_f,
        pl_h: land_h / l_h,
        pl_f: land_f / l_f,
        r,
        omega_h,
        omega_g,
        lambda,
        gamma: chi - lambda + p.beta * loan_rate * lambda,
        nu: p.kappa - lambda * w_h,
        deficit,
        g_cum,
    }
}

/// Solve goods clearing for consumption at a fixed rate by 1-D Newton.
pub fn clear_goods_market(
    r: f64,
    drv: &Drivers,
    prev: Option<&EconomyState>,
    params: &ModelParams,
    chi: Option<f64>,
    c0: f64,
) -> Result<EconomyState> {
    let gap = |c: f64| {
        let s = assemble_state(c, r, drv, prev, params, chi);
        (s.y_h + s.y_f - s.c - s.i - s.g, s)
    };
    let mut c = c0;
    for iter in 0..200 {
        let (g0, s) = gap(c);
        if g0.abs() < 1e-13 {
            return Ok(s);
        }
        let h = 1e-7 * c;
        let (g1, _) = gap(c + h);
        let slope = (g1 - g0) / h;
        let mut step = g0 / slope;
        while !(c - step > 0.0) || !gap(c - step).0.is_finite() {
            step *= 0.5;
            if step.abs() < 1e-300 {
                return Err(ModelError::NonConvergence { iterations: iter, residual: g0.abs() });
            }
        }
        c -= step;
    }
    let (g0, _) = gap(c);
    Err(ModelError::NonConvergence { iterations: 200, residual: g0.abs() })
}

fn steady_system(params: &ModelParams) -> impl Fn(&[f64], &mut [f64]) + '_ {
    let drv = Drivers::steady(params);
    let anchors = Anchors {
        chi: params.chi,
        gdp_bar: None,
    };
    reduced(move |s: &EconomyState, out: &mut [f64]| step_residuals_into(s, s, s, &drv, params, &anchors, out))
}

/// Solve the deterministic steady state.
///
/// Newton runs in [`encode`] coordinates from [`initial_guess`]; if that fails
/// the recursive goods-market solution seeds a second run.
pub fn solve_steady_state(params: &ModelParams) -> Result<SteadyState> {
    params.validate()?;
    let sys = steady_system(params);
    let opts = NewtonOptions::default();
    let outcome = match damped_newton(&sys, &encode(&initial_guess(params)), &opts) {
        Ok(o) => o,
        Err(e) => {
            debug!("newton from default guess failed ({e}); reseeding from recursive solution");
            let drv = Drivers::steady(params);
            let seed = clear_goods_market(params.r_bar, &drv, None, params, params.chi, 1.0)?;
            damped_newton(&sys, &encode(&seed), &opts)?
        }
    };
    let state = decode(&outcome.x);
    let required = state.lambda * (1.0 - params.beta * (1.0 + state.r));
    let chi = params.chi.unwrap_or(required);
    let drv = Drivers::steady(params);
    let mut full = [0.0; N_RESIDUALS];
    let anchors = Anchors {
        chi: Some(chi),
        gdp_bar: Some(state.gdp()),
    };
    step_residuals_into(&state, &state, &state, &drv, params, &anchors, &mut full);
    let residual_norm = inf_norm(&full);
    if params.chi.is_some() && full[MONEY_ROW].abs() > 1e-8 {
        return Err(ModelError::ChiInfeasible { given: chi, required });
    }
    if !(residual_norm < 1e-8) {
        return Err(ModelError::NonConvergence {
            iterations: outcome.iterations,
            residual: residual_norm,
        });
    }
    if chi < 0.0 {
        warn!("calibrated money weight chi = {chi:.6} is negative (beta*(1+R) > 1)");
    }
    Ok(SteadyState {
        state,
        residual_norm,
        chi,
        iterations: outcome.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn newton_solves_small_system() {
        let f = |x: &[f64], out: &mut [f64]| {
            out[0] = x[0] * x[0] - 2.0;
            out[1] = x[0] * x[1] - 1.0;
        };
        let o = damped_newton(f, &[1.0, 1.0], &NewtonOptions::default()).unwrap();
        assert!((o.x[0] - 2f64.sqrt()).abs() < 1e-12);
        assert!((o.x[1] - 1.0 / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn newton_reports_nonconvergence() {
        let f = |x: &[f64], out: &mut [f64]| out[0] = x[0] * x[0] + 1.0;
        let err = damped_newton(f, &[1.0], &NewtonOptions { max_iter: 20, ..Default::default() }).unwrap_err();
        assert!(matches!(err, ModelError::NonConvergence { .. } | ModelError::Singular(_)));
    }

    #[test]
    fn chord_matches_newton() {
        let f = |x: &[f64], out: &mut [f64]| {
            out[0] = x[0].exp() - 2.0;
            out[1] = x[1] * x[1] * x[1] - 8.0 + x[0];
        };
        let mut chord = ChordSolver::new();
        let o = chord.solve(f, &[0.5, 1.5], 1e-13, 100).unwrap();
        assert!((o.x[0] - 2f64.ln()).abs() < 1e-12);
        assert!((o.x[1] - (8.0 - 2f64.ln()).cbrt()).abs() < 1e-12);
    }

    #[test]
    fn assemble_clears_all_but_goods_market() {
        let p = ModelParams::default();
        let drv = Drivers::steady(&p);
        let s = assemble_state(1.3, p.r_bar, &drv, None, &p, None);
        let r = super::super::residuals::step_residuals(&s, &s, &s, &drv, &p, &Anchors::default());
        for (i, v) in r.iter().enumerate() {
            if i != 19 {
                assert!(v.abs() < 1e-12, "row {i}: {v}");
            }
        }
    }
}
