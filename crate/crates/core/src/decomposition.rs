//! Growth-rate decompositions of market values, leverage, factor allocation,
//! capital and public investment along a simulated path.
//!
//! Each report splits the observed growth rate `%x_t = x_t/x_{t-1} - 1` into
//! factor contributions `elasticity × change`, where the elasticity is the
//! model's exact log-derivative evaluated at `t-1` and the change is a log
//! difference (a level difference for `ξ`). The residual collects everything
//! of second order. Where a textbook approximation exists it is reported
//! next to the decomposition as `closed_form`.

use serde::{Deserialize, Serialize};

use crate::equilibrium::EconomyState;
use crate::error::{ModelError, Result};
use crate::loan_contracts::{
    annuity_factor, government_leverage_unchecked, household_leverage, ContractInputs,
};
use crate::params::ModelParams;
use crate::pct;
use crate::simulation::SimPath;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorSeries {
    pub name: String,
    pub elasticity: Vec<f64>,
    /// Log change of the factor, or level change for `xi`.
    pub change: Vec<f64>,
    pub contribution: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub target: String,
    pub observed: Vec<f64>,
    pub factors: Vec<FactorSeries>,
    /// `observed - Σ contributions`.
    pub residual: Vec<f64>,
    /// Closed-form approximation from the simplified algebra, when there is one.
    pub closed_form: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitMetrics {
    pub rms_observed: f64,
    pub rms_residual: f64,
    pub max_abs_residual: f64,
    /// `rms_residual / rms_observed`.
    pub relative_residual: f64,
}

fn rms(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

impl DecompositionReport {
    pub fn len(&self) -> usize {
        self.observed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observed.is_empty()
    }

    /// Sum of factor contributions per period.
    pub fn reconstruction(&self) -> Vec<f64> {
        (0..self.len())
            .map(|t| self.factors.iter().map(|f| f.contribution[t]).sum())
            .collect()
    }

    pub fn factor(&self, name: &str) -> Option<&FactorSeries> {
        self.factors.iter().find(|f| f.name == name)
    }

    pub fn fit(&self) -> FitMetrics {
        let rms_observed = rms(&self.observed);
        let rms_residual = rms(&self.residual);
        FitMetrics {
            rms_observed,
            rms_residual,
            max_abs_residual: self.residual.iter().fold(0.0, |m, v| m.max(v.abs())),
            relative_residual: if rms_observed > 0.0 { rms_residual / rms_observed } else { 0.0 },
        }
    }

    /// `observed - closed_form`, if a closed form exists.
    pub fn closed_form_gap(&self) -> Option<Vec<f64>> {
        self.closed_form
            .as_ref()
            .map(|p| self.observed.iter().zip(p).map(|(o, p)| o - p).collect())
    }

    /// Least-squares slope through the origin of `observed` on `proxy`.
    pub fn proportional_slope(&self, proxy: &[f64]) -> f64 {
        let sxy: f64 = self.observed.iter().zip(proxy).map(|(y, x)| x * y).sum();
        let sxx: f64 = proxy.iter().map(|x| x * x).sum();
        sxy / sxx
    }

    /// One CSV row per period and factor: `t, factor, elasticity, change, contribution`,
    /// followed by `observed` and `residual` rows.
    pub fn csv_rows(&self) -> Vec<(usize, String, f64, f64, f64)> {
        let mut rows = Vec::new();
        for t in 0..self.len() {
            for f in &self.factors {
                rows.push((t, f.name.clone(), f.elasticity[t], f.change[t], f.contribution[t]));
            }
            rows.push((t, "observed".into(), f64::NAN, f64::NAN, self.observed[t]));
            rows.push((t, "residual".into(), f64::NAN, f64::NAN, self.residual[t]));
        }
        rows
    }
}

/// Accumulates per-period observations and factor terms.
struct Builder {
    target: String,
    observed: Vec<f64>,
    names: Vec<&'static str>,
    elasticity: Vec<Vec<f64>>,
    change: Vec<Vec<f64>>,
    closed: Option<Vec<f64>>,
}

impl Builder {
    fn new(target: &str, names: &[&'static str], closed: bool) -> Self {
        Self {
            target: target.to_string(),
            observed: Vec::new(),
            names: names.to_vec(),
            elasticity: vec![Vec::new(); names.len()],
            change: vec![Vec::new(); names.len()],
            closed: closed.then(Vec::new),
        }
    }

    fn push(&mut self, observed: f64, terms: &[(f64, f64)], closed: Option<f64>) {
        debug_assert_eq!(terms.len(), self.names.len());
        self.observed.push(observed);
        for (j, (e, c)) in terms.iter().enumerate() {
            self.elasticity[j].push(*e);
            self.change[j].push(*c);
        }
        if let (Some(p), Some(v)) = (&mut self.closed, closed) {
            p.push(v);
        }
    }

    fn finish(self) -> DecompositionReport {
        let factors: Vec<FactorSeries> = self
            .names
            .iter()
            .zip(self.elasticity)
            .zip(self.change)
            .map(|((n, e), c)| FactorSeries {
                name: n.to_string(),
                contribution: e.iter().zip(&c).map(|(e, c)| e * c).collect(),
                elasticity: e,
                change: c,
            })
            .collect();
        let residual = (0..self.observed.len())
            .map(|t| self.observed[t] - factors.iter().map(|f| f.contribution[t]).sum::<f64>())
            .collect();
        DecompositionReport {
            target: self.target,
            observed: self.observed,
            factors,
            residual,
            closed_form: self.closed,
        }
    }
}

/// States and exogenous levels with the steady state prepended twice, so that
/// every path period has two predecessors.
struct Frames<'a> {
    states: Vec<&'a EconomyState>,
    /// `(θ, μ, ξ)`.
    drivers: Vec<[f64; 3]>,
}

const PAD: usize = 2;

impl<'a> Frames<'a> {
    fn new(path: &'a SimPath) -> Self {
        let sp = &path.panel.spec.processes;
        let steady = [sp[1].steady, sp[2].steady, sp[3].steady];
        let mut states = vec![&path.steady, &path.steady];
        states.extend(path.states.iter());
        let mut drivers = vec![steady, steady];
        drivers.extend(path.panel.levels.iter().map(|l| [l[1], l[2], l[3]]));
        Self { states, drivers }
    }

    fn periods(&self) -> std::ops::Range<usize> {
        PAD..self.states.len()
    }
}

fn dl(prev: f64, cur: f64) -> f64 {
    (cur / prev).ln()
}

/// Elasticity of the rate factor `1 - β/(1+R)` with respect to `R`.
fn rate_factor_elasticity(r: f64, beta: f64) -> f64 {
    beta * r / ((1.0 + r) * (1.0 + r - beta))
}

fn value_h(s: &EconomyState) -> f64 {
    s.p_h * s.y_h
}

fn value_f(s: &EconomyState) -> f64 {
    s.p_f * s.y_f
}

/// `C^σ ω_h (1+R) j_h / R`, the closed-form market-value driver.
fn closed_value_h(s: &EconomyState, p: &ModelParams) -> f64 {
    s.c.powf(p.sigma) * s.omega_h * (1.0 + s.r) * p.j_h / s.r
}

/// Terms of `%V_h`: `V_h = j_h C^σ ω_h (1 - β/(1+R))`.
fn value_h_terms(a: &EconomyState, b: &EconomyState, p: &ModelParams, weight: f64) -> [(f64, f64); 3] {
    [
        (weight * p.sigma, dl(a.c, b.c)),
        (weight, dl(a.omega_h, b.omega_h)),
        (weight * rate_factor_elasticity(a.r, p.beta), dl(a.r, b.r)),
    ]
}

/// Growth of `P_h Y_h / P_f Y_f` against consumption, leverage and the rate.
pub fn market_value_ratio_growth(path: &SimPath, params: &ModelParams) -> DecompositionReport {
    let fr = Frames::new(path);
    let mut b = Builder::new("V_h/V_f", &["C", "omega_h", "R"], true);
    for t in fr.periods() {
        let (a, c) = (fr.states[t - 1], fr.states[t]);
        let observed = pct(value_h(a) / value_f(a), value_h(c) / value_f(c));
        let closed = pct(closed_value_h(a, params), closed_value_h(c, params));
        b.push(observed, &value_h_terms(a, c, params, 1.0), Some(closed));
    }
    b.finish()
}

/// Growth of total market value `P_h Y_h + P_f Y_f`.
pub fn market_value_sum_growth(path: &SimPath, params: &ModelParams) -> DecompositionReport {
    let fr = Frames::new(path);
    let mut b = Builder::new("V_h+V_f", &["C", "omega_h", "R"], true);
    for t in fr.periods() {
        let (a, c) = (fr.states[t - 1], fr.states[t]);
        let share = value_h(a) / (value_h(a) + value_f(a));
        let observed = pct(value_h(a) + value_f(a), value_h(c) + value_f(c));
        let closed = pct(closed_value_h(a, params) + params.j_f, closed_value_h(c, params) + params.j_f);
        b.push(observed, &value_h_terms(a, c, params, share), Some(closed));
    }
    b.finish()
}

/// Log-derivative of `ω_h(θ, R, ξ, μ)` with respect to `ξ`.
fn leverage_xi_slope(theta: f64, r: f64, xi: f64, mu: f64) -> f64 {
    let q = (1.0 + xi).powi(2);
    ((1.0 - theta).ln() + r.ln() - (1.0 - mu).ln()) / q - 1.0 / (1.0 - xi).powi(2)
}

/// Contributions of `θ`, `R`, `μ` and `ξ` to `%ω_h`.
pub fn leverage_growth_decomposition(path: &SimPath) -> DecompositionReport {
    let fr = Frames::new(path);
    let mut b = Builder::new("omega_h", &["theta", "R", "mu", "xi"], true);
    for t in fr.periods() {
        let (a, c) = (fr.states[t - 1], fr.states[t]);
        let [th0, mu0, xi0] = fr.drivers[t - 1];
        let [th1, mu1, xi1] = fr.drivers[t];
        let inv = 1.0 / (1.0 + xi0);
        let terms = [
            (-inv, dl(1.0 - th0, 1.0 - th1)),
            (-inv, dl(a.r, c.r)),
            (-xi0 * inv, dl(1.0 - mu0, 1.0 - mu1)),
            (leverage_xi_slope(th0, a.r, xi0, mu0), xi1 - xi0),
        ];
        let closed = match (
            ContractInputs::new(th0, a.r, xi0, 0.0),
            ContractInputs::new(th1, c.r, xi1, 0.0),
        ) {
            (Ok(p0), Ok(p1)) => pct(household_leverage(&p0).leverage, household_leverage(&p1).leverage),
            _ => f64::NAN,
        };
        b.push(pct(a.omega_h, c.omega_h), &terms, Some(closed));
    }
    b.finish()
}

/// Exponent weights of the sector price ratio on its four drivers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PremiumWeights {
    /// On `%(C^σ ω_h (1+R)/R)`: `1 - φ_h - 2ψ_h + ψ_f`.
    pub leverage: f64,
    /// On `%R`: `(φ_h - φ_f)/(1 - ξ)`.
    pub rate: f64,
    /// On `%L`: `ψ_f - ψ_h`.
    pub land: f64,
    /// On the discounted payment factor; always `-leverage`.
    pub payment_factor: f64,
}

pub fn premium_weights(params: &ModelParams, xi: f64) -> Result<PremiumWeights> {
    if !(xi < 1.0) || !xi.is_finite() {
        return Err(ModelError::Domain(format!("premium coefficient {xi} must be below 1")));
    }
    let leverage = 1.0 - params.phi_h - params.psi_h + params.psi_f - params.psi_h;
    Ok(PremiumWeights {
        leverage,
        rate: (params.phi_h - params.phi_f) / (1.0 - xi),
        land: params.psi_f - params.psi_h,
        payment_factor: -leverage,
    })
}

/// Growth of the price ratio `P_h/P_f`, split into the market-value drivers
/// and the sector input changes. The closed form applies [`premium_weights`].
pub fn price_ratio_decomposition(path: &SimPath, params: &ModelParams) -> DecompositionReport {
    let p = params;
    let fr = Frames::new(path);
    let names = ["C", "omega_h", "R", "K_h", "K_f", "L_h", "L_f", "n_h", "n_f"];
    let mut b = Builder::new("P_h/P_f", &names, true);
    for t in fr.periods() {
        let (a, c) = (fr.states[t - 1], fr.states[t]);
        let [v1, v2, v3] = value_h_terms(a, c, p, 1.0);
        let terms = [
            v1,
            v2,
            v3,
            (-p.phi_h, dl(a.k_h, c.k_h)),
            (p.phi_f, dl(a.k_f, c.k_f)),
            (-p.psi_h, dl(a.l_h, c.l_h)),
            (p.psi_f, dl(a.l_f, c.l_f)),
            (-p.labor_share_h(), dl(a.n_h, c.n_h)),
            (p.labor_share_f(), dl(a.n_f, c.n_f)),
        ];
        let xi0 = fr.drivers[t - 1][2];
        let closed = premium_weights(p, xi0).map(|w| {
            let d = |s: &EconomyState| s.lambda / (1.0 - p.beta / (1.0 + s.r));
            let drv = |s: &EconomyState| s.c.powf(p.sigma) * s.omega_h * (1.0 + s.r) / s.r;
            w.leverage * pct(drv(a), drv(c))
                + w.rate * pct(a.r, c.r)
                + w.land * pct(a.l_h, c.l_h)
                + w.payment_factor * pct(d(a), d(c))
        });
        b.push(pct(a.p_h / a.p_f, c.p_h / c.p_f), &terms, closed.ok().or(Some(f64::NAN)));
    }
    b.finish()
}

/// Capital, land and labour allocation ratios between the sectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationReport {
    pub capital: DecompositionReport,
    pub land: DecompositionReport,
    pub labor: DecompositionReport,
    /// `%ω_h` per period, the common proportional driver.
    pub leverage_growth: Vec<f64>,
}

impl AllocationReport {
    /// Slopes of each ratio's growth on `%ω_h`.
    pub fn proportional_slopes(&self) -> [f64; 3] {
        [
            self.capital.proportional_slope(&self.leverage_growth),
            self.land.proportional_slope(&self.leverage_growth),
            self.labor.proportional_slope(&self.leverage_growth),
        ]
    }
}

pub fn allocation_ratio_growth(path: &SimPath, params: &ModelParams) -> AllocationReport {
    let p = params;
    let z = p.capital_adjustment;
    let fr = Frames::new(path);
    let mut cap = Builder::new("K_h/K_f", &["lagged", "C", "omega_h", "R", "xi"], true);
    let mut land = Builder::new("L_h/L_f", &["C", "omega_h", "R"], true);
    let mut lab = Builder::new("n_h/n_f", &["C", "omega_h", "R"], true);
    let mut lev = Vec::new();
    for t in fr.periods() {
        let (a0, a, c) = (fr.states[t - 2], fr.states[t - 1], fr.states[t]);
        let [th0, mu0, xi0] = fr.drivers[t - 1];
        let [th1, mu1, xi1] = fr.drivers[t];
        let kr = |s: &EconomyState| s.k_h / s.k_f;
        let [v1, v2, v3] = value_h_terms(a, c, p, z);
        let share_ratio = (p.phi_h / p.phi_f).ln();
        cap.push(
            pct(kr(a), kr(c)),
            &[
                (1.0 - z, dl(kr(a0), kr(a))),
                v1,
                v2,
                v3,
                (z * share_ratio / (1.0 - xi0).powi(2), xi1 - xi0),
            ],
            Some(
                pct(a.omega_h, c.omega_h)
                    - xi0 / (1.0 + xi0) * (pct(1.0 - th0, 1.0 - th1) + pct(1.0 - mu0, 1.0 - mu1)),
            ),
        );
        let terms = value_h_terms(a, c, p, 1.0);
        let w = pct(a.omega_h, c.omega_h);
        land.push(pct(a.l_h / a.l_f, c.l_h / c.l_f), &terms, Some(w));
        lab.push(pct(a.n_h / a.n_f, c.n_h / c.n_f), &terms, Some(w));
        lev.push(w);
    }
    AllocationReport {
        capital: cap.finish(),
        land: land.finish(),
        labor: lab.finish(),
        leverage_growth: lev,
    }
}

/// Sector capital, aggregate investment and public investment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapitalFiscalReport {
    pub k_h: DecompositionReport,
    pub k_f: DecompositionReport,
    pub investment: DecompositionReport,
    pub public_investment: DecompositionReport,
}

/// `ω_G - annuity(i_G, ω_G)`, the fiscal borrowing margin per unit of land value.
fn fiscal_margin(r: f64, xi: f64) -> f64 {
    let (w, i) = government_leverage_unchecked(r, xi);
    w - annuity_factor(i, w)
}

/// Derivatives of `ln fiscal_margin` with respect to `ln R` and `ξ`.
fn fiscal_margin_slopes(r: f64, xi: f64) -> (f64, f64) {
    let h = 1e-6;
    let lr = |x: f64| fiscal_margin(r * x.exp(), xi).ln();
    let lx = |d: f64| fiscal_margin(r, xi + d).ln();
    ((lr(h) - lr(-h)) / (2.0 * h), (lx(h) - lx(-h)) / (2.0 * h))
}

/// `(1+ξ²)/(1-ξ²)`.
fn xi_kernel(xi: f64) -> f64 {
    (1.0 + xi * xi) / (1.0 - xi * xi)
}

pub fn capital_and_fiscal_growth(path: &SimPath, params: &ModelParams) -> CapitalFiscalReport {
    let p = params;
    let z = p.capital_adjustment;
    let fr = Frames::new(path);
    let mut kh = Builder::new("K_h", &["lagged", "C", "omega_h", "R", "xi"], true);
    let mut kf = Builder::new("K_f", &["lagged", "R", "xi"], true);
    let mut inv = Builder::new("I", &["K", "lagged K"], true);
    let mut gov = Builder::new("G", &["C", "omega_h", "R", "xi"], true);
    for t in fr.periods() {
        let (a0, a, c) = (fr.states[t - 2], fr.states[t - 1], fr.states[t]);
        let xi00 = fr.drivers[t - 2][2];
        let xi0 = fr.drivers[t - 1][2];
        let xi1 = fr.drivers[t][2];
        let dxi = xi1 - xi0;
        let q = (1.0 - xi0).powi(2);
        let payment = |s: &EconomyState| s.lambda / (1.0 - p.beta / (1.0 + s.r));

        // ln i^P = (ln R - ξ ln φ)/(1-ξ)
        let [v1, v2, v3] = value_h_terms(a, c, p, z);
        kh.push(
            pct(a.k_h, c.k_h),
            &[
                (1.0 - z, dl(a0.k_h, a.k_h)),
                v1,
                v2,
                (v3.0 - z / (1.0 - xi0), v3.1),
                (-z * (a.r.ln() - p.phi_h.ln()) / q, dxi),
            ],
            Some(pct(a.omega_h, c.omega_h) + pct(a.r, c.r) / (1.0 - xi0) - pct(payment(a), payment(c))),
        );
        kf.push(
            pct(a.k_f, c.k_f),
            &[
                (1.0 - z, dl(a0.k_f, a.k_f)),
                (-z / (1.0 - xi0), dl(a.r, c.r)),
                (-z * (a.r.ln() - p.phi_f.ln()) / q, dxi),
            ],
            Some(pct(a.r, c.r) / (1.0 - xi0)),
        );

        let k = |s: &EconomyState| s.k_h + s.k_f;
        inv.push(
            pct(a.i, c.i),
            &[
                (k(a) / a.i, dl(k(a), k(c))),
                (-(1.0 - p.delta_k) * k(a0) / a.i, dl(k(a0), k(a))),
            ],
            Some((xi_kernel(xi1) - xi_kernel(xi0)) - (xi_kernel(xi0) - xi_kernel(xi00))),
        );

        let land_value = p.psi_h * value_h(a) + p.psi_f * value_f(a);
        let share = p.psi_h * value_h(a) / land_value;
        let (m_r, m_xi) = fiscal_margin_slopes(a.r, xi0);
        let [g1, g2, g3] = value_h_terms(a, c, p, share);
        gov.push(
            pct(a.g, c.g),
            &[g1, g2, (g3.0 + m_r, g3.1), (m_xi, dxi)],
            Some(pct(a.omega_h, c.omega_h) + pct(a.omega_g, c.omega_g)),
        );
    }
    CapitalFiscalReport {
        k_h: kh.finish(),
        k_f: kf.finish(),
        investment: inv.finish(),
        public_investment: gov.finish(),
    }
}

/// Every reconstruction above for one path, in a fixed order.
pub fn all_reports(path: &SimPath, params: &ModelParams) -> Vec<DecompositionReport> {
    let alloc = allocation_ratio_growth(path, params);
    let cf = capital_and_fiscal_growth(path, params);
    vec![
        market_value_ratio_growth(path, params),
        market_value_sum_growth(path, params),
        leverage_growth_decomposition(path),
        price_ratio_decomposition(path, params),
        alloc.capital,
        alloc.land,
        alloc.labor,
        cf.k_h,
        cf.k_f,
        cf.investment,
        cf.public_investment,
    ]
}

/// Path of `ξ` that keeps investment growth at `d̄` under the simplified
/// capital law `%K_h = -Δ[1/(1-ξ) + ξ/(1+ξ)]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XiDecay {
    pub xi: Vec<f64>,
    /// First period at which no positive `ξ` sustains the target.
    pub exhausted_at: Option<usize>,
    pub monotone_decline: bool,
}

fn xi_index(xi: f64) -> f64 {
    1.0 / (1.0 - xi) + xi / (1.0 + xi)
}

/// Invert [`xi_index`] on `[0, 1)`; `None` below its minimum of 1.
fn xi_from_index(g: f64) -> Option<f64> {
    if g < 1.0 {
        return None;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0 - 1e-12);
    if xi_index(hi) < g {
        return Some(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if xi_index(mid) < g {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// With `%I_t = %K_t - %K_{t-1} = d̄` the index obeys
/// `g_t = 2 g_{t-1} - g_{t-2} - d̄`, starting from `ξ_{-1} = ξ_0 = xi0`.
pub fn xi_decay_diagnostic(xi0: f64, target_growth: f64, periods: usize) -> Result<XiDecay> {
    if !(xi0 > 0.0 && xi0 < 1.0) {
        return Err(ModelError::Domain(format!("initial ξ {xi0} not in (0,1)")));
    }
    let mut xi = vec![xi0];
    let (mut g2, mut g1) = (xi_index(xi0), xi_index(xi0));
    let mut exhausted_at = None;
    for t in 1..periods {
        let g = 2.0 * g1 - g2 - target_growth;
        match xi_from_index(g) {
            Some(x) => xi.push(x),
            None => {
                exhausted_at = Some(t);
                break;
            }
        }
        g2 = g1;
        g1 = g;
    }
    let monotone_decline = xi.windows(2).all(|w| w[1] < w[0]);
    Ok(XiDecay {
        xi,
        exhausted_at,
        monotone_decline,
    })
}

/// Net public investment `G_t - δ Σ_{i<t} G_i` and its shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetInvestmentProfile {
    pub net: Vec<f64>,
    pub peak: usize,
    /// Strictly decreasing from the peak to the end.
    pub declines_after_peak: bool,
    pub first_negative: Option<usize>,
}

pub fn net_public_investment(g: &[f64], delta_k: f64) -> NetInvestmentProfile {
    let mut cum = 0.0;
    let mut net = Vec::with_capacity(g.len());
    for &x in g {
        net.push(x - delta_k * cum);
        cum += x;
    }
    let peak = net
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, v)| if *v > bv { (i, *v) } else { (bi, bv) })
        .0;
    let declines_after_peak = net[peak.min(net.len())..].windows(2).all(|w| w[1] < w[0]);
    let first_negative = net.iter().position(|v| *v < 0.0);
    NetInvestmentProfile {
        net,
        peak,
        declines_after_peak,
        first_negative,
    }
}
