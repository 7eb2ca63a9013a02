//! Endogenous-growth side model: labour splits between production and R&D,
//! and technology grows with the R&D share.
//!
//! Population growth `ε_i = ln(n_i/n_{i-1})` is i.i.d. `N(n_g, σ_n²)`. The R&D
//! payoff is the discounted expected wage-bill stream scaled by cumulative
//! population growth. The defaults `η = 0.01, n_g = 0, σ_n = 0.01` are
//! exercise values, not a calibration.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::equilibrium::EconomyState;
use crate::error::{ModelError, Result};
use crate::params::ModelParams;

/// How the expectation over population paths is taken.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Expectation {
    /// Closed-form lognormal mean `E e^{Σε} = e^{k(n_g + σ_n²/2)}`.
    Exact,
    MonteCarlo { draws: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthEnv {
    /// R&D productivity.
    pub eta: f64,
    /// Current labour supply `n_t`.
    pub labor: f64,
    pub n_growth: f64,
    pub n_sigma: f64,
    /// Wage bill `W_h n_h + W_f n_f` for `k = t+1, t+2, ...`; the last value is held.
    pub wage_bill: Vec<f64>,
    /// Base rate path, held like `wage_bill`.
    pub rate: Vec<f64>,
    /// Elasticity of the wage bill with respect to the production share `α`.
    /// Zero makes the stream independent of the allocation.
    pub wage_alpha_elasticity: f64,
    pub horizon: usize,
    pub expectation: Expectation,
}

impl GrowthEnv {
    /// Constant wage bill and rate with the exercise defaults.
    pub fn constant(wage_bill: f64, rate: f64) -> Self {
        Self {
            eta: 0.01,
            labor: 1.0,
            n_growth: 0.0,
            n_sigma: 0.01,
            wage_bill: vec![wage_bill],
            rate: vec![rate],
            wage_alpha_elasticity: 0.0,
            horizon: 2000,
            expectation: Expectation::MonteCarlo { draws: 2000, seed: 1 },
        }
    }

    /// Environment whose wage bill and rate are held at a steady state.
    pub fn from_steady(state: &EconomyState, params: &ModelParams) -> Self {
        Self::constant(wage_bill(state, params).direct, state.r)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, reason: String| ModelError::InvalidParameter { name, reason };
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(bad("eta", format!("{} must be positive", self.eta)));
        }
        if !(self.labor > 0.0) {
            return Err(bad("labor", format!("{} must be positive", self.labor)));
        }
        if !(self.n_sigma >= 0.0) || !self.n_growth.is_finite() {
            return Err(bad("n_sigma", "population growth moments must be finite, σ ≥ 0".into()));
        }
        if self.wage_bill.is_empty() || self.rate.is_empty() {
            return Err(bad("wage_bill", "wage bill and rate paths must be non-empty".into()));
        }
        if self.rate.iter().any(|r| !(*r > -1.0)) {
            return Err(bad("rate", "rates must exceed -1".into()));
        }
        if self.horizon == 0 {
            return Err(bad("horizon", "must be at least 1".into()));
        }
        Ok(())
    }

    fn held(path: &[f64], k: usize) -> f64 {
        path[k.min(path.len() - 1)]
    }

    fn scaled_wages(&self, factor: f64) -> Self {
        let mut e = self.clone();
        e.wage_bill.iter_mut().for_each(|w| *w *= factor);
        e
    }

    fn shifted_rates(&self, shift: f64) -> Self {
        let mut e = self.clone();
        e.rate.iter_mut().for_each(|r| *r += shift);
        e
    }
}

/// The aggregate wage bill in three forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WageBill {
    /// `C^σ ω_h (1 - β/(1+R)) j_h a_h + j_f a_f`, using the model's rate factor.
    pub approximation: f64,
    /// The same with the rate factor `(1+R)/R`.
    pub perpetuity: f64,
    /// `W_h n_h + W_f n_f`.
    pub direct: f64,
}

pub fn wage_bill(state: &EconomyState, params: &ModelParams) -> WageBill {
    let p = params;
    let lever = state.c.powf(p.sigma) * state.omega_h * p.j_h * p.labor_share_h();
    let other = p.j_f * p.labor_share_f();
    WageBill {
        approximation: lever * (1.0 - p.beta / (1.0 + state.r)) + other,
        perpetuity: lever * (1.0 + state.r) / state.r + other,
        direct: state.wage_bill(),
    }
}

/// Discounted expected wage stream `E Σ_{k=1}^{H} e^{Σ_{i≤k} ε_i} W_k / Π(1+R)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StreamValue {
    pub value: f64,
    /// Monte Carlo standard error; zero for the exact expectation.
    pub std_err: f64,
    /// Geometric bound on the omitted tail beyond the horizon.
    pub tail_bound: f64,
}

pub fn discounted_wage_stream(env: &GrowthEnv) -> Result<StreamValue> {
    env.validate()?;
    let drift = env.n_growth + 0.5 * env.n_sigma * env.n_sigma;
    let r_tail = GrowthEnv::held(&env.rate, usize::MAX);
    let ratio = drift.exp() / (1.0 + r_tail);
    if ratio >= 1.0 {
        return Err(ModelError::Divergent(format!(
            "population growth factor {:.6} ≥ discount factor {:.6}",
            drift.exp(),
            1.0 + r_tail
        )));
    }
    let h = env.horizon;
    // deterministic weights d_k W_k
    let mut weights = Vec::with_capacity(h);
    let mut d = 1.0;
    for k in 0..h {
        d /= 1.0 + GrowthEnv::held(&env.rate, k);
        weights.push(d * GrowthEnv::held(&env.wage_bill, k));
    }
    let last = weights[h - 1] * (h as f64 * drift).exp();
    let tail_bound = last.abs() * ratio / (1.0 - ratio);
    match env.expectation {
        Expectation::Exact => {
            let value = weights
                .iter()
                .enumerate()
                .map(|(k, w)| w * ((k + 1) as f64 * drift).exp())
                .sum();
            Ok(StreamValue {
                value,
                std_err: 0.0,
                tail_bound,
            })
        }
        Expectation::MonteCarlo { draws, seed } => {
            if draws < 2 {
                return Err(ModelError::Domain("Monte Carlo needs at least 2 draws".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let eps = Normal::new(env.n_growth, env.n_sigma).map_err(|e| ModelError::Domain(e.to_string()))?;
            let (mut sum, mut sum2) = (0.0, 0.0);
            for _ in 0..draws {
                let mut log_n = 0.0;
                let mut v = 0.0;
                for w in &weights {
                    log_n += eps.sample(&mut rng);
                    v += w * log_n.exp();
                }
                sum += v;
                sum2 += v * v;
            }
            let n = draws as f64;
            let mean = sum / n;
            let var = (sum2 / n - mean * mean).max(0.0) * n / (n - 1.0);
            Ok(StreamValue {
                value: mean,
                std_err: (var / n).sqrt(),
                tail_bound,
            })
        }
    }
}

/// Value of putting `(1-α) n_t` into R&D: `η (1-α) n_t · stream`.
pub fn rd_discounted_value(env: &GrowthEnv, alpha: f64) -> Result<StreamValue> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(ModelError::Domain(format!("α = {alpha} not in [0,1]")));
    }
    let s = discounted_wage_stream(&env.scaled_wages(alpha_wage_factor(env, alpha)))?;
    let scale = env.eta * (1.0 - alpha) * env.labor;
    Ok(StreamValue {
        value: scale * s.value,
        std_err: scale * s.std_err,
        tail_bound: scale * s.tail_bound,
    })
}

fn alpha_wage_factor(env: &GrowthEnv, alpha: f64) -> f64 {
    if env.wage_alpha_elasticity == 0.0 {
        1.0
    } else {
        alpha.max(1e-12).powf(env.wage_alpha_elasticity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaSolution {
    pub alpha: f64,
    /// The unclamped formula left `[0, 1]`.
    pub clamped: bool,
    pub iterations: usize,
    /// `η ·` stream at the solution.
    pub payoff: f64,
}

const ALPHA_TOL: f64 = 1e-10;
const ALPHA_MAX_ITER: usize = 10_000;

/// Indifference share `α = 1 - 1/(η · stream(α))`, by damped fixed-point
/// iteration, clamped to `[0, 1]`.
pub fn equilibrium_alpha(env: &GrowthEnv) -> Result<AlphaSolution> {
    let base = discounted_wage_stream(env)?.value;
    let map = |a: f64| {
        let payoff = env.eta * base * alpha_wage_factor(env, a);
        (1.0 - 1.0 / payoff, payoff)
    };
    let mut alpha = 0.5;
    for it in 1..=ALPHA_MAX_ITER {
        let (raw, payoff) = map(alpha);
        let next = raw.clamp(0.0, 1.0);
        let step = next - alpha;
        if step.abs() < ALPHA_TOL {
            return Ok(AlphaSolution {
                alpha: next,
                clamped: !(0.0..=1.0).contains(&raw),
                iterations: it,
                payoff,
            });
        }
        alpha += if env.wage_alpha_elasticity == 0.0 { step } else { 0.5 * step };
    }
    Err(ModelError::NonConvergence {
        iterations: ALPHA_MAX_ITER,
        residual: (map(alpha).0.clamp(0.0, 1.0) - alpha).abs(),
    })
}

/// `A_{t+1} = A_t (1 + η (1-α_t) n_t)` from `a0`, returning `A_0..=A_T`
/// with `T = alpha.len()`. Labour is held at its last value.
pub fn technology_path_from(a0: f64, eta: f64, alpha: &[f64], labor: &[f64]) -> Result<Vec<f64>> {
    if let Some(a) = alpha.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(ModelError::Domain(format!("α = {a} not in [0,1]")));
    }
    if labor.is_empty() {
        return Err(ModelError::Domain("labour path is empty".into()));
    }
    let mut path = Vec::with_capacity(alpha.len() + 1);
    path.push(a0);
    let mut a = a0;
    for (t, al) in alpha.iter().enumerate() {
        a *= 1.0 + eta * (1.0 - al) * GrowthEnv::held(labor, t);
        path.push(a);
    }
    Ok(path)
}

/// [`technology_path_from`] with `A_0 = 1` and constant labour `env.labor`.
pub fn technology_path(env: &GrowthEnv, alpha: &[f64]) -> Result<Vec<f64>> {
    technology_path_from(1.0, env.eta, alpha, &[env.labor])
}

pub const RATE_BOUNDS: (f64, f64) = (1e-4, 0.5);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateOffset {
    /// Uniform shift added to the rate path.
    pub shift: f64,
    pub alpha: f64,
}

/// Uniform rate shift that brings the equilibrium share to `target`,
/// by bisection with the shifted terminal rate inside [`RATE_BOUNDS`].
pub fn offsetting_rate(env: &GrowthEnv, target: f64) -> Result<RateOffset> {
    if !(target > 0.0 && target < 1.0) {
        return Err(ModelError::Domain(format!("target α = {target} not in (0,1)")));
    }
    let r_tail = GrowthEnv::held(&env.rate, usize::MAX);
    // α(shift) - target, decreasing in the shift; too-low rates diverge (α = 1)
    let gap = |shift: f64| -> Result<f64> {
        match equilibrium_alpha(&env.shifted_rates(shift)) {
            Ok(s) => Ok(s.alpha - target),
            Err(ModelError::Divergent(_)) => Ok(1.0 - target),
            Err(e) => Err(e),
        }
    };
    let (mut lo, mut hi) = (RATE_BOUNDS.0 - r_tail, RATE_BOUNDS.1 - r_tail);
    let (g_lo, g_hi) = (gap(lo)?, gap(hi)?);
    if g_lo < 0.0 || g_hi > 0.0 {
        return Err(ModelError::Unattainable(format!(
            "α = {target} outside the range reachable with rates in [{}, {}]",
            RATE_BOUNDS.0, RATE_BOUNDS.1
        )));
    }
    if gap(0.0)? == 0.0 {
        return Ok(RateOffset { shift: 0.0, alpha: target });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gap(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    let shift = 0.5 * (lo + hi);
    Ok(RateOffset {
        shift,
        alpha: equilibrium_alpha(&env.shifted_rates(shift))?.alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::solve_steady_state;

    fn exact(w: f64, r: f64, eta: f64) -> GrowthEnv {
        GrowthEnv {
            eta,
            n_sigma: 0.0,
            expectation: Expectation::Exact,
            ..GrowthEnv::constant(w, r)
        }
    }

    #[test]
    fn wage_bill_forms_agree_at_steady_state() {
        let p = ModelParams::default();
        let ss = solve_steady_state(&p).unwrap();
        let w = wage_bill(&ss.state, &p);
        assert!((w.approximation / w.direct - 1.0).abs() < 1e-10);
        let mut up = ss.state;
        up.omega_h *= 1.1;
        assert!(wage_bill(&up, &p).approximation > w.approximation);
        let p0 = ModelParams { j_h: 0.0, ..p.clone() };
        assert_eq!(wage_bill(&ss.state, &p0).approximation, p.j_f * p.labor_share_f());
    }

    #[test]
    fn constant_stream_matches_perpetuity() {
        let env = GrowthEnv {
            n_sigma: 0.0,
            horizon: 3000,
            expectation: Expectation::MonteCarlo { draws: 100, seed: 3 },
            ..GrowthEnv::constant(2.0, 0.04)
        };
        let v = rd_discounted_value(&env, 0.25).unwrap();
        let closed = 0.01 * 0.75 * 2.0 / 0.04;
        assert!((v.value / closed - 1.0).abs() < 1e-10);
        assert_eq!(rd_discounted_value(&env, 1.0).unwrap().value, 0.0);
        let double = GrowthEnv { eta: 0.02, ..env.clone() };
        assert!((rd_discounted_value(&double, 0.25).unwrap().value / v.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_error_shrinks_with_draws() {
        let env = |draws| GrowthEnv {
            horizon: 200,
            n_sigma: 0.05,
            expectation: Expectation::MonteCarlo { draws, seed: 11 },
            ..GrowthEnv::constant(1.0, 0.05)
        };
        let a = discounted_wage_stream(&env(1000)).unwrap();
        let b = discounted_wage_stream(&env(16000)).unwrap();
        let ratio = a.std_err / b.std_err;
        assert!((ratio - 4.0).abs() < 0.6, "{ratio}");
        let ex = discounted_wage_stream(&GrowthEnv {
            expectation: Expectation::Exact,
            ..env(1)
        })
        .unwrap();
        assert!((b.value - ex.value).abs() < 4.0 * b.std_err);
    }

    #[test]
    fn divergent_stream_flagged() {
        let env = GrowthEnv {
            n_growth: 0.05,
            ..exact(1.0, 0.03, 0.01)
        };
        assert!(matches!(discounted_wage_stream(&env), Err(ModelError::Divergent(_))));
    }

    #[test]
    fn alpha_boundaries() {
        // η · w/R = 1 exactly at w = R/η
        let s = equilibrium_alpha(&GrowthEnv { horizon: 20_000, ..exact(0.5, 0.05, 0.1) }).unwrap();
        assert!(s.alpha.abs() < 1e-9);
        let low = equilibrium_alpha(&exact(0.1, 0.05, 0.1)).unwrap();
        assert_eq!(low.alpha, 0.0);
        assert!(low.clamped);
        let high = equilibrium_alpha(&exact(1e6, 0.05, 0.1)).unwrap();
        assert!(high.alpha > 1.0 - 1e-5 && !high.clamped);
    }

    #[test]
    fn alpha_fixed_point_with_wage_feedback() {
        let env = GrowthEnv {
            wage_alpha_elasticity: 0.5,
            ..exact(2.0, 0.05, 0.1)
        };
        let s = equilibrium_alpha(&env).unwrap();
        let stream = discounted_wage_stream(&env).unwrap().value;
        let implied = 1.0 - 1.0 / (env.eta * stream * s.alpha.powf(0.5));
        assert!((implied - s.alpha).abs() < 1e-9);
    }

    #[test]
    fn technology_examples() {
        let env = GrowthEnv::constant(1.0, 0.03);
        let a = technology_path(&env, &[0.0; 10]).unwrap();
        assert!((a[10] - 1.01f64.powi(10)).abs() < 1e-12);
        assert!(technology_path(&env, &[1.0; 10]).unwrap().iter().all(|v| *v == 1.0));
        assert!(technology_path(&env, &[1.2]).is_err());
    }

    #[test]
    fn offset_signs() {
        let env = GrowthEnv {
            eta: 1.0,
            ..exact(0.2, 0.04, 1.0)
        };
        let base = equilibrium_alpha(&env).unwrap().alpha;
        assert!(base > 0.0 && base < 1.0);
        let same = offsetting_rate(&env, base).unwrap();
        assert!(same.shift.abs() < 1e-10);
        let levered = env.scaled_wages(1.2);
        assert!(offsetting_rate(&levered, base).unwrap().shift > 0.0);
        let shrinking = GrowthEnv { n_growth: -0.01, ..env.clone() };
        assert!(offsetting_rate(&shrinking, base).unwrap().shift < 0.0);
        assert!(matches!(offsetting_rate(&env, 0.999_999), Err(ModelError::Unattainable(_))));
    }
}
