//! Simulated-moments posterior sampling with random-walk Metropolis.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::loan_contracts::{household_loan_rate, refi_leverage, ContractInputs};
use crate::params::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PriorFamily {
    /// Beta distribution on (0, 1).
    BetaLike,
    /// Gamma distribution on (0, ∞).
    GammaLike,
}

/// A prior given by its mean and standard deviation; shape parameters follow
/// by the method of moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prior {
    pub name: String,
    pub family: PriorFamily,
    pub mean: f64,
    pub std: f64,
    a: f64,
    b: f64,
}

impl Prior {
    pub fn new(name: &str, family: PriorFamily, mean: f64, std: f64) -> Result<Self> {
        let bad = |reason: String| ModelError::InvalidParameter { name: "prior", reason };
        if !(std > 0.0 && std.is_finite()) {
            return Err(bad(format!("{name}: std {std} must be positive")));
        }
        let var = std * std;
        let (a, b) = match family {
            PriorFamily::BetaLike => {
                if !(mean > 0.0 && mean < 1.0) || var >= mean * (1.0 - mean) {
                    return Err(bad(format!("{name}: beta moments ({mean}, {std}) infeasible")));
                }
                let k = mean * (1.0 - mean) / var - 1.0;
                (mean * k, (1.0 - mean) * k)
            }
            PriorFamily::GammaLike => {
                if !(mean > 0.0 && mean.is_finite()) {
                    return Err(bad(format!("{name}: gamma mean {mean} must be positive")));
                }
                // shape, rate
                (mean * mean / var, mean / var)
            }
        };
        Ok(Self {
            name: name.to_string(),
            family,
            mean,
            std,
            a,
            b,
        })
    }

    /// The two shape parameters (`α, β` for beta; shape and rate for gamma).
    pub fn shape(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn in_support(&self, x: f64) -> bool {
        match self.family {
            PriorFamily::BetaLike => x > 0.0 && x < 1.0,
            PriorFamily::GammaLike => x > 0.0 && x.is_finite(),
        }
    }

    /// Log density up to an additive constant; `-∞` outside the support.
    pub fn log_kernel(&self, x: f64) -> f64 {
        if !self.in_support(x) {
            return f64::NEG_INFINITY;
        }
        match self.family {
            PriorFamily::BetaLike => (self.a - 1.0) * x.ln() + (self.b - 1.0) * (1.0 - x).ln(),
            PriorFamily::GammaLike => (self.a - 1.0) * x.ln() - self.b * x,
        }
    }
}

/// Gaussian pseudo-likelihood target: observed value and its standard deviation.
/// An infinite standard deviation carries no information.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentTarget {
    pub value: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerOptions {
    pub draws: usize,
    /// Adaptation and discard period before `draws`.
    pub burn_in: usize,
    pub seed: u64,
    /// Initial proposal std as a multiple of the prior std.
    pub initial_scale: f64,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        Self {
            draws: 20_000,
            burn_in: 5_000,
            seed: 7,
            initial_scale: 0.5,
        }
    }
}

pub const ACCEPTANCE_BAND: (f64, f64) = (0.1, 0.6);
const ADAPT_WINDOW: usize = 100;
const ADAPT_TARGET: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Posterior {
    pub names: Vec<String>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Batch-means Monte Carlo standard error of each mean.
    pub mcse: Vec<f64>,
    pub acceptance: f64,
    /// Acceptance fell outside [`ACCEPTANCE_BAND`] after adaptation.
    pub acceptance_warning: bool,
    pub proposal_std: Vec<f64>,
    /// Post-burn-in draws.
    pub chain: Vec<Vec<f64>>,
}

/// One Metropolis step with a symmetric proposal. Returns whether it moved.
pub fn metropolis_step<S, R, P, L>(state: &mut S, log_p: &mut f64, rng: &mut R, propose: P, log_target: L) -> bool
where
    R: Rng,
    P: FnOnce(&S, &mut R) -> S,
    L: FnOnce(&S) -> f64,
{
    let cand = propose(state, rng);
    let lp = log_target(&cand);
    let u: f64 = rng.random();
    if lp.is_finite() && u.ln() < lp - *log_p {
        *state = cand;
        *log_p = lp;
        true
    } else {
        false
    }
}

/// Batch-means standard error of the mean with `√n` batches.
pub fn batch_means_se(x: &[f64]) -> f64 {
    let n = x.len();
    let nb = (n as f64).sqrt().floor().max(2.0) as usize;
    let size = n / nb;
    if size == 0 {
        return f64::NAN;
    }
    let means: Vec<f64> = (0..nb)
        .map(|b| x[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let m = means.iter().sum::<f64>() / nb as f64;
    let v = means.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (nb - 1) as f64;
    (v / nb as f64).sqrt()
}

/// Random-walk Metropolis on `priors × Π N(target | model_map(x))`.
///
/// The chain starts at the prior means. During burn-in every coordinate's
/// proposal std is rescaled each 100 steps toward 30% acceptance.
pub fn estimate_posterior<F>(
    priors: &[Prior],
    targets: &[MomentTarget],
    model_map: F,
    opts: &SamplerOptions,
) -> Result<Posterior>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    if targets.iter().any(|t| !t.value.is_finite() || !(t.std > 0.0)) {
        return Err(ModelError::Domain("moment targets must be finite with positive std".into()));
    }
    if opts.draws < 4 {
        return Err(ModelError::Domain("need at least 4 draws".into()));
    }
    let d = priors.len();
    let log_post = |x: &Vec<f64>| -> f64 {
        let lp: f64 = priors.iter().zip(x).map(|(p, v)| p.log_kernel(*v)).sum();
        if !lp.is_finite() {
            return f64::NEG_INFINITY;
        }
        let Ok(m) = model_map(x) else {
            return f64::NEG_INFINITY;
        };
        let ll: f64 = targets
            .iter()
            .zip(&m)
            .filter(|(t, _)| t.std.is_finite())
            .map(|(t, v)| -0.5 * ((v - t.value) / t.std).powi(2))
            .sum();
        if ll.is_nan() {
            f64::NEG_INFINITY
        } else {
            lp + ll
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x: Vec<f64> = priors.iter().map(|p| p.mean).collect();
    let mut lp = log_post(&x);
    if !lp.is_finite() {
        return Err(ModelError::Domain("posterior is zero at the prior means".into()));
    }
    let mut step: Vec<f64> = priors.iter().map(|p| opts.initial_scale * p.std).collect();

    let mut window_acc = 0usize;
    for it in 0..opts.burn_in {
        let s = step.clone();
        window_acc += usize::from(metropolis_step(
            &mut x,
            &mut lp,
            &mut rng,
            |cur, r| cur.iter().zip(&s).map(|(c, s)| c + s * r.sample::<f64, _>(StandardNormal)).collect(),
            log_post,
        ));
        if (it + 1) % ADAPT_WINDOW == 0 {
            let rate = window_acc as f64 / ADAPT_WINDOW as f64;
            let f = (rate - ADAPT_TARGET).exp();
            step.iter_mut().for_each(|s| *s *= f);
            window_acc = 0;
        }
    }

    let mut chain = Vec::with_capacity(opts.draws);
    let mut accepted = 0usize;
    for _ in 0..opts.draws {
        accepted += usize::from(metropolis_step(
            &mut x,
            &mut lp,
            &mut rng,
            |cur, r| cur.iter().zip(&step).map(|(c, s)| c + s * r.sample::<f64, _>(StandardNormal)).collect(),
            log_post,
        ));
        chain.push(x.clone());
    }
    let n = chain.len() as f64;
    let acceptance = accepted as f64 / n;
    let acceptance_warning = acceptance < ACCEPTANCE_BAND.0 || acceptance > ACCEPTANCE_BAND.1;
    if acceptance_warning {
        log::warn!("Metropolis acceptance {acceptance:.3} outside [0.1, 0.6] after adaptation");
    }
    let mut mean = vec![0.0; d];
    let mut std = vec![0.0; d];
    let mut mcse = vec![0.0; d];
    for j in 0..d {
        let col: Vec<f64> = chain.iter().map(|v| v[j]).collect();
        let m = col.iter().sum::<f64>() / n;
        mean[j] = m;
        std[j] = (col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        mcse[j] = batch_means_se(&col);
    }
    Ok(Posterior {
        names: priors.iter().map(|p| p.name.clone()).collect(),
        mean,
        std,
        mcse,
        acceptance,
        acceptance_warning,
        proposal_std: step,
        chain,
    })
}

/// Calibration targets and priors for estimating `(μ, ξ)` from steady-state
/// contract moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractMomentSetup {
    pub priors: Vec<Prior>,
    pub targets: Vec<MomentTarget>,
    pub theta: f64,
    pub rate: f64,
}

/// Default setup: `μ` and `ξ` get beta priors centred on the calibration with
/// std 0.02. The targets are the loan rate `f·R̄` and the premium factor `f`,
/// with `f = 1.1275 ± 0.0694` and `R̄ = 3.2% ± 1.092%`; the loan-rate std
/// follows from the delta method.
pub fn contract_moment_setup(params: &ModelParams) -> Result<ContractMomentSetup> {
    const PREMIUM: (f64, f64) = (1.1275, 0.0694);
    const RATE_STD: f64 = 0.01092;
    let rate = params.r_bar;
    let rate_target = PREMIUM.0 * rate;
    let rate_std = ((rate * PREMIUM.1).powi(2) + (PREMIUM.0 * RATE_STD).powi(2)).sqrt();
    Ok(ContractMomentSetup {
        priors: vec![
            Prior::new("mu", PriorFamily::BetaLike, params.mu_bar, 0.02)?,
            Prior::new("xi", PriorFamily::BetaLike, params.xi_bar, 0.02)?,
        ],
        targets: vec![
            MomentTarget { value: rate_target, std: rate_std },
            MomentTarget { value: PREMIUM.0, std: PREMIUM.1 },
        ],
        theta: params.theta_bar,
        rate,
    })
}

impl ContractMomentSetup {
    /// `(μ, ξ) ↦ [loan rate, premium factor ω_h^ξ]` at `(θ̄, R̄)`.
    pub fn moments(&self, x: &[f64]) -> Result<Vec<f64>> {
        let (mu, xi) = (x[0], x[1]);
        let c = ContractInputs::new(self.theta, self.rate, xi, mu)?;
        let loan_rate = household_loan_rate(&c);
        let premium = refi_leverage(self.theta, self.rate, xi, mu).powf(xi);
        Ok(vec![loan_rate, premium])
    }

    pub fn estimate(&self, opts: &SamplerOptions) -> Result<Posterior> {
        estimate_posterior(&self.priors, &self.targets, |x| self.moments(x), opts)
    }
}
