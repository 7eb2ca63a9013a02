//! Seeded AR(1) processes for the four exogenous drivers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::equilibrium::Drivers;
use crate::error::{ModelError, Result};
use crate::params::ModelParams;

/// The four exogenous processes, in panel column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ShockProcess {
    Rate,
    DownPayment,
    Refinance,
    Premium,
}

impl ShockProcess {
    pub const ALL: [ShockProcess; 4] = [Self::Rate, Self::DownPayment, Self::Refinance, Self::Premium];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Rate => "R",
            Self::DownPayment => "theta",
            Self::Refinance => "mu",
            Self::Premium => "xi",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.label().eq_ignore_ascii_case(s))
    }
}

/// Map from the latent state to a level inside the process's domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Transform {
    /// `level = logistic(logit(steady) + x)`, for fractions.
    Logistic,
    /// `level = steady · e^x`, for positive quantities.
    Log,
}

impl Transform {
    pub fn apply(self, steady: f64, x: f64) -> f64 {
        if x == 0.0 {
            return steady;
        }
        match self {
            Self::Logistic => {
                let z = (steady / (1.0 - steady)).ln() + x;
                1.0 / (1.0 + (-z).exp())
            }
            Self::Log => steady * x.exp(),
        }
    }

    /// Inverse of [`Transform::apply`].
    pub fn latent(self, steady: f64, level: f64) -> f64 {
        match self {
            Self::Logistic => (level / (1.0 - level)).ln() - (steady / (1.0 - steady)).ln(),
            Self::Log => (level / steady).ln(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcessSpec {
    pub persistence: f64,
    /// Innovation standard deviation in latent units.
    pub sigma: f64,
    pub steady: f64,
    pub transform: Transform,
}

/// Specification of all four processes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShockSpec {
    pub processes: [ProcessSpec; 4],
}

impl ShockSpec {
    pub const DEFAULT_PERSISTENCE: f64 = 0.9;
    /// Innovation standard deviations for (R, θ, μ, ξ).
    pub const DEFAULT_SIGMA: [f64; 4] = [0.01092, 0.0471, 0.0119, 0.0153];

    /// Default persistence and dispersions around the calibration's steady levels.
    pub fn from_params(params: &ModelParams) -> Self {
        let s = Self::DEFAULT_SIGMA;
        let rho = Self::DEFAULT_PERSISTENCE;
        let mk = |sigma, steady, transform| ProcessSpec {
            persistence: rho,
            sigma,
            steady,
            transform,
        };
        Self {
            processes: [
                mk(s[0], params.r_bar, Transform::Log),
                mk(s[1], params.theta_bar, Transform::Logistic),
                mk(s[2], params.mu_bar, Transform::Logistic),
                mk(s[3], params.xi_bar, Transform::Log),
            ],
        }
    }

    pub fn with_sigma_scale(mut self, scale: f64) -> Self {
        for p in &mut self.processes {
            p.sigma *= scale;
        }
        self
    }

    pub fn with_persistence(mut self, rho: f64) -> Self {
        for p in &mut self.processes {
            p.persistence = rho;
        }
        self
    }

    pub fn process(&self, p: ShockProcess) -> &ProcessSpec {
        &self.processes[p.index()]
    }

    pub fn validate(&self) -> Result<()> {
        for (p, s) in ShockProcess::ALL.iter().zip(&self.processes) {
            if !(0.0..1.0).contains(&s.persistence) {
                return Err(ModelError::Config(format!(
                    "persistence of {} must be in [0,1), got {}",
                    p.label(),
                    s.persistence
                )));
            }
            if !(s.sigma >= 0.0 && s.sigma.is_finite()) {
                return Err(ModelError::Config(format!("sigma of {} must be non-negative", p.label())));
            }
        }
        Ok(())
    }
}

/// Realised shock draws over `T` periods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShockPanel {
    pub spec: ShockSpec,
    /// Levels `(R, θ, μ, ξ)` per period.
    pub levels: Vec<[f64; 4]>,
    pub innovations: Vec<[f64; 4]>,
    pub latent: Vec<[f64; 4]>,
    pub seed: u64,
}

/// Seed of the `index`-th independent path derived from a base seed.
pub fn path_seed(seed: u64, index: u64) -> u64 {
    seed ^ index
}

impl ShockPanel {
    /// Draw `T` periods with latent `x_t = ρ x_{t-1} + ε_t`, `x_{-1} = 0`.
    pub fn draw(spec: &ShockSpec, periods: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let innovations = (0..periods)
            .map(|_| {
                let mut e = [0.0; 4];
                for (slot, p) in e.iter_mut().zip(&spec.processes) {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    *slot = p.sigma * z;
                }
                e
            })
            .collect();
        Self::from_innovations(spec, innovations, seed)
    }

    /// Build a panel from given innovations.
    pub fn from_innovations(spec: &ShockSpec, innovations: Vec<[f64; 4]>, seed: u64) -> Self {
        let mut x = [0.0; 4];
        let mut latent = Vec::with_capacity(innovations.len());
        let mut levels = Vec::with_capacity(innovations.len());
        for e in &innovations {
            let mut lv = [0.0; 4];
            for j in 0..4 {
                let p = &spec.processes[j];
                x[j] = p.persistence * x[j] + e[j];
                lv[j] = p.transform.apply(p.steady, x[j]);
            }
            latent.push(x);
            levels.push(lv);
        }
        Self {
            spec: spec.clone(),
            levels,
            innovations,
            latent,
            seed,
        }
    }

    /// All innovations zero.
    pub fn zero(spec: &ShockSpec, periods: usize) -> Self {
        Self::from_innovations(spec, vec![[0.0; 4]; periods], 0)
    }

    /// A single innovation of `magnitude` standard deviations at `t = 0`.
    pub fn impulse(spec: &ShockSpec, process: ShockProcess, magnitude: f64, periods: usize) -> Self {
        let mut innov = vec![[0.0; 4]; periods];
        if periods > 0 {
            innov[0][process.index()] = magnitude * spec.process(process).sigma;
        }
        Self::from_innovations(spec, innov, 0)
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn level(&self, t: usize, p: ShockProcess) -> f64 {
        self.levels[t][p.index()]
    }

    /// Period drivers for the residual system.
    pub fn drivers(&self, t: usize) -> Drivers {
        let lv = self.levels[t];
        Drivers {
            theta: lv[1],
            mu: lv[2],
            xi: lv[3],
            x_r: self.latent[t][0],
            x_r_prev: if t == 0 { 0.0 } else { self.latent[t - 1][0] },
        }
    }
}
