//! Period-by-period simulation from the steady state under a shock panel.
//!
//! Expectations are certainty-equivalent: inside each period the future
//! marginal utility and rate are frozen at their current values.

use serde::{Deserialize, Serialize};

use crate::equilibrium::residuals::{inf_norm, step_residuals_into, N_RESIDUALS};
use crate::equilibrium::solver::{decode, encode, reduced, ChordSolver};
use crate::equilibrium::{solve_steady_state, EconomyState, SteadyState};
use crate::error::{ModelError, Result};
use crate::params::ModelParams;
use crate::shocks::{path_seed, ShockPanel, ShockProcess, ShockSpec};

const PERIOD_TOL: f64 = 1e-11;
const PERIOD_MAX_ITER: usize = 60;
/// Rows of the residual vector that are market-clearing conditions.
const CLEARING_ROWS: [usize; 3] = [19, 20, 21];

/// A simulated path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimPath {
    pub states: Vec<EconomyState>,
    pub panel: ShockPanel,
    /// Largest market-clearing residual in each period.
    pub clearing_residuals: Vec<f64>,
    /// Steady state the path started from.
    pub steady: EconomyState,
}

/// Percent deviation `100 (y - ȳ) / |ȳ|`; absolute difference times 100 when `ȳ = 0`.
pub fn percent_deviation(value: f64, steady: f64) -> f64 {
    if steady == 0.0 {
        100.0 * value
    } else {
        100.0 * (value - steady) / steady.abs()
    }
}

impl SimPath {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Drop the first `n` periods (burn-in).
    pub fn skip(mut self, n: usize) -> Self {
        let n = n.min(self.states.len());
        self.states.drain(..n);
        self.clearing_residuals.drain(..n);
        self.panel.levels.drain(..n);
        self.panel.innovations.drain(..n);
        self.panel.latent.drain(..n);
        self
    }

    pub fn max_clearing_residual(&self) -> f64 {
        self.clearing_residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Level series by name (see [`EconomyState::series`]).
    pub fn series(&self, name: &str) -> Option<Vec<f64>> {
        self.steady.series(name)?;
        Some(self.states.iter().map(|s| s.series(name).unwrap()).collect())
    }

    /// Series in percent deviation from the steady state.
    pub fn deviation_series(&self, name: &str) -> Option<Vec<f64>> {
        let bar = self.steady.series(name)?;
        Some(
            self.states
                .iter()
                .map(|s| percent_deviation(s.series(name).unwrap(), bar))
                .collect(),
        )
    }

    /// CSV column labels: period, state variables, then exogenous levels.
    pub fn csv_header() -> Vec<String> {
        let mut h = vec!["t".to_string()];
        h.extend(EconomyState::NAMES.iter().map(|s| s.to_string()));
        h.extend(["GDP", "theta", "mu", "xi", "R_shock"].iter().map(|s| s.to_string()));
        h
    }

    /// Row `t` matching [`SimPath::csv_header`].
    pub fn csv_row(&self, t: usize) -> Vec<f64> {
        let s = &self.states[t];
        let lv = self.panel.levels[t];
        let mut row = vec![t as f64];
        row.extend(s.to_vec());
        row.extend([s.gdp(), lv[1], lv[2], lv[3], lv[0]]);
        row
    }
}

/// Simulate `panel` forward from `start`.
pub fn simulate(params: &ModelParams, panel: &ShockPanel, start: &SteadyState) -> Result<SimPath> {
    let anchors = start.anchors();
    let mut chord = ChordSolver::new();
    let mut prev = start.state;
    let mut states = Vec::with_capacity(panel.len());
    let mut clearing = Vec::with_capacity(panel.len());
    let mut full = [0.0; N_RESIDUALS];
    for t in 0..panel.len() {
        let drv = panel.drivers(t);
        let p_ref = prev;
        let sys = reduced(|s: &EconomyState, out: &mut [f64]| {
            step_residuals_into(&p_ref, s, s, &drv, params, &anchors, out)
        });
        let outcome = chord
            .solve(&sys, &encode(&prev), PERIOD_TOL, PERIOD_MAX_ITER)
            .map_err(|e| match e {
                ModelError::NonConvergence { residual, .. } => ModelError::PeriodSolver { period: t, residual },
                _ => ModelError::PeriodSolver {
                    period: t,
                    residual: f64::NAN,
                },
            })?;
        let state = decode(&outcome.x);
        step_residuals_into(&prev, &state, &state, &drv, params, &anchors, &mut full);
        let worst = inf_norm(&CLEARING_ROWS.map(|i| full[i]));
        clearing.push(worst);
        states.push(state);
        prev = state;
    }
    Ok(SimPath {
        states,
        panel: panel.clone(),
        clearing_residuals: clearing,
        steady: start.state,
    })
}

/// Simulate `n_paths` independent paths concurrently; path `k` uses seed
/// `seed ^ k`.
pub fn simulate_many(
    params: &ModelParams,
    spec: &ShockSpec,
    start: &SteadyState,
    periods: usize,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<SimPath>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..n_paths as u64)
            .map(|k| {
                scope.spawn(move || {
                    let panel = ShockPanel::draw(spec, periods, path_seed(seed, k));
                    simulate(params, &panel, start)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation thread panicked"))
            .collect()
    })
}

/// Model-true impulse responses in percent deviation from steady state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpulsePaths {
    pub process: ShockProcess,
    pub magnitude: f64,
    pub names: Vec<String>,
    /// `paths[v][h]` for variable `v` at horizon `h`.
    pub paths: Vec<Vec<f64>>,
}

impl ImpulsePaths {
    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.names.iter().position(|n| n == name).map(|i| self.paths[i].as_slice())
    }
}

/// Response to a `magnitude`-standard-deviation innovation in `process` at
/// `t = 0`, net of the zero-shock baseline, over `horizon` periods.
pub fn impulse_path(
    params: &ModelParams,
    spec: &ShockSpec,
    process: ShockProcess,
    magnitude: f64,
    horizon: usize,
) -> Result<ImpulsePaths> {
    if horizon == 0 {
        return Err(ModelError::Domain("horizon must be at least 1".into()));
    }
    let ss = solve_steady_state(params)?;
    impulse_path_from(params, spec, &ss, process, magnitude, horizon)
}

/// [`impulse_path`] from an already solved steady state.
pub fn impulse_path_from(
    params: &ModelParams,
    spec: &ShockSpec,
    ss: &SteadyState,
    process: ShockProcess,
    magnitude: f64,
    horizon: usize,
) -> Result<ImpulsePaths> {
    let base = simulate(params, &ShockPanel::zero(spec, horizon), ss)?;
    let hit = simulate(params, &ShockPanel::impulse(spec, process, magnitude, horizon), ss)?;
    let mut names: Vec<String> = EconomyState::NAMES.iter().map(|s| s.to_string()).collect();
    names.push("GDP".into());
    let paths = names
        .iter()
        .map(|n| {
            let bar = ss.state.series(n).unwrap();
            (0..horizon)
                .map(|h| {
                    let diff = hit.states[h].series(n).unwrap() - base.states[h].series(n).unwrap();
                    if bar == 0.0 {
                        100.0 * diff
                    } else {
                        100.0 * diff / bar.abs()
                    }
                })
                .collect()
        })
        .collect();
    Ok(ImpulsePaths {
        process,
        magnitude,
        names,
        paths,
    })
}
