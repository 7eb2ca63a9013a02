//! Run configuration: model keys plus run settings in one flat file.

use std::fmt::Write as _;
use std::path::Path;

use reservoir_core::{ModelParams, ShockSpec};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// The configuration shipped with the binary.
pub const DEFAULT_CONFIG: &str = include_str!("../default.conf");

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub seed: u64,
    /// Periods kept for `simulate` and the decomposition reports.
    pub periods: usize,
    pub burn_in: usize,
    pub persistence: f64,
    pub sigma_scale: f64,
    /// Sample length behind the VAR, LP and FEVD estimates.
    pub var_periods: usize,
    pub max_lag: usize,
    pub horizon: usize,
    pub draws: usize,
    pub draws_burn_in: usize,
    pub growth_n_growth: f64,
    pub growth_n_sigma: f64,
    pub growth_draws: usize,
    pub growth_horizon: usize,
    pub growth_periods: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: ModelParams::default(),
            seed: 1,
            periods: 400,
            burn_in: 200,
            persistence: ShockSpec::DEFAULT_PERSISTENCE,
            sigma_scale: 1.0,
            var_periods: 20_000,
            max_lag: 4,
            horizon: 20,
            draws: 20_000,
            draws_burn_in: 5_000,
            growth_n_growth: 0.0,
            growth_n_sigma: 0.01,
            growth_draws: 2_000,
            growth_horizon: 2_000,
            growth_periods: 100,
        }
    }
}

macro_rules! run_keys {
    ($m:ident) => {
        $m!(
            seed,
            periods,
            burn_in,
            persistence,
            sigma_scale,
            var_periods,
            max_lag,
            horizon,
            draws,
            draws_burn_in,
            growth_n_growth,
            growth_n_sigma,
            growth_draws,
            growth_horizon,
            growth_periods
        )
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Lines are `key = value`; `#` starts a comment. Missing keys keep defaults.
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`, got `{line}`", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let res = if cfg.set_run_key(key, value)? {
                Ok(())
            } else {
                cfg.params.set(key, value)
            };
            res.map_err(|e| CliError::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// `Ok(false)` when `key` is not a run setting.
    fn set_run_key(&mut self, key: &str, value: &str) -> CliResult<bool> {
        macro_rules! set {
            ($($k:ident),*) => {
                match key {
                    $(stringify!($k) => {
                        self.$k = value.parse().map_err(|_| {
                            CliError::Config(format!("key `{key}`: cannot parse `{value}`"))
                        })?;
                        Ok(true)
                    })*
                    _ => Ok(false),
                }
            };
        }
        run_keys!(set)
    }

    fn validate(&self) -> CliResult<()> {
        self.params.validate()?;
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        if !(0.0..1.0).contains(&self.persistence) {
            return bad("persistence must be in [0, 1)");
        }
        if !(self.sigma_scale >= 0.0 && self.sigma_scale.is_finite()) {
            return bad("sigma_scale must be non-negative");
        }
        if self.periods == 0 || self.var_periods == 0 || self.growth_periods == 0 {
            return bad("period counts must be positive");
        }
        if self.max_lag == 0 {
            return bad("max_lag must be at least 1");
        }
        if self.draws < 2 || self.growth_draws < 2 {
            return bad("draw counts must be at least 2");
        }
        Ok(())
    }

    pub fn shock_spec(&self) -> ShockSpec {
        ShockSpec::from_params(&self.params)
            .with_persistence(self.persistence)
            .with_sigma_scale(self.sigma_scale)
    }

    /// Canonical rendering: every key, fixed order, seed excluded.
    pub fn canonical(&self) -> String {
        let mut out = self.params.to_config_string();
        macro_rules! emit {
            ($($k:ident),*) => {
                $(
                    if stringify!($k) != "seed" {
                        let _ = writeln!(out, "{} = {:?}", stringify!($k), self.$k);
                    }
                )*
            };
        }
        run_keys!(emit);
        out
    }

    /// SHA-256 of [`RunConfig::canonical`], hex encoded.
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical().as_bytes())
            .iter()
            .fold(String::with_capacity(64), |mut s, b| {
                let _ = write!(s, "{b:02x}");
                s
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_config_is_the_default() {
        assert_eq!(RunConfig::parse(DEFAULT_CONFIG).unwrap(), RunConfig::default());
    }

    #[test]
    fn canonical_round_trips() {
        let cfg = RunConfig {
            periods: 77,
            params: ModelParams {
                theta_bar: 0.3,
                ..ModelParams::default()
            },
            ..RunConfig::default()
        };
        let back = RunConfig::parse(&cfg.canonical()).unwrap();
        assert_eq!(back.hash(), cfg.hash());
        assert_eq!(back.periods, 77);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = RunConfig::parse("periods = 10\nbogus_key = 3\n").unwrap_err();
        assert!(err.to_string().contains("bogus_key"), "{err}");
        assert!(err.to_string().contains("line 2"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn hash_ignores_seed_but_not_settings() {
        let a = RunConfig::default();
        let b = RunConfig { seed: 99, ..a.clone() };
        let c = RunConfig { horizon: 12, ..a.clone() };
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
    }
}
