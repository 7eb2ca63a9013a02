//! Model calibration and its flat `key = value` text format.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

/// Full calibration record.
///
/// Defaults reproduce the benchmark calibration. `chi = None` means the money
/// utility weight is calibrated from the steady-state money condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub beta: f64,
    pub beta_g: f64,
    pub delta_k: f64,
    pub sigma: f64,
    pub j_h: f64,
    pub j_f: f64,
    pub kappa: f64,
    pub chi: Option<f64>,
    pub tax_g: f64,
    pub tax_q: f64,
    pub theta_bar: f64,
    pub mu_bar: f64,
    pub xi_bar: f64,
    pub r_bar: f64,
    pub phi_h: f64,
    pub psi_h: f64,
    pub phi_f: f64,
    pub psi_f: f64,
    pub rho_r: f64,
    pub rho_y: f64,
    pub w_g: f64,
    pub gamma_d: f64,
    pub land_supply: f64,
    pub labor_supply: f64,
    pub eta: f64,
    /// Productivity response to net public investment.
    pub lambda_p: f64,
    /// Per-period log adjustment speed of capital toward its target (1 = static).
    pub capital_adjustment: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            beta: 0.98,
            beta_g: 0.98,
            delta_k: 0.01,
            sigma: 0.9,
            j_h: 0.2,
            j_f: 0.2,
            kappa: 0.1,
            chi: None,
            tax_g: 0.05,
            tax_q: 0.05,
            theta_bar: 0.2833,
            mu_bar: 0.0336,
            xi_bar: 0.0357,
            r_bar: 0.032,
            phi_h: 0.4,
            psi_h: 0.3,
            phi_f: 0.5,
            psi_f: 0.2,
            rho_r: 0.9929,
            rho_y: 0.0071,
            w_g: 0.5,
            gamma_d: 0.5,
            land_supply: 1.0,
            labor_supply: 1.0,
            eta: 0.01,
            lambda_p: 0.0,
            capital_adjustment: 0.1,
        }
    }
}

macro_rules! scalar_keys {
    ($m:ident) => {
        $m! {
            beta, beta_g, delta_k, sigma, j_h, j_f, kappa, tax_g, tax_q, theta_bar, mu_bar, xi_bar,
            r_bar, phi_h, psi_h, phi_f, psi_f, rho_r, rho_y, w_g, gamma_d, land_supply, labor_supply,
            eta, lambda_p, capital_adjustment
        }
    };
}

impl ModelParams {
    /// Labour share of sector h.
    pub fn labor_share_h(&self) -> f64 {
        1.0 - self.phi_h - self.psi_h
    }

    /// Labour share of sector f.
    pub fn labor_share_f(&self) -> f64 {
        1.0 - self.phi_f - self.psi_f
    }

    /// Names of every recognised config key, in canonical order.
    pub fn keys() -> Vec<&'static str> {
        macro_rules! names {
            ($($k:ident),*) => { vec![$(stringify!($k)),*] };
        }
        let mut v = scalar_keys!(names);
        v.insert(7, "chi");
        v
    }

    pub fn validate(&self) -> Result<()> {
        let unit_open = |name: &'static str, v: f64| -> Result<()> {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(ModelError::InvalidParameter {
                    name,
                    reason: format!("{v} not in (0,1)"),
                })
            }
        };
        let positive = |name: &'static str, v: f64| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ModelError::InvalidParameter {
                    name,
                    reason: format!("{v} must be positive"),
                })
            }
        };
        let finite = |name: &'static str, v: f64| -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(ModelError::InvalidParameter {
                    name,
                    reason: "not finite".into(),
                })
            }
        };
        unit_open("beta", self.beta)?;
        unit_open("beta_g", self.beta_g)?;
        unit_open("delta_k", self.delta_k)?;
        positive("sigma", self.sigma)?;
        positive("j_h", self.j_h)?;
        positive("j_f", self.j_f)?;
        finite("kappa", self.kappa)?;
        if let Some(chi) = self.chi {
            finite("chi", chi)?;
        }
        if !(0.0..1.0).contains(&self.tax_g) {
            return Err(ModelError::InvalidParameter {
                name: "tax_g",
                reason: format!("{} not in [0,1)", self.tax_g),
            });
        }
        if !(0.0..1.0).contains(&self.tax_q) {
            return Err(ModelError::InvalidParameter {
                name: "tax_q",
                reason: format!("{} not in [0,1)", self.tax_q),
            });
        }
        unit_open("theta_bar", self.theta_bar)?;
        if !(0.0..1.0).contains(&self.mu_bar) {
            return Err(ModelError::InvalidParameter {
                name: "mu_bar",
                reason: format!("{} not in [0,1)", self.mu_bar),
            });
        }
        unit_open("xi_bar", self.xi_bar)?;
        positive("r_bar", self.r_bar)?;
        unit_open("phi_h", self.phi_h)?;
        unit_open("psi_h", self.psi_h)?;
        unit_open("phi_f", self.phi_f)?;
        unit_open("psi_f", self.psi_f)?;
        if self.phi_h + self.psi_h >= 1.0 {
            return Err(ModelError::InvalidParameter {
                name: "psi_h",
                reason: "phi_h + psi_h must be below 1".into(),
            });
        }
        if self.phi_f + self.psi_f >= 1.0 {
            return Err(ModelError::InvalidParameter {
                name: "psi_f",
                reason: "phi_f + psi_f must be below 1".into(),
            });
        }
        if ((self.phi_h + self.psi_h) - (self.phi_f + self.psi_f)).abs() > 1e-12 {
            return Err(ModelError::InvalidParameter {
                name: "psi_f",
                reason: format!(
                    "labour shares must match across sectors: phi_h+psi_h={} vs phi_f+psi_f={}",
                    self.phi_h + self.psi_h,
                    self.phi_f + self.psi_f
                ),
            });
        }
        if !(0.0..1.0).contains(&self.rho_r) {
            return Err(ModelError::InvalidParameter {
                name: "rho_r",
                reason: format!("{} not in [0,1)", self.rho_r),
            });
        }
        finite("rho_y", self.rho_y)?;
        if !(0.0..=1.0).contains(&self.w_g) {
            return Err(ModelError::InvalidParameter {
                name: "w_g",
                reason: format!("{} not in [0,1]", self.w_g),
            });
        }
        if !(self.gamma_d >= 0.0 && self.gamma_d.is_finite()) {
            return Err(ModelError::InvalidParameter {
                name: "gamma_d",
                reason: format!("{} must be non-negative", self.gamma_d),
            });
        }
        positive("land_supply", self.land_supply)?;
        positive("labor_supply", self.labor_supply)?;
        positive("eta", self.eta)?;
        finite("lambda_p", self.lambda_p)?;
        if !(self.capital_adjustment > 0.0 && self.capital_adjustment <= 1.0) {
            return Err(ModelError::InvalidParameter {
                name: "capital_adjustment",
                reason: format!("{} not in (0,1]", self.capital_adjustment),
            });
        }
        Ok(())
    }

    /// Parse a flat config. Lines are `key = value`; `#` starts a comment.
    /// Missing keys keep their defaults; unknown keys are rejected.
    /// `chi = auto` restores calibration of the money weight.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut p = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ModelError::Config(format!("line {}: expected `key = value`, got `{line}`", lineno + 1))
            })?;
            p.set(key.trim(), value.trim())
                .map_err(|e| ModelError::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        p.validate()?;
        Ok(p)
    }

    /// Set a single key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        if key == "chi" {
            self.chi = if value.eq_ignore_ascii_case("auto") {
                None
            } else {
                Some(parse_f64(key, value)?)
            };
            return Ok(());
        }
        macro_rules! assign {
            ($($k:ident),*) => {
                match key {
                    $(stringify!($k) => { self.$k = parse_f64(key, value)?; Ok(()) })*
                    other => Err(format!("unknown config key `{other}`")),
                }
            };
        }
        scalar_keys!(assign)
    }

    /// Render every key in canonical order; round-trips through
    /// [`ModelParams::from_config_str`].
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        macro_rules! emit {
            ($($k:ident),*) => {
                $(
                    if stringify!($k) == "tax_g" {
                        match self.chi {
                            Some(c) => { let _ = writeln!(out, "chi = {c:?}"); }
                            None => { let _ = writeln!(out, "chi = auto"); }
                        }
                    }
                    let _ = writeln!(out, "{} = {:?}", stringify!($k), self.$k);
                )*
            };
        }
        scalar_keys!(emit);
        out
    }
}

fn parse_f64(key: &str, value: &str) -> std::result::Result<f64, String> {
    value
        .parse::<f64>()
        .map_err(|_| format!("value `{value}` for key `{key}` is not a number"))
}
