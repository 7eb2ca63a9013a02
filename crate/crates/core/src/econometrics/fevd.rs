//! Forecast-error variance decomposition.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::var::{ordered_impact, VarModel};
use crate::error::Result;

/// Horizon of the short-run ("conditional") decomposition.
pub const CONDITIONAL_HORIZON: usize = 4;
/// Per-step change below which shares count as converged.
pub const CONVERGENCE_TOL: f64 = 1e-6;
const MAX_STEPS: usize = 100_000;

/// How far ahead to decompose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FevdHorizon {
    Steps(usize),
    /// First horizon at which no share moves by more than [`CONVERGENCE_TOL`].
    Converged,
}

/// `shares[m][(i, j)]`: share of variable `i`'s forecast-error variance due
/// to ordered shock `j` for horizon entry `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FevdTable {
    pub variables: Vec<String>,
    /// Names of the ordered shocks (the ordering's variables).
    pub shocks: Vec<String>,
    pub requested: Vec<FevdHorizon>,
    /// Resolved step count for each requested horizon.
    pub steps: Vec<usize>,
    pub shares: Vec<DMatrix<f64>>,
}

impl FevdTable {
    pub fn share(&self, horizon_idx: usize, variable: &str, shock: &str) -> Option<f64> {
        let i = self.variables.iter().position(|v| v == variable)?;
        let j = self.shocks.iter().position(|v| v == shock)?;
        Some(self.shares[horizon_idx][(i, j)])
    }
}

fn normalise(mse: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = mse.clone();
    for mut row in out.row_iter_mut() {
        let total: f64 = row.iter().sum();
        if total > 0.0 {
            row /= total;
        }
    }
    out
}

/// Decompose forecast-error variance for each requested horizon.
///
/// `Steps(h)` accumulates squared orthogonalised responses over `0..h`.
pub fn fevd(model: &VarModel, horizons: &[FevdHorizon], ordering: &[usize]) -> Result<FevdTable> {
    let b = ordered_impact(&model.sigma, ordering)?;
    let k = model.k();
    let max_fixed = horizons
        .iter()
        .filter_map(|h| match h {
            FevdHorizon::Steps(s) => Some(*s),
            FevdHorizon::Converged => None,
        })
        .max()
        .unwrap_or(1)
        .max(1);
    let needs_converged = horizons.contains(&FevdHorizon::Converged);

    // accumulate step by step so the converged horizon needs no preset length
    let mut mse = DMatrix::<f64>::zeros(k, k);
    let mut fixed: Vec<(usize, DMatrix<f64>)> = Vec::new();
    let mut converged: Option<(usize, DMatrix<f64>)> = None;
    let mut prev_shares: Option<DMatrix<f64>> = None;
    // newest first: recent[l] = Ψ_{h-1-l}
    let mut recent: VecDeque<DMatrix<f64>> = VecDeque::with_capacity(model.coefs.len() + 1);
    for step in 1..=MAX_STEPS {
        let psi = if recent.is_empty() {
            DMatrix::identity(k, k)
        } else {
            model
                .coefs
                .iter()
                .zip(&recent)
                .fold(DMatrix::zeros(k, k), |acc, (a, prev)| acc + a * prev)
        };
        let theta = &psi * &b;
        recent.push_front(psi);
        recent.truncate(model.coefs.len());
        mse += theta.component_mul(&theta);
        let shares = normalise(&mse);
        if step <= max_fixed {
            fixed.push((step, shares.clone()));
        }
        if needs_converged && converged.is_none() {
            if let Some(prev) = &prev_shares {
                if (&shares - prev).amax() < CONVERGENCE_TOL {
                    converged = Some((step, shares.clone()));
                }
            }
        }
        prev_shares = Some(shares);
        if step >= max_fixed && (!needs_converged || converged.is_some()) {
            break;
        }
    }
    let converged = converged.unwrap_or_else(|| (MAX_STEPS, prev_shares.clone().unwrap()));
    let mut steps = Vec::new();
    let mut shares = Vec::new();
    for h in horizons {
        match h {
            FevdHorizon::Steps(s) => {
                let s = (*s).max(1);
                steps.push(s);
                shares.push(fixed[s - 1].1.clone());
            }
            FevdHorizon::Converged => {
                steps.push(converged.0);
                shares.push(converged.1.clone());
            }
        }
    }
    Ok(FevdTable {
        variables: model.names.clone(),
        shocks: ordering.iter().map(|&i| model.names[i].clone()).collect(),
        requested: horizons.to_vec(),
        steps,
        shares,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn model(coefs: Vec<DMatrix<f64>>, sigma: DMatrix<f64>) -> VarModel {
        let k = sigma.nrows();
        VarModel {
            lag: coefs.len(),
            coefs,
            intercept: DVector::zeros(k),
            sigma,
            names: (0..k).map(|i| format!("v{i}")).collect(),
            nobs: 0,
            bic: vec![],
            spectral_radius: 0.0,
        }
    }

    #[test]
    fn univariate_share_is_one() {
        let m = model(vec![DMatrix::from_element(1, 1, 0.7)], DMatrix::identity(1, 1));
        let t = fevd(&m, &[FevdHorizon::Steps(1), FevdHorizon::Steps(10), FevdHorizon::Converged], &[0]).unwrap();
        for s in &t.shares {
            assert_eq!(s[(0, 0)], 1.0);
        }
    }

    #[test]
    fn block_diagonal_has_no_cross_shares() {
        let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.2]);
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 3.0]);
        let m = model(vec![a], s);
        let t = fevd(&m, &[FevdHorizon::Steps(4), FevdHorizon::Converged], &[0, 1]).unwrap();
        for sh in &t.shares {
            assert_eq!(sh[(0, 1)], 0.0);
            assert_eq!(sh[(1, 0)], 0.0);
        }
    }

    #[test]
    fn converged_horizon_is_stationary() {
        let a = DMatrix::from_row_slice(2, 2, &[0.9, 0.1, 0.05, 0.8]);
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 0.5]);
        let m = model(vec![a], s);
        let t = fevd(&m, &[FevdHorizon::Converged], &[0, 1]).unwrap();
        let n = t.steps[0];
        let later = fevd(&m, &[FevdHorizon::Steps(n + 50)], &[0, 1]).unwrap();
        assert!((&later.shares[0] - &t.shares[0]).amax() < 1e-4);
        for row in t.shares[0].row_iter() {
            assert!((row.sum() - 1.0).abs() < 1e-10);
        }
    }
}
