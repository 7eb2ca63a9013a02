//! Reduced-form VAR with BIC lag selection and orthogonalised impulse responses.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::linalg::least_squares;
use crate::error::{ModelError, Result};

/// Fitted VAR(p): `y_t = c + Σ_l A_l y_{t-l} + u_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarModel {
    pub lag: usize,
    /// `A_1 .. A_p`, each `k × k`.
    pub coefs: Vec<DMatrix<f64>>,
    pub intercept: DVector<f64>,
    /// Innovation covariance (ML, divided by the effective sample).
    pub sigma: DMatrix<f64>,
    pub names: Vec<String>,
    /// Effective sample size used for estimation.
    pub nobs: usize,
    /// `(lag, BIC)` for every candidate order.
    pub bic: Vec<(usize, f64)>,
    pub spectral_radius: f64,
}

impl VarModel {
    pub fn k(&self) -> usize {
        self.intercept.len()
    }

    pub fn is_stable(&self) -> bool {
        self.spectral_radius < 1.0
    }

    /// Companion matrix of size `kp × kp`.
    pub fn companion(&self) -> DMatrix<f64> {
        companion(&self.coefs)
    }

    /// Resolve a list of variable names into an ordering permutation.
    pub fn ordering_of(&self, names: &[&str]) -> Result<Vec<usize>> {
        names
            .iter()
            .map(|n| {
                self.names
                    .iter()
                    .position(|m| m == n)
                    .ok_or_else(|| ModelError::Config(format!("unknown VAR variable `{n}`")))
            })
            .collect()
    }
}

pub(crate) fn companion(coefs: &[DMatrix<f64>]) -> DMatrix<f64> {
    let p = coefs.len();
    let k = coefs[0].nrows();
    let mut c = DMatrix::zeros(k * p, k * p);
    for (l, a) in coefs.iter().enumerate() {
        c.view_mut((0, l * k), (k, k)).copy_from(a);
    }
    for i in k..k * p {
        c[(i, i - k)] = 1.0;
    }
    c
}

fn spectral_radius(coefs: &[DMatrix<f64>]) -> f64 {
    companion(coefs)
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Estimate VARs of order `1..=max_lag` on a common sample (first `max_lag`
/// rows held out) and keep the BIC minimiser, then refit it.
///
/// `BIC = ln det Σ̂ + (ln T_eff / T_eff) (k² p + k)`.
pub fn fit_var(data: &DMatrix<f64>, names: &[String], max_lag: usize) -> Result<VarModel> {
    let (t, k) = data.shape();
    if names.len() != k {
        return Err(ModelError::LengthMismatch { left: names.len(), right: k });
    }
    if max_lag == 0 {
        return Err(ModelError::Domain("max_lag must be at least 1".into()));
    }
    if t <= k * max_lag + 10 {
        return Err(ModelError::InsufficientSample {
            needed: k * max_lag + 10,
            have: t,
        });
    }
    let mut bic = Vec::with_capacity(max_lag);
    let mut best: Option<(f64, VarModel)> = None;
    for p in 1..=max_lag {
        let model = fit_order(data, names, p, max_lag)?;
        let t_eff = model.nobs as f64;
        let logdet = log_det_spd(&model.sigma)?;
        let score = logdet + t_eff.ln() / t_eff * ((k * k * p + k) as f64);
        bic.push((p, score));
        if best.as_ref().is_none_or(|(b, _)| score < *b) {
            best = Some((score, model));
        }
    }
    let (_, mut model) = best.expect("at least one candidate");
    model.bic = bic;
    Ok(model)
}

/// Least-squares VAR(p) using rows `start..` as the dependent sample.
pub fn fit_order(data: &DMatrix<f64>, names: &[String], p: usize, start: usize) -> Result<VarModel> {
    let (t, k) = data.shape();
    let n = t - start;
    let ncol = 1 + k * p;
    let mut z = DMatrix::zeros(n, ncol);
    let mut labels = Vec::with_capacity(ncol);
    labels.push("const".to_string());
    for l in 1..=p {
        labels.extend(names.iter().map(|nm| format!("{nm}(-{l})")));
    }
    for r in 0..n {
        z[(r, 0)] = 1.0;
        for l in 1..=p {
            for j in 0..k {
                z[(r, 1 + (l - 1) * k + j)] = data[(start + r - l, j)];
            }
        }
    }
    let y = data.rows(start, n).into_owned();
    let ls = least_squares(&z, &y, &labels)?;
    let b = &ls.coef;
    let intercept = b.row(0).transpose();
    let coefs: Vec<DMatrix<f64>> = (0..p)
        .map(|l| b.rows(1 + l * k, k).transpose())
        .collect();
    let sigma = (ls.residuals.transpose() * &ls.residuals) / n as f64;
    let sigma = 0.5 * (&sigma + sigma.transpose());
    let spectral_radius = spectral_radius(&coefs);
    Ok(VarModel {
        lag: p,
        coefs,
        intercept,
        sigma,
        names: names.to_vec(),
        nobs: n,
        bic: Vec::new(),
        spectral_radius,
    })
}

fn log_det_spd(m: &DMatrix<f64>) -> Result<f64> {
    let chol = m
        .clone()
        .cholesky()
        .ok_or_else(|| ModelError::NotPositiveDefinite("innovation covariance".into()))?;
    Ok(2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

/// Lower Cholesky factor of `Σ` under `ordering`, mapped back to the original
/// variable order. Column `j` is the impact of the `j`-th ordered shock.
pub fn ordered_impact(sigma: &DMatrix<f64>, ordering: &[usize]) -> Result<DMatrix<f64>> {
    let k = sigma.nrows();
    check_ordering(ordering, k)?;
    let permuted = DMatrix::from_fn(k, k, |i, j| sigma[(ordering[i], ordering[j])]);
    let chol = permuted
        .cholesky()
        .ok_or_else(|| ModelError::NotPositiveDefinite("innovation covariance under ordering".into()))?;
    let l = chol.l();
    let mut b = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            b[(ordering[i], j)] = l[(i, j)];
        }
    }
    Ok(b)
}

fn check_ordering(ordering: &[usize], k: usize) -> Result<()> {
    let mut seen = vec![false; k];
    if ordering.len() != k {
        return Err(ModelError::LengthMismatch { left: ordering.len(), right: k });
    }
    for &o in ordering {
        if o >= k || seen[o] {
            return Err(ModelError::Config(format!("ordering is not a permutation of 0..{k}")));
        }
        seen[o] = true;
    }
    Ok(())
}

/// Moving-average matrices `Ψ_0 = I, Ψ_h = Σ_l A_l Ψ_{h-l}` for `h < steps`.
pub fn ma_matrices(coefs: &[DMatrix<f64>], steps: usize) -> Vec<DMatrix<f64>> {
    let k = coefs[0].nrows();
    let mut psi: Vec<DMatrix<f64>> = Vec::with_capacity(steps);
    for h in 0..steps {
        if h == 0 {
            psi.push(DMatrix::identity(k, k));
            continue;
        }
        let mut m = DMatrix::zeros(k, k);
        for (l, a) in coefs.iter().enumerate() {
            if h > l {
                m += a * &psi[h - 1 - l];
            }
        }
        psi.push(m);
    }
    psi
}

/// Orthogonalised impulse responses for horizons `0..=horizon`.
/// `irf[h][(i, j)]` is the response of variable `i` to the `j`-th ordered shock.
pub fn irf_var(model: &VarModel, horizon: usize, ordering: &[usize]) -> Result<Vec<DMatrix<f64>>> {
    let b = ordered_impact(&model.sigma, ordering)?;
    Ok(ma_matrices(&model.coefs, horizon + 1)
        .into_iter()
        .map(|psi| psi * &b)
        .collect())
}
