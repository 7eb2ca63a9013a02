//! Least squares through QR followed by an SVD of the small triangular factor.

use nalgebra::{DMatrix, DVector};

use crate::error::{ModelError, Result};

/// Relative singular-value floor below which the design is rank deficient.
const RANK_TOL: f64 = 1e-12;

/// Fitted least-squares system `Y ≈ Z B`.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    /// `n_regressors × n_outcomes`.
    pub coef: DMatrix<f64>,
    pub residuals: DMatrix<f64>,
    /// `(Z'Z)^{-1}`.
    pub xtx_inv: DMatrix<f64>,
    pub singular_values: DVector<f64>,
}

impl LeastSquares {
    /// Homoskedastic standard errors, `n_regressors × n_outcomes`.
    pub fn std_errors(&self) -> DMatrix<f64> {
        let (n, p) = (self.residuals.nrows(), self.xtx_inv.nrows());
        let dof = (n - p).max(1) as f64;
        let mut se = DMatrix::zeros(p, self.coef.ncols());
        for j in 0..self.coef.ncols() {
            let s2 = self.residuals.column(j).norm_squared() / dof;
            for i in 0..p {
                se[(i, j)] = (s2 * self.xtx_inv[(i, i)]).max(0.0).sqrt();
            }
        }
        se
    }
}

/// Solve `min ||Y - Z B||` column by column. `names` label the columns of `Z`
/// for the rank-deficiency error.
pub fn least_squares(z: &DMatrix<f64>, y: &DMatrix<f64>, names: &[String]) -> Result<LeastSquares> {
    let (n, p) = z.shape();
    if y.nrows() != n {
        return Err(ModelError::LengthMismatch { left: n, right: y.nrows() });
    }
    if n <= p {
        return Err(ModelError::InsufficientSample { needed: p, have: n });
    }
    let qr = z.clone().qr();
    let r = qr.r();
    let mut qty = y.clone();
    qr.q_tr_mul(&mut qty);
    let qty = qty.rows(0, p).into_owned();
    let svd = r.svd(true, true);
    let s = svd.singular_values.clone();
    let smax = s.max();
    let u = svd.u.as_ref().expect("u computed");
    let v_t = svd.v_t.as_ref().expect("v_t computed");
    let weak: Vec<usize> = (0..p).filter(|&i| !(s[i] > RANK_TOL * smax)).collect();
    if !weak.is_empty() {
        let mut cols: Vec<String> = Vec::new();
        for &i in &weak {
            let row = v_t.row(i);
            let big = row.amax();
            for j in 0..p {
                if row[j].abs() > 0.1 * big {
                    let label = names.get(j).cloned().unwrap_or_else(|| format!("col{j}"));
                    if !cols.contains(&label) {
                        cols.push(label);
                    }
                }
            }
        }
        return Err(ModelError::RankDeficient { columns: cols });
    }
    let s_inv = DMatrix::from_diagonal(&s.map(|x| 1.0 / x));
    let v = v_t.transpose();
    let coef = &v * &s_inv * (u.transpose() * qty);
    let xtx_inv = &v * &s_inv * &s_inv * v.transpose();
    let residuals = y - z * &coef;
    Ok(LeastSquares {
        coef,
        residuals,
        xtx_inv,
        singular_values: s,
    })
}
