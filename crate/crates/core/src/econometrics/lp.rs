//! Local-projection impulse responses on observed shocks.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::linalg::least_squares;
use crate::error::{ModelError, Result};

/// Extra regressors for each horizon's projection.
#[derive(Debug, Clone, Default)]
pub struct LpControls {
    /// Include the shocks dated `t+1..=t+h`. With serially independent shocks
    /// this only removes noise from the estimate.
    pub lead_shocks: bool,
    /// Panel whose first lag enters every regression (`T × q`).
    pub lagged: Option<DMatrix<f64>>,
}

/// `coef[h][(j, i)]`: response of outcome `i` at horizon `h` to a unit shock `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpIrf {
    pub coef: Vec<DMatrix<f64>>,
    pub std_err: Vec<DMatrix<f64>>,
    /// Observations used at each horizon.
    pub nobs: Vec<usize>,
}

impl LpIrf {
    /// Rescale shock `j` responses by `scale[j]` (e.g. to one standard deviation).
    pub fn scaled(mut self, scale: &[f64]) -> Self {
        for m in self.coef.iter_mut().chain(self.std_err.iter_mut()) {
            for (j, s) in scale.iter().enumerate() {
                m.row_mut(j).scale_mut(*s);
            }
        }
        self
    }
}

/// Regress `outcome_{t+h}` on `shock_t` (all shocks jointly, plus a constant
/// and `controls`) for `h = 0..=horizon`.
pub fn irf_local_projection(
    outcomes: &DMatrix<f64>,
    shocks: &DMatrix<f64>,
    horizon: usize,
    controls: &LpControls,
) -> Result<LpIrf> {
    let (t, k) = outcomes.shape();
    let m = shocks.ncols();
    if shocks.nrows() != t {
        return Err(ModelError::LengthMismatch { left: t, right: shocks.nrows() });
    }
    let q = match &controls.lagged {
        Some(d) if d.nrows() != t => {
            return Err(ModelError::LengthMismatch { left: t, right: d.nrows() })
        }
        Some(d) => d.ncols(),
        None => 0,
    };
    let t0 = usize::from(controls.lagged.is_some());
    let lead = usize::from(controls.lead_shocks);
    let widest = 1 + m + lead * m * horizon + q;
    let needed = t0 + horizon + widest + 1;
    if t < needed {
        return Err(ModelError::InsufficientSample { needed, have: t });
    }

    let mut out = LpIrf {
        coef: Vec::with_capacity(horizon + 1),
        std_err: Vec::with_capacity(horizon + 1),
        nobs: Vec::with_capacity(horizon + 1),
    };
    for h in 0..=horizon {
        let n = t - h - t0;
        let ncol = 1 + m + lead * m * h + q;
        let mut z = DMatrix::zeros(n, ncol);
        let mut names = vec!["const".to_string()];
        names.extend((0..m).map(|j| format!("shock{j}")));
        if lead == 1 {
            for l in 1..=h {
                names.extend((0..m).map(|j| format!("shock{j}(+{l})")));
            }
        }
        names.extend((0..q).map(|j| format!("control{j}(-1)")));
        for r in 0..n {
            let s = t0 + r;
            z[(r, 0)] = 1.0;
            let mut c = 1;
            for j in 0..m {
                z[(r, c)] = shocks[(s, j)];
                c += 1;
            }
            if lead == 1 {
                for l in 1..=h {
                    for j in 0..m {
                        z[(r, c)] = shocks[(s + l, j)];
                        c += 1;
                    }
                }
            }
            if let Some(d) = &controls.lagged {
                for j in 0..q {
                    z[(r, c)] = d[(s - 1, j)];
                    c += 1;
                }
            }
        }
        let y = outcomes.rows(t0 + h, n).into_owned();
        let ls = least_squares(&z, &y, &names)?;
        let se = ls.std_errors();
        out.coef.push(ls.coef.rows(1, m).into_owned());
        out.std_err.push(se.rows(1, m).into_owned());
        out.nobs.push(n);
        debug_assert_eq!(out.coef[h].ncols(), k);
    }
    Ok(out)
}
