//! The replication panel: latent shock states ordered first, then nine
//! observables in percent deviation, with VAR and local-projection IRFs.

use nalgebra::DMatrix;

use super::fevd::{fevd, FevdHorizon, FevdTable};
use super::lp::{irf_local_projection, LpControls};
use super::var::{fit_var, irf_var, VarModel};
use crate::error::{ModelError, Result};
use crate::shocks::ShockProcess;
use crate::simulation::SimPath;

pub const PANEL_VARIABLES: [&str; 9] = ["C", "I", "GDP", "n_h", "P_h", "P_f", "omega_h", "Y_f", "deficit"];
/// Rows of the variance-decomposition table, a subset of [`PANEL_VARIABLES`].
pub const FEVD_ROWS: [&str; 8] = ["C", "I", "P_h", "P_f", "GDP", "Y_f", "deficit", "omega_h"];
pub const MAX_LAG: usize = 4;

#[derive(Debug, Clone)]
pub struct ReplicationData {
    /// `T × 13`: latent `x_R, x_θ, x_μ, x_ξ` then [`PANEL_VARIABLES`].
    pub data: DMatrix<f64>,
    pub names: Vec<String>,
    /// `T × 4` raw innovations.
    pub innovations: DMatrix<f64>,
    pub sigma: [f64; 4],
}

/// Both IRF estimates as `[shock][h](outcome)`, one standard deviation per shock.
#[derive(Debug, Clone)]
pub struct IrfComparison {
    pub shocks: Vec<String>,
    pub outcomes: Vec<String>,
    pub var: Vec<DMatrix<f64>>,
    pub lp: Vec<DMatrix<f64>>,
    pub lp_std_err: Vec<DMatrix<f64>>,
}

impl IrfComparison {
    /// Largest `|var - lp|` and where it occurs.
    pub fn largest_gap(&self) -> IrfGap {
        let mut best = IrfGap::default();
        for (h, (a, b)) in self.var.iter().zip(&self.lp).enumerate() {
            for j in 0..a.nrows() {
                for i in 0..a.ncols() {
                    let gap = (a[(j, i)] - b[(j, i)]).abs();
                    if gap > best.gap {
                        best = IrfGap {
                            gap,
                            horizon: h,
                            shock: j,
                            outcome: i,
                        };
                    }
                }
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IrfGap {
    pub gap: f64,
    pub horizon: usize,
    pub shock: usize,
    pub outcome: usize,
}

fn latent_name(p: ShockProcess) -> String {
    format!("x_{}", p.label())
}

pub fn replication_data(path: &SimPath) -> Result<ReplicationData> {
    let t = path.len();
    let mut cols: Vec<Vec<f64>> = ShockProcess::ALL
        .iter()
        .map(|p| path.panel.latent.iter().map(|x| x[p.index()]).collect())
        .collect();
    for v in PANEL_VARIABLES {
        cols.push(
            path.deviation_series(v)
                .ok_or_else(|| ModelError::Domain(format!("unknown series {v}")))?,
        );
    }
    let data = DMatrix::from_fn(t, cols.len(), |r, c| cols[c][r]);
    let innovations = DMatrix::from_fn(t, 4, |r, c| path.panel.innovations[r][c]);
    let names = ShockProcess::ALL
        .iter()
        .map(|p| latent_name(*p))
        .chain(PANEL_VARIABLES.iter().map(|s| s.to_string()))
        .collect();
    let sigma = std::array::from_fn(|j| path.panel.spec.processes[j].sigma);
    Ok(ReplicationData {
        data,
        names,
        innovations,
        sigma,
    })
}

impl ReplicationData {
    /// VAR with BIC lag choice up to `max_lag` ([`MAX_LAG`] by default).
    pub fn fit(&self, max_lag: usize) -> Result<VarModel> {
        fit_var(&self.data, &self.names, max_lag)
    }

    fn observed(&self) -> DMatrix<f64> {
        self.data.columns(4, PANEL_VARIABLES.len()).into_owned()
    }

    /// Cholesky VAR IRFs of the observables to the four shocks (ordered first),
    /// against local projections on the scaled innovations with lead-shock and
    /// lagged-panel controls.
    pub fn compare_irfs(&self, model: &VarModel, horizon: usize) -> Result<IrfComparison> {
        let ordering: Vec<usize> = (0..model.k()).collect();
        let var = irf_var(model, horizon, &ordering)?
            .into_iter()
            .map(|m| m.view((4, 0), (PANEL_VARIABLES.len(), 4)).transpose())
            .collect();
        let controls = LpControls {
            lead_shocks: true,
            lagged: Some(self.data.clone()),
        };
        let lp = irf_local_projection(&self.observed(), &self.innovations, horizon, &controls)?.scaled(&self.sigma);
        Ok(IrfComparison {
            shocks: ShockProcess::ALL.iter().map(|p| p.label().to_string()).collect(),
            outcomes: PANEL_VARIABLES.iter().map(|s| s.to_string()).collect(),
            var,
            lp: lp.coef,
            lp_std_err: lp.std_err,
        })
    }

    /// Variance shares of the observables by shock at each horizon.
    pub fn fevd(&self, model: &VarModel, horizons: &[FevdHorizon]) -> Result<FevdTable> {
        let ordering: Vec<usize> = (0..model.k()).collect();
        fevd(model, horizons, &ordering)
    }
}
