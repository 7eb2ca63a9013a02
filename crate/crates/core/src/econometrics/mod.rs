//! VAR estimation, impulse responses, variance decompositions, posterior
//! sampling and the spectral cycle statistic.

pub mod bayes;
pub mod fevd;
pub mod linalg;
pub mod pipeline;
pub mod lp;
pub mod spectral;
pub mod var;

pub use bayes::{contract_moment_setup, estimate_posterior, MomentTarget, Posterior, Prior, PriorFamily, SamplerOptions};
pub use fevd::{fevd, FevdHorizon, FevdTable, CONDITIONAL_HORIZON};
pub use lp::{irf_local_projection, LpControls, LpIrf};
pub use pipeline::{replication_data, IrfComparison, IrfGap, ReplicationData, FEVD_ROWS, PANEL_VARIABLES};
pub use spectral::{cycle_rank_correlation, CycleCorrelation, CycleTransform};
pub use var::{fit_var, irf_var, VarModel};
