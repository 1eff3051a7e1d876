//! Influence-function ATT estimators: per-regime influence functions, the
//! cross-fitted estimating-equation solver with variance and confidence
//! intervals, and the efficiency-loss diagnostic.

mod cross_fit;
mod efficiency;
mod eif;
pub(crate) mod stats;

pub use cross_fit::{
    cross_fit_att, cross_fit_att_with, cross_fit_complete, CompleteNuisances, Diagnostics,
    EstimateResult, EstimatorConfig,
};
pub use efficiency::{efficiency_gap, EfficiencyGap};
pub use eif::{
    eif_both_simple, eif_complete, eif_post_hard, eif_post_simple, eif_pre_hard, eif_pre_simple,
    eif_value,
};
pub use stats::normal_quantile;
