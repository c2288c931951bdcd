//! Hardness gadgets: linear recurrence sequences compiled into MDPs, their exact
//! thresholds, and the reductions between threshold problems.

mod build;
mod levels;
mod lrp;
mod lrs;
mod reduce;
mod threshold;
mod window;

pub use build::{
    build_cvar_gadget, build_pe_gadget, build_recurrence_core, build_wlf_gadget, cvar_prefix, Gadget, GadgetKind,
};
pub use levels::{gadget_d_sequence, gadget_levels, Levels};
pub use lrp::{build_lrp_instance, build_nfa_a, normalize_unit_weights, Lifted, LrpInstance};
pub use lrs::{base_goal_prob, check_regime, positivity_bruteforce, rescale_lrs, Lrs, Regime, Rescaled};
pub use reduce::{
    reduce_ce_to_pe_acyclic, reduce_pe_to_ce, reduce_pe_to_wlf_acyclic, CePeReduction, CePeReductionParams,
    PeCeReduction, PeWlfReduction,
};
pub use threshold::{
    block_system, return_time, series_bounds, threshold_cvar, threshold_pe, threshold_wlf, CanonicalScheduler,
    SeriesBounds, ThresholdReport,
};
pub use window::{window_check, window_mdp, WindowReport};
