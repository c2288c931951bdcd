//! Brute-force ground truth: exhaustive enumeration of deterministic schedulers and
//! exact evaluation of their induced chains.
//!
//! Only the model types, chain induction and the exact linear solver are shared with
//! the solvers; everything else here is written independently of them.

mod brute;
mod corpus;
mod eval;
mod saturation;
mod space;

pub use brute::{
    brute_ce, brute_cvar, brute_pe, brute_sspp, brute_wlf, lower_quantile, BruteCvar, BruteResult, DEFAULT_BUDGET,
};
pub use corpus::{corpus, random_mdp, seed_from_env, CorpusParams, Shape, DEFAULT_SEED};
pub use eval::{
    capped_law, chain_bottoms, chain_reach, expected_total, goal_weight_law, long_run_weighted, lower_tail_mean,
    reach_and_pe, terminal_law, Law,
};
pub use saturation::{
    goal_almost_sure_everywhere, pmax_by_enumeration, recompute_saturation, strongly_connected, OracleSaturation,
};
pub use space::{
    behaviours, enumerate, for_each_behaviour, for_each_observed_behaviour, non_trap_acyclic, space_size, Enumeration, HistoryScheduler,
    OracleScheduler, SchedulerSpace,
};
