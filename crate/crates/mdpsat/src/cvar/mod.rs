//! Value-at-risk and conditional value-at-risk of accumulated goal weight.

mod dist;
mod solver;

pub use dist::{cvar_dual, cvar_of_dist, var_of_dist, TerminalDist};
pub use solver::{cvar_max, cvar_max_high_bad, cvar_saturation, saturation_ell, CvarResult, CvarSaturation};

use crate::rat::Rat;

/// Which tail of the outcome distribution is averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tail {
    /// Low outcomes are bad; the lowest `p` mass is averaged.
    LowBad,
    /// High outcomes are bad; the highest `p` mass is averaged.
    HighBad,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CvarQuery {
    pub p: Rat,
    pub tail: Tail,
}
