//! Weighted long-run frequency, long-run probability and frequency-LTL checks.

mod fltl;
mod lrp;
pub mod meanpayoff;
pub mod product;
mod wlf;

pub use fltl::{fltl_qualitative, FltlResult};
pub use lrp::evaluate_fm_lrp_nfa;
pub use meanpayoff::mean_payoff_max;
pub use product::{fmk_product, FmkProduct};
pub use wlf::{evaluate_fm_wlf, evaluate_fm_wlf_multi, wlf_max, MecWlf, WlfResult};

use crate::error::Result;
use crate::mdp::Mdp;
use std::collections::BTreeSet;

/// The `Goal` and `Fail` sets of a `!Fail U Goal` objective.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LongRunSpec {
    pub goal: BTreeSet<usize>,
    pub fail: BTreeSet<usize>,
}

impl LongRunSpec {
    /// The sets stored in the model.
    pub fn from_mdp(m: &Mdp) -> Self {
        LongRunSpec { goal: m.goal().clone(), fail: m.fail().clone() }
    }

    pub fn from_ids(m: &Mdp, goal: &[String], fail: &[String]) -> Result<Self> {
        Ok(LongRunSpec { goal: m.resolve(goal)?, fail: m.resolve(fail)? })
    }

    pub(crate) fn apply(&self, m: &Mdp) -> Result<Mdp> {
        if &self.goal == m.goal() && &self.fail == m.fail() {
            return Ok(m.clone());
        }
        m.with_goal_fail(self.goal.clone(), self.fail.clone())
    }
}
