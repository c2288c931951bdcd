//! Classical stochastic shortest paths, exact partial and conditional expectations on
//! acyclic models, and their evaluation under a fixed scheduler.

mod acyclic;
mod eval;

pub use acyclic::{acyclic_conditional_expectation, acyclic_partial_expectation, PartialKind, PartialResult};
pub use eval::{evaluate_ce, evaluate_expected_total, evaluate_pe, ChainMoments};

use crate::error::{Error, Result};
use crate::graph::{mec_decompose, policy_iteration, Direction, Sys};
use crate::mdp::{Mdp, MemorylessPolicy};
use crate::rat::Rat;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SsppResult {
    pub value: Rat,
    /// Optimal expectation per state.
    pub values: Vec<Rat>,
    pub witness: MemorylessPolicy,
    pub direction: Direction,
}

/// Optimal expected accumulated weight until the goal. Every end component must lie in
/// the goal, so that all schedulers reach it almost surely.
pub fn classical_sspp(m: &Mdp, dir: Direction) -> Result<SsppResult> {
    if m.goal().is_empty() {
        return Err(Error::GoalNotReachable(m.id(m.initial()).into()));
    }
    for e in &mec_decompose(m).mecs {
        if let Some(&s) = e.states.iter().find(|&&s| !m.is_goal(s)) {
            return Err(Error::PreprocessNotApplied(m.id(s).into()));
        }
    }
    let n = m.n_states();
    let term: Vec<Option<Rat>> = (0..n).map(|s| m.is_goal(s).then(Rat::zero)).collect();
    let (values, pol) = policy_iteration(&Sys::from_mdp(m), &term, dir, None)?;
    Ok(SsppResult { value: values[m.initial()].clone(), values, witness: MemorylessPolicy::new(pol), direction: dir })
}
