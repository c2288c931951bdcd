use super::Mdp;
use crate::error::{Error, Result};
use crate::rat::Rat;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde_json::{json, Value};
use std::collections::BTreeMap;

/// Memory mode of a finite-memory scheduler.
pub type Mode = BigInt;

/// Distribution over action indices.
pub type Decision = Vec<(usize, Rat)>;

/// A scheduler whose memory is a single integer mode.
pub trait Scheduler {
    fn initial_mode(&self) -> Mode {
        BigInt::zero()
    }
    fn decide(&self, m: &Mdp, s: usize, mode: &Mode) -> Result<Decision>;
    fn next_mode(&self, m: &Mdp, mode: &Mode, s: usize, a: usize, t: usize) -> Mode;
}

fn partial(m: &Mdp, s: usize, mode: &Mode) -> Error {
    Error::SchedulerPartial { state: m.id(s).to_string(), mode: mode.to_string() }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MemorylessPolicy {
    pub choice: Vec<usize>,
}

impl MemorylessPolicy {
    pub fn new(choice: Vec<usize>) -> Self {
        MemorylessPolicy { choice }
    }

    pub fn first_actions(m: &Mdp) -> Self {
        MemorylessPolicy { choice: vec![0; m.n_states()] }
    }

    pub fn from_names(m: &Mdp, names: &BTreeMap<String, String>) -> Result<Self> {
        let mut choice = vec![0; m.n_states()];
        for (sid, aname) in names {
            let s = m.index_of(sid).ok_or_else(|| Error::UnknownStateReference(sid.clone()))?;
            choice[s] = m
                .action_index(s, aname)
                .ok_or_else(|| Error::InvalidArgument(format!("no action {aname:?} at {sid:?}")))?;
        }
        Ok(MemorylessPolicy { choice })
    }

    pub fn names(&self, m: &Mdp) -> BTreeMap<String, String> {
        self.choice.iter().enumerate().map(|(s, &a)| (m.id(s).to_string(), m.action(s, a).name.clone())).collect()
    }

    pub fn to_json(&self, m: &Mdp) -> Value {
        json!(self.names(m))
    }
}

impl Scheduler for MemorylessPolicy {
    fn decide(&self, m: &Mdp, s: usize, mode: &Mode) -> Result<Decision> {
        match self.choice.get(s) {
            Some(&a) if a < m.actions(s).len() => Ok(vec![(a, Rat::one())]),
            _ => Err(partial(m, s, mode)),
        }
    }
    fn next_mode(&self, _: &Mdp, _: &Mode, _: usize, _: usize, _: usize) -> Mode {
        BigInt::zero()
    }
}

/// Memoryless randomized policy with explicit finite-support distributions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomizedPolicy {
    pub dist: Vec<Decision>,
}

impl Scheduler for RandomizedPolicy {
    fn decide(&self, m: &Mdp, s: usize, mode: &Mode) -> Result<Decision> {
        let d = self.dist.get(s).ok_or_else(|| partial(m, s, mode))?;
        let total: Rat = d.iter().map(|(_, p)| p).sum();
        if d.is_empty() || !total.is_one() || d.iter().any(|(a, _)| *a >= m.actions(s).len()) {
            return Err(partial(m, s, mode));
        }
        Ok(d.clone())
    }
    fn next_mode(&self, _: &Mdp, _: &Mode, _: usize, _: usize, _: usize) -> Mode {
        BigInt::zero()
    }
}

/// Finite-memory scheduler tracking accumulated weight capped at `cap`.
///
/// The mode is updated by `w <- clamp(w + wgt, 0, cap)`. With `reset`, the mode is 0 in
/// Goal and Fail states and on leaving them, so it measures the weight collected in the
/// current segment outside Goal and Fail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightMemoryScheduler {
    pub cap: BigInt,
    pub reset: bool,
    pub choice: BTreeMap<(usize, BigInt), usize>,
    /// Used for (state, mode) pairs missing from `choice`.
    pub default: Option<Vec<usize>>,
}

impl WeightMemoryScheduler {
    pub fn new(cap: impl Into<BigInt>, reset: bool) -> Self {
        WeightMemoryScheduler { cap: cap.into(), reset, choice: BTreeMap::new(), default: None }
    }

    pub fn memoryless(p: &MemorylessPolicy, reset: bool) -> Self {
        let mut w = Self::new(0, reset);
        w.default = Some(p.choice.clone());
        w
    }

    pub fn set(&mut self, s: usize, mode: impl Into<BigInt>, a: usize) {
        self.choice.insert((s, mode.into()), a);
    }

    pub fn get(&self, s: usize, mode: &BigInt) -> Option<usize> {
        self.choice.get(&(s, mode.clone())).copied().or_else(|| self.default.as_ref().map(|d| d[s]))
    }

    pub fn update(&self, m: &Mdp, mode: &BigInt, s: usize, a: usize, t: usize) -> BigInt {
        let in_gf = |x: usize| m.is_goal(x) || m.is_fail(x);
        if self.reset && (in_gf(s) || in_gf(t)) {
            return BigInt::zero();
        }
        let w = mode + &m.action(s, a).weight;
        if w.is_negative() {
            BigInt::zero()
        } else if w > self.cap {
            self.cap.clone()
        } else {
            w
        }
    }

    pub fn to_json(&self, m: &Mdp) -> Value {
        let choice: Vec<Value> = self
            .choice
            .iter()
            .map(|((s, w), a)| json!({"state": m.id(*s), "mode": w.to_string(), "action": m.action(*s, *a).name}))
            .collect();
        let mut v = json!({"cap": self.cap.to_string(), "reset": self.reset, "choice": choice});
        if let Some(d) = &self.default {
            v["default"] = MemorylessPolicy::new(d.clone()).to_json(m);
        }
        v
    }
}

impl Scheduler for WeightMemoryScheduler {
    fn decide(&self, m: &Mdp, s: usize, mode: &Mode) -> Result<Decision> {
        match self.get(s, mode) {
            Some(a) if a < m.actions(s).len() => Ok(vec![(a, Rat::one())]),
            _ => Err(partial(m, s, mode)),
        }
    }
    fn next_mode(&self, m: &Mdp, mode: &Mode, s: usize, a: usize, t: usize) -> Mode {
        self.update(m, mode, s, a, t)
    }
}

/// Deterministic policy over (state, exact accumulated weight), without a cap.
/// Finite on acyclic models.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WeightPolicy {
    pub choice: BTreeMap<(usize, BigInt), usize>,
}

impl WeightPolicy {
    pub fn to_json(&self, m: &Mdp) -> Value {
        let choice: Vec<Value> = self
            .choice
            .iter()
            .map(|((s, w), a)| json!({"state": m.id(*s), "weight": w.to_string(), "action": m.action(*s, *a).name}))
            .collect();
        json!(choice)
    }
}

impl Scheduler for WeightPolicy {
    fn decide(&self, m: &Mdp, s: usize, mode: &Mode) -> Result<Decision> {
        if m.actions(s).len() == 1 {
            return Ok(vec![(0, Rat::one())]);
        }
        match self.choice.get(&(s, mode.clone())) {
            Some(&a) if a < m.actions(s).len() => Ok(vec![(a, Rat::one())]),
            _ => Err(partial(m, s, mode)),
        }
    }
    fn next_mode(&self, m: &Mdp, mode: &Mode, s: usize, a: usize, _: usize) -> Mode {
        mode + &m.action(s, a).weight
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::samples::alpha_beta_loop;

    #[test]
    fn reset_and_cap() {
        let m = alpha_beta_loop();
        let s = m.index_of("s_init").unwrap();
        let g1 = m.index_of("goal1").unwrap();
        let sc = WeightMemoryScheduler::new(5, true);
        assert_eq!(sc.update(&m, &BigInt::from(3), s, 0, s), BigInt::from(5));
        assert_eq!(sc.update(&m, &BigInt::from(0), s, 0, g1), BigInt::zero());
        let nr = WeightMemoryScheduler::new(5, false);
        assert_eq!(nr.update(&m, &BigInt::from(0), s, 0, g1), BigInt::from(3));
    }

    #[test]
    fn names_roundtrip() {
        let m = alpha_beta_loop();
        let p = MemorylessPolicy::new(vec![1, 0, 0, 0]);
        assert_eq!(MemorylessPolicy::from_names(&m, &p.names(&m)).unwrap(), p);
    }
}
