//! Weighted labeled MDPs, schedulers, induced chains and file formats.

mod chain;
mod json;
mod nfa;
pub mod samples;
mod scheduler;
mod unfold;

pub use chain::{induce_chain, induce_chain_from, ChainEdge, InducedChain};
pub use json::{parse_mdp, serialize_mdp};
pub use nfa::{parse_guard, parse_nfa, serialize_nfa, Guard, Nfa, NfaBuilder};
pub use scheduler::{
    Decision, MemorylessPolicy, Mode, RandomizedPolicy, Scheduler, WeightMemoryScheduler, WeightPolicy,
};
pub use unfold::{weight_unfold, TerminalRule, Unfolding};

use crate::error::{Error, Result};
use crate::rat::Rat;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub to: usize,
    pub prob: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Action {
    pub name: String,
    pub weight: BigInt,
    pub transitions: Vec<Transition>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct State {
    pub id: String,
    pub labels: BTreeSet<String>,
    pub absorbing: bool,
}

/// A validated MDP. Construct through [`MdpBuilder`] or [`parse_mdp`].
#[derive(Clone, PartialEq, Eq)]
pub struct Mdp {
    states: Vec<State>,
    actions: Vec<Vec<Action>>,
    initial: usize,
    goal: BTreeSet<usize>,
    fail: BTreeSet<usize>,
    index: HashMap<String, usize>,
}

impl fmt::Debug for Mdp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Mdp")
            .field("states", &self.states.iter().map(|s| &s.id).collect::<Vec<_>>())
            .field("initial", &self.states[self.initial].id)
            .finish()
    }
}

impl Mdp {
    pub fn n_states(&self) -> usize {
        self.states.len()
    }
    pub fn states(&self) -> &[State] {
        &self.states
    }
    pub fn state(&self, s: usize) -> &State {
        &self.states[s]
    }
    pub fn id(&self, s: usize) -> &str {
        &self.states[s].id
    }
    pub fn labels(&self, s: usize) -> &BTreeSet<String> {
        &self.states[s].labels
    }
    pub fn has_label(&self, s: usize, l: &str) -> bool {
        self.states[s].labels.contains(l)
    }
    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }
    pub fn actions(&self, s: usize) -> &[Action] {
        &self.actions[s]
    }
    pub fn action(&self, s: usize, a: usize) -> &Action {
        &self.actions[s][a]
    }
    pub fn action_index(&self, s: usize, name: &str) -> Option<usize> {
        self.actions[s].iter().position(|a| a.name == name)
    }
    pub fn initial(&self) -> usize {
        self.initial
    }
    pub fn goal(&self) -> &BTreeSet<usize> {
        &self.goal
    }
    pub fn fail(&self) -> &BTreeSet<usize> {
        &self.fail
    }
    pub fn is_goal(&self, s: usize) -> bool {
        self.goal.contains(&s)
    }
    pub fn is_fail(&self, s: usize) -> bool {
        self.fail.contains(&s)
    }

    /// Largest action weight (0 for an all-negative model).
    pub fn max_weight(&self) -> BigInt {
        self.actions.iter().flatten().map(|a| a.weight.clone()).fold(BigInt::zero(), |a, b| a.max(b))
    }

    /// Smallest positive transition probability.
    pub fn min_prob(&self) -> Rat {
        self.actions
            .iter()
            .flatten()
            .flat_map(|a| a.transitions.iter().map(|t| t.prob.clone()))
            .min()
            .unwrap_or_else(Rat::one)
    }

    pub fn has_negative_weight(&self) -> bool {
        self.actions.iter().flatten().any(|a| a.weight.is_negative())
    }

    pub fn check_nonnegative(&self) -> Result<()> {
        for s in 0..self.n_states() {
            for a in &self.actions[s] {
                if a.weight.is_negative() {
                    return Err(Error::NegativeWeight { state: self.id(s).into(), action: a.name.clone() });
                }
            }
        }
        Ok(())
    }

    /// A state all of whose actions are probability-1 self loops.
    pub fn is_trap(&self, s: usize) -> bool {
        self.actions[s].iter().all(|a| a.transitions.len() == 1 && a.transitions[0].to == s)
    }

    /// Same model with different goal and fail sets.
    pub fn with_goal_fail(&self, goal: BTreeSet<usize>, fail: BTreeSet<usize>) -> Result<Mdp> {
        let mut m = self.clone();
        m.goal = goal;
        m.fail = fail;
        let d = validate_mdp(&m);
        if d.is_empty() {
            Ok(m)
        } else {
            Err(Error::InvalidModel(d))
        }
    }

    /// Same model with a different initial state (unreachable states are dropped).
    pub fn with_initial(&self, s: usize) -> Result<Mdp> {
        let mut b = MdpBuilder::from_mdp(self);
        b.set_initial(s);
        b.build_reachable()
    }

    pub fn ids_of(&self, set: &BTreeSet<usize>) -> Vec<String> {
        set.iter().map(|&s| self.id(s).to_string()).collect()
    }

    /// Resolves a list of state ids.
    pub fn resolve(&self, ids: &[String]) -> Result<BTreeSet<usize>> {
        ids.iter()
            .map(|x| self.index_of(x).ok_or_else(|| Error::UnknownStateReference(x.clone())))
            .collect()
    }

    /// States reachable from `from` in the underlying graph.
    pub fn reachable_from(&self, from: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n_states()];
        let mut q = VecDeque::from([from]);
        seen[from] = true;
        while let Some(s) = q.pop_front() {
            for a in &self.actions[s] {
                for t in &a.transitions {
                    if !seen[t.to] {
                        seen[t.to] = true;
                        q.push_back(t.to);
                    }
                }
            }
        }
        seen
    }
}

/// A violated model invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    NoEnabledAction { state: String },
    ProbabilitySumNotOne { state: String, action: String, sum: Rat },
    NonPositiveProbability { state: String, action: String, to: String },
    GoalFailOverlap { state: String },
    UnreachableState { state: String },
    AbsorbingNotSelfLoop { state: String },
    AbsorbingWeightNonzero { state: String },
    DuplicateAction { state: String, action: String },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::NoEnabledAction { state } => write!(f, "NoEnabledAction({state})"),
            Diagnostic::ProbabilitySumNotOne { state, action, sum } => {
                write!(f, "ProbabilitySumNotOne({state}, {action}, sum {sum})")
            }
            Diagnostic::NonPositiveProbability { state, action, to } => {
                write!(f, "NonPositiveProbability({state}, {action}, {to})")
            }
            Diagnostic::GoalFailOverlap { state } => write!(f, "GoalFailOverlap({state})"),
            Diagnostic::UnreachableState { state } => write!(f, "UnreachableState({state})"),
            Diagnostic::AbsorbingNotSelfLoop { state } => write!(f, "AbsorbingNotSelfLoop({state})"),
            Diagnostic::AbsorbingWeightNonzero { state } => write!(f, "AbsorbingWeightNonzero({state})"),
            Diagnostic::DuplicateAction { state, action } => write!(f, "DuplicateAction({state}, {action})"),
        }
    }
}

/// Checks every model invariant; an empty list means the model is valid.
pub fn validate_mdp(m: &Mdp) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for s in 0..m.n_states() {
        let id = m.id(s).to_string();
        let acts = m.actions(s);
        if acts.is_empty() {
            out.push(Diagnostic::NoEnabledAction { state: id.clone() });
        }
        let mut names = BTreeSet::new();
        for a in acts {
            if !names.insert(&a.name) {
                out.push(Diagnostic::DuplicateAction { state: id.clone(), action: a.name.clone() });
            }
            let mut sum = Rat::zero();
            for t in &a.transitions {
                if !t.prob.is_positive() {
                    out.push(Diagnostic::NonPositiveProbability {
                        state: id.clone(),
                        action: a.name.clone(),
                        to: m.id(t.to).to_string(),
                    });
                }
                sum += &t.prob;
            }
            if !sum.is_one() {
                out.push(Diagnostic::ProbabilitySumNotOne { state: id.clone(), action: a.name.clone(), sum });
            }
        }
        if m.state(s).absorbing {
            let ok = acts.len() == 1 && acts[0].transitions.len() == 1 && acts[0].transitions[0].to == s;
            if !ok {
                out.push(Diagnostic::AbsorbingNotSelfLoop { state: id.clone() });
            } else if !acts[0].weight.is_zero() {
                out.push(Diagnostic::AbsorbingWeightNonzero { state: id.clone() });
            }
        }
        if m.is_goal(s) && m.is_fail(s) {
            out.push(Diagnostic::GoalFailOverlap { state: id.clone() });
        }
    }
    let seen = m.reachable_from(m.initial());
    for (s, ok) in seen.iter().enumerate() {
        if !ok {
            out.push(Diagnostic::UnreachableState { state: m.id(s).to_string() });
        }
    }
    out
}

/// Incremental construction of an [`Mdp`].
#[derive(Debug, Clone, Default)]
pub struct MdpBuilder {
    states: Vec<State>,
    actions: Vec<Vec<Action>>,
    index: HashMap<String, usize>,
    initial: Option<usize>,
    goal: BTreeSet<usize>,
    fail: BTreeSet<usize>,
}

impl MdpBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_mdp(m: &Mdp) -> Self {
        MdpBuilder {
            states: m.states.clone(),
            actions: m.actions.clone(),
            index: m.index.clone(),
            initial: Some(m.initial),
            goal: m.goal.clone(),
            fail: m.fail.clone(),
        }
    }

    /// Returns the index of state `id`, creating it if needed.
    pub fn state(&mut self, id: impl Into<String>) -> usize {
        let id = id.into();
        if let Some(&i) = self.index.get(&id) {
            return i;
        }
        let i = self.states.len();
        self.index.insert(id.clone(), i);
        self.states.push(State { id, labels: BTreeSet::new(), absorbing: false });
        self.actions.push(Vec::new());
        i
    }

    pub fn labeled(&mut self, id: impl Into<String>, labels: &[&str]) -> usize {
        let s = self.state(id);
        for l in labels {
            self.states[s].labels.insert((*l).to_string());
        }
        s
    }

    pub fn add_label(&mut self, s: usize, l: &str) {
        self.states[s].labels.insert(l.to_string());
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn id(&self, s: usize) -> &str {
        &self.states[s].id
    }

    pub fn lookup(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Adds an action. Zero-probability entries are dropped and duplicate targets merged.
    pub fn action(&mut self, s: usize, name: impl Into<String>, weight: impl Into<BigInt>, trans: Vec<(usize, Rat)>) {
        let mut merged: Vec<Transition> = Vec::new();
        for (to, p) in trans {
            if p.is_zero() {
                continue;
            }
            match merged.iter_mut().find(|t| t.to == to) {
                Some(t) => t.prob += p,
                None => merged.push(Transition { to, prob: p }),
            }
        }
        self.actions[s].push(Action { name: name.into(), weight: weight.into(), transitions: merged });
    }

    /// Adds a flagged absorbing self loop (weight 0).
    pub fn absorbing(&mut self, s: usize) {
        self.states[s].absorbing = true;
        self.actions[s].clear();
        self.action(s, "loop", 0, vec![(s, Rat::one())]);
    }

    pub fn scale_weights(&mut self, k: &BigInt) {
        for a in self.actions.iter_mut().flatten() {
            a.weight = &a.weight * k;
        }
    }

    /// Fresh identifier derived from `base`.
    pub fn fresh_id(&self, base: &str) -> String {
        let mut id = base.to_string();
        while self.index.contains_key(&id) {
            id.push('\'');
        }
        id
    }

    pub fn clear_actions(&mut self, s: usize) {
        self.actions[s].clear();
        self.states[s].absorbing = false;
    }

    pub fn set_initial(&mut self, s: usize) {
        self.initial = Some(s);
    }
    pub fn add_goal(&mut self, s: usize) {
        self.goal.insert(s);
    }
    pub fn add_fail(&mut self, s: usize) {
        self.fail.insert(s);
    }
    pub fn set_goal(&mut self, g: BTreeSet<usize>) {
        self.goal = g;
    }
    pub fn set_fail(&mut self, f: BTreeSet<usize>) {
        self.fail = f;
    }

    fn assemble(self) -> Result<Mdp> {
        let initial = self.initial.ok_or_else(|| Error::MalformedDocument("no initial state".into()))?;
        Ok(Mdp {
            states: self.states,
            actions: self.actions,
            initial,
            goal: self.goal,
            fail: self.fail,
            index: self.index,
        })
    }

    /// Validates and returns the model.
    pub fn build(self) -> Result<Mdp> {
        let m = self.assemble()?;
        let d = validate_mdp(&m);
        if d.is_empty() {
            Ok(m)
        } else {
            Err(Error::InvalidModel(d))
        }
    }

    /// Drops states unreachable from the initial state, then validates.
    pub fn build_reachable(self) -> Result<Mdp> {
        let m = self.assemble()?;
        let seen = m.reachable_from(m.initial);
        let mut remap = vec![usize::MAX; m.n_states()];
        let mut b = MdpBuilder::new();
        for s in 0..m.n_states() {
            if seen[s] {
                remap[s] = b.state(m.states[s].id.clone());
                b.states[remap[s]].labels = m.states[s].labels.clone();
                b.states[remap[s]].absorbing = m.states[s].absorbing;
            }
        }
        for s in 0..m.n_states() {
            if !seen[s] {
                continue;
            }
            for a in &m.actions[s] {
                let tr = a.transitions.iter().map(|t| (remap[t.to], t.prob.clone())).collect();
                b.action(remap[s], a.name.clone(), a.weight.clone(), tr);
            }
        }
        b.initial = Some(remap[m.initial]);
        b.goal = m.goal.iter().filter(|&&s| seen[s]).map(|&s| remap[s]).collect();
        b.fail = m.fail.iter().filter(|&&s| seen[s]).map(|&s| remap[s]).collect();
        b.build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builder_merges_and_drops() {
        let mut b = MdpBuilder::new();
        let s = b.state("s");
        let g = b.state("g");
        b.action(s, "a", 1, vec![(g, Rat::new(1, 4)), (g, Rat::new(3, 4)), (s, Rat::zero())]);
        b.absorbing(g);
        b.set_initial(s);
        b.add_goal(g);
        let m = b.build().unwrap();
        assert_eq!(m.actions(s)[0].transitions, vec![Transition { to: g, prob: Rat::one() }]);
        assert!(validate_mdp(&m).is_empty());
    }

    #[test]
    fn diagnostics_reported() {
        let mut b = MdpBuilder::new();
        let s = b.state("s");
        let g = b.state("g");
        let u = b.state("u");
        b.action(s, "a", 0, vec![(g, Rat::new(1, 3)), (s, Rat::new(1, 3))]);
        b.states[g].absorbing = true;
        b.action(g, "loop", 1, vec![(g, Rat::one())]);
        b.set_initial(s);
        b.add_goal(g);
        b.add_fail(g);
        let m = b.assemble().unwrap();
        let d = validate_mdp(&m);
        assert!(d.contains(&Diagnostic::NoEnabledAction { state: "u".into() }));
        assert!(d.contains(&Diagnostic::AbsorbingWeightNonzero { state: "g".into() }));
        assert!(d.contains(&Diagnostic::GoalFailOverlap { state: "g".into() }));
        assert!(d.contains(&Diagnostic::UnreachableState { state: "u".into() }));
        assert!(matches!(d[0], Diagnostic::ProbabilitySumNotOne { .. }));
        let _ = u;
    }

    #[test]
    fn build_reachable_prunes() {
        let mut b = MdpBuilder::new();
        let s = b.state("s");
        let u = b.state("u");
        b.absorbing(s);
        b.absorbing(u);
        b.set_initial(s);
        let m = b.build_reachable().unwrap();
        assert_eq!(m.n_states(), 1);
    }
}
