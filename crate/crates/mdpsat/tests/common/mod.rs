#![allow(dead_code)]

use mdpsat::mdp::{Decision, Mode, Scheduler};
use mdpsat::{Mdp, MdpBuilder, Rat, Result};
use num_bigint::BigInt;
use num_traits::Zero;
use std::collections::BTreeSet;

/// Runs a scheduler of `src` on a model built from it by appending states and padding
/// transitions. States are matched by id; a padding chain stands for its last state.
pub struct Embedded<'a, S> {
    pub src: &'a Mdp,
    pub inner: &'a S,
    map: Vec<Option<usize>>,
    pad_end: Vec<Option<usize>>,
}

impl<'a, S: Scheduler> Embedded<'a, S> {
    pub fn new(src: &'a Mdp, target: &Mdp, inner: &'a S) -> Self {
        let map: Vec<Option<usize>> = (0..target.n_states()).map(|x| src.index_of(target.id(x))).collect();
        let pad_end = (0..target.n_states())
            .map(|x| {
                let mut y = x;
                for _ in 0..=target.n_states() {
                    if let Some(s) = map[y] {
                        return Some(s);
                    }
                    let a = target.actions(y).first()?;
                    if a.transitions.len() != 1 {
                        return None;
                    }
                    y = a.transitions[0].to;
                }
                None
            })
            .collect();
        Embedded { src, inner, map, pad_end }
    }
}

impl<S: Scheduler> Scheduler for Embedded<'_, S> {
    fn initial_mode(&self) -> Mode {
        self.inner.initial_mode()
    }
    fn decide(&self, _: &Mdp, s: usize, mode: &Mode) -> Result<Decision> {
        match self.map[s] {
            Some(x) if !self.src.is_trap(x) => self.inner.decide(self.src, x, mode),
            _ => Ok(vec![(0, Rat::one())]),
        }
    }
    fn next_mode(&self, _: &Mdp, mode: &Mode, s: usize, a: usize, t: usize) -> Mode {
        match self.map[s] {
            None => mode.clone(),
            Some(x) if self.src.is_trap(x) => self.inner.initial_mode(),
            Some(x) => match self.pad_end[t] {
                Some(y) => self.inner.next_mode(self.src, mode, x, a, y),
                None => BigInt::zero(),
            },
        }
    }
}

/// Same model with every weight shifted by `delta` and every trap a goal.
pub fn shifted_all_goal(m: &Mdp, delta: i64) -> Mdp {
    let mut b = MdpBuilder::new();
    for s in 0..m.n_states() {
        b.state(m.id(s));
    }
    for s in 0..m.n_states() {
        if m.is_trap(s) {
            b.absorbing(s);
            b.add_goal(s);
            continue;
        }
        for a in m.actions(s) {
            let w = &a.weight + BigInt::from(delta);
            b.action(s, a.name.clone(), w, a.transitions.iter().map(|t| (t.to, t.prob.clone())).collect());
        }
    }
    b.set_initial(m.initial());
    b.build().expect("shifted model")
}

/// Labels Goal states `b` and states outside Goal and Fail `a`; all weights become 1.
pub fn labeled_unit(m: &Mdp) -> (Mdp, Mdp) {
    let mut lab = MdpBuilder::new();
    let mut unit = MdpBuilder::new();
    for s in 0..m.n_states() {
        let l: &[&str] = if m.is_goal(s) {
            &["b"]
        } else if m.is_fail(s) {
            &[]
        } else {
            &["a"]
        };
        lab.labeled(m.id(s), l);
        unit.state(m.id(s));
    }
    for s in 0..m.n_states() {
        for a in m.actions(s) {
            let tr: Vec<(usize, Rat)> = a.transitions.iter().map(|t| (t.to, t.prob.clone())).collect();
            lab.action(s, a.name.clone(), a.weight.clone(), tr.clone());
            unit.action(s, a.name.clone(), 1, tr);
        }
    }
    lab.set_initial(m.initial());
    unit.set_initial(m.initial());
    unit.set_goal(m.goal().clone());
    unit.set_fail(m.fail().iter().copied().filter(|s| !m.is_goal(*s)).collect::<BTreeSet<_>>());
    (lab.build().expect("labeled"), unit.build().expect("unit"))
}

pub fn word(ls: &[&[&str]]) -> Vec<BTreeSet<String>> {
    ls.iter().map(|l| l.iter().map(|x| x.to_string()).collect()).collect()
}
