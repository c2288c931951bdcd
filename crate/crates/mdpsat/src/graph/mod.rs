//! Qualitative and quantitative graph analysis of MDPs.

mod acyclic;
mod mec;
mod pi;
mod preprocess;
mod reach;
mod saturation;
mod steps;

pub use acyclic::{acyclic_check, require_acyclic, AcyclicCheck};
pub use mec::{mec_decompose, mec_decompose_sys, Mec, MecDecomposition};
pub use pi::{evaluate_policy, policy_iteration, Direction};
pub use preprocess::sspp_preprocess;
pub use reach::{max_reach_prob, min_reach_prob, ReachMaxData};
pub use saturation::{wlf_saturation_point, SaturationData};
pub use steps::{min_expected_steps, Discipline};

use crate::mdp::Mdp;
use crate::rat::Rat;
use petgraph::graph::DiGraph;
use std::collections::VecDeque;

/// An action of a [`Sys`]: successor distribution plus immediate reward.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SysAction {
    /// Index of the originating action (meaning depends on the construction).
    pub label: usize,
    pub succ: Vec<(usize, Rat)>,
    pub reward: Rat,
}

/// Bare decision process with rational rewards on which the solvers run.
#[derive(Debug, Clone, Default)]
pub struct Sys {
    pub acts: Vec<Vec<SysAction>>,
}

impl Sys {
    /// Rewards are the action weights.
    pub fn from_mdp(m: &Mdp) -> Sys {
        Sys {
            acts: (0..m.n_states())
                .map(|s| {
                    m.actions(s)
                        .iter()
                        .enumerate()
                        .map(|(i, a)| SysAction {
                            label: i,
                            succ: a.transitions.iter().map(|t| (t.to, t.prob.clone())).collect(),
                            reward: Rat::from(&a.weight),
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.acts.len()
    }

    pub fn with_rewards(mut self, f: impl Fn(usize, usize) -> Rat) -> Sys {
        for (s, acts) in self.acts.iter_mut().enumerate() {
            for (a, act) in acts.iter_mut().enumerate() {
                act.reward = f(s, a);
            }
        }
        self
    }

    /// States from which `target` is reachable without entering `avoid`.
    pub fn can_reach(&self, target: &[bool], avoid: &[bool]) -> Vec<bool> {
        let n = self.n();
        let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
        for s in 0..n {
            for a in &self.acts[s] {
                for (t, _) in &a.succ {
                    pred[*t].push(s);
                }
            }
        }
        let mut ok = target.to_vec();
        let mut q: VecDeque<usize> = (0..n).filter(|&s| target[s]).collect();
        while let Some(t) = q.pop_front() {
            for &s in &pred[t] {
                if !ok[s] && !avoid[s] {
                    ok[s] = true;
                    q.push_back(s);
                }
            }
        }
        ok
    }

    /// States where some scheduler satisfies `!avoid U target` with probability 1.
    pub fn prob1_max(&self, target: &[bool], avoid: &[bool]) -> Vec<bool> {
        let n = self.n();
        let mut region = vec![true; n];
        loop {
            // keep actions whose successors all stay in the region
            let mut ok = target.to_vec();
            let mut changed = true;
            while changed {
                changed = false;
                for s in 0..n {
                    if ok[s] || avoid[s] || !region[s] {
                        continue;
                    }
                    let good = self.acts[s].iter().any(|a| {
                        a.succ.iter().all(|(t, _)| region[*t]) && a.succ.iter().any(|(t, _)| ok[*t])
                    });
                    if good {
                        ok[s] = true;
                        changed = true;
                    }
                }
            }
            if ok == region {
                return region;
            }
            region = ok;
        }
    }

    /// States where some scheduler avoids `target` forever.
    pub fn can_avoid_forever(&self, target: &[bool]) -> Vec<bool> {
        let n = self.n();
        let mut z: Vec<bool> = (0..n).map(|s| !target[s]).collect();
        let mut changed = true;
        while changed {
            changed = false;
            for s in 0..n {
                if z[s] && !self.acts[s].iter().any(|a| a.succ.iter().all(|(t, _)| z[*t])) {
                    z[s] = false;
                    changed = true;
                }
            }
        }
        z
    }
}

/// Strongly connected components of a graph given by a successor function.
pub fn scc(n: usize, succ: impl Fn(usize) -> Vec<usize>) -> Vec<Vec<usize>> {
    let mut g: DiGraph<(), ()> = DiGraph::with_capacity(n, n);
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for s in 0..n {
        for t in succ(s) {
            g.add_edge(nodes[s], nodes[t], ());
        }
    }
    petgraph::algo::tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut v: Vec<usize> = c.into_iter().map(|x| x.index()).collect();
            v.sort_unstable();
            v
        })
        .collect()
}

/// Whether the underlying graph of `m` is a single strongly connected component.
pub fn is_strongly_connected(m: &Mdp) -> bool {
    let comps = scc(m.n_states(), |s| m.actions(s).iter().flat_map(|a| a.transitions.iter().map(|t| t.to)).collect());
    comps.len() == 1
}

pub(crate) fn mask(n: usize, set: impl IntoIterator<Item = usize>) -> Vec<bool> {
    let mut v = vec![false; n];
    for s in set {
        v[s] = true;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::samples::alpha_beta_loop;

    #[test]
    fn qualitative_sets() {
        let m = alpha_beta_loop();
        let sys = Sys::from_mdp(&m);
        let f = m.index_of("fail").unwrap();
        let target = mask(4, [f]);
        assert!(sys.prob1_max(&target, &vec![false; 4]).iter().all(|&x| x));
        // beta avoids fail forever from everywhere
        assert!(sys.can_avoid_forever(&target).iter().enumerate().all(|(s, &x)| x == (s != f)));
        assert!(is_strongly_connected(&m));
    }
}
