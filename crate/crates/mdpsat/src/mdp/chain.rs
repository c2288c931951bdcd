use super::{Mdp, Mode, Scheduler};
use crate::error::{Error, Result};
use crate::rat::Rat;
use num_bigint::BigInt;
use std::collections::{HashMap, VecDeque};

/// Upper bound on product states explored by [`induce_chain`].
pub const CHAIN_LIMIT: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainEdge {
    pub to: usize,
    pub prob: Rat,
    /// Weight of the action that produced this edge.
    pub weight: BigInt,
    pub action: usize,
}

/// Markov chain on (MDP state, memory mode) pairs reachable under a scheduler.
#[derive(Debug, Clone)]
pub struct InducedChain {
    pub states: Vec<(usize, Mode)>,
    pub edges: Vec<Vec<ChainEdge>>,
    pub initial: usize,
}

impl InducedChain {
    pub fn len(&self) -> usize {
        self.states.len()
    }
    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
    pub fn mdp_state(&self, i: usize) -> usize {
        self.states[i].0
    }

    /// Expected weight of the step taken at chain state `i`.
    pub fn step_weight(&self, i: usize) -> Rat {
        self.edges[i].iter().map(|e| &e.prob * Rat::from(&e.weight)).sum()
    }

    pub fn successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges[i].iter().map(|e| e.to)
    }

    pub fn row_sum(&self, i: usize) -> Rat {
        self.edges[i].iter().map(|e| &e.prob).sum()
    }

    /// States reachable from `from`.
    pub fn reachable(&self, from: usize) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        seen[from] = true;
        let mut q = VecDeque::from([from]);
        while let Some(i) = q.pop_front() {
            for j in self.successors(i) {
                if !seen[j] {
                    seen[j] = true;
                    q.push_back(j);
                }
            }
        }
        seen
    }

    /// Strongly connected components that are closed (bottom components).
    pub fn bsccs(&self) -> Vec<Vec<usize>> {
        let comps = crate::graph::scc(self.len(), |i| self.successors(i).collect());
        let mut comp_of = vec![0; self.len()];
        for (c, xs) in comps.iter().enumerate() {
            for &x in xs {
                comp_of[x] = c;
            }
        }
        comps
            .iter()
            .enumerate()
            .filter(|(c, xs)| xs.iter().all(|&x| self.successors(x).all(|y| comp_of[y] == *c)))
            .map(|(_, xs)| xs.clone())
            .collect()
    }
}

/// Product of `m` and `sched` from the initial state.
pub fn induce_chain<S: Scheduler + ?Sized>(m: &Mdp, sched: &S) -> Result<InducedChain> {
    induce_chain_from(m, sched, m.initial(), sched.initial_mode())
}

pub fn induce_chain_from<S: Scheduler + ?Sized>(m: &Mdp, sched: &S, s0: usize, mode0: Mode) -> Result<InducedChain> {
    let mut index: HashMap<(usize, Mode), usize> = HashMap::new();
    let mut states = vec![(s0, mode0.clone())];
    index.insert((s0, mode0), 0);
    let mut edges: Vec<Vec<ChainEdge>> = Vec::new();
    let mut i = 0;
    while i < states.len() {
        let (s, mode) = states[i].clone();
        let mut out = Vec::new();
        for (a, pa) in sched.decide(m, s, &mode)? {
            let act = m.action(s, a);
            for t in &act.transitions {
                let nm = sched.next_mode(m, &mode, s, a, t.to);
                let key = (t.to, nm);
                let j = match index.get(&key) {
                    Some(&j) => j,
                    None => {
                        if states.len() >= CHAIN_LIMIT {
                            return Err(Error::SpaceTooLarge(CHAIN_LIMIT));
                        }
                        let j = states.len();
                        states.push(key.clone());
                        index.insert(key, j);
                        j
                    }
                };
                out.push(ChainEdge { to: j, prob: &pa * &t.prob, weight: act.weight.clone(), action: a });
            }
        }
        edges.push(out);
        i += 1;
    }
    Ok(InducedChain { states, edges, initial: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::samples::alpha_beta_loop;
    use crate::mdp::{MemorylessPolicy, WeightMemoryScheduler};

    #[test]
    fn beta_policy_chain() {
        let m = alpha_beta_loop();
        let c = induce_chain(&m, &MemorylessPolicy::new(vec![1, 0, 0, 0])).unwrap();
        assert_eq!(c.len(), 2);
        for i in 0..c.len() {
            assert!(c.row_sum(i).is_one());
        }
    }

    #[test]
    fn two_mode_chain_has_five_states() {
        let m = alpha_beta_loop();
        let s = m.index_of("s_init").unwrap();
        let mut sc = WeightMemoryScheduler::new(3, true);
        sc.default = Some(vec![0; m.n_states()]);
        sc.set(s, 0, 0);
        sc.set(s, 3, 1);
        let c = induce_chain(&m, &sc).unwrap();
        assert_eq!(c.len(), 5);
        assert_eq!(c.bsccs().len(), 1);
    }

    #[test]
    fn missing_choice_reported() {
        let m = alpha_beta_loop();
        let sc = WeightMemoryScheduler::new(3, true);
        assert!(matches!(induce_chain(&m, &sc), Err(Error::SchedulerPartial { .. })));
    }
}
