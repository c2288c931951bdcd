use super::{scc, Sys};
use crate::mdp::Mdp;
use num_traits::{Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mec {
    pub states: BTreeSet<usize>,
    /// Retained actions per state.
    pub actions: BTreeMap<usize, Vec<usize>>,
    pub contains_goal: bool,
    pub contains_fail: bool,
    /// All retained actions have weight 0.
    pub zero_weight: bool,
    /// Some retained action has positive weight.
    pub positive_weight: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MecDecomposition {
    pub mecs: Vec<Mec>,
    pub mec_of: Vec<Option<usize>>,
}

/// Maximal end components as (states, retained actions), by iterated SCC refinement.
pub fn mec_decompose_sys(sys: &Sys) -> Vec<(BTreeSet<usize>, BTreeMap<usize, Vec<usize>>)> {
    let n = sys.n();
    let mut alive_state = vec![true; n];
    let mut alive_act: Vec<Vec<bool>> = sys.acts.iter().map(|a| vec![true; a.len()]).collect();
    loop {
        let comps = scc(n, |s| {
            if !alive_state[s] {
                return Vec::new();
            }
            sys.acts[s]
                .iter()
                .enumerate()
                .filter(|(a, _)| alive_act[s][*a])
                .flat_map(|(_, act)| act.succ.iter().map(|(t, _)| *t))
                .filter(|&t| alive_state[t])
                .collect()
        });
        let mut comp_of = vec![usize::MAX; n];
        for (c, xs) in comps.iter().enumerate() {
            for &x in xs {
                comp_of[x] = c;
            }
        }
        let mut changed = false;
        for s in 0..n {
            if !alive_state[s] {
                continue;
            }
            for (a, act) in sys.acts[s].iter().enumerate() {
                if alive_act[s][a] && act.succ.iter().any(|(t, _)| !alive_state[*t] || comp_of[*t] != comp_of[s]) {
                    alive_act[s][a] = false;
                    changed = true;
                }
            }
            if !alive_act[s].iter().any(|&x| x) {
                alive_state[s] = false;
                changed = true;
            }
        }
        if !changed {
            let mut groups: BTreeMap<usize, (BTreeSet<usize>, BTreeMap<usize, Vec<usize>>)> = BTreeMap::new();
            for s in 0..n {
                if alive_state[s] {
                    let e = groups.entry(comp_of[s]).or_default();
                    e.0.insert(s);
                    e.1.insert(s, (0..alive_act[s].len()).filter(|&a| alive_act[s][a]).collect());
                }
            }
            let mut out: Vec<_> = groups.into_values().collect();
            out.sort_by_key(|(st, _)| *st.iter().next().unwrap());
            return out;
        }
    }
}

pub fn mec_decompose(m: &Mdp) -> MecDecomposition {
    let raw = mec_decompose_sys(&Sys::from_mdp(m));
    let mut mec_of = vec![None; m.n_states()];
    let mecs: Vec<Mec> = raw
        .into_iter()
        .enumerate()
        .map(|(i, (states, actions))| {
            for &s in &states {
                mec_of[s] = Some(i);
            }
            let weights: Vec<_> = actions.iter().flat_map(|(s, acts)| acts.iter().map(|a| &m.action(*s, *a).weight)).collect();
            Mec {
                contains_goal: states.iter().any(|&s| m.is_goal(s)),
                contains_fail: states.iter().any(|&s| m.is_fail(s)),
                zero_weight: weights.iter().all(|w| w.is_zero()),
                positive_weight: weights.iter().any(|w| w.is_positive()),
                states,
                actions,
            }
        })
        .collect();
    MecDecomposition { mecs, mec_of }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::samples::alpha_beta_loop;
    use crate::mdp::MdpBuilder;
    use crate::rat::Rat;

    #[test]
    fn loop_example_single_mec() {
        let d = mec_decompose(&alpha_beta_loop());
        assert_eq!(d.mecs.len(), 1);
        assert_eq!(d.mecs[0].states.len(), 4);
        assert!(d.mecs[0].positive_weight);
    }

    #[test]
    fn acyclic_mecs_are_traps() {
        let mut b = MdpBuilder::new();
        let s = b.state("s");
        let g = b.state("g");
        let f = b.state("f");
        b.action(s, "a", 1, vec![(g, Rat::new(1, 2)), (f, Rat::new(1, 2))]);
        b.absorbing(g);
        b.absorbing(f);
        b.set_initial(s);
        b.add_goal(g);
        let d = mec_decompose(&b.build().unwrap());
        let sets: Vec<_> = d.mecs.iter().map(|m| m.states.clone()).collect();
        assert_eq!(sets, vec![BTreeSet::from([g]), BTreeSet::from([f])]);
        assert!(d.mecs[0].contains_goal && d.mecs[0].zero_weight);
    }

    #[test]
    fn leaving_action_not_retained() {
        // s <-> t via zero-weight actions; s also has an exit to g
        let mut b = MdpBuilder::new();
        let s = b.state("s");
        let t = b.state("t");
        let g = b.state("g");
        b.action(s, "stay", 0, vec![(t, Rat::one())]);
        b.action(s, "exit", 5, vec![(g, Rat::new(1, 2)), (t, Rat::new(1, 2))]);
        b.action(t, "back", 0, vec![(s, Rat::one())]);
        b.absorbing(g);
        b.set_initial(s);
        let d = mec_decompose(&b.build().unwrap());
        let e = &d.mecs[0];
        assert_eq!(e.states, BTreeSet::from([s, t]));
        assert_eq!(e.actions[&s], vec![0]);
        assert!(e.zero_weight);
    }
}
