use super::{mask, policy_iteration, Direction, Sys};
use crate::error::{Error, Result};
use crate::mdp::{Mdp, MemorylessPolicy};
use crate::rat::Rat;
use std::collections::BTreeSet;

/// Maximal probabilities of `!avoid U target` with the per-action data used by
/// saturation-point computations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachMaxData {
    pub pmax: Vec<Rat>,
    /// Indexed `[state][action]`.
    pub pmax_action: Vec<Vec<Rat>>,
    pub act_max: Vec<Vec<usize>>,
    /// Smallest gap between `pmax` and a suboptimal action; 1 if there is none.
    pub gap_delta: Rat,
    /// Attains `pmax` everywhere; for states with `pmax = 0` it still heads for `target ∪ avoid`.
    pub witness: MemorylessPolicy,
}

pub fn max_reach_prob(m: &Mdp, target: &BTreeSet<usize>, avoid: &BTreeSet<usize>) -> Result<ReachMaxData> {
    if target.iter().any(|s| avoid.contains(s)) {
        return Err(Error::InvalidArgument("target and avoid sets overlap".into()));
    }
    let n = m.n_states();
    let sys = Sys::from_mdp(m);
    let tmask = mask(n, target.iter().copied());
    let amask = mask(n, avoid.iter().copied());
    let reach = sys.can_reach(&tmask, &amask);
    let term: Vec<Option<Rat>> = (0..n)
        .map(|s| {
            if tmask[s] {
                Some(Rat::one())
            } else if amask[s] || !reach[s] {
                Some(Rat::zero())
            } else {
                None
            }
        })
        .collect();
    let sys0 = sys.with_rewards(|_, _| Rat::zero());
    let (pmax, _) = policy_iteration(&sys0, &term, Direction::Max, None)?;

    let pmax_action: Vec<Vec<Rat>> = (0..n)
        .map(|s| {
            if tmask[s] || amask[s] {
                vec![pmax[s].clone(); m.actions(s).len()]
            } else {
                sys0.acts[s].iter().map(|a| a.succ.iter().map(|(t, p)| p * &pmax[*t]).sum()).collect()
            }
        })
        .collect();
    let act_max: Vec<Vec<usize>> =
        (0..n).map(|s| (0..m.actions(s).len()).filter(|&a| pmax_action[s][a] == pmax[s]).collect()).collect();
    for s in 0..n {
        if act_max[s].is_empty() {
            return Err(Error::Internal(format!("Bellman equation fails at {}", m.id(s))));
        }
    }
    let gap_delta = (0..n)
        .filter(|&s| !tmask[s] && !amask[s])
        .flat_map(|s| pmax_action[s].iter().filter(|q| **q != pmax[s]).map(|q| &pmax[s] - q).collect::<Vec<_>>())
        .min()
        .unwrap_or_else(Rat::one);

    // attractor within act_max towards the target, then towards target ∪ avoid
    let mut choice: Vec<Option<usize>> = (0..n).map(|s| if tmask[s] || amask[s] { Some(0) } else { None }).collect();
    let mut done: Vec<bool> = tmask.clone();
    attract(m, &mut choice, &mut done, |s| pmax[s].is_positive(), |s| act_max[s].clone());
    if (0..n).any(|s| pmax[s].is_positive() && !done[s]) {
        return Err(Error::Internal("optimal actions do not reach the target".into()));
    }
    for s in 0..n {
        if amask[s] {
            done[s] = true;
        }
    }
    attract(m, &mut choice, &mut done, |_| true, |s| (0..m.actions(s).len()).collect());
    let witness = MemorylessPolicy::new(choice.into_iter().map(|c| c.unwrap_or(0)).collect());
    Ok(ReachMaxData { pmax, pmax_action, act_max, gap_delta, witness })
}

fn attract(
    m: &Mdp,
    choice: &mut [Option<usize>],
    done: &mut [bool],
    eligible: impl Fn(usize) -> bool,
    actions: impl Fn(usize) -> Vec<usize>,
) {
    loop {
        let layer: Vec<(usize, usize)> = (0..m.n_states())
            .filter(|&s| !done[s] && eligible(s))
            .filter_map(|s| {
                actions(s)
                    .into_iter()
                    .find(|&a| m.action(s, a).transitions.iter().any(|t| done[t.to]))
                    .map(|a| (s, a))
            })
            .collect();
        if layer.is_empty() {
            return;
        }
        for (s, a) in layer {
            choice[s] = Some(a);
            done[s] = true;
        }
    }
}

/// Minimal probabilities of eventually reaching `target`.
pub fn min_reach_prob(m: &Mdp, target: &BTreeSet<usize>) -> Result<Vec<Rat>> {
    let n = m.n_states();
    let sys = Sys::from_mdp(m).with_rewards(|_, _| Rat::zero());
    let tmask = mask(n, target.iter().copied());
    let zero = sys.can_avoid_forever(&tmask);
    let term: Vec<Option<Rat>> = (0..n)
        .map(|s| {
            if tmask[s] {
                Some(Rat::one())
            } else if zero[s] {
                Some(Rat::zero())
            } else {
                None
            }
        })
        .collect();
    let (v, _) = policy_iteration(&sys, &term, Direction::Min, None)?;
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::samples::alpha_beta_loop;
    use crate::mdp::MdpBuilder;

    #[test]
    fn gap_between_two_actions() {
        let mut b = MdpBuilder::new();
        let s = b.state("s");
        let g = b.state("g");
        let f = b.state("f");
        b.action(s, "a", 0, vec![(g, Rat::new(1, 4)), (f, Rat::new(3, 4))]);
        b.action(s, "b", 0, vec![(g, Rat::new(1, 3)), (f, Rat::new(2, 3))]);
        b.absorbing(g);
        b.absorbing(f);
        b.set_initial(s);
        let m = b.build().unwrap();
        let r = max_reach_prob(&m, &BTreeSet::from([g]), &BTreeSet::from([f])).unwrap();
        assert_eq!(r.pmax[s], Rat::new(1, 3));
        assert_eq!(r.gap_delta, Rat::new(1, 12));
        assert_eq!(r.witness.choice[s], 1);
    }

    #[test]
    fn loop_example_reaches_goal_surely() {
        let m = alpha_beta_loop();
        let goal = m.goal().clone();
        let r = max_reach_prob(&m, &goal, m.fail()).unwrap();
        let s = m.initial();
        assert_eq!(r.pmax[s], Rat::one());
        assert_eq!(r.act_max[s], vec![1]);
        assert_eq!(r.gap_delta, Rat::new(1, 4));
    }

    #[test]
    fn min_reach_with_avoiding_action() {
        let m = alpha_beta_loop();
        let f = m.index_of("fail").unwrap();
        let v = min_reach_prob(&m, &BTreeSet::from([f])).unwrap();
        assert_eq!(v[m.initial()], Rat::zero());
        let g2 = m.index_of("goal2").unwrap();
        let v = min_reach_prob(&m, &BTreeSet::from([g2])).unwrap();
        assert_eq!(v[m.initial()], Rat::zero());
        let s = BTreeSet::from([m.initial()]);
        assert!(min_reach_prob(&m, &s).unwrap().iter().all(|p| p.is_one()));
    }
}
