use crate::error::{Error, Result};
use crate::graph::{Sys, SysAction};
use crate::mdp::Mdp;
use crate::rat::Rat;
use num_bigint::BigInt;
use std::collections::{HashMap, VecDeque};

/// Weight-tracking product on which weighted long-run frequency becomes mean payoff.
#[derive(Debug, Clone)]
pub struct FmkProduct {
    /// Action labels are action indices of the original model.
    pub sys: Sys,
    /// Product state -> (state, weight since the last Goal/Fail visit, capped at `k`).
    pub keys: Vec<(usize, u64)>,
    pub index: HashMap<(usize, u64), usize>,
    pub k: u64,
}

/// Builds the product over `(state, w)` reachable from `(r, 0)` for each root `r`.
///
/// Rewards are deferred: a step outside Goal and Fail is paid when the segment ends in
/// Goal and forfeited when it ends in Fail. Once the segment weight reaches `k`, only
/// actions in `act_max` are allowed and each further step (and the backlog at the moment
/// of saturation) is paid immediately, weighted by `pmax` of the successor.
pub fn fmk_product(m: &Mdp, k: &BigInt, pmax: &[Rat], act_max: &[Vec<usize>], roots: &[usize]) -> Result<FmkProduct> {
    m.check_nonnegative()?;
    let k: u64 = k.try_into().map_err(|_| Error::SpaceTooLarge(usize::MAX))?;
    let in_gf = |s: usize| m.is_goal(s) || m.is_fail(s);
    let mut keys: Vec<(usize, u64)> = Vec::new();
    let mut index: HashMap<(usize, u64), usize> = HashMap::new();
    let mut queue = VecDeque::new();
    let mut intern = |key: (usize, u64), keys: &mut Vec<(usize, u64)>, q: &mut VecDeque<usize>| -> usize {
        *index.entry(key).or_insert_with(|| {
            keys.push(key);
            q.push_back(keys.len() - 1);
            keys.len() - 1
        })
    };
    for &r in roots {
        intern((r, 0), &mut keys, &mut queue);
    }
    let mut acts: Vec<Vec<SysAction>> = Vec::new();
    while let Some(i) = queue.pop_front() {
        let (s, w) = keys[i];
        let allowed: Vec<usize> =
            if !in_gf(s) && w == k { act_max[s].clone() } else { (0..m.actions(s).len()).collect() };
        let mut out = Vec::with_capacity(allowed.len());
        for a in allowed {
            let act = m.action(s, a);
            let wgt: u64 = (&act.weight).try_into().map_err(|_| Error::SpaceTooLarge(usize::MAX))?;
            let mut reward = Rat::zero();
            let mut succ = Vec::with_capacity(act.transitions.len());
            for t in &act.transitions {
                let (mode, r) = if m.is_goal(s) {
                    (0, Rat::from(wgt as i64))
                } else if m.is_fail(s) {
                    (0, Rat::zero())
                } else {
                    let pending = if w < k { w + wgt } else { wgt };
                    if m.is_goal(t.to) {
                        (0, Rat::from(pending as i64))
                    } else if m.is_fail(t.to) {
                        (0, Rat::zero())
                    } else if w == k || w + wgt >= k {
                        (k, Rat::from(pending as i64) * &pmax[t.to])
                    } else {
                        (w + wgt, Rat::zero())
                    }
                };
                let mode = if in_gf(t.to) { 0 } else { mode };
                reward += &t.prob * r;
                succ.push((intern((t.to, mode), &mut keys, &mut queue), t.prob.clone()));
            }
            out.push(SysAction { label: a, succ, reward });
        }
        if acts.len() <= i {
            acts.resize(i + 1, Vec::new());
        }
        acts[i] = out;
    }
    acts.resize(keys.len(), Vec::new());
    Ok(FmkProduct { sys: Sys { acts }, keys, index, k })
}
