use super::eval::{chain_bottoms, chain_reach, reach_and_pe};
use super::space::{enumerate, for_each_behaviour, OracleScheduler, SchedulerSpace};
use crate::error::{Error, Result};
use crate::mdp::{ChainEdge, InducedChain, Mdp, MdpBuilder, MemorylessPolicy};
use crate::rat::Rat;
use num_bigint::BigInt;
use num_traits::Zero;
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

/// Chain of a memoryless policy over all states of `m`.
fn policy_chain(m: &Mdp, choice: &[usize]) -> InducedChain {
    let edges = (0..m.n_states())
        .map(|s| {
            let a = choice[s];
            let act = m.action(s, a);
            act.transitions
                .iter()
                .map(|t| ChainEdge { to: t.to, prob: t.prob.clone(), weight: act.weight.clone(), action: a })
                .collect()
        })
        .collect();
    InducedChain { states: (0..m.n_states()).map(|s| (s, BigInt::zero())).collect(), edges, initial: m.initial() }
}

fn memoryless_choices(m: &Mdp, budget: usize) -> Result<Vec<Vec<usize>>> {
    enumerate(m, SchedulerSpace::Memoryless, budget)?
        .map(|s| match s {
            OracleScheduler::Memoryless(p) => Ok(p.choice),
            _ => Err(Error::Internal("memoryless enumeration".into())),
        })
        .collect()
}

/// Per-state maximal probability of `!Fail U Goal`, by enumerating all memoryless policies.
pub fn pmax_by_enumeration(m: &Mdp, budget: usize) -> Result<Vec<Rat>> {
    let n = m.n_states();
    let g: Vec<bool> = (0..n).map(|s| m.is_goal(s)).collect();
    let f: Vec<bool> = (0..n).map(|s| !g[s] && m.is_fail(s)).collect();
    let mut best = vec![Rat::zero(); n];
    for choice in memoryless_choices(m, budget)? {
        let (r, _) = chain_reach(&policy_chain(m, &choice), &g, &f)?;
        for s in 0..n {
            if r[s] > best[s] {
                best[s] = r[s].clone();
            }
        }
    }
    Ok(best)
}

/// Every memoryless policy reaches the goal almost surely from the initial state, which
/// for finite models means every scheduler does.
pub fn goal_almost_sure_everywhere(m: &Mdp, budget: usize) -> Result<bool> {
    for choice in memoryless_choices(m, budget)? {
        let p = MemorylessPolicy::new(choice);
        if !reach_and_pe(m, &p)?.0.is_one() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Every state reaches every other one in the underlying graph.
pub fn strongly_connected(m: &Mdp) -> bool {
    let c = InducedChain {
        states: (0..m.n_states()).map(|s| (s, BigInt::zero())).collect(),
        edges: (0..m.n_states())
            .map(|s| {
                m.actions(s)
                    .iter()
                    .flat_map(|a| a.transitions.iter())
                    .map(|t| ChainEdge { to: t.to, prob: Rat::zero(), weight: BigInt::zero(), action: 0 })
                    .collect()
            })
            .collect(),
        initial: 0,
    };
    let b = chain_bottoms(&c);
    b.len() == 1 && b[0].len() == m.n_states()
}

/// Saturation constants recomputed without the solver: W, the optimal-action gap δ, the
/// disciplined return bound e and K = max(ceil(W e / δ), W (|S'| + 1)).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleSaturation {
    pub w: BigInt,
    pub pmax: Vec<Rat>,
    pub act_max: Vec<Vec<usize>>,
    pub delta: Rat,
    pub e_pairs: BTreeMap<(usize, usize), Rat>,
    pub e: Rat,
    pub s_prime: usize,
    pub k: BigInt,
}

/// `q` is the policy forced after `|S'|` consecutive steps outside Goal and Fail; it must
/// use optimal actions of `!Fail U Goal` everywhere.
pub fn recompute_saturation(m: &Mdp, q: &MemorylessPolicy, budget: usize) -> Result<OracleSaturation> {
    let n = m.n_states();
    let pmax = pmax_by_enumeration(m, budget)?;
    let gf = |s: usize| m.is_goal(s) || m.is_fail(s);
    let value = |s: usize, a: usize| -> Rat { m.action(s, a).transitions.iter().map(|t| &t.prob * &pmax[t.to]).sum() };
    let act_max: Vec<Vec<usize>> = (0..n)
        .map(|s| {
            if gf(s) {
                (0..m.actions(s).len()).collect()
            } else {
                (0..m.actions(s).len()).filter(|&a| value(s, a) == pmax[s]).collect()
            }
        })
        .collect();
    for s in (0..n).filter(|&s| !gf(s)) {
        if !act_max[s].contains(&q.choice[s]) {
            return Err(Error::InvalidArgument(format!("discipline policy is not optimal at {}", m.id(s))));
        }
    }
    let delta = (0..n)
        .filter(|&s| !gf(s))
        .flat_map(|s| (0..m.actions(s).len()).map(move |a| (s, a)))
        .map(|(s, a)| &pmax[s] - value(s, a))
        .filter(|d| !d.is_zero())
        .min()
        .unwrap_or_else(Rat::one);
    let region: BTreeSet<usize> = (0..n).filter(|&s| !gf(s)).collect();
    let copies = region.len() + 1;
    let ends: Vec<usize> = (0..n).filter(|&s| gf(s)).collect();
    let mut e_pairs = BTreeMap::new();
    for &s in &ends {
        for &t in &ends {
            let v = if s == t { Rat::zero() } else { disciplined_steps(m, s, t, &region, copies, q, budget)? };
            e_pairs.insert((s, t), v);
        }
    }
    let e = e_pairs.values().max().cloned().unwrap_or_else(Rat::zero);
    let w = m.max_weight();
    let k = if w.is_zero() {
        BigInt::zero()
    } else {
        let a = (Rat::from(&w) * &e / &delta).ceil();
        a.max(&w * BigInt::from(copies))
    };
    Ok(OracleSaturation { w, pmax, act_max, delta, e_pairs, e, s_prime: region.len(), k })
}

/// Minimal expected steps from `s` to `t` when the `copies`-th consecutive region state
/// must follow `q`; minimum over memoryless policies of the copy product.
fn disciplined_steps(
    m: &Mdp,
    s: usize,
    t: usize,
    region: &BTreeSet<usize>,
    copies: usize,
    q: &MemorylessPolicy,
    budget: usize,
) -> Result<Rat> {
    let mut b = MdpBuilder::new();
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut keys = Vec::new();
    let mut queue = VecDeque::new();
    let mut intern = |b: &mut MdpBuilder, keys: &mut Vec<(usize, usize)>, q: &mut VecDeque<usize>, k: (usize, usize)| {
        *index.entry(k).or_insert_with(|| {
            keys.push(k);
            q.push_back(keys.len() - 1);
            b.state(format!("{}^{}", m.id(k.0), k.1))
        })
    };
    let start = intern(&mut b, &mut keys, &mut queue, (s, 0));
    let target = intern(&mut b, &mut keys, &mut queue, (t, 0));
    while let Some(i) = queue.pop_front() {
        let (x, c) = keys[i];
        if i == target {
            b.absorbing(i);
            continue;
        }
        let allowed: Vec<usize> = if c == copies { vec![q.choice[x]] } else { (0..m.actions(x).len()).collect() };
        for a in allowed {
            let act = m.action(x, a);
            let tr = act
                .transitions
                .iter()
                .map(|tr| {
                    let nc = if region.contains(&tr.to) { (c + 1).min(copies) } else { 0 };
                    (intern(&mut b, &mut keys, &mut queue, (tr.to, nc)), tr.prob.clone())
                })
                .collect();
            b.action(i, act.name.clone(), 1, tr);
        }
    }
    b.set_initial(start);
    b.add_goal(target);
    let p = b.build_reachable()?;
    let mut best: Option<Rat> = None;
    for_each_behaviour(&p, SchedulerSpace::Memoryless, budget, |sched| {
        let (r, steps) = reach_and_pe(&p, &sched)?;
        if r.is_one() && best.as_ref().is_none_or(|b| &steps < b) {
            best = Some(steps);
        }
        Ok(())
    })?;
    best.ok_or_else(|| Error::TargetNotAlmostSurelyReachable { from: m.id(s).into(), to: m.id(t).into() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::samples::alpha_beta_loop;

    #[test]
    fn loop_example_constants() {
        let m = alpha_beta_loop();
        // beta reaches a goal surely
        let q = MemorylessPolicy::new(vec![1, 0, 0, 0]);
        let s = recompute_saturation(&m, &q, 1000).unwrap();
        assert_eq!(s.pmax[0], Rat::one());
        assert_eq!(s.delta, Rat::new(1, 4));
        assert_eq!(s.e, Rat::int(10));
        assert_eq!(s.k, BigInt::from(120));
        assert!(strongly_connected(&m));
    }
}
