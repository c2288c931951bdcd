use super::{mask, policy_iteration, Direction, Sys, SysAction};
use crate::error::{Error, Result};
use crate::mdp::{Mdp, MemorylessPolicy};
use crate::rat::Rat;
use std::collections::{BTreeSet, HashMap, VecDeque};

/// Restriction on schedulers: after `copies - 1` consecutive states of `region`, the
/// fixed policy `q` must be followed until `region` is left.
#[derive(Debug, Clone)]
pub struct Discipline<'a> {
    pub copies: usize,
    pub q: &'a MemorylessPolicy,
    pub region: &'a BTreeSet<usize>,
}

/// Minimal expected number of steps from `from` until `to` is visited.
pub fn min_expected_steps(m: &Mdp, from: usize, to: usize, discipline: Option<&Discipline<'_>>) -> Result<Rat> {
    if from == to {
        return Ok(Rat::zero());
    }
    let (sys, start, target) = match discipline {
        None => (Sys::from_mdp(m), from, to),
        Some(d) => copy_product(m, from, to, d)?,
    };
    let sys = sys.with_rewards(|_, _| Rat::one());
    let n = sys.n();
    let tmask = mask(n, [target]);
    let ok = sys.prob1_max(&tmask, &vec![false; n]);
    if !ok[start] {
        return Err(Error::TargetNotAlmostSurelyReachable { from: m.id(from).into(), to: m.id(to).into() });
    }
    // keep only actions that stay inside the almost-sure region
    let mut idx = vec![usize::MAX; n];
    let keep: Vec<usize> = (0..n).filter(|&s| ok[s]).collect();
    for (i, &s) in keep.iter().enumerate() {
        idx[s] = i;
    }
    let restricted = Sys {
        acts: keep
            .iter()
            .map(|&s| {
                sys.acts[s]
                    .iter()
                    .filter(|a| a.succ.iter().all(|(t, _)| ok[*t]))
                    .map(|a| SysAction {
                        label: a.label,
                        succ: a.succ.iter().map(|(t, p)| (idx[*t], p.clone())).collect(),
                        reward: a.reward.clone(),
                    })
                    .collect()
            })
            .collect(),
    };
    let rn = restricted.n();
    let rt = idx[target];
    let term: Vec<Option<Rat>> = (0..rn).map(|s| if s == rt { Some(Rat::zero()) } else { None }).collect();
    let init = proper_policy(&restricted, rt)?;
    let (v, _) = policy_iteration(&restricted, &term, Direction::Min, Some(init))?;
    Ok(v[idx[start]].clone())
}

/// Attractor policy towards `target`: every state picks an action moving closer.
fn proper_policy(sys: &Sys, target: usize) -> Result<Vec<usize>> {
    let n = sys.n();
    let mut done = vec![false; n];
    done[target] = true;
    let mut pol = vec![0; n];
    loop {
        let layer: Vec<(usize, usize)> = (0..n)
            .filter(|&s| !done[s])
            .filter_map(|s| sys.acts[s].iter().position(|a| a.succ.iter().any(|(t, _)| done[*t])).map(|a| (s, a)))
            .collect();
        if layer.is_empty() {
            break;
        }
        for (s, a) in layer {
            pol[s] = a;
            done[s] = true;
        }
    }
    if done.iter().all(|&x| x) {
        Ok(pol)
    } else {
        Err(Error::Internal("almost-sure region without attractor".into()))
    }
}

/// States outside `region` stay single; region states are copied `copies` times and the
/// copy counts consecutive region states. The last copy only allows `q`'s action.
fn copy_product(m: &Mdp, from: usize, to: usize, d: &Discipline<'_>) -> Result<(Sys, usize, usize)> {
    if d.copies == 0 {
        return Err(Error::InvalidArgument("discipline needs at least one copy".into()));
    }
    if d.region.contains(&from) || d.region.contains(&to) {
        return Err(Error::InvalidArgument("endpoints must lie outside the disciplined region".into()));
    }
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut keys: Vec<(usize, usize)> = Vec::new();
    let mut queue = VecDeque::new();
    let mut intern = |k: (usize, usize), keys: &mut Vec<(usize, usize)>, q: &mut VecDeque<usize>| {
        *index.entry(k).or_insert_with(|| {
            keys.push(k);
            q.push_back(keys.len() - 1);
            keys.len() - 1
        })
    };
    let start = intern((from, 0), &mut keys, &mut queue);
    let target = intern((to, 0), &mut keys, &mut queue);
    let mut acts: Vec<Vec<SysAction>> = Vec::new();
    while let Some(i) = queue.pop_front() {
        let (s, c) = keys[i];
        let allowed: Vec<usize> = if c == d.copies { vec![d.q.choice[s]] } else { (0..m.actions(s).len()).collect() };
        let mut out = Vec::new();
        for a in allowed {
            let succ = m
                .action(s, a)
                .transitions
                .iter()
                .map(|t| {
                    let nc = if d.region.contains(&t.to) { (c + 1).min(d.copies) } else { 0 };
                    (intern((t.to, nc), &mut keys, &mut queue), t.prob.clone())
                })
                .collect();
            out.push(SysAction { label: a, succ, reward: Rat::zero() });
        }
        if acts.len() <= i {
            acts.resize(i + 1, Vec::new());
        }
        acts[i] = out;
    }
    acts.resize(keys.len(), Vec::new());
    Ok((Sys { acts }, start, target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::max_reach_prob;
    use crate::mdp::samples::alpha_beta_loop;
    use crate::mdp::MdpBuilder;

    #[test]
    fn geometric_wait() {
        let mut b = MdpBuilder::new();
        let s = b.state("s");
        let t = b.state("t");
        b.action(s, "a", 0, vec![(s, Rat::new(1, 2)), (t, Rat::new(1, 2))]);
        b.absorbing(t);
        b.set_initial(s);
        let m = b.build().unwrap();
        assert_eq!(min_expected_steps(&m, s, t, None).unwrap(), Rat::int(2));
        assert!(min_expected_steps(&m, t, s, None).is_err());
    }

    #[test]
    fn loop_example_copies() {
        let m = alpha_beta_loop();
        let g1 = m.index_of("goal1").unwrap();
        let f = m.index_of("fail").unwrap();
        let g2 = m.index_of("goal2").unwrap();
        assert_eq!(min_expected_steps(&m, g1, m.initial(), None).unwrap(), Rat::one());
        let r = max_reach_prob(&m, m.goal(), m.fail()).unwrap();
        let region = BTreeSet::from([m.initial()]);
        let two = Discipline { copies: 2, q: &r.witness, region: &region };
        assert_eq!(min_expected_steps(&m, g1, f, Some(&two)).unwrap(), Rat::int(10));
        assert_eq!(min_expected_steps(&m, f, g1, Some(&two)).unwrap(), Rat::int(10));
        assert_eq!(min_expected_steps(&m, g1, g2, Some(&two)).unwrap(), Rat::int(2));
        // with a single copy the free choice is never available and fail is unreachable
        let one = Discipline { copies: 1, q: &r.witness, region: &region };
        assert!(matches!(
            min_expected_steps(&m, g1, f, Some(&one)),
            Err(Error::TargetNotAlmostSurelyReachable { .. })
        ));
    }
}
