use super::meanpayoff::stationary;
use crate::error::{Error, Result};
use crate::graph::{evaluate_policy, Sys, SysAction};
use crate::mdp::{induce_chain, Mdp, Nfa, Scheduler};
use crate::rat::Rat;
use std::collections::{BTreeSet, HashMap, VecDeque};

const ACCEPT: usize = 0;
const REJECT: usize = 1;

/// Probability, per chain state in `from`, that the labels read from there on have a
/// good prefix for `a`.
fn acceptance(m: &Mdp, c: &crate::mdp::InducedChain, a: &Nfa, from: &[usize]) -> Result<Vec<Rat>> {
    let mut keys: Vec<(usize, BTreeSet<usize>)> = Vec::new();
    let mut index: HashMap<(usize, BTreeSet<usize>), usize> = HashMap::new();
    let mut acts: Vec<Vec<SysAction>> = vec![Vec::new(), Vec::new()];
    let mut queue = VecDeque::new();
    let mut roots = Vec::with_capacity(from.len());
    let start = a.start();
    for &i in from {
        let key = (i, start.clone());
        let id = *index.entry(key.clone()).or_insert_with(|| {
            keys.push(key);
            queue.push_back(keys.len() - 1);
            keys.len() + 1
        });
        roots.push(id);
    }
    while let Some(k) = queue.pop_front() {
        let (i, q) = keys[k].clone();
        let next = a.step(&q, m.labels(c.mdp_state(i)));
        let succ = if a.hits_accepting(&next) {
            vec![(ACCEPT, Rat::one())]
        } else if next.is_empty() {
            vec![(REJECT, Rat::one())]
        } else {
            c.edges[i]
                .iter()
                .map(|e| {
                    let key = (e.to, next.clone());
                    let id = *index.entry(key.clone()).or_insert_with(|| {
                        keys.push(key);
                        queue.push_back(keys.len() - 1);
                        keys.len() + 1
                    });
                    (id, e.prob.clone())
                })
                .collect()
        };
        let id = k + 2;
        if acts.len() <= id {
            acts.resize(id + 1, Vec::new());
        }
        acts[id] = vec![SysAction { label: 0, succ, reward: Rat::zero() }];
    }
    acts.resize(keys.len() + 2, Vec::new());
    let sys = Sys { acts };
    let policy = vec![0; sys.n()];
    let mut term = vec![None; sys.n()];
    term[ACCEPT] = Some(Rat::one());
    term[REJECT] = Some(Rat::zero());
    let acc = evaluate_policy(&sys, &term, &policy)?;
    term[ACCEPT] = Some(Rat::zero());
    term[REJECT] = Some(Rat::one());
    let rej = evaluate_policy(&sys, &term, &policy)?;
    let mut out = Vec::with_capacity(from.len());
    for (&i, &r) in from.iter().zip(&roots) {
        if a.hits_accepting(&start) {
            out.push(Rat::one());
            continue;
        }
        if &acc[r] + &rej[r] != Rat::one() {
            return Err(Error::AcceptanceUnresolved(m.id(c.mdp_state(i)).into()));
        }
        out.push(acc[r].clone());
    }
    Ok(out)
}

/// Long-run probability that a suffix has a good prefix for the co-safety automaton `a`,
/// under a finite-memory scheduler whose chain has a single bottom class.
pub fn evaluate_fm_lrp_nfa<S: Scheduler + ?Sized>(m: &Mdp, a: &Nfa, sched: &S) -> Result<Rat> {
    let c = induce_chain(m, sched)?;
    let bs = c.bsccs();
    if bs.len() != 1 {
        return Err(Error::MultipleBsccs(bs.len()));
    }
    let b = &bs[0];
    let x = stationary(b, |i| c.edges[i].iter().map(|e| (e.to, e.prob.clone())).collect())?;
    let p = acceptance(m, &c, a, b)?;
    Ok(x.iter().zip(&p).map(|(x, p)| x * p).sum())
}
