use crate::error::{Error, Result};
use crate::matrix::{solve_sparse, solve_sparse_multi};
use crate::mdp::{induce_chain, InducedChain, Mdp, Scheduler};
use crate::rat::Rat;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use std::collections::{BTreeMap, HashMap, VecDeque};

/// Exact distribution of an integer outcome.
pub type Law = BTreeMap<BigInt, Rat>;

/// Strongly connected components of the chain restricted to `keep`.
fn components(c: &InducedChain, keep: &[bool]) -> Vec<Vec<usize>> {
    let mut g: DiGraph<(), ()> = DiGraph::new();
    let nodes: Vec<_> = (0..c.len()).map(|_| g.add_node(())).collect();
    for i in (0..c.len()).filter(|&i| keep[i]) {
        for e in &c.edges[i] {
            if keep[e.to] {
                g.add_edge(nodes[i], nodes[e.to], ());
            }
        }
    }
    tarjan_scc(&g).into_iter().map(|xs| xs.into_iter().map(|n| n.index()).filter(|&i| keep[i]).collect::<Vec<_>>()).filter(|xs: &Vec<usize>| !xs.is_empty()).collect()
}

/// Closed components of the chain.
pub fn chain_bottoms(c: &InducedChain) -> Vec<Vec<usize>> {
    let comps = components(c, &vec![true; c.len()]);
    let mut comp_of = vec![0; c.len()];
    for (k, xs) in comps.iter().enumerate() {
        for &x in xs {
            comp_of[x] = k;
        }
    }
    let mut out: Vec<Vec<usize>> = comps
        .iter()
        .enumerate()
        .filter(|(k, xs)| xs.iter().all(|&x| c.edges[x].iter().all(|e| comp_of[e.to] == *k)))
        .map(|(_, xs)| {
            let mut v = xs.clone();
            v.sort_unstable();
            v
        })
        .collect();
    out.sort();
    out
}

/// States from which `target` is reachable without passing `stop` (target wins over stop).
fn backward_reach(c: &InducedChain, target: &[bool], stop: &[bool]) -> Vec<bool> {
    let n = c.len();
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        if target[i] || stop[i] {
            continue;
        }
        for e in &c.edges[i] {
            pred[e.to].push(i);
        }
    }
    let mut live = target.to_vec();
    let mut q: VecDeque<usize> = (0..n).filter(|&i| target[i]).collect();
    while let Some(j) = q.pop_front() {
        for &i in &pred[j] {
            if !live[i] {
                live[i] = true;
                q.push_back(i);
            }
        }
    }
    live
}

/// Probability of reaching `target` before `stop`, and the expected weight collected before
/// the target on those paths, per chain state.
pub fn chain_reach(c: &InducedChain, target: &[bool], stop: &[bool]) -> Result<(Vec<Rat>, Vec<Rat>)> {
    let n = c.len();
    let live = backward_reach(c, target, stop);
    let vars: Vec<usize> = (0..n).filter(|&i| live[i] && !target[i]).collect();
    let mut col = vec![usize::MAX; n];
    for (k, &i) in vars.iter().enumerate() {
        col[i] = k;
    }
    let rows = || -> Vec<Vec<(usize, Rat)>> {
        vars.iter()
            .map(|&i| {
                let mut r = vec![(col[i], Rat::one())];
                r.extend(c.edges[i].iter().filter(|e| col[e.to] != usize::MAX).map(|e| (col[e.to], -&e.prob)));
                r
            })
            .collect()
    };
    let rhs: Vec<Rat> = vars.iter().map(|&i| c.edges[i].iter().filter(|e| target[e.to]).map(|e| e.prob.clone()).sum()).collect();
    let x = solve_sparse(rows(), rhs)?;
    let mut reach = vec![Rat::zero(); n];
    for i in 0..n {
        if target[i] {
            reach[i] = Rat::one();
        } else if col[i] != usize::MAX {
            reach[i] = x[col[i]].clone();
        }
    }
    let rhs: Vec<Rat> = vars
        .iter()
        .map(|&i| c.edges[i].iter().map(|e| &e.prob * Rat::from(&e.weight) * &reach[e.to]).sum())
        .collect();
    let y = solve_sparse(rows(), rhs)?;
    let mut partial = vec![Rat::zero(); n];
    for &i in &vars {
        partial[i] = y[col[i]].clone();
    }
    Ok((reach, partial))
}

fn goal_mask(m: &Mdp, c: &InducedChain) -> Vec<bool> {
    (0..c.len()).map(|i| m.is_goal(c.mdp_state(i))).collect()
}

/// Goal probability and partial expectation of `sched` (weight up to the first goal visit).
pub fn reach_and_pe<S: Scheduler + ?Sized>(m: &Mdp, sched: &S) -> Result<(Rat, Rat)> {
    let c = induce_chain(m, sched)?;
    let g = goal_mask(m, &c);
    let (r, p) = chain_reach(&c, &g, &vec![false; c.len()])?;
    Ok((r[c.initial].clone(), p[c.initial].clone()))
}

/// Sub-distribution of the accumulated weight at the first goal visit. With `cap`, the
/// weight is clamped at `cap` and the chain may be cyclic; without it a positive-weight
/// cycle before the goal is reported as `InfiniteSupport`.
pub fn goal_weight_law<S: Scheduler + ?Sized>(m: &Mdp, sched: &S, cap: Option<&BigInt>) -> Result<Law> {
    let c = induce_chain(m, sched)?;
    let g = goal_mask(m, &c);
    let live = backward_reach(&c, &g, &vec![false; c.len()]);
    let open: Vec<bool> = (0..c.len()).map(|i| live[i] && !g[i]).collect();
    if cap.is_none() {
        for comp in components(&c, &open) {
            let inside: std::collections::HashSet<usize> = comp.iter().copied().collect();
            let positive = comp.iter().any(|&i| c.edges[i].iter().any(|e| inside.contains(&e.to) && e.weight.is_positive()));
            if positive {
                return Err(Error::InfiniteSupport);
            }
        }
    }
    if !live[c.initial] {
        return Ok(Law::new());
    }
    let clamp = |w: BigInt| match cap {
        Some(k) if &w > k => k.clone(),
        _ => w,
    };
    // product of chain states with accumulated weight
    let mut keys: Vec<(usize, BigInt)> = vec![(c.initial, BigInt::zero())];
    let mut index: HashMap<(usize, BigInt), usize> = HashMap::from([((c.initial, BigInt::zero()), 0)]);
    let mut succ: Vec<Vec<(usize, Rat)>> = Vec::new();
    let mut k = 0;
    while k < keys.len() {
        let (i, w) = keys[k].clone();
        let mut out = Vec::new();
        if !g[i] {
            for e in c.edges[i].iter().filter(|e| live[e.to]) {
                let key = (e.to, clamp(&w + &e.weight));
                let j = *index.entry(key.clone()).or_insert_with(|| {
                    keys.push(key);
                    keys.len() - 1
                });
                out.push((j, e.prob.clone()));
            }
        }
        succ.push(out);
        k += 1;
    }
    let atoms: Vec<BigInt> = {
        let mut a: Vec<BigInt> = keys.iter().filter(|(i, _)| g[*i]).map(|(_, w)| w.clone()).collect();
        a.sort();
        a.dedup();
        a
    };
    let atom_col: BTreeMap<BigInt, usize> = atoms.iter().enumerate().map(|(j, w)| (w.clone(), j)).collect();
    let vars: Vec<usize> = (0..keys.len()).filter(|&k| !g[keys[k].0]).collect();
    let mut col = vec![usize::MAX; keys.len()];
    for (v, &k) in vars.iter().enumerate() {
        col[k] = v;
    }
    let mut rows = Vec::with_capacity(vars.len());
    let mut rhs = Vec::with_capacity(vars.len());
    for &k in &vars {
        let mut r = vec![(col[k], Rat::one())];
        let mut b = vec![Rat::zero(); atoms.len()];
        for (j, p) in &succ[k] {
            if g[keys[*j].0] {
                b[atom_col[&keys[*j].1]] += p;
            } else {
                r.push((col[*j], -p));
            }
        }
        rows.push(r);
        rhs.push(b);
    }
    let mut law = Law::new();
    if g[c.initial] {
        law.insert(BigInt::zero(), Rat::one());
        return Ok(law);
    }
    let x = solve_sparse_multi(rows, rhs)?;
    for (j, w) in atoms.iter().enumerate() {
        let p = x[col[0]][j].clone();
        if !p.is_zero() {
            law.insert(w.clone(), p);
        }
    }
    Ok(law)
}

/// Exact law of the weight accumulated until the goal.
pub fn terminal_law<S: Scheduler + ?Sized>(m: &Mdp, sched: &S) -> Result<Law> {
    let law = goal_weight_law(m, sched, None)?;
    let total: Rat = law.values().sum();
    if !total.is_one() {
        return Err(Error::GoalNotAlmostSure);
    }
    Ok(law)
}

/// Law of `min(X, cap)` for the weight `X` accumulated until the goal.
pub fn capped_law<S: Scheduler + ?Sized>(m: &Mdp, sched: &S, cap: &BigInt) -> Result<Law> {
    let law = goal_weight_law(m, sched, Some(cap))?;
    let total: Rat = law.values().sum();
    if !total.is_one() {
        return Err(Error::GoalNotAlmostSure);
    }
    Ok(law)
}

/// Mean of the lowest `p` probability mass.
pub fn lower_tail_mean(law: &Law, p: &Rat) -> Result<Rat> {
    if !p.is_positive() || p > &Rat::one() {
        return Err(Error::InvalidArgument(format!("probability level {p} outside (0, 1]")));
    }
    let mut left = p.clone();
    let mut acc = Rat::zero();
    for (x, q) in law {
        let take = if q < &left { q.clone() } else { left.clone() };
        acc += Rat::from(x) * &take;
        left -= &take;
        if left.is_zero() {
            break;
        }
    }
    if !left.is_zero() {
        return Err(Error::InvalidArgument("law has less mass than the level".into()));
    }
    Ok(acc / p)
}

/// Long-run average of the weight counted while `!Fail U Goal` holds, per closed component
/// of the chain, averaged by the probability of ending up there.
pub fn long_run_weighted<S: Scheduler + ?Sized>(m: &Mdp, sched: &S) -> Result<(Rat, usize)> {
    let c = induce_chain(m, sched)?;
    let n = c.len();
    let g = goal_mask(m, &c);
    let f: Vec<bool> = (0..n).map(|i| !g[i] && m.is_fail(c.mdp_state(i))).collect();
    let (sat, _) = chain_reach(&c, &g, &f)?;
    let bottoms = chain_bottoms(&c);
    let mut total = Rat::zero();
    for b in &bottoms {
        let x = stationary_of(&c, b)?;
        let mut v = Rat::zero();
        for (k, &i) in b.iter().enumerate() {
            if f[i] {
                continue;
            }
            let step: Rat = c.edges[i]
                .iter()
                .map(|e| {
                    let w = &e.prob * Rat::from(&e.weight);
                    if g[i] {
                        w
                    } else {
                        w * &sat[e.to]
                    }
                })
                .sum();
            v += &x[k] * step;
        }
        if v.is_zero() {
            continue;
        }
        let mut inb = vec![false; n];
        for &i in b {
            inb[i] = true;
        }
        let (absorb, _) = chain_reach(&c, &inb, &vec![false; n])?;
        total += &absorb[c.initial] * v;
    }
    Ok((total, bottoms.len()))
}

/// Stationary distribution of a closed component.
fn stationary_of(c: &InducedChain, b: &[usize]) -> Result<Vec<Rat>> {
    let pos: HashMap<usize, usize> = b.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let len = b.len();
    // x (P - I) = 0 with the last equation replaced by sum x = 1; solved transposed
    let mut rows: Vec<Vec<(usize, Rat)>> = vec![Vec::new(); len];
    for (k, row) in rows.iter_mut().enumerate() {
        row.push((k, -Rat::one()));
    }
    for (k, &i) in b.iter().enumerate() {
        for e in &c.edges[i] {
            rows[pos[&e.to]].push((k, e.prob.clone()));
        }
    }
    rows[len - 1] = (0..len).map(|k| (k, Rat::one())).collect();
    let mut rhs = vec![Rat::zero(); len];
    rhs[len - 1] = Rat::one();
    Ok(solve_sparse(rows, rhs)?)
}

/// Expected weight until the goal; the goal must be reached almost surely.
pub fn expected_total<S: Scheduler + ?Sized>(m: &Mdp, sched: &S) -> Result<Rat> {
    let (r, pe) = reach_and_pe(m, sched)?;
    if !r.is_one() {
        return Err(Error::GoalNotAlmostSure);
    }
    Ok(pe)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::samples::alpha_beta_loop;
    use crate::mdp::{MdpBuilder, MemorylessPolicy, WeightMemoryScheduler};

    fn two_branches() -> Mdp {
        let mut b = MdpBuilder::new();
        let s = b.state("s");
        let x = b.state("x");
        let g = b.state("goal");
        b.action(s, "a", 0, vec![(g, Rat::new(1, 2)), (x, Rat::new(1, 2))]);
        b.action(x, "ten", 10, vec![(g, Rat::one())]);
        b.absorbing(g);
        b.set_initial(s);
        b.add_goal(g);
        b.build().unwrap()
    }

    #[test]
    fn laws() {
        let m = two_branches();
        let p = MemorylessPolicy::first_actions(&m);
        let law = terminal_law(&m, &p).unwrap();
        assert_eq!(law, Law::from([(BigInt::from(0), Rat::new(1, 2)), (BigInt::from(10), Rat::new(1, 2))]));
        assert_eq!(lower_tail_mean(&law, &Rat::new(1, 2)).unwrap(), Rat::zero());
        assert_eq!(lower_tail_mean(&law, &Rat::new(3, 4)).unwrap(), Rat::new(10, 3));
    }

    #[test]
    fn loop_law_needs_cap() {
        let mut b = MdpBuilder::new();
        let s = b.state("s");
        let g = b.state("goal");
        b.action(s, "a", 1, vec![(s, Rat::new(1, 2)), (g, Rat::new(1, 2))]);
        b.absorbing(g);
        b.set_initial(s);
        b.add_goal(g);
        let m = b.build().unwrap();
        let p = MemorylessPolicy::first_actions(&m);
        assert_eq!(terminal_law(&m, &p), Err(Error::InfiniteSupport));
        let law = capped_law(&m, &p, &BigInt::from(2)).unwrap();
        assert_eq!(law, Law::from([(BigInt::from(1), Rat::new(1, 2)), (BigInt::from(2), Rat::new(1, 2))]));
        assert_eq!(expected_total(&m, &p).unwrap(), Rat::int(2));
    }

    #[test]
    fn loop_example_long_run() {
        let m = alpha_beta_loop();
        let alpha = MemorylessPolicy::new(vec![0, 0, 0, 0]);
        let beta = MemorylessPolicy::new(vec![1, 0, 0, 0]);
        assert_eq!(long_run_weighted(&m, &alpha).unwrap().0, Rat::one());
        assert_eq!(long_run_weighted(&m, &beta).unwrap().0, Rat::one());
        let mut two = WeightMemoryScheduler::new(3, true);
        two.default = Some(vec![0; 4]);
        two.set(0, 3, 1);
        assert_eq!(long_run_weighted(&m, &two).unwrap().0, Rat::new(13, 10));
    }
}
