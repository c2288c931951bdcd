use crate::error::{Error, Result};
use crate::matrix::solve_sparse;
use crate::mdp::{induce_chain, InducedChain, Mdp, Scheduler};
use crate::rat::Rat;
use std::collections::VecDeque;

/// Per chain state: probability of reaching a target state while avoiding blocked states,
/// and the expected weight accumulated before the target counted on those paths only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainMoments {
    pub reach: Vec<Rat>,
    pub partial: Vec<Rat>,
}

impl ChainMoments {
    pub fn compute(c: &InducedChain, target: impl Fn(usize) -> bool, blocked: impl Fn(usize) -> bool) -> Result<Self> {
        let n = c.len();
        let is_t: Vec<bool> = (0..n).map(&target).collect();
        let is_b: Vec<bool> = (0..n).map(|i| !is_t[i] && blocked(i)).collect();
        let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            if !is_t[i] && !is_b[i] {
                for j in c.successors(i) {
                    pred[j].push(i);
                }
            }
        }
        let mut live = is_t.clone();
        let mut q: VecDeque<usize> = (0..n).filter(|&i| is_t[i]).collect();
        while let Some(j) = q.pop_front() {
            for &i in &pred[j] {
                if !live[i] {
                    live[i] = true;
                    q.push_back(i);
                }
            }
        }
        let vars: Vec<usize> = (0..n).filter(|&i| live[i] && !is_t[i]).collect();
        let mut col = vec![usize::MAX; n];
        for (k, &i) in vars.iter().enumerate() {
            col[i] = k;
        }
        let system = || -> Vec<Vec<(usize, Rat)>> {
            vars.iter()
                .map(|&i| {
                    let mut row = vec![(col[i], Rat::one())];
                    for e in &c.edges[i] {
                        if live[e.to] && !is_t[e.to] {
                            row.push((col[e.to], -&e.prob));
                        }
                    }
                    row
                })
                .collect()
        };
        let rhs_x: Vec<Rat> =
            vars.iter().map(|&i| c.edges[i].iter().filter(|e| is_t[e.to]).map(|e| &e.prob).sum()).collect();
        let xs = solve_sparse(system(), rhs_x)?;
        let mut reach = vec![Rat::zero(); n];
        for i in 0..n {
            if is_t[i] {
                reach[i] = Rat::one();
            } else if live[i] {
                reach[i] = xs[col[i]].clone();
            }
        }
        let rhs_y: Vec<Rat> = vars
            .iter()
            .map(|&i| c.edges[i].iter().map(|e| &e.prob * Rat::from(&e.weight) * &reach[e.to]).sum())
            .collect();
        let ys = solve_sparse(system(), rhs_y)?;
        let mut partial = vec![Rat::zero(); n];
        for &i in &vars {
            partial[i] = ys[col[i]].clone();
        }
        Ok(ChainMoments { reach, partial })
    }
}

fn goal_moments<S: Scheduler + ?Sized>(m: &Mdp, sched: &S) -> Result<ChainMoments> {
    let c = induce_chain(m, sched)?;
    ChainMoments::compute(&c, |i| m.is_goal(c.mdp_state(i)), |_| false)
}

/// Partial expectation of `sched`: weight up to the first goal visit, 0 on paths missing it.
pub fn evaluate_pe<S: Scheduler + ?Sized>(m: &Mdp, sched: &S) -> Result<Rat> {
    Ok(goal_moments(m, sched)?.partial.swap_remove(0))
}

pub fn evaluate_ce<S: Scheduler + ?Sized>(m: &Mdp, sched: &S) -> Result<Rat> {
    let mut mo = goal_moments(m, sched)?;
    let p = mo.reach.swap_remove(0);
    if p.is_zero() {
        return Err(Error::GoalProbabilityZero);
    }
    Ok(mo.partial.swap_remove(0) / p)
}

/// Expected weight accumulated until the goal; the goal must be reached almost surely.
pub fn evaluate_expected_total<S: Scheduler + ?Sized>(m: &Mdp, sched: &S) -> Result<Rat> {
    let mut mo = goal_moments(m, sched)?;
    if !mo.reach[0].is_one() {
        return Err(Error::GoalNotAlmostSure);
    }
    Ok(mo.partial.swap_remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::{MdpBuilder, MemorylessPolicy};

    #[test]
    fn half_path_to_fail() {
        let mut b = MdpBuilder::new();
        let s = b.state("s");
        let g = b.state("goal");
        let f = b.state("fail");
        b.action(s, "a", 6, vec![(g, Rat::new(1, 2)), (f, Rat::new(1, 2))]);
        b.absorbing(g);
        b.absorbing(f);
        b.set_initial(s);
        b.add_goal(g);
        let m = b.build().unwrap();
        let p = MemorylessPolicy::first_actions(&m);
        assert_eq!(evaluate_pe(&m, &p).unwrap(), Rat::int(3));
        assert_eq!(evaluate_ce(&m, &p).unwrap(), Rat::int(6));
        assert!(matches!(evaluate_expected_total(&m, &p), Err(Error::GoalNotAlmostSure)));
    }

    #[test]
    fn loop_accumulates() {
        let mut b = MdpBuilder::new();
        let s = b.state("s");
        let g = b.state("goal");
        b.action(s, "a", 1, vec![(s, Rat::new(1, 2)), (g, Rat::new(1, 2))]);
        b.absorbing(g);
        b.set_initial(s);
        b.add_goal(g);
        let m = b.build().unwrap();
        let p = MemorylessPolicy::first_actions(&m);
        assert_eq!(evaluate_expected_total(&m, &p).unwrap(), Rat::int(2));
        assert_eq!(evaluate_pe(&m, &p).unwrap(), Rat::int(2));
    }
}
