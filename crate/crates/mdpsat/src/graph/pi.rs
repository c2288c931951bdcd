use super::Sys;
use crate::error::{Error, Result};
use crate::matrix::solve_sparse;
use crate::rat::Rat;
use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Max,
    Min,
}

impl Direction {
    pub fn better(self, a: &Rat, b: &Rat) -> bool {
        match self {
            Direction::Max => a > b,
            Direction::Min => a < b,
        }
    }
}

const MAX_ROUNDS: usize = 100_000;

/// Values of a memoryless policy: immediate rewards plus fixed values at terminal states.
/// States that cannot reach a terminal under the policy get value 0.
pub fn evaluate_policy(sys: &Sys, term: &[Option<Rat>], policy: &[usize]) -> Result<Vec<Rat>> {
    let n = sys.n();
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
    for s in 0..n {
        if term[s].is_none() {
            for (t, _) in &sys.acts[s][policy[s]].succ {
                pred[*t].push(s);
            }
        }
    }
    let mut live: Vec<bool> = term.iter().map(|t| t.is_some()).collect();
    let mut q: VecDeque<usize> = (0..n).filter(|&s| live[s]).collect();
    while let Some(t) = q.pop_front() {
        for &s in &pred[t] {
            if !live[s] {
                live[s] = true;
                q.push_back(s);
            }
        }
    }
    let vars: Vec<usize> = (0..n).filter(|&s| live[s] && term[s].is_none()).collect();
    let mut col = vec![usize::MAX; n];
    for (i, &s) in vars.iter().enumerate() {
        col[s] = i;
    }
    let mut rows = Vec::with_capacity(vars.len());
    let mut rhs = Vec::with_capacity(vars.len());
    for &s in &vars {
        let a = &sys.acts[s][policy[s]];
        let mut row = vec![(col[s], Rat::one())];
        let mut b = a.reward.clone();
        for (t, p) in &a.succ {
            if let Some(v) = &term[*t] {
                b += p * v;
            } else if live[*t] {
                row.push((col[*t], -p));
            }
        }
        rows.push(row);
        rhs.push(b);
    }
    let x = solve_sparse(rows, rhs)?;
    let mut out = vec![Rat::zero(); n];
    for s in 0..n {
        if let Some(v) = &term[s] {
            out[s] = v.clone();
        } else if live[s] {
            out[s] = x[col[s]].clone();
        }
    }
    Ok(out)
}

/// One-step value of action `a` at `s` under values `v`.
pub(crate) fn q_value(sys: &Sys, v: &[Rat], s: usize, a: usize) -> Rat {
    let act = &sys.acts[s][a];
    let mut q = act.reward.clone();
    for (t, p) in &act.succ {
        q += p * &v[*t];
    }
    q
}

/// Howard policy iteration for total reward until a terminal state.
///
/// Improvement switches only on strict gain and picks the lowest optimal action index.
/// Callers guarantee convergence to the optimum: either all policies terminate almost
/// surely, or rewards are zero and terminal values non-negative (reachability).
pub fn policy_iteration(
    sys: &Sys,
    term: &[Option<Rat>],
    dir: Direction,
    init: Option<Vec<usize>>,
) -> Result<(Vec<Rat>, Vec<usize>)> {
    let n = sys.n();
    let mut policy = init.unwrap_or_else(|| vec![0; n]);
    for _ in 0..MAX_ROUNDS {
        let v = evaluate_policy(sys, term, &policy)?;
        let mut changed = false;
        for s in 0..n {
            if term[s].is_some() {
                continue;
            }
            let cur = q_value(sys, &v, s, policy[s]);
            let qs: Vec<Rat> = (0..sys.acts[s].len()).map(|a| q_value(sys, &v, s, a)).collect();
            let best = qs.iter().fold(&cur, |b, q| if dir.better(q, b) { q } else { b });
            if dir.better(best, &cur) {
                policy[s] = qs.iter().position(|q| q == best).unwrap();
                changed = true;
            }
        }
        if !changed {
            return Ok((v, policy));
        }
    }
    Err(Error::Internal("policy iteration did not converge".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::SysAction;

    fn act(succ: Vec<(usize, Rat)>, r: i64) -> SysAction {
        SysAction { label: 0, succ, reward: Rat::int(r) }
    }

    #[test]
    fn picks_better_branch() {
        // s0: a -> goal with reward 3, b -> goal with reward 2
        let sys = Sys { acts: vec![vec![act(vec![(1, Rat::one())], 2), act(vec![(1, Rat::one())], 3)], vec![]] };
        let term = vec![None, Some(Rat::zero())];
        let (v, p) = policy_iteration(&sys, &term, Direction::Max, None).unwrap();
        assert_eq!(v[0], Rat::int(3));
        assert_eq!(p[0], 1);
        let (v, _) = policy_iteration(&sys, &term, Direction::Min, None).unwrap();
        assert_eq!(v[0], Rat::int(2));
    }

    #[test]
    fn improper_states_get_zero() {
        let sys = Sys { acts: vec![vec![act(vec![(0, Rat::one())], 0)], vec![]] };
        let v = evaluate_policy(&sys, &[None, Some(Rat::one())], &[0, 0]).unwrap();
        assert_eq!(v[0], Rat::zero());
    }
}
