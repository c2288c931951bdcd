use crate::error::{Error, Result};
use crate::graph::{scc, Sys};
use crate::matrix::solve_sparse;
use crate::rat::Rat;

/// Stationary distribution of the closed class `comp` of a chain given by `succ`.
pub fn stationary(comp: &[usize], succ: impl Fn(usize) -> Vec<(usize, Rat)>) -> Result<Vec<Rat>> {
    let n = comp.len();
    let mut pos = std::collections::HashMap::with_capacity(n);
    for (i, &s) in comp.iter().enumerate() {
        pos.insert(s, i);
    }
    // x (I - P) = 0 column-wise, with the last equation replaced by sum x = 1
    let mut rows: Vec<Vec<(usize, Rat)>> = (0..n).map(|j| vec![(j, Rat::one())]).collect();
    for (i, &s) in comp.iter().enumerate() {
        for (t, p) in succ(s) {
            let j = *pos.get(&t).ok_or_else(|| Error::Internal("stationary: class is not closed".into()))?;
            rows[j].push((i, -p));
        }
    }
    rows[n - 1] = (0..n).map(|i| (i, Rat::one())).collect();
    let mut rhs = vec![Rat::zero(); n];
    rhs[n - 1] = Rat::one();
    Ok(solve_sparse(rows, rhs)?)
}

/// Gain and bias of a memoryless policy; bias is 0 at the first state of each recurrent class.
pub fn evaluate_gain(sys: &Sys, policy: &[usize]) -> Result<(Vec<Rat>, Vec<Rat>)> {
    let n = sys.n();
    let act = |s: usize| &sys.acts[s][policy[s]];
    let comps = scc(n, |s| act(s).succ.iter().map(|(t, _)| *t).collect());
    let mut comp_of = vec![0; n];
    for (c, xs) in comps.iter().enumerate() {
        for &x in xs {
            comp_of[x] = c;
        }
    }
    let mut g = vec![Rat::zero(); n];
    let mut h = vec![Rat::zero(); n];
    let mut recurrent = vec![false; n];
    for (c, xs) in comps.iter().enumerate() {
        if !xs.iter().all(|&s| act(s).succ.iter().all(|(t, _)| comp_of[*t] == c)) {
            continue;
        }
        let x = stationary(xs, |s| act(s).succ.clone())?;
        let gain: Rat = xs.iter().zip(&x).map(|(&s, xi)| xi * &act(s).reward).sum();
        let mut pos = std::collections::HashMap::new();
        for (i, &s) in xs.iter().enumerate() {
            pos.insert(s, i);
            g[s] = gain.clone();
            recurrent[s] = true;
        }
        let mut rows = Vec::with_capacity(xs.len());
        let mut rhs = Vec::with_capacity(xs.len());
        for (i, &s) in xs.iter().enumerate() {
            if i == 0 {
                rows.push(vec![(0, Rat::one())]);
                rhs.push(Rat::zero());
                continue;
            }
            let mut row = vec![(i, Rat::one())];
            for (t, p) in &act(s).succ {
                row.push((pos[t], -p));
            }
            rows.push(row);
            rhs.push(&act(s).reward - &gain);
        }
        for (i, v) in solve_sparse(rows, rhs)?.into_iter().enumerate() {
            h[xs[i]] = v;
        }
    }
    let trans: Vec<usize> = (0..n).filter(|&s| !recurrent[s]).collect();
    if !trans.is_empty() {
        let mut col = vec![usize::MAX; n];
        for (i, &s) in trans.iter().enumerate() {
            col[s] = i;
        }
        let rows = || -> Vec<Vec<(usize, Rat)>> {
            trans
                .iter()
                .map(|&s| {
                    let mut row = vec![(col[s], Rat::one())];
                    for (t, p) in &act(s).succ {
                        if !recurrent[*t] {
                            row.push((col[*t], -p));
                        }
                    }
                    row
                })
                .collect()
        };
        let rhs_g: Vec<Rat> = trans
            .iter()
            .map(|&s| act(s).succ.iter().filter(|(t, _)| recurrent[*t]).map(|(t, p)| p * &g[*t]).sum())
            .collect();
        for (i, v) in solve_sparse(rows(), rhs_g)?.into_iter().enumerate() {
            g[trans[i]] = v;
        }
        let rhs_h: Vec<Rat> = trans
            .iter()
            .map(|&s| {
                let known: Rat = act(s).succ.iter().filter(|(t, _)| recurrent[*t]).map(|(t, p)| p * &h[*t]).sum();
                &act(s).reward - &g[s] + known
            })
            .collect();
        for (i, v) in solve_sparse(rows(), rhs_h)?.into_iter().enumerate() {
            h[trans[i]] = v;
        }
    }
    Ok((g, h))
}

const MAX_ROUNDS: usize = 100_000;

/// Maximal long-run average reward per state with a memoryless optimal policy, by
/// multichain policy iteration: gain improvement first, then bias improvement among
/// gain-optimal actions, keeping the current action on ties and otherwise the lowest index.
pub fn mean_payoff_max(sys: &Sys, init: Option<Vec<usize>>) -> Result<(Vec<Rat>, Vec<usize>)> {
    let n = sys.n();
    let mut policy = init.unwrap_or_else(|| vec![0; n]);
    let dot = |s: usize, a: usize, v: &[Rat]| -> Rat { sys.acts[s][a].succ.iter().map(|(t, p)| p * &v[*t]).sum() };
    for _ in 0..MAX_ROUNDS {
        let (g, h) = evaluate_gain(sys, &policy)?;
        let mut changed = false;
        let mut gain_best: Vec<Rat> = Vec::with_capacity(n);
        for s in 0..n {
            let qs: Vec<Rat> = (0..sys.acts[s].len()).map(|a| dot(s, a, &g)).collect();
            let best = qs.iter().max().unwrap().clone();
            if qs[policy[s]] < best {
                policy[s] = qs.iter().position(|q| *q == best).unwrap();
                changed = true;
            }
            gain_best.push(best);
        }
        if changed {
            continue;
        }
        for s in 0..n {
            let cand: Vec<usize> = (0..sys.acts[s].len()).filter(|&a| dot(s, a, &g) == gain_best[s]).collect();
            let val = |a: usize| &sys.acts[s][a].reward + dot(s, a, &h);
            let cur = val(policy[s]);
            let mut best: Option<(usize, Rat)> = None;
            for a in cand {
                let v = val(a);
                if best.as_ref().is_none_or(|(_, b)| v > *b) {
                    best = Some((a, v));
                }
            }
            let (a, v) = best.unwrap();
            if v > cur {
                policy[s] = a;
                changed = true;
            }
        }
        if !changed {
            return Ok((g, policy));
        }
    }
    Err(Error::Internal("mean-payoff policy iteration did not converge".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::SysAction;

    fn act(succ: Vec<(usize, Rat)>, r: i64) -> SysAction {
        SysAction { label: 0, succ, reward: Rat::int(r) }
    }

    #[test]
    fn single_cycle() {
        let sys = Sys { acts: vec![vec![act(vec![(1, Rat::one())], 1)], vec![act(vec![(0, Rat::one())], 3)]] };
        let (g, _) = mean_payoff_max(&sys, None).unwrap();
        assert_eq!(g, vec![Rat::int(2), Rat::int(2)]);
    }

    #[test]
    fn choose_better_cycle() {
        // state 0: stay with reward 2, or go to the 2-cycle (1: reward 2, 2: reward 3)
        let sys = Sys {
            acts: vec![
                vec![act(vec![(0, Rat::one())], 2), act(vec![(1, Rat::one())], 0)],
                vec![act(vec![(2, Rat::one())], 2)],
                vec![act(vec![(1, Rat::one())], 3)],
            ],
        };
        let (g, p) = mean_payoff_max(&sys, None).unwrap();
        assert_eq!(g[0], Rat::new(5, 2));
        assert_eq!(p[0], 1);
    }

    #[test]
    fn random_exit_multichain() {
        // from 0: a coin to absorbing 1 (gain 4) or absorbing 2 (gain 0); or stay for 1
        let sys = Sys {
            acts: vec![
                vec![act(vec![(0, Rat::one())], 1), act(vec![(1, Rat::new(1, 2)), (2, Rat::new(1, 2))], 0)],
                vec![act(vec![(1, Rat::one())], 4)],
                vec![act(vec![(2, Rat::one())], 0)],
            ],
        };
        let (g, p) = mean_payoff_max(&sys, None).unwrap();
        assert_eq!((g[0].clone(), p[0]), (Rat::int(2), 1));
    }
}
