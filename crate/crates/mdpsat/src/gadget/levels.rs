use super::build::{Gadget, GadgetKind};
use crate::error::{Error, Result};
use crate::graph::{evaluate_policy, Sys};
use crate::rat::Rat;
use num_bigint::BigInt;
use num_traits::ToPrimitive;

/// Values `e(t, w)` and `e(s, w)` of the canonical scheduler for `w` in `low..=top`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Levels {
    pub low: i64,
    pub t: Vec<Rat>,
    pub s: Vec<Rat>,
}

impl Levels {
    pub fn top(&self) -> i64 {
        self.low + self.t.len() as i64 - 1
    }
    pub fn t_at(&self, w: i64) -> &Rat {
        &self.t[(w - self.low) as usize]
    }
    pub fn s_at(&self, w: i64) -> &Rat {
        &self.s[(w - self.low) as usize]
    }
    pub fn d_at(&self, w: i64) -> Rat {
        self.t_at(w) - self.s_at(w)
    }
}

/// Per-state goal probability and goal-restricted weight of the initial-value branches.
struct Branches {
    reach: Vec<Rat>,
    partial: Vec<Rat>,
    /// Largest weight a branch path can still collect before goal (None if unbounded).
    gain: Vec<Option<BigInt>>,
}

fn branch_values(g: &Gadget) -> Result<Branches> {
    let m = &g.mdp;
    let n = m.n_states();
    let t = g.state("t")?;
    let s = g.state("s")?;
    let sys = Sys::from_mdp(m).with_rewards(|_, _| Rat::zero());
    let mut term = vec![None; n];
    for &x in m.goal() {
        term[x] = Some(Rat::one());
    }
    for &x in m.fail() {
        term[x] = Some(Rat::zero());
    }
    term[t] = Some(Rat::zero());
    term[s] = Some(Rat::zero());
    let policy = vec![0; n];
    let reach = evaluate_policy(&sys, &term, &policy)?;
    let sys = Sys::from_mdp(m).with_rewards(|x, a| Rat::from(&m.action(x, a).weight) * &reach[x]);
    for v in term.iter_mut().filter(|v| v.is_some()) {
        *v = Some(Rat::zero());
    }
    let partial = evaluate_policy(&sys, &term, &policy)?;

    // longest path to goal over single-action states; a positive cycle shows up as
    // a value still growing after n rounds
    let mut gain: Vec<Option<BigInt>> = vec![None; n];
    for &x in m.goal() {
        gain[x] = Some(BigInt::from(0));
    }
    let stop = |x: usize| m.is_goal(x) || m.is_fail(x) || x == t || x == s;
    for round in 0..=n {
        let mut changed = false;
        for x in 0..n {
            if stop(x) {
                continue;
            }
            let a = m.action(x, 0);
            let best = a.transitions.iter().filter_map(|tr| gain[tr.to].as_ref()).max().cloned();
            if let Some(b) = best {
                let v = b + &a.weight;
                if gain[x].as_ref().is_none_or(|old| v > *old) {
                    gain[x] = Some(v);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
        if round == n {
            return Err(Error::Internal("initial-value branch has a positive cycle".into()));
        }
    }
    Ok(Branches { reach, partial, gain })
}

/// Computes the canonical scheduler's level values from the base levels up to `top`.
pub fn gadget_levels(g: &Gadget, top: i64) -> Result<Levels> {
    let k = g.lrs.k;
    let low = g.kind.base_low(k);
    if top < low + k as i64 - 1 {
        return Err(Error::InvalidArgument(format!("top level {top} lies below the base levels")));
    }
    let m = &g.mdp;
    let t = g.state("t")?;
    let s = g.state("s")?;
    let br = branch_values(g)?;
    let cvar = g.kind == GadgetKind::Cvar;
    let len = (top - low + 1) as usize;
    let mut et = Vec::with_capacity(len);
    let mut es = Vec::with_capacity(len);

    let base = |side: usize, name: &str, w: i64| -> Result<Rat> {
        let a = m.action(side, g.action(side, name)?);
        let w1 = BigInt::from(w) + &a.weight;
        let mut v = Rat::zero();
        for tr in &a.transitions {
            let u = tr.to;
            if cvar {
                let g = br.gain[u].as_ref().ok_or_else(|| Error::Internal(format!("branch {} misses goal", m.id(u))))?;
                if (&w1 + g).to_i64().is_none_or(|x| x > 0) {
                    return Err(Error::Internal(format!("branch through {} can end above 0", m.id(u))));
                }
            }
            v += &tr.prob * (Rat::from(&w1) * &br.reach[u] + &br.partial[u]);
        }
        Ok(v)
    };
    for j in 0..k {
        let w = low + j as i64;
        et.push(base(t, &format!("gamma_{j}"), w)?);
        es.push(base(s, &format!("delta_{j}"), w)?);
    }

    let rec = |side: usize, name: &str, w: i64, et: &[Rat], es: &[Rat]| -> Result<Rat> {
        let a = m.action(side, g.action(side, name)?);
        let w1 = BigInt::from(w) + &a.weight;
        let mut v = Rat::zero();
        for tr in &a.transitions {
            let u = tr.to;
            if m.is_goal(u) {
                let f = Rat::from(&w1);
                let f = if cvar && f.is_positive() { Rat::zero() } else { f };
                v += &tr.prob * f;
            } else if m.is_fail(u) {
            } else {
                let back = m.action(u, 0);
                let to = back.transitions[0].to;
                let lvl = (&w1 + &back.weight).to_i64().expect("level fits i64");
                let idx = usize::try_from(lvl - low).map_err(|_| Error::Internal("level below the base".into()))?;
                let e = if to == t { &et[idx] } else { &es[idx] };
                v += &tr.prob * e;
            }
        }
        Ok(v)
    };
    for w in low + k as i64..=top {
        let a = rec(t, "gamma", w, &et, &es)?;
        let b = rec(s, "delta", w, &et, &es)?;
        et.push(a);
        es.push(b);
    }
    Ok(Levels { low, t: et, s: es })
}

/// `d(low + n) = e(t, low + n) - e(s, low + n)` for `n < horizon`.
pub fn gadget_d_sequence(g: &Gadget, horizon: i64) -> Result<Vec<Rat>> {
    if horizon <= 0 {
        return Err(Error::HorizonNonpositive);
    }
    let low = g.kind.base_low(g.lrs.k);
    let top = (low + horizon - 1).max(low + g.lrs.k as i64 - 1);
    let lv = gadget_levels(g, top)?;
    Ok((0..horizon).map(|n| lv.d_at(low + n)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadget::build::{build_cvar_gadget, build_pe_gadget, build_wlf_gadget};
    use crate::gadget::lrs::{base_goal_prob, rescale_lrs, Lrs, Regime};

    fn rescaled(a: &[i64], b: &[i64], r: Regime) -> Lrs {
        rescale_lrs(&Lrs::from_ints(a, b).unwrap(), r).unwrap().lrs
    }

    #[test]
    fn pe_base_values() {
        let l = rescaled(&[1, -1], &[0, 1], Regime::Pe);
        let g = build_pe_gadget(&l).unwrap();
        let lv = gadget_levels(&g, 3).unwrap();
        assert_eq!(lv.low, -1);
        assert_eq!(*lv.t_at(-1), base_goal_prob(2, 0) + &l.betas[0]);
        assert_eq!(*lv.s_at(0), base_goal_prob(2, 1));
    }

    #[test]
    fn d_tracks_sequence() {
        for (a, b) in [(vec![1, -1], vec![0, 1]), (vec![2, 1], vec![1, 3]), (vec![1, 0, -2], vec![1, 0, 2])] {
            let l = rescaled(&a, &b, Regime::Pe);
            let u = l.terms(12);
            assert_eq!(gadget_d_sequence(&build_pe_gadget(&l).unwrap(), 12).unwrap(), u);
            assert_eq!(gadget_d_sequence(&build_wlf_gadget(&l).unwrap(), 12).unwrap(), u);
            let l = rescaled(&a, &b, Regime::Cvar);
            let g = build_cvar_gadget(&l).unwrap();
            assert_eq!(gadget_d_sequence(&g, 12).unwrap(), l.terms(12));
        }
    }

    #[test]
    fn cvar_base_formula() {
        let l = rescaled(&[1, -1], &[0, 1], Regime::Cvar);
        let g = build_cvar_gadget(&l).unwrap();
        let lv = gadget_levels(&g, 2).unwrap();
        let alpha = l.abs_alpha_sum();
        for j in 0..2i64 {
            let v = &alpha * Rat::int(-3 * 2 + 2 * j - 1);
            assert_eq!(*lv.t_at(-2 + j), v);
            assert_eq!(*lv.s_at(-2 + j), v - &l.betas[j as usize]);
        }
    }

    #[test]
    fn nonpositive_horizon() {
        let l = rescaled(&[1, -1], &[0, 1], Regime::Pe);
        let g = build_pe_gadget(&l).unwrap();
        assert_eq!(gadget_d_sequence(&g, 0), Err(Error::HorizonNonpositive));
    }
}
