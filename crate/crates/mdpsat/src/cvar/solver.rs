use super::Tail;
use crate::error::{Error, Result};
use crate::graph::{mec_decompose, policy_iteration, Direction, Sys, SysAction};
use crate::mdp::{Mdp, WeightMemoryScheduler};
use crate::rat::Rat;
use crate::sspp::classical_sspp;
use num_bigint::BigInt;
use num_traits::Zero;

/// Weight bound beyond which the tail mass is small enough not to matter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CvarSaturation {
    pub n: usize,
    pub delta_min: Rat,
    pub ell: BigInt,
    pub w: BigInt,
    pub k: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CvarResult {
    /// On the original weight scale.
    pub value: Rat,
    /// Optimal threshold: the VaR of the witness's law (for high-bad, its upper quantile).
    pub var: BigInt,
    pub witness: WeightMemoryScheduler,
    /// `None` when the exact bound is too expensive to compute; the solver does not need it.
    pub saturation: Option<CvarSaturation>,
    pub tail: Tail,
    pub p: Rat,
}

impl CvarResult {
    /// The value in the negated-weights convention used for high-bad queries.
    pub fn negated_value(&self) -> Rat {
        -&self.value
    }
}

/// Bit budget for the exact powers in [`saturation_ell`].
const ELL_BIT_BUDGET: u64 = 4_000_000;

/// Smallest `l >= 1` with `(1 - delta^n)^l <= bound`, or `None` past the bit budget.
pub fn saturation_ell(delta: &Rat, n: u64, bound: &Rat) -> Option<BigInt> {
    let q = Rat::one() - delta.pow(n);
    if q.is_zero() || bound >= &Rat::one() {
        return Some(BigInt::from(1));
    }
    if !bound.is_positive() {
        return None;
    }
    let bits = q.denom().bits().max(1);
    let ok = |l: u64| q.pow(l) <= *bound;
    let mut hi = 1u64;
    while !ok(hi) {
        hi *= 2;
        if hi.saturating_mul(bits) > ELL_BIT_BUDGET {
            return None;
        }
    }
    let mut lo = hi / 2;
    // invariant: !ok(lo) (or lo = 0), ok(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(BigInt::from(hi))
}

fn require_preprocessed(m: &Mdp) -> Result<()> {
    m.check_nonnegative()?;
    if m.goal().is_empty() {
        return Err(Error::GoalNotReachable(m.id(m.initial()).into()));
    }
    for e in &mec_decompose(m).mecs {
        if let Some(&s) = e.states.iter().find(|&&s| !m.is_goal(s)) {
            return Err(Error::PreprocessNotApplied(m.id(s).into()));
        }
    }
    Ok(())
}

/// `K = l * N * W` where the probability of collecting more than `K` is at most
/// `1 - p` (low-bad) or `p` (high-bad).
pub fn cvar_saturation(m: &Mdp, p: &Rat, tail: Tail) -> Result<Option<CvarSaturation>> {
    require_preprocessed(m)?;
    check_level(p)?;
    let n = m.n_states();
    let delta_min = m.min_prob();
    let bound = match tail {
        Tail::LowBad => Rat::one() - p,
        Tail::HighBad => p.clone(),
    };
    let w = m.max_weight();
    Ok(saturation_ell(&delta_min, n as u64, &bound).map(|ell| {
        let k = &ell * BigInt::from(n) * &w;
        CvarSaturation { n, delta_min, ell, w, k }
    }))
}

fn check_level(p: &Rat) -> Result<()> {
    if !p.is_positive() || p >= &Rat::one() {
        return Err(Error::InvalidArgument(format!("probability level {p} outside (0, 1)")));
    }
    Ok(())
}

/// Level-by-level optimization over the remaining budget `r`: level `r` depends on
/// itself through zero-weight actions and on lower levels through positive ones.
struct LevelDp<'a, G, B> {
    m: &'a Mdp,
    dir: Direction,
    /// Value at a goal state with budget `r > 0`.
    goal: G,
    /// Value at budget `r <= 0`.
    below: B,
    levels: Vec<Vec<Rat>>,
    policies: Vec<Vec<usize>>,
}

impl<'a, G: Fn(&BigInt) -> Rat, B: Fn(usize, &BigInt) -> Rat> LevelDp<'a, G, B> {
    fn new(m: &'a Mdp, dir: Direction, goal: G, below: B) -> Self {
        let base = (0..m.n_states()).map(|s| below(s, &BigInt::zero())).collect();
        LevelDp { m, dir, goal, below, levels: vec![base], policies: vec![vec![0; m.n_states()]] }
    }

    fn value(&self, s: usize, r: &BigInt) -> Rat {
        if r <= &BigInt::zero() {
            (self.below)(s, r)
        } else {
            let i: usize = r.try_into().expect("level index fits in memory");
            self.levels[i][s].clone()
        }
    }

    fn top(&self) -> usize {
        self.levels.len() - 1
    }

    fn push_level(&mut self) -> Result<()> {
        let m = self.m;
        let n = m.n_states();
        let r = BigInt::from(self.levels.len());
        let sink = n;
        let mut acts: Vec<Vec<SysAction>> = Vec::with_capacity(n + 1);
        for s in 0..n {
            let mut out = Vec::new();
            for (ai, a) in m.actions(s).iter().enumerate() {
                if a.weight.is_zero() {
                    out.push(SysAction {
                        label: ai,
                        succ: a.transitions.iter().map(|t| (t.to, t.prob.clone())).collect(),
                        reward: Rat::zero(),
                    });
                } else {
                    let rr = &r - &a.weight;
                    let reward = a.transitions.iter().map(|t| &t.prob * self.value(t.to, &rr)).sum();
                    out.push(SysAction { label: ai, succ: vec![(sink, Rat::one())], reward });
                }
            }
            acts.push(out);
        }
        acts.push(Vec::new());
        let mut term: Vec<Option<Rat>> = (0..n).map(|s| m.is_goal(s).then(|| (self.goal)(&r))).collect();
        term.push(Some(Rat::zero()));
        let init = self.policies.last().map(|p| {
            let mut p = p.clone();
            p.push(0);
            p
        });
        let (mut v, mut pol) = policy_iteration(&Sys { acts }, &term, self.dir, init)?;
        v.pop();
        pol.pop();
        self.levels.push(v);
        self.policies.push(pol);
        Ok(())
    }
}

/// Maximal CVaR of the accumulated goal weight, lowest `p` mass averaged.
///
/// Uses `CVaR_p(X) = max_v [v + E(min(X - v, 0)) / p]`; for each integer `v` the inner
/// optimum is a total-reward problem on budget levels, and `v` never needs to exceed
/// the least `V` with `max_S Pr(X >= V + 1) <= 1 - p`.
pub fn cvar_max(m: &Mdp, p: &Rat) -> Result<CvarResult> {
    require_preprocessed(m)?;
    check_level(p)?;
    let saturation = cvar_saturation(m, p, Tail::LowBad)?;
    let one_minus_p = Rat::one() - p;
    let init = m.initial();
    // probability of collecting at least r more before the goal
    let mut tail = LevelDp::new(m, Direction::Max, |_| Rat::zero(), |_, _| Rat::one());
    // E(min(X - r, 0)) for the remaining X
    let mut short = LevelDp::new(m, Direction::Max, |r| -Rat::from(r), |_, _| Rat::zero());
    let mut best = (Rat::zero(), 0usize);
    loop {
        tail.push_level()?;
        let r = tail.top();
        if tail.levels[r][init] <= one_minus_p {
            break;
        }
        if let Some(s) = &saturation {
            if BigInt::from(r) > s.k {
                return Err(Error::Internal("CVaR threshold exceeds the saturation point".into()));
            }
        }
        short.push_level()?;
        let g = Rat::from(r as i64) + &short.levels[r][init] / p;
        if g > best.0 {
            best = (g, r);
        }
    }
    let v = best.1;
    let mut witness = WeightMemoryScheduler::new(v, false);
    for acc in 0..v {
        for s in 0..m.n_states() {
            if m.actions(s).len() > 1 {
                witness.set(s, acc, short.policies[v - acc][s]);
            }
        }
    }
    witness.default = Some(vec![0; m.n_states()]);
    Ok(CvarResult { value: best.0, var: BigInt::from(v), witness, saturation, tail: Tail::LowBad, p: p.clone() })
}

/// Minimal expectation of the highest `p` mass of the accumulated goal weight, i.e. the
/// maximal CVaR after negating all weights (reported on the original scale).
///
/// Uses `min_u [u + E(max(X - u, 0)) / p]`; with budget exhausted the remaining excess is
/// the minimal expected total weight.
pub fn cvar_max_high_bad(m: &Mdp, p: &Rat) -> Result<CvarResult> {
    require_preprocessed(m)?;
    check_level(p)?;
    let saturation = cvar_saturation(m, p, Tail::HighBad)?;
    let emin = classical_sspp(m, Direction::Min)?;
    let init = m.initial();
    let mut tail = LevelDp::new(m, Direction::Max, |_| Rat::zero(), |_, _| Rat::one());
    let ev = emin.values.clone();
    let mut excess = LevelDp::new(m, Direction::Min, |_| Rat::zero(), move |s, r| &ev[s] - Rat::from(r));
    let mut best = (&emin.values[init] / p, 0usize);
    loop {
        tail.push_level()?;
        let r = tail.top();
        if &tail.levels[r][init] <= p {
            break;
        }
        if let Some(s) = &saturation {
            if BigInt::from(r) > s.k {
                return Err(Error::Internal("CVaR threshold exceeds the saturation point".into()));
            }
        }
        excess.push_level()?;
        let g = Rat::from(r as i64) + &excess.levels[r][init] / p;
        if g < best.0 {
            best = (g, r);
        }
    }
    let u = best.1;
    let mut witness = WeightMemoryScheduler::new(u, false);
    for acc in 0..u {
        for s in 0..m.n_states() {
            if m.actions(s).len() > 1 {
                witness.set(s, acc, excess.policies[u - acc][s]);
            }
        }
    }
    witness.default = Some(emin.witness.choice.clone());
    Ok(CvarResult { value: best.0, var: BigInt::from(u), witness, saturation, tail: Tail::HighBad, p: p.clone() })
}
