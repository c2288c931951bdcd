use crate::error::{Error, Result};
use crate::graph::{min_reach_prob, require_acyclic};
use crate::mdp::{Mdp, MdpBuilder};
use crate::rat::Rat;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
use serde_json::{json, Value};

/// Partial-expectation threshold instance turned into a conditional-expectation one.
#[derive(Debug, Clone)]
pub struct PeCeReduction {
    /// States of the source keep their indices; two states are appended.
    pub mdp: Mdp,
    pub theta: Rat,
    /// Weight scale `b` of `theta = a / b`.
    pub scale: BigInt,
    /// `b * theta`.
    pub threshold: Rat,
}

/// `PE^max_M > theta` iff `CE^max_N > b * theta`; scheduler-wise
/// `CE_N = b (PE_M + Pr_M(goal) theta) / (1 + Pr_M(goal))`.
pub fn reduce_pe_to_ce(m: &Mdp, theta: &Rat) -> Result<PeCeReduction> {
    if m.goal().is_empty() {
        return Err(Error::InvalidArgument("model has no goal state".into()));
    }
    let scale = theta.denom().clone();
    let a = theta.numer().clone();
    let mut b = MdpBuilder::from_mdp(m);
    b.scale_weights(&scale);
    let init = b.state(b.fresh_id("ce_init"));
    let goal = b.state(b.fresh_id("ce_goal"));
    b.action(init, "split", 0, vec![(m.initial(), Rat::new(1, 2)), (goal, Rat::new(1, 2))]);
    for &g in m.goal() {
        b.clear_actions(g);
        b.action(g, "to_goal", a.clone(), vec![(goal, Rat::one())]);
    }
    b.absorbing(goal);
    b.set_initial(init);
    b.set_goal([goal].into());
    Ok(PeCeReduction { mdp: b.build()?, theta: theta.clone(), threshold: Rat::from(&a), scale })
}

/// Parameters of the acyclic conditional-to-partial reduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CePeReductionParams {
    /// Product over non-trap states of the lcm of their transition denominators.
    pub m: BigInt,
    pub delta: Rat,
    /// One more than the largest weight of a path to a non-goal trap.
    pub w: BigInt,
    pub p: Rat,
    pub r: BigInt,
    pub a: BigInt,
    pub b: BigInt,
    pub theta: Rat,
    pub theta_plus_delta: Rat,
    pub theta_plus_half_delta: Rat,
    pub theta_minus_half_delta: Rat,
}

impl CePeReductionParams {
    pub fn to_json(&self) -> Value {
        json!({
            "m": self.m.to_string(),
            "delta": self.delta.to_string(),
            "w": self.w.to_string(),
            "p": self.p.to_string(),
            "R": self.r.to_string(),
            "a": self.a.to_string(),
            "b": self.b.to_string(),
            "theta": self.theta.to_string(),
            "theta_plus_delta": self.theta_plus_delta.to_string(),
            "theta_plus_half_delta": self.theta_plus_half_delta.to_string(),
            "theta_minus_half_delta": self.theta_minus_half_delta.to_string(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct CePeReduction {
    /// Source after the optional pre-gadget; the threshold equivalences relate `base` and `mdp`.
    pub base: Mdp,
    pub pre_gadget: bool,
    pub mdp: Mdp,
    pub params: CePeReductionParams,
}

fn check_nonneg_acyclic(m: &Mdp) -> Result<()> {
    m.check_nonnegative()?;
    require_acyclic(m)?;
    Ok(())
}

/// Adds a fresh initial state with weight `theta` that enters the model or goal with
/// probability 1/2 each, then scales all weights by the denominator of `theta`.
fn pre_gadget(m: &Mdp, theta: &Rat) -> Result<(Mdp, Rat)> {
    let goal = *m.goal().iter().next().expect("goal checked");
    let mut b = MdpBuilder::from_mdp(m);
    b.scale_weights(theta.denom());
    let s0 = b.state(b.fresh_id("pre_init"));
    b.action(s0, "tau", theta.numer().clone(), vec![(m.initial(), Rat::new(1, 2)), (goal, Rat::new(1, 2))]);
    b.set_initial(s0);
    Ok((b.build()?, Rat::from(theta.numer())))
}

/// Largest accumulated weight on a path from each state to a non-goal trap.
fn longest_to_fail(m: &Mdp, order: &[usize]) -> Vec<Option<BigInt>> {
    let n = m.n_states();
    let mut best: Vec<Option<BigInt>> = vec![None; n];
    for s in 0..n {
        if m.is_trap(s) && !m.is_goal(s) {
            best[s] = Some(BigInt::from(0));
        }
    }
    for &s in order.iter().rev() {
        if m.is_goal(s) || m.is_trap(s) {
            continue;
        }
        for a in m.actions(s) {
            for t in &a.transitions {
                if let Some(v) = &best[t.to] {
                    let c = v + &a.weight;
                    if best[s].as_ref().is_none_or(|b| c > *b) {
                        best[s] = Some(c);
                    }
                }
            }
        }
    }
    best
}

/// Conditional-expectation threshold (`> theta` for max, `< theta` for min) on an acyclic
/// model with non-negative weights, turned into partial-expectation thresholds.
pub fn reduce_ce_to_pe_acyclic(m: &Mdp, theta: &Rat) -> Result<CePeReduction> {
    if !theta.is_positive() {
        return Err(Error::InvalidArgument("threshold must be positive".into()));
    }
    if m.goal().is_empty() {
        return Err(Error::InvalidArgument("model has no goal state".into()));
    }
    check_nonneg_acyclic(m)?;
    let pmin = min_reach_prob(m, m.goal())?;
    let (base, theta, pre) = if pmin[m.initial()].is_zero() {
        let (b, t) = pre_gadget(m, theta)?;
        (b, t, true)
    } else {
        (m.clone(), theta.clone(), false)
    };
    let order = require_acyclic(&base)?;
    let mut mm = BigInt::one();
    for s in 0..base.n_states() {
        if base.is_trap(s) {
            continue;
        }
        let l = base
            .actions(s)
            .iter()
            .flat_map(|a| a.transitions.iter().map(|t| t.prob.denom().clone()))
            .fold(BigInt::one(), |acc, d| acc.lcm(&d));
        mm *= l;
    }
    let (a, b) = (theta.numer().clone(), theta.denom().clone());
    let delta = Rat::from_parts(BigInt::one(), &b * &mm);
    let w = longest_to_fail(&base, &order)[base.initial()].clone().unwrap_or_default() + BigInt::one();
    let p = &delta / (Rat::int(2) * Rat::from(&w));
    let r = BigInt::from(2) * &w * &a * &mm;

    let goal = *base.goal().iter().next().expect("goal checked");
    let mut nb = MdpBuilder::from_mdp(&base);
    let fail2 = nb.state(nb.fresh_id("fail_sink"));
    nb.absorbing(fail2);
    let live = base.reachable_from(base.initial());
    for s in 0..base.n_states() {
        if base.is_trap(s) && !base.is_goal(s) && live[s] {
            nb.clear_actions(s);
            nb.action(s, "tau", r.clone(), vec![(goal, p.clone()), (fail2, Rat::one() - &p)]);
        }
    }
    let half = &delta / Rat::int(2);
    let params = CePeReductionParams {
        theta_plus_delta: &theta + &delta,
        theta_plus_half_delta: &theta + &half,
        theta_minus_half_delta: &theta - &half,
        m: mm,
        delta,
        w,
        p,
        r,
        a,
        b,
        theta,
    };
    Ok(CePeReduction { base, pre_gadget: pre, mdp: nb.build_reachable()?, params })
}

#[derive(Debug, Clone)]
pub struct PeWlfReduction {
    /// States of the source keep their indices; padding states are appended.
    pub mdp: Mdp,
    /// Common length of all paths from the initial state to a trap.
    pub ell: usize,
    pub theta: Rat,
    /// `theta / (ell + 1)`.
    pub threshold: Rat,
}

/// Pads an acyclic non-negative model so that every path to a trap has the same length,
/// then sends each trap back to the initial state with weight 0.
pub fn reduce_pe_to_wlf_acyclic(m: &Mdp, theta: &Rat) -> Result<PeWlfReduction> {
    check_nonneg_acyclic(m)?;
    let order = require_acyclic(m)?;
    let n = m.n_states();
    if let Some(&g) = m.goal().iter().find(|&&g| !m.is_trap(g)) {
        return Err(Error::InvalidArgument(format!("goal state {:?} is not a trap", m.id(g))));
    }
    let mut h = vec![0usize; n];
    for &s in order.iter().rev() {
        if !m.is_trap(s) {
            h[s] = 1 + m.actions(s).iter().flat_map(|a| a.transitions.iter().map(|t| h[t.to])).max().unwrap_or(0);
        }
    }
    let init = m.initial();
    if m.is_trap(init) {
        return Err(Error::InvalidArgument("initial state is a trap".into()));
    }
    let mut b = MdpBuilder::from_mdp(m);
    let mut fail = std::collections::BTreeSet::new();
    for s in 0..n {
        if m.is_trap(s) {
            b.clear_actions(s);
            b.action(s, "reset", 0, vec![(init, Rat::one())]);
            if !m.is_goal(s) {
                fail.insert(s);
            }
            continue;
        }
        b.clear_actions(s);
        for a in m.actions(s) {
            let mut tr = Vec::new();
            for t in &a.transitions {
                let gap = h[s] - 1 - h[t.to];
                let mut next = t.to;
                // chain of `gap` zero-weight states ending in t
                for i in (1..=gap).rev() {
                    let p = b.state(b.fresh_id(&format!("pad_{}_{}_{}_{i}", m.id(s), a.name, m.id(t.to))));
                    b.action(p, "pad", 0, vec![(next, Rat::one())]);
                    next = p;
                }
                tr.push((next, t.prob.clone()));
            }
            b.action(s, a.name.clone(), a.weight.clone(), tr);
        }
    }
    b.set_fail(fail);
    let ell = h[init];
    let mdp = b.build_reachable()?;
    Ok(PeWlfReduction { mdp, ell, theta: theta.clone(), threshold: theta / Rat::int(ell as i64 + 1) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Direction;
    use crate::longrun::{evaluate_fm_wlf, LongRunSpec};
    use crate::mdp::MemorylessPolicy;
    use crate::sspp::{acyclic_conditional_expectation, acyclic_partial_expectation, evaluate_ce, evaluate_pe};

    /// s --a(w1)--> {goal 1/2, u 1/2}, s --b(0)--> {fail 1/4, goal 3/4}, u --c(2)--> {goal 1/3, fail 2/3}
    fn sample() -> Mdp {
        let mut b = MdpBuilder::new();
        let s = b.state("s");
        let u = b.state("u");
        let g = b.state("goal");
        let f = b.state("fail");
        b.action(s, "a", 1, vec![(g, Rat::new(1, 2)), (u, Rat::new(1, 2))]);
        b.action(s, "b", 0, vec![(f, Rat::new(1, 4)), (g, Rat::new(3, 4))]);
        b.action(u, "c", 2, vec![(g, Rat::new(1, 3)), (f, Rat::new(2, 3))]);
        b.absorbing(g);
        b.absorbing(f);
        b.set_initial(s);
        b.add_goal(g);
        b.build().unwrap()
    }

    fn extend(p: &[usize], n: usize) -> MemorylessPolicy {
        let mut c = p.to_vec();
        c.resize(n, 0);
        MemorylessPolicy::new(c)
    }

    #[test]
    fn pe_ce_identity() {
        let m = sample();
        let theta = Rat::new(2, 3);
        let r = reduce_pe_to_ce(&m, &theta).unwrap();
        for a in 0..2 {
            let p = MemorylessPolicy::new(vec![a, 0, 0, 0]);
            let pe = evaluate_pe(&m, &p).unwrap();
            let c = crate::mdp::induce_chain(&m, &p).unwrap();
            let mo = crate::sspp::ChainMoments::compute(&c, |i| m.is_goal(c.mdp_state(i)), |_| false).unwrap();
            let pr = mo.reach[0].clone();
            let ce = evaluate_ce(&r.mdp, &extend(&p.choice, r.mdp.n_states())).unwrap();
            assert_eq!(ce, Rat::int(3) * (pe + &pr * &theta) / (Rat::one() + pr));
        }
    }

    #[test]
    fn ce_pe_parameters() {
        let m = sample();
        let theta = Rat::new(3, 2);
        let r = reduce_ce_to_pe_acyclic(&m, &theta).unwrap();
        let p = &r.params;
        assert!(!r.pre_gadget);
        assert_eq!(&p.p * Rat::from(&p.w), &p.delta / Rat::int(2));
        assert_eq!(&p.p * Rat::from(&p.r), p.theta);
        assert_eq!(p.m, BigInt::from(12));
        assert_eq!(p.w, BigInt::from(4));
        let ce = acyclic_conditional_expectation(&m, Direction::Max).unwrap().value;
        let pe = acyclic_partial_expectation(&r.mdp, Direction::Max).unwrap().value;
        assert_eq!(ce > theta, pe >= p.theta_plus_delta);
        assert_eq!(ce > theta, pe > p.theta_plus_half_delta);
    }

    #[test]
    fn pe_wlf_padding() {
        let m = sample();
        let r = reduce_pe_to_wlf_acyclic(&m, &Rat::one()).unwrap();
        assert_eq!(r.ell, 2);
        let spec = LongRunSpec::from_mdp(&r.mdp);
        for a in 0..2 {
            let p = MemorylessPolicy::new(vec![a, 0, 0, 0]);
            let pe = evaluate_pe(&m, &p).unwrap();
            let wlf = evaluate_fm_wlf(&r.mdp, &spec, &extend(&p.choice, r.mdp.n_states())).unwrap();
            assert_eq!(wlf, pe / Rat::int(3));
        }
    }
}
