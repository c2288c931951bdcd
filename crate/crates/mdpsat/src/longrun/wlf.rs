use super::meanpayoff::{mean_payoff_max, stationary};
use super::product::fmk_product;
use super::LongRunSpec;
use crate::error::{Error, Result};
use crate::graph::{max_reach_prob, mec_decompose, policy_iteration, scc, wlf_saturation_point, Direction, Mec, SaturationData, Sys, SysAction};
use crate::mdp::{induce_chain, InducedChain, Mdp, MdpBuilder, Scheduler, WeightMemoryScheduler};
use crate::rat::Rat;
use crate::sspp::ChainMoments;
use std::collections::BTreeSet;

/// Optimum within one maximal end component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MecWlf {
    pub states: BTreeSet<usize>,
    pub saturation: SaturationData,
    pub gain: Rat,
    /// False if the optimum is only a supremum (the optimal product policy stalls
    /// outside Goal and Fail).
    pub attained: bool,
    /// Product-policy choices as (state, mode) -> action of the original model.
    pub choices: Vec<((usize, u64), usize)>,
    /// Choice in the saturated layer (`Act^max` witness where unconstrained).
    pub saturated: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WlfResult {
    pub value: Rat,
    /// Resets its mode on entering or leaving Goal and Fail.
    pub witness: WeightMemoryScheduler,
    pub mecs: Vec<MecWlf>,
}

impl WlfResult {
    /// Saturation data of the end component that contains the initial state, if any.
    pub fn saturation(&self) -> Option<&SaturationData> {
        self.mecs.first().map(|e| &e.saturation)
    }
}

fn sub_mdp(m: &Mdp, e: &Mec) -> Result<(Mdp, Vec<usize>, Vec<Vec<usize>>)> {
    let states: Vec<usize> = e.states.iter().copied().collect();
    let mut b = MdpBuilder::new();
    let mut pos = std::collections::HashMap::new();
    for (i, &s) in states.iter().enumerate() {
        b.state(m.id(s).to_string());
        for l in m.labels(s) {
            b.add_label(i, l);
        }
        pos.insert(s, i);
    }
    let mut act_map = Vec::new();
    for (i, &s) in states.iter().enumerate() {
        let retained = &e.actions[&s];
        for &a in retained {
            let act = m.action(s, a);
            b.action(i, act.name.clone(), act.weight.clone(), act.transitions.iter().map(|t| (pos[&t.to], t.prob.clone())).collect());
        }
        act_map.push(retained.clone());
        if m.is_goal(s) {
            b.add_goal(i);
        }
        if m.is_fail(s) {
            b.add_fail(i);
        }
    }
    b.set_initial(0);
    Ok((b.build()?, states, act_map))
}

fn solve_mec(m: &Mdp, e: &Mec) -> Result<MecWlf> {
    let (sub, states, act_map) = sub_mdp(m, e)?;
    let sat = wlf_saturation_point(&sub, sub.goal(), sub.fail())?;
    let mut roots: Vec<usize> = (0..sub.n_states()).filter(|&s| sub.is_goal(s) || sub.is_fail(s)).collect();
    if let Some(i) = states.iter().position(|&s| s == m.initial()) {
        if !roots.contains(&i) {
            roots.insert(0, i);
        }
    }
    let prod = fmk_product(&sub, &sat.k, &sat.reach.pmax, &sat.reach.act_max, &roots)?;
    let (gains, pol) = mean_payoff_max(&prod.sys, None)?;
    let root = (0..roots.len()).max_by(|&a, &b| gains[a].cmp(&gains[b]).then(b.cmp(&a))).unwrap();
    let gain = gains[root].clone();

    // bottom classes of the optimal policy reachable from the best root
    let n = prod.sys.n();
    let succ = |i: usize| -> Vec<usize> { prod.sys.acts[i][pol[i]].succ.iter().map(|(t, _)| *t).collect() };
    let mut seen = vec![false; n];
    let mut stack = vec![root];
    seen[root] = true;
    while let Some(i) = stack.pop() {
        for j in succ(i) {
            if !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    let comps = scc(n, |i| if seen[i] { succ(i) } else { Vec::new() });
    let mut comp_of = vec![usize::MAX; n];
    for (c, xs) in comps.iter().enumerate() {
        for &x in xs {
            comp_of[x] = c;
        }
    }
    let gf = |i: usize| sub.is_goal(prod.keys[i].0) || sub.is_fail(prod.keys[i].0);
    let stalls = comps.iter().enumerate().any(|(c, xs)| {
        seen[xs[0]] && xs.iter().all(|&x| succ(x).iter().all(|&y| comp_of[y] == c)) && !xs.iter().any(|&x| gf(x))
    });
    let attained = !(stalls && gain.is_positive());

    // gain 0 is attained by every policy; pick one that keeps visiting Goal and Fail so
    // that the witness has a well-defined value
    let attractor = if stalls && gain.is_zero() {
        let hits: BTreeSet<usize> = sub.goal().union(sub.fail()).copied().collect();
        Some(max_reach_prob(&sub, &hits, &BTreeSet::new())?.witness.choice)
    } else {
        None
    };
    let choices = prod
        .keys
        .iter()
        .enumerate()
        .map(|(i, &(s, w))| {
            let a = attractor.as_ref().map_or(prod.sys.acts[i][pol[i]].label, |c| c[s]);
            ((states[s], w), act_map[s][a])
        })
        .collect();
    let saturated = (0..sub.n_states())
        .map(|s| {
            let a = match (&attractor, prod.index.get(&(s, prod.k))) {
                (Some(c), _) => c[s],
                (None, Some(&i)) => prod.sys.acts[i][pol[i]].label,
                (None, None) => sat.reach.witness.choice[s],
            };
            (states[s], act_map[s][a])
        })
        .collect();
    Ok(MecWlf { states: e.states.clone(), saturation: sat, gain, attained, choices, saturated })
}

/// Unit-weight optimum per maximal end component; components avoiding Goal and Fail get 0.
pub(crate) fn mec_gains(m: &Mdp) -> Result<Vec<(BTreeSet<usize>, Rat)>> {
    mec_decompose(m)
        .mecs
        .iter()
        .map(|e| {
            if !e.contains_goal && !e.contains_fail {
                Ok((e.states.clone(), Rat::zero()))
            } else {
                solve_mec(m, e).map(|r| (e.states.clone(), r.gain))
            }
        })
        .collect()
}

/// Maximal weighted long-run frequency of `!Fail U Goal` with non-negative weights.
pub fn wlf_max(m: &Mdp, spec: &LongRunSpec) -> Result<WlfResult> {
    let m = spec.apply(m)?;
    m.check_nonnegative()?;
    let dec = mec_decompose(&m);
    for e in &dec.mecs {
        if !e.contains_goal && !e.contains_fail {
            return Err(Error::SpecMecViolation(m.id(*e.states.iter().next().unwrap()).into()));
        }
    }
    let mut mecs: Vec<MecWlf> = dec.mecs.iter().map(|e| solve_mec(&m, e)).collect::<Result<_>>()?;
    // the end component containing the initial state first
    mecs.sort_by_key(|e| !e.states.contains(&m.initial()));

    let n = m.n_states();
    // choose an end component to settle in: settle actions lead to terminals valued by gain
    let mut sys = Sys::from_mdp(&m).with_rewards(|_, _| Rat::zero());
    let mut term: Vec<Option<Rat>> = vec![None; n];
    for (i, e) in mecs.iter().enumerate() {
        for &s in &e.states {
            sys.acts[s].insert(0, SysAction { label: usize::MAX, succ: vec![(n + i, Rat::one())], reward: Rat::zero() });
        }
        sys.acts.push(Vec::new());
        term.push(Some(e.gain.clone()));
    }
    let (v, mut pol) = policy_iteration(&sys, &term, Direction::Max, None)?;
    let value = v[m.initial()].clone();
    for e in &mecs {
        if e.states.iter().any(|&s| v[s] == e.gain) {
            for &s in &e.states {
                pol[s] = 0;
            }
        }
    }
    let settles = |e: &MecWlf| e.states.iter().all(|&s| pol[s] == 0);
    let reached = reachable_under(&sys, &pol, m.initial());
    if let Some(e) = mecs.iter().find(|e| !e.attained && settles(e) && e.states.iter().any(|&s| reached[s])) {
        if e.gain == value {
            return Err(Error::UnattainedSupremum { supremum: value, state: m.id(*e.states.iter().next().unwrap()).into() });
        }
    }

    let cap = mecs.iter().map(|e| e.saturation.k.clone()).max().unwrap_or_default();
    let mut witness = WeightMemoryScheduler::new(cap, true);
    let mut default: Vec<usize> = (0..n).map(|s| sys.acts[s][pol[s]].label).collect();
    for e in mecs.iter().filter(|e| settles(e)) {
        for &((s, w), a) in &e.choices {
            if m.actions(s).len() > 1 {
                witness.set(s, w, a);
            }
        }
        for &(s, a) in &e.saturated {
            default[s] = a;
        }
    }
    witness.default = Some(default);
    Ok(WlfResult { value, witness, mecs })
}

fn reachable_under(sys: &Sys, pol: &[usize], from: usize) -> Vec<bool> {
    let mut seen = vec![false; sys.n()];
    let mut stack = vec![from];
    seen[from] = true;
    while let Some(i) = stack.pop() {
        if sys.acts[i].is_empty() {
            continue;
        }
        for (j, _) in &sys.acts[i][pol[i]].succ {
            if !seen[*j] {
                seen[*j] = true;
                stack.push(*j);
            }
        }
    }
    seen
}

/// Long-run average of counted weight inside the closed class `b` of the chain.
fn class_value(m: &Mdp, c: &InducedChain, b: &[usize], sat: &ChainMoments) -> Result<Rat> {
    let x = stationary(b, |i| c.edges[i].iter().map(|e| (e.to, e.prob.clone())).collect())?;
    let mut total = Rat::zero();
    for (k, &i) in b.iter().enumerate() {
        let s = c.mdp_state(i);
        if m.is_fail(s) {
            continue;
        }
        let contrib: Rat = c.edges[i]
            .iter()
            .map(|e| {
                let w = &e.prob * Rat::from(&e.weight);
                if m.is_goal(s) {
                    w
                } else {
                    w * &sat.reach[e.to]
                }
            })
            .sum();
        total += &x[k] * contrib;
    }
    Ok(total)
}

fn chain_and_moments<S: Scheduler + ?Sized>(m: &Mdp, sched: &S) -> Result<(InducedChain, ChainMoments, Vec<Vec<usize>>)> {
    let c = induce_chain(m, sched)?;
    let mo = ChainMoments::compute(&c, |i| m.is_goal(c.mdp_state(i)), |i| m.is_fail(c.mdp_state(i)))?;
    let b = c.bsccs();
    Ok((c, mo, b))
}

/// Weighted long-run frequency of a finite-memory scheduler whose chain has one bottom class.
pub fn evaluate_fm_wlf<S: Scheduler + ?Sized>(m: &Mdp, spec: &LongRunSpec, sched: &S) -> Result<Rat> {
    let m = spec.apply(m)?;
    let (c, mo, bs) = chain_and_moments(&m, sched)?;
    if bs.len() != 1 {
        return Err(Error::MultipleBsccs(bs.len()));
    }
    if !bs[0].iter().any(|&i| m.is_goal(c.mdp_state(i)) || m.is_fail(c.mdp_state(i))) {
        return Err(Error::BsccAvoidsGoalFail);
    }
    class_value(&m, &c, &bs[0], &mo)
}

/// Like [`evaluate_fm_wlf`] for any number of bottom classes, weighted by the
/// probability of ending up in each.
pub fn evaluate_fm_wlf_multi<S: Scheduler + ?Sized>(m: &Mdp, spec: &LongRunSpec, sched: &S) -> Result<Rat> {
    let m = spec.apply(m)?;
    let (c, mo, bs) = chain_and_moments(&m, sched)?;
    if bs.len() == 1 {
        return class_value(&m, &c, &bs[0], &mo);
    }
    let mut total = Rat::zero();
    for b in &bs {
        let v = class_value(&m, &c, b, &mo)?;
        if v.is_zero() {
            continue;
        }
        let inb: BTreeSet<usize> = b.iter().copied().collect();
        let absorb = ChainMoments::compute(&c, |i| inb.contains(&i), |_| false)?;
        total += &absorb.reach[c.initial] * v;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::samples::alpha_beta_loop;
    use crate::mdp::MemorylessPolicy;

    fn two_mode(m: &Mdp) -> WeightMemoryScheduler {
        // alpha at mode 0, beta once the alpha self loop was taken (mode 3)
        let mut s = WeightMemoryScheduler::new(3, true);
        s.set(m.initial(), 0, 0);
        s.set(m.initial(), 3, 1);
        s.default = Some(vec![0; 4]);
        s
    }

    #[test]
    fn loop_example_schedulers() {
        let m = alpha_beta_loop();
        let spec = LongRunSpec::from_mdp(&m);
        let a = MemorylessPolicy::new(vec![0; 4]);
        let b = MemorylessPolicy::new(vec![1, 0, 0, 0]);
        assert_eq!(evaluate_fm_wlf(&m, &spec, &a).unwrap(), Rat::one());
        assert_eq!(evaluate_fm_wlf(&m, &spec, &b).unwrap(), Rat::one());
        assert_eq!(evaluate_fm_wlf(&m, &spec, &two_mode(&m)).unwrap(), Rat::new(13, 10));
    }

    #[test]
    fn loop_example_optimum() {
        let m = alpha_beta_loop();
        let spec = LongRunSpec::from_mdp(&m);
        let r = wlf_max(&m, &spec).unwrap();
        assert!(r.value >= Rat::new(13, 10));
        assert_eq!(evaluate_fm_wlf(&m, &spec, &r.witness).unwrap(), r.value);
        assert_eq!(r.saturation().unwrap().k, num_bigint::BigInt::from(120));
    }

    #[test]
    fn all_goal_unit_weights() {
        let m = crate::mdp::samples::alternating_ab();
        let all: BTreeSet<usize> = (0..m.n_states()).collect();
        let spec = LongRunSpec { goal: all, fail: BTreeSet::new() };
        assert_eq!(wlf_max(&m, &spec).unwrap().value, Rat::one());
    }

    #[test]
    fn zero_value_witness_still_visits_fail() {
        // no goal; s2 can loop on itself forever, which must not be the witness
        let mut b = MdpBuilder::new();
        let s0 = b.state("s0");
        let s1 = b.state("s1");
        let s2 = b.state("s2");
        let q = |n, d| Rat::new(n, d);
        b.action(s0, "a0", 1, vec![(s1, q(1, 2)), (s0, q(1, 4)), (s2, q(1, 4))]);
        b.action(s1, "a0", 0, vec![(s0, Rat::one())]);
        b.action(s1, "a1", 2, vec![(s2, q(1, 2)), (s0, q(1, 2))]);
        b.action(s2, "a0", 3, vec![(s2, Rat::one())]);
        b.action(s2, "a1", 3, vec![(s1, q(1, 2)), (s2, q(1, 4)), (s0, q(1, 4))]);
        b.add_fail(s1);
        b.set_initial(s0);
        let m = b.build().unwrap();
        let spec = LongRunSpec::from_mdp(&m);
        let r = wlf_max(&m, &spec).unwrap();
        assert!(r.value.is_zero());
        assert_eq!(evaluate_fm_wlf(&m, &spec, &r.witness).unwrap(), Rat::zero());
    }
}
