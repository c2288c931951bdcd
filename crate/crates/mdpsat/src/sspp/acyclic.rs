use crate::error::{Error, Result};
use crate::graph::{mask, require_acyclic, Direction, Sys};
use crate::mdp::{Mdp, WeightPolicy};
use crate::rat::Rat;
use num_bigint::BigInt;
use num_traits::Zero;
use std::collections::{BTreeSet, HashMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PartialKind {
    Pe,
    Ce,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialResult {
    pub value: Rat,
    pub kind: PartialKind,
    pub direction: Direction,
    /// Decisions over (state, accumulated weight) at states with a choice.
    pub witness: WeightPolicy,
    /// Goal probability and partial expectation of the witness.
    pub reach_prob: Rat,
    pub partial: Rat,
}

/// Optimal partial expectation on an acyclic model by backward induction over
/// (state, accumulated weight).
pub fn acyclic_partial_expectation(m: &Mdp, dir: Direction) -> Result<PartialResult> {
    let dp = WeightDp::new(m)?;
    let sol = dp.solve(dir, Objective::Shifted(Rat::zero()));
    let v = sol.partial.clone();
    Ok(sol.into_result(PartialKind::Pe, dir, v))
}

/// Optimal conditional expectation on an acyclic model.
///
/// The ratio PE/Pr is optimized parametrically: for a candidate value `l`, the best
/// scheduler for `PE - l * Pr` either certifies `l` or yields a strictly better ratio.
pub fn acyclic_conditional_expectation(m: &Mdp, dir: Direction) -> Result<PartialResult> {
    let dp = WeightDp::new(m)?;
    let n = m.n_states();
    let sys = Sys::from_mdp(m);
    let goal = mask(n, m.goal().iter().copied());
    let feasible = match dir {
        Direction::Max => sys.can_reach(&goal, &vec![false; n])[m.initial()],
        Direction::Min => !m.goal().is_empty() && !sys.can_avoid_forever(&goal)[m.initial()],
    };
    if !feasible {
        return Err(Error::GoalUnreachable);
    }
    let mut sol = dp.solve(dir, Objective::Reach);
    let mut l = &sol.partial / &sol.reach_prob;
    loop {
        let next = dp.solve(dir, Objective::Shifted(l.clone()));
        let score = &next.partial - &l * &next.reach_prob;
        if !dir.better(&score, &Rat::zero()) {
            // the previous scheduler already attains `l`; `next` does as well with Pr > 0
            if next.reach_prob.is_positive() && score.is_zero() {
                sol = next;
            }
            return Ok(sol.into_result(PartialKind::Ce, dir, l));
        }
        l = &next.partial / &next.reach_prob;
        sol = next;
    }
}

#[derive(Debug, Clone)]
enum Objective {
    /// Maximize the goal probability, then the partial expectation.
    Reach,
    /// Optimize `PE - shift * Pr`, ties broken towards larger goal probability.
    Shifted(Rat),
}

struct Solution {
    partial: Rat,
    reach_prob: Rat,
    witness: WeightPolicy,
}

impl Solution {
    fn into_result(self, kind: PartialKind, direction: Direction, value: Rat) -> PartialResult {
        PartialResult { value, kind, direction, witness: self.witness, reach_prob: self.reach_prob, partial: self.partial }
    }
}

struct WeightDp<'a> {
    m: &'a Mdp,
    order: Vec<usize>,
    /// Accumulated weights with which each state is reachable.
    levels: Vec<BTreeSet<BigInt>>,
}

impl<'a> WeightDp<'a> {
    fn new(m: &'a Mdp) -> Result<Self> {
        let order = require_acyclic(m)?;
        let mut levels = vec![BTreeSet::new(); m.n_states()];
        levels[m.initial()].insert(BigInt::zero());
        for &s in &order {
            if m.is_goal(s) {
                continue;
            }
            let ws: Vec<BigInt> = levels[s].iter().cloned().collect();
            for a in m.actions(s) {
                for t in &a.transitions {
                    for w in &ws {
                        levels[t.to].insert(w + &a.weight);
                    }
                }
            }
        }
        Ok(WeightDp { m, order, levels })
    }

    fn terminal(&self, s: usize) -> bool {
        self.m.is_goal(s) || self.m.is_trap(s)
    }

    fn solve(&self, dir: Direction, obj: Objective) -> Solution {
        let m = self.m;
        // (partial expectation, goal probability)
        let mut table: HashMap<(usize, BigInt), (Rat, Rat)> = HashMap::new();
        let mut witness = WeightPolicy::default();
        let lookup = |table: &HashMap<(usize, BigInt), (Rat, Rat)>, t: usize, w: BigInt| -> (Rat, Rat) {
            if m.is_goal(t) {
                (Rat::from(w), Rat::one())
            } else if m.is_trap(t) {
                (Rat::zero(), Rat::zero())
            } else {
                table[&(t, w)].clone()
            }
        };
        let better = |a: &(Rat, Rat), b: &(Rat, Rat)| -> bool {
            match &obj {
                Objective::Reach => a.1 > b.1 || (a.1 == b.1 && dir.better(&a.0, &b.0)),
                Objective::Shifted(l) => {
                    let sa = &a.0 - l * &a.1;
                    let sb = &b.0 - l * &b.1;
                    dir.better(&sa, &sb) || (sa == sb && a.1 > b.1)
                }
            }
        };
        for &s in self.order.iter().rev() {
            if self.terminal(s) {
                continue;
            }
            for w in &self.levels[s] {
                let mut best: Option<(usize, (Rat, Rat))> = None;
                for (ai, a) in m.actions(s).iter().enumerate() {
                    let nw = w + &a.weight;
                    let mut v = (Rat::zero(), Rat::zero());
                    for t in &a.transitions {
                        let (e, p) = lookup(&table, t.to, nw.clone());
                        v.0 += &t.prob * e;
                        v.1 += &t.prob * p;
                    }
                    if best.as_ref().is_none_or(|(_, b)| better(&v, b)) {
                        best = Some((ai, v));
                    }
                }
                let (ai, v) = best.expect("validated models have an action everywhere");
                if m.actions(s).len() > 1 {
                    witness.choice.insert((s, w.clone()), ai);
                }
                table.insert((s, w.clone()), v);
            }
        }
        let (partial, reach_prob) = lookup(&table, m.initial(), BigInt::zero());
        Solution { partial, reach_prob, witness }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::MdpBuilder;

    fn split(w_goal: i64) -> Mdp {
        let mut b = MdpBuilder::new();
        let s = b.state("s");
        let g = b.state("goal");
        let f = b.state("fail");
        b.action(s, "a", w_goal, vec![(g, Rat::new(1, 2)), (f, Rat::new(1, 2))]);
        b.absorbing(g);
        b.absorbing(f);
        b.set_initial(s);
        b.add_goal(g);
        b.add_fail(f);
        b.build().unwrap()
    }

    #[test]
    fn half_to_goal() {
        let m = split(4);
        assert_eq!(acyclic_partial_expectation(&m, Direction::Max).unwrap().value, Rat::int(2));
        assert_eq!(acyclic_conditional_expectation(&m, Direction::Max).unwrap().value, Rat::int(4));
    }

    #[test]
    fn conditioning_prefers_rare_heavy_branch() {
        // a: goal surely with weight 2; b: goal w.p. 1/2 with weight 5
        let mut b = MdpBuilder::new();
        let s = b.state("s");
        let g = b.state("goal");
        let f = b.state("fail");
        b.action(s, "a", 2, vec![(g, Rat::one())]);
        b.action(s, "b", 5, vec![(g, Rat::new(1, 2)), (f, Rat::new(1, 2))]);
        b.absorbing(g);
        b.absorbing(f);
        b.set_initial(s);
        b.add_goal(g);
        let m = b.build().unwrap();
        let ce = acyclic_conditional_expectation(&m, Direction::Max).unwrap();
        assert_eq!(ce.value, Rat::int(5));
        assert_eq!(ce.witness.choice[&(s, BigInt::zero())], 1);
        let pe = acyclic_partial_expectation(&m, Direction::Max).unwrap();
        assert_eq!(pe.value, Rat::new(5, 2));
        assert_eq!(acyclic_conditional_expectation(&m, Direction::Min).unwrap().value, Rat::int(2));
    }

    #[test]
    fn negative_weights_and_weight_dependent_choice() {
        // s --(-3)--> u; at u: "stop" to goal with 0, "gamble" 1/2 goal +4 / 1/2 fail
        let mut b = MdpBuilder::new();
        let s = b.state("s");
        let u = b.state("u");
        let g = b.state("goal");
        let f = b.state("fail");
        b.action(s, "go", -3, vec![(u, Rat::one())]);
        b.action(u, "stop", 0, vec![(g, Rat::one())]);
        b.action(u, "gamble", 4, vec![(g, Rat::new(1, 2)), (f, Rat::new(1, 2))]);
        b.absorbing(g);
        b.absorbing(f);
        b.set_initial(s);
        b.add_goal(g);
        let m = b.build().unwrap();
        // stop: -3; gamble: 1/2 * 1 = 1/2
        let pe = acyclic_partial_expectation(&m, Direction::Max).unwrap();
        assert_eq!(pe.value, Rat::new(1, 2));
        assert_eq!(pe.witness.choice[&(u, BigInt::from(-3))], 1);
        let ce = acyclic_conditional_expectation(&m, Direction::Min).unwrap();
        assert_eq!(ce.value, Rat::int(-3));
    }

    #[test]
    fn no_goal_gives_zero_pe() {
        let mut b = MdpBuilder::new();
        let s = b.state("s");
        let f = b.state("fail");
        b.action(s, "a", 3, vec![(f, Rat::one())]);
        b.absorbing(f);
        b.set_initial(s);
        let m = b.build().unwrap();
        assert_eq!(acyclic_partial_expectation(&m, Direction::Max).unwrap().value, Rat::zero());
        assert!(acyclic_conditional_expectation(&m, Direction::Max).is_err());
    }
}
