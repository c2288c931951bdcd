use super::eval::{capped_law, expected_total, long_run_weighted, lower_tail_mean, reach_and_pe, Law};
use super::space::{for_each_behaviour, for_each_observed_behaviour, OracleScheduler, SchedulerSpace};
use crate::error::{Error, Result};
use crate::graph::Direction;
use crate::mdp::Mdp;
use crate::rat::Rat;
use num_bigint::BigInt;
use num_traits::ToPrimitive;

/// Default cap on the number of behaviours a brute-force search may visit.
pub const DEFAULT_BUDGET: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BruteResult {
    pub value: Rat,
    pub witness: OracleScheduler,
    /// Behaviours evaluated.
    pub count: usize,
    pub space: SchedulerSpace,
}

fn better(dir: Direction, a: &Rat, b: &Rat) -> bool {
    match dir {
        Direction::Max => a > b,
        Direction::Min => a < b,
    }
}

fn optimize(
    m: &Mdp,
    space: SchedulerSpace,
    dir: Direction,
    budget: usize,
    mut value: impl FnMut(&OracleScheduler) -> Result<Option<Rat>>,
) -> Result<Option<BruteResult>> {
    let mut best: Option<(Rat, OracleScheduler)> = None;
    let count = for_each_behaviour(m, space, budget, |s| {
        if let Some(v) = value(&s)? {
            if best.as_ref().is_none_or(|(b, _)| better(dir, &v, b)) {
                best = Some((v, s));
            }
        }
        Ok(())
    })?;
    Ok(best.map(|(value, witness)| BruteResult { value, witness, count, space }))
}

/// Optimal partial expectation over the space.
pub fn brute_pe(m: &Mdp, space: SchedulerSpace, dir: Direction, budget: usize) -> Result<BruteResult> {
    optimize(m, space, dir, budget, |s| Ok(Some(reach_and_pe(m, s)?.1)))?.ok_or(Error::Internal("empty space".into()))
}

/// Optimal conditional expectation over members that reach the goal with positive probability.
pub fn brute_ce(m: &Mdp, space: SchedulerSpace, dir: Direction, budget: usize) -> Result<BruteResult> {
    optimize(m, space, dir, budget, |s| {
        let (r, pe) = reach_and_pe(m, s)?;
        Ok((!r.is_zero()).then(|| pe / r))
    })?
    .ok_or(Error::GoalUnreachable)
}

/// Optimal expected total weight until the goal over memoryless schedulers; every member
/// must reach the goal almost surely.
pub fn brute_sspp(m: &Mdp, dir: Direction, budget: usize) -> Result<BruteResult> {
    optimize(m, SchedulerSpace::Memoryless, dir, budget, |s| expected_total(m, s).map(Some))?
        .ok_or(Error::Internal("empty space".into()))
}

/// Optimal weighted long-run frequency over `FM(cap)`: weight memory clamped at `cap`,
/// reset on Goal and Fail.
pub fn brute_wlf(m: &Mdp, cap: u64, budget: usize) -> Result<BruteResult> {
    let space = SchedulerSpace::WeightMemory { cap, reset: true };
    optimize(m, space, Direction::Max, budget, |s| Ok(Some(long_run_weighted(m, s)?.0)))?
        .ok_or(Error::Internal("empty space".into()))
}

/// Least outcome whose cumulative probability exceeds `p`.
pub fn lower_quantile(law: &Law, p: &Rat) -> Option<BigInt> {
    let mut acc = Rat::zero();
    for (x, q) in law {
        acc += q;
        if &acc > p {
            return Some(x.clone());
        }
    }
    law.keys().next_back().cloned()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BruteCvar {
    pub value: Rat,
    pub var: BigInt,
    /// Memory cap of the enumerated space; outcomes are clamped there.
    pub cap: u64,
    pub witness: OracleScheduler,
    pub law: Law,
    pub count: usize,
}

/// Maximal CVaR (mean of the lowest `p` mass) of the weight accumulated until the goal.
///
/// Enumerates weight-memory schedulers with cap `C = 1, 2, 3, ...` until no member puts
/// more than `1 - p` mass on outcomes `>= C`; from then on clamping at `C` changes no
/// member's lower tail and the cap bounds the optimal threshold, so the optimum over
/// `FM(C)` is the optimum over all schedulers. A fixed `cap` skips the search.
///
/// Choices at goal states and at mode `C` cannot change the clamped law and are not
/// branched on.
pub fn brute_cvar(m: &Mdp, p: &Rat, cap: Option<u64>, budget: usize) -> Result<BruteCvar> {
    if !p.is_positive() || p >= &Rat::one() {
        return Err(Error::InvalidArgument(format!("probability level {p} outside (0, 1)")));
    }
    m.check_nonnegative()?;
    let one_minus_p = Rat::one() - p;
    let mut c = cap.unwrap_or(1);
    loop {
        let cb = BigInt::from(c);
        let mut best: Option<(Rat, OracleScheduler, Law)> = None;
        let mut worst_tail = Rat::zero();
        let space = SchedulerSpace::WeightMemory { cap: c, reset: false };
        let observed = |s: usize, w: u64| w < c && !m.is_goal(s);
        let count = for_each_observed_behaviour(m, space, budget, observed, |s| {
            let law = capped_law(m, &s, &cb)?;
            let top = law.get(&cb).cloned().unwrap_or_else(Rat::zero);
            if top > worst_tail {
                worst_tail = top;
            }
            let v = lower_tail_mean(&law, p)?;
            if best.as_ref().is_none_or(|(b, _, _)| &v > b) {
                best = Some((v, s, law));
            }
            Ok(())
        })?;
        if cap.is_some() || worst_tail <= one_minus_p {
            let (value, witness, law) = best.ok_or(Error::Internal("empty space".into()))?;
            let var = lower_quantile(&law, p).unwrap_or_default();
            return Ok(BruteCvar { value, var, cap: c, witness, law, count });
        }
        c = c.checked_add(1).filter(|x| x.to_usize().is_some()).ok_or(Error::SpaceTooLarge(budget))?;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::samples::alpha_beta_loop;
    use crate::mdp::MdpBuilder;

    fn two_laws() -> Mdp {
        let mut b = MdpBuilder::new();
        let s = b.state("s");
        let g = b.state("goal");
        let x = b.state("x");
        b.action(s, "A", 0, vec![(g, Rat::new(1, 2)), (x, Rat::new(1, 2))]);
        b.action(s, "B", 4, vec![(g, Rat::one())]);
        b.action(x, "ten", 10, vec![(g, Rat::one())]);
        b.absorbing(g);
        b.set_initial(s);
        b.add_goal(g);
        b.build().unwrap()
    }

    #[test]
    fn cvar_two_laws() {
        let m = two_laws();
        let r = brute_cvar(&m, &Rat::new(1, 2), None, 1000).unwrap();
        assert_eq!(r.value, Rat::int(4));
        assert_eq!(r.var, BigInt::from(4));
    }

    #[test]
    fn loop_example_wlf() {
        let m = alpha_beta_loop();
        let r = brute_wlf(&m, 120, 1000).unwrap();
        assert_eq!(r.value, Rat::new(13, 10));
        // alpha at mode 0, then beta: any cap reaching mode 3 suffices
        assert_eq!(brute_wlf(&m, 3, 100).unwrap().value, Rat::new(13, 10));
        assert_eq!(brute_wlf(&m, 0, 100).unwrap().value, Rat::one());
    }

    #[test]
    fn pe_and_ce_on_tree() {
        let m = two_laws();
        let space = SchedulerSpace::AcyclicHistory;
        assert_eq!(brute_pe(&m, space, Direction::Max, 100).unwrap().value, Rat::int(5));
        assert_eq!(brute_pe(&m, space, Direction::Min, 100).unwrap().value, Rat::int(4));
        assert_eq!(brute_ce(&m, space, Direction::Max, 100).unwrap().value, Rat::int(5));
        assert_eq!(brute_sspp(&m, Direction::Min, 100).unwrap().value, Rat::int(4));
    }
}
