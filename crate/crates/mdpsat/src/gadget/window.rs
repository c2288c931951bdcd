use super::build::{Gadget, GadgetKind};
use super::levels::gadget_levels;
use crate::error::{Error, Result};
use crate::graph::Direction;
use crate::mdp::{Mdp, MdpBuilder};
use crate::rat::Rat;
use crate::sspp::acyclic_partial_expectation;
use num_traits::ToPrimitive;
use std::collections::{HashMap, VecDeque};

/// Finite unfolding of a partial-expectation gadget started in `c` with weight `level`.
///
/// Every scheduler choice at `t` and `s` stays available. Reaching `t` or `s` below the
/// lowest base level ends in a fail trap; the true value there is at most 0, so the
/// window optimum over-approximates the gadget optimum from `(c, level)`.
pub fn window_mdp(g: &Gadget, level: i64, c_actions: &[&str]) -> Result<Mdp> {
    if g.kind != GadgetKind::Pe {
        return Err(Error::InvalidArgument("window unfolding needs a partial-expectation gadget".into()));
    }
    let m = &g.mdp;
    let floor = g.kind.base_low(g.lrs.k);
    let t = g.state("t")?;
    let s = g.state("s")?;
    let c = g.state("c")?;
    let mut b = MdpBuilder::new();
    let entry = b.state("entry");
    b.set_initial(entry);
    let goal = b.state("goal");
    let fail = b.state("fail");
    b.absorbing(goal);
    b.absorbing(fail);
    b.add_goal(goal);
    let mut index: HashMap<(usize, i64), usize> = HashMap::new();
    let mut queue = VecDeque::new();
    let intern = |b: &mut MdpBuilder,
                  index: &mut HashMap<(usize, i64), usize>,
                  q: &mut VecDeque<(usize, i64)>,
                  u: usize,
                  w: i64|
     -> usize {
        if m.is_goal(u) {
            return goal;
        }
        if m.is_fail(u) || ((u == t || u == s) && w < floor) {
            return fail;
        }
        *index.entry((u, w)).or_insert_with(|| {
            q.push_back((u, w));
            b.state(format!("{}@{}", m.id(u), w))
        })
    };
    let start = intern(&mut b, &mut index, &mut queue, c, level);
    b.action(entry, "charge", level, vec![(start, Rat::one())]);
    while let Some((u, w)) = queue.pop_front() {
        let from = index[&(u, w)];
        for a in m.actions(u) {
            if u == c && !c_actions.contains(&a.name.as_str()) {
                continue;
            }
            let w1 = w + a.weight.to_i64().ok_or_else(|| Error::Internal("weight overflows i64".into()))?;
            let tr = a.transitions.iter().map(|x| (intern(&mut b, &mut index, &mut queue, x.to, w1), x.prob.clone())).collect();
            b.action(from, a.name.clone(), a.weight.clone(), tr);
        }
    }
    b.build_reachable()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowReport {
    pub level: i64,
    /// `e(t, level)`: the canonical scheduler, which takes τ in c.
    pub canonical: Rat,
    /// `e(s, level)`: deviate to σ in c, canonical afterwards.
    pub deviation: Rat,
    pub window_opt: Rat,
    pub window_tau: Rat,
    pub window_sigma: Rat,
}

impl WindowReport {
    /// The windowed optimum strictly exceeds the canonical value.
    pub fn beaten(&self) -> bool {
        self.window_opt > self.canonical
    }
    pub fn undominated(&self) -> bool {
        self.window_opt == self.canonical
    }
}

pub fn window_check(g: &Gadget, level: i64) -> Result<WindowReport> {
    if level < 1 {
        return Err(Error::InvalidArgument(format!("the choice state is entered with weight >= 1, got {level}")));
    }
    let lv = gadget_levels(g, level)?;
    let solve = |acts: &[&str]| -> Result<Rat> {
        Ok(acyclic_partial_expectation(&window_mdp(g, level, acts)?, Direction::Max)?.value)
    };
    Ok(WindowReport {
        level,
        canonical: lv.t_at(level).clone(),
        deviation: lv.s_at(level).clone(),
        window_opt: solve(&["tau", "sigma"])?,
        window_tau: solve(&["tau"])?,
        window_sigma: solve(&["sigma"])?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadget::build::build_pe_gadget;
    use crate::gadget::lrs::{rescale_lrs, Lrs, Regime};

    #[test]
    fn sign_change_detected_at_level_three() {
        let l = rescale_lrs(&Lrs::from_ints(&[1, -1], &[0, 1]).unwrap(), Regime::Pe).unwrap().lrs;
        let g = build_pe_gadget(&l).unwrap();
        for level in 1..=2 {
            let r = window_check(&g, level).unwrap();
            assert!(r.undominated(), "level {level}: {r:?}");
        }
        let r = window_check(&g, 3).unwrap();
        assert!(r.beaten());
        assert_eq!(r.window_sigma, r.deviation);
        assert_eq!(r.window_tau, r.canonical);
    }
}
