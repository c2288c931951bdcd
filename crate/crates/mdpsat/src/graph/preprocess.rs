use super::{mask, mec_decompose, Sys};
use crate::error::{Error, Result};
use crate::mdp::{Mdp, MdpBuilder};
use std::collections::BTreeSet;

/// Removes end components other than the goal: goal states become absorbing and
/// zero-weight end components are collapsed into one representative state.
pub fn sspp_preprocess(m: &Mdp) -> Result<Mdp> {
    m.check_nonnegative()?;
    let n = m.n_states();
    if m.goal().is_empty() {
        return Err(Error::GoalNotReachable(m.id(m.initial()).into()));
    }
    let reach = Sys::from_mdp(m).can_reach(&mask(n, m.goal().iter().copied()), &vec![false; n]);
    if let Some(s) = (0..n).find(|&s| !reach[s]) {
        return Err(Error::GoalNotReachable(m.id(s).into()));
    }

    let mut b = MdpBuilder::from_mdp(m);
    for &g in m.goal() {
        if !(m.actions(g).len() == 1 && m.is_trap(g) && num_traits::Zero::is_zero(&m.actions(g)[0].weight)) {
            b.absorbing(g);
        }
    }
    let m1 = b.build()?;
    let dec = mec_decompose(&m1);
    let mut rep: Vec<usize> = (0..n).collect();
    let mut collapsed: Vec<&crate::graph::Mec> = Vec::new();
    for e in &dec.mecs {
        if e.states.iter().all(|&s| m1.is_goal(s)) {
            continue;
        }
        if e.positive_weight {
            let s = e.states.iter().next().unwrap();
            return Err(Error::UnboundedExpectation(m1.id(*s).into()));
        }
        let r = *e.states.iter().next().unwrap();
        for &s in &e.states {
            rep[s] = r;
        }
        collapsed.push(e);
    }
    if collapsed.is_empty() {
        return Ok(m1);
    }

    let mut nb = MdpBuilder::new();
    let mut new_idx = vec![usize::MAX; n];
    for s in 0..n {
        if rep[s] == s {
            new_idx[s] = nb.state(m1.id(s).to_string());
            for l in m1.labels(s) {
                nb.add_label(new_idx[s], l);
            }
        }
    }
    for s in 0..n {
        new_idx[s] = new_idx[rep[s]];
    }
    let retained = |s: usize, a: usize| {
        collapsed.iter().any(|e| e.actions.get(&s).is_some_and(|acts| acts.contains(&a)))
    };
    for s in 0..n {
        let r = rep[s];
        for (ai, a) in m1.actions(s).iter().enumerate() {
            if retained(s, ai) {
                continue;
            }
            let name = if r == s { a.name.clone() } else { format!("{}.{}", m1.id(s), a.name) };
            let tr = a.transitions.iter().map(|t| (new_idx[t.to], t.prob.clone())).collect();
            nb.action(new_idx[s], name, a.weight.clone(), tr);
        }
    }
    for &g in m1.goal() {
        if rep[g] == g {
            nb.absorbing(new_idx[g]);
        }
    }
    nb.set_initial(new_idx[m1.initial()]);
    nb.set_goal(m1.goal().iter().map(|&s| new_idx[s]).collect::<BTreeSet<_>>());
    nb.set_fail(m1.fail().iter().map(|&s| new_idx[s]).collect::<BTreeSet<_>>());
    let out = nb.build_reachable()?;
    debug_assert!(mec_decompose(&out).mecs.iter().all(|e| e.states.iter().all(|&s| out.is_goal(s))));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::Rat;

    fn zero_cycle_model() -> Mdp {
        let mut b = MdpBuilder::new();
        let s = b.state("s");
        let t = b.state("t");
        let g = b.state("g");
        b.action(s, "stay", 0, vec![(t, Rat::one())]);
        b.action(s, "exit", 2, vec![(g, Rat::one())]);
        b.action(t, "back", 0, vec![(s, Rat::one())]);
        b.action(t, "exit", 5, vec![(g, Rat::new(1, 2)), (s, Rat::new(1, 2))]);
        b.absorbing(g);
        b.set_initial(s);
        b.add_goal(g);
        b.build().unwrap()
    }

    #[test]
    fn zero_cycle_collapsed() {
        let out = sspp_preprocess(&zero_cycle_model()).unwrap();
        assert_eq!(out.n_states(), 2);
        let names: Vec<_> = out.actions(out.initial()).iter().map(|a| a.name.clone()).collect();
        assert_eq!(names, vec!["exit", "t.exit"]);
        // the half-probability self loop survives as a loop on the representative
        let mecs = mec_decompose(&out);
        assert_eq!(mecs.mecs.len(), 1);
    }

    #[test]
    fn positive_loop_unbounded() {
        let mut b = MdpBuilder::new();
        let s = b.state("s");
        let g = b.state("g");
        b.action(s, "loop", 1, vec![(s, Rat::one())]);
        b.action(s, "exit", 0, vec![(g, Rat::one())]);
        b.absorbing(g);
        b.set_initial(s);
        b.add_goal(g);
        assert!(matches!(sspp_preprocess(&b.build().unwrap()), Err(Error::UnboundedExpectation(_))));
    }

    #[test]
    fn ec_free_unchanged() {
        let mut b = MdpBuilder::new();
        let s = b.state("s");
        let g = b.state("g");
        b.action(s, "a", 3, vec![(g, Rat::new(1, 2)), (s, Rat::new(1, 2))]);
        b.absorbing(g);
        b.set_initial(s);
        b.add_goal(g);
        let m = b.build().unwrap();
        assert_eq!(sspp_preprocess(&m).unwrap(), m);
    }
}
