use super::build::{build_wlf_gadget, Gadget};
use super::lrs::Lrs;
use crate::error::Result;
use crate::mdp::{Decision, Mdp, MdpBuilder, Mode, Nfa, NfaBuilder, Scheduler};
use crate::rat::Rat;
use num_bigint::BigInt;
use num_traits::Signed;

/// Rewrites `m` so that every state carries one weight in {-1, 0, +1} on all its actions.
///
/// Weight `w` on an action becomes a chain of `|w|` unit steps. States keep their indices;
/// chain states are appended.
pub fn normalize_unit_weights(m: &Mdp) -> Result<Mdp> {
    let mut b = MdpBuilder::from_mdp(m);
    for s in 0..m.n_states() {
        let acts = m.actions(s);
        let shared = acts.iter().all(|a| a.weight == acts[0].weight);
        if shared && acts[0].weight.abs() <= BigInt::from(1) {
            continue;
        }
        b.clear_actions(s);
        for a in acts {
            let w = &a.weight;
            let sign = w.signum();
            // with a shared weight the state itself takes the first unit step
            let (own, chain) = if shared { (sign.clone(), w.abs() - 1) } else { (BigInt::from(0), w.abs()) };
            let steps = usize::try_from(&chain).expect("weight fits usize");
            let trans: Vec<(usize, Rat)> = a.transitions.iter().map(|t| (t.to, t.prob.clone())).collect();
            if steps == 0 {
                b.action(s, a.name.clone(), own, trans);
                continue;
            }
            let ids: Vec<usize> =
                (1..=steps).map(|i| b.state(b.fresh_id(&format!("{}~{}~{i}", m.id(s), a.name)))).collect();
            b.action(s, a.name.clone(), own, vec![(ids[0], Rat::one())]);
            for i in 0..steps {
                let next = if i + 1 < steps { vec![(ids[i + 1], Rat::one())] } else { trans.clone() };
                b.action(ids[i], "step", sign.clone(), next);
            }
        }
    }
    b.build()
}

/// Weighted long-run model K, its labelled copy L and the co-safety automaton A.
#[derive(Debug, Clone)]
pub struct LrpInstance {
    pub gadget: Gadget,
    pub k_model: Mdp,
    pub l_model: Mdp,
    pub nfa: Nfa,
    /// L-state to K-state.
    pub l_to_k: Vec<usize>,
}

/// Labels of L: `n`, `z`, `p` by state weight, `g` and `f` on Goal and Fail, `c` on the
/// second copy of each Goal or Fail state.
pub fn build_lrp_instance(l: &Lrs) -> Result<LrpInstance> {
    let g = build_wlf_gadget(l)?;
    let k = normalize_unit_weights(&g.mdp)?;
    let n = k.n_states();
    let gf = |s: usize| k.is_goal(s) || k.is_fail(s);
    let mut b = MdpBuilder::new();
    let mut l_to_k: Vec<usize> = Vec::new();
    let mut twin = vec![None; n];
    for s in 0..n {
        let x = b.state(k.id(s));
        l_to_k.push(x.min(s));
    }
    for s in (0..n).filter(|&s| gf(s)) {
        let id = b.fresh_id(&format!("{}_c", k.id(s)));
        let x = b.state(id);
        b.add_label(x, "c");
        twin[s] = Some(x);
        l_to_k.push(s);
    }
    let label = |b: &mut MdpBuilder, x: usize, s: usize| {
        let w = &k.action(s, 0).weight;
        b.add_label(x, if w.is_negative() { "n" } else if w.is_positive() { "p" } else { "z" });
        if k.is_goal(s) {
            b.add_label(x, "g");
            b.add_goal(x);
        }
        if k.is_fail(s) {
            b.add_label(x, "f");
            b.add_fail(x);
        }
    };
    for x in 0..l_to_k.len() {
        let s = l_to_k[x];
        label(&mut b, x, s);
        for a in k.actions(s) {
            let mut tr = Vec::new();
            for t in &a.transitions {
                match twin[t.to] {
                    Some(y) => {
                        let half = &t.prob / Rat::int(2);
                        tr.push((t.to, half.clone()));
                        tr.push((y, half));
                    }
                    None => tr.push((t.to, t.prob.clone())),
                }
            }
            b.action(x, a.name.clone(), a.weight.clone(), tr);
        }
    }
    b.set_initial(k.initial());
    Ok(LrpInstance { gadget: g, k_model: k, l_model: b.build()?, nfa: build_nfa_a()?, l_to_k })
}

/// Co-safety automaton whose acceptance probability at a position is
/// `1/2 + 1/2 * sign(weight) * [suffix satisfies !Fail U Goal]`.
pub fn build_nfa_a() -> Result<Nfa> {
    let mut b = NfaBuilder::new();
    for q in ["init", "a", "b", "c", "acc"] {
        b.state(q);
    }
    b.accepting("acc");
    let open = "!g & !f";
    b.edge("init", &format!("p & {open}"), "a")?;
    b.edge("init", &format!("z & {open}"), "b")?;
    b.edge("init", &format!("n & {open}"), "c")?;
    b.edge("init", "g & p | g & z & c | f & c", "acc")?;
    for q in ["a", "b", "c"] {
        b.edge(q, open, q)?;
    }
    b.edge("a", "g | f & c", "acc")?;
    b.edge("b", "g & c | f & c", "acc")?;
    b.edge("c", "f & c", "acc")?;
    b.build("init")
}

/// Runs a scheduler for K on L through the state map.
pub struct Lifted<'a, S: ?Sized> {
    pub inner: &'a S,
    pub k_model: &'a Mdp,
    pub l_to_k: &'a [usize],
}

impl<S: Scheduler + ?Sized> Scheduler for Lifted<'_, S> {
    fn initial_mode(&self) -> Mode {
        self.inner.initial_mode()
    }
    fn decide(&self, _: &Mdp, s: usize, mode: &Mode) -> Result<Decision> {
        self.inner.decide(self.k_model, self.l_to_k[s], mode)
    }
    fn next_mode(&self, _: &Mdp, mode: &Mode, s: usize, a: usize, t: usize) -> Mode {
        self.inner.next_mode(self.k_model, mode, self.l_to_k[s], a, self.l_to_k[t])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadget::lrs::{rescale_lrs, Regime};
    use std::collections::BTreeSet;

    fn word(ls: &[&[&str]]) -> Vec<BTreeSet<String>> {
        ls.iter().map(|l| l.iter().map(|x| x.to_string()).collect()).collect()
    }

    #[test]
    fn automaton_words() {
        let a = build_nfa_a().unwrap();
        assert!(a.accepts(&word(&[&["p"], &["z"], &["g", "z"]])));
        assert!(!a.accepts(&word(&[&["n"], &["z"], &["g", "z"]])));
        assert!(a.accepts(&word(&[&["z"], &["g", "z", "c"]])));
        assert!(!a.accepts(&word(&[&["z"], &["g", "z"]])));
        assert!(a.accepts(&word(&[&["n"], &["f", "z", "c"]])));
    }

    #[test]
    fn normalized_weights_are_units() {
        let l = rescale_lrs(&Lrs::from_ints(&[1, -1], &[0, 1]).unwrap(), Regime::Pe).unwrap().lrs;
        let inst = build_lrp_instance(&l).unwrap();
        let k = &inst.k_model;
        for s in 0..k.n_states() {
            let w = &k.action(s, 0).weight;
            assert!(w.abs() <= BigInt::from(1));
            assert!(k.actions(s).iter().all(|a| &a.weight == w));
        }
        // every transition into Goal or Fail is split between the two copies
        let m = &inst.l_model;
        for s in 0..m.n_states() {
            for a in m.actions(s) {
                for t in a.transitions.iter().filter(|t| m.is_goal(t.to) || m.is_fail(t.to)) {
                    let twin = a.transitions.iter().find(|u| u.to != t.to && inst.l_to_k[u.to] == inst.l_to_k[t.to]);
                    assert_eq!(twin.map(|u| &u.prob), Some(&t.prob));
                }
            }
        }
    }
}
