use super::lrs::{base_goal_prob, check_regime, Lrs, Regime};
use crate::error::{Error, Result};
use crate::mdp::{Mdp, MdpBuilder};
use crate::rat::Rat;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GadgetKind {
    Pe,
    Cvar,
    Wlf,
}

impl GadgetKind {
    pub fn regime(self) -> Regime {
        match self {
            GadgetKind::Cvar => Regime::Cvar,
            _ => Regime::Pe,
        }
    }

    /// Lowest weight level at which the canonical scheduler uses an initial-value action.
    pub fn base_low(self, k: usize) -> i64 {
        match self {
            GadgetKind::Cvar => -(k as i64),
            _ => -(k as i64 - 1),
        }
    }
}

/// An assembled hardness instance together with the sequence it encodes.
#[derive(Debug, Clone)]
pub struct Gadget {
    pub kind: GadgetKind,
    pub lrs: Lrs,
    pub mdp: Mdp,
}

impl Gadget {
    pub fn state(&self, id: &str) -> Result<usize> {
        self.mdp.index_of(id).ok_or_else(|| Error::Internal(format!("gadget lacks state {id:?}")))
    }

    pub fn action(&self, s: usize, name: &str) -> Result<usize> {
        self.mdp
            .action_index(s, name)
            .ok_or_else(|| Error::Internal(format!("gadget lacks action {name:?} at {:?}", self.mdp.id(s))))
    }
}

fn push(v: &mut Vec<(usize, Rat)>, to: usize, p: Rat) {
    if p.is_positive() {
        v.push((to, p));
    }
}

fn core_action(l: &Lrs, own: &[usize], other: &[usize], exit: usize) -> Vec<(usize, Rat)> {
    let mut tr = Vec::new();
    for (i, a) in l.alphas.iter().enumerate() {
        if a.is_positive() {
            tr.push((own[i], a.clone()));
        } else if a.is_negative() {
            tr.push((other[i], a.abs()));
        }
    }
    push(&mut tr, exit, Rat::one() - l.abs_alpha_sum());
    tr
}

/// Adds t, s, t_1..t_k, s_1..s_k with actions γ, δ and the return edges.
fn add_core(b: &mut MdpBuilder, l: &Lrs, goal: usize) -> (usize, usize) {
    let t = b.state("t");
    let s = b.state("s");
    let ti: Vec<usize> = (1..=l.k).map(|i| b.state(format!("t_{i}"))).collect();
    let si: Vec<usize> = (1..=l.k).map(|i| b.state(format!("s_{i}"))).collect();
    b.action(t, "gamma", 0, core_action(l, &ti, &si, goal));
    b.action(s, "delta", 0, core_action(l, &si, &ti, goal));
    for i in 0..l.k {
        let w = -(i as i64 + 1);
        b.action(ti[i], "back", w, vec![(t, Rat::one())]);
        b.action(si[i], "back", w, vec![(s, Rat::one())]);
    }
    (t, s)
}

/// Initial component: s_init accumulates +1 per round and exits to c with probability 1/2.
fn add_initial(b: &mut MdpBuilder) -> (usize, usize) {
    let init = b.state("s_init");
    let c = b.state("c");
    b.action(init, "flip", 1, vec![(c, Rat::new(1, 2)), (init, Rat::new(1, 2))]);
    b.set_initial(init);
    (init, c)
}

fn link_choice(b: &mut MdpBuilder, c: usize, t: usize, s: usize) {
    b.action(c, "tau", 0, vec![(t, Rat::one())]);
    b.action(c, "sigma", 0, vec![(s, Rat::one())]);
}

/// Stand-alone recurrence core, entered from `entry` with probability 1/2 into each side.
pub fn build_recurrence_core(l: &Lrs) -> Result<Mdp> {
    l.validate()?;
    if l.abs_alpha_sum() > Rat::one() {
        return Err(Error::InvalidArgument("sum |alpha_i| exceeds 1".into()));
    }
    let mut b = MdpBuilder::new();
    let entry = b.state("entry");
    b.set_initial(entry);
    let goal = b.state("goal");
    b.absorbing(goal);
    b.add_goal(goal);
    let (t, s) = add_core(&mut b, l, goal);
    b.action(entry, "enter", 0, vec![(t, Rat::new(1, 2)), (s, Rat::new(1, 2))]);
    b.build_reachable()
}

pub fn build_pe_gadget(l: &Lrs) -> Result<Gadget> {
    check_regime(l, Regime::Pe)?;
    let k = l.k;
    let mut b = MdpBuilder::new();
    let (_, c) = add_initial(&mut b);
    let goal = b.state("goal");
    let fail = b.state("fail");
    let (t, s) = add_core(&mut b, l, goal);
    link_choice(&mut b, c, t, s);
    for j in 0..k {
        let w = (k - j) as i64;
        let x = b.state(format!("x_{j}"));
        let y = b.state(format!("y_{j}"));
        b.action(t, format!("gamma_{j}"), w, vec![(x, Rat::one())]);
        b.action(s, format!("delta_{j}"), w, vec![(y, Rat::one())]);
        let p = base_goal_prob(k, j) + &l.betas[j];
        let q = base_goal_prob(k, j);
        let mut tx = Vec::new();
        push(&mut tx, goal, p.clone());
        push(&mut tx, fail, Rat::one() - p);
        b.action(x, "exit", 0, tx);
        b.action(y, "exit", 0, vec![(goal, q.clone()), (fail, Rat::one() - q)]);
    }
    b.absorbing(goal);
    b.absorbing(fail);
    b.add_goal(goal);
    b.add_fail(fail);
    Ok(Gadget { kind: GadgetKind::Pe, lrs: l.clone(), mdp: b.build_reachable()? })
}

pub fn build_cvar_gadget(l: &Lrs) -> Result<Gadget> {
    check_regime(l, Regime::Cvar)?;
    let k = l.k as i64;
    let alpha = l.abs_alpha_sum();
    let stay = Rat::new(1, k + 1);
    let leave = Rat::new(k, k + 1);
    let mut b = MdpBuilder::new();
    let (_, c) = add_initial(&mut b);
    let goal = b.state("goal");
    let (t, s) = add_core(&mut b, l, goal);
    link_choice(&mut b, c, t, s);
    for j in 0..l.k {
        let ji = j as i64;
        let w = -2 * k + ji;
        let z = b.state(format!("z_{j}"));
        b.action(z, "go", 3 * k - 2 * ji, vec![(goal, Rat::one())]);
        let x1 = b.state(format!("xp_{j}"));
        let x = b.state(format!("x_{j}"));
        let mut tr = Vec::new();
        push(&mut tr, x1, alpha.clone());
        push(&mut tr, z, Rat::one() - &alpha);
        b.action(t, format!("gamma_{j}"), w, tr);
        b.action(x1, "go", k, vec![(x, Rat::one())]);
        b.action(x, "loop", -k, vec![(x, stay.clone()), (goal, leave.clone())]);

        let y2 = b.state(format!("ypp_{j}"));
        let y3 = b.state(format!("yppp_{j}"));
        let y = b.state(format!("y_{j}"));
        let y1 = b.state(format!("yp_{j}"));
        let mut tr = Vec::new();
        push(&mut tr, y2, alpha.clone());
        push(&mut tr, z, Rat::one() - &alpha);
        b.action(s, format!("delta_{j}"), w, tr);
        if alpha.is_positive() {
            let r = &l.betas[j] / &alpha;
            let mut tr = Vec::new();
            push(&mut tr, y, Rat::one() - &r);
            push(&mut tr, y3, r);
            b.action(y2, "go", k, tr);
        } else {
            b.action(y2, "go", k, vec![(y, Rat::one())]);
        }
        b.action(y3, "go", k, vec![(y1, Rat::one())]);
        b.action(y, "loop", -k, vec![(y, stay.clone()), (goal, leave.clone())]);
        b.action(y1, "loop", -2 * k, vec![(y1, stay.clone()), (goal, leave.clone())]);
    }
    b.absorbing(goal);
    b.add_goal(goal);
    Ok(Gadget { kind: GadgetKind::Cvar, lrs: l.clone(), mdp: b.build_reachable()? })
}

/// Prepends a state that enters the gadget with probability 1/3 and goal with 2/3, so that
/// at least half of the mass ends at weight 0.
pub fn cvar_prefix(m: &Mdp) -> Result<Mdp> {
    let goal = *m.goal().iter().next().ok_or_else(|| Error::InvalidArgument("model has no goal state".into()))?;
    let mut b = MdpBuilder::from_mdp(m);
    let s0 = b.state("s_init_prefix");
    b.action(s0, "start", 0, vec![(m.initial(), Rat::new(1, 3)), (goal, Rat::new(2, 3))]);
    b.set_initial(s0);
    b.build()
}

pub fn build_wlf_gadget(l: &Lrs) -> Result<Gadget> {
    check_regime(l, Regime::Pe)?;
    let k = l.k;
    let p0 = l.abs_alpha_sum();
    let rest = Rat::one() - &p0;
    let mut b = MdpBuilder::new();
    let (init, c) = add_initial(&mut b);
    let goal = b.state("goal");
    let fail = b.state("fail");
    let (t, s) = add_core(&mut b, l, goal);
    link_choice(&mut b, c, t, s);
    for j in 0..k {
        let w = (k - j) as i64;
        for (side, act, pre, g) in [
            (t, "gamma", "x", base_goal_prob(k, j) + &l.betas[j]),
            (s, "delta", "y", base_goal_prob(k, j)),
        ] {
            let a = b.state(format!("{pre}_{j}"));
            let a1 = b.state(format!("{pre}p_{j}"));
            let split = |a: usize| {
                let mut tr = Vec::new();
                push(&mut tr, a, p0.clone());
                push(&mut tr, goal, &rest * &g);
                push(&mut tr, fail, &rest * (Rat::one() - &g));
                tr
            };
            b.action(side, format!("{act}_{j}"), w, split(a));
            b.action(a, "go", 0, vec![(a1, Rat::one())]);
            b.action(a1, "exit", 0, split(a));
        }
    }
    b.action(goal, "reset", 0, vec![(init, Rat::one())]);
    b.action(fail, "reset", 0, vec![(init, Rat::one())]);
    b.add_goal(goal);
    b.add_fail(fail);
    Ok(Gadget { kind: GadgetKind::Wlf, lrs: l.clone(), mdp: b.build_reachable()? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadget::lrs::{rescale_lrs, Regime};
    use num_bigint::BigInt;

    fn probs(m: &Mdp, s: &str, a: &str) -> Vec<(String, Rat)> {
        let s = m.index_of(s).unwrap();
        let a = m.action_index(s, a).unwrap();
        m.action(s, a).transitions.iter().map(|t| (m.id(t.to).to_string(), t.prob.clone())).collect()
    }

    #[test]
    fn core_cross_edges() {
        let l = Lrs::new(vec![Rat::new(1, 8), Rat::new(-1, 16)], vec![Rat::zero(), Rat::zero()]).unwrap();
        let m = build_recurrence_core(&l).unwrap();
        assert_eq!(
            probs(&m, "t", "gamma"),
            vec![("t_1".into(), Rat::new(1, 8)), ("s_2".into(), Rat::new(1, 16)), ("goal".into(), Rat::new(13, 16))]
        );
        assert_eq!(
            probs(&m, "s", "delta"),
            vec![("s_1".into(), Rat::new(1, 8)), ("t_2".into(), Rat::new(1, 16)), ("goal".into(), Rat::new(13, 16))]
        );
        let t2 = m.index_of("t_2").unwrap();
        assert_eq!(m.action(t2, 0).weight, BigInt::from(-2));
    }

    #[test]
    fn positive_coefficients_no_cross_edges() {
        let l = Lrs::new(vec![Rat::new(1, 8), Rat::new(1, 16)], vec![Rat::zero(), Rat::zero()]).unwrap();
        let m = build_recurrence_core(&l).unwrap();
        assert!(probs(&m, "t", "gamma").iter().all(|(id, _)| !id.starts_with("s_")));
        assert!(probs(&m, "s", "delta").iter().all(|(id, _)| !id.starts_with("t_")));
    }

    #[test]
    fn pe_initial_value_branch() {
        let l = Lrs::new(vec![Rat::new(1, 8), Rat::new(-1, 16)], vec![Rat::new(1, 10000), Rat::zero()]).unwrap();
        let g = build_pe_gadget(&l).unwrap();
        assert_eq!(probs(&g.mdp, "x_0", "exit")[0], ("goal".into(), Rat::new(1, 32) + Rat::new(1, 10000)));
        assert_eq!(probs(&g.mdp, "y_1", "exit")[0], ("goal".into(), Rat::new(1, 8)));
        let t = g.state("t").unwrap();
        let a = g.action(t, "gamma_0").unwrap();
        assert_eq!(g.mdp.action(t, a).weight, BigInt::from(2));
    }

    #[test]
    fn cvar_loop_states() {
        let l = rescale_lrs(&Lrs::from_ints(&[1, -1], &[0, 1]).unwrap(), Regime::Cvar).unwrap().lrs;
        let g = build_cvar_gadget(&l).unwrap();
        assert_eq!(probs(&g.mdp, "x_1", "loop"), vec![("x_1".into(), Rat::new(1, 3)), ("goal".into(), Rat::new(2, 3))]);
        let x = g.state("x_1").unwrap();
        assert_eq!(g.mdp.action(x, 0).weight, BigInt::from(-2));
        let n = cvar_prefix(&g.mdp).unwrap();
        assert_eq!(n.id(n.initial()), "s_init_prefix");
    }

    #[test]
    fn unscaled_sequence_rejected() {
        let l = Lrs::from_ints(&[1, -1], &[0, 1]).unwrap();
        assert!(matches!(build_pe_gadget(&l), Err(Error::RescaleConstraintViolated(_))));
        assert!(matches!(build_wlf_gadget(&l), Err(Error::RescaleConstraintViolated(_))));
    }

    #[test]
    fn wlf_gadget_shape() {
        let l = rescale_lrs(&Lrs::from_ints(&[1, -1], &[0, 1]).unwrap(), Regime::Pe).unwrap().lrs;
        let g = build_wlf_gadget(&l).unwrap();
        assert!(crate::graph::is_strongly_connected(&g.mdp));
        let p0 = l.abs_alpha_sum();
        assert_eq!(probs(&g.mdp, "xp_0", "exit")[0], ("x_0".into(), p0));
    }
}
