use super::{Mdp, MdpBuilder};
use crate::error::Result;
use crate::rat::Rat;
use num_bigint::BigInt;
use std::collections::{BTreeMap, HashMap, VecDeque};

/// What happens at goal states and at the saturated layer of the unfolding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminalRule {
    /// Plain product; the saturated layer keeps acting with mode `cap`.
    None,
    /// `(goal, i)` becomes terminal with recorded weight `i`; `(s, cap)` becomes
    /// terminal with recorded weight `cap`.
    GoalAndSaturation,
}

#[derive(Debug, Clone)]
pub struct Unfolding {
    pub mdp: Mdp,
    /// Product state -> (original state, weight level).
    pub origin: Vec<(usize, u64)>,
    /// Terminal product states with their recorded weight.
    pub terminal_weight: BTreeMap<usize, u64>,
}

/// Product of `m` with weight levels `0..=cap`, restricted to reachable pairs.
pub fn weight_unfold(m: &Mdp, cap: u64, rule: TerminalRule) -> Result<Unfolding> {
    m.check_nonnegative()?;
    let capb = BigInt::from(cap);
    let mut b = MdpBuilder::new();
    let mut origin = Vec::new();
    let mut index: HashMap<(usize, u64), usize> = HashMap::new();
    let mut queue = VecDeque::new();
    let mut terminal_weight = BTreeMap::new();

    let mut intern = |b: &mut MdpBuilder, origin: &mut Vec<(usize, u64)>, q: &mut VecDeque<usize>, key: (usize, u64)| {
        if let Some(&i) = index.get(&key) {
            return i;
        }
        let i = b.state(format!("{}#{}", m.id(key.0), key.1));
        for l in m.labels(key.0) {
            b.add_label(i, l);
        }
        index.insert(key, i);
        origin.push(key);
        q.push_back(i);
        i
    };

    let root = intern(&mut b, &mut origin, &mut queue, (m.initial(), 0));
    b.set_initial(root);
    while let Some(i) = queue.pop_front() {
        let (s, w) = origin[i];
        if rule == TerminalRule::GoalAndSaturation && (m.is_goal(s) || w == cap) {
            b.absorbing(i);
            terminal_weight.insert(i, w);
            if m.is_goal(s) {
                b.add_goal(i);
            }
            continue;
        }
        if m.is_goal(s) {
            b.add_goal(i);
        }
        if m.is_fail(s) {
            b.add_fail(i);
        }
        for a in m.actions(s) {
            let nw = (BigInt::from(w) + &a.weight).min(capb.clone());
            let nw = u64::try_from(nw).expect("level fits below cap");
            let tr: Vec<(usize, Rat)> = a
                .transitions
                .iter()
                .map(|t| (intern(&mut b, &mut origin, &mut queue, (t.to, nw)), t.prob.clone()))
                .collect();
            b.action(i, a.name.clone(), a.weight.clone(), tr);
        }
    }
    let mdp = b.build()?;
    Ok(Unfolding { mdp, origin, terminal_weight })
}
