use crate::error::{Error, Result};
use crate::mdp::{Decision, Mdp, MemorylessPolicy, Mode, Scheduler, WeightMemoryScheduler};
use crate::rat::Rat;
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{json, Value};
use std::cell::RefCell;
use std::collections::{HashMap, HashSet, VecDeque};
use std::hash::Hash;

/// Deterministic scheduler class to enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchedulerSpace {
    Memoryless,
    /// Full history dependence; finite on models whose non-trap part is acyclic.
    AcyclicHistory,
    /// Accumulated weight clamped to `0..=cap`; with `reset` the mode is 0 in and after
    /// Goal and Fail states.
    WeightMemory { cap: u64, reset: bool },
}

impl SchedulerSpace {
    pub fn describe(&self) -> Value {
        match self {
            SchedulerSpace::Memoryless => json!({"kind": "memoryless"}),
            SchedulerSpace::AcyclicHistory => json!({"kind": "acyclic-history"}),
            SchedulerSpace::WeightMemory { cap, reset } => json!({"kind": "weight-memory", "cap": cap, "reset": reset}),
        }
    }
}

/// Deterministic function from histories to actions, for acyclic models.
///
/// The mode is the id of the history node; histories stop growing at trap states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistoryScheduler {
    pub choice: HashMap<u64, usize>,
    children: HashMap<(u64, usize, usize), u64>,
    /// Node id -> the path it stands for, as (state, action) steps followed by the last state.
    paths: HashMap<u64, (Vec<(usize, usize)>, usize)>,
}

impl Scheduler for HistoryScheduler {
    fn decide(&self, m: &Mdp, s: usize, mode: &Mode) -> Result<Decision> {
        if m.actions(s).len() == 1 {
            return Ok(vec![(0, Rat::one())]);
        }
        let node = mode.to_u64().unwrap_or(u64::MAX);
        match self.choice.get(&node) {
            Some(&a) => Ok(vec![(a, Rat::one())]),
            None => Err(Error::SchedulerPartial { state: m.id(s).into(), mode: mode.to_string() }),
        }
    }
    fn next_mode(&self, m: &Mdp, mode: &Mode, s: usize, a: usize, t: usize) -> Mode {
        if m.is_trap(s) {
            return mode.clone();
        }
        let node = mode.to_u64().unwrap_or(u64::MAX);
        // unknown histories never occur in the induced chain of an enumerated scheduler
        BigInt::from(self.children.get(&(node, a, t)).copied().unwrap_or(u64::MAX))
    }
}

impl HistoryScheduler {
    pub fn to_json(&self, m: &Mdp) -> Value {
        let mut rows: Vec<(String, String)> = self
            .choice
            .iter()
            .map(|(n, &a)| {
                let (steps, last) = &self.paths[n];
                let mut p: Vec<String> =
                    steps.iter().map(|&(s, b)| format!("{}/{}", m.id(s), m.action(s, b).name)).collect();
                p.push(m.id(*last).to_string());
                (p.join(" "), m.action(*last, a).name.clone())
            })
            .collect();
        rows.sort();
        json!(rows.into_iter().map(|(h, a)| json!({"history": h, "action": a})).collect::<Vec<_>>())
    }
}

/// One member of an enumerated space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleScheduler {
    Memoryless(MemorylessPolicy),
    Weight(WeightMemoryScheduler),
    History(HistoryScheduler),
}

impl Scheduler for OracleScheduler {
    fn initial_mode(&self) -> Mode {
        BigInt::zero()
    }
    fn decide(&self, m: &Mdp, s: usize, mode: &Mode) -> Result<Decision> {
        match self {
            OracleScheduler::Memoryless(p) => p.decide(m, s, mode),
            OracleScheduler::Weight(p) => p.decide(m, s, mode),
            OracleScheduler::History(p) => p.decide(m, s, mode),
        }
    }
    fn next_mode(&self, m: &Mdp, mode: &Mode, s: usize, a: usize, t: usize) -> Mode {
        match self {
            OracleScheduler::Memoryless(p) => p.next_mode(m, mode, s, a, t),
            OracleScheduler::Weight(p) => p.next_mode(m, mode, s, a, t),
            OracleScheduler::History(p) => p.next_mode(m, mode, s, a, t),
        }
    }
}

impl OracleScheduler {
    pub fn to_json(&self, m: &Mdp) -> Value {
        match self {
            OracleScheduler::Memoryless(p) => json!({"memoryless": p.to_json(m)}),
            OracleScheduler::Weight(p) => json!({"weightMemory": p.to_json(m)}),
            OracleScheduler::History(p) => json!({"history": p.to_json(m)}),
        }
    }
}

/// Non-trap states lie on no cycle.
pub fn non_trap_acyclic(m: &Mdp) -> bool {
    let n = m.n_states();
    let trap: Vec<bool> = (0..n).map(|s| m.is_trap(s)).collect();
    let mut indeg = vec![0usize; n];
    let succ = |s: usize| -> Vec<usize> {
        let mut v: Vec<usize> =
            m.actions(s).iter().flat_map(|a| a.transitions.iter().map(|t| t.to)).filter(|&t| !trap[t]).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    for s in (0..n).filter(|&s| !trap[s]) {
        for t in succ(s) {
            indeg[t] += 1;
        }
    }
    let mut q: VecDeque<usize> = (0..n).filter(|&s| !trap[s] && indeg[s] == 0).collect();
    let mut seen = 0;
    while let Some(s) = q.pop_front() {
        seen += 1;
        for t in succ(s) {
            indeg[t] -= 1;
            if indeg[t] == 0 {
                q.push_back(t);
            }
        }
    }
    seen == trap.iter().filter(|&&t| !t).count()
}

/// Modes a state can carry in a weight-memory space.
fn modes_of(m: &Mdp, s: usize, cap: u64, reset: bool) -> u64 {
    if reset && (m.is_goal(s) || m.is_fail(s)) {
        1
    } else {
        cap + 1
    }
}

/// Decision points of the full space: (state, mode) pairs with more than one action.
/// For histories the mode is a history-node id.
struct Points {
    points: Vec<(usize, u64)>,
    history: Option<HistoryArena>,
}

fn decision_points(m: &Mdp, space: SchedulerSpace, limit: usize) -> Result<Points> {
    let branching = |s: usize| m.actions(s).len() > 1;
    match space {
        SchedulerSpace::Memoryless => {
            Ok(Points { points: (0..m.n_states()).filter(|&s| branching(s)).map(|s| (s, 0)).collect(), history: None })
        }
        SchedulerSpace::WeightMemory { cap, reset } => {
            let mut points = Vec::new();
            for s in (0..m.n_states()).filter(|&s| branching(s)) {
                for w in 0..modes_of(m, s, cap, reset) {
                    if points.len() >= limit {
                        return Err(Error::SpaceTooLarge(limit));
                    }
                    points.push((s, w));
                }
            }
            Ok(Points { points, history: None })
        }
        SchedulerSpace::AcyclicHistory => {
            if !non_trap_acyclic(m) {
                return Err(Error::SpaceInfinite);
            }
            let arena = HistoryArena::new(m);
            let mut points = Vec::new();
            let mut q = VecDeque::from([(m.initial(), 0u64)]);
            while let Some((s, node)) = q.pop_front() {
                if branching(s) {
                    if points.len() >= limit {
                        return Err(Error::SpaceTooLarge(limit));
                    }
                    points.push((s, node));
                }
                if m.is_trap(s) {
                    continue;
                }
                for (a, act) in m.actions(s).iter().enumerate() {
                    for t in &act.transitions {
                        q.push_back((t.to, arena.child(node, a, t.to)));
                    }
                }
            }
            Ok(Points { points, history: Some(arena) })
        }
    }
}

/// Number of deterministic schedulers in the space: the product of the action counts
/// over all decision points.
pub fn space_size(m: &Mdp, space: SchedulerSpace) -> Result<BigInt> {
    if let SchedulerSpace::WeightMemory { cap, reset } = space {
        // closed form without listing the points
        let mut total = BigInt::one();
        for s in (0..m.n_states()).filter(|&s| m.actions(s).len() > 1) {
            total *= BigInt::from(m.actions(s).len()).pow(modes_of(m, s, cap, reset) as u32);
        }
        return Ok(total);
    }
    let p = decision_points(m, space, usize::MAX)?;
    Ok(p.points.iter().map(|&(s, _)| BigInt::from(m.actions(s).len())).product())
}

/// Interns history nodes: node 0 is the initial state; children are keyed by
/// (parent, action, successor).
#[derive(Debug, Clone)]
struct HistoryArena {
    children: RefCell<HashMap<(u64, usize, usize), u64>>,
    paths: RefCell<HashMap<u64, (Vec<(usize, usize)>, usize)>>,
}

impl HistoryArena {
    fn new(m: &Mdp) -> Self {
        HistoryArena {
            children: RefCell::new(HashMap::new()),
            paths: RefCell::new(HashMap::from([(0, (Vec::new(), m.initial()))])),
        }
    }

    fn child(&self, node: u64, a: usize, t: usize) -> u64 {
        let mut ch = self.children.borrow_mut();
        let next = ch.len() as u64 + 1;
        *ch.entry((node, a, t)).or_insert_with(|| {
            let mut paths = self.paths.borrow_mut();
            let (mut steps, last) = paths[&node].clone();
            steps.push((last, a));
            paths.insert(next, (steps, t));
            next
        })
    }

    fn scheduler(&self, choice: HashMap<u64, usize>) -> HistoryScheduler {
        HistoryScheduler { choice, children: self.children.borrow().clone(), paths: self.paths.borrow().clone() }
    }
}

fn build(m: &Mdp, space: SchedulerSpace, arena: Option<&HistoryArena>, choice: &[((usize, u64), usize)]) -> OracleScheduler {
    match space {
        SchedulerSpace::Memoryless => {
            let mut c = vec![0; m.n_states()];
            for &((s, _), a) in choice {
                c[s] = a;
            }
            OracleScheduler::Memoryless(MemorylessPolicy::new(c))
        }
        SchedulerSpace::WeightMemory { cap, reset } => {
            let mut w = WeightMemoryScheduler::new(cap, reset);
            w.default = Some(vec![0; m.n_states()]);
            for &((s, mode), a) in choice {
                w.set(s, mode, a);
            }
            OracleScheduler::Weight(w)
        }
        SchedulerSpace::AcyclicHistory => OracleScheduler::History(
            arena.expect("history arena").scheduler(choice.iter().map(|&((_, node), a)| (node, a)).collect()),
        ),
    }
}

/// Every deterministic scheduler of the space exactly once, in mixed-radix order.
pub struct Enumeration<'a> {
    m: &'a Mdp,
    space: SchedulerSpace,
    points: Points,
    digits: Vec<usize>,
    done: bool,
}

impl Iterator for Enumeration<'_> {
    type Item = OracleScheduler;
    fn next(&mut self) -> Option<OracleScheduler> {
        if self.done {
            return None;
        }
        let choice: Vec<((usize, u64), usize)> = self.points.points.iter().copied().zip(self.digits.iter().copied()).collect();
        let out = build(self.m, self.space, self.points.history.as_ref(), &choice);
        // advance the counter
        self.done = true;
        for (i, d) in self.digits.iter_mut().enumerate() {
            *d += 1;
            if *d < self.m.actions(self.points.points[i].0).len() {
                self.done = false;
                break;
            }
            *d = 0;
        }
        Some(out)
    }
}

/// Streams the full space. Fails with `SpaceTooLarge` if it has more than `budget` members.
pub fn enumerate(m: &Mdp, space: SchedulerSpace, budget: usize) -> Result<Enumeration<'_>> {
    if space_size(m, space)? > BigInt::from(budget) {
        return Err(Error::SpaceTooLarge(budget));
    }
    let points = decision_points(m, space, budget.max(64))?;
    let digits = vec![0; points.points.len()];
    Ok(Enumeration { m, space, points, digits, done: false })
}

/// Successor function of a lazily explored scheduler product.
trait Explore {
    type Key: Clone + Eq + Hash;
    fn branching(&self, k: &Self::Key) -> usize;
    fn succ(&self, k: &Self::Key, a: usize) -> Vec<Self::Key>;
}

struct Search<'f, K, F> {
    budget: usize,
    count: usize,
    visit: &'f mut F,
    _k: std::marker::PhantomData<K>,
}

fn explore<E: Explore, F: FnMut(&[(E::Key, usize)]) -> Result<()>>(
    e: &E,
    search: &mut Search<'_, E::Key, F>,
    mut assigned: Vec<(E::Key, usize)>,
    mut seen: HashSet<E::Key>,
    mut queue: VecDeque<E::Key>,
) -> Result<()> {
    while let Some(k) = queue.pop_front() {
        let n = e.branching(&k);
        if n <= 1 {
            for t in e.succ(&k, 0) {
                if seen.insert(t.clone()) {
                    queue.push_back(t);
                }
            }
            continue;
        }
        for a in 0..n {
            let mut seen2 = seen.clone();
            let mut queue2 = queue.clone();
            for t in e.succ(&k, a) {
                if seen2.insert(t.clone()) {
                    queue2.push_back(t);
                }
            }
            let mut assigned2 = assigned.clone();
            assigned2.push((k.clone(), a));
            explore(e, search, assigned2, seen2, queue2)?;
        }
        return Ok(());
    }
    search.count += 1;
    if search.count > search.budget {
        return Err(Error::SpaceTooLarge(search.budget));
    }
    assigned.shrink_to_fit();
    (search.visit)(&assigned)
}

fn run<E: Explore, F: FnMut(&[(E::Key, usize)]) -> Result<()>>(e: &E, root: E::Key, budget: usize, visit: &mut F) -> Result<usize> {
    let mut search = Search { budget, count: 0, visit, _k: std::marker::PhantomData };
    let seen = HashSet::from([root.clone()]);
    explore(e, &mut search, Vec::new(), seen, VecDeque::from([root]))?;
    Ok(search.count)
}

struct WeightExplore<'a, O> {
    m: &'a Mdp,
    template: WeightMemoryScheduler,
    observed: O,
}

impl<O: Fn(usize, u64) -> bool> Explore for WeightExplore<'_, O> {
    type Key = (usize, u64);
    fn branching(&self, k: &(usize, u64)) -> usize {
        if (self.observed)(k.0, k.1) {
            self.m.actions(k.0).len()
        } else {
            1
        }
    }
    fn succ(&self, &(s, w): &(usize, u64), a: usize) -> Vec<(usize, u64)> {
        let mode = BigInt::from(w);
        self.m
            .action(s, a)
            .transitions
            .iter()
            .map(|t| (t.to, self.template.update(self.m, &mode, s, a, t.to).to_u64().expect("mode below cap")))
            .collect()
    }
}

struct HistoryExplore<'a> {
    m: &'a Mdp,
    arena: &'a HistoryArena,
}

impl Explore for HistoryExplore<'_> {
    type Key = (usize, u64);
    fn branching(&self, k: &(usize, u64)) -> usize {
        self.m.actions(k.0).len()
    }
    fn succ(&self, &(s, node): &(usize, u64), a: usize) -> Vec<(usize, u64)> {
        if self.m.is_trap(s) {
            return vec![(s, node)];
        }
        self.m.action(s, a).transitions.iter().map(|t| (t.to, self.arena.child(node, a, t.to))).collect()
    }
}

/// Calls `visit` once per distinct behaviour: schedulers of the space that differ only
/// at (state, mode) pairs they never reach are visited once. Returns the number visited.
pub fn for_each_behaviour(
    m: &Mdp,
    space: SchedulerSpace,
    budget: usize,
    visit: impl FnMut(OracleScheduler) -> Result<()>,
) -> Result<usize> {
    for_each_observed_behaviour(m, space, budget, |_, _| true, visit)
}

/// Like [`for_each_behaviour`], but (state, mode) pairs where `observed` is false are
/// fixed to the first action: the caller promises its objective cannot tell the choices
/// there apart. Ignored for history spaces.
pub fn for_each_observed_behaviour(
    m: &Mdp,
    space: SchedulerSpace,
    budget: usize,
    observed: impl Fn(usize, u64) -> bool,
    mut visit: impl FnMut(OracleScheduler) -> Result<()>,
) -> Result<usize> {
    let root = (m.initial(), 0u64);
    match space {
        SchedulerSpace::Memoryless | SchedulerSpace::WeightMemory { .. } => {
            let (cap, reset) = match space {
                SchedulerSpace::WeightMemory { cap, reset } => (cap, reset),
                _ => (0, false),
            };
            let e = WeightExplore { m, template: WeightMemoryScheduler::new(cap, reset), observed };
            run(&e, root, budget, &mut |choice: &[((usize, u64), usize)]| {
                if space == SchedulerSpace::Memoryless {
                    let mut c = vec![0; m.n_states()];
                    for &((s, _), a) in choice {
                        c[s] = a;
                    }
                    visit(OracleScheduler::Memoryless(MemorylessPolicy::new(c)))
                } else {
                    visit(build(m, space, None, choice))
                }
            })
        }
        SchedulerSpace::AcyclicHistory => {
            if !non_trap_acyclic(m) {
                return Err(Error::SpaceInfinite);
            }
            let arena = HistoryArena::new(m);
            let e = HistoryExplore { m, arena: &arena };
            run(&e, root, budget, &mut |choice: &[((usize, u64), usize)]| visit(build(m, space, Some(&arena), choice)))
        }
    }
}

/// Collects [`for_each_behaviour`] into a vector.
pub fn behaviours(m: &Mdp, space: SchedulerSpace, budget: usize) -> Result<Vec<OracleScheduler>> {
    let mut out = Vec::new();
    for_each_behaviour(m, space, budget, |s| {
        out.push(s);
        Ok(())
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::samples::alpha_beta_loop;
    use crate::mdp::MdpBuilder;

    fn one_state_two_actions() -> Mdp {
        let mut b = MdpBuilder::new();
        let s = b.state("s");
        b.action(s, "a", 0, vec![(s, Rat::one())]);
        b.action(s, "b", 1, vec![(s, Rat::one())]);
        b.set_initial(s);
        b.build().unwrap()
    }

    /// Root and two children, each with two actions; leaves are traps.
    fn binary_tree() -> Mdp {
        let mut b = MdpBuilder::new();
        let r = b.state("r");
        let l = b.state("l");
        let x = b.state("x");
        let g = b.state("goal");
        let f = b.state("fail");
        let h = Rat::new(1, 2);
        b.action(r, "a", 0, vec![(l, h.clone()), (x, h.clone())]);
        b.action(r, "b", 1, vec![(l, h.clone()), (x, h.clone())]);
        for c in [l, x] {
            b.action(c, "a", 1, vec![(g, Rat::one())]);
            b.action(c, "b", 2, vec![(g, h.clone()), (f, h.clone())]);
        }
        b.absorbing(g);
        b.absorbing(f);
        b.set_initial(r);
        b.add_goal(g);
        b.build().unwrap()
    }

    #[test]
    fn small_counts() {
        let m = one_state_two_actions();
        assert_eq!(enumerate(&m, SchedulerSpace::Memoryless, 100).unwrap().count(), 2);
        let t = binary_tree();
        assert_eq!(space_size(&t, SchedulerSpace::Memoryless).unwrap(), BigInt::from(8));
        assert_eq!(enumerate(&t, SchedulerSpace::Memoryless, 100).unwrap().count(), 8);
        // each child is reached by two histories, one per root action
        assert_eq!(space_size(&t, SchedulerSpace::AcyclicHistory).unwrap(), BigInt::from(32));
    }

    #[test]
    fn weight_memory_count_matches_product() {
        let m = alpha_beta_loop();
        let space = SchedulerSpace::WeightMemory { cap: 5, reset: true };
        assert_eq!(space_size(&m, space).unwrap(), BigInt::from(64));
        let all: Vec<_> = enumerate(&m, space, 1000).unwrap().collect();
        assert_eq!(all.len(), 64);
        for i in 0..all.len() {
            for j in 0..i {
                assert_ne!(all[i], all[j]);
            }
        }
    }

    #[test]
    fn behaviours_cut_unreachable_modes() {
        let m = alpha_beta_loop();
        // alpha raises the mode by 3, so only modes 0 and 3 (capped) are reachable
        let b = behaviours(&m, SchedulerSpace::WeightMemory { cap: 5, reset: true }, 1000).unwrap();
        assert_eq!(b.len(), 4);
        assert!(matches!(behaviours(&m, SchedulerSpace::AcyclicHistory, 10), Err(Error::SpaceInfinite)));
        assert!(matches!(enumerate(&m, SchedulerSpace::WeightMemory { cap: 30, reset: true }, 1000), Err(Error::SpaceTooLarge(_))));
    }

    #[test]
    fn history_behaviours_of_tree() {
        let t = binary_tree();
        let b = behaviours(&t, SchedulerSpace::AcyclicHistory, 100).unwrap();
        assert_eq!(b.len(), 8);
        assert_eq!(behaviours(&t, SchedulerSpace::Memoryless, 100).unwrap().len(), 8);
    }
}
