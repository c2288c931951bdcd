use super::saturation::{goal_almost_sure_everywhere, strongly_connected};
use super::space::non_trap_acyclic;
use crate::mdp::{Mdp, MdpBuilder};
use crate::rat::Rat;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seed used when `MDPSAT_SEED` is unset or unparsable.
pub const DEFAULT_SEED: u64 = 20_240_601;

pub fn seed_from_env() -> u64 {
    std::env::var("MDPSAT_SEED").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_SEED)
}

/// Structural class of generated models.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// Non-trap states in a fixed order, edges only forward; absorbing `goal` and `fail`.
    Acyclic,
    /// Absorbing `goal` reached almost surely under every scheduler.
    GoalAlmostSure,
    /// One strongly connected graph with non-empty Goal ∪ Fail.
    StronglyConnected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorpusParams {
    pub shape: Shape,
    /// Upper bound on states (for the acyclic shape: non-trap states).
    pub max_states: usize,
    pub max_actions: usize,
    pub max_weight: i64,
}

impl CorpusParams {
    pub fn new(shape: Shape, max_states: usize, max_actions: usize, max_weight: i64) -> Self {
        CorpusParams { shape, max_states, max_actions, max_weight }
    }
}

/// Splits 1 into `k` positive parts drawn from quarters.
fn quarters(rng: &mut ChaCha8Rng, k: usize) -> Vec<Rat> {
    let k = k.clamp(1, 4);
    let mut parts = vec![1u32; k];
    for _ in k..4 {
        let i = rng.gen_range(0..k);
        parts[i] += 1;
    }
    parts.into_iter().map(|q| Rat::new(q as i64, 4)).collect()
}

fn distribution(rng: &mut ChaCha8Rng, targets: &[usize]) -> Vec<(usize, Rat)> {
    let k = rng.gen_range(1..=targets.len().min(3));
    let chosen: Vec<usize> = targets.choose_multiple(rng, k).copied().collect();
    chosen.into_iter().zip(quarters(rng, k)).collect()
}

/// One random model, or `None` when the draw violates the shape.
pub fn random_mdp(rng: &mut ChaCha8Rng, p: &CorpusParams) -> Option<Mdp> {
    let mut b = MdpBuilder::new();
    match p.shape {
        Shape::Acyclic => {
            let n = rng.gen_range(1..=p.max_states);
            let xs: Vec<usize> = (0..n).map(|i| b.state(format!("s{i}"))).collect();
            let goal = b.state("goal");
            let fail = b.state("fail");
            for i in 0..n {
                let mut targets: Vec<usize> = xs[i + 1..].to_vec();
                targets.push(goal);
                targets.push(fail);
                for a in 0..rng.gen_range(1..=p.max_actions) {
                    let w = rng.gen_range(0..=p.max_weight);
                    b.action(xs[i], format!("a{a}"), w, distribution(rng, &targets));
                }
            }
            b.absorbing(goal);
            b.absorbing(fail);
            b.add_goal(goal);
            b.set_initial(xs[0]);
            let m = b.build_reachable().ok()?;
            (m.index_of("goal").is_some() && non_trap_acyclic(&m)).then_some(m)
        }
        Shape::GoalAlmostSure => {
            let n = rng.gen_range(1..p.max_states.max(2));
            let xs: Vec<usize> = (0..n).map(|i| b.state(format!("s{i}"))).collect();
            let goal = b.state("goal");
            let mut targets = xs.clone();
            targets.push(goal);
            for &x in &xs {
                for a in 0..rng.gen_range(1..=p.max_actions) {
                    let w = rng.gen_range(0..=p.max_weight);
                    b.action(x, format!("a{a}"), w, distribution(rng, &targets));
                }
            }
            b.absorbing(goal);
            b.add_goal(goal);
            b.set_initial(xs[0]);
            let m = b.build_reachable().ok()?;
            (m.index_of("goal").is_some() && goal_almost_sure_everywhere(&m, 1 << 12).ok()?).then_some(m)
        }
        Shape::StronglyConnected => {
            let n = rng.gen_range(2..=p.max_states.max(2));
            let xs: Vec<usize> = (0..n).map(|i| b.state(format!("s{i}"))).collect();
            for &x in &xs {
                for a in 0..rng.gen_range(1..=p.max_actions) {
                    let w = rng.gen_range(0..=p.max_weight);
                    b.action(x, format!("a{a}"), w, distribution(rng, &xs));
                }
            }
            // at least one Goal or Fail state; never both on one state
            let mut roles: Vec<u8> = (0..n).map(|_| rng.gen_range(0..3)).collect();
            if roles.iter().all(|&r| r == 0) {
                roles[rng.gen_range(0..n)] = 1;
            }
            for (i, r) in roles.into_iter().enumerate() {
                match r {
                    1 => b.add_goal(xs[i]),
                    2 => b.add_fail(xs[i]),
                    _ => {}
                }
            }
            b.set_initial(xs[0]);
            let m = b.build().ok()?;
            strongly_connected(&m).then_some(m)
        }
    }
}

/// `count` valid models from `seed`; invalid draws are skipped.
pub fn corpus(seed: u64, count: usize, p: &CorpusParams) -> Vec<Mdp> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut tries = 0usize;
    while out.len() < count && tries < count * 1000 {
        tries += 1;
        if let Some(m) = random_mdp(&mut rng, p) {
            out.push(m);
        }
    }
    out
}
