//! The brute-force oracle: enumerate deterministic schedulers on small random models and
//! compare with the solvers.
//!
//! cargo run --release --example oracle

use mdpsat::cvar::cvar_max;
use mdpsat::graph::Direction;
use mdpsat::oracle::{brute_cvar, brute_pe, corpus, seed_from_env, CorpusParams, SchedulerSpace, Shape};
use mdpsat::sspp::acyclic_partial_expectation;
use mdpsat::Rat;

fn main() -> mdpsat::Result<()> {
    let seed = seed_from_env();
    println!("seed {seed}");
    let ms = corpus(seed, 10, &CorpusParams::new(Shape::Acyclic, 5, 2, 3));
    for (i, m) in ms.iter().enumerate() {
        let solver = acyclic_partial_expectation(m, Direction::Max)?.value;
        let brute = brute_pe(m, SchedulerSpace::AcyclicHistory, Direction::Max, 10_000)?;
        println!("acyclic #{i}: PE {solver} brute {} over {} schedulers", brute.value, brute.count);
    }
    let p = Rat::new(1, 3);
    for (i, m) in corpus(seed, 5, &CorpusParams::new(Shape::GoalAlmostSure, 4, 2, 2)).iter().enumerate() {
        match (cvar_max(m, &p), brute_cvar(m, &p, None, 3000)) {
            (Ok(s), Ok(b)) => println!("goal-a.s. #{i}: CVaR_1/3 {} brute {} (memory {})", s.value, b.value, b.cap),
            (s, b) => println!("goal-a.s. #{i}: skipped ({:?} / {:?})", s.err(), b.err()),
        }
    }
    Ok(())
}
