//! End components and reachability on a model file given on the command line.
//!
//! cargo run --example mecs -- examples/data/gamble.json

use mdpsat::graph::{max_reach_prob, mec_decompose};
use mdpsat::mdp::parse_mdp;
use std::collections::BTreeSet;

fn main() -> mdpsat::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/gamble.json").into());
    let m = parse_mdp(&std::fs::read(&path).map_err(|e| mdpsat::Error::MalformedDocument(e.to_string()))?)?;
    for (i, e) in mec_decompose(&m).mecs.iter().enumerate() {
        println!("mec {i}: {:?} goal={} fail={} zero-weight={}", m.ids_of(&e.states), e.contains_goal, e.contains_fail, e.zero_weight);
    }
    let r = max_reach_prob(&m, m.goal(), &BTreeSet::new())?;
    println!("max goal probability: {}", r.pmax[m.initial()]);
    Ok(())
}
