//! Shortest-path style objectives: classical expected total weight, and partial /
//! conditional expectations on an acyclic model.
//!
//! cargo run --example sspp

use mdpsat::graph::{sspp_preprocess, Direction};
use mdpsat::mdp::parse_mdp;
use mdpsat::sspp::{acyclic_conditional_expectation, acyclic_partial_expectation, classical_sspp};
use mdpsat::{MdpBuilder, Rat};

fn main() -> mdpsat::Result<()> {
    // a retry loop: "try" costs 1 and succeeds with probability 1/3, "pay" costs 4 outright
    let mut b = MdpBuilder::new();
    let s = b.state("s");
    let g = b.state("g");
    b.action(s, "try", 1, vec![(g, Rat::new(1, 3)), (s, Rat::new(2, 3))]);
    b.action(s, "pay", 4, vec![(g, Rat::one())]);
    b.absorbing(g);
    b.add_goal(g);
    b.set_initial(s);
    let m = b.build()?;
    for dir in [Direction::Min, Direction::Max] {
        let r = classical_sspp(&m, dir)?;
        println!("classical {dir:?}: {} via {}", r.value, r.witness.to_json(&m));
    }

    // the gamble has a losing trap the goal cannot be reached from; classical analysis rejects it
    let gamble = parse_mdp(include_bytes!("data/gamble.json"))?;
    match classical_sspp(&gamble, Direction::Max) {
        Ok(r) => println!("unexpected: {}", r.value),
        Err(e) => println!("classical on gamble: {e}"),
    }
    match sspp_preprocess(&gamble) {
        Ok(p) => println!("preprocessed into {} states", p.n_states()),
        Err(e) => println!("preprocess: {e}"),
    }
    for dir in [Direction::Max, Direction::Min] {
        let pe = acyclic_partial_expectation(&gamble, dir)?;
        let ce = acyclic_conditional_expectation(&gamble, dir)?;
        println!("{dir:?}: partial {} (reach {}), conditional {}", pe.value, pe.reach_prob, ce.value);
    }
    Ok(())
}
