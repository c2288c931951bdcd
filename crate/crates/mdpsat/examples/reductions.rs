//! Threshold reductions between partial expectations, conditional expectations and
//! weighted long-run frequencies, checked against the exact solvers.
//!
//! cargo run --example reductions

use mdpsat::gadget::{reduce_ce_to_pe_acyclic, reduce_pe_to_ce, reduce_pe_to_wlf_acyclic};
use mdpsat::graph::Direction;
use mdpsat::longrun::{wlf_max, LongRunSpec};
use mdpsat::mdp::parse_mdp;
use mdpsat::sspp::{acyclic_conditional_expectation, acyclic_partial_expectation};
use mdpsat::Rat;

fn main() -> mdpsat::Result<()> {
    let m = parse_mdp(include_bytes!("data/gamble.json"))?;
    let pe = acyclic_partial_expectation(&m, Direction::Max)?.value;
    let ce = acyclic_conditional_expectation(&m, Direction::Max)?.value;
    println!("source: PE max {pe}, CE max {ce}");

    for theta in [Rat::new(1, 2), Rat::one(), Rat::new(3, 2)] {
        let r = reduce_pe_to_ce(&m, &theta)?;
        let v = acyclic_conditional_expectation(&r.mdp, Direction::Max)?.value;
        println!("PE > {theta}: {} | CE' = {v} vs {} ({} states)", pe > theta, r.threshold, r.mdp.n_states());

        let r = reduce_ce_to_pe_acyclic(&m, &theta)?;
        let v = acyclic_partial_expectation(&r.mdp, Direction::Max)?.value;
        println!("CE > {theta}: {} | PE' = {v} vs {} (pre-gadget {})", ce > theta, r.params.theta_plus_half_delta, r.pre_gadget);

        let r = reduce_pe_to_wlf_acyclic(&m, &theta)?;
        let v = wlf_max(&r.mdp, &LongRunSpec::from_mdp(&r.mdp))?.value;
        println!("PE > {theta}: {} | WLF' = {v} vs {}", pe > theta, r.threshold);
    }
    Ok(())
}
