//! Long-run probability of an automaton property: the weighted gadget is unfolded into
//! unit-weight steps and watched by a fixed automaton.
//!
//! cargo run --example lrp

use mdpsat::gadget::{build_lrp_instance, rescale_lrs, Lifted, Lrs, Regime};
use mdpsat::longrun::{evaluate_fm_lrp_nfa, evaluate_fm_wlf, LongRunSpec};
use mdpsat::mdp::{MemorylessPolicy, WeightMemoryScheduler};

fn main() -> mdpsat::Result<()> {
    let l = rescale_lrs(&Lrs::from_ints(&[1, -1], &[0, 1])?, Regime::Pe)?.lrs;
    let inst = build_lrp_instance(&l)?;
    println!(
        "weighted model {} states, unit model {} states, automaton {} states",
        inst.k_model.n_states(),
        inst.l_model.n_states(),
        inst.nfa.states.len()
    );
    let s = WeightMemoryScheduler::memoryless(&MemorylessPolicy::first_actions(&inst.k_model), true);
    let wlf = evaluate_fm_wlf(&inst.k_model, &LongRunSpec::from_mdp(&inst.k_model), &s)?;
    let lifted = Lifted { inner: &s, k_model: &inst.k_model, l_to_k: &inst.l_to_k };
    let lp = evaluate_fm_lrp_nfa(&inst.l_model, &inst.nfa, &lifted)?;
    println!("first-action scheduler: WLF {wlf}, long-run probability {lp}");
    Ok(())
}
