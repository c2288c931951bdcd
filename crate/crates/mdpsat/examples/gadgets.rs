//! Hardness gadgets: a linear recurrence is encoded into an MDP whose optimal value
//! crosses a computable threshold exactly when the recurrence has a negative term.
//!
//! cargo run --example gadgets

use mdpsat::gadget::{
    build_pe_gadget, gadget_d_sequence, rescale_lrs, series_bounds, threshold_cvar, threshold_pe, threshold_wlf,
    window_check, Lrs, Regime,
};
use mdpsat::Rat;

fn main() -> mdpsat::Result<()> {
    let osc = Lrs::from_ints(&[1, -1], &[0, 1])?;
    let r = rescale_lrs(&osc, Regime::Pe)?;
    println!("rescaled by lambda={} kappa={}: alphas {:?}", r.lambda, r.kappa, r.lrs.alphas.iter().map(Rat::to_string).collect::<Vec<_>>());

    // the gadget's value difference between its two choices replays the sequence
    let g = build_pe_gadget(&r.lrs)?;
    let d = gadget_d_sequence(&g, 8)?;
    let u = r.lrs.terms(8);
    for (n, (dn, un)) in d.iter().zip(&u).enumerate() {
        println!("  n={n}: d={dn} u={un}");
    }
    let w = window_check(&g, 4)?;
    println!("window at level 4: canonical {:.6} deviation {:.6} beaten={}", w.canonical.to_f64(), w.deviation.to_f64(), w.beaten());
    let sb = series_bounds(&g, 40)?;
    println!("series in [{:.12}, {:.12}]", sb.lower.to_f64(), sb.upper.to_f64());

    for (name, rep) in [("pe", threshold_pe(&r)?), ("wlf", threshold_wlf(&r)?)] {
        println!("{name}: {} states, threshold {}", rep.gadget.mdp.n_states(), rep.theta);
    }
    let rc = rescale_lrs(&osc, Regime::Cvar)?;
    let rep = threshold_cvar(&rc)?;
    let n = rep.prefix.as_ref().map_or(0, |m| m.n_states());
    println!("cvar: prefix instance with {n} states, threshold {}", rep.theta);
    Ok(())
}
