//! Weighted long-run frequency: the long-run ratio of goal visits to accumulated weight,
//! optimized over finite weight-memory schedulers.
//!
//! cargo run --example wlf

use mdpsat::longrun::{evaluate_fm_wlf, wlf_max, LongRunSpec};
use mdpsat::mdp::parse_mdp;
use mdpsat::oracle::{brute_wlf, DEFAULT_BUDGET};

fn main() -> mdpsat::Result<()> {
    let m = parse_mdp(include_bytes!("data/loop.json"))?;
    let spec = LongRunSpec::from_ids(&m, &["rest".into()], &[])?;
    let r = wlf_max(&m, &spec)?;
    println!("wlf max = {}", r.value);
    for e in &r.mecs {
        println!("  component {:?}: gain {} with memory {} (attained: {})", m.ids_of(&e.states), e.gain, e.saturation.k, e.attained);
    }
    println!("witness re-evaluated: {}", evaluate_fm_wlf(&m, &spec, &r.witness)?);
    if let Some(s) = r.saturation() {
        let cap: u64 = s.k.to_string().parse().expect("small cap");
        println!("brute force over memory {cap}: {}", brute_wlf(&m, cap, DEFAULT_BUDGET)?.value);
    }
    Ok(())
}
