//! Qualitative frequency-until: does some scheduler make `a U b` hold with long-run
//! frequency above theta almost surely?
//!
//! cargo run --example fltl

use mdpsat::longrun::fltl_qualitative;
use mdpsat::mdp::parse_mdp;
use mdpsat::Rat;

fn main() -> mdpsat::Result<()> {
    let m = parse_mdp(include_bytes!("data/loop.json"))?;
    for theta in ["0", "1/2", "3/4", "1"] {
        let theta: Rat = theta.parse().expect("rational literal");
        let r = fltl_qualitative(&m, "a", "b", &theta)?;
        let gains: Vec<String> = r.per_mec_gain.iter().map(|(s, g)| format!("{:?}: {g}", m.ids_of(s))).collect();
        println!("theta {theta}: holds={} gains [{}]", r.holds, gains.join(", "));
    }
    Ok(())
}
