//! Maximal conditional value-at-risk of the accumulated weight at the goal.
//!
//! cargo run --example cvar

use mdpsat::cvar::{cvar_dual, cvar_max, cvar_max_high_bad, cvar_of_dist, var_of_dist, TerminalDist};
use mdpsat::mdp::parse_mdp;
use mdpsat::Rat;

fn main() -> mdpsat::Result<()> {
    // a fixed outcome law first: 0 w.p. 1/4, 4 w.p. 3/4
    let d = TerminalDist::from_pairs(&[(0, Rat::new(1, 4)), (4, Rat::new(3, 4))])?;
    for p in [Rat::new(1, 8), Rat::new(1, 2), Rat::one()] {
        let (dual, t) = cvar_dual(&d, &p)?;
        println!("p={p}: VaR {} CVaR {} (dual {dual} at t={t})", var_of_dist(&d, &p)?, cvar_of_dist(&d, &p)?);
    }

    // safe pays 1, betting pays 4 or 0; small p favours safety, large p the bet
    let m = parse_mdp(include_bytes!("data/risk.json"))?;
    for p in ["1/10", "1/4", "1/3", "1/2", "9/10"] {
        let p: Rat = p.parse().expect("rational literal");
        let r = cvar_max(&m, &p)?;
        let start = r.witness.get(m.initial(), &0.into()).map(|a| m.action(m.initial(), a).name.clone());
        println!("CVaR_{p} max = {} (VaR {}, first move {:?})", r.value, r.var, start.unwrap_or_default());
    }
    let hb = cvar_max_high_bad(&m, &Rat::new(1, 4))?;
    println!("high outcomes bad, p=1/4: {}", hb.value);
    Ok(())
}
