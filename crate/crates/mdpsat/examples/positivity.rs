//! Positivity by brute force: the first index where a linear recurrence goes negative.
//!
//! cargo run --example positivity

use mdpsat::gadget::{positivity_bruteforce, Lrs};

fn main() -> mdpsat::Result<()> {
    let osc = Lrs::parse(include_bytes!("data/osc.json"))?;
    let terms: Vec<String> = osc.terms(8).iter().map(|t| t.to_string()).collect();
    println!("u = {} ...", terms.join(", "));
    println!("first negative: {:?}", positivity_bruteforce(&osc, 20));
    let fib = Lrs::from_ints(&[1, 1], &[0, 1])?;
    println!("fibonacci first negative within 50: {:?}", positivity_bruteforce(&fib, 50));
    Ok(())
}
