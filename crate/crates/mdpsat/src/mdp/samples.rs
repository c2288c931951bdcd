//! Small hand-built models used by tests and examples.

use super::{Mdp, MdpBuilder};
use crate::rat::Rat;

/// Four states: `s_init` chooses between `alpha` (+3; 1/4 to `goal1`, 1/4 to `fail`,
/// 1/2 back) and `beta` (+2; surely to `goal2`). The three other states return with `tau` (+0).
pub fn alpha_beta_loop() -> Mdp {
    let mut b = MdpBuilder::new();
    let s = b.state("s_init");
    let g1 = b.state("goal1");
    let g2 = b.state("goal2");
    let f = b.state("fail");
    b.action(s, "alpha", 3, vec![(g1, Rat::new(1, 4)), (s, Rat::new(1, 2)), (f, Rat::new(1, 4))]);
    b.action(s, "beta", 2, vec![(g2, Rat::one())]);
    for x in [g1, g2, f] {
        b.action(x, "tau", 0, vec![(s, Rat::one())]);
    }
    b.set_initial(s);
    b.add_goal(g1);
    b.add_goal(g2);
    b.add_fail(f);
    b.build().expect("valid sample")
}

/// Two-state cycle labeled `{a}` and `{b}`.
pub fn alternating_ab() -> Mdp {
    let mut b = MdpBuilder::new();
    let x = b.labeled("x", &["a"]);
    let y = b.labeled("y", &["b"]);
    b.action(x, "go", 1, vec![(y, Rat::one())]);
    b.action(y, "go", 1, vec![(x, Rat::one())]);
    b.set_initial(x);
    b.build().expect("valid sample")
}
