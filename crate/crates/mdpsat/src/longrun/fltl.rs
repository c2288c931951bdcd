use super::wlf::mec_gains;
use crate::error::Result;
use crate::graph::{mask, Sys};
use crate::mdp::{Mdp, MdpBuilder};
use crate::rat::Rat;
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FltlResult {
    pub holds: bool,
    /// Maximal unit-weight frequency of `a U b` per maximal end component (a supremum
    /// where no finite-memory scheduler attains it).
    pub per_mec_gain: Vec<(BTreeSet<usize>, Rat)>,
}

fn unit_weights(m: &Mdp, a: &str, b: &str) -> Result<Mdp> {
    let mut bld = MdpBuilder::new();
    for s in 0..m.n_states() {
        bld.state(m.id(s).to_string());
        for l in m.labels(s) {
            bld.add_label(s, l);
        }
    }
    for s in 0..m.n_states() {
        for act in m.actions(s) {
            bld.action(s, act.name.clone(), 1, act.transitions.iter().map(|t| (t.to, t.prob.clone())).collect());
        }
        if m.has_label(s, b) {
            bld.add_goal(s);
        } else if !m.has_label(s, a) {
            bld.add_fail(s);
        }
    }
    bld.set_initial(m.initial());
    bld.build()
}

/// Whether some scheduler makes the frequency of positions satisfying `a U b` exceed
/// `theta` almost surely (inferior limit).
pub fn fltl_qualitative(m: &Mdp, a: &str, b: &str, theta: &Rat) -> Result<FltlResult> {
    let u = unit_weights(m, a, b)?;
    let per_mec_gain = mec_gains(&u)?;
    let passing: Vec<usize> =
        per_mec_gain.iter().filter(|(_, g)| g > theta).flat_map(|(st, _)| st.iter().copied()).collect();
    let n = u.n_states();
    let win = Sys::from_mdp(&u).prob1_max(&mask(n, passing), &vec![false; n]);
    Ok(FltlResult { holds: win[u.initial()], per_mec_gain })
}
