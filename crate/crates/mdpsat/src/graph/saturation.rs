use super::{is_strongly_connected, max_reach_prob, min_expected_steps, Discipline, ReachMaxData};
use crate::error::{Error, Result};
use crate::mdp::Mdp;
use crate::rat::Rat;
use num_bigint::BigInt;
use num_traits::Zero;
use std::collections::{BTreeMap, BTreeSet};

/// Constants of the weight bound beyond which long-run-frequency schedulers may switch
/// to maximizing the probability of `!Fail U Goal`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SaturationData {
    /// Maximal weight W.
    pub w: BigInt,
    pub delta: Rat,
    pub e: Rat,
    pub k: BigInt,
    /// |S'|: states outside Goal and Fail.
    pub s_prime: usize,
    /// Copies in the disciplined product: |S'| + 1.
    pub copies: usize,
    /// Disciplined expected hitting times e_{s,t} for s, t in Goal ∪ Fail.
    pub e_pairs: BTreeMap<(usize, usize), Rat>,
    pub reach: ReachMaxData,
}

pub fn wlf_saturation_point(m: &Mdp, goal: &BTreeSet<usize>, fail: &BTreeSet<usize>) -> Result<SaturationData> {
    m.check_nonnegative()?;
    if !is_strongly_connected(m) {
        return Err(Error::NotStronglyConnected);
    }
    let gf: BTreeSet<usize> = goal.union(fail).copied().collect();
    if gf.is_empty() {
        return Err(Error::SpecMecViolation(m.id(m.initial()).into()));
    }
    let reach = max_reach_prob(m, goal, fail)?;
    let region: BTreeSet<usize> = (0..m.n_states()).filter(|s| !gf.contains(s)).collect();
    let s_prime = region.len();
    let copies = s_prime + 1;
    let d = Discipline { copies, q: &reach.witness, region: &region };
    let mut e_pairs = BTreeMap::new();
    for &s in &gf {
        for &t in &gf {
            e_pairs.insert((s, t), min_expected_steps(m, s, t, Some(&d))?);
        }
    }
    let e = e_pairs.values().max().cloned().unwrap_or_else(Rat::zero);
    let w = m.max_weight();
    let wr = Rat::from(&w);
    let k = if w.is_zero() {
        BigInt::zero()
    } else {
        let a = (&wr * &e / &reach.gap_delta).ceil();
        let b = &w * BigInt::from(copies);
        a.max(b)
    };
    Ok(SaturationData { w, delta: reach.gap_delta.clone(), e, k, s_prime, copies, e_pairs, reach })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::samples::alpha_beta_loop;
    use crate::mdp::MdpBuilder;

    #[test]
    fn loop_example_constants() {
        let m = alpha_beta_loop();
        let d = wlf_saturation_point(&m, m.goal(), m.fail()).unwrap();
        assert_eq!(d.w, BigInt::from(3));
        assert_eq!(d.delta, Rat::new(1, 4));
        assert_eq!(d.e, Rat::int(10));
        assert_eq!(d.k, BigInt::from(120));
        assert!(d.k >= &d.w * BigInt::from(d.s_prime + 1));
    }

    #[test]
    fn zero_weights_zero_bound() {
        let mut b = MdpBuilder::new();
        let s = b.state("s");
        let g = b.state("g");
        b.action(s, "a", 0, vec![(g, Rat::one())]);
        b.action(g, "a", 0, vec![(s, Rat::one())]);
        b.set_initial(s);
        b.add_goal(g);
        let m = b.build().unwrap();
        let d = wlf_saturation_point(&m, m.goal(), m.fail()).unwrap();
        assert_eq!(d.k, BigInt::zero());
        assert_eq!(d.delta, Rat::one());
    }
}
