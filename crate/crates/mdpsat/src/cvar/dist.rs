use crate::error::{Error, Result};
use crate::rat::Rat;
use num_bigint::BigInt;
use std::collections::BTreeMap;

/// Finite law of an integer-valued outcome.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TerminalDist {
    pub atoms: BTreeMap<BigInt, Rat>,
}

impl TerminalDist {
    pub fn new(atoms: BTreeMap<BigInt, Rat>) -> Result<Self> {
        let total: Rat = atoms.values().sum();
        if !total.is_one() || atoms.values().any(|p| p.is_negative()) {
            return Err(Error::InvalidArgument(format!("distribution masses sum to {total}")));
        }
        let mut d = TerminalDist { atoms };
        d.atoms.retain(|_, p| !p.is_zero());
        Ok(d)
    }

    pub fn from_pairs(pairs: &[(i64, Rat)]) -> Result<Self> {
        let mut atoms = BTreeMap::new();
        for (x, p) in pairs {
            *atoms.entry(BigInt::from(*x)).or_insert_with(Rat::zero) += p;
        }
        Self::new(atoms)
    }

    pub fn point(x: impl Into<BigInt>) -> Self {
        TerminalDist { atoms: BTreeMap::from([(x.into(), Rat::one())]) }
    }

    pub fn mean(&self) -> Rat {
        self.atoms.iter().map(|(x, p)| Rat::from(x) * p).sum()
    }

    /// E(min(X - v, 0)).
    pub fn lower_shortfall(&self, v: &BigInt) -> Rat {
        self.atoms.iter().filter(|(x, _)| *x < v).map(|(x, p)| Rat::from(x - v) * p).sum()
    }

    /// E(max(X - u, 0)).
    pub fn upper_excess(&self, u: &BigInt) -> Rat {
        self.atoms.iter().filter(|(x, _)| *x > u).map(|(x, p)| Rat::from(x - u) * p).sum()
    }

    pub fn to_json(&self) -> serde_json::Value {
        self.atoms.iter().map(|(x, p)| (x.to_string(), serde_json::Value::String(p.to_string()))).collect()
    }

    pub fn negate(&self) -> Self {
        TerminalDist { atoms: self.atoms.iter().map(|(x, p)| (-x, p.clone())).collect() }
    }
}

fn check_p(p: &Rat) -> Result<()> {
    if !p.is_positive() || p > &Rat::one() {
        return Err(Error::InvalidArgument(format!("probability level {p} outside (0, 1]")));
    }
    Ok(())
}

/// Least support point whose cumulative probability exceeds `p`; the largest atom for `p = 1`.
pub fn var_of_dist(d: &TerminalDist, p: &Rat) -> Result<BigInt> {
    check_p(p)?;
    let mut acc = Rat::zero();
    for (x, q) in &d.atoms {
        acc += q;
        if &acc > p {
            return Ok(x.clone());
        }
    }
    d.atoms.keys().next_back().cloned().ok_or_else(|| Error::InvalidArgument("empty distribution".into()))
}

/// Expectation over the `p` worst (lowest) outcome mass.
pub fn cvar_of_dist(d: &TerminalDist, p: &Rat) -> Result<Rat> {
    let v = var_of_dist(d, p)?;
    let below: Rat = d.atoms.range(..v.clone()).map(|(_, q)| q).sum();
    let below_mass: Rat = d.atoms.range(..v.clone()).map(|(x, q)| Rat::from(x) * q).sum();
    Ok((below_mass + (p - &below) * Rat::from(&v)) / p)
}

/// `max_v [v + E(min(X - v, 0)) / p]` over the integers, attained on the support.
pub fn cvar_dual(d: &TerminalDist, p: &Rat) -> Result<(Rat, BigInt)> {
    check_p(p)?;
    let mut best: Option<(Rat, BigInt)> = None;
    for v in d.atoms.keys() {
        let g = Rat::from(v) + d.lower_shortfall(v) / p;
        if best.as_ref().is_none_or(|(b, _)| &g > b) {
            best = Some((g, v.clone()));
        }
    }
    best.ok_or_else(|| Error::InvalidArgument("empty distribution".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn half_half() -> TerminalDist {
        TerminalDist::from_pairs(&[(0, Rat::new(1, 2)), (10, Rat::new(1, 2))]).unwrap()
    }

    #[test]
    fn point_mass() {
        let d = TerminalDist::point(7);
        assert_eq!(var_of_dist(&d, &Rat::new(1, 2)).unwrap(), BigInt::from(7));
        assert_eq!(cvar_of_dist(&d, &Rat::new(1, 3)).unwrap(), Rat::int(7));
    }

    #[test]
    fn two_atoms() {
        let h = Rat::new(1, 2);
        assert_eq!(var_of_dist(&half_half(), &h).unwrap(), BigInt::from(10));
        assert_eq!(cvar_of_dist(&half_half(), &h).unwrap(), Rat::zero());
        let d = TerminalDist::from_pairs(&[(0, Rat::new(1, 4)), (10, Rat::new(3, 4))]).unwrap();
        assert_eq!(var_of_dist(&d, &h).unwrap(), BigInt::from(10));
        assert_eq!(cvar_of_dist(&d, &h).unwrap(), Rat::int(5));
    }

    #[test]
    fn full_mass_is_mean() {
        assert_eq!(cvar_of_dist(&half_half(), &Rat::one()).unwrap(), Rat::int(5));
    }

    #[test]
    fn rejects_bad_level() {
        assert!(cvar_of_dist(&half_half(), &Rat::zero()).is_err());
        assert!(TerminalDist::from_pairs(&[(0, Rat::new(1, 3))]).is_err());
    }

    fn dist_strategy() -> impl Strategy<Value = TerminalDist> {
        prop::collection::vec((-20i64..20, 1i64..12), 1..6).prop_map(|xs| {
            let total: i64 = xs.iter().map(|(_, w)| w).sum();
            TerminalDist::from_pairs(&xs.iter().map(|(x, w)| (*x, Rat::new(*w, total))).collect::<Vec<_>>()).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]
        #[test]
        fn dual_matches_formula(d in dist_strategy(), pn in 1i64..4) {
            let p = Rat::new(pn, 4);
            let (g, _) = cvar_dual(&d, &p).unwrap();
            prop_assert_eq!(g, cvar_of_dist(&d, &p).unwrap());
        }
    }
}
