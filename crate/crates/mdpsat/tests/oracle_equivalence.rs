//! Solver against brute-force enumeration on seeded random corpora.

use mdpsat::cvar::cvar_max;
use mdpsat::graph::Direction;
use mdpsat::longrun::{wlf_max, LongRunSpec};
use mdpsat::oracle::{
    brute_ce, brute_cvar, brute_pe, brute_sspp, brute_wlf, corpus, seed_from_env, CorpusParams, SchedulerSpace, Shape,
};
use mdpsat::sspp::{acyclic_conditional_expectation, acyclic_partial_expectation, classical_sspp};
use mdpsat::{Error, Rat};
use num_traits::ToPrimitive;

const BUDGET: usize = 5000;

#[test]
fn classical_sspp_matches_memoryless_enumeration() {
    for m in corpus(seed_from_env() ^ 11, 25, &CorpusParams::new(Shape::GoalAlmostSure, 5, 3, 3)) {
        for dir in [Direction::Max, Direction::Min] {
            let s = classical_sspp(&m, dir).unwrap();
            let b = brute_sspp(&m, dir, BUDGET).unwrap();
            assert_eq!(s.value, b.value, "{dir:?}");
        }
    }
}

#[test]
fn acyclic_expectations_match_history_enumeration() {
    let space = SchedulerSpace::AcyclicHistory;
    for m in corpus(seed_from_env() ^ 12, 40, &CorpusParams::new(Shape::Acyclic, 5, 2, 3)) {
        for dir in [Direction::Max, Direction::Min] {
            let Ok(b) = brute_pe(&m, space, dir, BUDGET) else { continue };
            assert_eq!(acyclic_partial_expectation(&m, dir).unwrap().value, b.value);
            match (acyclic_conditional_expectation(&m, dir), brute_ce(&m, space, dir, BUDGET)) {
                (Ok(s), Ok(b)) => assert_eq!(s.value, b.value, "{dir:?}"),
                // min needs the goal under every scheduler; max only needs it reachable
                (Err(Error::GoalUnreachable), _) => {}
                (s, b) => panic!("{dir:?}: {s:?} vs {b:?}"),
            }
        }
    }
}

#[test]
fn cvar_matches_weight_memory_enumeration() {
    let ms = corpus(seed_from_env() ^ 13, 15, &CorpusParams::new(Shape::GoalAlmostSure, 4, 2, 2));
    let mut checked = 0;
    for m in &ms {
        for p in [Rat::new(1, 5), Rat::new(1, 2), Rat::new(4, 5)] {
            let Ok(b) = brute_cvar(m, &p, None, BUDGET) else { continue };
            assert_eq!(cvar_max(m, &p).unwrap().value, b.value, "p = {p}");
            checked += 1;
        }
    }
    assert!(checked >= 20, "only {checked} instances within budget");
}

#[test]
fn wlf_matches_weight_memory_enumeration() {
    let ms = corpus(seed_from_env() ^ 14, 15, &CorpusParams::new(Shape::StronglyConnected, 4, 2, 2));
    let mut checked = 0;
    for m in &ms {
        match wlf_max(m, &LongRunSpec::from_mdp(m)) {
            Ok(r) => {
                let k = r.saturation().unwrap().k.to_u64().unwrap();
                if k > 40 {
                    continue;
                }
                let Ok(b) = brute_wlf(m, k, BUDGET) else { continue };
                assert_eq!(r.value, b.value);
                checked += 1;
            }
            Err(Error::UnattainedSupremum { supremum, .. }) => {
                let b = brute_wlf(m, 6, BUDGET).unwrap();
                assert!(b.value < supremum);
            }
            Err(e) => panic!("{e}"),
        }
    }
    assert!(checked >= 5, "only {checked} models within budget");
}
