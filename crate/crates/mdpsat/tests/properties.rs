use mdpsat::cvar::{cvar_dual, cvar_max, cvar_of_dist, var_of_dist, TerminalDist};
use mdpsat::gadget::{build_pe_gadget, gadget_d_sequence, rescale_lrs, Lrs, Regime};
use mdpsat::graph::Direction;
use mdpsat::longrun::{evaluate_fm_wlf, wlf_max, LongRunSpec};
use mdpsat::mdp::{parse_mdp, serialize_mdp, MemorylessPolicy};
use mdpsat::oracle::{lower_tail_mean, random_mdp, terminal_law, CorpusParams, Shape};
use mdpsat::sspp::{acyclic_conditional_expectation, acyclic_partial_expectation, evaluate_pe};
use mdpsat::{Error, Mdp, Rat};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn model(seed: u64, shape: Shape, n: usize) -> Option<Mdp> {
    random_mdp(&mut ChaCha8Rng::seed_from_u64(seed), &CorpusParams::new(shape, n, 2, 3))
}

fn level() -> impl Strategy<Value = Rat> {
    (1i64..=12).prop_map(|n| Rat::new(n, 12))
}

fn dist() -> impl Strategy<Value = TerminalDist> {
    prop::collection::vec((-5i64..=5, 1i64..=6), 1..6).prop_map(|atoms| {
        let total: i64 = atoms.iter().map(|a| a.1).sum();
        let pairs: Vec<(i64, Rat)> = atoms.iter().map(|&(x, w)| (x, Rat::new(w, total))).collect();
        TerminalDist::from_pairs(&pairs).unwrap()
    })
}

/// A policy picking action `pick[s] mod |Act(s)|`.
fn policy(m: &Mdp, pick: &[usize]) -> MemorylessPolicy {
    MemorylessPolicy::new((0..m.n_states()).map(|s| pick[s % pick.len()] % m.actions(s).len()).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn serialization_round_trips(seed in any::<u64>()) {
        if let Some(m) = model(seed, Shape::Acyclic, 6) {
            let bytes = serialize_mdp(&m);
            let back = parse_mdp(&bytes).unwrap();
            prop_assert_eq!(serialize_mdp(&back), bytes);
        }
    }

    #[test]
    fn cvar_of_a_law(d in dist(), p in level(), q in level()) {
        let c = cvar_of_dist(&d, &p).unwrap();
        prop_assert_eq!(&cvar_dual(&d, &p).unwrap().0, &c);
        // the tail mean never exceeds the mean and grows with the level
        prop_assert!(c <= d.mean());
        if p <= q {
            prop_assert!(c <= cvar_of_dist(&d, &q).unwrap());
        }
        prop_assert!(Rat::from_big(var_of_dist(&d, &p).unwrap()) >= c);
        if p.is_one() {
            prop_assert_eq!(c, d.mean());
        }
    }

    #[test]
    fn acyclic_optima_bound_every_memoryless_scheduler(seed in any::<u64>(), pick in prop::collection::vec(0usize..4, 1..8)) {
        if let Some(m) = model(seed, Shape::Acyclic, 5) {
            let v = evaluate_pe(&m, &policy(&m, &pick)).unwrap();
            prop_assert!(acyclic_partial_expectation(&m, Direction::Min).unwrap().value <= v.clone());
            prop_assert!(acyclic_partial_expectation(&m, Direction::Max).unwrap().value >= v);
            if let (Ok(lo), Ok(hi)) = (
                acyclic_conditional_expectation(&m, Direction::Min),
                acyclic_conditional_expectation(&m, Direction::Max),
            ) {
                prop_assert!(lo.value <= hi.value);
            }
        }
    }

    #[test]
    fn cvar_max_dominates_memoryless_schedulers(seed in any::<u64>(), pick in prop::collection::vec(0usize..4, 1..6), p in level()) {
        if p.is_one() {
            return Ok(());
        }
        if let Some(m) = model(seed, Shape::GoalAlmostSure, 4) {
            let best = cvar_max(&m, &p).unwrap().value;
            // positive cycles give an infinite law; nothing to compare then
            if let Ok(law) = terminal_law(&m, &policy(&m, &pick)) {
                prop_assert!(best >= lower_tail_mean(&law, &p).unwrap());
            }
        }
    }

    #[test]
    fn wlf_max_dominates_memoryless_schedulers(seed in any::<u64>(), pick in prop::collection::vec(0usize..4, 1..6)) {
        if let Some(m) = model(seed, Shape::StronglyConnected, 4) {
            let spec = LongRunSpec::from_mdp(&m);
            let best = match wlf_max(&m, &spec) {
                Ok(r) => {
                    prop_assert_eq!(evaluate_fm_wlf(&m, &spec, &r.witness).unwrap(), r.value.clone());
                    r.value
                }
                Err(Error::UnattainedSupremum { supremum, .. }) => supremum,
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            };
            if let Ok(v) = evaluate_fm_wlf(&m, &spec, &policy(&m, &pick)) {
                prop_assert!(best >= v);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    // the value gap of the PE gadget replays the rescaled sequence
    #[test]
    fn pe_gadget_replays_sequence(a1 in -3i64..=3, a2 in -3i64..=3, b0 in 0i64..=3, b1 in 0i64..=3) {
        let l = Lrs::from_ints(&[a1, a2], &[b0, b1]).unwrap();
        let r = rescale_lrs(&l, Regime::Pe).unwrap();
        let g = build_pe_gadget(&r.lrs).unwrap();
        let d = gadget_d_sequence(&g, 8).unwrap();
        let u = l.terms(8);
        for n in 0..8 {
            prop_assert_eq!(&d[n], &r.map_term(n, &u[n]));
        }
    }
}
