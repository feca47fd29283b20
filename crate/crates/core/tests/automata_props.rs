mod common;

use ltl_workbench::automata::{
    build_dfa_finitary, classify, dump_dfa, dump_dra, ltl_to_dra, ltl_to_nba, CycleStructure, Limits,
};
use ltl_workbench::ltl::{parse, Alphabet, Ltl};
use ltl_workbench::witness::{find_uncommittable, WitnessKind, CHECKED_REPETITIONS};
use ltl_workbench::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn formula(seed: u64) -> Ltl {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ltl::new(Alphabet::new(["a", "b"]).unwrap(), common::random_formula(&mut rng, 2, 3))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn three_way_agreement(seed in any::<u64>(), words in 0u64..u64::MAX) {
        let f = formula(seed);
        let limits = Limits::default();
        let nba = ltl_to_nba(&f.to_nnf(), &limits).unwrap();
        let dra = ltl_to_dra(&f, &limits).unwrap();
        let dfa = build_dfa_finitary(&f, &limits).ok();
        let mut rng = ChaCha8Rng::seed_from_u64(words);
        for _ in 0..30 {
            let w = common::random_lasso(&mut rng, 4);
            let truth = f.evaluate_lasso(&w).unwrap();
            prop_assert_eq!(nba.accepts_lasso(&w), truth);
            prop_assert_eq!(dra.accepts_lasso(&w), truth);
            if let Some((d, h)) = &dfa {
                prop_assert_eq!(d.verdict(&w.take(*h)), Some(truth));
            }
        }
    }

    #[test]
    fn classification_is_consistent(seed in any::<u64>()) {
        let f = formula(seed);
        let r = classify(&f, &Limits::default()).unwrap();
        prop_assert_eq!(r.in_finitary, r.in_guarantee && r.in_safety);
        prop_assert_eq!(r.horizon.is_some(), r.in_finitary);
        let negated = Ltl::new(f.alphabet.clone(), f.root.clone().not());
        let rn = classify(&negated, &Limits::default()).unwrap();
        prop_assert_eq!(r.in_guarantee, rn.in_safety);
        prop_assert_eq!(r.in_safety, rn.in_guarantee);
    }

    #[test]
    fn dfa_is_acyclic_outside_sinks(seed in any::<u64>()) {
        let f = formula(seed);
        if let Ok((d, h)) = build_dfa_finitary(&f, &Limits::default()) {
            for bits in 0..d.num_letters.pow(h as u32) {
                let word: Vec<_> = (0..h)
                    .map(|i| ltl_workbench::ltl::Letter(((bits / d.num_letters.pow(i as u32)) % d.num_letters) as u32))
                    .collect();
                prop_assert!(d.is_sink(d.run(&word)));
            }
        }
    }

    #[test]
    fn witness_kind_rules(seed in any::<u64>()) {
        let f = formula(seed);
        let r = classify(&f, &Limits::default()).unwrap();
        match find_uncommittable(&f, &Limits::default()) {
            Err(Error::FinitaryFormula) => prop_assert!(r.in_finitary),
            Err(e) => prop_assert!(false, "unexpected error {e}"),
            Ok(w) => {
                prop_assert!(!r.in_finitary);
                w.check(&f).unwrap();
                let expect = if r.in_guarantee {
                    WitnessKind::UncommittableRejecting
                } else {
                    WitnessKind::UncommittableAccepting
                };
                prop_assert_eq!(w.kind, expect);
                for i in 0..=CHECKED_REPETITIONS {
                    let stay = f.evaluate_lasso(&w.staying()).unwrap();
                    prop_assert_ne!(stay, f.evaluate_lasso(&w.leaving(i)).unwrap());
                }
            }
        }
    }
}

#[test]
fn hierarchy_examples() {
    let al = Alphabet::new(["a"]).unwrap();
    let c = |s: &str| classify(&parse(s, &al).unwrap(), &Limits::default()).unwrap();
    let r = c("a & X a");
    assert!(r.in_guarantee && r.in_safety && r.in_finitary);
    assert_eq!(r.horizon, Some(2));
    let r = c("F a");
    assert!(r.in_guarantee && !r.in_safety);
    let r = c("G a");
    assert!(!r.in_guarantee && r.in_safety);
    for s in ["G F a", "F G a"] {
        let r = c(s);
        assert!(!r.in_guarantee && !r.in_safety && !r.in_finitary, "{s}");
    }
}

#[test]
fn cycle_structure_of_recurrence() {
    let al = Alphabet::new(["a"]).unwrap();
    let dra = ltl_to_dra(&parse("G F a", &al).unwrap(), &Limits::default()).unwrap();
    let cs = CycleStructure::new(&dra);
    assert!(!cs.accepting_components.is_empty());
    assert!(!cs.rejecting_components.is_empty());
    assert!(!cs.in_guarantee() && !cs.in_safety());
}

#[test]
fn state_caps_raise() {
    let al = Alphabet::new(["a", "b"]).unwrap();
    let f = parse("G F a & F G b", &al).unwrap();
    let tight = Limits {
        dra_states: 2,
        ..Limits::default()
    };
    assert!(matches!(ltl_to_dra(&f, &tight), Err(Error::AutomatonTooLarge { .. })));
    let tight = Limits {
        nba_states: 1,
        ..Limits::default()
    };
    assert!(matches!(ltl_to_nba(&f, &tight), Err(Error::AutomatonTooLarge { .. })));
    let g = parse("a & X b & X X a", &al).unwrap();
    let tight = Limits {
        dfa_states: 2,
        ..Limits::default()
    };
    assert!(matches!(build_dfa_finitary(&g, &tight), Err(Error::AutomatonTooLarge { .. })));
}

#[test]
fn dump_format() {
    let al = Alphabet::new(["a"]).unwrap();
    let f = parse("F a", &al).unwrap();
    let text = dump_dra(&ltl_to_dra(&f, &Limits::default()).unwrap());
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("dra\t2\t2"));
    assert!(text.lines().any(|l| l.starts_with("pair\t0\t")));
    let transitions = text.lines().filter(|l| l.split('\t').count() == 3 && l.as_bytes()[0].is_ascii_digit());
    assert_eq!(transitions.count(), 4);
    let g = parse("a & X a", &al).unwrap();
    let d = dump_dfa(&build_dfa_finitary(&g, &Limits::default()).unwrap().0);
    assert!(d.starts_with("dfa\t4\t2\n"));
}
