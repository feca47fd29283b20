mod common;

use ltl_workbench::family::simple_pair;
use ltl_workbench::learn::{learn_finitary, train, train_product, Algo, Hyper};
use ltl_workbench::ltl::{parse, Alphabet};
use ltl_workbench::probcheck::{optimal_value, policy_value};
use ltl_workbench::schemes::{build_product, Scheme, SchemeParams};
use ltl_workbench::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn algo_strategy() -> impl Strategy<Value = Algo> {
    (0usize..3).prop_map(|i| Algo::ALL[i])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn training_consumes_the_budget(algo in algo_strategy(), scheme in 0usize..5, budget in 0u64..3000, seed in any::<u64>()) {
        let pair = simple_pair(0.2).unwrap();
        let prod = build_product(Scheme::ALL[scheme], &pair.m1, &pair.labeling, &pair.reach, &SchemeParams::default()).unwrap();
        let h = Hyper::defaults(algo);
        let out = train_product(algo, &prod, &h, budget, seed);
        prop_assert_eq!(out.samples, budget);
        prop_assert_eq!(out.rows.len(), prod.num_states());
        for row in &out.rows {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
        prop_assert_eq!(&out, &train_product(algo, &prod, &h, budget, seed));
    }

    #[test]
    fn finitary_certificate_is_consistent(seed in any::<u64>(), eps in 0.05f64..0.5, delta in 0.01f64..0.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let al = Alphabet::new(["a", "b"]).unwrap();
        let mdp = common::random_mdp(&mut rng, 4, 2);
        let lab = common::random_labeling(&mut rng, &al, 4);
        let f = parse("a & X X b", &al).unwrap();
        let (pol, cert) = learn_finitary(&mdp, &lab, &f, eps, delta, seed).unwrap();
        prop_assert_eq!(cert.horizon, 3);
        let per_step = cert.samples_per_pair * 2 * cert.horizon as u64;
        prop_assert_eq!(cert.samples_used % per_step, 0);
        let states = cert.samples_used / per_step;
        prop_assert!(states >= 1 && states as usize <= 4 * 8);
        let h = cert.horizon as f64;
        let m = (2.0 * h * h / (eps * eps) * (4.0 * states as f64 * 2.0 * h / delta).ln()).ceil() as u64;
        prop_assert_eq!(cert.samples_per_pair, m);
        let (again, cert2) = learn_finitary(&mdp, &lab, &f, eps, delta, seed).unwrap();
        prop_assert_eq!(pol, again);
        prop_assert_eq!(cert, cert2);
    }
}

#[test]
fn finitary_rejects_bad_tolerances_and_formulas() {
    let pair = simple_pair(0.5).unwrap();
    let al = pair.labeling.alphabet.clone();
    let f = parse("h & X h", &al).unwrap();
    for (e, d) in [(0.0, 0.1), (-1.0, 0.1), (0.1, 0.0), (0.1, 1.0)] {
        assert!(matches!(
            learn_finitary(&pair.m1, &pair.labeling, &f, e, d, 0),
            Err(Error::InvalidTolerance(_))
        ));
    }
    assert!(matches!(
        learn_finitary(&pair.m1, &pair.labeling, &pair.reach, 0.1, 0.1, 0),
        Err(Error::NotFinitary)
    ));
}

#[test]
fn finitary_learner_is_near_optimal() {
    let al = Alphabet::new(["a", "b"]).unwrap();
    let f = parse("a & X X b", &al).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut good = 0;
    let trials = 30;
    for t in 0..trials {
        let mdp = common::random_mdp(&mut rng, 5, 2);
        let lab = common::random_labeling(&mut rng, &al, 5);
        let (pol, _) = learn_finitary(&mdp, &lab, &f, 0.1, 0.1, t).unwrap();
        let v = policy_value(&mdp, &lab, &f, &pol).unwrap().value;
        let best = optimal_value(&mdp, &lab, &f).unwrap().value;
        assert!(v <= best + 1e-9);
        if v >= best - 0.1 {
            good += 1;
        }
    }
    assert!(good >= trials - 3, "{good}/{trials}");
}

#[test]
fn q_learning_solves_the_easier_pair() {
    let pair = simple_pair(0.1).unwrap();
    let prod =
        build_product(Scheme::MultiDiscount, &pair.m1, &pair.labeling, &pair.reach, &SchemeParams::default()).unwrap();
    let h = Hyper::defaults(Algo::Q);
    let good = (0..100)
        .filter(|&seed| {
            let pol = train(Algo::Q, &prod, &h, 100_000, seed);
            policy_value(&pair.m1, &pair.labeling, &pair.reach, &pol).unwrap().value >= 0.9
        })
        .count();
    assert!(good >= 90, "{good}/100");
}

#[test]
fn hyper_validation() {
    let mut h = Hyper::defaults(Algo::Sarsa);
    h.explore_end = 0.5;
    h.explore_start = 0.2;
    assert!(h.validate().is_err());
    let mut h = Hyper::defaults(Algo::Q);
    h.reset_every = 0;
    assert!(h.validate().is_err());
}
