mod common;

use polyblind::decide::{
    architecture_of, check_permutable, count_architecture, count_architecture_recursive, count_split, decompose,
    enumerate_independent, sum_dependent, sum_independent, PermutabilityVerdict,
};
use polyblind::forest::{build_forest, Forest};
use polyblind::machines::{MachineDoc, MachineError};
use polyblind::oracle::{oracle_dep_ind_sums, oracle_eval, oracle_independent_sets};
use polyblind::{catalog, MachineKind};
use proptest::prelude::*;
use rand::Rng;

fn kind_of(i: u8) -> MachineKind {
    [MachineKind::Marble, MachineKind::Blind, MachineKind::Pebble][i as usize % 3]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn morphism_laws(seed in any::<u64>(), letters in 1usize..=3) {
        let mut rng = common::rng(seed);
        let mu = common::random_morphism(&mut rng, letters, 8);
        let monoid = mu.monoid();
        let id = monoid.identity();
        for x in monoid.elements() {
            prop_assert_eq!(monoid.mul(x, id), x);
            prop_assert_eq!(monoid.mul(id, x), x);
            prop_assert!(monoid.is_idempotent(monoid.idempotent_power(x)));
            for y in monoid.elements() {
                for z in monoid.elements() {
                    prop_assert_eq!(monoid.mul(monoid.mul(x, y), z), monoid.mul(x, monoid.mul(y, z)));
                }
            }
        }
        let u = common::random_word(&mut rng, letters, 0, 10);
        let v = common::random_word(&mut rng, letters, 0, 10);
        let uv = [u.clone(), v.clone()].concat();
        prop_assert_eq!(mu.eval(&uv), monoid.mul(mu.eval(&u), mu.eval(&v)));
        let omega = monoid.idempotence_index().omega;
        for x in monoid.elements() {
            prop_assert!(monoid.is_idempotent(monoid.power(x, omega)));
        }
        for x in mu.image() {
            prop_assert_eq!(mu.eval(mu.preimage_word(x).unwrap()), x);
        }
    }

    #[test]
    fn machines_match_definition(seed in any::<u64>(), kind in any::<u8>(), level in 1usize..=3) {
        let mut rng = common::rng(seed);
        let letters = rng.gen_range(1..=3);
        let mu = common::random_morphism(&mut rng, letters, 4);
        let m = common::random_machine(&mut rng, kind_of(kind), &mu, level);
        for _ in 0..8 {
            let w = common::random_word(&mut rng, letters, 0, 7);
            prop_assert_eq!(m.eval(&w).unwrap(), oracle_eval(&m, &w));
        }
    }

    #[test]
    fn machine_json_round_trip(seed in any::<u64>(), kind in any::<u8>(), level in 1usize..=3) {
        let mut rng = common::rng(seed);
        let letters = rng.gen_range(1..=3);
        let mu = common::random_morphism(&mut rng, letters, 4);
        let m = common::random_machine(&mut rng, kind_of(kind), &mu, level);
        let text = serde_json::to_string(&MachineDoc::from_machine(&m)).unwrap();
        let doc: MachineDoc = serde_json::from_str(&text).unwrap();
        let back = doc.build(&|name| Err(MachineError::InvalidDoc(name.to_string()))).unwrap();
        prop_assert_eq!(back.level(), m.level());
        prop_assert_eq!(back.kind(), m.kind());
        for _ in 0..8 {
            let w = common::random_word(&mut rng, letters, 0, 9);
            prop_assert_eq!(back.eval(&w).unwrap(), m.eval(&w).unwrap());
        }
    }

    #[test]
    fn forests_are_valid_and_print_back(seed in any::<u64>(), letters in 1usize..=3, len in 0usize..60) {
        let mut rng = common::rng(seed);
        let mu = common::random_morphism(&mut rng, letters, 6);
        let w = common::random_word(&mut rng, letters, len, len);
        let f = build_forest(mu.clone(), &w);
        prop_assert!(f.validate_for(&w).is_ok());
        prop_assert!(f.height() <= 3 * mu.monoid().len());
        prop_assert_eq!(f.partition_check().unwrap().len(), w.len());
        let g = Forest::parse(mu, &f.to_brackets()).unwrap();
        prop_assert_eq!(g.word(), f.word());
        prop_assert_eq!(g.height(), f.height());
    }

    #[test]
    fn independent_sets_match_oracle(seed in any::<u64>(), k in 1usize..=3) {
        let mut rng = common::rng(seed);
        let letters = rng.gen_range(1..=3);
        let mu = common::random_morphism(&mut rng, letters, 4);
        let w = common::random_word(&mut rng, letters, 0, 16);
        let f = build_forest(mu, &w);
        let mut fast = enumerate_independent(&f, k);
        let mut slow = oracle_independent_sets(&f, k);
        fast.sort();
        slow.sort();
        prop_assert_eq!(fast, slow);
    }

    #[test]
    fn dependent_and_independent_sums(seed in any::<u64>(), level in 1usize..=3) {
        let mut rng = common::rng(seed);
        let letters = rng.gen_range(1..=3);
        let mu = common::random_morphism(&mut rng, letters, 4);
        let m = common::random_machine(&mut rng, MachineKind::Marble, &mu, level);
        let w = common::random_word(&mut rng, letters, 0, 10);
        let f = build_forest(mu, &w);
        let dep = sum_dependent(&m, &f).unwrap();
        let ind = sum_independent(&m, &f).unwrap();
        prop_assert_eq!((dep, ind), oracle_dep_ind_sums(&m, &f));
        prop_assert_eq!(dep + ind, m.eval(&w).unwrap());
    }

    #[test]
    fn architecture_counts_agree(seed in any::<u64>(), k in 1usize..=2) {
        let mut rng = common::rng(seed);
        let letters = rng.gen_range(1..=2);
        let mu = common::random_morphism(&mut rng, letters, 3);
        let w = common::random_word(&mut rng, letters, 0, 24);
        let f = build_forest(mu, &w);
        let mut archs: Vec<_> = enumerate_independent(&f, k).iter().map(|t| architecture_of(&f, t).unwrap()).collect();
        archs.sort();
        archs.dedup();
        for a in &archs {
            let n = count_architecture(&f, a);
            prop_assert_eq!(count_architecture_recursive(&f, a), n);
            let split = count_split(&f, a);
            prop_assert!(split.holds(), "{:?}: {:?}", a, split);
            prop_assert_eq!(split.count, n);
        }
    }

    #[test]
    fn nb_ab_decomposes_on_long_words(seed in any::<u64>(), len in 0usize..=16) {
        let m = catalog::nb_product(MachineKind::Marble);
        let PermutabilityVerdict::Permutable(pm) = check_permutable(&m, Default::default()).unwrap() else {
            panic!("nb_ab is permutable");
        };
        let mut rng = common::rng(seed);
        let w = common::random_word(&mut rng, 2, len, len);
        let d = decompose(&pm, &w).unwrap();
        prop_assert!(d.holds());
        prop_assert_eq!(d.split.prime + d.split.second, d.split.sum);
    }
}
