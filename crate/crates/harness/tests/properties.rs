use std::collections::BTreeSet;

use proptest::prelude::*;

use wlrw_core::analysis::{is_linear, is_wl};
use wlrw_core::transform::{psi, xi_prime};
use wlrw_core::{Predicate, Program, Renaming};
use wlrw_harness::{
    check_rewriting, enumerate_datasets, random_program, replay, CanonicalDatasets, Filter, GenConfig, Strategy as Search,
};

const FILTERS: [Filter; 4] = [Filter::Any, Filter::Datalog, Filter::Linear, Filter::Wl];

fn small() -> Search {
    Search::Exhaustive {
        max_constants: 2,
        max_facts: 3,
    }
}

fn user_preds(p: &Program) -> BTreeSet<Predicate> {
    p.predicates().into_iter().filter(|q| !q.is_builtin()).collect()
}

fn signature() -> impl Strategy<Value = BTreeSet<Predicate>> {
    proptest::collection::vec(0..=2usize, 1..=3).prop_map(|arities| {
        arities
            .iter()
            .enumerate()
            .map(|(i, &k)| Predicate::user(&format!("p{i}"), k))
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generation_is_deterministic_and_filtered(seed in 0u64..10_000, f in 0..FILTERS.len()) {
        let cfg = GenConfig::default().with_seed(seed);
        let p = random_program(&cfg, FILTERS[f]).expect("generator");
        prop_assert_eq!(&random_program(&cfg, FILTERS[f]).expect("generator"), &p);
        match FILTERS[f] {
            Filter::Any => {}
            Filter::Datalog => prop_assert!(p.is_datalog()),
            Filter::Linear => prop_assert!(is_linear(&p).holds),
            Filter::Wl => prop_assert!(is_wl(&p).holds),
        }
    }

    #[test]
    fn orbit_sizes_sum_to_the_plain_count(preds in signature(), facts in 0..=3usize, constants in 1..=3usize) {
        let plain = enumerate_datasets(&preds, facts, constants).count() as u128;
        let canonical = CanonicalDatasets::new(&preds, facts, constants, &BTreeSet::new());
        let covered: u128 = canonical.map(|(_, orbit)| orbit as u128).sum();
        prop_assert_eq!(covered, plain);
    }

    #[test]
    fn every_program_is_a_rewriting_of_itself(seed in 0u64..10_000) {
        let p = random_program(&GenConfig::default().with_seed(seed), Filter::Any).expect("generator");
        let report = check_rewriting(&p, &p, &Renaming::identity(), &user_preds(&p), &small());
        prop_assert!(report.passed(), "{:?}", report.counterexample);
    }

    #[test]
    fn counterexamples_replay(seed in 0u64..10_000) {
        let p = random_program(&GenConfig::default().with_seed(seed), Filter::Datalog).expect("generator");
        let mut rules = p.rules().to_vec();
        rules.pop();
        let q = Program::derived(rules);
        let s = user_preds(&p);
        let report = check_rewriting(&p, &q, &Renaming::identity(), &s, &small());
        if let Some(cx) = &report.counterexample {
            prop_assert!(replay(&p, &q, &Renaming::identity(), &s, cx));
        }
    }

    #[test]
    fn xi_prime_rewrites_weakly_linear_programs(seed in 0u64..10_000) {
        let p = random_program(&GenConfig::default().with_seed(seed), Filter::Wl).expect("generator");
        let out = xi_prime(&p).expect("WL program");
        prop_assert!(out.program.is_datalog());
        let report = check_rewriting(&p, &out.program, &Renaming::identity(), &user_preds(&p), &small());
        prop_assert!(report.passed(), "{:?}", report.counterexample);
    }

    #[test]
    fn psi_preserves_datalog_programs(seed in 0u64..10_000) {
        let p = random_program(&GenConfig::default().with_seed(seed), Filter::Datalog).expect("generator");
        let (out, theta) = psi(&p).expect("datalog program");
        prop_assert!(is_linear(&out.program).holds);
        let report = check_rewriting(&p, &out.program, &theta, &user_preds(&p), &small());
        prop_assert!(report.passed(), "{:?}", report.counterexample);
    }
}
