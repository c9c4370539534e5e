use std::collections::BTreeSet;

use proptest::prelude::*;

use wlrw_core::analysis::{is_linear, is_wl};
use wlrw_core::engine::{evaluate_naive, Engine};
use wlrw_core::oracle::Oracle;
use wlrw_core::text::{parse_dataset, parse_program, print_dataset, print_program, program_equiv};
use wlrw_core::transform::mgu;
use wlrw_core::{Atom, Dataset, Predicate, Term};

const PREDS: [(&str, usize); 4] = [("p", 1), ("q", 2), ("r", 1), ("s", 2)];
const VARS: [&str; 3] = ["X", "Y", "Z"];
const CONSTS: [&str; 2] = ["a", "b"];

/// A body atom: predicate index and argument choices (variables only).
fn body_atom() -> impl Strategy<Value = (usize, Vec<usize>)> {
    (0..PREDS.len(), proptest::collection::vec(0..VARS.len(), 2))
}

/// A head atom: predicate index and argument choices, resolved later
/// against the body's variables so rules stay safe.
fn head_atom() -> impl Strategy<Value = (usize, Vec<usize>)> {
    (0..PREDS.len(), proptest::collection::vec(0..8usize, 2))
}

fn render(p: usize, args: impl Iterator<Item = String>) -> String {
    let (name, arity) = PREDS[p];
    format!("{name}({})", args.take(arity).collect::<Vec<_>>().join(","))
}

fn rule_text(body: &[(usize, Vec<usize>)], head: &[(usize, Vec<usize>)], bot: bool) -> String {
    let mut seen: Vec<&str> = Vec::new();
    let body: Vec<String> = body
        .iter()
        .map(|(p, args)| {
            let args: Vec<String> = args.iter().take(PREDS[*p].1).map(|&v| VARS[v].to_string()).collect();
            for a in &args {
                let v = VARS.iter().find(|x| **x == a).expect("variable");
                if !seen.contains(v) {
                    seen.push(v);
                }
            }
            render(*p, args.into_iter())
        })
        .collect();
    let term = |k: usize| -> String {
        if seen.is_empty() || k >= 6 {
            CONSTS[k % CONSTS.len()].to_string()
        } else {
            seen[k % seen.len()].to_string()
        }
    };
    let head: Vec<String> = if bot {
        vec!["bot".into()]
    } else {
        head.iter().map(|(p, args)| render(*p, args.iter().map(|&k| term(k)))).collect()
    };
    if body.is_empty() {
        format!("{}.", head.join(" | "))
    } else {
        format!("{} :- {}.", head.join(" | "), body.join(", "))
    }
}

/// Program text; `max_head` of 1 gives datalog.
fn program_text(max_head: usize) -> impl Strategy<Value = String> {
    let rule = (
        proptest::collection::vec(body_atom(), 0..=3),
        proptest::collection::vec(head_atom(), 1..=max_head),
        proptest::bool::weighted(0.1),
    );
    proptest::collection::vec(rule, 1..=6).prop_map(|rules| {
        rules
            .iter()
            .map(|(b, h, bot)| rule_text(b, h, *bot && h.len() == 1 && !b.is_empty()))
            .collect::<Vec<_>>()
            .join("\n")
    })
}

fn fact_text() -> impl Strategy<Value = String> {
    (0..PREDS.len(), proptest::collection::vec(0..CONSTS.len(), 2))
        .prop_map(|(p, args)| render(p, args.into_iter().map(|c| CONSTS[c].to_string())))
}

/// Two datasets, the first a subset of the second.
fn nested_datasets() -> impl Strategy<Value = (Dataset, Dataset)> {
    proptest::collection::vec((fact_text(), any::<bool>()), 0..=6).prop_map(|facts| {
        let small: Vec<String> = facts.iter().filter(|(_, keep)| *keep).map(|(f, _)| format!("{f}.")).collect();
        let big: Vec<String> = facts.iter().map(|(f, _)| format!("{f}.")).collect();
        let parse = |v: Vec<String>| parse_dataset(&v.join("\n")).expect("generated dataset parses");
        (parse(small), parse(big))
    })
}

fn term() -> impl Strategy<Value = Term> {
    prop_oneof![(0u32..3).prop_map(Term::Var), (0..CONSTS.len()).prop_map(|c| Term::constant(CONSTS[c]))]
}

fn atom_pair() -> impl Strategy<Value = (Atom, Atom)> {
    (proptest::collection::vec(term(), 3), proptest::collection::vec(term(), 3)).prop_map(|(x, y)| {
        let q = Predicate::user("t", 3);
        (Atom::new(q.clone(), x), Atom::new(q, y))
    })
}

/// Whether some assignment of constants to variables makes the atoms equal.
/// Fresh constants stand for "any other value", so the check is exact.
fn unifiable_by_search(a: &Atom, b: &Atom) -> bool {
    let domain: Vec<Term> = ["a", "b", "f0", "f1", "f2"].iter().map(|c| Term::constant(c)).collect();
    let n = domain.len();
    (0..n.pow(3)).any(|code| {
        let value = |v: u32| domain[(code / n.pow(v)) % n].clone();
        a.map_vars(value) == b.map_vars(value)
    })
}

fn facts(r: &wlrw_core::engine::EvalResult) -> Option<BTreeSet<Atom>> {
    (!r.is_unsat()).then(|| r.facts.clone())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn printing_then_parsing_gives_an_equivalent_program(text in program_text(3)) {
        let p = parse_program(&text).expect("generated program parses");
        let printed = print_program(&p);
        let q = parse_program(&printed).expect("printed program parses");
        prop_assert!(program_equiv(&p, &q), "{printed}");
        prop_assert_eq!(print_program(&q), printed);
    }

    #[test]
    fn printing_then_parsing_a_dataset_is_the_identity((_, d) in nested_datasets()) {
        let e = parse_dataset(&print_dataset(&d)).expect("printed dataset parses");
        prop_assert_eq!(e, d);
    }

    #[test]
    fn linear_programs_are_weakly_linear(text in program_text(3)) {
        let p = parse_program(&text).expect("generated program parses");
        if is_linear(&p).holds {
            prop_assert!(is_wl(&p).holds, "{text}");
        }
    }

    #[test]
    fn mgu_unifies_exactly_when_a_unifier_exists((a, b) in atom_pair()) {
        match mgu(&a, &b) {
            Some(s) => {
                prop_assert_eq!(s.apply_atom(&a), s.apply_atom(&b));
                prop_assert!(s.is_idempotent());
            }
            None => prop_assert!(!unifiable_by_search(&a, &b)),
        }
    }

    #[test]
    fn mgu_is_most_general((a, b) in atom_pair()) {
        // Any ground unifier factors through the mgu: the mgu image must
        // itself have a ground instance equal to the ground instance.
        if let Some(s) = mgu(&a, &b) {
            let unified = s.apply_atom(&a);
            let domain = ["a", "b", "f0"];
            for code in 0..27usize {
                let value = |v: u32| Term::constant(domain[(code / 3usize.pow(v)) % 3]);
                if a.map_vars(value) == b.map_vars(value) {
                    let target = a.map_vars(value);
                    let matches = (0..27usize).any(|c2| unified.map_vars(|v| Term::constant(domain[(c2 / 3usize.pow(v)) % 3])) == target);
                    prop_assert!(matches);
                }
            }
        }
    }

    #[test]
    fn engine_matches_naive_evaluation(text in program_text(1), (_, d) in nested_datasets()) {
        let p = parse_program(&text).expect("generated program parses");
        let engine = Engine::new(&p).expect("datalog").evaluate(&d);
        let naive = evaluate_naive(&p, &d).expect("datalog");
        prop_assert_eq!(facts(&engine), facts(&naive));
    }

    #[test]
    fn engine_is_monotone(text in program_text(1), (small, big) in nested_datasets()) {
        let p = parse_program(&text).expect("generated program parses");
        let e = Engine::new(&p).expect("datalog");
        let (lo, hi) = (e.evaluate(&small), e.evaluate(&big));
        if let (Some(lo), Some(hi)) = (facts(&lo), facts(&hi)) {
            prop_assert!(lo.is_subset(&hi));
        } else {
            prop_assert!(!lo.is_unsat() || hi.is_unsat());
        }
    }

    #[test]
    fn oracle_matches_engine_on_datalog(text in program_text(1), (_, d) in nested_datasets()) {
        let p = parse_program(&text).expect("generated program parses");
        let engine = Engine::new(&p).expect("datalog").evaluate(&d);
        let oracle = Oracle::new(&p).cautious_eval(&d).expect("oracle");
        prop_assert_eq!(facts(&engine), facts(&oracle));
    }

    #[test]
    fn cautious_entailment_is_monotone(text in program_text(2), (small, big) in nested_datasets()) {
        let p = parse_program(&text).expect("generated program parses");
        let o = Oracle::new(&p);
        let (lo, hi) = (o.cautious_eval(&small).expect("oracle"), o.cautious_eval(&big).expect("oracle"));
        if let (Some(lo), Some(hi)) = (facts(&lo), facts(&hi)) {
            prop_assert!(lo.is_subset(&hi));
        } else {
            prop_assert!(!lo.is_unsat() || hi.is_unsat());
        }
    }
}
