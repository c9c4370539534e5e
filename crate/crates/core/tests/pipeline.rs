use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;

use wlrw_core::analysis::{is_linear, is_wl};
use wlrw_core::engine::{Engine, EvalResult};
use wlrw_core::oracle::Oracle;
use wlrw_core::rlor::{compile, parse_ontology};
use wlrw_core::text::{parse_dataset, parse_program};
use wlrw_core::transform::{xi, xi_prime};
use wlrw_core::{Atom, Dataset, Program};

fn fixture(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", name].iter().collect();
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn program(name: &str) -> Program {
    parse_program(&fixture(name)).expect("fixture program parses")
}

fn dataset(name: &str) -> Dataset {
    parse_dataset(&fixture(name)).expect("fixture dataset parses")
}

/// The facts over the predicates of `p`, or `None` when inconsistent.
fn restricted(r: &EvalResult, p: &Program) -> Option<BTreeSet<Atom>> {
    let preds = p.predicates();
    (!r.is_unsat()).then(|| r.facts.iter().filter(|a| preds.contains(&a.pred) && !a.pred.is_top()).cloned().collect())
}

#[test]
fn rewritings_of_the_colouring_program_agree_with_the_oracle() {
    let p = program("p1.dl");
    assert!(is_linear(&p).holds && is_wl(&p).holds);
    let path = parse_dataset("v(a). v(b). v(c). e(a,b). e(b,c).").expect("dataset");
    for d in [dataset("d1.facts"), path] {
        let expected = restricted(&Oracle::new(&p).cautious_eval(&d).expect("oracle"), &p);
        for out in [xi(&p).expect("WL"), xi_prime(&p).expect("WL")] {
            assert!(out.program.is_datalog());
            let got = Engine::new(&out.program).expect("datalog").evaluate(&d);
            assert_eq!(restricted(&got, &p), expected);
        }
    }
}

#[test]
fn three_colourability_through_the_ontology_front_end() {
    let p = compile(&parse_ontology(&fixture("colour.rlor")).expect("ontology parses"));
    let oracle = Oracle::new(&p);
    assert!(!oracle.cautious_eval(&dataset("triangle.facts")).expect("oracle").is_unsat());
    assert!(oracle.cautious_eval(&dataset("k4.facts")).expect("oracle").is_unsat());
}

#[test]
fn every_fixture_parses() {
    for name in ["p1.dl", "p2.dl", "p3.dl", "p4.dl"] {
        assert!(!program(name).is_empty(), "{name}");
    }
    for name in ["d1.facts", "k4.facts", "triangle.facts"] {
        assert!(!dataset(name).is_empty(), "{name}");
    }
    for name in ["colour.rlor", "small.rlor"] {
        assert!(!parse_ontology(&fixture(name)).expect("ontology parses").is_empty(), "{name}");
    }
}
