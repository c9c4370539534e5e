//! The predicate dependency graph, datalog/disjunctive classification and
//! the linear and weakly-linear program tests.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write;

use serde::Serialize;

use crate::model::{idb_predicates, Atom, Predicate, Program, RuleId};

/// Edge-labelled digraph over predicates; an edge `P → Q` labelled `r` means
/// `P` occurs in the body and `Q` in the head of rule `r`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DependencyGraph {
    pub vertices: BTreeSet<Predicate>,
    pub labels: BTreeMap<(Predicate, Predicate), BTreeSet<RuleId>>,
}

impl DependencyGraph {
    pub fn edges(&self) -> impl Iterator<Item = (&Predicate, &Predicate)> + '_ {
        self.labels.keys().map(|(a, b)| (a, b))
    }

    pub fn edge_count(&self) -> usize {
        self.labels.len()
    }

    pub fn successors<'a>(&'a self, p: &'a Predicate) -> impl Iterator<Item = &'a Predicate> + 'a {
        self.labels
            .range((p.clone(), min_pred())..)
            .take_while(move |((a, _), _)| a == p)
            .map(|((_, b), _)| b)
    }

    pub fn label(&self, from: &Predicate, to: &Predicate) -> Option<&BTreeSet<RuleId>> {
        self.labels.get(&(from.clone(), to.clone()))
    }
}

fn min_pred() -> Predicate {
    Predicate::new(crate::model::PredName::User("".into()), 0)
}

/// The graph over the rules of `p` outside `P_⊤`.
pub fn dependency_graph(p: &Program) -> DependencyGraph {
    let mut g = DependencyGraph {
        vertices: p.proper_rules().flat_map(|r| r.atoms()).map(|a| a.pred.clone()).collect(),
        labels: BTreeMap::new(),
    };
    for r in p.proper_rules() {
        for b in &r.body {
            for h in &r.head {
                g.labels
                    .entry((b.pred.clone(), h.pred.clone()))
                    .or_default()
                    .insert(r.id.clone());
            }
        }
    }
    g
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PredicateClass {
    Datalog,
    Disjunctive,
}

/// Why a predicate is disjunctive: a disjunctive rule and a path in the
/// graph from one of its head predicates to the predicate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub rule: RuleId,
    pub path: Vec<Predicate>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PredicateClassification {
    pub classes: BTreeMap<Predicate, PredicateClass>,
    pub witnesses: BTreeMap<Predicate, Witness>,
}

impl PredicateClassification {
    pub fn is_disjunctive(&self, p: &Predicate) -> bool {
        self.classes.get(p) == Some(&PredicateClass::Disjunctive)
    }

    pub fn disjunctive(&self) -> BTreeSet<Predicate> {
        self.of_class(PredicateClass::Disjunctive)
    }

    pub fn datalog(&self) -> BTreeSet<Predicate> {
        self.of_class(PredicateClass::Datalog)
    }

    fn of_class(&self, c: PredicateClass) -> BTreeSet<Predicate> {
        self.classes
            .iter()
            .filter(|(_, k)| **k == c)
            .map(|(p, _)| p.clone())
            .collect()
    }
}

/// A predicate is disjunctive iff it is reachable, by a path of length zero
/// or more, from a head predicate of a disjunctive rule. For rules with a
/// body this is exactly "some path ending in it involves an edge labelled by
/// a disjunctive rule"; bodiless disjunctive rules contribute no edges but
/// make their head predicates disjunctive all the same.
pub fn classify_predicates(p: &Program) -> PredicateClassification {
    let g = dependency_graph(p);
    let mut out = PredicateClassification::default();
    for v in &g.vertices {
        out.classes.insert(v.clone(), PredicateClass::Datalog);
    }
    let mut parent: BTreeMap<Predicate, Option<Predicate>> = BTreeMap::new();
    let mut origin: BTreeMap<Predicate, RuleId> = BTreeMap::new();
    let mut queue = VecDeque::new();
    for r in p.proper_rules().filter(|r| r.is_disjunctive()) {
        for h in &r.head {
            if !parent.contains_key(&h.pred) {
                parent.insert(h.pred.clone(), None);
                origin.insert(h.pred.clone(), r.id.clone());
                queue.push_back(h.pred.clone());
            }
        }
    }
    while let Some(q) = queue.pop_front() {
        for s in g.successors(&q) {
            if !parent.contains_key(s) {
                parent.insert(s.clone(), Some(q.clone()));
                origin.insert(s.clone(), origin[&q].clone());
                queue.push_back(s.clone());
            }
        }
    }
    for q in parent.keys() {
        let mut path = vec![q.clone()];
        let mut cur = q.clone();
        while let Some(Some(prev)) = parent.get(&cur) {
            path.push(prev.clone());
            cur = prev.clone();
        }
        path.reverse();
        out.classes.insert(q.clone(), PredicateClass::Disjunctive);
        out.witnesses.insert(
            q.clone(),
            Witness {
                rule: origin[q].clone(),
                path,
            },
        );
    }
    out
}

/// Result of a syntactic program test; `offenders` lists each violating rule
/// with the body atoms that count against it.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ProgramCheck {
    pub holds: bool,
    pub offenders: Vec<(RuleId, Vec<Atom>)>,
}

fn check(p: &Program, counts: impl Fn(&Predicate) -> bool) -> ProgramCheck {
    let offenders: Vec<(RuleId, Vec<Atom>)> = p
        .proper_rules()
        .filter_map(|r| {
            let hits: Vec<Atom> = r.body.iter().filter(|a| counts(&a.pred)).cloned().collect();
            (hits.len() > 1).then(|| (r.id.clone(), hits))
        })
        .collect();
    ProgramCheck {
        holds: offenders.is_empty(),
        offenders,
    }
}

/// Every rule has at most one IDB body atom.
pub fn is_linear(p: &Program) -> ProgramCheck {
    let idb = idb_predicates(p);
    check(p, |q| idb.contains(q))
}

/// Every rule has at most one body atom over a disjunctive predicate.
pub fn is_wl(p: &Program) -> ProgramCheck {
    let c = classify_predicates(p);
    check(p, |q| c.is_disjunctive(q))
}

fn dot_id(p: &Predicate) -> String {
    format!("\"{}\"", p.name.to_string().replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz rendering: edge labels are rule ids, disjunctive predicates are
/// drawn as double octagons.
pub fn export_dot(g: &DependencyGraph, c: &PredicateClassification) -> String {
    let mut s = String::from("digraph dependencies {\n");
    for v in &g.vertices {
        let shape = if c.is_disjunctive(v) { "doubleoctagon" } else { "ellipse" };
        let _ = writeln!(s, "  {} [shape={shape}];", dot_id(v));
    }
    for ((a, b), ids) in &g.labels {
        let label: Vec<&str> = ids.iter().map(RuleId::as_str).collect();
        let _ = writeln!(
            s,
            "  {} -> {} [label=\"{}\"];",
            dot_id(a),
            dot_id(b),
            label.join(",").replace('"', "\\\"")
        );
    }
    s.push_str("}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse_program;

    const P1: &str = "[4] b(X) | g(X) :- v(X).\n[5] b(X) :- g(Y), e(X,Y).\n[6] g(X) :- b(Y), e(X,Y).\n";

    fn p3() -> Program {
        parse_program(&format!("{P1}[7] e(X,Y) :- e(Y,X).\n")).unwrap()
    }

    fn p4() -> Program {
        parse_program("[8] c(X) | d(X) :- a(X), b(X).\n[9] a(X) | f(X) :- e(X).\n[10] b(Y) :- c(X), r(X,Y).\n")
            .unwrap()
    }

    fn pred(n: &str, a: usize) -> Predicate {
        Predicate::user(n, a)
    }

    #[test]
    fn graph_of_p3() {
        let g = dependency_graph(&p3());
        let expect = [
            ("v", 1, "b", 1, "4"),
            ("v", 1, "g", 1, "4"),
            ("e", 2, "b", 1, "5"),
            ("g", 1, "b", 1, "5"),
            ("e", 2, "g", 1, "6"),
            ("b", 1, "g", 1, "6"),
            ("e", 2, "e", 2, "7"),
        ];
        assert_eq!(g.edge_count(), expect.len());
        for (a, n, b, m, r) in expect {
            let ids = g.label(&pred(a, n), &pred(b, m)).unwrap();
            assert_eq!(ids.iter().map(RuleId::as_str).collect::<Vec<_>>(), vec![r]);
        }
        assert_eq!(export_dot(&g, &classify_predicates(&p3())).matches(" -> ").count(), 7);
    }

    #[test]
    fn empty_and_single_edge() {
        let g = dependency_graph(&Program::empty());
        assert!(g.vertices.is_empty() && g.labels.is_empty());
        assert_eq!(export_dot(&g, &PredicateClassification::default()), "digraph dependencies {\n}\n");
        let g = dependency_graph(&parse_program("b(X) :- a(X).").unwrap());
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(&pred("a", 1), &pred("b", 1))]);
    }

    #[test]
    fn classification_of_p3() {
        let c = classify_predicates(&p3());
        assert_eq!(c.disjunctive(), [pred("b", 1), pred("g", 1)].into_iter().collect());
        assert_eq!(c.datalog(), [pred("e", 2), pred("v", 1)].into_iter().collect());
        assert_eq!(c.witnesses[&pred("b", 1)].rule.as_str(), "4");
    }

    #[test]
    fn classification_of_p4() {
        let c = classify_predicates(&p4());
        let dis: Vec<String> = c.disjunctive().iter().map(|p| p.name.to_string()).collect();
        assert_eq!(dis, vec!["a", "b", "c", "d", "f"]);
        let dl: Vec<String> = c.datalog().iter().map(|p| p.name.to_string()).collect();
        assert_eq!(dl, vec!["e", "r"]);
    }

    #[test]
    fn linear_and_wl() {
        let p1 = parse_program(P1).unwrap();
        assert!(is_linear(&p1).holds);
        assert!(is_wl(&p1).holds);
        let lin = is_linear(&p3());
        assert!(!lin.holds);
        let ids: Vec<&str> = lin.offenders.iter().map(|(r, _)| r.as_str()).collect();
        assert_eq!(ids, vec!["5", "6"]);
        assert!(is_wl(&p3()).holds);
        let wl = is_wl(&p4());
        assert!(!wl.holds);
        assert_eq!(wl.offenders.len(), 1);
        assert_eq!(wl.offenders[0].0.as_str(), "8");
        assert_eq!(wl.offenders[0].1.len(), 2);
        assert!(is_linear(&Program::empty()).holds);
    }

    #[test]
    fn bodiless_disjunctive_rules_count() {
        let p = parse_program("a(c) | b(c).\nd(X) :- a(X).").unwrap();
        let c = classify_predicates(&p);
        assert!(c.is_disjunctive(&pred("a", 1)));
        assert!(c.is_disjunctive(&pred("d", 1)));
    }

    #[test]
    fn two_atoms_of_one_disjunctive_predicate_break_wl() {
        let p = parse_program("a(X) | b(X) :- v(X).\nc(X) :- a(X), a(Y), e(X,Y).").unwrap();
        assert!(!is_wl(&p).holds);
    }
}
