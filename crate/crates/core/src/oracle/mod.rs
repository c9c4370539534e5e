//! Ground-and-check cautious entailment for disjunctive programs, plus
//! hyperresolution derivations.
//!
//! A fact is cautiously entailed when it holds in every model of the program
//! and the dataset; for positive programs that is the case exactly when the
//! ground clauses together with its negation are unsatisfiable.

mod derivation;
mod ground;
mod pool;
mod sat;

use std::collections::BTreeSet;

use crate::engine::seminaive::Compiled;
use crate::engine::{EvalResult, Status};
use crate::model::{equality_axioms, Atom, Dataset, Predicate, Program, Rule, RuleKind, Signature};
use crate::EvalError;

pub use derivation::{check_derivation, find_derivation, find_derivation_with, Derivation, DerivationError, Justification, SearchLimits};
pub use ground::{ClauseSource, GroundClause, GroundClauseSet};
pub use pool::PoolOracle;

use sat::{neg, pos, Solver};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleConfig {
    pub max_clauses: usize,
    pub max_atoms: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            max_clauses: 200_000,
            max_atoms: 5_000,
        }
    }
}

/// A program prepared for repeated entailment queries.
#[derive(Clone, Debug)]
pub struct Oracle {
    rules: Vec<Rule>,
    signature: Signature,
    base: (Vec<Rule>, Compiled),
    cfg: OracleConfig,
}

fn regular_rules(p: &Program) -> Vec<Rule> {
    p.rules().iter().filter(|r| r.kind == RuleKind::Regular).cloned().collect()
}

fn with_axioms(rules: &[Rule], sig: &Signature) -> Vec<Rule> {
    let mut all = rules.to_vec();
    all.extend(equality_axioms(sig));
    all
}

impl Oracle {
    pub fn new(p: &Program) -> Oracle {
        Oracle::with_config(p, OracleConfig::default())
    }

    pub fn with_config(p: &Program, cfg: OracleConfig) -> Oracle {
        let rules = regular_rules(p);
        let signature = Program::derived(rules.clone()).signature();
        let all = with_axioms(&rules, &signature);
        let compiled = Compiled::new(&all);
        Oracle {
            rules,
            signature,
            base: (all, compiled),
            cfg,
        }
    }

    /// Whether `d` calls for congruence axioms beyond the precompiled ones.
    fn needs_fresh_axioms(&self, d: &Dataset) -> bool {
        let needs = self.signature.has_equality() || d.facts().iter().any(|f| f.pred.is_eq());
        needs && (!self.signature.has_equality() || d.facts().iter().any(|f| !self.signature.predicates.contains(&f.pred)))
    }

    /// The relevant part of the grounding over `d`.
    pub fn ground(&self, d: &Dataset) -> Result<GroundClauseSet, EvalError> {
        if self.needs_fresh_axioms(d) {
            let all = with_axioms(&self.rules, &self.signature.union(&d.signature()));
            ground::ground_relevant(&Compiled::new(&all), &all, d, &self.cfg)
        } else {
            ground::ground_relevant(&self.base.1, &self.base.0, d, &self.cfg)
        }
    }

    /// `eval(P, D)` by cautious reasoning.
    pub fn cautious_eval(&self, d: &Dataset) -> Result<EvalResult, EvalError> {
        self.cautious_eval_where(d, |_| true)
    }

    /// Like [`Oracle::cautious_eval`], but only facts whose predicate passes
    /// `keep` are decided and reported.
    pub fn cautious_eval_where(&self, d: &Dataset, keep: impl Fn(&Predicate) -> bool) -> Result<EvalResult, EvalError> {
        let mut g = if self.needs_fresh_axioms(d) {
            let all = with_axioms(&self.rules, &self.signature.union(&d.signature()));
            ground::ground_compact(&Compiled::new(&all), d, &self.cfg, true)?
        } else {
            ground::ground_compact(&self.base.1, d, &self.cfg, true)?
        };
        let kept: Vec<bool> = (0..g.atoms).map(|v| keep(&g.store.preds[g.pred_of(v)])).collect();
        let solver = Solver::new(g.atoms, std::mem::take(&mut g.clauses));
        Ok(cautious_over(solver, g.horn, &kept, |v| g.atom(v)))
    }

    /// Whether every model satisfies some atom of `phi`.
    pub fn entails(&self, d: &Dataset, phi: &[Atom]) -> Result<bool, EvalError> {
        let g = self.ground(d)?;
        Ok(entails_in(&g, phi))
    }
}

fn solver_for(g: &GroundClauseSet) -> Solver {
    let clauses = g.clauses.iter().map(|c| {
        c.body
            .iter()
            .map(|&a| neg(a))
            .chain(c.head.iter().map(|&a| pos(a)))
            .collect::<Vec<_>>()
    });
    Solver::new(g.atoms.len(), clauses)
}

#[cfg(test)]
fn cautious(g: &GroundClauseSet, keep: impl Fn(&Predicate) -> bool) -> EvalResult {
    let horn = g.clauses.iter().all(|c| c.head.len() <= 1);
    let kept: Vec<bool> = g.atoms.iter().map(|a| keep(&a.pred)).collect();
    cautious_over(solver_for(g), horn, &kept, |i| g.atoms[i].clone())
}

/// Decides every atom flagged in `kept` against the clauses loaded in `s`.
fn cautious_over(mut s: Solver, horn: bool, kept: &[bool], atom: impl Fn(usize) -> Atom) -> EvalResult {
    if horn {
        // Horn: propagation from the facts computes the least model
        let Some(least) = s.implied() else {
            return EvalResult::unsat();
        };
        let facts = (0..kept.len()).filter(|&i| least[i] && kept[i]).map(&atom).collect();
        return EvalResult::consistent(facts);
    }
    let Some(model) = s.solve(&[]) else {
        return EvalResult::unsat();
    };
    let implied = s.implied().expect("a model exists");
    let mut candidate: Vec<bool> = model.iter().zip(kept).map(|(&t, &k)| t && k).collect();
    let mut facts = BTreeSet::new();
    for i in 0..candidate.len() {
        if !candidate[i] {
            continue;
        }
        if implied[i] {
            facts.insert(atom(i));
            continue;
        }
        match s.solve(&[neg(i as u32)]) {
            None => {
                facts.insert(atom(i));
            }
            Some(m) => {
                for (c, t) in candidate.iter_mut().zip(m) {
                    *c &= t;
                }
            }
        }
    }
    EvalResult {
        status: Status::Consistent,
        facts,
    }
}

fn entails_in(g: &GroundClauseSet, phi: &[Atom]) -> bool {
    // atoms outside the relevant grounding are false in some model already
    let assumptions: Vec<u32> = phi.iter().filter_map(|a| g.atom_id(a)).map(neg).collect();
    solver_for(g).solve(&assumptions).is_none()
}

/// All ground instances of `p`'s rules (plus congruence axioms when `≈`
/// occurs) over the constants of `p` and `d`, the dataset as unit clauses,
/// `⊤(a)` for every constant and the clause `¬⊥`.
pub fn ground(p: &Program, d: &Dataset) -> Result<GroundClauseSet, EvalError> {
    ground_with(p, d, &OracleConfig::default())
}

pub fn ground_with(p: &Program, d: &Dataset, cfg: &OracleConfig) -> Result<GroundClauseSet, EvalError> {
    let rules = crate::engine::effective_rules(p, d);
    ground::ground_full(&rules, d, cfg)
}

/// `eval(P, D)` for a possibly disjunctive `P`.
pub fn cautious_eval(p: &Program, d: &Dataset) -> Result<EvalResult, EvalError> {
    Oracle::new(p).cautious_eval(d)
}

/// Whether `P ∪ D` entails the disjunction `phi`; an empty `phi` asks for
/// unsatisfiability.
pub fn entails_oracle(p: &Program, d: &Dataset, phi: &[Atom]) -> Result<bool, EvalError> {
    Oracle::new(p).entails(d, phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::evaluate;
    use crate::model::Term;
    use crate::text::{parse_dataset, parse_ground_disjunction, parse_program};

    const P1: &str = "[4] b(X) | g(X) :- v(X).\n[5] b(X) :- g(Y), e(X,Y).\n[6] g(X) :- b(Y), e(X,Y).\n";
    const D1: &str = "v(a).\nv(b).\nv(c).\ne(a,b).\ne(b,c).\ne(a,c).\n";

    fn p1() -> Program {
        parse_program(P1).unwrap()
    }

    fn fact(p: &str, args: &[&str]) -> Atom {
        Atom::fact(Predicate::user(p, args.len()), args)
    }

    #[test]
    fn ground_counts_for_p1_d1() {
        let g = ground(&p1(), &parse_dataset(D1).unwrap()).unwrap();
        assert_eq!(g.instances_of("4"), 3);
        assert_eq!(g.instances_of("5"), 9);
        assert_eq!(g.instances_of("6"), 9);
    }

    #[test]
    fn ground_of_empty_program() {
        let g = ground(&Program::empty(), &parse_dataset("a(c).").unwrap()).unwrap();
        let kinds: Vec<&ClauseSource> = g.clauses.iter().map(|c| &c.source).collect();
        assert_eq!(kinds, vec![&ClauseSource::Bot, &ClauseSource::Top, &ClauseSource::Data]);
        assert_eq!(g.atoms.len(), 3);
    }

    #[test]
    fn ground_three_variables_over_four_constants() {
        let p = parse_program("t(X,Z) :- e(X,Y), e(Y,Z).").unwrap();
        let d = parse_dataset("e(a,b).\ne(c,d).").unwrap();
        assert_eq!(ground(&p, &d).unwrap().instances_of("r1"), 64);
    }

    #[test]
    fn ground_cap_is_an_error() {
        let p = parse_program("t(X,Z) :- e(X,Y), e(Y,Z).").unwrap();
        let d = parse_dataset("e(a,b).\ne(c,d).").unwrap();
        let cfg = OracleConfig {
            max_clauses: 20,
            max_atoms: 5_000,
        };
        assert!(matches!(ground_with(&p, &d, &cfg), Err(EvalError::ResourceCap { .. })));
    }

    #[test]
    fn cautious_p1_d1() {
        let res = cautious_eval(&p1(), &parse_dataset(D1).unwrap()).unwrap();
        assert_eq!(res.status, Status::Consistent);
        // whichever colour c takes, a ends up with both
        assert!(res.facts.contains(&fact("b", &["a"])));
        assert!(res.facts.contains(&fact("g", &["a"])));
        assert!(!res.facts.contains(&fact("b", &["c"])));
        assert!(!res.facts.contains(&fact("g", &["c"])));
    }

    #[test]
    fn cautious_single_vertex_has_no_colour() {
        let res = cautious_eval(&p1(), &parse_dataset("v(a).").unwrap()).unwrap();
        let expected: BTreeSet<Atom> = [fact("v", &["a"]), Atom::top(Term::constant("a"))].into_iter().collect();
        assert_eq!(res.facts, expected);
    }

    #[test]
    fn disjunctions() {
        let d = parse_dataset("v(a).").unwrap();
        let both = parse_ground_disjunction("b(a) | g(a)").unwrap();
        assert!(entails_oracle(&p1(), &d, &both).unwrap());
        assert!(!entails_oracle(&p1(), &d, &both[..1]).unwrap());
        assert!(entails_oracle(&p1(), &d, &[Atom::top(Term::constant("a"))]).unwrap());
        assert!(!entails_oracle(&p1(), &d, &[Atom::top(Term::constant("zz"))]).unwrap());
        assert!(!entails_oracle(&p1(), &d, &[]).unwrap());
    }

    #[test]
    fn three_colouring() {
        let col = parse_program(
            "r(X) | o(X) :- v(X).\ng(X) | b(X) :- o(X).\n\
             bot :- b(X), edge(X,Y), b(Y).\nbot :- g(X), edge(X,Y), g(Y).\nbot :- r(X), edge(X,Y), r(Y).\n\
             bot :- b(X), g(X).\nbot :- g(X), r(X).\nbot :- b(X), r(X).\n",
        )
        .unwrap();
        let graph = |nodes: &[&str], edges: &[(&str, &str)]| {
            let mut s = String::new();
            for n in nodes {
                s += &format!("v({n}).\n");
            }
            for (a, b) in edges {
                s += &format!("edge({a},{b}).\nedge({b},{a}).\n");
            }
            parse_dataset(&s).unwrap()
        };
        let k4 = graph(
            &["a", "b", "c", "d"],
            &[("a", "b"), ("a", "c"), ("a", "d"), ("b", "c"), ("b", "d"), ("c", "d")],
        );
        assert!(cautious_eval(&col, &k4).unwrap().is_unsat());
        assert!(entails_oracle(&col, &k4, &[]).unwrap());
        let k3 = graph(&["a", "b", "c"], &[("a", "b"), ("a", "c"), ("b", "c")]);
        assert!(!cautious_eval(&col, &k3).unwrap().is_unsat());
    }

    #[test]
    fn agrees_with_engine_on_datalog() {
        let p = parse_program("t(X,Y) :- e(X,Y).\nt(X,Z) :- t(X,Y), e(Y,Z).\nbot :- t(X,X), s(X).").unwrap();
        for text in ["e(a,b).\ne(b,c).", "e(a,b).\ne(b,a).", "e(a,b).\ne(b,a).\ns(b)."] {
            let d = parse_dataset(text).unwrap();
            assert_eq!(cautious_eval(&p, &d).unwrap(), evaluate(&p, &d).unwrap(), "{text}");
        }
    }

    #[test]
    fn equality_in_disjunctive_programs() {
        let p = parse_program("X = a | X = b :- n(X).\nq(X) :- p(X).").unwrap();
        let d = parse_dataset("n(c).\np(c).").unwrap();
        let res = cautious_eval(&p, &d).unwrap();
        assert!(res.facts.contains(&fact("q", &["c"])));
        assert!(!res.facts.contains(&fact("q", &["a"])));
        assert!(entails_oracle(&p, &d, &[fact("q", &["a"]), fact("q", &["b"])]).unwrap());
    }

    #[test]
    fn compact_grounding_matches_clause_set() {
        let programs = [
            "[4] b(X) | g(X) :- v(X).\n[5] b(X) :- g(Y), e(X,Y).\n[6] g(X) :- b(Y), e(X,Y).",
            "a(X) | b(X) :- v(X).\nbot :- a(X), b(X).\nc(X) :- a(X).\nc(X) :- b(X).",
            "X = a | X = b :- n(X).\nq(X) :- p(X).",
            "t(X,Y) :- e(X,Y).\nt(X,Z) :- t(X,Y), e(Y,Z).",
        ];
        let datasets = ["v(a).\nv(b).\ne(a,b).", "v(a).\nn(c).\np(c).", "e(a,b).\ne(b,a).", "v(a).\nv(b).\nn(a)."];
        for p in programs {
            let o = Oracle::new(&parse_program(p).unwrap());
            for d in datasets {
                let d = parse_dataset(d).unwrap();
                let full = cautious(&o.ground(&d).unwrap(), |_| true);
                assert_eq!(o.cautious_eval(&d).unwrap(), full, "{p} / {d:?}");
            }
        }
    }
}
