//! Bottom-up evaluation of plain datalog programs.
//!
//! `P_⊤` is realised by seeding `⊤(a)` for every constant of the program and
//! the dataset; `≈` is an ordinary predicate axiomatised by the congruence
//! rules of [`equality_axioms`]. Evaluation stops as soon as `⊥` is derived.

mod naive;
pub(crate) mod seminaive;

use std::collections::BTreeSet;

use serde::Serialize;

use crate::model::{equality_axioms, Atom, Dataset, Predicate, Program, Rule, RuleKind, Signature};
use crate::EvalError;

pub use naive::evaluate_naive;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Unsat,
    Consistent,
}

/// `eval(P, D)`: `Unsat` with no facts, or every entailed fact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalResult {
    pub status: Status,
    pub facts: BTreeSet<Atom>,
}

impl EvalResult {
    pub fn unsat() -> Self {
        EvalResult {
            status: Status::Unsat,
            facts: BTreeSet::new(),
        }
    }

    pub fn consistent(facts: BTreeSet<Atom>) -> Self {
        EvalResult {
            status: Status::Consistent,
            facts,
        }
    }

    pub fn is_unsat(&self) -> bool {
        self.status == Status::Unsat
    }

    /// Whether `α` is entailed; everything is entailed by an unsatisfiable
    /// program, and `⊥` only by one.
    pub fn entails(&self, alpha: &Atom) -> bool {
        self.is_unsat() || self.facts.contains(alpha)
    }

    /// The facts over predicates in `s`, plus `⊥` when unsatisfiable.
    pub fn restrict(&self, s: &BTreeSet<Predicate>) -> BTreeSet<Atom> {
        if self.is_unsat() {
            return [Atom::bot()].into_iter().collect();
        }
        self.facts.iter().filter(|a| s.contains(&a.pred)).cloned().collect()
    }
}

/// Number of new facts per semi-naive round; the first entry counts the
/// dataset, the `⊤` seeds and the fact rules.
pub type Trace = Vec<usize>;

/// A datalog program prepared for repeated evaluation.
#[derive(Clone, Debug)]
pub struct Engine {
    rules: Vec<Rule>,
    signature: Signature,
    base: seminaive::Compiled,
}

impl Engine {
    /// Rejects rules with more than one head atom. Rules of `P_⊤` are
    /// dropped (the engine seeds `⊤` itself), as are congruence axioms, which
    /// are regenerated for the signature actually evaluated.
    pub fn new(p: &Program) -> Result<Engine, EvalError> {
        if let Some(r) = p.rules().iter().find(|r| r.head.len() != 1 && r.kind != RuleKind::Top) {
            return Err(EvalError::NotDatalog {
                rule: r.id.to_string(),
            });
        }
        let rules: Vec<Rule> = p.rules().iter().filter(|r| r.kind == RuleKind::Regular).cloned().collect();
        let signature = Program::derived(rules.clone()).signature();
        let base = seminaive::Compiled::new(&with_axioms(&rules, &signature));
        Ok(Engine { rules, signature, base })
    }

    pub fn evaluate(&self, d: &Dataset) -> EvalResult {
        self.evaluate_traced(d).0
    }

    pub fn evaluate_traced(&self, d: &Dataset) -> (EvalResult, Trace) {
        self.evaluate_where(d, |_| true)
    }

    /// As [`Engine::evaluate_traced`], keeping only the facts whose predicate
    /// passes `keep`. `⊥` is reported through the status either way.
    pub fn evaluate_where(&self, d: &Dataset, keep: impl Fn(&Predicate) -> bool) -> (EvalResult, Trace) {
        let needs_more = self.signature.has_equality() || d.facts().iter().any(|f| f.pred.is_eq());
        let fresh_preds = || d.facts().iter().any(|f| !self.signature.predicates.contains(&f.pred));
        if needs_more && (!self.signature.has_equality() || fresh_preds()) {
            let sig = self.signature.union(&d.signature());
            seminaive::Compiled::new(&with_axioms(&self.rules, &sig)).run_where(d, keep)
        } else {
            self.base.run_where(d, keep)
        }
    }

    pub fn entails(&self, d: &Dataset, alpha: &Atom) -> bool {
        self.evaluate(d).entails(alpha)
    }
}

fn with_axioms(rules: &[Rule], sig: &Signature) -> Vec<Rule> {
    let mut all = rules.to_vec();
    all.extend(equality_axioms(sig));
    all
}

/// The rules the engine actually runs for `p` over `d`: the regular rules
/// plus the congruence axioms when `≈` occurs in either.
pub(crate) fn effective_rules(p: &Program, d: &Dataset) -> Vec<Rule> {
    let rules: Vec<Rule> = p.rules().iter().filter(|r| r.kind == RuleKind::Regular).cloned().collect();
    let sig = Program::derived(rules.clone()).signature().union(&d.signature());
    with_axioms(&rules, &sig)
}

/// Semi-naive evaluation of `p` over `d`.
pub fn evaluate(p: &Program, d: &Dataset) -> Result<EvalResult, EvalError> {
    Ok(Engine::new(p)?.evaluate(d))
}

/// Whether `p ∪ d ⊨ α`; true for every `α` when `p ∪ d` is unsatisfiable.
pub fn entails(p: &Program, d: &Dataset, alpha: &Atom) -> Result<bool, EvalError> {
    Ok(Engine::new(p)?.entails(d, alpha))
}
