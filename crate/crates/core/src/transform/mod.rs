//! Program transformations: the datalog rewritings Ξ and Ξ′, the reverse
//! rewriting Ψ into linear disjunctive datalog, and unfolding together with
//! the Rewrite driver built on it.

mod psi;
mod rewrite;
mod unfold;
mod xi;

use std::collections::{BTreeSet, HashSet};

use serde::Serialize;

use crate::model::{Atom, Predicate, Program, Rule, RuleId, Term, Var};
use crate::text::rule_key;

pub use psi::psi;
pub use rewrite::{rewrite, RewriteConfig, RewriteOutcome, RewriteResult, RewriteTrace, SelectionStrategy, TraceStep};
pub use unfold::{elem_unfold, mgu, unfold, Substitution};
pub use xi::{prune_for_goals, xi, xi_prime};

/// Which clause of the transformation produced an output rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    /// `χ_⊤ → R^R(y,y)`.
    Init,
    /// A flipped rule whose head is an auxiliary atom.
    Flip,
    /// A flipped rule that closes with the goal `R(y)`.
    Close,
    /// `Q(z) ∧ Q^R(z,y) → R(y)`.
    Collect,
    /// Copied unchanged from the input.
    Verbatim,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RuleOrigin {
    pub rule: RuleId,
    pub source: Option<RuleId>,
    pub case: Case,
}

/// A rewritten program together with the bookkeeping needed to prune it
/// and to explain where each rule came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteOutput {
    pub program: Program,
    /// The predicates the auxiliary predicates range over.
    pub sigma: BTreeSet<Predicate>,
    pub aux: BTreeSet<Predicate>,
    /// One entry per rule of `program`, in order.
    pub origins: Vec<RuleOrigin>,
    /// Predicates of the program that was rewritten.
    pub source_predicates: BTreeSet<Predicate>,
}

/// Accumulates output rules, dropping exact duplicates up to renaming.
#[derive(Default)]
struct Emitter {
    rules: Vec<Rule>,
    origins: Vec<RuleOrigin>,
    seen: HashSet<String>,
}

impl Emitter {
    fn emit(&mut self, rule: Rule, source: Option<&RuleId>, case: Case) {
        let rule = with_top_guards(rule);
        if self.seen.insert(rule_key(&rule)) {
            self.origins.push(RuleOrigin {
                rule: rule.id.clone(),
                source: source.cloned(),
                case,
            });
            self.rules.push(rule);
        }
    }

    fn finish(self, sigma: BTreeSet<Predicate>, source_predicates: BTreeSet<Predicate>) -> RewriteOutput {
        let program = Program::derived(self.rules);
        let mut origins = self.origins;
        for (o, r) in origins.iter_mut().zip(program.rules()) {
            o.rule = r.id.clone();
        }
        let aux = program.predicates().into_iter().filter(|p| p.aux_parts().is_some()).collect();
        RewriteOutput {
            program,
            sigma,
            aux,
            origins,
            source_predicates,
        }
    }
}

/// Adds `⊤(v)` for every head variable missing from the body: the least
/// conjunction of `⊤`-atoms that makes the rule safe.
fn with_top_guards(r: Rule) -> Rule {
    let body_vars: BTreeSet<Var> = r.body.iter().flat_map(Atom::vars).collect();
    let missing: BTreeSet<Var> = r.head.iter().flat_map(Atom::vars).filter(|v| !body_vars.contains(v)).collect();
    if missing.is_empty() {
        return r;
    }
    let mut body: Vec<Atom> = missing.into_iter().map(|v| Atom::top(Term::Var(v))).collect();
    body.extend(r.body);
    Rule::with_kind(r.id, r.kind, body, r.head)
}

/// `base^goal(s, y)`.
fn aux_atom(base: &Atom, goal: &Predicate, y: &[Term]) -> Atom {
    let mut args = base.args.clone();
    args.extend_from_slice(y);
    Atom::new(Predicate::aux(&base.pred, goal), args)
}

/// Fresh variables `first, first+1, ...` for the arguments of `p`.
fn fresh_vars(first: Var, p: &Predicate) -> Vec<Term> {
    (0..p.arity as Var).map(|i| Term::Var(first + i)).collect()
}

fn short(p: &Predicate) -> String {
    p.name.to_string()
}

fn check_fresh(p: &Program, sigma: &BTreeSet<Predicate>, goals: &BTreeSet<Predicate>) -> Result<(), crate::TransformError> {
    let existing = p.predicates();
    for b in sigma {
        for g in goals {
            let a = Predicate::aux(b, g);
            if existing.contains(&a) {
                return Err(crate::TransformError::NameClash(a.name.to_string()));
            }
        }
    }
    Ok(())
}
