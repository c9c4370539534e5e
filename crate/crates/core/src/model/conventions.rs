//! The implicit rule families every program carries: `P_⊤`, the IDB
//! expansion and the congruence axioms for equality.

use std::collections::BTreeSet;

use super::{Atom, Predicate, Program, Provenance, Renaming, Rule, RuleId, RuleKind, Signature, Term};

/// The rules of `P_⊤` for the predicates and constants of `rules`.
///
/// `⊤`, `⊥` and `≈` get no rules of their own: `⊤` would only produce
/// tautologies, `⊥` is nullary, and `≈` facts only ever relate constants that
/// already carry `⊤`.
pub fn top_rules<'a>(rules: impl IntoIterator<Item = &'a Rule>) -> Vec<Rule> {
    let rules: Vec<&Rule> = rules.into_iter().collect();
    let preds: BTreeSet<Predicate> = rules
        .iter()
        .flat_map(|r| r.atoms())
        .map(|a| a.pred.clone())
        .filter(|p| !p.is_builtin())
        .collect();
    let consts: BTreeSet<_> = rules.iter().flat_map(|r| r.constants()).cloned().collect();
    let mut out = Vec::new();
    for p in &preds {
        let args: Vec<Term> = (0..p.arity as u32).map(Term::Var).collect();
        for i in 0..p.arity {
            out.push(Rule::with_kind(
                RuleId::new(format!("top.{}.{}", p.name, i + 1)),
                RuleKind::Top,
                vec![Atom::new(p.clone(), args.clone())],
                vec![Atom::top(Term::Var(i as u32))],
            ));
        }
    }
    for c in consts {
        out.push(Rule::with_kind(
            RuleId::new(format!("top.{c}")),
            RuleKind::Top,
            Vec::new(),
            vec![Atom::top(Term::Const(c))],
        ));
    }
    out
}

/// `p ∪ P_⊤`, with the generated rules tagged [`RuleKind::Top`].
pub fn augment_top(p: &Program) -> Program {
    let proper: Vec<Rule> = p.proper_rules().cloned().collect();
    let mut rules = proper.clone();
    rules.extend(top_rules(&proper));
    Program::from_parts(rules, p.provenance())
}

/// Predicates heading some rule outside `P_⊤`.
pub fn idb_predicates(p: &Program) -> BTreeSet<Predicate> {
    p.proper_rules()
        .flat_map(|r| r.head.iter())
        .map(|a| a.pred.clone())
        .collect()
}

/// `P^e`: every IDB predicate `Q` other than `⊥` is renamed to a fresh `Q'`
/// and a bridging rule `Q(x) → Q'(x)` is added. Returns the renaming.
pub fn idb_expansion(p: &Program) -> (Program, Renaming) {
    let idb: Vec<Predicate> = idb_predicates(p).into_iter().filter(|q| !q.is_bot()).collect();
    let mut taken = p.predicates();
    let mut pairs = Vec::new();
    for q in &idb {
        let mut fresh = q.primed();
        while taken.contains(&fresh) {
            fresh = fresh.primed();
        }
        taken.insert(fresh.clone());
        pairs.push((q.clone(), fresh));
    }
    let theta = Renaming::new(pairs).expect("primed names are fresh and arity-preserving");
    let mut rules: Vec<Rule> = p
        .proper_rules()
        .map(|r| {
            let mut r = r.map_preds(|q| theta.apply(q));
            r.kind = RuleKind::Regular;
            r
        })
        .collect();
    for q in &idb {
        let args: Vec<Term> = (0..q.arity as u32).map(Term::Var).collect();
        rules.push(Rule::new(
            RuleId::new(format!("{}.exp", q.name)),
            vec![Atom::new(q.clone(), args.clone())],
            vec![Atom::new(theta.apply(q), args)],
        ));
    }
    let provenance = if theta.is_empty() {
        p.provenance()
    } else {
        Provenance::Derived
    };
    (Program::from_parts(rules, provenance), theta)
}

/// Congruence axioms for `≈` over `sig`; empty when `sig` has no `≈`.
pub fn equality_axioms(sig: &Signature) -> Vec<Rule> {
    if !sig.has_equality() {
        return Vec::new();
    }
    let eq = |a: u32, b: u32| Atom::new(Predicate::eq(), vec![Term::Var(a), Term::Var(b)]);
    let rule = |id: String, body, head| Rule::with_kind(RuleId::new(id), RuleKind::Equality, body, vec![head]);
    let mut out = vec![
        rule("eq.refl".into(), vec![Atom::top(Term::Var(0))], eq(0, 0)),
        rule("eq.sym".into(), vec![eq(0, 1)], eq(1, 0)),
        rule("eq.trans".into(), vec![eq(0, 1), eq(1, 2)], eq(0, 2)),
    ];
    for p in sig.predicates.iter().filter(|p| !p.is_builtin()) {
        let n = p.arity as u32;
        for i in 0..n {
            let args: Vec<Term> = (0..n).map(Term::Var).collect();
            let mut replaced = args.clone();
            replaced[i as usize] = Term::Var(n);
            out.push(rule(
                format!("eq.{}.{}", p.name, i + 1),
                vec![Atom::new(p.clone(), args), eq(i, n)],
                Atom::new(p.clone(), replaced),
            ));
        }
    }
    out
}
