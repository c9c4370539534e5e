use std::collections::{BTreeMap, HashMap, HashSet};

use crate::model::{idb_predicates, Atom, Program, Rule, RuleId, RuleKind, Term, Var};
use crate::text::rule_key;
use crate::TransformError;

/// An idempotent variable substitution.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    map: BTreeMap<Var, Term>,
}

impl Substitution {
    pub fn get(&self, v: Var) -> Option<&Term> {
        self.map.get(&v)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, &Term)> + '_ {
        self.map.iter().map(|(v, t)| (*v, t))
    }

    pub fn apply_term(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => self.map.get(v).cloned().unwrap_or_else(|| t.clone()),
            c => c.clone(),
        }
    }

    pub fn apply_atom(&self, a: &Atom) -> Atom {
        a.map_vars(|v| self.apply_term(&Term::Var(v)))
    }

    /// No variable in the range is also in the domain.
    pub fn is_idempotent(&self) -> bool {
        self.map
            .values()
            .all(|t| t.as_var().is_none_or(|v| !self.map.contains_key(&v)))
    }
}

/// Most general unifier of two function-free atoms, or `None` on a clash.
/// Variable-variable bindings map the larger index to the smaller one, so
/// the result is deterministic.
pub fn mgu(a: &Atom, b: &Atom) -> Option<Substitution> {
    if a.pred != b.pred || a.args.len() != b.args.len() {
        return None;
    }
    let mut map: BTreeMap<Var, Term> = BTreeMap::new();
    fn walk(map: &BTreeMap<Var, Term>, t: &Term) -> Term {
        let mut cur = t.clone();
        while let Term::Var(v) = cur {
            match map.get(&v) {
                Some(next) => cur = next.clone(),
                None => break,
            }
        }
        cur
    }
    for (x, y) in a.args.iter().zip(&b.args) {
        let (x, y) = (walk(&map, x), walk(&map, y));
        match (&x, &y) {
            _ if x == y => {}
            (Term::Var(u), Term::Var(v)) => {
                let (hi, lo) = if u > v { (*u, *v) } else { (*v, *u) };
                map.insert(hi, Term::Var(lo));
            }
            (Term::Var(u), c @ Term::Const(_)) | (c @ Term::Const(_), Term::Var(u)) => {
                map.insert(*u, c.clone());
            }
            _ => return None,
        }
    }
    let resolved = map.keys().map(|v| (*v, walk(&map, &Term::Var(*v)))).collect();
    Some(Substitution { map: resolved })
}

fn shift(a: &Atom, k: Var) -> Atom {
    a.map_vars(|v| Term::Var(v + k))
}

/// `⊥ ∨ ψ` is `ψ`; only a head consisting of `⊥` alone keeps it.
fn drop_redundant_bot(head: Vec<Atom>) -> Vec<Atom> {
    if head.len() > 1 && head.iter().any(|a| a.pred.is_bot()) {
        let rest: Vec<Atom> = head.iter().filter(|a| !a.pred.is_bot()).cloned().collect();
        if !rest.is_empty() {
            return rest;
        }
    }
    head
}

struct Resolvent {
    rule: Rule,
    theta: Substitution,
    /// Maps variables of the combined space to the resolvent's numbering.
    renumber: HashMap<Var, Var>,
}

/// Resolves `r` at body atom `ai` against head atom `bi` of a rule whose
/// atoms (`s_body`, `s_head`) already live in a variable range disjoint
/// from `r`'s.
fn resolve(r: &Rule, ai: usize, s_body: &[Atom], s_head: &[Atom], bi: usize, id: RuleId) -> Option<Resolvent> {
    let theta = mgu(&r.body[ai], &s_head[bi])?;
    let body: Vec<Atom> = r
        .body
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != ai)
        .map(|(_, a)| a)
        .chain(s_body.iter())
        .map(|a| theta.apply_atom(a))
        .collect();
    let head: Vec<Atom> = r
        .head
        .iter()
        .chain(s_head.iter().enumerate().filter(|(i, _)| *i != bi).map(|(_, a)| a))
        .map(|a| theta.apply_atom(a))
        .collect();
    let kind = if r.kind == RuleKind::Equality {
        RuleKind::Regular
    } else {
        r.kind
    };
    let (rule, renumber) = Rule::normalised(id, kind, body, drop_redundant_bot(head));
    Some(Resolvent { rule, theta, renumber })
}

/// `ElemUnfold(r, α, s, β)`: the resolvent of `r` at body atom `α` with `s`
/// at head atom `β`, and the unifier used. The unifier is expressed over
/// `r`'s variables and `s`'s variables shifted past `r`'s.
pub fn elem_unfold(r: &Rule, alpha: &Atom, s: &Rule, beta: &Atom) -> Result<(Rule, Substitution), TransformError> {
    let ai = r.body.iter().position(|a| a == alpha).ok_or_else(|| TransformError::AtomNotInRule {
        rule: r.id.to_string(),
        atom: alpha.to_string(),
    })?;
    let bi = s.head.iter().position(|a| a == beta).ok_or_else(|| TransformError::AtomNotInRule {
        rule: s.id.to_string(),
        atom: beta.to_string(),
    })?;
    let k = r.num_vars();
    let sb: Vec<Atom> = s.body.iter().map(|a| shift(a, k)).collect();
    let sh: Vec<Atom> = s.head.iter().map(|a| shift(a, k)).collect();
    let id = RuleId::new(format!("{}.{}", r.id, s.id));
    resolve(r, ai, &sb, &sh, bi, id)
        .map(|res| (res.rule, res.theta))
        .ok_or_else(|| TransformError::NotUnifiable(alpha.to_string(), beta.to_string()))
}

/// Replaces rule `r` by its unfolding at the IDB body atom `alpha`: all
/// resolvents with head atoms unifiable with `alpha`, including the iterated
/// resolvents that resolve several such head atoms of one rule in turn.
/// Rules equal up to renaming are kept once.
pub fn unfold(p: &Program, r: &RuleId, alpha: &Atom) -> Result<Program, TransformError> {
    let rule = p.rule(r).ok_or_else(|| TransformError::UnknownRule(r.to_string()))?;
    let ai = rule
        .body
        .iter()
        .position(|a| a == alpha)
        .ok_or_else(|| TransformError::AtomNotInRule {
            rule: r.to_string(),
            atom: alpha.to_string(),
        })?;
    if !idb_predicates(p).contains(&alpha.pred) {
        return Err(TransformError::AtomNotIdb(alpha.to_string()));
    }
    let k = rule.num_vars();
    let unifiable = |b: &Atom| mgu(alpha, &shift(b, k)).is_some();
    let mut arena: Vec<Rule> = p.proper_rules().cloned().collect();
    let mut current: Vec<(usize, Atom)> = Vec::new();
    for (i, s) in arena.iter().enumerate() {
        for b in &s.head {
            if unifiable(b) {
                current.push((i, b.clone()));
            }
        }
    }
    let mut produced: Vec<Rule> = Vec::new();
    while !current.is_empty() {
        let mut next = Vec::new();
        let mut seen: HashSet<(Rule, Atom)> = HashSet::new();
        for (si, beta) in &current {
            let s = arena[*si].clone();
            let sb: Vec<Atom> = s.body.iter().map(|a| shift(a, k)).collect();
            let sh: Vec<Atom> = s.head.iter().map(|a| shift(a, k)).collect();
            let bi = s.head.iter().position(|a| a == beta).expect("pair atoms come from the rule's head");
            let id = RuleId::new(format!("{}.u{}", rule.id, produced.len() + 1));
            let Some(res) = resolve(rule, ai, &sb, &sh, bi, id) else {
                continue;
            };
            produced.push(res.rule.clone());
            let idx = arena.len();
            arena.push(res.rule.clone());
            for (sj, other) in &current {
                if sj != si || other == beta {
                    continue;
                }
                let moved = res.theta.apply_atom(&shift(other, k));
                let renamed = moved.map_vars(|v| Term::Var(res.renumber[&v]));
                if res.rule.head.contains(&renamed)
                    && unifiable(&renamed)
                    && seen.insert((res.rule.clone(), renamed.clone()))
                {
                    next.push((idx, renamed));
                }
            }
        }
        current = next;
    }
    let mut keys: HashSet<String> = HashSet::new();
    let mut rules: Vec<Rule> = Vec::new();
    for s in p.proper_rules().filter(|s| &s.id != r).chain(produced.iter()) {
        if keys.insert(rule_key(s)) {
            rules.push(s.clone());
        }
    }
    Ok(Program::derived(rules))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Predicate;
    use crate::text::{parse_program, program_equiv, rule_equiv};

    fn atom(p: &str, args: &[Term]) -> Atom {
        Atom::new(Predicate::user(p, args.len()), args.to_vec())
    }

    fn c(s: &str) -> Term {
        Term::constant(s)
    }

    #[test]
    fn mgu_examples() {
        let s = mgu(&atom("p", &[Term::Var(0)]), &atom("p", &[c("a")])).unwrap();
        assert_eq!(s.get(0), Some(&c("a")));
        let s = mgu(&atom("r", &[Term::Var(0), c("b")]), &atom("r", &[c("a"), Term::Var(1)])).unwrap();
        assert_eq!((s.get(0), s.get(1)), (Some(&c("a")), Some(&c("b"))));
        assert!(mgu(&atom("p", &[c("a")]), &atom("q", &[c("a")])).is_none());
        assert!(mgu(&atom("p", &[c("a")]), &atom("p", &[c("b")])).is_none());
    }

    #[test]
    fn mgu_chains_are_resolved() {
        let a = atom("p", &[Term::Var(0), Term::Var(1), Term::Var(2)]);
        let b = atom("p", &[Term::Var(1), Term::Var(2), c("k")]);
        let s = mgu(&a, &b).unwrap();
        assert!(s.is_idempotent());
        assert_eq!(s.apply_atom(&a), s.apply_atom(&b));
        assert_eq!(s.apply_atom(&a), atom("p", &[c("k"), c("k"), c("k")]));
    }

    fn p4_expanded() -> Program {
        parse_program(
            "[10] c'(X) | d'(X) :- a'(X), b'(X).\n[11] a'(X) | f'(X) :- e(X).\n[12] b'(Y) :- c'(X), r(X,Y).\n\
             [a] a'(X) :- a(X).\n[b] b'(X) :- b(X).\n[c] c'(X) :- c(X).\n[d] d'(X) :- d(X).\n[f] f'(X) :- f(X).\n",
        )
        .unwrap()
    }

    #[test]
    fn elem_unfold_yields_13_and_14() {
        let p = p4_expanded();
        let r10 = p.rule(&RuleId::new("10")).unwrap();
        let alpha = r10.body.iter().find(|a| a.pred.name.to_string() == "a'").unwrap();
        let r11 = p.rule(&RuleId::new("11")).unwrap();
        let (r14, _) = elem_unfold(r10, alpha, r11, &r11.head[0]).unwrap();
        let expect14 = parse_program("c'(X) | d'(X) | f'(X) :- e(X), b'(X).").unwrap();
        assert!(rule_equiv(&r14, &expect14.rules()[0]));
        let ra = p.rule(&RuleId::new("a")).unwrap();
        let (r13, _) = elem_unfold(r10, alpha, ra, &ra.head[0]).unwrap();
        let expect13 = parse_program("c'(X) | d'(X) :- a(X), b'(X).").unwrap();
        assert!(rule_equiv(&r13, &expect13.rules()[0]));
    }

    #[test]
    fn elem_unfold_with_a_unit_clause() {
        let p = parse_program("q(X) :- p(X).\np(a).").unwrap();
        let (r, s) = (&p.rules()[0], &p.rules()[1]);
        let (res, theta) = elem_unfold(r, &r.body[0], s, &s.head[0]).unwrap();
        assert!(res.body.is_empty());
        assert_eq!(res.head, vec![atom("q", &[c("a")])]);
        assert_eq!(theta.get(0), Some(&c("a")));
    }

    #[test]
    fn unfold_replaces_rule_10() {
        let p = p4_expanded();
        let r10 = p.rule(&RuleId::new("10")).unwrap().clone();
        let alpha = r10.body.iter().find(|a| a.pred.name.to_string() == "a'").unwrap();
        let out = unfold(&p, &r10.id, alpha).unwrap();
        let expected = parse_program(
            "c'(X) | d'(X) :- a(X), b'(X).\nc'(X) | d'(X) | f'(X) :- e(X), b'(X).\n\
             a'(X) | f'(X) :- e(X).\nb'(Y) :- c'(X), r(X,Y).\n\
             a'(X) :- a(X).\nb'(X) :- b(X).\nc'(X) :- c(X).\nd'(X) :- d(X).\nf'(X) :- f(X).\n",
        )
        .unwrap();
        assert!(program_equiv(&out, &expected));
    }

    #[test]
    fn unfold_without_matches_drops_the_rule() {
        let p = parse_program("b(X) :- a(X), c(X).\nc(a) :- d(a).").unwrap();
        let r = p.rules()[0].clone();
        let out = unfold(&p, &r.id, &r.body[1]).unwrap();
        // c(a) unifies with c(X); make one that cannot
        assert_eq!(out.len(), 2);
        let p = parse_program("b(X) :- c(X,X).\nc(a,b) :- d(a).").unwrap();
        let r = p.rules()[0].clone();
        let out = unfold(&p, &r.id, &r.body[0]).unwrap();
        assert_eq!(out.len(), 1);
        assert!(out.rule(&r.id).is_none());
    }

    #[test]
    fn unfold_iterates_over_repeated_head_atoms() {
        let p = parse_program("[r] q(X) :- p(X), w(X).\n[s] p(X) | p(Y) :- e(X,Y).").unwrap();
        let r = p.rule(&RuleId::new("r")).unwrap().clone();
        let out = unfold(&p, &r.id, &r.body[0]).unwrap();
        let expected = parse_program(
            "[s] p(X) | p(Y) :- e(X,Y).\n\
             q(X) | p(Y) :- e(X,Y), w(X).\n\
             q(Y) | p(X) :- e(X,Y), w(Y).\n\
             q(X) | q(Y) :- e(X,Y), w(X), w(Y).\n",
        )
        .unwrap();
        assert!(program_equiv(&out, &expected), "{out}");
    }

    #[test]
    fn unfold_errors() {
        let p = parse_program("b(X) :- a(X), c(X).\nc(X) :- d(X).").unwrap();
        let r = p.rules()[0].clone();
        assert!(matches!(unfold(&p, &r.id, &r.body[0]), Err(TransformError::AtomNotIdb(_))));
        let stray = atom("zz", &[c("a")]);
        assert!(matches!(unfold(&p, &r.id, &stray), Err(TransformError::AtomNotInRule { .. })));
    }
}
