//! Comparison of rules and programs up to variable renaming.

use std::collections::HashMap;

use crate::model::{Atom, Program, Rule, RuleKind, Term, Var};

/// Sort key that ignores variable identities but keeps the equality
/// pattern inside the atom.
fn shape(a: &Atom) -> (String, Vec<(u8, String)>) {
    let mut local: HashMap<Var, usize> = HashMap::new();
    let args = a
        .args
        .iter()
        .map(|t| match t {
            Term::Var(v) => {
                let n = local.len();
                (0, local.entry(*v).or_insert(n).to_string())
            }
            Term::Const(c) => (1, c.to_string()),
        })
        .collect();
    (a.pred.name.to_string(), args)
}

fn full_key(a: &Atom) -> (String, Vec<(u8, String)>) {
    let args = a
        .args
        .iter()
        .map(|t| match t {
            Term::Var(v) => (0, format!("{v:08}")),
            Term::Const(c) => (1, c.to_string()),
        })
        .collect();
    (a.pred.name.to_string(), args)
}

/// A deterministic representative of the rule: atoms sorted, variables
/// numbered by first occurrence. Rules equal up to renaming usually, though
/// not always, share a representative; [`rule_equiv`] is exact.
pub fn canonical_rule(r: &Rule) -> Rule {
    let mut body = r.body.clone();
    let mut head = r.head.clone();
    body.sort_by_cached_key(shape);
    head.sort_by_cached_key(shape);
    let mut cur = Rule::with_kind(r.id.clone(), r.kind, body, head);
    for _ in 0..4 {
        let mut body = cur.body.clone();
        let mut head = cur.head.clone();
        body.sort_by_cached_key(|a| (shape(a), full_key(a)));
        head.sort_by_cached_key(|a| (shape(a), full_key(a)));
        let next = Rule::with_kind(r.id.clone(), r.kind, body, head);
        if next == cur {
            break;
        }
        cur = next;
    }
    cur
}

/// Hashable key of the canonical form, ignoring the rule id.
pub fn rule_key(r: &Rule) -> String {
    let c = canonical_rule(r);
    let body: Vec<String> = c.body.iter().map(ToString::to_string).collect();
    let head: Vec<String> = c.head.iter().map(ToString::to_string).collect();
    format!("{} <- {}", head.join(" | "), body.join(", "))
}

/// True iff `a` and `b` are equal up to a bijective renaming of variables
/// (rule ids are ignored).
pub fn rule_equiv(a: &Rule, b: &Rule) -> bool {
    if a.body.len() != b.body.len() || a.head.len() != b.head.len() || a.num_vars() != b.num_vars() {
        return false;
    }
    let left: Vec<(&Atom, bool)> = a.body.iter().map(|x| (x, false)).chain(a.head.iter().map(|x| (x, true))).collect();
    let right: Vec<(&Atom, bool)> = b.body.iter().map(|x| (x, false)).chain(b.head.iter().map(|x| (x, true))).collect();
    let mut used = vec![false; right.len()];
    let mut fwd: HashMap<Var, Var> = HashMap::new();
    let mut bwd: HashMap<Var, Var> = HashMap::new();
    search(&left, &right, 0, &mut used, &mut fwd, &mut bwd)
}

fn search(
    left: &[(&Atom, bool)],
    right: &[(&Atom, bool)],
    i: usize,
    used: &mut [bool],
    fwd: &mut HashMap<Var, Var>,
    bwd: &mut HashMap<Var, Var>,
) -> bool {
    if i == left.len() {
        return true;
    }
    let (la, lh) = left[i];
    for j in 0..right.len() {
        let (ra, rh) = right[j];
        if used[j] || rh != lh || ra.pred != la.pred {
            continue;
        }
        let mut added = Vec::new();
        let mut ok = true;
        for (x, y) in la.args.iter().zip(&ra.args) {
            match (x, y) {
                (Term::Const(c), Term::Const(d)) if c == d => {}
                (Term::Var(u), Term::Var(v)) => match (fwd.get(u), bwd.get(v)) {
                    (Some(w), _) if w == v => {}
                    (None, None) => {
                        fwd.insert(*u, *v);
                        bwd.insert(*v, *u);
                        added.push((*u, *v));
                    }
                    _ => {
                        ok = false;
                        break;
                    }
                },
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            used[j] = true;
            if search(left, right, i + 1, used, fwd, bwd) {
                return true;
            }
            used[j] = false;
        }
        for (u, v) in added {
            fwd.remove(&u);
            bwd.remove(&v);
        }
    }
    false
}

/// True iff the rules outside `P_⊤` of both programs can be matched one to
/// one up to variable renaming (order and ids are ignored).
pub fn program_equiv(p: &Program, q: &Program) -> bool {
    let a: Vec<&Rule> = p.rules().iter().filter(|r| r.kind != RuleKind::Top).collect();
    let b: Vec<&Rule> = q.rules().iter().filter(|r| r.kind != RuleKind::Top).collect();
    if a.len() != b.len() {
        return false;
    }
    let adj: Vec<Vec<usize>> = a
        .iter()
        .map(|r| (0..b.len()).filter(|&j| rule_equiv(r, b[j])).collect())
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; b.len()];
    fn augment(i: usize, adj: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &j in &adj[i] {
            if seen[j] {
                continue;
            }
            seen[j] = true;
            if owner[j].is_none() || augment(owner[j].unwrap(), adj, seen, owner) {
                owner[j] = Some(i);
                return true;
            }
        }
        false
    }
    (0..a.len()).all(|i| {
        let mut seen = vec![false; b.len()];
        augment(i, &adj, &mut seen, &mut owner)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse_program;

    fn rule(s: &str) -> Rule {
        parse_program(s).unwrap().rules()[0].clone()
    }

    #[test]
    fn renaming_and_reordering_are_equivalent() {
        let a = rule("b(X) :- g(Y), e(X,Y).");
        let b = rule("b(U) :- e(U,W), g(W).");
        assert!(rule_equiv(&a, &b));
        assert_eq!(rule_key(&a), rule_key(&b));
        let c = rule("b(X) :- g(X), e(X,Y).");
        assert!(!rule_equiv(&a, &c));
    }

    #[test]
    fn constants_must_match() {
        assert!(!rule_equiv(&rule("p(a) :- q(a)."), &rule("p(b) :- q(b).")));
        assert!(rule_equiv(&rule("p(a) :- q(a)."), &rule("p(a) :- q(a).")));
    }

    #[test]
    fn programs_match_as_multisets() {
        let p = parse_program("a(X) :- b(X).\nc(X) :- b(X).").unwrap();
        let q = parse_program("c(Y) :- b(Y).\na(Z) :- b(Z).").unwrap();
        assert!(program_equiv(&p, &q));
        let r = parse_program("a(X) :- b(X).\na(Y) :- b(Y).").unwrap();
        assert!(!program_equiv(&p, &r));
    }
}
