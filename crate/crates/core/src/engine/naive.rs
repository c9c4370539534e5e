use std::collections::BTreeSet;

use super::{effective_rules, EvalResult};
use crate::model::{Atom, Dataset, Program, RuleKind, Term};
use crate::EvalError;

/// Reference evaluator: re-applies every rule to the whole fact set until
/// nothing changes. Slow, but shares no join code with [`super::Engine`].
pub fn evaluate_naive(p: &Program, d: &Dataset) -> Result<EvalResult, EvalError> {
    if let Some(r) = p.rules().iter().find(|r| r.head.len() != 1 && r.kind != RuleKind::Top) {
        return Err(EvalError::NotDatalog {
            rule: r.id.to_string(),
        });
    }
    let rules = effective_rules(p, d);
    let mut facts: BTreeSet<Atom> = d.facts().clone();
    let consts: BTreeSet<_> = rules.iter().flat_map(|r| r.constants()).cloned().chain(d.constants()).collect();
    facts.extend(consts.iter().map(|c| Atom::top(Term::Const(c.clone()))));
    let domain: Vec<Term> = consts.into_iter().map(Term::Const).collect();
    loop {
        let mut next = facts.clone();
        for r in &rules {
            let mut sub = vec![None; r.num_vars() as usize];
            matches(&r.body, &facts, &mut sub, &mut |sub| {
                // head-only variables range over the domain
                let mut sub = sub.to_vec();
                for_each_completion(&mut sub, 0, &domain, &mut |full| {
                    let h = r.head[0].map_vars(|v| full[v as usize].clone().expect("completed"));
                    next.insert(h);
                });
            });
        }
        if next.contains(&Atom::bot()) {
            return Ok(EvalResult::unsat());
        }
        if next.len() == facts.len() {
            return Ok(EvalResult::consistent(facts));
        }
        facts = next;
    }
}

fn matches(body: &[Atom], facts: &BTreeSet<Atom>, sub: &mut Vec<Option<Term>>, k: &mut dyn FnMut(&[Option<Term>])) {
    let Some((first, rest)) = body.split_first() else {
        k(sub);
        return;
    };
    for f in facts.iter().filter(|f| f.pred == first.pred) {
        let saved = sub.clone();
        let ok = first.args.iter().zip(&f.args).all(|(t, c)| match t {
            Term::Const(_) => t == c,
            Term::Var(v) => match &sub[*v as usize] {
                Some(b) => b == c,
                None => {
                    sub[*v as usize] = Some(c.clone());
                    true
                }
            },
        });
        if ok {
            matches(rest, facts, sub, k);
        }
        *sub = saved;
    }
}

fn for_each_completion(sub: &mut Vec<Option<Term>>, i: usize, domain: &[Term], k: &mut dyn FnMut(&[Option<Term>])) {
    if i == sub.len() {
        k(sub);
        return;
    }
    if sub[i].is_some() {
        return for_each_completion(sub, i + 1, domain, k);
    }
    for c in domain {
        sub[i] = Some(c.clone());
        for_each_completion(sub, i + 1, domain, k);
    }
    sub[i] = None;
}
