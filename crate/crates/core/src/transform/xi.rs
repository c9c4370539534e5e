use std::collections::BTreeSet;

use super::{aux_atom, check_fresh, fresh_vars, short, Case, Emitter, RewriteOutput};
use crate::analysis::{classify_predicates, is_linear, is_wl};
use crate::model::{idb_predicates, Atom, Predicate, Program, Rule, RuleId};
use crate::TransformError;

/// Ξ: the datalog rewriting of a linear program, with `Σ` the IDB
/// predicates.
pub fn xi(p: &Program) -> Result<RewriteOutput, TransformError> {
    let lin = is_linear(p);
    if let Some((rule, _)) = lin.offenders.first() {
        return Err(TransformError::NotLinear { rule: rule.to_string() });
    }
    build(p, idb_predicates(p))
}

/// Ξ′: the datalog rewriting of a weakly linear program, with `Σ` the
/// disjunctive predicates. Rules mentioning no predicate of `Σ` are copied.
pub fn xi_prime(p: &Program) -> Result<RewriteOutput, TransformError> {
    let wl = is_wl(p);
    if let Some((rule, _)) = wl.offenders.first() {
        return Err(TransformError::NotWl { rule: rule.to_string() });
    }
    build(p, classify_predicates(p).disjunctive())
}

fn build(p: &Program, sigma: BTreeSet<Predicate>) -> Result<RewriteOutput, TransformError> {
    check_fresh(p, &sigma, &sigma)?;
    let mut em = Emitter::default();
    for r in &sigma {
        let y = fresh_vars(0, r);
        let mut args = y.clone();
        args.extend(y);
        let init = Rule::new(
            RuleId::new(format!("init.{}", short(r))),
            Vec::new(),
            vec![Atom::new(Predicate::aux(r, r), args)],
        );
        em.emit(init, None, Case::Init);
    }
    for rule in p.proper_rules() {
        let in_sigma: Vec<&Atom> = rule.body.iter().filter(|a| sigma.contains(&a.pred)).collect();
        if in_sigma.is_empty() && !rule.head.iter().any(|a| sigma.contains(&a.pred)) {
            em.emit(rule.clone(), Some(&rule.id), Case::Verbatim);
            continue;
        }
        debug_assert!(rule.head.iter().all(|a| sigma.contains(&a.pred)));
        let chi: Vec<Atom> = rule.body.iter().filter(|a| !sigma.contains(&a.pred)).cloned().collect();
        for goal in &sigma {
            let y = fresh_vars(rule.num_vars(), goal);
            let mut body = chi.clone();
            body.extend(rule.head.iter().map(|h| aux_atom(h, goal, &y)));
            let id = RuleId::new(format!("{}.{}", rule.id, short(goal)));
            match in_sigma.as_slice() {
                [] => em.emit(
                    Rule::new(id, body, vec![Atom::new(goal.clone(), y)]),
                    Some(&rule.id),
                    Case::Close,
                ),
                [q] => em.emit(
                    Rule::new(id, body, vec![aux_atom(q, goal, &y)]),
                    Some(&rule.id),
                    Case::Flip,
                ),
                _ => unreachable!("checked by the linearity tests"),
            }
        }
    }
    // the implicit rule (⊥ →) flips to χ_⊤ → ⊥^R(y)
    let bot = Predicate::bot();
    if sigma.contains(&bot) {
        for goal in &sigma {
            let y = fresh_vars(0, goal);
            let r = Rule::new(
                RuleId::new(format!("bot.{}", short(goal))),
                Vec::new(),
                vec![aux_atom(&Atom::bot(), goal, &y)],
            );
            em.emit(r, None, Case::Flip);
        }
    }
    for q in &sigma {
        for goal in &sigma {
            let z = fresh_vars(0, q);
            let y = fresh_vars(q.arity as u32, goal);
            let base = Atom::new(q.clone(), z);
            let r = Rule::new(
                RuleId::new(format!("col.{}.{}", short(q), short(goal))),
                vec![base.clone(), aux_atom(&base, goal, &y)],
                vec![Atom::new(goal.clone(), y)],
            );
            em.emit(r, None, Case::Collect);
        }
    }
    Ok(em.finish(sigma, p.predicates()))
}

/// Drops every rule mentioning an auxiliary predicate whose goal lies
/// outside `goals`. Goal `⊥` is always kept, so unsatisfiability stays
/// observable.
pub fn prune_for_goals(out: &RewriteOutput, goals: &BTreeSet<Predicate>) -> Result<Program, TransformError> {
    for g in goals {
        if !g.is_bot() && !out.source_predicates.contains(g) {
            return Err(TransformError::UnknownPredicate(g.to_string()));
        }
    }
    let keep = |p: &Predicate| match p.aux_parts() {
        Some((_, goal)) => goal.is_bot() || goals.contains(goal),
        None => true,
    };
    let rules = out
        .program
        .rules()
        .iter()
        .filter(|r| r.atoms().all(|a| keep(&a.pred)))
        .cloned()
        .collect();
    Ok(Program::derived(rules))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{parse_program, program_equiv};

    const P1: &str = "[4] b(X) | g(X) :- v(X).\n[5] b(X) :- g(Y), e(X,Y).\n[6] g(X) :- b(Y), e(X,Y).\n";

    #[test]
    fn xi_of_p1_matches_the_displayed_program() {
        let out = xi(&parse_program(P1).unwrap()).unwrap();
        let mut expected = String::from("#derived\n");
        for x in ["b", "g"] {
            expected.push_str(&format!("{{{x}^{x}}}(X,X) :- top(X).\n"));
            expected.push_str(&format!("{x}(Z) :- v(X), {{b^{x}}}(X,Z), {{g^{x}}}(X,Z).\n"));
            expected.push_str(&format!("{{g^{x}}}(Y,Z) :- {{b^{x}}}(X,Z), e(X,Y).\n"));
            expected.push_str(&format!("{{b^{x}}}(Y,Z) :- {{g^{x}}}(X,Z), e(X,Y).\n"));
            expected.push_str(&format!("{x}(Z) :- b(X), {{b^{x}}}(X,Z).\n"));
            expected.push_str(&format!("{x}(Z) :- g(X), {{g^{x}}}(X,Z).\n"));
        }
        let expected = parse_program(&expected).unwrap();
        assert_eq!(out.program.len(), 12);
        assert!(program_equiv(&out.program, &expected));
        assert!(out.program.is_datalog());
        assert_eq!(out.aux.len(), 4);
    }

    #[test]
    fn xi_rejects_non_linear() {
        let p3 = parse_program(&format!("{P1}[7] e(X,Y) :- e(Y,X).\n")).unwrap();
        assert!(matches!(xi(&p3), Err(TransformError::NotLinear { .. })));
        assert!(xi_prime(&p3).is_ok());
    }

    #[test]
    fn xi_prime_of_p3_copies_the_datalog_rule() {
        let p3 = parse_program(&format!("{P1}[7] e(X,Y) :- e(Y,X).\n")).unwrap();
        let out = xi_prime(&p3).unwrap();
        assert!(out.program.is_datalog());
        let verbatim: Vec<_> = out.origins.iter().filter(|o| o.case == Case::Verbatim).collect();
        assert_eq!(verbatim.len(), 1);
        assert_eq!(verbatim[0].source.as_ref().unwrap().as_str(), "7");
        assert_eq!(out.program.len(), 13);
    }

    #[test]
    fn datalog_input_is_copied() {
        let p = parse_program("a(X) :- b(X).\nc(X) :- a(X), a(Y), e(X,Y).").unwrap();
        let out = xi_prime(&p).unwrap();
        assert!(out.sigma.is_empty());
        assert!(program_equiv(&out.program, &p));
    }

    #[test]
    fn empty_sigma_for_idb_free_input() {
        let out = xi(&Program::empty()).unwrap();
        assert!(out.program.is_empty() && out.sigma.is_empty());
    }

    #[test]
    fn pruning() {
        let p3 = parse_program(&format!("{P1}[7] e(X,Y) :- e(Y,X).\n")).unwrap();
        let out = xi_prime(&p3).unwrap();
        let e: BTreeSet<Predicate> = [Predicate::user("e", 2)].into();
        let pe = prune_for_goals(&out, &e).unwrap();
        assert!(pe.predicates().iter().all(|q| q.aux_parts().is_none()));
        let all = p3.predicates();
        assert_eq!(prune_for_goals(&out, &all).unwrap().rules(), out.program.rules());
        let b: BTreeSet<Predicate> = [Predicate::user("b", 1)].into();
        let pb = prune_for_goals(&out, &b).unwrap();
        assert!(pb
            .predicates()
            .iter()
            .filter_map(|q| q.aux_parts())
            .all(|(_, g)| g.name.to_string() == "b"));
        let unknown: BTreeSet<Predicate> = [Predicate::user("zz", 1)].into();
        assert!(prune_for_goals(&out, &unknown).is_err());
    }

    #[test]
    fn bot_in_sigma_flips_the_implicit_rule() {
        let p = parse_program("a(X) | b(X) :- v(X).\nbot :- a(X), w(X).").unwrap();
        let out = xi_prime(&p).unwrap();
        let text = crate::text::print_program(&out.program);
        assert!(text.contains("{bot^a}(X) :- top(X)."), "{text}");
        assert!(text.contains("a(X) :- bot, {bot^a}(X)."), "{text}");
    }
}
