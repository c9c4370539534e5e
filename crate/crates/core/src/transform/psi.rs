use std::collections::BTreeSet;

use super::{aux_atom, check_fresh, fresh_vars, short, Case, Emitter, RewriteOutput};
use crate::model::{idb_expansion, idb_predicates, Atom, Predicate, Program, Renaming, Rule, RuleId};
use crate::TransformError;

/// Ψ: rewrites a datalog program into a linear disjunctive program over its
/// IDB expansion. Returns the expansion's renaming `Q ↦ Q'`.
pub fn psi(p: &Program) -> Result<(RewriteOutput, Renaming), TransformError> {
    if let Some(r) = p.proper_rules().find(|r| r.is_disjunctive()) {
        return Err(TransformError::NotDatalog { rule: r.id.to_string() });
    }
    let (pe, theta) = idb_expansion(p);
    let idb = idb_predicates(&pe);
    let mut edb: BTreeSet<Predicate> = pe.predicates().into_iter().filter(|q| !idb.contains(q) && !q.is_bot()).collect();
    if !idb.is_empty() {
        edb.insert(Predicate::top());
    }
    let bases: BTreeSet<Predicate> = edb.union(&idb).cloned().collect();
    check_fresh(&pe, &bases, &idb)?;
    let mut em = Emitter::default();
    for goal in &idb {
        for rule in pe.proper_rules() {
            let y = fresh_vars(rule.num_vars(), goal);
            let mut head: Vec<Atom> = rule.body.iter().map(|b| aux_atom(b, goal, &y)).collect();
            if head.is_empty() {
                head.push(Atom::bot());
            }
            let q = &rule.head[0];
            let body = if q.pred.is_bot() {
                Vec::new()
            } else {
                vec![aux_atom(q, goal, &y)]
            };
            let id = RuleId::new(format!("{}.{}", rule.id, short(goal)));
            em.emit(Rule::new(id, body, head), Some(&rule.id), Case::Flip);
        }
        let y = fresh_vars(0, goal);
        let mut args = y.clone();
        args.extend(y);
        em.emit(
            Rule::new(
                RuleId::new(format!("init.{}", short(goal))),
                Vec::new(),
                vec![Atom::new(Predicate::aux(goal, goal), args)],
            ),
            None,
            Case::Init,
        );
        for q in &edb {
            let z = fresh_vars(0, q);
            let y = fresh_vars(q.arity as u32, goal);
            let base = Atom::new(q.clone(), z);
            em.emit(
                Rule::new(
                    RuleId::new(format!("col.{}.{}", short(q), short(goal))),
                    vec![base.clone(), aux_atom(&base, goal, &y)],
                    vec![Atom::new(goal.clone(), y)],
                ),
                None,
                Case::Collect,
            );
        }
    }
    Ok((em.finish(idb, pe.predicates()), theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::is_linear;
    use crate::text::{parse_program, program_equiv};

    #[test]
    fn psi_of_p2() {
        let p2 = parse_program("a(X) :- r(X,Y,Z), a(Y), a(Z).").unwrap();
        let (out, theta) = psi(&p2).unwrap();
        assert_eq!(theta.apply(&Predicate::user("a", 1)).name.to_string(), "a'");
        let expected = parse_program(
            "{r^a'}(X,Y,Z,U) | {a'^a'}(Y,U) | {a'^a'}(Z,U) :- top(Y), top(Z), {a'^a'}(X,U).\n\
             {a^a'}(X,Y) :- {a'^a'}(X,Y).\n\
             {a'^a'}(X,X) :- top(X).\n\
             a'(Y) :- a(X), {a^a'}(X,Y).\n\
             a'(U) :- r(X,Y,Z), {r^a'}(X,Y,Z,U).\n\
             a'(Y) :- top(X), {top^a'}(X,Y).\n",
        )
        .unwrap();
        assert!(program_equiv(&out.program, &expected));
        assert!(is_linear(&out.program).holds);
    }

    #[test]
    fn psi_of_a_single_rule() {
        let p = parse_program("b(X) :- a(X).").unwrap();
        let (out, _) = psi(&p).unwrap();
        // two flips, one init, collectors for a, b and top
        assert_eq!(out.program.len(), 6);
        assert!(is_linear(&out.program).holds);
    }

    #[test]
    fn facts_and_bot_rules() {
        let p = parse_program("a(c).\nbot :- a(X), b(X).").unwrap();
        let (out, _) = psi(&p).unwrap();
        let text = crate::text::print_program(&out.program);
        assert!(text.contains("bot :- {a'^a'}(c,X)."), "{text}");
        assert!(text.contains("bot :- {a'^bot}(c)."), "{text}");
        assert!(text.contains("{a'^bot}(X) | {b^bot}(X) :- top(X)."), "{text}");
    }

    #[test]
    fn empty_and_non_datalog() {
        let (out, theta) = psi(&Program::empty()).unwrap();
        assert!(out.program.is_empty() && theta.is_empty());
        let p = parse_program("a(X) | b(X) :- v(X).").unwrap();
        assert!(matches!(psi(&p), Err(TransformError::NotDatalog { .. })));
    }
}
