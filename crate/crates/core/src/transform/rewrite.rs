use serde::Serialize;

use super::{unfold, xi_prime, RewriteOutput};
use crate::analysis::is_wl;
use crate::model::{idb_expansion, Atom, Program, Renaming, RuleId};
use crate::text::print_atom;

/// How the driver picks the atom to unfold.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionStrategy {
    /// First offending rule; among its disjunctive body atoms the one whose
    /// predicate heads the fewest rules, ties broken by position.
    #[default]
    FewestDefinitions,
    /// First offending rule, first disjunctive body atom.
    First,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteConfig {
    pub max_steps: usize,
    /// Abort once the working program exceeds this many rules; `None` means
    /// ten times the size of the expanded input.
    pub max_rules: Option<usize>,
    pub strategy: SelectionStrategy,
}

impl Default for RewriteConfig {
    fn default() -> Self {
        RewriteConfig {
            max_steps: 1000,
            max_rules: None,
            strategy: SelectionStrategy::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub rule: RuleId,
    pub atom: String,
    pub produced: Vec<RuleId>,
    pub program_size: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RewriteOutcome {
    Success,
    StepLimit,
    BlowUp,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RewriteTrace {
    pub strategy: SelectionStrategy,
    pub steps: Vec<TraceStep>,
    pub outcome: RewriteOutcome,
}

#[derive(Clone, Debug)]
pub struct RewriteResult {
    pub trace: RewriteTrace,
    /// The renaming of the IDB expansion the driver starts from.
    pub theta: Renaming,
    /// The last working program (weakly linear on success).
    pub unfolded: Program,
    /// `Ξ′` of the weakly linear program, on success.
    pub output: Option<RewriteOutput>,
}

impl RewriteResult {
    pub fn succeeded(&self) -> bool {
        self.trace.outcome == RewriteOutcome::Success
    }
}

/// The Rewrite procedure: expand the IDB predicates, unfold disjunctive
/// body atoms until the program is weakly linear, then apply `Ξ′`.
/// Failure (a cap tripping) is reported in the trace, never as an error.
pub fn rewrite(p: &Program, cfg: &RewriteConfig) -> RewriteResult {
    let (mut cur, theta) = idb_expansion(p);
    let max_rules = cfg.max_rules.unwrap_or(10 * cur.len().max(1));
    let mut steps = Vec::new();
    let outcome = loop {
        let wl = is_wl(&cur);
        let Some((rule, atoms)) = wl.offenders.first() else {
            break RewriteOutcome::Success;
        };
        if steps.len() >= cfg.max_steps {
            break RewriteOutcome::StepLimit;
        }
        let alpha = select(&cur, atoms, cfg.strategy);
        let next = unfold(&cur, rule, &alpha).expect("disjunctive body atoms are IDB and occur in their rule");
        let before: std::collections::HashSet<&RuleId> = cur.rules().iter().map(|r| &r.id).collect();
        let produced = next.rules().iter().filter(|r| !before.contains(&r.id)).map(|r| r.id.clone()).collect();
        steps.push(TraceStep {
            rule: rule.clone(),
            atom: print_atom(&alpha),
            produced,
            program_size: next.len(),
        });
        cur = next;
        if cur.len() > max_rules {
            break RewriteOutcome::BlowUp;
        }
    };
    let output = (outcome == RewriteOutcome::Success)
        .then(|| xi_prime(&cur).expect("the working program is weakly linear"));
    RewriteResult {
        trace: RewriteTrace {
            strategy: cfg.strategy,
            steps,
            outcome,
        },
        theta,
        unfolded: cur,
        output,
    }
}

fn select(p: &Program, atoms: &[Atom], strategy: SelectionStrategy) -> Atom {
    match strategy {
        SelectionStrategy::First => atoms[0].clone(),
        SelectionStrategy::FewestDefinitions => {
            let defs = |a: &Atom| p.proper_rules().filter(|r| r.head.iter().any(|h| h.pred == a.pred)).count();
            atoms.iter().min_by_key(|a| defs(a)).cloned().expect("offenders have atoms")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{parse_program, program_equiv};

    const P1: &str = "[4] b(X) | g(X) :- v(X).\n[5] b(X) :- g(Y), e(X,Y).\n[6] g(X) :- b(Y), e(X,Y).\n";

    #[test]
    fn p4_needs_one_step() {
        let p4 = parse_program("[8] c(X) | d(X) :- a(X), b(X).\n[9] a(X) | f(X) :- e(X).\n[10] b(Y) :- c(X), r(X,Y).\n")
            .unwrap();
        let res = rewrite(&p4, &RewriteConfig::default());
        assert!(res.succeeded());
        assert_eq!(res.trace.steps.len(), 1);
        assert_eq!(res.trace.steps[0].rule.as_str(), "8");
        assert_eq!(res.trace.steps[0].atom, "a'(X)");
        let produced: Vec<&crate::model::Rule> = res
            .trace
            .steps[0]
            .produced
            .iter()
            .map(|id| res.unfolded.rule(id).unwrap())
            .collect();
        let got = Program::derived(produced.into_iter().cloned().collect());
        let expected = parse_program("c'(X) | d'(X) :- a(X), b'(X).\nc'(X) | d'(X) | f'(X) :- e(X), b'(X).").unwrap();
        assert!(program_equiv(&got, &expected));
        assert!(res.output.unwrap().program.is_datalog());
    }

    #[test]
    fn p3_needs_none() {
        let p3 = parse_program(&format!("{P1}[7] e(X,Y) :- e(Y,X).\n")).unwrap();
        let res = rewrite(&p3, &RewriteConfig::default());
        assert!(res.succeeded());
        assert!(res.trace.steps.is_empty());
    }

    #[test]
    fn three_colouring_fails() {
        let col = parse_program(
            "r(X) | o(X) :- v(X).\ng(X) | b(X) :- o(X).\n\
             bot :- b(X), edge(X,Y), b(Y).\nbot :- g(X), edge(X,Y), g(Y).\nbot :- r(X), edge(X,Y), r(Y).\n\
             bot :- b(X), g(X).\nbot :- g(X), r(X).\nbot :- b(X), r(X).\n",
        )
        .unwrap();
        let cfg = RewriteConfig {
            max_steps: 50,
            ..RewriteConfig::default()
        };
        let res = rewrite(&col, &cfg);
        assert!(!res.succeeded());
        assert!(res.output.is_none());
        assert!(res.trace.steps.len() <= 50);
    }
}
