//! Hyperresolution derivations of disjunctions of facts.
//!
//! Given a rule `β₁ ∧ … ∧ βₙ → φ` and disjunctions `χᵢ = ψᵢ ∨ αᵢ` with `σ`
//! the most general unifier of each `βᵢ` with `αᵢ`, the hyperresolvent is
//! `φσ ∨ ψ₁ ∨ … ∨ ψₙ`. A derivation is a tree whose leaves are facts of the
//! dataset or ground bodiless rules, and whose inner nodes are
//! hyperresolvents of their children. It is normal when every node whose
//! label mentions `⊤` is the root of a `⊤`-stub: `⊤(a)` obtained in one
//! step from a dataset fact by a rule of `P_⊤` (or directly from the
//! bodiless `P_⊤` rule for a constant of the program).

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write;

use serde::Serialize;
use thiserror::Error;

use super::{ClauseSource, GroundClauseSet, Oracle};
use crate::model::{equality_axioms, top_rules, Atom, Dataset, Program, Rule, RuleId, RuleKind, Term};
use crate::text::print_atom;
use crate::EvalError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Justification {
    /// A fact of the dataset.
    Data,
    /// A ground bodiless rule.
    Program { rule: RuleId },
    /// A hyperresolvent; `substitution[i]` is the value of variable `i`.
    Hyper {
        rule: RuleId,
        substitution: Vec<Term>,
        children: Vec<Derivation>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Derivation {
    /// The disjunction at this node, sorted.
    pub label: Vec<Atom>,
    pub justification: Justification,
}

impl Derivation {
    pub fn children(&self) -> &[Derivation] {
        match &self.justification {
            Justification::Hyper { children, .. } => children,
            _ => &[],
        }
    }

    /// Number of hyperresolution steps, `⊤`-stubs included.
    pub fn rule_applications(&self) -> usize {
        let own = matches!(self.justification, Justification::Hyper { .. }) as usize;
        own + self.children().iter().map(Derivation::rule_applications).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(Derivation::depth).max().unwrap_or(0)
    }

    fn label_text(&self) -> String {
        let parts: Vec<String> = self.label.iter().map(print_atom).collect();
        parts.join(" | ")
    }

    fn step_text(&self) -> String {
        match &self.justification {
            Justification::Data => "data".to_string(),
            Justification::Program { rule } => format!("rule {rule}"),
            Justification::Hyper { rule, substitution, .. } => {
                let sub: Vec<String> = substitution
                    .iter()
                    .enumerate()
                    .map(|(i, t)| format!("{}/{t}", crate::text::var_name(i as u32)))
                    .collect();
                format!("rule {rule} {{{}}}", sub.join(", "))
            }
        }
    }

    /// One node per line, children indented below their parent.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        self.text_into(0, &mut out);
        out
    }

    fn text_into(&self, indent: usize, out: &mut String) {
        let _ = writeln!(out, "{:indent$}{}    [{}]", "", self.label_text(), self.step_text(), indent = indent);
        for c in self.children() {
            c.text_into(indent + 2, out);
        }
    }

    /// Graphviz rendering with edges from each node to its children.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph derivation {\n  node [shape=box];\n");
        let mut next = 0;
        self.dot_into(&mut next, &mut out);
        out.push_str("}\n");
        out
    }

    fn dot_into(&self, next: &mut usize, out: &mut String) -> usize {
        let me = *next;
        *next += 1;
        let label = format!("{}\\n{}", self.label_text(), self.step_text()).replace('"', "\\\"");
        let _ = writeln!(out, "  n{me} [label=\"{label}\"];");
        for c in self.children() {
            let k = c.dot_into(next, out);
            let _ = writeln!(out, "  n{me} -> n{k};");
        }
        me
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DerivationError {
    #[error("unknown rule {0}")]
    UnknownRule(String),
    #[error("leaf {0} is neither a dataset fact nor a ground bodiless rule")]
    BadLeaf(String),
    #[error("node {node} is not a hyperresolvent: {reason}")]
    NotHyperresolvent { node: String, reason: String },
    #[error("node {0} mentions top but is not the root of a top-stub")]
    NotNormal(String),
}

/// Bounds for [`find_derivation_with`]; running out is not a disproof.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchLimits {
    /// Rounds of hyperresolution, i.e. the depth cap.
    pub max_rounds: usize,
    pub max_clauses: usize,
    /// Disjunctions longer than this are not kept.
    pub max_width: usize,
    /// Child combinations tried per ground rule instance and round.
    pub max_combinations: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_rounds: 16,
            max_clauses: 20_000,
            max_width: 6,
            max_combinations: 512,
        }
    }
}

/// The rules a derivation over `p` and `d` may use, by id: the regular
/// rules, the congruence axioms when `≈` occurs, and `P_⊤`.
fn rule_table(p: &Program, d: &Dataset) -> HashMap<RuleId, Rule> {
    let regular: Vec<Rule> = p.rules().iter().filter(|r| r.kind == RuleKind::Regular).cloned().collect();
    let sig = Program::derived(regular.clone()).signature().union(&d.signature());
    let mut table = HashMap::new();
    let data_rules: Vec<Rule> = d
        .facts()
        .iter()
        .map(|f| Rule::new(RuleId::new("data"), Vec::new(), vec![f.clone()]))
        .collect();
    let axioms = equality_axioms(&sig);
    for r in top_rules(regular.iter().chain(&axioms).chain(&data_rules)) {
        table.insert(r.id.clone(), r);
    }
    for r in axioms.into_iter().chain(regular) {
        table.insert(r.id.clone(), r);
    }
    table
}

enum Just {
    Data,
    Leaf(RuleId),
    Stub(Atom),
    Hyper { clause: usize, children: Vec<usize> },
}

struct DClause {
    atoms: Vec<u32>,
    just: Just,
}

/// Bounded search for a normal derivation of a sub-disjunction of `phi`
/// (of `⊥` when `phi` is empty).
pub fn find_derivation(p: &Program, d: &Dataset, phi: &[Atom]) -> Result<Option<Derivation>, EvalError> {
    find_derivation_with(p, d, phi, &SearchLimits::default())
}

pub fn find_derivation_with(
    p: &Program,
    d: &Dataset,
    phi: &[Atom],
    limits: &SearchLimits,
) -> Result<Option<Derivation>, EvalError> {
    let g = Oracle::new(p).ground(d)?;
    let table = rule_table(p, d);
    let target: HashSet<u32> = if phi.is_empty() {
        g.atom_id(&Atom::bot()).into_iter().collect()
    } else {
        phi.iter().filter_map(|a| g.atom_id(a)).collect()
    };
    let mut s = Search {
        g: &g,
        d,
        clauses: Vec::new(),
        by_atom: HashMap::new(),
        exact: HashSet::new(),
    };
    for c in &g.clauses {
        let just = match &c.source {
            ClauseSource::Data => Just::Data,
            ClauseSource::Top => Just::Stub(g.atoms[c.head[0] as usize].clone()),
            ClauseSource::Rule { rule, .. } if c.body.is_empty() => Just::Leaf(rule.clone()),
            _ => continue,
        };
        s.add(c.head.clone(), just);
    }
    // instances usable for resolution: those whose body is exactly the rule's
    let usable: Vec<usize> = g
        .clauses
        .iter()
        .enumerate()
        .filter(|(_, c)| match &c.source {
            ClauseSource::Rule { rule, .. } => {
                !c.body.is_empty() && table.get(rule).is_some_and(|r| r.body.len() == c.body.len())
            }
            _ => false,
        })
        .map(|(i, _)| i)
        .collect();
    let mut fresh_from = 0;
    for _ in 0..=limits.max_rounds {
        if let Some(k) = s.clauses.iter().position(|c| c.atoms.iter().all(|a| target.contains(a))) {
            return Ok(Some(s.build(k)));
        }
        let round_start = s.clauses.len();
        for &ci in &usable {
            let c = &g.clauses[ci];
            let options: Vec<Vec<usize>> = c
                .body
                .iter()
                .map(|b| s.by_atom.get(b).cloned().unwrap_or_default())
                .collect();
            if options.iter().any(Vec::is_empty) {
                continue;
            }
            // every combination must use at least one clause from the last round
            if !options.iter().any(|o| o.iter().any(|&k| k >= fresh_from && k < round_start)) {
                continue;
            }
            let mut pick = vec![0usize; options.len()];
            let mut tried = 0;
            'combos: loop {
                if tried >= limits.max_combinations || s.clauses.len() >= limits.max_clauses {
                    break;
                }
                let children: Vec<usize> = pick.iter().zip(&options).map(|(&k, o)| o[k]).collect();
                if children.iter().any(|&k| k >= fresh_from && k < round_start) {
                    tried += 1;
                    let mut atoms: BTreeSet<u32> = c.head.iter().copied().collect();
                    for (b, &k) in c.body.iter().zip(&children) {
                        atoms.extend(s.clauses[k].atoms.iter().copied().filter(|a| a != b));
                    }
                    if atoms.len() <= limits.max_width {
                        let atoms: Vec<u32> = atoms.into_iter().collect();
                        if !s.subsumed(&atoms) {
                            s.add(atoms, Just::Hyper { clause: ci, children });
                        }
                    }
                }
                for k in 0..pick.len() {
                    pick[k] += 1;
                    if pick[k] < options[k].len() {
                        continue 'combos;
                    }
                    pick[k] = 0;
                }
                break;
            }
        }
        if s.clauses.len() == round_start {
            break;
        }
        fresh_from = round_start;
    }
    Ok(s
        .clauses
        .iter()
        .position(|c| c.atoms.iter().all(|a| target.contains(a)))
        .map(|k| s.build(k)))
}

struct Search<'a> {
    g: &'a GroundClauseSet,
    d: &'a Dataset,
    clauses: Vec<DClause>,
    by_atom: HashMap<u32, Vec<usize>>,
    exact: HashSet<Vec<u32>>,
}

impl Search<'_> {
    fn add(&mut self, atoms: Vec<u32>, just: Just) {
        let mut atoms = atoms;
        atoms.sort_unstable();
        atoms.dedup();
        if !self.exact.insert(atoms.clone()) {
            return;
        }
        let k = self.clauses.len();
        for &a in &atoms {
            self.by_atom.entry(a).or_default().push(k);
        }
        self.clauses.push(DClause { atoms, just });
    }

    fn subsumed(&self, atoms: &[u32]) -> bool {
        atoms.iter().any(|a| {
            self.by_atom.get(a).is_some_and(|ks| {
                ks.iter().any(|&k| self.clauses[k].atoms.iter().all(|x| atoms.binary_search(x).is_ok()))
            })
        })
    }

    fn build(&self, k: usize) -> Derivation {
        let c = &self.clauses[k];
        let label = |ids: &[u32]| -> Vec<Atom> {
            let mut v: Vec<Atom> = ids.iter().map(|&i| self.g.atoms[i as usize].clone()).collect();
            v.sort();
            v
        };
        let justification = match &c.just {
            Just::Data => Justification::Data,
            Just::Leaf(rule) => Justification::Program { rule: rule.clone() },
            Just::Stub(top) => return self.stub(top),
            Just::Hyper { clause, children } => {
                let ClauseSource::Rule { rule, binding } = &self.g.clauses[*clause].source else {
                    unreachable!("only rule instances resolve")
                };
                Justification::Hyper {
                    rule: rule.clone(),
                    substitution: binding.clone(),
                    children: children.iter().map(|&k| self.build(k)).collect(),
                }
            }
        };
        Derivation {
            label: label(&c.atoms),
            justification,
        }
    }

    /// `⊤(a)` from a dataset fact mentioning `a`, else from the bodiless
    /// `P_⊤` rule for a program constant.
    fn stub(&self, top: &Atom) -> Derivation {
        let c = &top.args[0];
        let label = vec![top.clone()];
        for f in self.d.facts() {
            if let Some(i) = f.args.iter().position(|t| t == c) {
                let name = format!("top.{}.{}", f.pred.name, i + 1);
                return Derivation {
                    label,
                    justification: Justification::Hyper {
                        rule: RuleId::new(name),
                        substitution: f.args.clone(),
                        children: vec![Derivation {
                            label: vec![f.clone()],
                            justification: Justification::Data,
                        }],
                    },
                };
            }
        }
        Derivation {
            label,
            justification: Justification::Program {
                rule: RuleId::new(format!("top.{c}")),
            },
        }
    }
}

/// Checks every node against the definitions: leaves are dataset facts or
/// ground bodiless rules, inner nodes are hyperresolvents of their children
/// under the recorded substitution, and the derivation is normal.
pub fn check_derivation(p: &Program, d: &Dataset, der: &Derivation) -> Result<(), DerivationError> {
    let table = rule_table(p, d);
    check_node(&table, d, der)
}

fn check_node(table: &HashMap<RuleId, Rule>, d: &Dataset, n: &Derivation) -> Result<(), DerivationError> {
    let label: BTreeSet<&Atom> = n.label.iter().collect();
    let node = n.label_text();
    let lookup = |id: &RuleId| table.get(id).ok_or_else(|| DerivationError::UnknownRule(id.to_string()));
    let mentions_top = n.label.iter().any(|a| a.pred.is_top());
    if mentions_top {
        let stub = n.label.len() == 1
            && match &n.justification {
                Justification::Program { rule } => lookup(rule)?.kind == RuleKind::Top,
                Justification::Hyper { rule, children, .. } => {
                    lookup(rule)?.kind == RuleKind::Top
                        && children.len() == 1
                        && children[0].justification == Justification::Data
                }
                Justification::Data => false,
            };
        if !stub {
            return Err(DerivationError::NotNormal(node));
        }
    }
    match &n.justification {
        Justification::Data => {
            if n.label.len() != 1 || !d.contains(&n.label[0]) {
                return Err(DerivationError::BadLeaf(node));
            }
        }
        Justification::Program { rule } => {
            let r = lookup(rule)?;
            let head: BTreeSet<&Atom> = r.head.iter().collect();
            if !r.body.is_empty() || !r.head.iter().all(Atom::is_ground) || head != label {
                return Err(DerivationError::BadLeaf(node));
            }
        }
        Justification::Hyper {
            rule,
            substitution,
            children,
        } => {
            let r = lookup(rule)?;
            let bad = |reason: String| DerivationError::NotHyperresolvent {
                node: node.clone(),
                reason,
            };
            if children.len() != r.body.len() || r.body.is_empty() {
                return Err(bad(format!("rule {rule} has {} body atoms, node has {} children", r.body.len(), children.len())));
            }
            if substitution.len() != r.num_vars() as usize || substitution.iter().any(|t| t.as_var().is_some()) {
                return Err(bad("substitution must ground every variable of the rule".into()));
            }
            if r.unsafe_var().is_some() {
                return Err(bad(format!("rule {rule} is unsafe, so no unifier is most general")));
            }
            let apply = |a: &Atom| a.map_vars(|v| substitution[v as usize].clone());
            let mut resolvent: BTreeSet<Atom> = r.head.iter().map(apply).collect();
            for (b, child) in r.body.iter().zip(children) {
                let alpha = apply(b);
                if !child.label.contains(&alpha) {
                    return Err(bad(format!("child {} does not contain {}", child.label_text(), print_atom(&alpha))));
                }
                resolvent.extend(child.label.iter().filter(|a| **a != alpha).cloned());
                check_node(table, d, child)?;
            }
            if resolvent.iter().collect::<BTreeSet<_>>() != label {
                let text: Vec<String> = resolvent.iter().map(print_atom).collect();
                return Err(bad(format!("the hyperresolvent is {}", text.join(" | "))));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Predicate;
    use crate::text::{parse_dataset, parse_program};
    use crate::transform::xi;

    const P1: &str = "[4] b(X) | g(X) :- v(X).\n[5] b(X) :- g(Y), e(X,Y).\n[6] g(X) :- b(Y), e(X,Y).\n";
    const D1: &str = "v(a).\nv(b).\nv(c).\ne(a,b).\ne(b,c).\ne(a,c).\n";

    fn b_a() -> Atom {
        Atom::fact(Predicate::user("b", 1), &["a"])
    }

    #[test]
    fn b_a_from_p1() {
        let p = parse_program(P1).unwrap();
        let d = parse_dataset(D1).unwrap();
        let der = find_derivation(&p, &d, &[b_a()]).unwrap().expect("derivable");
        assert_eq!(der.label, vec![b_a()]);
        check_derivation(&p, &d, &der).unwrap();
        assert!(der.rule_applications() >= 4, "{}", der.to_text());
        assert!(der.to_dot().contains("->"));
    }

    #[test]
    fn b_a_from_xi_p1_uses_top_stubs() {
        let p = xi(&parse_program(P1).unwrap()).unwrap().program;
        let d = parse_dataset(D1).unwrap();
        let der = find_derivation(&p, &d, &[b_a()]).unwrap().expect("derivable");
        check_derivation(&p, &d, &der).unwrap();
        assert!(der.to_text().contains("top("), "{}", der.to_text());
    }

    #[test]
    fn dataset_fact_is_a_leaf() {
        let p = parse_program(P1).unwrap();
        let d = parse_dataset(D1).unwrap();
        let v = Atom::fact(Predicate::user("v", 1), &["a"]);
        let der = find_derivation(&p, &d, std::slice::from_ref(&v)).unwrap().unwrap();
        assert_eq!(der, Derivation { label: vec![v], justification: Justification::Data });
    }

    #[test]
    fn not_entailed_gives_none() {
        let p = parse_program(P1).unwrap();
        let d = parse_dataset("v(a).").unwrap();
        assert!(find_derivation(&p, &d, &[b_a()]).unwrap().is_none());
    }

    #[test]
    fn rejects_forged_nodes() {
        let p = parse_program(P1).unwrap();
        let d = parse_dataset(D1).unwrap();
        let mut der = find_derivation(&p, &d, &[b_a()]).unwrap().unwrap();
        der.label = vec![Atom::fact(Predicate::user("g", 1), &["a"])];
        assert!(matches!(check_derivation(&p, &d, &der), Err(DerivationError::NotHyperresolvent { .. })));
        let leaf = Derivation {
            label: vec![b_a()],
            justification: Justification::Data,
        };
        assert!(matches!(check_derivation(&p, &d, &leaf), Err(DerivationError::BadLeaf(_))));
        let top_leaf = Derivation {
            label: vec![Atom::top(Term::constant("a"))],
            justification: Justification::Data,
        };
        assert!(matches!(check_derivation(&p, &d, &top_leaf), Err(DerivationError::NotNormal(_))));
    }

    #[test]
    fn unsat_derivation() {
        let p = parse_program("a(X) | b(X) :- v(X).\nbot :- a(X).\nbot :- b(X).").unwrap();
        let d = parse_dataset("v(c).").unwrap();
        let der = find_derivation(&p, &d, &[]).unwrap().unwrap();
        assert_eq!(der.label, vec![Atom::bot()]);
        check_derivation(&p, &d, &der).unwrap();
    }
}
