use std::collections::BTreeSet;

use super::equiv::canonical_rule;
use crate::model::{Atom, Dataset, Program, Provenance, Rule, Term};

const NAMES: [&str; 6] = ["X", "Y", "Z", "U", "V", "W"];

pub fn var_name(v: u32) -> String {
    let base = NAMES[(v as usize) % NAMES.len()];
    match v as usize / NAMES.len() {
        0 => base.to_string(),
        k => format!("{base}{k}"),
    }
}

fn term(t: &Term) -> String {
    match t {
        Term::Var(v) => var_name(*v),
        Term::Const(c) => c.to_string(),
    }
}

/// Prints an atom with variables named `X, Y, Z, U, V, W, X1, ...`.
pub fn print_atom(a: &Atom) -> String {
    if a.pred.is_eq() {
        return format!("{} = {}", term(&a.args[0]), term(&a.args[1]));
    }
    if a.args.is_empty() {
        return a.pred.name.to_string();
    }
    let args: Vec<String> = a.args.iter().map(term).collect();
    format!("{}({})", a.pred.name, args.join(","))
}

/// Canonical text of one rule: `[id] head :- body.` with sorted atoms.
pub fn print_rule(r: &Rule) -> String {
    let c = canonical_rule(r);
    let head: Vec<String> = c.head.iter().map(print_atom).collect();
    let mut s = format!("[{}] {}", c.id, head.join(" | "));
    if !c.body.is_empty() {
        let body: Vec<String> = c.body.iter().map(print_atom).collect();
        s.push_str(" :- ");
        s.push_str(&body.join(", "));
    }
    s.push('.');
    s
}

/// One rule per line in program order; derived programs start with
/// `#derived`.
pub fn print_program(p: &Program) -> String {
    let mut s = String::new();
    if p.provenance() == Provenance::Derived {
        s.push_str("#derived\n");
    }
    for r in p.rules() {
        s.push_str(&print_rule(r));
        s.push('\n');
    }
    s
}

/// One fact per line, sorted.
pub fn print_dataset(d: &Dataset) -> String {
    let mut s = String::new();
    for f in d.facts() {
        s.push_str(&print_atom(f));
        s.push_str(".\n");
    }
    s
}

/// Ground facts joined by ` | `, sorted and deduplicated.
pub fn print_disjunction<'a>(atoms: impl IntoIterator<Item = &'a Atom>) -> String {
    let set: BTreeSet<&Atom> = atoms.into_iter().collect();
    let parts: Vec<String> = set.into_iter().map(print_atom).collect();
    parts.join(" | ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse_program;

    #[test]
    fn p1_prints_three_lines() {
        let p = parse_program("b(X) | g(X) :- v(X).\nb(X) :- g(Y), e(X,Y).\ng(X) :- b(Y), e(X,Y).\n").unwrap();
        let text = print_program(&p);
        assert_eq!(text.lines().count(), 3);
        assert_eq!(text, print_program(&parse_program(&text).unwrap()));
        assert!(text.starts_with("[r1] b(X) | g(X) :- v(X).\n"));
    }

    #[test]
    fn empty_prints_empty() {
        assert_eq!(print_program(&Program::empty()), "");
    }

    #[test]
    fn variable_names_cycle() {
        assert_eq!(var_name(0), "X");
        assert_eq!(var_name(5), "W");
        assert_eq!(var_name(6), "X1");
    }
}
