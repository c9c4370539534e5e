//! Normalised RL ontologies with binary disjunction, and their translation
//! into programs.
//!
//! Surface syntax, one axiom per line (`%` starts a comment, a trailing `.`
//! is optional):
//!
//! ```text
//! maxCard(a, r, b)                    % A ⊑ ≤1 R.B
//! subClassOf(and(a, b), c)            % A ⊓ B ⊑ C
//! subClassOf(some(r, a), b)           % ∃R.A ⊑ B
//! subPropertyOf(r, s)                 % R ⊑ S
//! subPropertyOf(chain(r, s), t)       % R ∘ S ⊑ T
//! subClassOf(a, self(r))              % A ⊑ ∃R.Self
//! subClassOf(self(r), a)              % ∃R.Self ⊑ A
//! inverseSubPropertyOf(r, s)          % R ⊑ S⁻
//! subClassOf(a, nominal(o))           % A ⊑ {o}
//! classAssertion(a, o)                % A(o)
//! disjunction(a, b, c)                % A ⊑ B ⊔ C
//! ```
//!
//! `top` and `bot` name `⊤` and `⊥`. Two shapes that are not normalised
//! are accepted and normalised on the fly with fresh concept names: unions
//! of more than two concepts (`disjunction(v, r, g, b)` or
//! `subClassOf(v, or(r, g, b))`) and existentials inside a conjunction on
//! the left (`subClassOf(and(b, some(edge, b)), bot)`). Everything else
//! outside the table is rejected.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::model::{equality_axioms, Atom, Predicate, Program, Provenance, Rule, RuleId, Term};

/// An atomic concept, `⊤` or `⊥`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Concept {
    Top,
    Bot,
    Named(String),
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Concept::Top => f.write_str("top"),
            Concept::Bot => f.write_str("bot"),
            Concept::Named(n) => f.write_str(n),
        }
    }
}

/// The eleven normalised forms; `A`, `B` are atomic or `⊤`, `C` is atomic
/// or `⊥`, roles are atomic and `ind` is an individual.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "form")]
pub enum AxiomForm {
    /// `A ⊑ ≤1 R.B`
    MaxCard { a: Concept, r: String, b: Concept },
    /// `A ⊓ B ⊑ C`
    Conjunction { a: Concept, b: Concept, c: Concept },
    /// `∃R.A ⊑ B`
    Existential { r: String, a: Concept, b: Concept },
    /// `R ⊑ S`
    SubRole { r: String, s: String },
    /// `R ∘ S ⊑ T`
    Chain { r: String, s: String, t: String },
    /// `A ⊑ ∃R.Self`
    SelfSup { a: Concept, r: String },
    /// `∃R.Self ⊑ A`
    SelfSub { r: String, a: Concept },
    /// `R ⊑ S⁻`
    Inverse { r: String, s: String },
    /// `A ⊑ {ind}`
    Nominal { a: Concept, ind: String },
    /// `{ind} ⊑ A`
    Assertion { a: Concept, ind: String },
    /// `A ⊑ B ⊔ C`
    Union { a: Concept, b: Concept, c: Concept },
}

impl AxiomForm {
    /// Row of the translation table, 1 to 11.
    pub fn row(&self) -> u8 {
        match self {
            AxiomForm::MaxCard { .. } => 1,
            AxiomForm::Conjunction { .. } => 2,
            AxiomForm::Existential { .. } => 3,
            AxiomForm::SubRole { .. } => 4,
            AxiomForm::Chain { .. } => 5,
            AxiomForm::SelfSup { .. } => 6,
            AxiomForm::SelfSub { .. } => 7,
            AxiomForm::Inverse { .. } => 8,
            AxiomForm::Nominal { .. } => 9,
            AxiomForm::Assertion { .. } => 10,
            AxiomForm::Union { .. } => 11,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RlorAxiom {
    /// `o{n}` for the `n`-th axiom of the file, with `.k` suffixes when
    /// normalisation split it.
    pub label: String,
    pub line: usize,
    pub form: AxiomForm,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RlorError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown axiom form {name}")]
    UnknownForm { line: usize, name: String },
    #[error("line {line}: {message}")]
    NotNormalised { line: usize, message: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Expr {
    Name(String, usize),
    Call(String, Vec<Expr>, usize),
}

impl Expr {
    fn line(&self) -> usize {
        match self {
            Expr::Name(_, l) | Expr::Call(_, _, l) => *l,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Name(n, _) => f.write_str(n),
            Expr::Call(n, args, _) => {
                let parts: Vec<String> = args.iter().map(Expr::to_string).collect();
                write!(f, "{n}({})", parts.join(", "))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Open,
    Close,
    Comma,
    Dot,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, RlorError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let src = raw.split('%').next().unwrap_or("");
        let mut chars = src.char_indices().peekable();
        while let Some((start, c)) = chars.next() {
            match c {
                c if c.is_whitespace() => {}
                '(' => out.push((Tok::Open, line)),
                ')' => out.push((Tok::Close, line)),
                ',' => out.push((Tok::Comma, line)),
                '.' => out.push((Tok::Dot, line)),
                c if c.is_ascii_alphanumeric() || c == '_' => {
                    let mut end = start + c.len_utf8();
                    while let Some(&(k, x)) = chars.peek() {
                        if x.is_ascii_alphanumeric() || x == '_' {
                            end = k + x.len_utf8();
                            chars.next();
                        } else {
                            break;
                        }
                    }
                    out.push((Tok::Ident(src[start..end].to_string()), line));
                }
                other => {
                    return Err(RlorError::Syntax {
                        line,
                        message: format!("unexpected character {other:?}"),
                    })
                }
            }
        }
    }
    Ok(out)
}

struct Reader {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Reader {
    fn line(&self) -> usize {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map_or(1, |(_, l)| *l)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn err(&self, message: impl Into<String>) -> RlorError {
        RlorError::Syntax {
            line: self.line(),
            message: message.into(),
        }
    }

    fn expr(&mut self) -> Result<Expr, RlorError> {
        let line = self.line();
        let Some((Tok::Ident(name), _)) = self.toks.get(self.pos).cloned() else {
            return Err(self.err("expected a name"));
        };
        self.pos += 1;
        if self.peek() != Some(&Tok::Open) {
            return Ok(Expr::Name(name, line));
        }
        self.pos += 1;
        let mut args = Vec::new();
        if self.peek() != Some(&Tok::Close) {
            loop {
                args.push(self.expr()?);
                match self.peek() {
                    Some(Tok::Comma) => self.pos += 1,
                    Some(Tok::Close) => break,
                    _ => return Err(self.err("expected ',' or ')'")),
                }
            }
        }
        self.pos += 1;
        Ok(Expr::Call(name, args, line))
    }
}

fn not_normalised(e: &Expr, why: &str) -> RlorError {
    RlorError::NotNormalised {
        line: e.line(),
        message: format!("{e}: {why}"),
    }
}

fn name_of(e: &Expr, what: &str) -> Result<String, RlorError> {
    match e {
        Expr::Name(n, _) if n != "top" && n != "bot" => {
            if n.starts_with(|c: char| c.is_ascii_lowercase()) {
                Ok(n.clone())
            } else {
                Err(not_normalised(e, &format!("{what} names must start with a lowercase letter")))
            }
        }
        _ => Err(not_normalised(e, &format!("expected an atomic {what}"))),
    }
}

fn individual(e: &Expr) -> Result<String, RlorError> {
    match e {
        Expr::Name(n, _) if n != "top" && n != "bot" => Ok(n.clone()),
        _ => Err(not_normalised(e, "expected an individual")),
    }
}

fn concept(e: &Expr) -> Result<Concept, RlorError> {
    match e {
        Expr::Name(n, _) if n == "top" => Ok(Concept::Top),
        Expr::Name(n, _) if n == "bot" => Ok(Concept::Bot),
        _ => name_of(e, "concept").map(Concept::Named),
    }
}

/// `A` or `B` position: atomic or `⊤`.
fn upper(e: &Expr) -> Result<Concept, RlorError> {
    match concept(e)? {
        Concept::Bot => Err(not_normalised(e, "bot is not allowed here")),
        c => Ok(c),
    }
}

/// `C` position: atomic or `⊥`.
fn lower(e: &Expr) -> Result<Concept, RlorError> {
    match concept(e)? {
        Concept::Top => Err(not_normalised(e, "top is not allowed here")),
        c => Ok(c),
    }
}

fn arity(e: &Expr, name: &str, args: &[Expr], n: usize) -> Result<(), RlorError> {
    if args.len() == n {
        Ok(())
    } else {
        Err(RlorError::Syntax {
            line: e.line(),
            message: format!("{name} takes {n} arguments, got {}", args.len()),
        })
    }
}

struct Normaliser {
    taken: BTreeSet<String>,
    fresh: usize,
    out: Vec<RlorAxiom>,
}

impl Normaliser {
    fn fresh(&mut self, hint: &str) -> Concept {
        loop {
            self.fresh += 1;
            let name = format!("{hint}_{}", self.fresh);
            if self.taken.insert(name.clone()) {
                return Concept::Named(name);
            }
        }
    }

    fn emit(&mut self, n: usize, line: usize, forms: Vec<AxiomForm>) {
        let single = forms.len() == 1;
        for (k, form) in forms.into_iter().enumerate() {
            let label = if single { format!("o{n}") } else { format!("o{n}.{}", k + 1) };
            self.out.push(RlorAxiom { label, line, form });
        }
    }

    /// `a ⊑ d₁ ⊔ … ⊔ dₙ` as a chain of binary unions through fresh names.
    fn union(&mut self, a: Concept, disjuncts: &[Expr], at: &Expr) -> Result<Vec<AxiomForm>, RlorError> {
        if disjuncts.len() < 2 {
            return Err(not_normalised(at, "a union needs at least two concepts"));
        }
        let mut ds: Vec<Concept> = disjuncts.iter().map(concept).collect::<Result<_, _>>()?;
        // ⊥ can only sit in the last position, ⊤ anywhere but the last
        ds.sort_by_key(|c| match c {
            Concept::Top => 0,
            Concept::Named(_) => 1,
            Concept::Bot => 2,
        });
        if ds.len() >= 2 && ds[ds.len() - 2] == Concept::Bot {
            return Err(not_normalised(at, "at most one disjunct may be bot"));
        }
        let mut forms = Vec::new();
        let mut cur = a;
        for (i, b) in ds.iter().enumerate().take(ds.len() - 1) {
            let c = if i + 2 == ds.len() { ds[i + 1].clone() } else { self.fresh("or") };
            forms.push(AxiomForm::Union {
                a: cur,
                b: b.clone(),
                c: c.clone(),
            });
            cur = c;
        }
        Ok(forms)
    }

    fn axiom(&mut self, e: &Expr) -> Result<Vec<AxiomForm>, RlorError> {
        let Expr::Call(name, args, _) = e else {
            return Err(RlorError::UnknownForm {
                line: e.line(),
                name: e.to_string(),
            });
        };
        match name.as_str() {
            "maxCard" => {
                arity(e, name, args, 3)?;
                Ok(vec![AxiomForm::MaxCard {
                    a: upper(&args[0])?,
                    r: name_of(&args[1], "role")?,
                    b: upper(&args[2])?,
                }])
            }
            "subPropertyOf" => {
                arity(e, name, args, 2)?;
                let s = &args[1];
                match &args[0] {
                    Expr::Call(f, xs, _) if f == "chain" => {
                        arity(&args[0], f, xs, 2)?;
                        Ok(vec![AxiomForm::Chain {
                            r: name_of(&xs[0], "role")?,
                            s: name_of(&xs[1], "role")?,
                            t: name_of(s, "role")?,
                        }])
                    }
                    r => match s {
                        Expr::Call(f, xs, _) if f == "inverse" => {
                            arity(s, f, xs, 1)?;
                            Ok(vec![AxiomForm::Inverse {
                                r: name_of(r, "role")?,
                                s: name_of(&xs[0], "role")?,
                            }])
                        }
                        _ => Ok(vec![AxiomForm::SubRole {
                            r: name_of(r, "role")?,
                            s: name_of(s, "role")?,
                        }]),
                    },
                }
            }
            "inverseSubPropertyOf" => {
                arity(e, name, args, 2)?;
                Ok(vec![AxiomForm::Inverse {
                    r: name_of(&args[0], "role")?,
                    s: name_of(&args[1], "role")?,
                }])
            }
            "classAssertion" => {
                arity(e, name, args, 2)?;
                Ok(vec![AxiomForm::Assertion {
                    a: upper(&args[0])?,
                    ind: individual(&args[1])?,
                }])
            }
            "disjunction" => {
                if args.len() < 3 {
                    return Err(not_normalised(e, "expected a concept and at least two disjuncts"));
                }
                let a = upper(&args[0])?;
                self.union(a, &args[1..], e)
            }
            "subClassOf" => {
                arity(e, name, args, 2)?;
                self.sub_class(&args[0], &args[1])
            }
            _ => Err(RlorError::UnknownForm {
                line: e.line(),
                name: name.clone(),
            }),
        }
    }

    fn sub_class(&mut self, lhs: &Expr, rhs: &Expr) -> Result<Vec<AxiomForm>, RlorError> {
        match lhs {
            Expr::Call(f, xs, _) if f == "or" => {
                let _ = xs;
                Err(not_normalised(lhs, "a union may not occur on the left"))
            }
            Expr::Call(f, xs, _) if f == "and" => {
                arity(lhs, f, xs, 2)?;
                let mut forms = Vec::new();
                let mut parts = Vec::new();
                for x in xs {
                    match x {
                        Expr::Call(g, ys, _) if g == "some" => {
                            arity(x, g, ys, 2)?;
                            let fresh = self.fresh("some");
                            forms.push(AxiomForm::Existential {
                                r: name_of(&ys[0], "role")?,
                                a: upper(&ys[1])?,
                                b: fresh.clone(),
                            });
                            parts.push(fresh);
                        }
                        _ => parts.push(upper(x)?),
                    }
                }
                forms.push(AxiomForm::Conjunction {
                    a: parts[0].clone(),
                    b: parts[1].clone(),
                    c: lower(rhs)?,
                });
                Ok(forms)
            }
            Expr::Call(f, xs, _) if f == "some" => {
                arity(lhs, f, xs, 2)?;
                Ok(vec![AxiomForm::Existential {
                    r: name_of(&xs[0], "role")?,
                    a: upper(&xs[1])?,
                    b: upper(rhs)?,
                }])
            }
            Expr::Call(f, xs, _) if f == "self" => {
                arity(lhs, f, xs, 1)?;
                Ok(vec![AxiomForm::SelfSub {
                    r: name_of(&xs[0], "role")?,
                    a: upper(rhs)?,
                }])
            }
            Expr::Call(f, xs, _) if f == "nominal" => {
                arity(lhs, f, xs, 1)?;
                Ok(vec![AxiomForm::Assertion {
                    a: upper(rhs)?,
                    ind: individual(&xs[0])?,
                }])
            }
            Expr::Call(..) => Err(not_normalised(lhs, "unsupported class expression on the left")),
            Expr::Name(..) => {
                let a = upper(lhs)?;
                match rhs {
                    Expr::Call(f, xs, _) if f == "or" => self.union(a, xs, rhs),
                    Expr::Call(f, xs, _) if f == "self" => {
                        arity(rhs, f, xs, 1)?;
                        Ok(vec![AxiomForm::SelfSup {
                            a,
                            r: name_of(&xs[0], "role")?,
                        }])
                    }
                    Expr::Call(f, xs, _) if f == "nominal" => {
                        arity(rhs, f, xs, 1)?;
                        Ok(vec![AxiomForm::Nominal {
                            a,
                            ind: individual(&xs[0])?,
                        }])
                    }
                    Expr::Call(..) => Err(not_normalised(rhs, "unsupported class expression on the right")),
                    // A ⊑ C is A ⊓ ⊤ ⊑ C
                    Expr::Name(..) => Ok(vec![AxiomForm::Conjunction {
                        a,
                        b: Concept::Top,
                        c: concept(rhs)?,
                    }]),
                }
            }
        }
    }
}

fn collect_names(e: &Expr, out: &mut BTreeSet<String>) {
    match e {
        Expr::Name(n, _) => {
            out.insert(n.clone());
        }
        Expr::Call(_, args, _) => args.iter().for_each(|a| collect_names(a, out)),
    }
}

/// Parses and normalises an ontology.
pub fn parse_ontology(text: &str) -> Result<Vec<RlorAxiom>, RlorError> {
    let mut r = Reader { toks: lex(text)?, pos: 0 };
    let mut exprs = Vec::new();
    while r.pos < r.toks.len() {
        let e = r.expr()?;
        if r.peek() == Some(&Tok::Dot) {
            r.pos += 1;
        }
        exprs.push(e);
    }
    let mut taken = BTreeSet::new();
    for e in &exprs {
        collect_names(e, &mut taken);
    }
    let mut n = Normaliser {
        taken,
        fresh: 0,
        out: Vec::new(),
    };
    for (i, e) in exprs.iter().enumerate() {
        let forms = n.axiom(e)?;
        n.emit(i + 1, e.line(), forms);
    }
    Ok(n.out)
}

fn class_atom(c: &Concept, t: Term) -> Option<Atom> {
    match c {
        Concept::Top => Some(Atom::top(t)),
        Concept::Bot => Some(Atom::bot()),
        Concept::Named(n) => Some(Atom::new(Predicate::user(n, 1), vec![t])),
    }
}

fn role_atom(r: &str, a: Term, b: Term) -> Atom {
    Atom::new(Predicate::user(r, 2), vec![a, b])
}

/// The rule of one axiom, `None` when the axiom is a tautology (a `⊤`
/// head). `⊥` in a union is dropped; `⊤` body atoms are dropped when their
/// variable occurs elsewhere in the body.
pub fn translate(ax: &RlorAxiom) -> Option<Rule> {
    let v = Term::Var;
    let (x, y, z) = (v(0), v(1), v(2));
    let (body, head): (Vec<Atom>, Vec<Atom>) = match &ax.form {
        AxiomForm::MaxCard { a, r, b } => {
            let (x1, x2) = (v(1), v(2));
            let body = vec![
                class_atom(a, v(0))?,
                role_atom(r, v(0), x1.clone()),
                class_atom(b, x1.clone())?,
                role_atom(r, v(0), x2.clone()),
                class_atom(b, x2.clone())?,
            ];
            (body, vec![Atom::new(Predicate::eq(), vec![x1, x2])])
        }
        AxiomForm::Conjunction { a, b, c } => (
            vec![class_atom(a, x.clone())?, class_atom(b, x.clone())?],
            vec![class_atom(c, x)?],
        ),
        AxiomForm::Existential { r, a, b } => (
            vec![role_atom(r, x.clone(), y.clone()), class_atom(a, y)?],
            vec![class_atom(b, x)?],
        ),
        AxiomForm::SubRole { r, s } => (vec![role_atom(r, x.clone(), y.clone())], vec![role_atom(s, x, y)]),
        AxiomForm::Chain { r, s, t } => (
            vec![role_atom(r, x.clone(), z.clone()), role_atom(s, z, y.clone())],
            vec![role_atom(t, x, y)],
        ),
        AxiomForm::SelfSup { a, r } => (vec![class_atom(a, x.clone())?], vec![role_atom(r, x.clone(), x)]),
        AxiomForm::SelfSub { r, a } => (vec![role_atom(r, x.clone(), x.clone())], vec![class_atom(a, x)?]),
        AxiomForm::Inverse { r, s } => (vec![role_atom(r, x.clone(), y.clone())], vec![role_atom(s, y, x)]),
        AxiomForm::Nominal { a, ind } => (
            vec![class_atom(a, x.clone())?],
            vec![Atom::new(Predicate::eq(), vec![x, Term::constant(ind)])],
        ),
        AxiomForm::Assertion { a, ind } => (Vec::new(), vec![class_atom(a, Term::constant(ind))?]),
        AxiomForm::Union { a, b, c } => {
            let head: Vec<Atom> = [b, c].iter().filter(|k| ***k != Concept::Bot).filter_map(|k| class_atom(k, x.clone())).collect();
            (vec![class_atom(a, x.clone())?], head)
        }
    };
    if head.iter().any(|h| h.pred.is_top()) {
        return None;
    }
    let others: BTreeSet<Term> = body
        .iter()
        .filter(|a| !a.pred.is_top())
        .flat_map(|a| a.args.iter().cloned())
        .collect();
    let body: Vec<Atom> = body
        .into_iter()
        .filter(|a| !(a.pred.is_top() && others.contains(&a.args[0])))
        .collect();
    Some(Rule::new(RuleId::new(&ax.label), body, head))
}

/// One rule per axiom, plus the congruence axioms when `≈` occurs.
pub fn compile(axioms: &[RlorAxiom]) -> Program {
    let rules: Vec<Rule> = axioms.iter().filter_map(translate).collect();
    let p = Program::from_parts(rules.clone(), Provenance::Original);
    let eq = equality_axioms(&p.signature());
    if eq.is_empty() {
        return p;
    }
    let mut all = rules;
    all.extend(eq);
    Program::from_parts(all, Provenance::Derived)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::cautious_eval;
    use crate::text::{parse_dataset, parse_program, program_equiv};

    fn one(text: &str) -> Rule {
        let ax = parse_ontology(text).unwrap();
        assert_eq!(ax.len(), 1, "{ax:?}");
        translate(&ax[0]).unwrap()
    }

    fn same(r: &Rule, text: &str) -> bool {
        crate::text::rule_equiv(r, &parse_program(text).unwrap().rules()[0])
    }

    #[test]
    fn every_row() {
        let rows = [
            ("maxCard(a, r, b)", "X1 = X2 :- a(Z), r(Z,X1), b(X1), r(Z,X2), b(X2)."),
            ("subClassOf(and(a, b), c)", "c(X) :- a(X), b(X)."),
            ("subClassOf(some(r, a), b)", "b(X) :- r(X,Y), a(Y)."),
            ("subPropertyOf(r, s)", "s(X,Y) :- r(X,Y)."),
            ("subPropertyOf(chain(r, s), t)", "t(X,Y) :- r(X,Z), s(Z,Y)."),
            ("subClassOf(a, self(r))", "r(X,X) :- a(X)."),
            ("subClassOf(self(r), a)", "a(X) :- r(X,X)."),
            ("inverseSubPropertyOf(r, s)", "s(Y,X) :- r(X,Y)."),
            ("subClassOf(a, nominal(o))", "X = o :- a(X)."),
            ("classAssertion(a, o)", "a(o)."),
            ("disjunction(v, b, g)", "b(X) | g(X) :- v(X)."),
        ];
        for (i, (src, rule)) in rows.iter().enumerate() {
            let ax = parse_ontology(src).unwrap();
            assert_eq!(ax[0].form.row() as usize, i + 1, "{src}");
            assert!(same(&translate(&ax[0]).unwrap(), rule), "{src}");
        }
    }

    #[test]
    fn empty_and_rejections() {
        assert!(parse_ontology("").unwrap().is_empty());
        assert!(parse_ontology("% nothing\n").unwrap().is_empty());
        assert!(matches!(parse_ontology("subClassOf(or(a, b), c)"), Err(RlorError::NotNormalised { .. })));
        assert!(matches!(parse_ontology("equivalent(a, b)"), Err(RlorError::UnknownForm { .. })));
        assert!(matches!(parse_ontology("subClassOf(some(r, and(a, b)), c)"), Err(RlorError::NotNormalised { .. })));
        assert!(matches!(parse_ontology("subClassOf(a, and(b, c))"), Err(RlorError::NotNormalised { .. })));
        assert!(parse_ontology("subClassOf(a b)").is_err());
        assert!(parse_ontology("maxCard(bot, r, b)").is_err());
        assert!(parse_ontology("subPropertyOf(top, r)").is_err());
    }

    #[test]
    fn builtins() {
        assert!(same(&one("subClassOf(and(b, g), bot)"), "bot :- b(X), g(X)."));
        assert!(same(&one("subClassOf(top, a)"), "a(X) :- top(X)."));
        assert!(same(&one("subClassOf(a, c)"), "c(X) :- a(X)."));
        assert!(same(&one("disjunction(a, bot, c)"), "c(X) :- a(X)."));
        assert!(translate(&parse_ontology("subClassOf(a, top)").unwrap()[0]).is_none());
    }

    #[test]
    fn rule_4_of_p1() {
        let p = compile(&parse_ontology("disjunction(v, b, g).").unwrap());
        assert!(program_equiv(&p, &parse_program("b(X) | g(X) :- v(X).").unwrap()));
    }

    #[test]
    fn ternary_union_uses_a_fresh_name() {
        let ax = parse_ontology("disjunction(v, r, g, b)").unwrap();
        assert_eq!(ax.len(), 2);
        assert_eq!(ax[0].label, "o1.1");
        let p = compile(&ax);
        assert!(program_equiv(
            &p,
            &parse_program("r(X) | or_1(X) :- v(X).\ng(X) | b(X) :- or_1(X).").unwrap()
        ));
    }

    #[test]
    fn nominals_bring_equality_axioms() {
        let p = compile(&parse_ontology("subClassOf(a, nominal(o))\nsubClassOf(some(r, a), b)").unwrap());
        assert_eq!(p.provenance(), Provenance::Derived);
        // refl, sym, trans and one replacement rule per position of a, b, r
        assert_eq!(p.len(), 2 + 3 + 4);
        let res = cautious_eval(&p, &parse_dataset("a(k).\nr(m,k).").unwrap()).unwrap();
        assert!(res.facts.contains(&Atom::fact(Predicate::user("a", 1), &["o"])));
        assert!(res.facts.contains(&Atom::fact(Predicate::user("r", 2), &["m", "o"])));
    }

    #[test]
    fn three_colouring() {
        let text = "disjunction(v, r, g, b)\n\
                    subClassOf(and(b, some(edge, b)), bot)\n\
                    subClassOf(and(g, some(edge, g)), bot)\n\
                    subClassOf(and(r, some(edge, r)), bot)\n\
                    subClassOf(and(b, g), bot)\n\
                    subClassOf(and(g, r), bot)\n\
                    subClassOf(and(b, r), bot)\n";
        let p = compile(&parse_ontology(text).unwrap());
        assert_eq!(p.len(), 2 + 6 + 3);
        let k4 = "v(a).\nv(b).\nv(c).\nv(d).\nedge(a,b).\nedge(b,a).\nedge(a,c).\nedge(c,a).\nedge(a,d).\nedge(d,a).\n\
                  edge(b,c).\nedge(c,b).\nedge(b,d).\nedge(d,b).\nedge(c,d).\nedge(d,c).";
        assert!(cautious_eval(&p, &parse_dataset(k4).unwrap()).unwrap().is_unsat());
        let k3 = "v(a).\nv(b).\nv(c).\nedge(a,b).\nedge(b,a).\nedge(a,c).\nedge(c,a).\nedge(b,c).\nedge(c,b).";
        assert!(!cautious_eval(&p, &parse_dataset(k3).unwrap()).unwrap().is_unsat());
    }
}
