use super::lexer::{tokenize, Tok};
use super::{ParseError, SourceSpan};
use crate::model::{resolve_atoms, validate_derived, validate_program, Atom, Dataset, Program, RawAtom, RawPred, RawRule, RawTerm, Term};
use crate::ModelError;

struct Parser {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
}

impl Parser {
    fn new(text: &str, file: Option<&str>) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: tokenize(text, file)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].0
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].1.clone()
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok, what: &str) -> Result<(), ParseError> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(self.unexpected(what))
        }
    }

    fn unexpected(&self, what: &str) -> ParseError {
        ParseError::syntax(self.span(), format!("expected {what}, found {}", self.peek().describe()))
    }

    /// Parses the whole input; returns the rules and whether a `#derived`
    /// directive was present.
    fn rules(&mut self) -> Result<(Vec<RawRule>, Vec<SourceSpan>, bool), ParseError> {
        let mut rules = Vec::new();
        let mut spans = Vec::new();
        let mut derived = false;
        loop {
            match self.peek().clone() {
                Tok::Eof => return Ok((rules, spans, derived)),
                Tok::Directive(d) => {
                    if d != "derived" {
                        return Err(ParseError::syntax(self.span(), format!("unknown directive `#{d}`")));
                    }
                    self.bump();
                    derived = true;
                }
                _ => {
                    spans.push(self.span());
                    rules.push(self.rule()?);
                }
            }
        }
    }

    fn rule(&mut self) -> Result<RawRule, ParseError> {
        let label = match self.peek().clone() {
            Tok::Label(l) => {
                self.bump();
                Some(l)
            }
            _ => None,
        };
        let mut head = vec![self.atom()?];
        while self.eat(&Tok::Pipe) {
            head.push(self.atom()?);
        }
        let mut body = Vec::new();
        if self.eat(&Tok::ColonDash) {
            body.push(self.atom()?);
            while self.eat(&Tok::Comma) {
                body.push(self.atom()?);
            }
        }
        self.expect(&Tok::Dot, "`.`")?;
        Ok(RawRule { label, body, head })
    }

    fn atom(&mut self) -> Result<RawAtom, ParseError> {
        let infix_eq = matches!((self.peek(), self.peek2()), (Tok::Var(_), _) | (Tok::Ident(_), Tok::Equals));
        if infix_eq {
            let lhs = self.term()?;
            self.expect(&Tok::Equals, "`=`")?;
            let rhs = self.term()?;
            return Ok(RawAtom {
                pred: RawPred::Eq,
                args: vec![lhs, rhs],
            });
        }
        let pred = self.pred_name()?;
        let mut args = Vec::new();
        if self.eat(&Tok::LParen)
            && !self.eat(&Tok::RParen) {
                args.push(self.term()?);
                while self.eat(&Tok::Comma) {
                    args.push(self.term()?);
                }
                self.expect(&Tok::RParen, "`)` or `,`")?;
            }
        Ok(RawAtom { pred, args })
    }

    fn pred_name(&mut self) -> Result<RawPred, ParseError> {
        let mut p = match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                match s.as_str() {
                    "top" => RawPred::Top,
                    "bot" => RawPred::Bot,
                    _ if s.starts_with(|c: char| c.is_ascii_digit()) => {
                        return Err(ParseError::syntax(self.span(), format!("predicate name `{s}` starts with a digit")));
                    }
                    _ => RawPred::User(s),
                }
            }
            Tok::Equals => {
                self.bump();
                RawPred::Eq
            }
            Tok::LBrace => {
                self.bump();
                let base = self.pred_name()?;
                self.expect(&Tok::Caret, "`^`")?;
                let goal = self.pred_name()?;
                self.expect(&Tok::RBrace, "`}`")?;
                RawPred::Aux(Box::new(base), Box::new(goal))
            }
            _ => return Err(self.unexpected("an atom")),
        };
        while self.eat(&Tok::Prime) {
            p = RawPred::Primed(Box::new(p));
        }
        Ok(p)
    }

    fn term(&mut self) -> Result<RawTerm, ParseError> {
        match self.bump() {
            Tok::Var(v) => Ok(RawTerm::Var(v)),
            Tok::Ident(c) => Ok(RawTerm::Const(c)),
            _ => {
                self.pos -= 1;
                Err(self.unexpected("a variable or constant"))
            }
        }
    }
}

fn mentions_derived(r: &RawRule) -> bool {
    r.body.iter().chain(r.head.iter()).any(|a| a.pred.is_derived())
}

/// Parses a program. Inputs that carry the `#derived` directive or mention
/// derived predicate names are validated with the relaxed rules for
/// transformation outputs.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    parse_program_in(text, None)
}

/// Like [`parse_program`], with `file` recorded in error spans.
pub fn parse_program_in(text: &str, file: Option<&str>) -> Result<Program, ParseError> {
    let mut p = Parser::new(text, file)?;
    let (rules, _, derived) = p.rules()?;
    let derived = derived || rules.iter().any(mentions_derived);
    let prog = if derived {
        validate_derived(rules)?
    } else {
        validate_program(rules)?
    };
    Ok(prog)
}

/// Parses a dataset: one ground fact per line, no `top`/`bot`.
pub fn parse_dataset(text: &str) -> Result<Dataset, ParseError> {
    parse_dataset_in(text, None)
}

pub fn parse_dataset_in(text: &str, file: Option<&str>) -> Result<Dataset, ParseError> {
    let mut p = Parser::new(text, file)?;
    let (rules, spans, derived) = p.rules()?;
    if derived {
        return Err(ParseError::syntax(SourceSpan::start(file), "directives are not allowed in datasets"));
    }
    let mut atoms = Vec::with_capacity(rules.len());
    for (r, span) in rules.into_iter().zip(spans) {
        if r.label.is_some() || !r.body.is_empty() || r.head.len() != 1 {
            return Err(ParseError::syntax(span, "expected a single fact"));
        }
        atoms.push(r.head.into_iter().next().unwrap());
    }
    let facts = ground_atoms(&atoms)?;
    Ok(Dataset::new(facts)?)
}

/// Parses a disjunction of ground facts such as `b(a) | g(a)` (a trailing
/// `.` is optional). `bot` denotes the empty disjunction's unsatisfiability
/// query and may appear on its own.
pub fn parse_ground_disjunction(text: &str) -> Result<Vec<Atom>, ParseError> {
    let trimmed = text.trim();
    let src = if trimmed.ends_with('.') {
        trimmed.to_string()
    } else {
        format!("{trimmed}.")
    };
    let mut p = Parser::new(&src, None)?;
    let (rules, spans, _) = p.rules()?;
    if rules.len() != 1 || rules[0].label.is_some() || !rules[0].body.is_empty() {
        return Err(ParseError::syntax(
            spans.into_iter().next().unwrap_or_else(|| SourceSpan::start(None)),
            "expected a disjunction of ground facts",
        ));
    }
    ground_atoms(&rules[0].head)
}

fn ground_atoms(atoms: &[RawAtom]) -> Result<Vec<Atom>, ParseError> {
    for a in atoms {
        if a.args.iter().any(|t| matches!(t, RawTerm::Var(_))) {
            let shown = RawAtom {
                pred: a.pred.clone(),
                args: a.args.clone(),
            };
            return Err(ModelError::NonGroundFact(raw_atom_text(&shown)).into());
        }
    }
    let preds = resolve_atoms(atoms)?;
    Ok(atoms
        .iter()
        .zip(preds)
        .map(|(a, p)| {
            let args = a
                .args
                .iter()
                .map(|t| match t {
                    RawTerm::Const(c) => Term::Const(c.as_str().into()),
                    RawTerm::Var(_) => unreachable!(),
                })
                .collect();
            Atom::new(p, args)
        })
        .collect())
}

fn raw_atom_text(a: &RawAtom) -> String {
    let args: Vec<&str> = a
        .args
        .iter()
        .map(|t| match t {
            RawTerm::Var(s) | RawTerm::Const(s) => s.as_str(),
        })
        .collect();
    if args.is_empty() {
        a.pred.to_string()
    } else {
        format!("{}({})", a.pred, args.join(","))
    }
}
