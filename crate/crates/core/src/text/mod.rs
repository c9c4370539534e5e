//! Concrete syntax.
//!
//! ```text
//! % comment to end of line
//! [r4] b(X) | g(X) :- v(X).      % V(x) -> B(x) v G(x)
//! bot :- b(X), g(X).
//! X = a :- n(X).                 % infix = is equality
//! v(a).                          % a fact rule
//! ```
//!
//! Rules are written head-first: `h1 | h2 :- b1, b2.` stands for
//! `b1 ∧ b2 → h1 ∨ h2`. Variables start with an uppercase letter or `_`;
//! predicates and constants start with a lowercase letter (constants may also
//! start with a digit). `top` and `bot` are the builtins. Derived predicates
//! print as `q'` (IDB expansion) and `{p^q}` (auxiliary predicates); a
//! program containing them, or starting with `#derived`, is read with the
//! relaxed checks that apply to transformation outputs.

mod equiv;
mod lexer;
mod parser;
mod printer;

use std::fmt;

use thiserror::Error;

use crate::ModelError;

pub use equiv::{canonical_rule, program_equiv, rule_equiv, rule_key};
pub use parser::{parse_dataset, parse_dataset_in, parse_ground_disjunction, parse_program, parse_program_in};
pub use printer::{var_name, print_atom, print_dataset, print_disjunction, print_program, print_rule};

/// A region of source text; lines and columns are 1-based, the end is
/// exclusive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceSpan {
    pub file: Option<String>,
    pub line: usize,
    pub column: usize,
    pub end_line: usize,
    pub end_column: usize,
}

impl SourceSpan {
    pub fn start(file: Option<&str>) -> Self {
        SourceSpan {
            file: file.map(str::to_string),
            line: 1,
            column: 1,
            end_line: 1,
            end_column: 1,
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(file) = &self.file {
            write!(f, "{file}:")?;
        }
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{span}: {message}")]
    Syntax { span: SourceSpan, message: String },
    #[error(transparent)]
    Invalid(#[from] ModelError),
}

impl ParseError {
    pub(crate) fn syntax(span: SourceSpan, message: impl Into<String>) -> Self {
        ParseError::Syntax {
            span,
            message: message.into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Atom, Predicate, Provenance};

    #[test]
    fn parses_rule_4() {
        let p = parse_program("b(X) | g(X) :- v(X).").unwrap();
        let r = &p.rules()[0];
        assert_eq!(r.body.len(), 1);
        assert_eq!(r.head.len(), 2);
        assert_eq!(r.head[0].pred, Predicate::user("b", 1));
        assert_eq!(r.head[1].pred, Predicate::user("g", 1));
        assert_eq!(r.head[0].args, r.body[0].args);
    }

    #[test]
    fn empty_input_is_empty_program() {
        assert!(parse_program("").unwrap().is_empty());
        assert!(parse_program("% only a comment\n").unwrap().is_empty());
    }

    #[test]
    fn bot_head() {
        let p = parse_program("bot :- b(X), g(X).").unwrap();
        assert_eq!(p.rules()[0].head, vec![Atom::bot()]);
    }

    #[test]
    fn equality_and_zero_arity() {
        let p = parse_program("X = a :- n(X).\nq :- p().\n").unwrap();
        assert!(p.rules()[0].head[0].pred.is_eq());
        assert_eq!(p.rules()[1].head[0].pred, Predicate::user("q", 0));
        assert_eq!(p.rules()[1].body[0].pred, Predicate::user("p", 0));
    }

    #[test]
    fn syntax_errors_carry_spans() {
        let err = parse_program("b(X) :- v(X)\n").unwrap_err();
        match err {
            ParseError::Syntax { span, .. } => assert_eq!(span.line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_program("b(X) :- v(X) ; w(X).").is_err());
        assert!(parse_program("1p(a).").is_err());
    }

    #[test]
    fn semantic_errors_are_delegated() {
        assert!(matches!(
            parse_program("b(Y) :- v(X)."),
            Err(ParseError::Invalid(ModelError::Unsafe { .. }))
        ));
        assert!(matches!(
            parse_program("top(X) :- v(X)."),
            Err(ParseError::Invalid(ModelError::TopInHead { .. }))
        ));
    }

    #[test]
    fn dataset_d1() {
        let d = parse_dataset("v(a).\nv(b).\nv(c).\ne(a,b).\ne(b,c).\ne(a,c).\n").unwrap();
        assert_eq!(d.len(), 6);
        assert!(d.contains(&Atom::fact(Predicate::user("e", 2), &["a", "c"])));
        assert!(parse_dataset("").unwrap().is_empty());
        assert!(matches!(
            parse_dataset("v(X)."),
            Err(ParseError::Invalid(ModelError::NonGroundFact(_)))
        ));
        assert!(parse_dataset("v(a) :- w(a).").is_err());
        assert!(parse_dataset("a = b.").is_ok());
        assert!(parse_dataset("bot.").is_err());
    }

    #[test]
    fn derived_names_round_trip() {
        let text = "#derived\n[x] {b^g}(X,Y) :- e(X,Z), {g^g}(Z,Y).\n[y] g(Y) :- b(X), {b^g}(X,Y).\n[z] b'(X) :- b(X).\n";
        let p = parse_program(text).unwrap();
        assert_eq!(p.provenance(), Provenance::Derived);
        let printed = print_program(&p);
        let q = parse_program(&printed).unwrap();
        assert!(program_equiv(&p, &q));
        assert_eq!(print_program(&q), printed);
    }

    #[test]
    fn user_programs_reject_reserved_shapes_only_without_directive() {
        // derived names switch to relaxed validation automatically
        assert!(parse_program("b'(X) :- b(X).").is_ok());
        assert!(parse_program("a(X) :- bot, v(X).").is_err());
        assert!(parse_program("#derived\na(X) :- bot, v(X).").is_ok());
    }

    #[test]
    fn ground_disjunctions() {
        let d = parse_ground_disjunction("b(a) | g(a)").unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(parse_ground_disjunction("bot").unwrap(), vec![Atom::bot()]);
        assert!(parse_ground_disjunction("b(X)").is_err());
    }
}
