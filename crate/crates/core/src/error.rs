use thiserror::Error;

use crate::text::ParseError;

/// Violations of the well-formedness conditions on rules, programs,
/// datasets and renamings.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("rule {rule}: variable {var} occurs in the head but not in the body")]
    Unsafe { rule: String, var: String },
    #[error("rule {rule}: top may not occur in a rule head")]
    TopInHead { rule: String },
    #[error("rule {rule}: bot may not occur in a rule body")]
    BotInBody { rule: String },
    #[error("rule {rule}: equality may not occur in a rule body")]
    EqualityInBody { rule: String },
    #[error("rule {rule}: empty head")]
    EmptyHead { rule: String },
    #[error("predicate {pred} used with arity {found}, expected {expected}")]
    ArityMismatch {
        pred: String,
        expected: usize,
        found: usize,
    },
    #[error("predicate {0} uses a reserved derived-name shape")]
    ReservedName(String),
    #[error("cannot determine the arity of {0}")]
    UnresolvedArity(String),
    #[error("duplicate rule id {0}")]
    DuplicateRuleId(String),
    #[error("fact {0} is not ground")]
    NonGroundFact(String),
    #[error("fact {0} uses a builtin predicate")]
    BuiltinFact(String),
    #[error("renaming {0} -> {1} changes arity")]
    RenamingArity(String, String),
    #[error("renaming is not injective: {0} is hit twice")]
    RenamingNotInjective(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("program is not linear (rule {rule} has more than one IDB body atom)")]
    NotLinear { rule: String },
    #[error("program is not weakly linear (rule {rule} has more than one disjunctive body atom)")]
    NotWl { rule: String },
    #[error("program is not datalog (rule {rule} has a disjunctive head)")]
    NotDatalog { rule: String },
    #[error("unknown predicate {0}")]
    UnknownPredicate(String),
    #[error("atom {atom} does not occur in the body of rule {rule}")]
    AtomNotInRule { rule: String, atom: String },
    #[error("atom {0} is not IDB")]
    AtomNotIdb(String),
    #[error("atoms {0} and {1} are not unifiable")]
    NotUnifiable(String, String),
    #[error("fresh predicate {0} clashes with an existing predicate")]
    NameClash(String),
    #[error("rule {0} not found")]
    UnknownRule(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("program is not datalog (rule {rule} has a disjunctive head)")]
    NotDatalog { rule: String },
    #[error("{what} exceeds the limit of {limit}")]
    ResourceCap { what: &'static str, limit: usize },
}

/// Any error raised by this crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}
