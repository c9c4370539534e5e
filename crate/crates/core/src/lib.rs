//! Disjunctive datalog programs and their rewritings into plain datalog.
//!
//! The crate covers the whole pipeline: a surface syntax ([`text`]),
//! dependency analysis and the linear / weakly-linear tests ([`analysis`]),
//! the rewritings Ξ, Ξ′, Ψ and the unfolding-based driver ([`transform`]),
//! a semi-naive datalog engine ([`engine`]), a ground disjunctive
//! entailment oracle with hyperresolution derivations ([`oracle`]), and a
//! front-end for normalised RL ontologies with disjunction ([`rlor`]).

pub mod analysis;
pub mod engine;
pub mod error;
pub mod model;
pub mod oracle;
pub mod rlor;
pub mod text;
pub mod transform;

pub use error::{Error, EvalError, ModelError, TransformError};
pub use model::{Atom, Dataset, PredName, Predicate, Program, Renaming, Rule, RuleId, Signature, Term};
