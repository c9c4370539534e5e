//! Test machinery for the rewritings: seeded random programs, exhaustive
//! datasets, and a checker for the rewriting property
//! `eval(P, D)|_S θ = eval(P′, D)|_{Sθ}`.

pub mod datasets;
pub mod equiv;
pub mod gen;

pub use datasets::{enumerate_datasets, CanonicalDatasets, Datasets};
pub use equiv::{check_rewriting, check_rewriting_on, random_dataset, replay, Counterexample, EquivReport, Evaluator, Side, Strategy};
pub use gen::{random_program, Filter, GenConfig, GenError};
