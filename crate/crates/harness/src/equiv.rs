use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use wlrw_core::engine::{Engine, EvalResult};
use wlrw_core::oracle::{Oracle, OracleConfig, PoolOracle};
use wlrw_core::text::{parse_dataset, print_atom, print_dataset};
use wlrw_core::{Atom, Dataset, EvalError, Predicate, Program, Renaming};

use crate::datasets::{constant_name, CanonicalDatasets};

/// Which datasets [`check_rewriting`] tries.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum Strategy {
    /// Every dataset over the signature of `p` within the bounds, up to
    /// renaming of the pool constants.
    Exhaustive { max_constants: usize, max_facts: usize },
    /// `count` datasets drawn uniformly by size and then by fact.
    Random {
        count: usize,
        max_constants: usize,
        max_facts: usize,
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    /// Entailed by `p` (after renaming) but not by `p′`.
    LeftOnly,
    RightOnly,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub dataset: String,
    pub fact: String,
    pub side: Side,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivReport {
    pub strategy: Strategy,
    /// Datasets evaluated on both sides.
    pub datasets_tested: usize,
    /// Datasets accounted for, counting each orbit representative for its
    /// whole orbit; equals `datasets_tested` for random strategies.
    pub datasets_covered: u128,
    /// Datasets skipped because evaluation hit a resource cap.
    pub skipped: usize,
    pub counterexample: Option<Counterexample>,
    pub elapsed_ms: f64,
}

impl EquivReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Evaluates with the engine when the program is datalog and with the
/// oracle otherwise.
pub enum Evaluator {
    Engine(Engine),
    Oracle(Oracle),
    /// The oracle grounded once for a fixed constant pool; datasets outside
    /// the pool go to the plain oracle.
    Pooled(Box<PoolOracle>, Oracle),
}

impl Evaluator {
    pub fn for_program(p: &Program) -> Evaluator {
        match Engine::new(p) {
            Ok(e) => Evaluator::Engine(e),
            Err(_) => Evaluator::Oracle(Oracle::new(p)),
        }
    }

    /// Like [`Evaluator::for_program`], prepared for datasets over `inputs`
    /// and `pool` that are compared on `s`.
    pub fn for_pool(p: &Program, pool: &[Arc<str>], inputs: &BTreeSet<Predicate>, s: &BTreeSet<Predicate>) -> Evaluator {
        match Evaluator::for_program(p) {
            Evaluator::Oracle(o) => match PoolOracle::new(p, pool, inputs, |q| s.contains(q), &OracleConfig::default()) {
                Some(pooled) => Evaluator::Pooled(Box::new(pooled), o),
                None => Evaluator::Oracle(o),
            },
            e => e,
        }
    }

    /// `eval(P, D)` restricted to `s ∪ {⊥}`.
    pub fn eval_restricted(&mut self, d: &Dataset, s: &BTreeSet<Predicate>) -> Result<BTreeSet<Atom>, EvalError> {
        let res: EvalResult = match self {
            Evaluator::Engine(e) => e.evaluate_where(d, |q| s.contains(q)).0,
            Evaluator::Oracle(o) => o.cautious_eval_where(d, |q| s.contains(q))?,
            Evaluator::Pooled(pooled, o) => match pooled.cautious_eval(d) {
                Some(res) => res,
                None => o.cautious_eval_where(d, |q| s.contains(q))?,
            },
        };
        if res.is_unsat() {
            return Ok(res.restrict(s));
        }
        Ok(res.facts)
    }
}

/// Compares both sides on one dataset; `Ok(None)` when they agree.
fn compare(
    left: &mut Evaluator,
    right: &mut Evaluator,
    theta: &Renaming,
    s: &BTreeSet<Predicate>,
    s_theta: &BTreeSet<Predicate>,
    d: &Dataset,
) -> Result<Option<Counterexample>, EvalError> {
    let l: BTreeSet<Atom> = left.eval_restricted(d, s)?.iter().map(|a| theta.apply_atom(a)).collect();
    let r = right.eval_restricted(d, s_theta)?;
    let witness = l
        .difference(&r)
        .next()
        .map(|a| (a, Side::LeftOnly))
        .or_else(|| r.difference(&l).next().map(|a| (a, Side::RightOnly)));
    Ok(witness.map(|(a, side)| Counterexample {
        dataset: print_dataset(d),
        fact: print_atom(a),
        side,
    }))
}

fn compared_set(s: &BTreeSet<Predicate>) -> BTreeSet<Predicate> {
    s.iter().filter(|q| !q.is_top()).cloned().collect()
}

/// A dataset of at most `max_facts` distinct facts over `preds` and the
/// first `max_constants` pool constants; the size is drawn first.
pub fn random_dataset(preds: &BTreeSet<Predicate>, max_constants: usize, max_facts: usize, rng: &mut impl Rng) -> Dataset {
    let atoms = all_atoms(preds, max_constants);
    let k = rng.gen_range(0..=max_facts.min(atoms.len()));
    Dataset::new(atoms.choose_multiple(rng, k).cloned()).expect("ground user facts")
}

fn all_atoms(preds: &BTreeSet<Predicate>, max_constants: usize) -> Vec<Atom> {
    crate::datasets::enumerate_datasets(preds, 1, max_constants)
        .filter_map(|d| d.facts().iter().next().cloned())
        .collect()
}

/// Checks that `p′` is a rewriting of `p` with respect to `s` under `θ`:
/// `eval(p, d)|_s θ = eval(p′, d)|_{sθ}` for every dataset `d` the strategy
/// produces, where `|_s` keeps the facts over `s ∪ {⊥}`. `⊤` is never
/// compared. Datasets range over the signature of `p`; the exhaustive
/// strategy exploits symmetry between pool constants that neither program
/// mentions. Stops at the first counterexample.
pub fn check_rewriting(
    p: &Program,
    p_prime: &Program,
    theta: &Renaming,
    s: &BTreeSet<Predicate>,
    strategy: &Strategy,
) -> EquivReport {
    let preds: BTreeSet<Predicate> = p.predicates().into_iter().filter(|q| !q.is_builtin()).collect();
    check_rewriting_on(p, p_prime, theta, s, strategy, &preds)
}

/// [`check_rewriting`] with datasets over `data` instead of the whole
/// signature of `p`.
pub fn check_rewriting_on(
    p: &Program,
    p_prime: &Program,
    theta: &Renaming,
    s: &BTreeSet<Predicate>,
    strategy: &Strategy,
    data: &BTreeSet<Predicate>,
) -> EquivReport {
    let start = Instant::now();
    let preds = data;
    let s = compared_set(s);
    let s_theta: BTreeSet<Predicate> = s.iter().map(|q| theta.apply(q)).collect();
    let pool: Vec<Arc<str>> = match strategy {
        Strategy::Exhaustive { max_constants, .. } | Strategy::Random { max_constants, .. } => {
            (0..*max_constants).map(|i| Arc::from(constant_name(i))).collect()
        }
    };
    let mut left = Evaluator::for_pool(p, &pool, preds, &s);
    let mut right = Evaluator::for_pool(p_prime, &pool, preds, &s_theta);
    let mut report = EquivReport {
        strategy: strategy.clone(),
        datasets_tested: 0,
        datasets_covered: 0,
        skipped: 0,
        counterexample: None,
        elapsed_ms: 0.0,
    };
    let mut visit = |d: &Dataset, weight: u128, report: &mut EquivReport| -> bool {
        match compare(&mut left, &mut right, theta, &s, &s_theta, d) {
            Ok(None) => {
                report.datasets_tested += 1;
                report.datasets_covered += weight;
                true
            }
            Ok(Some(cx)) => {
                report.datasets_tested += 1;
                report.datasets_covered += weight;
                report.counterexample = Some(cx);
                false
            }
            Err(_) => {
                report.skipped += 1;
                true
            }
        }
    };
    match strategy {
        Strategy::Exhaustive {
            max_constants,
            max_facts,
        } => {
            let fixed: BTreeSet<String> = p
                .constants()
                .iter()
                .chain(p_prime.constants().iter())
                .map(|c| c.to_string())
                .collect();
            for (d, n) in CanonicalDatasets::new(preds, *max_facts, *max_constants, &fixed) {
                if !visit(&d, n as u128, &mut report) {
                    break;
                }
            }
        }
        Strategy::Random {
            count,
            max_constants,
            max_facts,
            seed,
        } => {
            let atoms = all_atoms(preds, *max_constants);
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            for _ in 0..*count {
                let k = rng.gen_range(0..=(*max_facts).min(atoms.len()));
                let d = Dataset::new(atoms.choose_multiple(&mut rng, k).cloned()).expect("ground user facts");
                if !visit(&d, 1, &mut report) {
                    break;
                }
            }
        }
    }
    report.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    report
}

/// Re-runs the dataset of a counterexample; `true` when the cited fact
/// still differs in the same direction.
pub fn replay(p: &Program, p_prime: &Program, theta: &Renaming, s: &BTreeSet<Predicate>, cx: &Counterexample) -> bool {
    let Ok(d) = parse_dataset(&cx.dataset) else {
        return false;
    };
    let s = compared_set(s);
    let s_theta: BTreeSet<Predicate> = s.iter().map(|q| theta.apply(q)).collect();
    let (Ok(l), Ok(r)) = (
        Evaluator::for_program(p).eval_restricted(&d, &s),
        Evaluator::for_program(p_prime).eval_restricted(&d, &s_theta),
    ) else {
        return false;
    };
    let l: BTreeSet<String> = l.iter().map(|a| print_atom(&theta.apply_atom(a))).collect();
    let r: BTreeSet<String> = r.iter().map(print_atom).collect();
    match cx.side {
        Side::LeftOnly => l.contains(&cx.fact) && !r.contains(&cx.fact),
        Side::RightOnly => r.contains(&cx.fact) && !l.contains(&cx.fact),
    }
}

/// Names of the first `n` pool constants.
pub fn pool(n: usize) -> Vec<String> {
    (0..n).map(constant_name).collect()
}
