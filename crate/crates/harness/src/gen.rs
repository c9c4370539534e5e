use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use wlrw_core::analysis::{is_linear, is_wl};
use wlrw_core::model::Provenance;
use wlrw_core::{Atom, Predicate, Program, Rule, RuleId, Term};

/// Shape of randomly generated programs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenConfig {
    pub predicates: usize,
    pub max_arity: usize,
    pub rules: usize,
    pub max_body: usize,
    /// Chance that a rule gets a two-atom head.
    pub disjunctive_prob: f64,
    /// Chance that a rule is a constraint (`⊥` head).
    pub bot_prob: f64,
    /// Constants available to random datasets.
    pub constants: usize,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            predicates: 4,
            max_arity: 2,
            rules: 6,
            max_body: 3,
            disjunctive_prob: 0.3,
            bot_prob: 0.1,
            constants: 3,
            seed: 0,
        }
    }
}

impl GenConfig {
    pub fn with_seed(&self, seed: u64) -> Self {
        GenConfig { seed, ..self.clone() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Filter {
    Any,
    Datalog,
    Linear,
    Wl,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("invalid generator bounds: {0}")]
    Bounds(&'static str),
    #[error("no program passed the {filter:?} filter in {attempts} attempts")]
    Starved { filter: Filter, attempts: usize },
}

/// Attempts made by [`random_program`] before giving up.
pub const MAX_ATTEMPTS: usize = 10_000;

/// Predicate names used by the generator.
pub fn predicate_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("p{i}")).collect()
}

fn signature(cfg: &GenConfig, rng: &mut ChaCha8Rng) -> Vec<Predicate> {
    predicate_names(cfg.predicates)
        .iter()
        .map(|n| Predicate::user(n, rng.gen_range(1..=cfg.max_arity)))
        .collect()
}

fn random_rule(i: usize, sig: &[Predicate], cfg: &GenConfig, datalog: bool, rng: &mut ChaCha8Rng) -> Rule {
    let mut nvars = 0u32;
    let nbody = rng.gen_range(1..=cfg.max_body);
    let body: Vec<Atom> = (0..nbody)
        .map(|_| {
            let p = sig.choose(rng).expect("nonempty signature").clone();
            let args = (0..p.arity)
                .map(|_| {
                    // reuse a variable two times out of three
                    if nvars > 0 && rng.gen_ratio(2, 3) {
                        Term::Var(rng.gen_range(0..nvars))
                    } else {
                        nvars += 1;
                        Term::Var(nvars - 1)
                    }
                })
                .collect();
            Atom::new(p, args)
        })
        .collect();
    let head_atom = |rng: &mut ChaCha8Rng| {
        let p = sig.choose(rng).expect("nonempty signature").clone();
        let args = (0..p.arity).map(|_| Term::Var(rng.gen_range(0..nvars))).collect();
        Atom::new(p, args)
    };
    let head = if rng.gen_bool(cfg.bot_prob) {
        vec![Atom::bot()]
    } else if !datalog && rng.gen_bool(cfg.disjunctive_prob) {
        vec![head_atom(rng), head_atom(rng)]
    } else {
        vec![head_atom(rng)]
    };
    Rule::new(RuleId::new(format!("r{}", i + 1)), body, head)
}

fn candidate(cfg: &GenConfig, datalog: bool, rng: &mut ChaCha8Rng) -> Program {
    let sig = signature(cfg, rng);
    let rules = (0..cfg.rules).map(|i| random_rule(i, &sig, cfg, datalog, rng)).collect();
    Program::derived(rules).with_provenance(Provenance::Original)
}

/// A random safe, constant-free program; a pure function of `cfg`.
///
/// Filters are applied by generate-and-test, except that `Datalog` never
/// draws disjunctive heads in the first place.
pub fn random_program(cfg: &GenConfig, filter: Filter) -> Result<Program, GenError> {
    if cfg.predicates == 0 || cfg.max_arity == 0 || cfg.rules == 0 || cfg.max_body == 0 {
        return Err(GenError::Bounds("predicates, arity, rules and body size must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..MAX_ATTEMPTS {
        let p = candidate(cfg, filter == Filter::Datalog, &mut rng);
        let ok = match filter {
            Filter::Any | Filter::Datalog => true,
            Filter::Linear => is_linear(&p).holds,
            Filter::Wl => is_wl(&p).holds,
        };
        if ok {
            return Ok(p);
        }
    }
    Err(GenError::Starved {
        filter,
        attempts: MAX_ATTEMPTS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let cfg = GenConfig::default().with_seed(1);
        assert_eq!(random_program(&cfg, Filter::Any), random_program(&cfg, Filter::Any));
        assert_ne!(
            random_program(&cfg, Filter::Any).unwrap(),
            random_program(&cfg.with_seed(2), Filter::Any).unwrap()
        );
    }

    #[test]
    fn filters_hold() {
        for seed in 0..40 {
            let cfg = GenConfig::default().with_seed(seed);
            let d = random_program(&cfg, Filter::Datalog).unwrap();
            assert!(d.rules().iter().all(|r| r.head.len() == 1));
            assert!(is_wl(&random_program(&cfg, Filter::Wl).unwrap()).holds);
            assert!(is_linear(&random_program(&cfg, Filter::Linear).unwrap()).holds);
        }
    }

    #[test]
    fn shapes_respect_bounds() {
        for seed in 0..40 {
            let cfg = GenConfig::default().with_seed(seed);
            let p = random_program(&cfg, Filter::Any).unwrap();
            assert_eq!(p.len(), cfg.rules);
            assert!(p.max_arity() <= cfg.max_arity);
            assert!(p.predicates().iter().filter(|q| !q.is_builtin()).count() <= cfg.predicates);
            assert!(p.rules().iter().all(|r| r.body.len() <= cfg.max_body && r.unsafe_var().is_none()));
        }
    }

    #[test]
    fn zero_bounds_rejected() {
        let cfg = GenConfig {
            rules: 0,
            ..GenConfig::default()
        };
        assert!(matches!(random_program(&cfg, Filter::Any), Err(GenError::Bounds(_))));
    }
}
