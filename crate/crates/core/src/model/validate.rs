//! From parsed, name-based rules to well-formed [`Program`]s.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use super::{Atom, PredName, Predicate, Program, Provenance, Rule, RuleId, Term};
use crate::error::ModelError;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RawTerm {
    Var(String),
    Const(String),
}

/// A predicate name as written, before arities are known.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RawPred {
    User(String),
    Top,
    Bot,
    Eq,
    Primed(Box<RawPred>),
    Aux(Box<RawPred>, Box<RawPred>),
}

impl RawPred {
    pub fn is_derived(&self) -> bool {
        matches!(self, RawPred::Primed(_) | RawPred::Aux(..))
    }

    fn builtin_arity(&self) -> Option<usize> {
        match self {
            RawPred::Top => Some(1),
            RawPred::Bot => Some(0),
            RawPred::Eq => Some(2),
            _ => None,
        }
    }

    fn collect<'a>(&'a self, out: &mut Vec<&'a RawPred>) {
        out.push(self);
        match self {
            RawPred::Primed(x) => x.collect(out),
            RawPred::Aux(b, g) => {
                b.collect(out);
                g.collect(out);
            }
            _ => {}
        }
    }
}

impl fmt::Display for RawPred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RawPred::User(s) => f.write_str(s),
            RawPred::Top => f.write_str("top"),
            RawPred::Bot => f.write_str("bot"),
            RawPred::Eq => f.write_str("="),
            RawPred::Primed(x) => write!(f, "{x}'"),
            RawPred::Aux(b, g) => write!(f, "{{{b}^{g}}}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawAtom {
    pub pred: RawPred,
    pub args: Vec<RawTerm>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawRule {
    pub label: Option<String>,
    pub body: Vec<RawAtom>,
    pub head: Vec<RawAtom>,
}

/// Validates user rules: safety, arity consistency, no `⊤` in heads, no `⊥`
/// or `≈` in bodies, no reserved derived names. Rule order is preserved.
pub fn validate_program(raw: Vec<RawRule>) -> Result<Program, ModelError> {
    build(raw, true)
}

/// Validates rules produced by a transformation (for instance re-read from a
/// printed rewriting): only safety, arity consistency and the `⊤`-head ban
/// are enforced, and derived names are allowed.
pub fn validate_derived(raw: Vec<RawRule>) -> Result<Program, ModelError> {
    build(raw, false)
}

fn build(raw: Vec<RawRule>, strict: bool) -> Result<Program, ModelError> {
    let arities = resolve(raw.iter().flat_map(|r| r.body.iter().chain(r.head.iter())))?;
    let ids = assign_ids(&raw)?;
    let mut rules = Vec::with_capacity(raw.len());
    for (rr, id) in raw.iter().zip(ids) {
        let name = id.to_string();
        if rr.head.is_empty() {
            return Err(ModelError::EmptyHead { rule: name });
        }
        if rr.head.iter().any(|a| a.pred == RawPred::Top) {
            return Err(ModelError::TopInHead { rule: name });
        }
        if strict {
            if rr.body.iter().any(|a| a.pred == RawPred::Bot) {
                return Err(ModelError::BotInBody { rule: name });
            }
            if rr.body.iter().any(|a| a.pred == RawPred::Eq) {
                return Err(ModelError::EqualityInBody { rule: name });
            }
            if let Some(a) = rr.body.iter().chain(rr.head.iter()).find(|a| a.pred.is_derived()) {
                return Err(ModelError::ReservedName(a.pred.to_string()));
            }
        }
        let mut vars: HashMap<&str, u32> = HashMap::new();
        for a in &rr.body {
            for t in &a.args {
                if let RawTerm::Var(v) = t {
                    let next = vars.len() as u32;
                    vars.entry(v).or_insert(next);
                }
            }
        }
        for a in &rr.head {
            for t in &a.args {
                if let RawTerm::Var(v) = t {
                    if !vars.contains_key(v.as_str()) {
                        return Err(ModelError::Unsafe {
                            rule: name,
                            var: v.clone(),
                        });
                    }
                }
            }
        }
        let conv = |a: &RawAtom| -> Atom {
            let args = a
                .args
                .iter()
                .map(|t| match t {
                    RawTerm::Var(v) => Term::Var(vars[v.as_str()]),
                    RawTerm::Const(c) => Term::Const(c.as_str().into()),
                })
                .collect();
            Atom::new(to_pred(&a.pred, &arities), args)
        };
        let body = rr.body.iter().map(conv).collect();
        let head = rr.head.iter().map(conv).collect();
        rules.push(Rule::new(id, body, head));
    }
    let provenance = if strict {
        Provenance::Original
    } else {
        Provenance::Derived
    };
    Ok(Program::from_parts(rules, provenance))
}

fn assign_ids(raw: &[RawRule]) -> Result<Vec<RuleId>, ModelError> {
    let mut taken: BTreeSet<&str> = BTreeSet::new();
    for r in raw {
        if let Some(l) = &r.label {
            if !taken.insert(l) {
                return Err(ModelError::DuplicateRuleId(l.clone()));
            }
        }
    }
    let mut used: BTreeSet<String> = taken.iter().map(|s| s.to_string()).collect();
    Ok(raw
        .iter()
        .enumerate()
        .map(|(i, r)| match &r.label {
            Some(l) => RuleId::new(l),
            None => {
                let mut cand = format!("r{}", i + 1);
                while used.contains(&cand) {
                    cand.push('_');
                }
                used.insert(cand.clone());
                RuleId::new(cand)
            }
        })
        .collect())
}

/// Resolves the predicates of ground or non-ground atoms, inferring the
/// arity split of auxiliary names from the other occurrences.
pub fn resolve_atoms(atoms: &[RawAtom]) -> Result<Vec<Predicate>, ModelError> {
    let arities = resolve(atoms.iter())?;
    Ok(atoms.iter().map(|a| to_pred(&a.pred, &arities)).collect())
}

fn resolve<'a>(atoms: impl Iterator<Item = &'a RawAtom> + Clone) -> Result<HashMap<RawPred, usize>, ModelError> {
    let mut known: HashMap<RawPred, usize> = HashMap::new();
    let mut keys: Vec<&RawPred> = Vec::new();
    for a in atoms.clone() {
        a.pred.collect(&mut keys);
    }
    let mut seen = BTreeSet::new();
    keys.retain(|k| seen.insert(k.to_string()));

    fn set(known: &mut HashMap<RawPred, usize>, k: &RawPred, n: usize) -> Result<bool, ModelError> {
        match known.get(k) {
            Some(&m) if m == n => Ok(false),
            Some(&m) => Err(ModelError::ArityMismatch {
                pred: k.to_string(),
                expected: m,
                found: n,
            }),
            None => {
                known.insert(k.clone(), n);
                Ok(true)
            }
        }
    }

    for k in &keys {
        if let Some(n) = k.builtin_arity() {
            set(&mut known, k, n)?;
        }
    }
    for a in atoms {
        set(&mut known, &a.pred, a.args.len())?;
    }
    loop {
        let mut changed = false;
        for k in &keys {
            match k {
                RawPred::Primed(x) => {
                    if let Some(&n) = known.get(*k) {
                        changed |= set(&mut known, x, n)?;
                    } else if let Some(&n) = known.get(x.as_ref()) {
                        changed |= set(&mut known, k, n)?;
                    }
                }
                RawPred::Aux(b, g) => {
                    let (nk, nb, ng) = (
                        known.get(*k).copied(),
                        known.get(b.as_ref()).copied(),
                        known.get(g.as_ref()).copied(),
                    );
                    let split = |total: usize, part: usize| {
                        total.checked_sub(part).ok_or_else(|| ModelError::ArityMismatch {
                            pred: k.to_string(),
                            expected: part,
                            found: total,
                        })
                    };
                    match (nk, nb, ng) {
                        (Some(t), Some(p), None) => changed |= set(&mut known, g, split(t, p)?)?,
                        (Some(t), None, Some(q)) => changed |= set(&mut known, b, split(t, q)?)?,
                        (None, Some(p), Some(q)) => changed |= set(&mut known, k, p + q)?,
                        (Some(t), Some(p), Some(q)) if t != p + q => {
                            return Err(ModelError::ArityMismatch {
                                pred: k.to_string(),
                                expected: p + q,
                                found: t,
                            })
                        }
                        _ => {}
                    }
                }
                _ => {}
            }
        }
        if !changed {
            break;
        }
    }
    if let Some(k) = keys.iter().find(|k| !known.contains_key(**k)) {
        return Err(ModelError::UnresolvedArity(k.to_string()));
    }
    Ok(known)
}

fn to_pred(raw: &RawPred, arities: &HashMap<RawPred, usize>) -> Predicate {
    let n = arities[raw];
    let name = match raw {
        RawPred::User(s) => PredName::User(s.as_str().into()),
        RawPred::Top => PredName::Top,
        RawPred::Bot => PredName::Bot,
        RawPred::Eq => PredName::Eq,
        RawPred::Primed(x) => PredName::Primed(Arc::new(to_pred(x, arities).name)),
        RawPred::Aux(b, g) => PredName::Aux(Arc::new(to_pred(b, arities)), Arc::new(to_pred(g, arities))),
    };
    Predicate::new(name, n)
}
