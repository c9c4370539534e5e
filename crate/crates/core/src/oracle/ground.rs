use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use super::OracleConfig;
use crate::engine::seminaive::{instantiate, Compiled, Flow, Store};
use crate::model::{Atom, Dataset, Rule, RuleId, Term};
use crate::EvalError;

/// Where a ground clause comes from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ClauseSource {
    /// A fact of the dataset.
    Data,
    /// A seeded `⊤(a)`.
    Top,
    /// The clause `¬⊥`.
    Bot,
    /// An instance of a rule; `binding[i]` is the value of variable `i`.
    Rule { rule: RuleId, binding: Vec<Term> },
}

/// `body → head` over atom indices into [`GroundClauseSet::atoms`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GroundClause {
    pub body: Vec<u32>,
    pub head: Vec<u32>,
    pub source: ClauseSource,
}

#[derive(Clone, Debug, Default)]
pub struct GroundClauseSet {
    pub atoms: Vec<Atom>,
    pub clauses: Vec<GroundClause>,
    index: HashMap<Atom, u32>,
}

impl GroundClauseSet {
    pub fn atom_id(&self, a: &Atom) -> Option<u32> {
        self.index.get(a).copied()
    }

    /// Number of instances of rule `id`.
    pub fn instances_of(&self, id: &str) -> usize {
        self.clauses
            .iter()
            .filter(|c| matches!(&c.source, ClauseSource::Rule { rule, .. } if rule.as_str() == id))
            .count()
    }

    fn intern(&mut self, a: Atom) -> u32 {
        if let Some(&i) = self.index.get(&a) {
            return i;
        }
        let i = self.atoms.len() as u32;
        self.index.insert(a.clone(), i);
        self.atoms.push(a);
        i
    }

    fn seed(&mut self, d: &Dataset, domain: &BTreeSet<std::sync::Arc<str>>) {
        let bot = self.intern(Atom::bot());
        self.clauses.push(GroundClause {
            body: vec![bot],
            head: Vec::new(),
            source: ClauseSource::Bot,
        });
        for c in domain {
            let t = self.intern(Atom::top(Term::Const(c.clone())));
            self.clauses.push(GroundClause {
                body: Vec::new(),
                head: vec![t],
                source: ClauseSource::Top,
            });
        }
        for f in d.facts() {
            let a = self.intern(f.clone());
            self.clauses.push(GroundClause {
                body: Vec::new(),
                head: vec![a],
                source: ClauseSource::Data,
            });
        }
    }

    fn check(&self, cfg: &OracleConfig) -> Result<(), EvalError> {
        if self.clauses.len() > cfg.max_clauses {
            return Err(EvalError::ResourceCap {
                what: "ground clauses",
                limit: cfg.max_clauses,
            });
        }
        if self.atoms.len() > cfg.max_atoms {
            return Err(EvalError::ResourceCap {
                what: "ground atoms",
                limit: cfg.max_atoms,
            });
        }
        Ok(())
    }
}

/// Every instance of every rule over the active domain.
pub(super) fn ground_full(rules: &[Rule], d: &Dataset, cfg: &OracleConfig) -> Result<GroundClauseSet, EvalError> {
    let domain: BTreeSet<_> = rules.iter().flat_map(|r| r.constants()).cloned().chain(d.constants()).collect();
    let dom: Vec<Term> = domain.iter().cloned().map(Term::Const).collect();
    let mut g = GroundClauseSet::default();
    g.seed(d, &domain);
    for r in rules {
        let n = r.num_vars() as usize;
        if n > 0 && dom.is_empty() {
            continue;
        }
        let total = dom.len().checked_pow(n as u32).unwrap_or(usize::MAX);
        if g.clauses.len().saturating_add(total) > cfg.max_clauses {
            return Err(EvalError::ResourceCap {
                what: "ground clauses",
                limit: cfg.max_clauses,
            });
        }
        let mut digits = vec![0usize; n];
        loop {
            let binding: Vec<Term> = digits.iter().map(|&k| dom[k].clone()).collect();
            let inst = |a: &Atom| a.map_vars(|v| binding[v as usize].clone());
            let body = r.body.iter().map(|a| g.intern(inst(a))).collect();
            let head = r.head.iter().map(|a| g.intern(inst(a))).collect();
            g.clauses.push(GroundClause {
                body,
                head,
                source: ClauseSource::Rule {
                    rule: r.id.clone(),
                    binding,
                },
            });
            g.check(cfg)?;
            // odometer increment
            let mut k = 0;
            while k < n {
                digits[k] += 1;
                if digits[k] < dom.len() {
                    break;
                }
                digits[k] = 0;
                k += 1;
            }
            if k == n {
                break;
            }
        }
    }
    g.check(cfg)?;
    Ok(g)
}

/// The instances whose bodies consist of atoms that can be true in some
/// minimal model: everything outside is false in all of them, so cautious
/// consequences are unaffected.
pub(super) fn ground_relevant(
    compiled: &Compiled,
    rules: &[Rule],
    d: &Dataset,
    cfg: &OracleConfig,
) -> Result<GroundClauseSet, EvalError> {
    let mut instances: Vec<(usize, Box<[u32]>)> = Vec::new();
    let cap = cfg.max_clauses;
    let (store, _, stopped) = compiled.saturate(d, |r, b| {
        instances.push((r, b.into()));
        if instances.len() > cap {
            Flow::Stop
        } else {
            Flow::Continue
        }
    });
    if stopped {
        return Err(EvalError::ResourceCap {
            what: "ground clauses",
            limit: cap,
        });
    }
    let total: usize = store.relation_sizes().sum();
    if total > cfg.max_atoms {
        return Err(EvalError::ResourceCap {
            what: "ground atoms",
            limit: cfg.max_atoms,
        });
    }
    let mut g = GroundClauseSet::default();
    let domain: BTreeSet<_> = store.consts.iter().cloned().collect();
    g.seed(d, &domain);
    let mut offsets = Vec::new();
    let mut next = 0u32;
    for n in store.relation_sizes() {
        offsets.push(next);
        next += n as u32;
    }
    // adopt the store's numbering, keeping ids already handed out by seed()
    let mut remap: Vec<u32> = Vec::with_capacity(total);
    for (p, t) in store.tuples() {
        remap.push(g.intern(store.to_atom(p, t)));
    }
    let id = |p: usize, t: &[u32]| -> u32 {
        let local = store.local_id(p, t).expect("instances only mention reached atoms");
        remap[(offsets[p] + local) as usize]
    };
    for (r, b) in instances {
        let cr = &compiled.rules[r];
        let body = cr.body.iter().map(|(p, args)| id(*p, &instantiate(args, &b))).collect();
        let head = cr.head.iter().map(|(p, args)| id(*p, &instantiate(args, &b))).collect();
        let binding = b.iter().map(|&c| Term::Const(store.consts[c as usize].clone())).collect();
        g.clauses.push(GroundClause {
            body,
            head,
            source: ClauseSource::Rule {
                rule: rules[r].id.clone(),
                binding,
            },
        });
    }
    g.check(cfg)?;
    Ok(g)
}

/// The relevant grounding as bare clauses over the store's atom numbering:
/// atom `offsets[p] + i` is tuple `i` of predicate `p`. Used when only the
/// cautious consequences are wanted, so no atoms are built up front.
pub(super) struct CompactGrounding {
    pub store: Store,
    pub offsets: Vec<u32>,
    pub atoms: usize,
    pub clauses: Vec<Vec<super::sat::Lit>>,
    pub horn: bool,
}

impl CompactGrounding {
    pub fn pred_of(&self, v: usize) -> usize {
        self.offsets.partition_point(|&o| o as usize <= v) - 1
    }

    pub fn atom(&self, v: usize) -> Atom {
        let p = self.pred_of(v);
        let t = self.store.tuple_at(p, v - self.offsets[p] as usize);
        self.store.to_atom(p, t)
    }
}

/// With `units` false the dataset and `⊤` unit clauses are left out, so the
/// caller can supply them as assumptions instead.
pub(super) fn ground_compact(
    compiled: &Compiled,
    d: &Dataset,
    cfg: &OracleConfig,
    units: bool,
) -> Result<CompactGrounding, EvalError> {
    use super::sat::{neg, pos};
    let mut instances: Vec<u32> = Vec::new();
    let mut count = 0usize;
    let cap = cfg.max_clauses;
    let (store, _, stopped) = compiled.saturate(d, |r, b| {
        instances.push(r as u32);
        instances.push(b.len() as u32);
        instances.extend_from_slice(b);
        count += 1;
        if count > cap {
            Flow::Stop
        } else {
            Flow::Continue
        }
    });
    if stopped {
        return Err(EvalError::ResourceCap {
            what: "ground clauses",
            limit: cap,
        });
    }
    let mut offsets = Vec::new();
    let mut next = 0u32;
    for n in store.relation_sizes() {
        offsets.push(next);
        next += n as u32;
    }
    let atoms = next as usize;
    if atoms > cfg.max_atoms {
        return Err(EvalError::ResourceCap {
            what: "ground atoms",
            limit: cfg.max_atoms,
        });
    }
    let id = |p: usize, t: &[u32]| -> u32 {
        offsets[p] + store.local_id(p, t).expect("instances only mention reached atoms")
    };
    let mut clauses = Vec::with_capacity(count + atoms + 1);
    let mut horn = true;
    // the dataset and the ⊤ seeds are exactly the unit facts of the store
    for f in d.facts().iter().filter(|_| units) {
        let p = store.pred_id(&f.pred).expect("dataset predicates are interned");
        let t: Vec<u32> = f
            .args
            .iter()
            .map(|a| store.const_id(a.as_const().expect("datasets are ground")).expect("interned"))
            .collect();
        clauses.push(vec![pos(id(p, &t))]);
    }
    for c in (0..store.consts.len() as u32).filter(|_| units) {
        clauses.push(vec![pos(id(compiled.top, &[c]))]);
    }
    if let Some(b) = store.local_id(compiled.bot, &[]) {
        clauses.push(vec![neg(offsets[compiled.bot] + b)]);
    }
    let mut k = 0;
    let mut buf = Vec::new();
    while k < instances.len() {
        let cr = &compiled.rules[instances[k] as usize];
        let n = instances[k + 1] as usize;
        let b = &instances[k + 2..k + 2 + n];
        k += 2 + n;
        horn &= cr.head.len() <= 1;
        let mut clause = Vec::with_capacity(cr.body.len() + cr.head.len());
        for (p, args) in &cr.body {
            buf.clear();
            buf.extend(instantiate(args, b).iter());
            clause.push(neg(id(*p, &buf)));
        }
        for (p, args) in &cr.head {
            buf.clear();
            buf.extend(instantiate(args, b).iter());
            clause.push(pos(id(*p, &buf)));
        }
        clauses.push(clause);
    }
    Ok(CompactGrounding {
        store,
        offsets,
        atoms,
        clauses,
        horn,
    })
}
