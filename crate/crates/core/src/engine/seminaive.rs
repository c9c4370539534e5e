//! The semi-naive core, shared by the engine and the oracle's relevance
//! grounder: rules may have several head atoms, every head atom of a fired
//! instance is added, and a callback sees each rule instance exactly once.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::hash::Hasher;
use std::sync::Arc;

use hashbrown::HashTable;
use rustc_hash::FxHasher;

use super::{EvalResult, Trace};
use crate::model::{Atom, Dataset, Predicate, Rule, Term};

pub(crate) type Tuple = Box<[u32]>;

#[derive(Clone, Copy, Debug)]
pub(crate) enum Arg {
    Var(usize),
    Const(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Range {
    Old,
    Delta,
    Full,
}

/// One body atom in join order. `key` lists the positions bound on entry;
/// `index` is the slot of the matching hash index of the relation.
#[derive(Clone, Debug)]
struct Step {
    pred: usize,
    args: Vec<Arg>,
    key: Vec<usize>,
    index: Option<usize>,
    range: Range,
}

#[derive(Clone, Debug)]
struct Plan {
    rule: usize,
    steps: Vec<Step>,
}

/// A rule over interned names. `body` includes a `⊤` guard for every head
/// variable missing from the original body.
#[derive(Clone, Debug)]
pub(crate) struct CRule {
    pub(crate) body: Vec<(usize, Vec<Arg>)>,
    pub(crate) head: Vec<(usize, Vec<Arg>)>,
    pub(crate) nvars: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Flow {
    Continue,
    Stop,
}

/// Rules compiled against interned predicates and constants. Each rule
/// with `n` body atoms gets `n` plans, one per choice of delta atom.
#[derive(Clone, Debug)]
pub(crate) struct Compiled {
    preds: Vec<Predicate>,
    pred_ids: HashMap<Predicate, usize>,
    consts: Vec<Arc<str>>,
    const_ids: HashMap<Arc<str>, u32>,
    /// Index key positions per predicate, shared by all plans.
    index_keys: Vec<Vec<Vec<usize>>>,
    pub(crate) rules: Vec<CRule>,
    plans: Vec<Plan>,
    pub(crate) top: usize,
    pub(crate) bot: usize,
}

impl Compiled {
    pub(crate) fn new(rules: &[Rule]) -> Self {
        let mut c = Compiled {
            preds: Vec::new(),
            pred_ids: HashMap::new(),
            consts: Vec::new(),
            const_ids: HashMap::new(),
            index_keys: Vec::new(),
            rules: Vec::new(),
            plans: Vec::new(),
            top: 0,
            bot: 0,
        };
        c.top = c.pred(&Predicate::top());
        c.bot = c.pred(&Predicate::bot());
        for r in rules {
            c.compile(r);
        }
        c
    }

    fn pred(&mut self, p: &Predicate) -> usize {
        if let Some(&i) = self.pred_ids.get(p) {
            return i;
        }
        let i = self.preds.len();
        self.preds.push(p.clone());
        self.pred_ids.insert(p.clone(), i);
        self.index_keys.push(Vec::new());
        i
    }

    fn constant(&mut self, s: &Arc<str>) -> u32 {
        if let Some(&i) = self.const_ids.get(s) {
            return i;
        }
        let i = self.consts.len() as u32;
        self.consts.push(s.clone());
        self.const_ids.insert(s.clone(), i);
        i
    }

    fn atom(&mut self, a: &Atom) -> (usize, Vec<Arg>) {
        let args = a
            .args
            .iter()
            .map(|t| match t {
                Term::Var(v) => Arg::Var(*v as usize),
                Term::Const(s) => Arg::Const(self.constant(s)),
            })
            .collect();
        (self.pred(&a.pred), args)
    }

    fn index_slot(&mut self, pred: usize, key: &[usize]) -> usize {
        let keys = &mut self.index_keys[pred];
        if let Some(i) = keys.iter().position(|k| k == key) {
            return i;
        }
        keys.push(key.to_vec());
        keys.len() - 1
    }

    fn compile(&mut self, r: &Rule) {
        let head: Vec<(usize, Vec<Arg>)> = r.head.iter().map(|a| self.atom(a)).collect();
        let mut body: Vec<(usize, Vec<Arg>)> = r.body.iter().map(|a| self.atom(a)).collect();
        // head variables missing from the body range over the active domain
        let bound: BTreeSet<usize> = body.iter().flat_map(|(_, args)| vars(args)).collect();
        let missing: BTreeSet<usize> = head.iter().flat_map(|(_, args)| vars(args)).filter(|v| !bound.contains(v)).collect();
        for v in missing {
            body.push((self.top, vec![Arg::Var(v)]));
        }
        let rule = self.rules.len();
        for delta in 0..body.len() {
            let mut order = vec![delta];
            let mut bound: HashSet<usize> = vars(&body[delta].1).collect();
            let mut rest: Vec<usize> = (0..body.len()).filter(|&i| i != delta).collect();
            while !rest.is_empty() {
                let score = |i: usize| {
                    let args = &body[i].1;
                    let b = args
                        .iter()
                        .filter(|a| matches!(a, Arg::Const(_)) || matches!(a, Arg::Var(v) if bound.contains(v)))
                        .count();
                    (b, usize::MAX - args.len())
                };
                let (pos, _) = rest
                    .iter()
                    .enumerate()
                    .max_by_key(|(k, &i)| (score(i), usize::MAX - k))
                    .expect("rest is non-empty");
                let i = rest.remove(pos);
                bound.extend(vars(&body[i].1));
                order.push(i);
            }
            let mut seen: HashSet<usize> = HashSet::new();
            let mut steps = Vec::new();
            for &i in &order {
                let (pred, args) = body[i].clone();
                let key: Vec<usize> = args
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| match a {
                        Arg::Const(_) => true,
                        Arg::Var(v) => seen.contains(v),
                    })
                    .map(|(k, _)| k)
                    .collect();
                let index = (!key.is_empty()).then(|| self.index_slot(pred, &key));
                seen.extend(vars(&args));
                let range = match i.cmp(&delta) {
                    std::cmp::Ordering::Less => Range::Old,
                    std::cmp::Ordering::Equal => Range::Delta,
                    std::cmp::Ordering::Greater => Range::Full,
                };
                steps.push(Step {
                    pred,
                    args,
                    key,
                    index,
                    range,
                });
            }
            self.plans.push(Plan { rule, steps });
        }
        self.rules.push(CRule {
            body,
            head,
            nvars: r.num_vars() as usize,
        });
    }

    /// Runs the rules to fixpoint over `d` and `⊤` seeds for every constant.
    /// `on` sees each rule instance (rule index and variable binding) once,
    /// before its head atoms are added; returning [`Flow::Stop`] ends the
    /// run early. The returned flag tells whether the run was stopped.
    pub(crate) fn saturate(
        &self,
        d: &Dataset,
        mut on: impl FnMut(usize, &[u32]) -> Flow,
    ) -> (Store, Trace, bool) {
        let mut consts = self.consts.clone();
        let mut preds = self.preds.clone();
        let mut extra_consts: HashMap<Arc<str>, u32> = HashMap::new();
        let mut extra_preds: HashMap<Predicate, usize> = HashMap::new();
        let mut initial = Pending::default();
        for f in d.facts() {
            let p = match self.pred_ids.get(&f.pred) {
                Some(&i) => i,
                None => *extra_preds.entry(f.pred.clone()).or_insert_with(|| {
                    preds.push(f.pred.clone());
                    preds.len() - 1
                }),
            };
            initial.start(p);
            for t in &f.args {
                let s = t.as_const().expect("datasets are ground");
                let c = match self.const_ids.get(s) {
                    Some(&c) => c,
                    None => *extra_consts.entry(s.clone()).or_insert_with(|| {
                        consts.push(s.clone());
                        consts.len() as u32 - 1
                    }),
                };
                initial.data.push(c);
            }
        }
        for c in 0..consts.len() as u32 {
            initial.start(self.top);
            initial.data.push(c);
        }
        let arities: Vec<usize> = preds.iter().map(|p| p.arity).collect();
        let mut store = Store {
            preds,
            consts,
            db: Db::new(&arities, &self.index_keys),
        };
        let mut trace = Vec::new();
        let mut pending = Pending::default();
        let mut stopped = false;
        for (i, r) in self.rules.iter().enumerate().filter(|(_, r)| r.body.is_empty()) {
            if on(i, &[]) == Flow::Stop {
                stopped = true;
                break;
            }
            for (p, args) in &r.head {
                pending.push(*p, args, &[]);
            }
        }
        let fresh = store.db.insert_all(&initial) + store.db.insert_all(&pending);
        pending.clear();
        trace.push(fresh);
        store.db.advance();
        if stopped {
            return (store, trace, true);
        }
        let mut binding = Vec::new();
        while store.db.has_delta() {
            for plan in &self.plans {
                let rule = &self.rules[plan.rule];
                binding.clear();
                binding.resize(rule.nvars, u32::MAX);
                let mut leaf = |b: &[u32], out: &mut Pending| {
                    if on(plan.rule, b) == Flow::Stop {
                        return Flow::Stop;
                    }
                    for (p, args) in &rule.head {
                        out.push(*p, args, b);
                    }
                    Flow::Continue
                };
                if join(&store.db, &plan.steps, 0, &mut binding, &mut pending, &mut leaf) == Flow::Stop {
                    stopped = true;
                    break;
                }
            }
            trace.push(store.db.insert_all(&pending));
            pending.clear();
            store.db.advance();
            if stopped {
                break;
            }
        }
        (store, trace, stopped)
    }

    /// Plain evaluation keeping only the facts whose predicate passes `keep`;
    /// stops as soon as `⊥` would be derived.
    pub(super) fn run_where(&self, d: &Dataset, keep: impl Fn(&Predicate) -> bool) -> (EvalResult, Trace) {
        if d.facts().iter().any(|f| f.pred.is_bot()) {
            return (EvalResult::unsat(), Vec::new());
        }
        let bot = self.bot;
        let (store, trace, stopped) = self.saturate(d, |r, _| {
            if self.rules[r].head.iter().any(|(p, _)| *p == bot) {
                Flow::Stop
            } else {
                Flow::Continue
            }
        });
        if stopped {
            return (EvalResult::unsat(), trace);
        }
        let facts = store.tuples().filter(|(p, _)| keep(&store.preds[*p])).map(|(p, t)| store.to_atom(p, t));
        (EvalResult::consistent(facts.collect()), trace)
    }
}

pub(crate) fn instantiate(args: &[Arg], binding: &[u32]) -> Tuple {
    args.iter()
        .map(|a| match a {
            Arg::Var(v) => binding[*v],
            Arg::Const(c) => *c,
        })
        .collect()
}

fn vars(args: &[Arg]) -> impl Iterator<Item = usize> + '_ {
    args.iter().filter_map(|a| match a {
        Arg::Var(v) => Some(*v),
        Arg::Const(_) => None,
    })
}

/// Head tuples waiting to be inserted, stored flat.
#[derive(Default)]
struct Pending {
    data: Vec<u32>,
    /// Predicate and start offset of each tuple.
    entries: Vec<(usize, usize)>,
}

impl Pending {
    fn start(&mut self, p: usize) {
        self.entries.push((p, self.data.len()));
    }

    fn push(&mut self, p: usize, args: &[Arg], binding: &[u32]) {
        self.start(p);
        self.data.extend(args.iter().map(|a| match a {
            Arg::Var(v) => binding[*v],
            Arg::Const(c) => *c,
        }));
    }

    fn clear(&mut self) {
        self.data.clear();
        self.entries.clear();
    }

    fn iter(&self) -> impl Iterator<Item = (usize, &[u32])> + '_ {
        self.entries.iter().enumerate().map(|(k, &(p, lo))| {
            let hi = self.entries.get(k + 1).map_or(self.data.len(), |e| e.1);
            (p, &self.data[lo..hi])
        })
    }
}

/// The facts reached by a saturation, with their interning tables.
pub(crate) struct Store {
    pub(crate) preds: Vec<Predicate>,
    pub(crate) consts: Vec<Arc<str>>,
    db: Db,
}

impl Store {
    pub(crate) fn to_atom(&self, p: usize, t: &[u32]) -> Atom {
        let args = t.iter().map(|&c| Term::Const(self.consts[c as usize].clone())).collect();
        Atom::new(self.preds[p].clone(), args)
    }

    /// Every `(predicate, tuple)` in insertion order per predicate.
    pub(crate) fn tuples(&self) -> impl Iterator<Item = (usize, &[u32])> + '_ {
        self.db
            .rels
            .iter()
            .enumerate()
            .flat_map(|(p, rel)| (0..rel.len).map(move |id| (p, rel.tuple(id))))
    }

    pub(crate) fn pred_id(&self, p: &Predicate) -> Option<usize> {
        self.preds.iter().position(|q| q == p)
    }

    pub(crate) fn const_id(&self, c: &str) -> Option<u32> {
        self.consts.iter().position(|k| &**k == c).map(|i| i as u32)
    }

    /// Tuple `i` of predicate `p`.
    pub(crate) fn tuple_at(&self, p: usize, i: usize) -> &[u32] {
        self.db.rels[p].tuple(i)
    }

    /// Position of a tuple within its relation.
    pub(crate) fn local_id(&self, p: usize, t: &[u32]) -> Option<u32> {
        self.db.rels[p].find(t)
    }

    pub(crate) fn relation_sizes(&self) -> impl Iterator<Item = usize> + '_ {
        self.db.rels.iter().map(|r| r.len)
    }
}

fn hash_of(t: impl Iterator<Item = u32>) -> u64 {
    let mut h = FxHasher::default();
    for x in t {
        h.write_u32(x);
    }
    h.finish()
}

/// Tuples of one key, chained in insertion order: each group holds its
/// first and last tuple id, and `next` links a tuple to the following one.
struct Index {
    key: Vec<usize>,
    groups: HashTable<usize>,
    ends: Vec<(u32, u32)>,
    next: Vec<u32>,
}

struct Relation {
    arity: usize,
    len: usize,
    data: Vec<u32>,
    ids: HashTable<u32>,
    indexes: Vec<Index>,
    /// Tuples below `old` predate the current round, those in
    /// `old..delta` are its delta; later ones are pending.
    old: usize,
    delta: usize,
}

impl Relation {
    fn tuple(&self, id: usize) -> &[u32] {
        &self.data[id * self.arity..(id + 1) * self.arity]
    }

    fn find(&self, t: &[u32]) -> Option<u32> {
        let h = hash_of(t.iter().copied());
        self.ids.find(h, |&id| self.tuple(id as usize) == t).copied()
    }

    fn insert(&mut self, t: &[u32]) -> bool {
        if self.find(t).is_some() {
            return false;
        }
        let id = self.len as u32;
        self.data.extend_from_slice(t);
        self.len += 1;
        let (arity, data) = (self.arity, &self.data);
        let tuple = |id: u32| &data[id as usize * arity..(id as usize + 1) * arity];
        self.ids
            .insert_unique(hash_of(t.iter().copied()), id, |&i| hash_of(tuple(i).iter().copied()));
        for ix in &mut self.indexes {
            let h = hash_of(ix.key.iter().map(|&k| t[k]));
            ix.next.push(u32::MAX);
            let (key, ends) = (&ix.key, &ix.ends);
            let same = |g: &usize| key.iter().all(|&k| tuple(ends[*g].0)[k] == t[k]);
            match ix.groups.find(h, same) {
                Some(&g) => {
                    let last = &mut ix.ends[g].1;
                    ix.next[*last as usize] = id;
                    *last = id;
                }
                None => {
                    let g = ix.ends.len();
                    ix.ends.push((id, id));
                    let (key, ends) = (&ix.key, &ix.ends);
                    ix.groups
                        .insert_unique(h, g, |&g| hash_of(key.iter().map(|&k| tuple(ends[g].0)[k])));
                }
            }
        }
        true
    }

    /// Ids of the tuples whose key positions carry `values`, ascending.
    fn lookup<'a>(&'a self, slot: usize, values: &[u32]) -> impl Iterator<Item = u32> + 'a {
        let ix = &self.indexes[slot];
        let h = hash_of(values.iter().copied());
        let same = |g: &usize| {
            let rep = self.tuple(ix.ends[*g].0 as usize);
            ix.key.iter().zip(values).all(|(&k, &v)| rep[k] == v)
        };
        let first = ix.groups.find(h, same).map(|&g| ix.ends[g].0);
        std::iter::successors(first, |&id| Some(ix.next[id as usize]).filter(|&n| n != u32::MAX))
    }
}

struct Db {
    rels: Vec<Relation>,
}

impl Db {
    fn new(arities: &[usize], keys: &[Vec<Vec<usize>>]) -> Self {
        let rels = arities
            .iter()
            .enumerate()
            .map(|(p, &arity)| Relation {
                arity,
                len: 0,
                data: Vec::new(),
                ids: HashTable::new(),
                indexes: keys
                    .get(p)
                    .map(|ks| {
                        ks.iter()
                            .map(|k| Index {
                                key: k.clone(),
                                groups: HashTable::new(),
                                ends: Vec::new(),
                                next: Vec::new(),
                            })
                            .collect()
                    })
                    .unwrap_or_default(),
                old: 0,
                delta: 0,
            })
            .collect();
        Db { rels }
    }

    fn insert_all(&mut self, pending: &Pending) -> usize {
        pending.iter().filter(|(p, t)| self.rels[*p].insert(t)).count()
    }

    fn advance(&mut self) {
        for rel in &mut self.rels {
            rel.old = rel.delta;
            rel.delta = rel.len;
        }
    }

    fn has_delta(&self) -> bool {
        self.rels.iter().any(|r| r.delta > r.old)
    }
}

type Leaf<'a> = dyn FnMut(&[u32], &mut Pending) -> Flow + 'a;

fn join(db: &Db, steps: &[Step], depth: usize, binding: &mut Vec<u32>, out: &mut Pending, leaf: &mut Leaf<'_>) -> Flow {
    let Some(step) = steps.get(depth) else {
        return leaf(binding, out);
    };
    let rel = &db.rels[step.pred];
    let (lo, hi) = match step.range {
        Range::Old => (0, rel.old),
        Range::Delta => (rel.old, rel.delta),
        Range::Full => (0, rel.delta),
    };
    if lo >= hi {
        return Flow::Continue;
    }
    let mut visit = |id: usize, binding: &mut Vec<u32>| -> Flow {
        let t = rel.tuple(id);
        let mut newly: [usize; 8] = [0; 8];
        let mut extra = Vec::new();
        let mut n = 0;
        let mut ok = true;
        for (k, a) in step.args.iter().enumerate() {
            match *a {
                Arg::Const(c) => ok = t[k] == c,
                Arg::Var(v) => {
                    if binding[v] == u32::MAX {
                        binding[v] = t[k];
                        if n < newly.len() {
                            newly[n] = v;
                            n += 1;
                        } else {
                            extra.push(v);
                        }
                    } else {
                        ok = binding[v] == t[k];
                    }
                }
            }
            if !ok {
                break;
            }
        }
        let flow = if ok {
            join(db, steps, depth + 1, binding, out, leaf)
        } else {
            Flow::Continue
        };
        for &v in newly[..n].iter().chain(&extra) {
            binding[v] = u32::MAX;
        }
        flow
    };
    match step.index {
        Some(slot) => {
            let mut buf = [0u32; 8];
            let mut long = Vec::new();
            let values: &[u32] = {
                let val = |k: usize| match step.args[k] {
                    Arg::Const(c) => c,
                    Arg::Var(v) => binding[v],
                };
                if step.key.len() <= buf.len() {
                    for (slot, &k) in buf.iter_mut().zip(&step.key) {
                        *slot = val(k);
                    }
                    &buf[..step.key.len()]
                } else {
                    long.extend(step.key.iter().map(|&k| val(k)));
                    &long
                }
            };
            for id in rel.lookup(slot, values) {
                let id = id as usize;
                if id >= hi {
                    break;
                }
                if id >= lo && visit(id, binding) == Flow::Stop {
                    return Flow::Stop;
                }
            }
        }
        None => {
            for id in lo..hi {
                if visit(id, binding) == Flow::Stop {
                    return Flow::Stop;
                }
            }
        }
    }
    Flow::Continue
}
