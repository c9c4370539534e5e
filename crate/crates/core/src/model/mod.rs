//! Abstract syntax for function-free disjunctive rules, datasets and
//! signatures.
//!
//! Variables are indices local to the rule that owns them, so two rules never
//! share a variable: any operation that combines rules (unification,
//! unfolding) shifts one side into a disjoint index range first.

mod conventions;
mod validate;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

pub use conventions::{augment_top, equality_axioms, idb_expansion, idb_predicates, top_rules};
pub use validate::{resolve_atoms, validate_derived, validate_program, RawAtom, RawPred, RawRule, RawTerm};

use crate::error::ModelError;

/// Interned-ish symbol used for predicate, constant and rule names.
pub type Sym = Arc<str>;

/// The name of a predicate.
///
/// Derived names (`Primed`, `Aux`) are structured rather than mangled
/// strings, so a user predicate can never collide with one of them.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PredName {
    User(Sym),
    Top,
    Bot,
    Eq,
    /// `Q'` introduced by the IDB expansion.
    Primed(Arc<PredName>),
    /// `P^Q`: "proving P(x) suffices to prove Q(y)".
    Aux(Arc<Predicate>, Arc<Predicate>),
}

impl PredName {
    pub fn is_derived(&self) -> bool {
        matches!(self, PredName::Primed(_) | PredName::Aux(..))
    }
}

impl fmt::Display for PredName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PredName::User(s) => f.write_str(s),
            PredName::Top => f.write_str("top"),
            PredName::Bot => f.write_str("bot"),
            PredName::Eq => f.write_str("="),
            PredName::Primed(inner) => write!(f, "{inner}'"),
            PredName::Aux(base, goal) => write!(f, "{{{}^{}}}", base.name, goal.name),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Predicate {
    pub name: PredName,
    pub arity: usize,
}

impl Predicate {
    pub fn new(name: PredName, arity: usize) -> Self {
        Predicate { name, arity }
    }

    pub fn user(name: &str, arity: usize) -> Self {
        Predicate::new(PredName::User(name.into()), arity)
    }

    pub fn top() -> Self {
        Predicate::new(PredName::Top, 1)
    }

    pub fn bot() -> Self {
        Predicate::new(PredName::Bot, 0)
    }

    pub fn eq() -> Self {
        Predicate::new(PredName::Eq, 2)
    }

    pub fn primed(&self) -> Self {
        Predicate::new(PredName::Primed(Arc::new(self.name.clone())), self.arity)
    }

    /// The auxiliary predicate `base^goal` of arity `arity(base) + arity(goal)`.
    pub fn aux(base: &Predicate, goal: &Predicate) -> Self {
        Predicate::new(
            PredName::Aux(Arc::new(base.clone()), Arc::new(goal.clone())),
            base.arity + goal.arity,
        )
    }

    pub fn is_top(&self) -> bool {
        self.name == PredName::Top
    }

    pub fn is_bot(&self) -> bool {
        self.name == PredName::Bot
    }

    pub fn is_eq(&self) -> bool {
        self.name == PredName::Eq
    }

    pub fn is_builtin(&self) -> bool {
        matches!(self.name, PredName::Top | PredName::Bot | PredName::Eq)
    }

    /// `(base, goal)` when this is an auxiliary predicate.
    pub fn aux_parts(&self) -> Option<(&Predicate, &Predicate)> {
        match &self.name {
            PredName::Aux(b, g) => Some((b, g)),
            _ => None,
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

impl Serialize for Predicate {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Rule-local variable index.
pub type Var = u32;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    Const(Sym),
}

impl Term {
    pub fn constant(name: &str) -> Self {
        Term::Const(name.into())
    }

    pub fn as_var(&self) -> Option<Var> {
        match self {
            Term::Var(v) => Some(*v),
            Term::Const(_) => None,
        }
    }

    pub fn as_const(&self) -> Option<&Sym> {
        match self {
            Term::Const(c) => Some(c),
            Term::Var(_) => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "X{v}"),
            Term::Const(c) => f.write_str(c),
        }
    }
}

impl Serialize for Term {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub pred: Predicate,
    pub args: Vec<Term>,
}

impl Atom {
    /// Panics if the argument count differs from the predicate's arity.
    pub fn new(pred: Predicate, args: Vec<Term>) -> Self {
        assert_eq!(pred.arity, args.len(), "arity mismatch for {pred}");
        Atom { pred, args }
    }

    pub fn bot() -> Self {
        Atom::new(Predicate::bot(), Vec::new())
    }

    pub fn top(t: Term) -> Self {
        Atom::new(Predicate::top(), vec![t])
    }

    /// Ground atom from constant names.
    pub fn fact(pred: Predicate, consts: &[&str]) -> Self {
        Atom::new(pred, consts.iter().map(|c| Term::constant(c)).collect())
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| matches!(t, Term::Const(_)))
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.args.iter().filter_map(Term::as_var)
    }

    pub fn constants(&self) -> impl Iterator<Item = &Sym> + '_ {
        self.args.iter().filter_map(Term::as_const)
    }

    pub fn map_vars(&self, mut f: impl FnMut(Var) -> Term) -> Atom {
        Atom {
            pred: self.pred.clone(),
            args: self
                .args
                .iter()
                .map(|t| match t {
                    Term::Var(v) => f(*v),
                    c => c.clone(),
                })
                .collect(),
        }
    }

    pub fn with_pred(&self, pred: Predicate) -> Atom {
        Atom::new(pred, self.args.clone())
    }
}

/// Displays with variables as `X0, X1, ...`; the canonical printer lives in
/// [`crate::text`].
impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pred.is_eq() {
            return write!(f, "{} = {}", self.args[0], self.args[1]);
        }
        write!(f, "{}", self.pred.name)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl Serialize for Atom {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RuleId(pub Sym);

impl RuleId {
    pub fn new(s: impl AsRef<str>) -> Self {
        RuleId(s.as_ref().into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for RuleId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

/// Membership tag for the implicitly assumed rule families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum RuleKind {
    Regular,
    /// Member of `P_⊤`.
    Top,
    /// Congruence axiom for `≈`.
    Equality,
}

/// `body → head`, with the head read as a disjunction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub id: RuleId,
    pub kind: RuleKind,
    pub body: Vec<Atom>,
    pub head: Vec<Atom>,
    nvars: u32,
}

impl Rule {
    /// Builds a rule, collapsing duplicate atoms and renumbering variables
    /// densely in order of first occurrence (body first).
    pub fn new(id: RuleId, body: Vec<Atom>, head: Vec<Atom>) -> Self {
        Rule::with_kind(id, RuleKind::Regular, body, head)
    }

    pub fn with_kind(id: RuleId, kind: RuleKind, body: Vec<Atom>, head: Vec<Atom>) -> Self {
        Rule::normalised(id, kind, body, head).0
    }

    /// Like [`Rule::with_kind`] but also returns the variable renumbering
    /// that was applied (old index to new index).
    pub(crate) fn normalised(
        id: RuleId,
        kind: RuleKind,
        body: Vec<Atom>,
        head: Vec<Atom>,
    ) -> (Self, HashMap<Var, Var>) {
        let body = dedup(body);
        let head = dedup(head);
        let mut map: HashMap<Var, Var> = HashMap::new();
        for atom in body.iter().chain(head.iter()) {
            for v in atom.vars() {
                let next = map.len() as Var;
                map.entry(v).or_insert(next);
            }
        }
        let rename = |a: &Atom| a.map_vars(|v| Term::Var(map[&v]));
        let body = dedup(body.iter().map(rename).collect());
        let head = dedup(head.iter().map(rename).collect());
        let nvars = map.len() as u32;
        (
            Rule {
                id,
                kind,
                body,
                head,
                nvars,
            },
            map,
        )
    }

    pub fn num_vars(&self) -> u32 {
        self.nvars
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> + '_ {
        self.body.iter().chain(self.head.iter())
    }

    pub fn is_datalog(&self) -> bool {
        self.head.len() <= 1
    }

    pub fn is_disjunctive(&self) -> bool {
        !self.is_datalog()
    }

    pub fn is_fact(&self) -> bool {
        self.body.is_empty()
    }

    /// First head variable that does not occur in the body, if any.
    pub fn unsafe_var(&self) -> Option<Var> {
        let body_vars: BTreeSet<Var> = self.body.iter().flat_map(Atom::vars).collect();
        self.head
            .iter()
            .flat_map(Atom::vars)
            .find(|v| !body_vars.contains(v))
    }

    pub fn constants(&self) -> impl Iterator<Item = &Sym> + '_ {
        self.atoms().flat_map(Atom::constants)
    }

    pub fn with_id(mut self, id: RuleId) -> Self {
        self.id = id;
        self
    }

    /// Same rule with every atom's predicate passed through `f`.
    pub fn map_preds(&self, mut f: impl FnMut(&Predicate) -> Predicate) -> Rule {
        let mut go = |a: &Atom| a.with_pred(f(&a.pred));
        let body = self.body.iter().map(&mut go).collect();
        let head = self.head.iter().map(&mut go).collect();
        Rule::with_kind(self.id.clone(), self.kind, body, head)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::text::print_rule(self))
    }
}

fn dedup(atoms: Vec<Atom>) -> Vec<Atom> {
    let mut seen = BTreeSet::new();
    atoms
        .into_iter()
        .filter(|a| seen.insert(a.clone()))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Provenance {
    Original,
    Derived,
}

/// An ordered list of rules. The rules of `P_⊥` are never stored; the rules
/// of `P_⊤` only appear when explicitly materialised by [`augment_top`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    rules: Vec<Rule>,
    provenance: Provenance,
}

impl Program {
    /// Assembles a program, making rule ids unique by suffixing repeats.
    pub(crate) fn from_parts(mut rules: Vec<Rule>, provenance: Provenance) -> Self {
        let mut seen: HashSet<RuleId> = HashSet::new();
        for r in &mut rules {
            if !seen.insert(r.id.clone()) {
                let mut k = 2;
                let fresh = loop {
                    let cand = RuleId::new(format!("{}.{k}", r.id));
                    if !seen.contains(&cand) {
                        break cand;
                    }
                    k += 1;
                };
                seen.insert(fresh.clone());
                r.id = fresh;
            }
        }
        Program { rules, provenance }
    }

    /// A derived program from already well-formed rules.
    pub fn derived(rules: Vec<Rule>) -> Self {
        Program::from_parts(rules, Provenance::Derived)
    }

    /// Same rules, different provenance tag.
    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn empty() -> Self {
        Program::from_parts(Vec::new(), Provenance::Original)
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn into_rules(self) -> Vec<Rule> {
        self.rules
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn rule(&self, id: &RuleId) -> Option<&Rule> {
        self.rules.iter().find(|r| &r.id == id)
    }

    /// Rules outside `P_⊤`.
    pub fn proper_rules(&self) -> impl Iterator<Item = &Rule> + '_ {
        self.rules.iter().filter(|r| r.kind != RuleKind::Top)
    }

    pub fn is_datalog(&self) -> bool {
        self.rules.iter().all(Rule::is_datalog)
    }

    pub fn predicates(&self) -> BTreeSet<Predicate> {
        self.rules
            .iter()
            .flat_map(Rule::atoms)
            .map(|a| a.pred.clone())
            .collect()
    }

    pub fn constants(&self) -> BTreeSet<Sym> {
        self.rules.iter().flat_map(Rule::constants).cloned().collect()
    }

    pub fn signature(&self) -> Signature {
        Signature {
            predicates: self.predicates(),
            constants: self.constants(),
        }
    }

    pub fn max_arity(&self) -> usize {
        self.predicates().iter().map(|p| p.arity).max().unwrap_or(0)
    }

    /// Size in the sense of the rewriting bounds: the proper rules plus the
    /// implicit rule of `P_⊥`.
    pub fn size_with_bot(&self) -> usize {
        self.proper_rules().count() + 1
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::text::print_program(self))
    }
}

/// A finite set of ground facts.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Dataset {
    facts: BTreeSet<Atom>,
}

impl Dataset {
    pub fn new(facts: impl IntoIterator<Item = Atom>) -> Result<Self, ModelError> {
        let facts: BTreeSet<Atom> = facts.into_iter().collect();
        for f in &facts {
            if !f.is_ground() {
                return Err(ModelError::NonGroundFact(f.to_string()));
            }
            if f.pred.is_top() || f.pred.is_bot() {
                return Err(ModelError::BuiltinFact(f.to_string()));
            }
            if f.pred.arity != f.args.len() {
                return Err(ModelError::ArityMismatch {
                    pred: f.pred.name.to_string(),
                    expected: f.pred.arity,
                    found: f.args.len(),
                });
            }
        }
        Ok(Dataset { facts })
    }

    pub fn empty() -> Self {
        Dataset::default()
    }

    pub fn facts(&self) -> &BTreeSet<Atom> {
        &self.facts
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn contains(&self, a: &Atom) -> bool {
        self.facts.contains(a)
    }

    pub fn constants(&self) -> BTreeSet<Sym> {
        self.facts.iter().flat_map(Atom::constants).cloned().collect()
    }

    pub fn predicates(&self) -> BTreeSet<Predicate> {
        self.facts.iter().map(|a| a.pred.clone()).collect()
    }

    pub fn signature(&self) -> Signature {
        Signature {
            predicates: self.predicates(),
            constants: self.constants(),
        }
    }

    /// Adds facts; the caller guarantees they are ground user facts.
    pub fn extended(&self, more: impl IntoIterator<Item = Atom>) -> Result<Dataset, ModelError> {
        Dataset::new(self.facts.iter().cloned().chain(more))
    }
}

impl fmt::Display for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::text::print_dataset(self))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    pub predicates: BTreeSet<Predicate>,
    pub constants: BTreeSet<Sym>,
}

impl Signature {
    pub fn union(&self, other: &Signature) -> Signature {
        Signature {
            predicates: self.predicates.union(&other.predicates).cloned().collect(),
            constants: self.constants.union(&other.constants).cloned().collect(),
        }
    }

    pub fn has_equality(&self) -> bool {
        self.predicates.iter().any(Predicate::is_eq)
    }
}

/// An injective, arity-preserving predicate renaming. Predicates outside
/// the domain map to themselves.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Renaming {
    map: BTreeMap<Predicate, Predicate>,
}

impl Renaming {
    pub fn identity() -> Self {
        Renaming::default()
    }

    pub fn new(pairs: impl IntoIterator<Item = (Predicate, Predicate)>) -> Result<Self, ModelError> {
        let map: BTreeMap<Predicate, Predicate> = pairs.into_iter().collect();
        let mut images = BTreeSet::new();
        for (from, to) in &map {
            if from.arity != to.arity {
                return Err(ModelError::RenamingArity(from.to_string(), to.to_string()));
            }
            if !images.insert(to.clone()) {
                return Err(ModelError::RenamingNotInjective(to.to_string()));
            }
        }
        Ok(Renaming { map })
    }

    pub fn apply(&self, p: &Predicate) -> Predicate {
        self.map.get(p).cloned().unwrap_or_else(|| p.clone())
    }

    pub fn apply_atom(&self, a: &Atom) -> Atom {
        a.with_pred(self.apply(&a.pred))
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&Predicate, &Predicate)> + '_ {
        self.map.iter()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Injectivity of the total map induced on `domain`: no predicate outside
    /// the explicit map is hit by one inside it.
    pub fn is_injective_on(&self, domain: &BTreeSet<Predicate>) -> bool {
        let images: Vec<Predicate> = domain.iter().map(|p| self.apply(p)).collect();
        let distinct: BTreeSet<&Predicate> = images.iter().collect();
        distinct.len() == images.len()
    }
}
