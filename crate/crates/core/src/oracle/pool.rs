//! Cautious evaluation of one program over many datasets that share a
//! constant pool and a set of input predicates.
//!
//! The relevant grounding for the largest dataset (every input fact over the
//! pool) covers the relevant grounding of each smaller one, so it is built
//! once and each dataset becomes a set of positive assumptions: a fact is
//! cautiously entailed when it holds in every model of the clauses in which
//! the dataset holds. Cautious consequences are monotone in the dataset, so
//! a fact entailed by `D` is entailed by every superset, and a countermodel
//! is one for every dataset among the input atoms it makes true, plus those
//! that can be switched on without breaking a clause. Both kinds of
//! certificate are kept and consulted before the solver.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use super::ground::{ground_compact, CompactGrounding};
use super::sat::{neg, pos, Lit, Solver};
use super::{with_axioms, OracleConfig};
use crate::engine::seminaive::Compiled;
use crate::engine::EvalResult;
use crate::model::{Atom, Dataset, Predicate, Program, Term};

/// Bit sets over input atoms and over targets. Both are capped at 128.
type Bits = u128;

const MAX_BITS: usize = 128;

/// See the module documentation. Built by [`PoolOracle::new`].
pub struct PoolOracle {
    solver: Solver,
    clauses: Vec<Vec<Lit>>,
    /// Variable of each input atom; bit `i` of an input set is atom `i`.
    input_vars: Vec<u32>,
    input_index: HashMap<Atom, usize>,
    /// Input atoms true for every dataset: `⊤` of the program's constants.
    always: Bits,
    /// `⊤(c)` bit per pool constant.
    top_bits: HashMap<Arc<str>, usize>,
    /// Variable of each target; target 0 is `⊥` (`None` when unreachable).
    target_vars: Vec<Option<u32>>,
    target_atoms: Vec<Atom>,
    /// Per variable: its input bit, its target index, and whether it never
    /// occurs negatively in a clause.
    input_bit: Vec<Option<usize>>,
    target_of: Vec<Option<usize>>,
    head_only: Vec<bool>,
    /// Per target: input sets known to entail it, and input sets known not
    /// to. Entailment by `⊥` stands for inconsistency.
    supports: Vec<Vec<Bits>>,
    refutations: Vec<Vec<Bits>>,
    solver_calls: usize,
}

impl PoolOracle {
    /// Prepares `p` for datasets whose facts use `inputs` over `pool`,
    /// reporting facts whose predicate passes `keep`. `None` when the scheme
    /// does not apply: `≈` occurs, or there are more than 128 input atoms or
    /// targets.
    pub fn new(
        p: &Program,
        pool: &[Arc<str>],
        inputs: &BTreeSet<Predicate>,
        keep: impl Fn(&Predicate) -> bool,
        cfg: &OracleConfig,
    ) -> Option<PoolOracle> {
        let rules = super::regular_rules(p);
        let signature = Program::derived(rules.clone()).signature();
        if signature.has_equality() || inputs.iter().any(|q| q.is_builtin()) {
            return None;
        }
        let compiled = Compiled::new(&with_axioms(&rules, &signature));
        let all: Vec<Atom> = inputs.iter().flat_map(|q| tuples(q, pool)).collect();
        if all.len() + pool.len() > MAX_BITS {
            return None;
        }
        let d_max = Dataset::new(all.iter().cloned()).ok()?;
        let g = ground_compact(&compiled, &d_max, cfg, false).ok()?;
        let var = |a: &Atom| -> Option<u32> {
            let pi = g.store.pred_id(&a.pred)?;
            let t: Option<Vec<u32>> = a.args.iter().map(|t| g.store.const_id(t.as_const()?)).collect();
            let local = g.store.local_id(pi, &t?)?;
            Some(g.offsets[pi] + local)
        };
        let mut input_atoms = all;
        let program_consts = p.constants();
        let mut top_bits = HashMap::new();
        let mut always: Bits = 0;
        for c in pool.iter().chain(program_consts.iter()) {
            if top_bits.contains_key(c) {
                continue;
            }
            top_bits.insert(c.clone(), input_atoms.len());
            if program_consts.contains(c) {
                always |= 1 << input_atoms.len();
            }
            input_atoms.push(Atom::top(Term::Const(c.clone())));
        }
        if input_atoms.len() > MAX_BITS {
            return None;
        }
        let input_vars: Option<Vec<u32>> = input_atoms.iter().map(var).collect();
        let input_vars = input_vars?;
        let mut input_bit = vec![None; g.atoms];
        for (i, &v) in input_vars.iter().enumerate() {
            input_bit[v as usize] = Some(i);
        }
        let bot_var = g.store.local_id(compiled.bot, &[]).map(|b| g.offsets[compiled.bot] + b);
        let mut target_vars = vec![bot_var];
        let mut target_atoms = vec![Atom::bot()];
        for v in 0..g.atoms {
            let pred = &g.store.preds[g.pred_of(v)];
            if !pred.is_builtin() && keep(pred) {
                target_vars.push(Some(v as u32));
                target_atoms.push(g.atom(v));
            }
        }
        if target_vars.len() > MAX_BITS {
            return None;
        }
        let targets = target_vars.len();
        let CompactGrounding { atoms, clauses, .. } = g;
        let mut target_of = vec![None; atoms];
        for (t, v) in target_vars.iter().enumerate() {
            if let Some(v) = v {
                target_of[*v as usize] = Some(t);
            }
        }
        let mut head_only: Vec<bool> = input_bit.iter().map(|b| b.is_none()).collect();
        for &l in clauses.iter().flatten() {
            if l & 1 == 1 {
                head_only[(l >> 1) as usize] = false;
            }
        }
        Some(PoolOracle {
            solver: Solver::new(atoms, clauses.iter().cloned()),
            clauses,
            input_index: input_atoms.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect(),
            input_vars,
            always,
            top_bits,
            target_vars,
            target_atoms,
            input_bit,
            target_of,
            head_only,
            supports: vec![Vec::new(); targets],
            refutations: vec![Vec::new(); targets],
            solver_calls: 0,
        })
    }

    /// Number of solver calls so far; the rest were settled by certificates.
    pub fn solver_calls(&self) -> usize {
        self.solver_calls
    }

    /// `eval(P, D)` restricted to the kept predicates and `⊥`; `None` when
    /// `d` has a fact outside the inputs or a constant outside the pool.
    pub fn cautious_eval(&mut self, d: &Dataset) -> Option<EvalResult> {
        let mut set = self.always;
        for f in d.facts() {
            set |= 1 << *self.input_index.get(f)?;
            for c in f.constants() {
                set |= 1 << *self.top_bits.get(c)?;
            }
        }
        let n = self.target_vars.len();
        let mut entailed: Bits = 0;
        let mut refuted: Bits = 0;
        let mut assumptions = None;
        for t in 0..n {
            let bit: Bits = 1 << t;
            if (entailed | refuted) & bit != 0 {
                continue;
            }
            if self.target_vars[t].is_none() {
                // unreachable targets are false everywhere
                refuted |= bit;
                continue;
            }
            match self.recall(t, set) {
                Some(true) => entailed |= bit,
                Some(false) => refuted |= bit,
                None => {
                    let assumptions = assumptions.get_or_insert_with(|| self.assumptions(set)).clone();
                    if t == 0 {
                        match self.solver.implied_under(&assumptions) {
                            None => {
                                self.supports[0].push(set);
                                return Some(EvalResult::unsat());
                            }
                            Some(implied) => {
                                let forced = self.targets_in(&implied) & !entailed;
                                for u in (0..n).filter(|u| forced >> u & 1 == 1) {
                                    self.supports[u].push(set);
                                }
                                entailed |= forced;
                            }
                        }
                        if entailed & 1 == 1 {
                            continue;
                        }
                    }
                    self.settle(set, t, &assumptions, &mut entailed, &mut refuted);
                }
            }
            if entailed & 1 == 1 {
                return Some(EvalResult::unsat());
            }
        }
        let mut facts = BTreeSet::new();
        for i in 1..n {
            if entailed >> i & 1 == 1 {
                facts.insert(self.target_atoms[i].clone());
            }
        }
        Some(EvalResult::consistent(facts))
    }

    /// Looks `t` up among the certificates; a certificate that answers is
    /// moved one step towards the front, so frequent ones are found fast.
    fn recall(&mut self, t: usize, set: Bits) -> Option<bool> {
        let supports = &mut self.supports[t];
        if let Some(k) = supports.iter().position(|&s| s & !set == 0) {
            supports.swap(k, k / 2);
            return Some(true);
        }
        let refutations = &mut self.refutations[t];
        if let Some(k) = refutations.iter().position(|&m| set & !m == 0) {
            refutations.swap(k, k / 2);
            return Some(false);
        }
        None
    }

    /// Decides target `t` for input set `set` with the solver, recording
    /// certificates for it and for any other target the countermodel refutes.
    fn settle(&mut self, set: Bits, t: usize, assumptions: &[Lit], entailed: &mut Bits, refuted: &mut Bits) {
        let v = self.target_vars[t].expect("reachable target");
        let mut with_goal = assumptions.to_vec();
        with_goal.push(neg(v));
        self.solver_calls += 1;
        match self.solver.solve(&with_goal) {
            None => {
                self.supports[t].push(set);
                *entailed |= 1 << t;
            }
            Some(model) => {
                for (free, targets) in self.refutation(&model) {
                    let fresh = targets & !*refuted;
                    for u in (0..self.target_vars.len()).filter(|u| fresh >> u & 1 == 1) {
                        self.refutations[u].push(free);
                    }
                    *refuted |= targets;
                }
            }
        }
    }

    fn assumptions(&self, set: Bits) -> Vec<Lit> {
        self.input_vars
            .iter()
            .enumerate()
            .filter(|&(i, _)| set >> i & 1 == 1)
            .map(|(_, &v)| pos(v))
            .collect()
    }

    fn targets_in(&self, values: &[bool]) -> Bits {
        let mut t = 0;
        for (i, v) in self.target_vars.iter().enumerate() {
            if v.is_some_and(|v| values[v as usize]) {
                t |= 1 << i;
            }
        }
        t
    }

    /// Countermodel certificates from `model`. Input atoms true in `model`
    /// are covered already. A false one can be switched on when every clause
    /// it occurs in stays satisfied, either by a literal that switching
    /// inputs on cannot falsify or by switching on a head-only atom (one that
    /// never occurs in a body, so making it true breaks nothing). Switching
    /// on a head-only target gives up its refutation, hence one input set
    /// per refuted target.
    fn refutation(&self, model: &[bool]) -> Vec<(Bits, Bits)> {
        let n = self.target_vars.len();
        let mut blocked_all: Bits = 0;
        let mut blocked_for: Vec<Bits> = vec![0; n];
        for c in &self.clauses {
            let satisfied = c.iter().any(|&l| {
                let v = (l >> 1) as usize;
                let holds = model[v] != (l & 1 == 1);
                holds && (l & 1 == 0 || self.input_bit[v].is_none())
            });
            if satisfied {
                continue;
            }
            let inputs: Bits = c
                .iter()
                .filter_map(|&l| self.input_bit[(l >> 1) as usize])
                .fold(0, |acc, i| acc | 1 << i);
            let mut rescue = c.iter().filter(|&&l| l & 1 == 0 && self.head_only[(l >> 1) as usize]);
            match (rescue.next(), rescue.next()) {
                (None, _) => blocked_all |= inputs,
                (Some(&h), None) => {
                    if let Some(t) = self.target_of[(h >> 1) as usize] {
                        blocked_for[t] |= inputs;
                    }
                }
                (Some(_), Some(_)) => {}
            }
        }
        let inputs = self.input_vars.len();
        let mask: Bits = if inputs == MAX_BITS { !0 } else { (1 << inputs) - 1 };
        let truth = self.targets_in(model);
        let mut set: Bits = 0;
        for (i, &v) in self.input_vars.iter().enumerate() {
            if model[v as usize] {
                set |= 1 << i;
            }
        }
        let mut certs: Vec<(Bits, Bits)> = Vec::new();
        for (t, &extra) in blocked_for.iter().enumerate() {
            if truth >> t & 1 == 1 || self.target_vars[t].is_none() {
                continue;
            }
            // a target that is itself an input stays off
            let own = self.target_vars[t].and_then(|v| self.input_bit[v as usize]).map_or(0, |i| 1 << i);
            let free = set | (mask & !blocked_all & !extra & !own);
            match certs.iter_mut().find(|(f, _)| *f == free) {
                Some((_, ts)) => *ts |= 1 << t,
                None => certs.push((free, 1 << t)),
            }
        }
        certs
    }
}

fn tuples(q: &Predicate, pool: &[Arc<str>]) -> Vec<Atom> {
    let mut out = Vec::new();
    let mut digits = vec![0usize; q.arity];
    if q.arity > 0 && pool.is_empty() {
        return out;
    }
    loop {
        out.push(Atom::new(q.clone(), digits.iter().map(|&k| Term::Const(pool[k].clone())).collect()));
        let mut k = 0;
        while k < digits.len() {
            digits[k] += 1;
            if digits[k] < pool.len() {
                break;
            }
            digits[k] = 0;
            k += 1;
        }
        if k == digits.len() {
            return out;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::Oracle;
    use crate::text::parse_program;

    /// Every dataset of at most `k` facts over `atoms`, smallest first.
    fn subsets(atoms: &[Atom], k: usize) -> Vec<Dataset> {
        let mut out = vec![Vec::new()];
        let mut frontier: Vec<(usize, Vec<Atom>)> = vec![(0, Vec::new())];
        for _ in 0..k {
            let mut next = Vec::new();
            for (start, d) in &frontier {
                for (i, a) in atoms.iter().enumerate().skip(*start) {
                    let mut e = d.clone();
                    e.push(a.clone());
                    out.push(e.clone());
                    next.push((i + 1, e));
                }
            }
            frontier = next;
        }
        out.into_iter().map(|d| Dataset::new(d).unwrap()).collect()
    }

    fn agree(program: &str, inputs: &[(&str, usize)], kept: &[(&str, usize)], k: usize) {
        let p = parse_program(program).unwrap();
        let pool: Vec<Arc<str>> = ["a", "b"].iter().map(|c| Arc::from(*c)).collect();
        let inputs: BTreeSet<Predicate> = inputs.iter().map(|&(q, n)| Predicate::user(q, n)).collect();
        let kept: BTreeSet<Predicate> = kept.iter().map(|&(q, n)| Predicate::user(q, n)).collect();
        let mut pooled = PoolOracle::new(&p, &pool, &inputs, |q| kept.contains(q), &OracleConfig::default()).unwrap();
        let plain = Oracle::new(&p);
        let atoms: Vec<Atom> = inputs.iter().flat_map(|q| tuples(q, &pool)).collect();
        let mut ds = subsets(&atoms, k);
        // certificates must not depend on the order datasets arrive in
        let reversed: Vec<Dataset> = ds.iter().rev().cloned().collect();
        ds.extend(reversed);
        for d in ds {
            let want = plain.cautious_eval_where(&d, |q| kept.contains(q)).unwrap();
            assert_eq!(pooled.cautious_eval(&d).unwrap(), want, "{program} on {d:?}");
        }
        assert!(pooled.solver_calls() > 0);
    }

    #[test]
    fn agrees_with_the_oracle_on_p1() {
        let p1 = "b(X) | g(X) :- v(X).\nb(X) :- g(Y), e(X,Y).\ng(X) :- b(Y), e(X,Y).";
        agree(p1, &[("v", 1), ("e", 2)], &[("v", 1), ("e", 2), ("b", 1), ("g", 1)], 4);
    }

    #[test]
    fn agrees_with_the_oracle_when_inputs_occur_in_heads() {
        let p1 = "b(X) | g(X) :- v(X).\nb(X) :- g(Y), e(X,Y).\ng(X) :- b(Y), e(X,Y).";
        let all = [("v", 1), ("e", 2), ("b", 1), ("g", 1)];
        agree(p1, &all, &all, 4);
        let p = "a(X) | b(X) :- v(X).\nbot :- a(X), b(X).\nv(X) :- a(X).\nc(X) :- b(X), w(X).";
        let all = [("v", 1), ("a", 1), ("b", 1), ("c", 1), ("w", 1)];
        agree(p, &all, &all[1..], 4);
    }

    #[test]
    fn agrees_with_the_oracle_with_bot_and_choice() {
        let p = "a(X) | b(X) :- v(X).\nbot :- a(X), w(X).\nc(X) :- b(X).\nc(X) | d(Y) :- a(X), r(X,Y).";
        agree(p, &[("v", 1), ("w", 1), ("r", 2)], &[("c", 1), ("d", 1)], 4);
    }

    #[test]
    fn agrees_with_the_oracle_on_datalog() {
        let p = "t(X,Y) :- e(X,Y).\nt(X,Z) :- t(X,Y), e(Y,Z).\nbot :- t(X,X), s(X).";
        agree(p, &[("e", 2), ("s", 1)], &[("t", 2)], 5);
    }

    #[test]
    fn unsupported_shapes_are_declined() {
        let pool: Vec<Arc<str>> = vec![Arc::from("a")];
        let inputs: BTreeSet<Predicate> = [Predicate::user("e", 1)].into_iter().collect();
        let cfg = OracleConfig::default();
        let equality = parse_program("X = Y :- e(X), e(Y).").unwrap();
        assert!(PoolOracle::new(&equality, &pool, &inputs, |_| true, &cfg).is_none());
        let ok = parse_program("f(X) :- e(X).").unwrap();
        let mut pooled = PoolOracle::new(&ok, &pool, &inputs, |_| true, &cfg).unwrap();
        let outside = Dataset::new([Atom::fact(Predicate::user("e", 1), &["z"])]).unwrap();
        assert!(pooled.cautious_eval(&outside).is_none());
    }
}
