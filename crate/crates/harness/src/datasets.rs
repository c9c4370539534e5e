//! Exhaustive dataset enumeration.
//!
//! Datasets are subsets of the ground atoms over a signature and a fixed
//! pool of constants, listed by size and then lexicographically by atom
//! index. [`CanonicalDatasets`] additionally skips every dataset that is not
//! the least member of its orbit under permutations of the pool, reporting
//! how many datasets each survivor stands for; this is sound whenever the
//! programs under test are invariant under those permutations (for example
//! when they mention none of the pool's constants).

use std::collections::BTreeSet;

use wlrw_core::{Atom, Dataset, Predicate, Term};

/// The `i`-th pool constant: `a`, `b`, ..., `z`, then `k26`, `k27`, ...
pub fn constant_name(i: usize) -> String {
    if i < 26 {
        ((b'a' + i as u8) as char).to_string()
    } else {
        format!("k{i}")
    }
}

fn ground_atoms(preds: &BTreeSet<Predicate>, constants: usize) -> Vec<(Predicate, Vec<usize>)> {
    let mut out = Vec::new();
    for p in preds.iter().filter(|p| !p.is_top() && !p.is_bot()) {
        let total = constants.pow(p.arity as u32);
        for mut k in 0..total {
            let mut args = vec![0; p.arity];
            for slot in args.iter_mut().rev() {
                *slot = k % constants;
                k /= constants;
            }
            out.push((p.clone(), args));
        }
    }
    out
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Lexicographic enumeration of the `k`-subsets of `0..n`, for growing `k`.
#[derive(Clone, Debug)]
struct Subsets {
    n: usize,
    max: usize,
    cur: Option<Vec<usize>>,
}

impl Subsets {
    fn new(n: usize, max: usize) -> Self {
        Subsets {
            n,
            max: max.min(n),
            cur: Some(Vec::new()),
        }
    }
}

impl Iterator for Subsets {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.cur.take()?;
        let k = out.len();
        let mut next = out.clone();
        // rightmost position that can still move
        let pos = (0..k).rev().find(|&i| next[i] < self.n - k + i);
        self.cur = match pos {
            Some(i) => {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                Some(next)
            }
            None if k < self.max => Some((0..=k).collect()),
            None => None,
        };
        Some(out)
    }
}

/// Every dataset over `preds` with at most `max_facts` facts over the first
/// `max_constants` pool constants. `⊤`, `⊥` are never used; `≈` is treated
/// like any other binary predicate when present.
#[derive(Clone, Debug)]
pub struct Datasets {
    atoms: Vec<Atom>,
    subsets: Subsets,
}

impl Datasets {
    pub fn new(preds: &BTreeSet<Predicate>, max_facts: usize, max_constants: usize) -> Self {
        let names: Vec<String> = (0..max_constants).map(constant_name).collect();
        let atoms = ground_atoms(preds, max_constants)
            .into_iter()
            .map(|(p, args)| Atom::new(p, args.iter().map(|&c| Term::constant(&names[c])).collect()))
            .collect::<Vec<_>>();
        let subsets = Subsets::new(atoms.len(), max_facts);
        Datasets { atoms, subsets }
    }

    /// How many datasets the enumeration yields.
    pub fn declared(&self) -> u128 {
        (0..=self.subsets.max).map(|k| binomial(self.subsets.n, k)).sum()
    }

    fn build(&self, idx: &[usize]) -> Dataset {
        Dataset::new(idx.iter().map(|&i| self.atoms[i].clone())).expect("ground user facts")
    }
}

impl Iterator for Datasets {
    type Item = Dataset;

    fn next(&mut self) -> Option<Dataset> {
        let idx = self.subsets.next()?;
        Some(self.build(&idx))
    }
}

/// `enumerate_datasets(sig, max facts, max constants)`.
pub fn enumerate_datasets(preds: &BTreeSet<Predicate>, max_facts: usize, max_constants: usize) -> Datasets {
    Datasets::new(preds, max_facts, max_constants)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Orbit representatives of [`Datasets`] under permutations of the pool
/// constants that leave every constant in `fixed` in place.
#[derive(Clone, Debug)]
pub struct CanonicalDatasets {
    inner: Datasets,
    /// Each permutation as a map on atom indices.
    perms: Vec<Vec<usize>>,
}

impl CanonicalDatasets {
    pub fn new(preds: &BTreeSet<Predicate>, max_facts: usize, max_constants: usize, fixed: &BTreeSet<String>) -> Self {
        let inner = Datasets::new(preds, max_facts, max_constants);
        let shapes = ground_atoms(preds, max_constants);
        let position = |p: &Predicate, args: &[usize]| {
            shapes
                .iter()
                .position(|(q, a)| q == p && a == args)
                .expect("closed under permutation")
        };
        let pinned: Vec<bool> = (0..max_constants).map(|i| fixed.contains(&constant_name(i))).collect();
        let perms = permutations(max_constants)
            .into_iter()
            .filter(|pi| pi.iter().enumerate().all(|(i, &j)| !pinned[i] || i == j))
            .map(|pi| {
                shapes
                    .iter()
                    .map(|(p, args)| position(p, &args.iter().map(|&c| pi[c]).collect::<Vec<_>>()))
                    .collect()
            })
            .collect();
        CanonicalDatasets { inner, perms }
    }

    /// Total number of datasets represented, i.e. [`Datasets::declared`].
    pub fn declared(&self) -> u128 {
        self.inner.declared()
    }

    /// `Some(orbit size)` when `idx` is the least member of its orbit.
    fn orbit(&self, idx: &[usize]) -> Option<usize> {
        let mut images = BTreeSet::new();
        let mut img = Vec::with_capacity(idx.len());
        for pi in &self.perms {
            img.clear();
            img.extend(idx.iter().map(|&i| pi[i]));
            img.sort_unstable();
            if img.as_slice() < idx {
                return None;
            }
            images.insert(img.clone());
        }
        Some(images.len())
    }
}

impl Iterator for CanonicalDatasets {
    /// A representative and the size of its orbit.
    type Item = (Dataset, usize);

    fn next(&mut self) -> Option<(Dataset, usize)> {
        loop {
            let idx = self.inner.subsets.next()?;
            if let Some(n) = self.orbit(&idx) {
                return Some((self.inner.build(&idx), n));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(ps: &[(&str, usize)]) -> BTreeSet<Predicate> {
        ps.iter().map(|(n, a)| Predicate::user(n, *a)).collect()
    }

    #[test]
    fn documented_counts() {
        let one = enumerate_datasets(&sig(&[("a", 1)]), 1, 1).collect::<Vec<_>>();
        assert_eq!(one.len(), 2);
        assert!(one[0].is_empty());
        assert_eq!(enumerate_datasets(&sig(&[("a", 1), ("b", 1)]), 2, 1).count(), 4);
        assert_eq!(enumerate_datasets(&sig(&[("e", 2)]), 4, 2).count(), 16);
    }

    #[test]
    fn declared_count_matches() {
        for (ps, facts, consts) in [
            (vec![("a", 1), ("e", 2)], 3, 2),
            (vec![("e", 2)], 6, 3),
            (vec![("a", 1), ("b", 1), ("c", 2)], 4, 3),
        ] {
            let s = sig(&ps);
            let it = enumerate_datasets(&s, facts, consts);
            let declared = it.declared();
            let all: Vec<Dataset> = it.collect();
            assert_eq!(all.len() as u128, declared);
            let distinct: BTreeSet<String> = all.iter().map(|d| d.to_string()).collect();
            assert_eq!(distinct.len(), all.len());
            assert!(all.iter().all(|d| d.len() <= facts));
        }
    }

    #[test]
    fn orbits_partition_the_datasets() {
        for fixed in [BTreeSet::new(), ["a".to_string()].into_iter().collect()] {
            let s = sig(&[("a", 1), ("e", 2)]);
            let canon = CanonicalDatasets::new(&s, 4, 3, &fixed);
            let declared = canon.declared();
            let reps: Vec<(Dataset, usize)> = canon.collect();
            assert_eq!(reps.iter().map(|(_, n)| *n as u128).sum::<u128>(), declared);
            assert!((reps.len() as u128) < declared);
        }
    }

}
