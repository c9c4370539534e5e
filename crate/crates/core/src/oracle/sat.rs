//! A small complete DPLL: two watched literals, unit propagation,
//! chronological backtracking, no learning. Decisions try `false` first so
//! models found tend to be small.

pub(crate) type Lit = u32;

pub(crate) fn pos(v: u32) -> Lit {
    v << 1
}

pub(crate) fn neg(v: u32) -> Lit {
    (v << 1) | 1
}

#[derive(Clone, Debug)]
pub(crate) struct Solver {
    n: usize,
    clauses: Vec<Vec<Lit>>,
    units: Vec<Lit>,
    has_empty: bool,
    watches: Vec<Vec<u32>>,
    value: Vec<i8>,
    trail: Vec<Lit>,
    qhead: usize,
}

impl Solver {
    pub(crate) fn new(n: usize, clauses: impl IntoIterator<Item = Vec<Lit>>) -> Self {
        let mut s = Solver {
            n,
            clauses: Vec::new(),
            units: Vec::new(),
            has_empty: false,
            watches: vec![Vec::new(); 2 * n],
            value: vec![0; n],
            trail: Vec::new(),
            qhead: 0,
        };
        for mut c in clauses {
            c.sort_unstable();
            c.dedup();
            if c.windows(2).any(|w| w[0] ^ 1 == w[1]) {
                continue; // tautology
            }
            match c.len() {
                0 => s.has_empty = true,
                1 => s.units.push(c[0]),
                _ => {
                    let i = s.clauses.len() as u32;
                    s.watches[c[0] as usize].push(i);
                    s.watches[c[1] as usize].push(i);
                    s.clauses.push(c);
                }
            }
        }
        s
    }

    fn lit_value(&self, l: Lit) -> i8 {
        let v = self.value[(l >> 1) as usize];
        if l & 1 == 1 {
            -v
        } else {
            v
        }
    }

    fn assign(&mut self, l: Lit) -> bool {
        match self.lit_value(l) {
            1 => true,
            -1 => false,
            _ => {
                self.value[(l >> 1) as usize] = if l & 1 == 1 { -1 } else { 1 };
                self.trail.push(l);
                true
            }
        }
    }

    fn propagate(&mut self) -> bool {
        while self.qhead < self.trail.len() {
            let falsified = self.trail[self.qhead] ^ 1;
            self.qhead += 1;
            let mut ws = std::mem::take(&mut self.watches[falsified as usize]);
            let (mut i, mut j) = (0, 0);
            let mut ok = true;
            while i < ws.len() {
                let ci = ws[i] as usize;
                i += 1;
                if self.clauses[ci][0] == falsified {
                    self.clauses[ci].swap(0, 1);
                }
                let first = self.clauses[ci][0];
                if self.lit_value(first) == 1 {
                    ws[j] = ci as u32;
                    j += 1;
                    continue;
                }
                let replacement = (2..self.clauses[ci].len()).find(|&k| self.lit_value(self.clauses[ci][k]) != -1);
                if let Some(k) = replacement {
                    self.clauses[ci].swap(1, k);
                    let w = self.clauses[ci][1];
                    self.watches[w as usize].push(ci as u32);
                    continue;
                }
                ws[j] = ci as u32;
                j += 1;
                if !self.assign(first) {
                    while i < ws.len() {
                        ws[j] = ws[i];
                        i += 1;
                        j += 1;
                    }
                    ok = false;
                }
            }
            ws.truncate(j);
            self.watches[falsified as usize] = ws;
            if !ok {
                return false;
            }
        }
        true
    }

    fn reset(&mut self) {
        self.value.iter_mut().for_each(|v| *v = 0);
        self.trail.clear();
        self.qhead = 0;
    }

    fn undo(&mut self, len: usize) {
        for l in self.trail.drain(len..) {
            self.value[(l >> 1) as usize] = 0;
        }
        self.qhead = len;
    }

    fn model(&self) -> Vec<bool> {
        self.value.iter().map(|&v| v == 1).collect()
    }

    /// Assignment forced by unit propagation alone; `None` on conflict.
    pub(crate) fn implied(&mut self) -> Option<Vec<bool>> {
        self.implied_under(&[])
    }

    /// As [`Solver::implied`], with the `assumptions` added as units.
    pub(crate) fn implied_under(&mut self, assumptions: &[Lit]) -> Option<Vec<bool>> {
        self.reset();
        if self.has_empty {
            return None;
        }
        for k in 0..self.units.len() {
            if !self.assign(self.units[k]) {
                return None;
            }
        }
        for &a in assumptions {
            if !self.assign(a) {
                return None;
            }
        }
        self.propagate().then(|| self.model())
    }

    /// A model in which every assumption holds, if one exists.
    pub(crate) fn solve(&mut self, assumptions: &[Lit]) -> Option<Vec<bool>> {
        self.reset();
        if self.has_empty {
            return None;
        }
        for k in 0..self.units.len() {
            if !self.assign(self.units[k]) {
                return None;
            }
        }
        for &a in assumptions {
            if !self.assign(a) {
                return None;
            }
        }
        if !self.propagate() {
            return None;
        }
        // (trail length before the decision, decision literal, already flipped)
        let mut decisions: Vec<(usize, Lit, bool)> = Vec::new();
        let mut next = 0;
        loop {
            while next < self.n && self.value[next] != 0 {
                next += 1;
            }
            if next == self.n {
                return Some(self.model());
            }
            let l = neg(next as u32);
            decisions.push((self.trail.len(), l, false));
            self.assign(l);
            while !self.propagate() {
                loop {
                    let (len, l, flipped) = decisions.pop()?;
                    self.undo(len);
                    if !flipped {
                        decisions.push((len, l ^ 1, true));
                        self.assign(l ^ 1);
                        break;
                    }
                }
                next = 0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(n: usize, clauses: &[Vec<Lit>], assumptions: &[Lit]) -> bool {
        (0..1u32 << n).any(|m| {
            let holds = |l: Lit| ((m >> (l >> 1)) & 1 == 1) != (l & 1 == 1);
            clauses.iter().all(|c| c.iter().any(|&l| holds(l))) && assumptions.iter().all(|&l| holds(l))
        })
    }

    #[test]
    fn pigeonhole_3_2_is_unsat() {
        // p_ij: pigeon i in hole j, var 2i + j
        let v = |i: u32, j: u32| 2 * i + j;
        let mut cs = Vec::new();
        for i in 0..3 {
            cs.push(vec![pos(v(i, 0)), pos(v(i, 1))]);
        }
        for j in 0..2 {
            for a in 0..3 {
                for b in a + 1..3 {
                    cs.push(vec![neg(v(a, j)), neg(v(b, j))]);
                }
            }
        }
        let mut s = Solver::new(6, cs);
        assert!(s.solve(&[]).is_none());
    }

    #[test]
    fn models_satisfy_clauses() {
        let cs = vec![vec![pos(0), pos(1)], vec![neg(0), pos(2)], vec![neg(1), pos(2)], vec![neg(2), neg(3)]];
        let mut s = Solver::new(4, cs.clone());
        let m = s.solve(&[]).unwrap();
        assert!(cs.iter().all(|c| c.iter().any(|&l| m[(l >> 1) as usize] != (l & 1 == 1))));
        assert!(s.solve(&[pos(3)]).is_none());
        assert!(s.solve(&[neg(0)]).is_some());
        assert!(!brute(4, &cs, &[pos(3)]));
    }

    #[test]
    fn agrees_with_brute_force() {
        let mut seed = 0x2545f491u32;
        let mut rnd = |k: u32| {
            seed ^= seed << 13;
            seed ^= seed >> 17;
            seed ^= seed << 5;
            seed % k
        };
        for _ in 0..400 {
            let n = 1 + rnd(6) as usize;
            let cs: Vec<Vec<Lit>> = (0..rnd(12))
                .map(|_| (0..1 + rnd(3)).map(|_| rnd(2 * n as u32)).collect())
                .collect();
            let assumptions: Vec<Lit> = (0..rnd(2)).map(|_| rnd(2 * n as u32)).collect();
            let mut s = Solver::new(n, cs.clone());
            assert_eq!(s.solve(&assumptions).is_some(), brute(n, &cs, &assumptions), "{cs:?} {assumptions:?}");
        }
    }
}
