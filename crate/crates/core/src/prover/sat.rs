//! A small DPLL solver with two-watched-literal propagation, used by the
//! finite model search.

/// Literal encoding: `2 * var` is the positive literal, `2 * var + 1` the negative one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Lit(u32);

impl Lit {
    pub fn pos(var: usize) -> Lit {
        Lit((var as u32) << 1)
    }

    pub fn neg(var: usize) -> Lit {
        Lit(((var as u32) << 1) | 1)
    }

    pub fn new(var: usize, positive: bool) -> Lit {
        if positive {
            Lit::pos(var)
        } else {
            Lit::neg(var)
        }
    }

    pub fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    fn negate(self) -> Lit {
        Lit(self.0 ^ 1)
    }

    fn index(self) -> usize {
        self.0 as usize
    }
}

const UNASSIGNED: i8 = -1;

#[derive(Debug)]
pub struct Solver {
    num_vars: usize,
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<usize>>,
    values: Vec<i8>,
    trail: Vec<Lit>,
    /// (trail length at decision, decision literal, already flipped)
    levels: Vec<(usize, Lit, bool)>,
    units: Vec<Lit>,
    trivially_unsat: bool,
    decisions: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveResult {
    Sat,
    Unsat,
    /// Decision budget exhausted.
    Unknown,
}

impl Solver {
    pub fn new(num_vars: usize) -> Self {
        Solver {
            num_vars,
            clauses: Vec::new(),
            watches: vec![Vec::new(); num_vars * 2],
            values: vec![UNASSIGNED; num_vars],
            trail: Vec::new(),
            levels: Vec::new(),
            units: Vec::new(),
            trivially_unsat: false,
            decisions: 0,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len() + self.units.len()
    }

    pub fn decisions(&self) -> u64 {
        self.decisions
    }

    pub fn add_clause(&mut self, lits: &[Lit]) {
        let mut c: Vec<Lit> = Vec::with_capacity(lits.len());
        for &l in lits {
            debug_assert!(l.var() < self.num_vars);
            if c.contains(&l.negate()) {
                return; // tautology
            }
            if !c.contains(&l) {
                c.push(l);
            }
        }
        match c.len() {
            0 => self.trivially_unsat = true,
            1 => self.units.push(c[0]),
            _ => {
                let idx = self.clauses.len();
                self.watches[c[0].negate().index()].push(idx);
                self.watches[c[1].negate().index()].push(idx);
                self.clauses.push(c);
            }
        }
    }

    fn value(&self, l: Lit) -> i8 {
        match self.values[l.var()] {
            UNASSIGNED => UNASSIGNED,
            v => (v == 1) as i8 ^ (!l.is_positive()) as i8,
        }
    }

    fn assign(&mut self, l: Lit) {
        self.values[l.var()] = l.is_positive() as i8;
        self.trail.push(l);
    }

    /// Propagates from trail position `head`. Returns false on conflict.
    fn propagate(&mut self, mut head: usize) -> bool {
        while head < self.trail.len() {
            let falsified = self.trail[head].negate();
            head += 1;
            // clauses watching a literal that just became false
            let mut watch_list = std::mem::take(&mut self.watches[falsified.negate().index()]);
            let mut i = 0;
            let mut conflict = false;
            while i < watch_list.len() {
                let ci = watch_list[i];
                let clause = &mut self.clauses[ci];
                if clause[0] == falsified {
                    clause.swap(0, 1);
                }
                // clause[1] is the falsified watch
                let first = clause[0];
                let first_val = match self.values[first.var()] {
                    UNASSIGNED => UNASSIGNED,
                    v => (v == 1) as i8 ^ (!first.is_positive()) as i8,
                };
                if first_val == 1 {
                    i += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..clause.len() {
                    let l = clause[k];
                    let v = match self.values[l.var()] {
                        UNASSIGNED => UNASSIGNED,
                        v => (v == 1) as i8 ^ (!l.is_positive()) as i8,
                    };
                    if v != 0 {
                        clause.swap(1, k);
                        self.watches[clause[1].negate().index()].push(ci);
                        watch_list.swap_remove(i);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                if first_val == 0 {
                    conflict = true;
                    break;
                }
                self.values[first.var()] = first.is_positive() as i8;
                self.trail.push(first);
                i += 1;
            }
            let slot = &mut self.watches[falsified.negate().index()];
            watch_list.append(slot);
            *slot = watch_list;
            if conflict {
                return false;
            }
        }
        true
    }

    fn backtrack_to(&mut self, trail_len: usize) {
        for l in self.trail.drain(trail_len..) {
            self.values[l.var()] = UNASSIGNED;
        }
    }

    /// Solves with at most `max_decisions` decisions.
    pub fn solve(&mut self, max_decisions: u64) -> SolveResult {
        if self.trivially_unsat {
            return SolveResult::Unsat;
        }
        for i in 0..self.units.len() {
            let u = self.units[i];
            match self.value(u) {
                0 => return SolveResult::Unsat,
                1 => {}
                _ => self.assign(u),
            }
        }
        if !self.propagate(0) {
            return SolveResult::Unsat;
        }
        let mut next_var = 0;
        loop {
            while next_var < self.num_vars && self.values[next_var] != UNASSIGNED {
                next_var += 1;
            }
            if next_var == self.num_vars {
                return SolveResult::Sat;
            }
            if self.decisions >= max_decisions {
                return SolveResult::Unknown;
            }
            self.decisions += 1;
            let decision = Lit::neg(next_var);
            self.levels.push((self.trail.len(), decision, false));
            let head = self.trail.len();
            self.assign(decision);
            let mut ok = self.propagate(head);
            while !ok {
                // chronological backtracking to the deepest unflipped decision
                loop {
                    match self.levels.pop() {
                        None => return SolveResult::Unsat,
                        Some((start, lit, flipped)) => {
                            self.backtrack_to(start);
                            if !flipped {
                                self.levels.push((start, lit.negate(), true));
                                self.assign(lit.negate());
                                ok = self.propagate(start);
                                next_var = next_var.min(lit.var());
                                break;
                            }
                        }
                    }
                }
            }
            next_var = self.levels.last().map_or(0, |l| l.1.var()).min(next_var);
        }
    }

    /// Value of a variable after a `Sat` result.
    pub fn model_value(&self, var: usize) -> bool {
        self.values[var] == 1
    }
}
