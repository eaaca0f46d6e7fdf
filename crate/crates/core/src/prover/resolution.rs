//! Saturation by binary resolution and factoring (given-clause loop with unit
//! preference and subsumption deletion).

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use crate::fol::{Clause, Literal, Signature, Term, Var};

// ---------------------------------------------------------------------------
// Substitutions and unification

#[derive(Clone, Debug, Default)]
pub struct Subst {
    bindings: Vec<Option<Term>>,
}

impl Subst {
    fn get(&self, v: Var) -> Option<&Term> {
        self.bindings.get(v as usize).and_then(|b| b.as_ref())
    }

    fn bind(&mut self, v: Var, t: Term) {
        let i = v as usize;
        if self.bindings.len() <= i {
            self.bindings.resize(i + 1, None);
        }
        self.bindings[i] = Some(t);
    }

    fn walk<'a>(&'a self, mut t: &'a Term) -> &'a Term {
        while let Term::Var(v) = t {
            match self.get(*v) {
                Some(next) => t = next,
                None => break,
            }
        }
        t
    }

    pub fn apply(&self, t: &Term) -> Term {
        match self.walk(t) {
            Term::Var(v) => Term::Var(*v),
            Term::App(f, args) => Term::App(*f, args.iter().map(|a| self.apply(a)).collect()),
        }
    }

    fn occurs(&self, v: Var, t: &Term) -> bool {
        match self.walk(t) {
            Term::Var(w) => *w == v,
            Term::App(_, args) => args.iter().any(|a| self.occurs(v, a)),
        }
    }

    fn unify(&mut self, a: &Term, b: &Term) -> bool {
        let (a, b) = (self.walk(a).clone(), self.walk(b).clone());
        match (&a, &b) {
            (Term::Var(x), Term::Var(y)) if x == y => true,
            (Term::Var(x), t) | (t, Term::Var(x)) => {
                if self.occurs(*x, t) {
                    false
                } else {
                    self.bind(*x, t.clone());
                    true
                }
            }
            (Term::App(f, fa), Term::App(g, ga)) => {
                f == g && fa.len() == ga.len() && fa.iter().zip(ga).all(|(x, y)| self.unify(x, y))
            }
        }
    }

    fn unify_args(&mut self, a: &[Term], b: &[Term]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| self.unify(x, y))
    }
}

fn shift_term(t: &Term, offset: Var) -> Term {
    match t {
        Term::Var(v) => Term::Var(v + offset),
        Term::App(f, args) => Term::App(*f, args.iter().map(|a| shift_term(a, offset)).collect()),
    }
}

fn apply_literal(s: &Subst, l: &Literal) -> Literal {
    Literal { positive: l.positive, pred: l.pred, args: l.args.iter().map(|a| s.apply(a)).collect() }
}

fn var_bound(c: &Clause) -> Var {
    c.vars().iter().map(|v| v + 1).max().unwrap_or(0)
}

/// Binary resolvent of `a` and `b` upon `a.literals[i]` and `b.literals[j]`.
pub fn resolve(a: &Clause, i: usize, b: &Clause, j: usize) -> Option<Clause> {
    let la = a.literals.get(i)?;
    let lb = b.literals.get(j)?;
    if la.positive == lb.positive || la.pred != lb.pred {
        return None;
    }
    let offset = var_bound(a);
    let shifted: Vec<Literal> = b
        .literals
        .iter()
        .map(|l| Literal {
            positive: l.positive,
            pred: l.pred,
            args: l.args.iter().map(|t| shift_term(t, offset)).collect(),
        })
        .collect();
    let mut s = Subst::default();
    if !s.unify_args(&la.args, &shifted[j].args) {
        return None;
    }
    let lits = a
        .literals
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != i)
        .map(|(_, l)| apply_literal(&s, l))
        .chain(
            shifted
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != j)
                .map(|(_, l)| apply_literal(&s, l)),
        )
        .collect();
    Some(Clause::new(lits))
}

/// Factor of `c` obtained by unifying literals `i` and `j`.
pub fn factor(c: &Clause, i: usize, j: usize) -> Option<Clause> {
    let (li, lj) = (c.literals.get(i)?, c.literals.get(j)?);
    if i == j || li.positive != lj.positive || li.pred != lj.pred {
        return None;
    }
    let mut s = Subst::default();
    if !s.unify_args(&li.args, &lj.args) {
        return None;
    }
    let lits = c
        .literals
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != j)
        .map(|(_, l)| apply_literal(&s, l))
        .collect();
    Some(Clause::new(lits))
}

// ---------------------------------------------------------------------------
// Subsumption

/// One-way matching: extends `s` so that `pattern·s == target`, binding only
/// pattern variables.
fn match_term(s: &mut Vec<Option<Term>>, pattern: &Term, target: &Term) -> bool {
    match pattern {
        Term::Var(v) => {
            let i = *v as usize;
            if s.len() <= i {
                s.resize(i + 1, None);
            }
            match &s[i] {
                Some(t) => t == target,
                None => {
                    s[i] = Some(target.clone());
                    true
                }
            }
        }
        Term::App(f, args) => match target {
            Term::App(g, targs) if f == g && args.len() == targs.len() => {
                args.iter().zip(targs).all(|(p, t)| match_term(s, p, t))
            }
            _ => false,
        },
    }
}

/// Whether `c` subsumes `d`: some substitution maps every literal of `c` onto
/// a literal of `d`.
pub fn subsumes(c: &Clause, d: &Clause) -> bool {
    if c.len() > d.len() {
        return false;
    }
    fn go(c: &[Literal], d: &Clause, s: &mut Vec<Option<Term>>) -> bool {
        let Some((first, rest)) = c.split_first() else {
            return true;
        };
        for target in &d.literals {
            if target.positive != first.positive || target.pred != first.pred {
                continue;
            }
            let saved = s.clone();
            if first.args.iter().zip(&target.args).all(|(p, t)| match_term(s, p, t)) && go(rest, d, s) {
                return true;
            }
            *s = saved;
        }
        false
    }
    go(&c.literals, d, &mut Vec::new())
}

// ---------------------------------------------------------------------------
// Derivations

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Inference {
    Input(usize),
    Resolve { left: usize, left_lit: usize, right: usize, right_lit: usize },
    Factor { parent: usize, first: usize, second: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofStep {
    pub clause: Clause,
    pub inference: Inference,
}

/// A resolution derivation of the empty clause. Parent indices refer to earlier
/// steps; `Input(k)` refers to the k-th input clause.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Refutation {
    pub steps: Vec<ProofStep>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ProofError {
    #[error("step {0} does not derive the empty clause")]
    NotEmpty(usize),
    #[error("step {0} refers to a later or missing step")]
    BadReference(usize),
    #[error("step {0} does not follow from its premises")]
    Unjustified(usize),
}

impl Refutation {
    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    /// Replays every inference against the input clauses.
    pub fn check(&self, inputs: &[Clause]) -> Result<(), ProofError> {
        for (k, step) in self.steps.iter().enumerate() {
            let parent = |i: usize| -> Result<&Clause, ProofError> {
                if i >= k {
                    return Err(ProofError::BadReference(k));
                }
                Ok(&self.steps[i].clause)
            };
            let derived = match &step.inference {
                Inference::Input(i) => inputs.get(*i).cloned().map(|c| Clause::new(c.literals)),
                Inference::Resolve { left, left_lit, right, right_lit } => {
                    resolve(parent(*left)?, *left_lit, parent(*right)?, *right_lit)
                }
                Inference::Factor { parent: p, first, second } => factor(parent(*p)?, *first, *second),
            };
            if derived.as_ref() != Some(&step.clause) {
                return Err(ProofError::Unjustified(k));
            }
        }
        match self.steps.last() {
            Some(s) if s.clause.is_empty() => Ok(()),
            _ => Err(ProofError::NotEmpty(self.steps.len().saturating_sub(1))),
        }
    }

    pub fn display(&self, sig: &Signature) -> String {
        let mut out = String::new();
        for (k, s) in self.steps.iter().enumerate() {
            let why = match &s.inference {
                Inference::Input(i) => format!("input {i}"),
                Inference::Resolve { left, left_lit, right, right_lit } => {
                    format!("resolve {left}.{left_lit} {right}.{right_lit}")
                }
                Inference::Factor { parent, first, second } => format!("factor {parent}.{first}.{second}"),
            };
            out.push_str(&format!("{k:>4}  {}  [{why}]\n", sig.display_clause(&s.clause)));
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Given-clause loop

#[derive(Debug)]
pub enum SaturationResult {
    Refuted(Refutation),
    /// No new clauses can be derived; the set is satisfiable.
    Saturated { generated: usize },
    /// Inference budget exhausted.
    Exhausted { generated: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum State {
    Passive,
    Active,
    Dead,
}

struct Stored {
    clause: Clause,
    inference: Inference,
    state: State,
}

/// Every `AGE_EVERY`-th selection takes the oldest passive clause (fairness).
const AGE_EVERY: usize = 5;
/// Resolvents whose terms nest deeper than this are discarded. Skolem terms
/// of the input have depth at most one.
const MAX_TERM_DEPTH: usize = 3;

pub struct Saturation {
    store: Vec<Stored>,
    active: Vec<usize>,
    by_weight: BinaryHeap<Reverse<(usize, usize)>>,
    by_age: BinaryHeap<Reverse<usize>>,
    seen: HashSet<Clause>,
    generated: usize,
    max_steps: usize,
    depth_pruned: bool,
}

fn weight(c: &Clause) -> usize {
    // unit preference: units first, then by symbol count
    if c.len() <= 1 {
        c.size()
    } else {
        100 * c.len() + c.size()
    }
}

fn max_depth(c: &Clause) -> usize {
    c.literals
        .iter()
        .flat_map(|l| l.args.iter())
        .map(Term::depth)
        .max()
        .unwrap_or(0)
}

impl Saturation {
    pub fn new(max_steps: usize) -> Self {
        Saturation {
            store: Vec::new(),
            active: Vec::new(),
            by_weight: BinaryHeap::new(),
            by_age: BinaryHeap::new(),
            seen: HashSet::new(),
            generated: 0,
            max_steps,
            depth_pruned: false,
        }
    }

    fn push(&mut self, clause: Clause, inference: Inference) -> Option<usize> {
        if clause.is_tautology() || !self.seen.insert(clause.clone()) {
            return None;
        }
        if max_depth(&clause) > MAX_TERM_DEPTH {
            self.depth_pruned = true;
            return None;
        }
        if self
            .active
            .iter()
            .any(|&a| subsumes(&self.store[a].clause, &clause))
        {
            return None;
        }
        let id = self.store.len();
        self.by_weight.push(Reverse((weight(&clause), id)));
        self.by_age.push(Reverse(id));
        self.store.push(Stored { clause, inference, state: State::Passive });
        Some(id)
    }

    fn refutation(&self, empty: usize) -> Refutation {
        // collect ancestors, renumber in increasing id order
        let mut needed = vec![false; self.store.len()];
        let mut stack = vec![empty];
        while let Some(i) = stack.pop() {
            if needed[i] {
                continue;
            }
            needed[i] = true;
            match self.store[i].inference {
                Inference::Input(_) => {}
                Inference::Resolve { left, right, .. } => stack.extend([left, right]),
                Inference::Factor { parent, .. } => stack.push(parent),
            }
        }
        let mut renumber = vec![usize::MAX; self.store.len()];
        let mut steps = Vec::new();
        for (i, s) in self.store.iter().enumerate() {
            if !needed[i] {
                continue;
            }
            renumber[i] = steps.len();
            let inference = match s.inference {
                Inference::Input(k) => Inference::Input(k),
                Inference::Resolve { left, left_lit, right, right_lit } => Inference::Resolve {
                    left: renumber[left],
                    left_lit,
                    right: renumber[right],
                    right_lit,
                },
                Inference::Factor { parent, first, second } => {
                    Inference::Factor { parent: renumber[parent], first, second }
                }
            };
            steps.push(ProofStep { clause: s.clause.clone(), inference });
        }
        Refutation { steps }
    }

    fn select(&mut self, round: usize) -> Option<usize> {
        loop {
            let id = if round % AGE_EVERY == AGE_EVERY - 1 {
                self.by_age.pop().map(|Reverse(i)| i)
            } else {
                self.by_weight.pop().map(|Reverse((_, i))| i)
            }
            .or_else(|| self.by_age.pop().map(|Reverse(i)| i))?;
            let s = &mut self.store[id];
            if s.state == State::Passive {
                s.state = State::Dead;
                return Some(id);
            }
        }
    }

    pub fn run(mut self, inputs: &[Clause]) -> SaturationResult {
        for (k, c) in inputs.iter().enumerate() {
            let c = Clause::new(c.literals.clone());
            if let Some(id) = self.push(c, Inference::Input(k)) {
                if self.store[id].clause.is_empty() {
                    return SaturationResult::Refuted(self.refutation(id));
                }
            }
        }
        let mut round = 0;
        while let Some(given) = self.select(round) {
            round += 1;
            let gclause = self.store[given].clause.clone();
            if gclause.is_empty() {
                return SaturationResult::Refuted(self.refutation(given));
            }
            if self.active.iter().any(|&a| subsumes(&self.store[a].clause, &gclause)) {
                continue;
            }
            // backward subsumption
            for &a in &self.active {
                if subsumes(&gclause, &self.store[a].clause) {
                    self.store[a].state = State::Dead;
                }
            }
            self.store[given].state = State::Active;
            self.active.retain(|&a| self.store[a].state == State::Active);
            self.active.push(given);

            let mut new: Vec<(Clause, Inference)> = Vec::new();
            for i in 0..gclause.len() {
                for j in i + 1..gclause.len() {
                    if let Some(f) = factor(&gclause, i, j) {
                        new.push((f, Inference::Factor { parent: given, first: i, second: j }));
                    }
                }
            }
            for &other in &self.active {
                let oclause = &self.store[other].clause;
                for i in 0..gclause.len() {
                    for j in 0..oclause.len() {
                        if let Some(r) = resolve(&gclause, i, oclause, j) {
                            new.push((
                                r,
                                Inference::Resolve { left: given, left_lit: i, right: other, right_lit: j },
                            ));
                        }
                    }
                }
            }
            for (clause, inference) in new {
                self.generated += 1;
                if let Some(id) = self.push(clause, inference) {
                    if self.store[id].clause.is_empty() {
                        return SaturationResult::Refuted(self.refutation(id));
                    }
                }
                if self.generated >= self.max_steps {
                    return SaturationResult::Exhausted { generated: self.generated };
                }
            }
        }
        if self.depth_pruned {
            // pruning forfeits completeness; absence of a refutation proves nothing
            SaturationResult::Exhausted { generated: self.generated }
        } else {
            SaturationResult::Saturated { generated: self.generated }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(positive: bool, pred: u32, args: Vec<Term>) -> Literal {
        Literal { positive, pred, args }
    }

    fn v(i: Var) -> Term {
        Term::Var(i)
    }

    fn c(i: u32) -> Term {
        Term::constant(i)
    }

    #[test]
    fn unit_refutation() {
        // A(c) and -A(x)
        let inputs = vec![
            Clause::new(vec![lit(true, 0, vec![c(0)])]),
            Clause::new(vec![lit(false, 0, vec![v(0)])]),
        ];
        match Saturation::new(100).run(&inputs) {
            SaturationResult::Refuted(r) => {
                r.check(&inputs).unwrap();
                assert_eq!(r.step_count(), 3);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn saturates_satisfiable_set() {
        let inputs = vec![Clause::new(vec![lit(false, 0, vec![v(0)]), lit(true, 1, vec![v(0)])])];
        assert!(matches!(
            Saturation::new(100).run(&inputs),
            SaturationResult::Saturated { .. }
        ));
    }

    #[test]
    fn factoring_is_needed() {
        // P(x) | P(y) and -P(u) | -P(w): unsat, requires factoring
        let inputs = vec![
            Clause::new(vec![lit(true, 0, vec![v(0)]), lit(true, 0, vec![v(1)])]),
            Clause::new(vec![lit(false, 0, vec![v(0)]), lit(false, 0, vec![v(1)])]),
        ];
        match Saturation::new(1000).run(&inputs) {
            SaturationResult::Refuted(r) => r.check(&inputs).unwrap(),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn occurs_check() {
        // P(x, x) vs -P(y, f(y)) does not unify
        let a = Clause::new(vec![lit(true, 0, vec![v(0), v(0)])]);
        let b = Clause::new(vec![lit(false, 0, vec![v(0), Term::App(0, vec![v(0)])])]);
        assert!(resolve(&a, 0, &b, 0).is_none());
    }

    #[test]
    fn tampered_proof_is_rejected() {
        let inputs = vec![
            Clause::new(vec![lit(true, 0, vec![c(0)])]),
            Clause::new(vec![lit(false, 0, vec![v(0)])]),
        ];
        let SaturationResult::Refuted(mut r) = Saturation::new(100).run(&inputs) else {
            panic!()
        };
        r.steps[0].clause = Clause::new(vec![lit(true, 0, vec![c(1)])]);
        assert!(r.check(&inputs).is_err());
    }

    #[test]
    fn subsumption() {
        let general = Clause::new(vec![lit(true, 0, vec![v(0)])]);
        let specific = Clause::new(vec![lit(true, 0, vec![c(0)]), lit(true, 1, vec![c(0)])]);
        assert!(subsumes(&general, &specific));
        assert!(!subsumes(&specific, &general));
        // P(x, x) does not subsume P(a, b)
        let diag = Clause::new(vec![lit(true, 2, vec![v(0), v(0)])]);
        let ab = Clause::new(vec![lit(true, 2, vec![c(0), c(1)])]);
        assert!(!subsumes(&diag, &ab));
    }
}
