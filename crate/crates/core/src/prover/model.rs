//! Finite interpretations and the bounded model search over them.

use std::collections::BTreeMap;
use std::fmt;

use crate::fol::{Clause, Literal, PredicateInterpretation, Signature, Term};

use super::sat::{Lit, SolveResult, Solver};

/// A finite interpretation of predicate and function symbols over `0..size`.
/// Tables are indexed by the mixed-radix encoding of the argument tuple
/// (first argument least significant).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interpretation {
    pub size: usize,
    pub preds: BTreeMap<u32, Vec<bool>>,
    pub funcs: BTreeMap<u32, Vec<usize>>,
}

fn tuple_index(args: &[usize], size: usize) -> usize {
    args.iter().rev().fold(0, |acc, &a| acc * size + a)
}

impl Interpretation {
    pub fn eval_term(&self, t: &Term, env: &[usize]) -> usize {
        match t {
            Term::Var(v) => env[*v as usize],
            Term::App(f, args) => {
                let vals: Vec<usize> = args.iter().map(|a| self.eval_term(a, env)).collect();
                self.funcs[f][tuple_index(&vals, self.size)]
            }
        }
    }

    pub fn eval_literal(&self, l: &Literal, env: &[usize]) -> bool {
        let vals: Vec<usize> = l.args.iter().map(|a| self.eval_term(a, env)).collect();
        let holds = self.preds.get(&l.pred).is_some_and(|t| t[tuple_index(&vals, self.size)]);
        holds == l.positive
    }

    /// Whether the clause holds under every assignment of its variables.
    pub fn satisfies(&self, c: &Clause) -> bool {
        let nvars = c.vars().iter().map(|v| *v as usize + 1).max().unwrap_or(0);
        let mut env = vec![0usize; nvars];
        loop {
            if !c.literals.iter().any(|l| self.eval_literal(l, &env)) {
                return false;
            }
            // next assignment
            let mut i = 0;
            loop {
                if i == nvars {
                    return true;
                }
                env[i] += 1;
                if env[i] < self.size {
                    break;
                }
                env[i] = 0;
                i += 1;
            }
        }
    }

    pub fn display(&self, sig: &Signature) -> String {
        ModelDisplay { interp: self, sig }.to_string()
    }
}

struct ModelDisplay<'a> {
    interp: &'a Interpretation,
    sig: &'a Signature,
}

impl fmt::Display for ModelDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.interp.size;
        writeln!(f, "domain size {n}")?;
        for (p, table) in &self.interp.preds {
            let arity = self.sig.preds()[*p as usize].1;
            let tuples: Vec<String> = table
                .iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .map(|(i, _)| {
                    let parts: Vec<String> =
                        (0..arity).map(|k| (i / n.pow(k as u32) % n).to_string()).collect();
                    format!("({})", parts.join(","))
                })
                .collect();
            writeln!(f, "  {} = {{{}}}", self.sig.pred_name(*p), tuples.join(", "))?;
        }
        for (g, table) in &self.interp.funcs {
            let vals: Vec<String> = table.iter().map(|v| v.to_string()).collect();
            writeln!(f, "  {} = [{}]", self.sig.func_name(*g), vals.join(", "))?;
        }
        Ok(())
    }
}

/// Interpretation viewed through predicate names, for evaluating formulas.
pub struct NamedInterpretation<'a> {
    pub interp: &'a Interpretation,
    pub signature: &'a Signature,
}

impl PredicateInterpretation for NamedInterpretation<'_> {
    fn domain_size(&self) -> usize {
        self.interp.size
    }

    fn holds(&self, pred: &str, args: &[usize]) -> bool {
        match self.signature.pred_id(pred) {
            Some(id) => self
                .interp
                .preds
                .get(&id)
                .is_some_and(|t| t[tuple_index(args, self.interp.size)]),
            None => false,
        }
    }
}

/// Why a clause set cannot be handed to the grounding search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroundingError {
    /// Function terms nested below another function symbol.
    NestedTerms,
}

/// Symbol ids with their arities.
type Symbols = Vec<(u32, usize)>;

/// Predicates and functions occurring in a clause set.
fn occurring_symbols(clauses: &[Clause], sig: &Signature) -> (Symbols, Symbols) {
    let mut preds = BTreeMap::new();
    let mut funcs = BTreeMap::new();
    fn walk(t: &Term, sig: &Signature, funcs: &mut BTreeMap<u32, usize>) {
        if let Term::App(f, args) = t {
            funcs.insert(*f, sig.funcs()[*f as usize].1);
            args.iter().for_each(|a| walk(a, sig, funcs));
        }
    }
    for c in clauses {
        for l in &c.literals {
            preds.insert(l.pred, sig.preds()[l.pred as usize].1);
            l.args.iter().for_each(|a| walk(a, sig, &mut funcs));
        }
    }
    (preds.into_iter().collect(), funcs.into_iter().collect())
}

/// Propositional encoding of "the clauses have a model of size `n`".
struct Grounding {
    size: usize,
    pred_base: BTreeMap<u32, usize>,
    /// base variable and arity per function; cell `c` value `e` is `base + c * size + e`
    func_base: BTreeMap<u32, (usize, usize)>,
    num_vars: usize,
}

impl Grounding {
    fn new(size: usize, preds: &[(u32, usize)], funcs: &[(u32, usize)]) -> Self {
        let mut next = 0;
        let mut pred_base = BTreeMap::new();
        for &(p, arity) in preds {
            pred_base.insert(p, next);
            next += size.pow(arity as u32);
        }
        let mut func_base = BTreeMap::new();
        for &(f, arity) in funcs {
            func_base.insert(f, (next, arity));
            next += size.pow(arity as u32) * size;
        }
        Grounding { size, pred_base, func_base, num_vars: next }
    }

    fn cell_var(&self, f: u32, cell: usize, value: usize) -> usize {
        self.func_base[&f].0 + cell * self.size + value
    }

    fn encode(&self, clauses: &[Clause], funcs: &[(u32, usize)]) -> Result<Solver, GroundingError> {
        let n = self.size;
        let mut solver = Solver::new(self.num_vars);
        // every function cell takes exactly one value
        for (&f, &(_, arity)) in &self.func_base {
            for cell in 0..n.pow(arity as u32) {
                let all: Vec<Lit> = (0..n).map(|e| Lit::pos(self.cell_var(f, cell, e))).collect();
                solver.add_clause(&all);
                for a in 0..n {
                    for b in a + 1..n {
                        solver.add_clause(&[
                            Lit::neg(self.cell_var(f, cell, a)),
                            Lit::neg(self.cell_var(f, cell, b)),
                        ]);
                    }
                }
            }
        }
        // least-number symmetry breaking: the k-th constant takes a value <= k
        for (rank, &(f, _)) in funcs.iter().filter(|(_, a)| *a == 0).enumerate() {
            for e in rank + 1..n {
                solver.add_clause(&[Lit::neg(self.cell_var(f, 0, e))]);
            }
        }
        let mut buf = Vec::new();
        for c in clauses {
            let nvars = c.vars().iter().map(|v| *v as usize + 1).max().unwrap_or(0);
            let mut env = vec![0usize; nvars];
            loop {
                self.ground_instance(c, &env, &mut solver, &mut buf)?;
                let mut i = 0;
                while i < nvars {
                    env[i] += 1;
                    if env[i] < n {
                        break;
                    }
                    env[i] = 0;
                    i += 1;
                }
                if i == nvars {
                    break;
                }
            }
        }
        Ok(solver)
    }

    /// Emits the propositional clauses for one variable assignment. Function
    /// applications (cells) are eliminated by enumerating their values.
    fn ground_instance(
        &self,
        c: &Clause,
        env: &[usize],
        solver: &mut Solver,
        buf: &mut Vec<Lit>,
    ) -> Result<(), GroundingError> {
        let n = self.size;
        let mut cells: Vec<(u32, usize)> = Vec::new();
        for l in &c.literals {
            for a in &l.args {
                if let Term::App(f, args) = a {
                    let mut vals = Vec::with_capacity(args.len());
                    for t in args {
                        match t {
                            Term::Var(v) => vals.push(env[*v as usize]),
                            Term::App(..) => return Err(GroundingError::NestedTerms),
                        }
                    }
                    let cell = (*f, tuple_index(&vals, n));
                    if !cells.contains(&cell) {
                        cells.push(cell);
                    }
                }
            }
        }
        let mut choice = vec![0usize; cells.len()];
        loop {
            buf.clear();
            for (i, &(f, cell)) in cells.iter().enumerate() {
                buf.push(Lit::neg(self.cell_var(f, cell, choice[i])));
            }
            for l in &c.literals {
                let vals: Vec<usize> = l
                    .args
                    .iter()
                    .map(|a| match a {
                        Term::Var(v) => env[*v as usize],
                        Term::App(f, args) => {
                            let inner: Vec<usize> = args
                                .iter()
                                .map(|t| match t {
                                    Term::Var(v) => env[*v as usize],
                                    Term::App(..) => unreachable!(),
                                })
                                .collect();
                            let cell = (*f, tuple_index(&inner, n));
                            let k = cells.iter().position(|c| *c == cell).expect("collected");
                            choice[k]
                        }
                    })
                    .collect();
                let var = self.pred_base[&l.pred] + tuple_index(&vals, n);
                buf.push(Lit::new(var, l.positive));
            }
            solver.add_clause(buf);
            let mut i = 0;
            while i < cells.len() {
                choice[i] += 1;
                if choice[i] < n {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
            if i == cells.len() {
                return Ok(());
            }
        }
    }

    fn decode(&self, solver: &Solver, preds: &[(u32, usize)]) -> Interpretation {
        let n = self.size;
        let mut interp = Interpretation { size: n, preds: BTreeMap::new(), funcs: BTreeMap::new() };
        for &(p, arity) in preds {
            let base = self.pred_base[&p];
            let table = (0..n.pow(arity as u32)).map(|i| solver.model_value(base + i)).collect();
            interp.preds.insert(p, table);
        }
        for (&f, &(_, arity)) in &self.func_base {
            let table = (0..n.pow(arity as u32))
                .map(|cell| {
                    (0..n)
                        .find(|&e| solver.model_value(self.cell_var(f, cell, e)))
                        .expect("exactly-one constraint")
                })
                .collect();
            interp.funcs.insert(f, table);
        }
        interp
    }
}

/// Outcome of searching one domain size.
#[derive(Debug)]
pub enum SizeOutcome {
    Model(Interpretation),
    NoModel,
    /// The solver hit its decision budget.
    Inconclusive,
}

/// Looks for a model with exactly `size` elements.
pub fn search_size(
    clauses: &[Clause],
    sig: &Signature,
    size: usize,
    max_decisions: u64,
) -> Result<SizeOutcome, GroundingError> {
    let (preds, funcs) = occurring_symbols(clauses, sig);
    let g = Grounding::new(size, &preds, &funcs);
    let mut solver = g.encode(clauses, &funcs)?;
    Ok(match solver.solve(max_decisions) {
        SolveResult::Sat => SizeOutcome::Model(g.decode(&solver, &preds)),
        SolveResult::Unsat => SizeOutcome::NoModel,
        SolveResult::Unknown => SizeOutcome::Inconclusive,
    })
}
