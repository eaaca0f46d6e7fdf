//! First-order formulas: translation of sentences, axioms compiled from the
//! taxonomy, axiom filtering and clausal normal form.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::lang::{Language, NounPhrase, Quantifier, Sentence, WordClass};
use crate::relation::Relation;

/// Variable identifier. Translations only ever use [`X`] and [`Y`].
pub type Var = u32;

pub const X: Var = 0;
pub const Y: Var = 1;

/// A first-order term. In formulas only variables occur; Skolem constants
/// (`App` with no arguments) and functions appear after clausification.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    App(u32, Vec<Term>),
}

impl Term {
    pub fn constant(id: u32) -> Term {
        Term::App(id, Vec::new())
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn contains_var(&self, v: Var) -> bool {
        match self {
            Term::Var(w) => *w == v,
            Term::App(_, args) => args.iter().any(|a| a.contains_var(v)),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(*v)
                }
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<Var>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Forall(Var, Box<Formula>),
    Exists(Var, Box<Formula>),
}

impl Formula {
    pub fn atom(pred: &str, args: &[Var]) -> Formula {
        Formula::Atom(Atom { pred: pred.to_string(), args: args.to_vec() })
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn forall(v: Var, f: Formula) -> Formula {
        Formula::Forall(v, Box::new(f))
    }

    pub fn exists(v: Var, f: Formula) -> Formula {
        Formula::Exists(v, Box::new(f))
    }

    /// Wraps in a negation when `neg` is set.
    pub fn negate_if(self, neg: bool) -> Formula {
        if neg {
            Formula::not(self)
        } else {
            self
        }
    }

    /// Predicate names with their arities.
    pub fn predicates(&self) -> BTreeSet<(String, usize)> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |a| {
            out.insert((a.pred.clone(), a.args.len()));
        });
        out
    }

    pub fn visit_atoms(&self, f: &mut impl FnMut(&Atom)) {
        match self {
            Formula::Atom(a) => f(a),
            Formula::Not(g) | Formula::Forall(_, g) | Formula::Exists(_, g) => g.visit_atoms(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.visit_atoms(f);
                b.visit_atoms(f);
            }
        }
    }

    /// Free variables, in order of first occurrence.
    pub fn free_vars(&self) -> Vec<Var> {
        fn go(f: &Formula, bound: &mut Vec<Var>, out: &mut Vec<Var>) {
            match f {
                Formula::Atom(a) => {
                    for v in &a.args {
                        if !bound.contains(v) && !out.contains(v) {
                            out.push(*v);
                        }
                    }
                }
                Formula::Not(g) => go(g, bound, out),
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                    go(a, bound, out);
                    go(b, bound, out);
                }
                Formula::Forall(v, g) | Formula::Exists(v, g) => {
                    bound.push(*v);
                    go(g, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Distinct variables bound anywhere in the formula.
    pub fn bound_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        fn go(f: &Formula, out: &mut BTreeSet<Var>) {
            match f {
                Formula::Atom(_) => {}
                Formula::Not(g) => go(g, out),
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                Formula::Forall(v, g) | Formula::Exists(v, g) => {
                    out.insert(*v);
                    go(g, out);
                }
            }
        }
        go(self, &mut out);
        out
    }

    /// Canonical representative of the formula modulo commutation of `∧`/`∨`
    /// operands and renaming of bound variables.
    pub fn canonical(&self) -> Formula {
        let mut f = self.clone();
        // renaming depends on operand order and sorting depends on names, so
        // alternate until stable
        for _ in 0..4 {
            let next = sort_operands(&rename_bound(&f));
            if next == f {
                break;
            }
            f = next;
        }
        f
    }

    /// Truth value in an interpretation, with `env[v]` holding the value of
    /// variable `v`.
    pub fn eval(&self, interp: &dyn PredicateInterpretation, env: &mut Vec<usize>) -> bool {
        match self {
            Formula::Atom(a) => {
                let args: smallvec_args::Args = a.args.iter().map(|v| env[*v as usize]).collect();
                interp.holds(&a.pred, args.as_slice())
            }
            Formula::Not(g) => !g.eval(interp, env),
            Formula::And(a, b) => a.eval(interp, env) && b.eval(interp, env),
            Formula::Or(a, b) => a.eval(interp, env) || b.eval(interp, env),
            Formula::Implies(a, b) => !a.eval(interp, env) || b.eval(interp, env),
            Formula::Forall(v, g) | Formula::Exists(v, g) => {
                let universal = matches!(self, Formula::Forall(..));
                let slot = *v as usize;
                if env.len() <= slot {
                    env.resize(slot + 1, 0);
                }
                let saved = env[slot];
                let mut result = universal;
                for d in 0..interp.domain_size() {
                    env[slot] = d;
                    if g.eval(interp, env) != universal {
                        result = !universal;
                        break;
                    }
                }
                env[slot] = saved;
                result
            }
        }
    }
}

mod smallvec_args {
    /// Fixed-capacity argument buffer; predicates have arity at most 2 here but
    /// anything up to 4 is supported.
    pub struct Args {
        buf: [usize; 4],
        len: usize,
    }

    impl Args {
        pub fn as_slice(&self) -> &[usize] {
            &self.buf[..self.len]
        }
    }

    impl FromIterator<usize> for Args {
        fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
            let mut a = Args { buf: [0; 4], len: 0 };
            for x in iter {
                a.buf[a.len] = x;
                a.len += 1;
            }
            a
        }
    }
}

/// A finite interpretation of predicate symbols over the domain `0..domain_size()`.
pub trait PredicateInterpretation {
    fn domain_size(&self) -> usize;
    fn holds(&self, pred: &str, args: &[usize]) -> bool;
}

fn rename_bound(f: &Formula) -> Formula {
    fn go(f: &Formula, map: &mut Vec<(Var, Var)>, next: &mut Var) -> Formula {
        match f {
            Formula::Atom(a) => Formula::Atom(Atom {
                pred: a.pred.clone(),
                args: a
                    .args
                    .iter()
                    .map(|v| {
                        map.iter()
                            .rev()
                            .find(|(from, _)| from == v)
                            .map(|(_, to)| *to)
                            .unwrap_or(*v)
                    })
                    .collect(),
            }),
            Formula::Not(g) => Formula::not(go(g, map, next)),
            Formula::And(a, b) => Formula::and(go(a, map, next), go(b, map, next)),
            Formula::Or(a, b) => Formula::or(go(a, map, next), go(b, map, next)),
            Formula::Implies(a, b) => Formula::implies(go(a, map, next), go(b, map, next)),
            Formula::Forall(v, g) | Formula::Exists(v, g) => {
                let fresh = *next;
                *next += 1;
                map.push((*v, fresh));
                let body = go(g, map, next);
                map.pop();
                if matches!(f, Formula::Forall(..)) {
                    Formula::forall(fresh, body)
                } else {
                    Formula::exists(fresh, body)
                }
            }
        }
    }
    // canonical names start above any free variable to avoid capture
    let mut next = f.free_vars().into_iter().max().map_or(0, |m| m + 1);
    go(f, &mut Vec::new(), &mut next)
}

fn sort_operands(f: &Formula) -> Formula {
    match f {
        Formula::Atom(_) => f.clone(),
        Formula::Not(g) => Formula::not(sort_operands(g)),
        Formula::And(a, b) | Formula::Or(a, b) => {
            let (mut a, mut b) = (sort_operands(a), sort_operands(b));
            if b < a {
                std::mem::swap(&mut a, &mut b);
            }
            if matches!(f, Formula::And(..)) {
                Formula::and(a, b)
            } else {
                Formula::or(a, b)
            }
        }
        Formula::Implies(a, b) => Formula::implies(sort_operands(a), sort_operands(b)),
        Formula::Forall(v, g) => Formula::forall(*v, sort_operands(g)),
        Formula::Exists(v, g) => Formula::exists(*v, sort_operands(g)),
    }
}

pub fn var_name(v: Var) -> String {
    match v {
        0 => "x".into(),
        1 => "y".into(),
        2 => "z".into(),
        3 => "u".into(),
        4 => "w".into(),
        n => format!("v{n}"),
    }
}

impl fmt::Display for Formula {
    /// ASCII rendering: `all x (Romans(x) -> Italians(x))`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(a) => {
                let args: Vec<String> = a.args.iter().map(|v| var_name(*v)).collect();
                write!(f, "{}({})", a.pred, args.join(","))
            }
            Formula::Not(g) => match **g {
                Formula::Atom(_) | Formula::Not(_) => write!(f, "-{g}"),
                _ => write!(f, "-({g})"),
            },
            Formula::And(a, b) => write!(f, "{} & {}", Paren(a), Paren(b)),
            Formula::Or(a, b) => write!(f, "{} | {}", Paren(a), Paren(b)),
            Formula::Implies(a, b) => write!(f, "{} -> {}", Paren(a), Paren(b)),
            Formula::Forall(v, g) => write!(f, "all {} ({g})", var_name(*v)),
            Formula::Exists(v, g) => write!(f, "exists {} ({g})", var_name(*v)),
        }
    }
}

struct Paren<'a>(&'a Formula);

impl fmt::Display for Paren<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Formula::And(..) | Formula::Or(..) | Formula::Implies(..) => write!(f, "({})", self.0),
            other => write!(f, "{other}"),
        }
    }
}

// ---------------------------------------------------------------------------
// Translation

fn restrictor(np: &NounPhrase, var: Var) -> Formula {
    Formula::atom(&np.noun, &[var]).negate_if(np.noun_neg)
}

/// Quantified noun phrase over `var` with the given scope, including the
/// determiner negation.
fn quantified(np: &NounPhrase, var: Var, scope: Formula) -> Formula {
    let body = match np.quant {
        Quantifier::All => Formula::forall(var, Formula::implies(restrictor(np, var), scope)),
        Quantifier::Some => Formula::exists(var, Formula::and(restrictor(np, var), scope)),
    };
    body.negate_if(np.det_neg)
}

/// Translates a sentence into a closed formula over the variables `x`
/// (subject) and `y` (object). Verb negation scopes over the whole verb
/// phrase, object quantifier included.
pub fn translate(s: &Sentence) -> Formula {
    let verb = Formula::atom(&s.verb, &[X, Y]);
    let vp = quantified(&s.object, Y, verb).negate_if(s.verb_neg);
    quantified(&s.subject, X, vp)
}

// ---------------------------------------------------------------------------
// Axioms

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomSource {
    pub left: String,
    pub relation: Relation,
    pub right: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Axiom {
    pub formula: Formula,
    canonical: Formula,
    pub source: AxiomSource,
}

impl Axiom {
    pub fn new(formula: Formula, source: AxiomSource) -> Axiom {
        let canonical = formula.canonical();
        Axiom { formula, canonical, source }
    }

    pub fn canonical(&self) -> &Formula {
        &self.canonical
    }
}

/// Axioms with provenance; never holds two axioms with the same canonical form.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AxiomSet {
    axioms: Vec<Axiom>,
}

impl AxiomSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds the axiom unless an equivalent one is already present.
    pub fn insert(&mut self, axiom: Axiom) -> bool {
        if self.axioms.iter().any(|a| a.canonical == axiom.canonical) {
            return false;
        }
        self.axioms.push(axiom);
        true
    }

    pub fn axioms(&self) -> &[Axiom] {
        &self.axioms
    }

    pub fn formulas(&self) -> impl Iterator<Item = &Formula> {
        self.axioms.iter().map(|a| &a.formula)
    }

    pub fn len(&self) -> usize {
        self.axioms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axioms.is_empty()
    }
}

/// Universally closes `body` over the argument variables of a predicate of
/// the given arity.
fn close(arity: usize, body: Formula) -> Formula {
    (0..arity as Var).rev().fold(body, |f, v| Formula::forall(v, f))
}

/// Axiom schemas for one lexical relation `a rel b`.
pub fn relation_axioms(a: &str, rel: Relation, b: &str, arity: usize) -> Vec<Formula> {
    let args: Vec<Var> = (0..arity as Var).collect();
    let pa = || Formula::atom(a, &args);
    let pb = || Formula::atom(b, &args);
    let disjoint = || close(arity, Formula::not(Formula::and(pa(), pb())));
    let exhaustive = || close(arity, Formula::or(pa(), pb()));
    match rel {
        Relation::Forward => vec![close(arity, Formula::implies(pa(), pb()))],
        Relation::Reverse => vec![close(arity, Formula::implies(pb(), pa()))],
        Relation::Alternation => vec![disjoint(), Formula::not(exhaustive())],
        Relation::Negation => vec![disjoint(), exhaustive()],
        Relation::Cover => vec![close(arity, Formula::implies(Formula::not(pa()), pb()))],
        Relation::Equivalence | Relation::Independence => Vec::new(),
    }
}

/// Compiles every stored taxonomy relation into its axiom schema.
pub fn compile_axioms(lang: &Language) -> AxiomSet {
    let mut set = AxiomSet::new();
    for (class, arity) in [(WordClass::Noun, 1), (WordClass::Verb, 2)] {
        for (a, rel, b) in lang.taxonomy.pairs(class) {
            for f in relation_axioms(a, rel, b, arity) {
                set.insert(Axiom::new(
                    f,
                    AxiomSource { left: a.to_string(), relation: rel, right: b.to_string() },
                ));
            }
        }
    }
    set
}

/// Keeps the axioms whose predicates all occur in `phi` or `psi`.
pub fn filter_axioms(axioms: &AxiomSet, phi: &Formula, psi: &Formula) -> AxiomSet {
    let mut present: BTreeSet<(String, usize)> = phi.predicates();
    present.extend(psi.predicates());
    let mut out = AxiomSet::new();
    for ax in &axioms.axioms {
        if ax.formula.predicates().is_subset(&present) {
            out.insert(ax.clone());
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Clausal normal form

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub positive: bool,
    pub pred: u32,
    pub args: Vec<Term>,
}

impl Literal {
    pub fn negated(&self) -> Literal {
        Literal { positive: !self.positive, pred: self.pred, args: self.args.clone() }
    }

    pub fn is_complement_of(&self, other: &Literal) -> bool {
        self.positive != other.positive && self.pred == other.pred && self.args == other.args
    }

    pub fn vars(&self, out: &mut Vec<Var>) {
        self.args.iter().for_each(|a| a.collect_vars(out));
    }

    pub fn size(&self) -> usize {
        1 + self.args.iter().map(Term::size).sum::<usize>()
    }
}

/// A disjunction of literals; variables are implicitly universally quantified.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clause {
    pub literals: Vec<Literal>,
}

impl Clause {
    /// Builds a clause, removing duplicate literals and renaming variables to
    /// `0..k` in order of occurrence.
    pub fn new(mut literals: Vec<Literal>) -> Clause {
        let mut seen = Vec::with_capacity(literals.len());
        literals.retain(|l| {
            if seen.contains(l) {
                false
            } else {
                seen.push(l.clone());
                true
            }
        });
        let mut c = Clause { literals };
        c.normalize_vars();
        c
    }

    pub fn empty() -> Clause {
        Clause { literals: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_tautology(&self) -> bool {
        self.literals
            .iter()
            .enumerate()
            .any(|(i, a)| self.literals[i + 1..].iter().any(|b| a.is_complement_of(b)))
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        for l in &self.literals {
            l.vars(&mut out);
        }
        out
    }

    pub fn size(&self) -> usize {
        self.literals.iter().map(Literal::size).sum()
    }

    pub fn normalize_vars(&mut self) {
        let vars = self.vars();
        if vars.iter().enumerate().all(|(i, v)| *v == i as Var) {
            return;
        }
        let map: HashMap<Var, Var> = vars.iter().enumerate().map(|(i, v)| (*v, i as Var)).collect();
        for l in &mut self.literals {
            for a in &mut l.args {
                *a = rename_term(a, &map);
            }
        }
    }
}

fn rename_term(t: &Term, map: &HashMap<Var, Var>) -> Term {
    match t {
        Term::Var(v) => Term::Var(map[v]),
        Term::App(f, args) => Term::App(*f, args.iter().map(|a| rename_term(a, map)).collect()),
    }
}

/// Predicate and function symbols of a clause set.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    preds: Vec<(String, usize)>,
    funcs: Vec<(String, usize)>,
}

impl Signature {
    pub fn intern_pred(&mut self, name: &str, arity: usize) -> u32 {
        if let Some(i) = self.preds.iter().position(|(n, a)| n == name && *a == arity) {
            return i as u32;
        }
        self.preds.push((name.to_string(), arity));
        (self.preds.len() - 1) as u32
    }

    pub fn pred_id(&self, name: &str) -> Option<u32> {
        self.preds.iter().position(|(n, _)| n == name).map(|i| i as u32)
    }

    pub fn new_func(&mut self, arity: usize) -> u32 {
        let id = self.funcs.len() as u32;
        let name = if arity == 0 { format!("c{id}") } else { format!("f{id}") };
        self.funcs.push((name, arity));
        id
    }

    pub fn preds(&self) -> &[(String, usize)] {
        &self.preds
    }

    pub fn funcs(&self) -> &[(String, usize)] {
        &self.funcs
    }

    pub fn pred_name(&self, id: u32) -> &str {
        &self.preds[id as usize].0
    }

    pub fn func_name(&self, id: u32) -> &str {
        &self.funcs[id as usize].0
    }

    pub fn display_term(&self, t: &Term) -> String {
        match t {
            Term::Var(v) => var_name(*v),
            Term::App(f, args) if args.is_empty() => self.func_name(*f).to_string(),
            Term::App(f, args) => {
                let args: Vec<String> = args.iter().map(|a| self.display_term(a)).collect();
                format!("{}({})", self.func_name(*f), args.join(","))
            }
        }
    }

    pub fn display_clause(&self, c: &Clause) -> String {
        if c.is_empty() {
            return "$F".into();
        }
        let lits: Vec<String> = c
            .literals
            .iter()
            .map(|l| {
                let args: Vec<String> = l.args.iter().map(|a| self.display_term(a)).collect();
                format!(
                    "{}{}({})",
                    if l.positive { "" } else { "-" },
                    self.pred_name(l.pred),
                    args.join(",")
                )
            })
            .collect();
        lits.join(" | ")
    }
}

/// Negation normal form: only `∧`, `∨`, quantifiers, and negated atoms.
fn nnf(f: &Formula, positive: bool) -> Formula {
    match f {
        Formula::Atom(_) => f.clone().negate_if(!positive),
        Formula::Not(g) => nnf(g, !positive),
        Formula::And(a, b) => {
            if positive {
                Formula::and(nnf(a, true), nnf(b, true))
            } else {
                Formula::or(nnf(a, false), nnf(b, false))
            }
        }
        Formula::Or(a, b) => {
            if positive {
                Formula::or(nnf(a, true), nnf(b, true))
            } else {
                Formula::and(nnf(a, false), nnf(b, false))
            }
        }
        Formula::Implies(a, b) => {
            if positive {
                Formula::or(nnf(a, false), nnf(b, true))
            } else {
                Formula::and(nnf(a, true), nnf(b, false))
            }
        }
        Formula::Forall(v, g) => {
            if positive {
                Formula::forall(*v, nnf(g, true))
            } else {
                Formula::exists(*v, nnf(g, false))
            }
        }
        Formula::Exists(v, g) => {
            if positive {
                Formula::exists(*v, nnf(g, true))
            } else {
                Formula::forall(*v, nnf(g, false))
            }
        }
    }
}

/// Quantifier-free matrix after standardizing apart and Skolemization.
enum Matrix {
    Lit(Literal),
    And(Vec<Matrix>),
    Or(Vec<Matrix>),
}

/// Turns closed formulas into clauses. One clausifier allocates Skolem symbols
/// for a whole problem, so ids never collide across formulas.
#[derive(Clone, Debug, Default)]
pub struct Clausifier {
    pub signature: Signature,
    next_var: Var,
}

impl Clausifier {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn into_signature(self) -> Signature {
        self.signature
    }

    /// Clausal form of a closed formula (equisatisfiable with it).
    pub fn clausify(&mut self, f: &Formula) -> Vec<Clause> {
        debug_assert!(f.is_closed(), "clausify expects a closed formula: {f}");
        let n = nnf(f, true);
        let m = self.skolemize(&n, &mut Vec::new(), &mut Vec::new());
        let mut clauses = Vec::new();
        for lits in cnf(&m) {
            let c = Clause::new(lits);
            if !c.is_tautology() && !clauses.contains(&c) {
                clauses.push(c);
            }
        }
        clauses
    }

    /// `env` maps formula variables to terms, innermost binding last;
    /// `universals` lists the clause variables of the enclosing universals.
    fn skolemize(&mut self, f: &Formula, env: &mut Vec<(Var, Term)>, universals: &mut Vec<Var>) -> Matrix {
        match f {
            Formula::Atom(a) => self.literal(a, true, env),
            Formula::Not(g) => match &**g {
                Formula::Atom(a) => self.literal(a, false, env),
                _ => unreachable!("negation below an atom after NNF"),
            },
            Formula::And(a, b) => {
                Matrix::And(vec![self.skolemize(a, env, universals), self.skolemize(b, env, universals)])
            }
            Formula::Or(a, b) => {
                Matrix::Or(vec![self.skolemize(a, env, universals), self.skolemize(b, env, universals)])
            }
            Formula::Forall(v, g) => {
                let fresh = self.next_var;
                self.next_var += 1;
                env.push((*v, Term::Var(fresh)));
                universals.push(fresh);
                let m = self.skolemize(g, env, universals);
                universals.pop();
                env.pop();
                m
            }
            Formula::Exists(v, g) => {
                let id = self.signature.new_func(universals.len());
                let term = Term::App(id, universals.iter().map(|u| Term::Var(*u)).collect());
                env.push((*v, term));
                let m = self.skolemize(g, env, universals);
                env.pop();
                m
            }
            Formula::Implies(..) => unreachable!("implication after NNF"),
        }
    }

    fn literal(&mut self, a: &Atom, positive: bool, env: &[(Var, Term)]) -> Matrix {
        let pred = self.signature.intern_pred(&a.pred, a.args.len());
        let args = a
            .args
            .iter()
            .map(|v| {
                env.iter()
                    .rev()
                    .find(|(w, _)| w == v)
                    .map(|(_, t)| t.clone())
                    .expect("formula is closed")
            })
            .collect();
        Matrix::Lit(Literal { positive, pred, args })
    }
}

fn cnf(m: &Matrix) -> Vec<Vec<Literal>> {
    match m {
        Matrix::Lit(l) => vec![vec![l.clone()]],
        Matrix::And(parts) => parts.iter().flat_map(cnf).collect(),
        Matrix::Or(parts) => {
            let mut acc: Vec<Vec<Literal>> = vec![Vec::new()];
            for p in parts {
                let rhs = cnf(p);
                let mut next = Vec::with_capacity(acc.len() * rhs.len());
                for a in &acc {
                    for b in &rhs {
                        let mut c = a.clone();
                        c.extend(b.iter().cloned());
                        next.push(c);
                    }
                }
                acc = next;
            }
            acc
        }
    }
}

/// Clausifies a single formula with a fresh signature.
pub fn clausify(f: &Formula) -> (Vec<Clause>, Signature) {
    let mut c = Clausifier::new();
    let clauses = c.clausify(f);
    (clauses, c.into_signature())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_str;

    fn lang() -> Language {
        Language::default_language()
    }

    fn tr(text: &str) -> Formula {
        translate(&parse_str(text, &lang().vocabulary).unwrap())
    }

    #[test]
    fn translate_simple_sentence() {
        let f = tr("all Europeans like some Italians");
        assert_eq!(f.to_string(), "all x (Europeans(x) -> exists y (Italians(y) & like(x,y)))");
        assert!(f.is_closed());
    }

    #[test]
    fn verb_negation_scopes_over_the_object() {
        let f = tr("not some Italians not like some Europeans");
        assert_eq!(
            f.to_string(),
            "-(exists x (Italians(x) & -(exists y (Europeans(y) & like(x,y)))))"
        );
        let g = tr("not all not Germans not fear all Europeans");
        assert_eq!(
            g.to_string(),
            "-(all x (-Germans(x) -> -(all y (Europeans(y) -> fear(x,y)))))"
        );
    }

    #[test]
    fn determiner_negation_is_outermost() {
        let v = lang().vocabulary;
        for text in ["all Romans love some children", "some not Germans not hate all not Romans"] {
            let mut s = parse_str(text, &v).unwrap();
            let plain = translate(&s);
            s.subject.det_neg = true;
            assert_eq!(translate(&s), Formula::not(plain));
        }
    }

    #[test]
    fn two_variable_fragment() {
        let v = lang().vocabulary;
        for s in crate::lang::enumerate_sentences(&v, crate::lang::SlotPolicy::five_slots()).iter().step_by(37) {
            let f = translate(s);
            assert!(f.bound_vars().iter().all(|v| *v == X || *v == Y));
            assert!(f.is_closed());
        }
    }

    #[test]
    fn compiled_axioms_follow_the_schemas() {
        let set = compile_axioms(&lang());
        let texts: Vec<String> = set.formulas().map(|f| f.to_string()).collect();
        assert!(texts.contains(&"all x (Romans(x) -> Italians(x))".to_string()), "{texts:?}");
        assert!(texts.contains(&"all x (-(Germans(x) & Italians(x)))".to_string()));
        assert!(texts.contains(&"-(all x (Germans(x) | Italians(x)))".to_string()));
        assert!(texts.contains(&"all x (all y (love(x,y) -> like(x,y)))".to_string()));
        // 4 inclusions + 2 alternations for nouns, 2 inclusions + 4 alternations for verbs
        assert_eq!(set.len(), 4 + 2 * 2 + 2 + 4 * 2);
        let by_pair = set
            .axioms()
            .iter()
            .filter(|a| a.source.left == "Germans" && a.source.right == "Italians")
            .count();
        assert_eq!(by_pair, 2);
    }

    #[test]
    fn schema_for_each_relation() {
        let show = |r| {
            relation_axioms("A", r, "B", 1)
                .iter()
                .map(|f| f.to_string())
                .collect::<Vec<_>>()
        };
        assert_eq!(show(Relation::Reverse), ["all x (B(x) -> A(x))"]);
        assert_eq!(
            show(Relation::Negation),
            ["all x (-(A(x) & B(x)))", "all x (A(x) | B(x))"]
        );
        assert_eq!(show(Relation::Cover), ["all x (-A(x) -> B(x))"]);
        assert!(show(Relation::Independence).is_empty());
        assert!(show(Relation::Equivalence).is_empty());
    }

    #[test]
    fn filtering_keeps_only_relevant_axioms() {
        let all = compile_axioms(&lang());
        let phi = tr("all Romans like some Italians");
        let psi = tr("some Italians not like all Romans");
        let kept = filter_axioms(&all, &phi, &psi);
        let texts: Vec<String> = kept.formulas().map(|f| f.to_string()).collect();
        assert_eq!(texts, ["all x (Romans(x) -> Italians(x))"]);

        let phi = tr("all children fear some children");
        assert!(filter_axioms(&all, &phi, &phi).is_empty());
    }

    #[test]
    fn commuted_duplicates_are_dropped() {
        let src = || AxiomSource { left: "A".into(), relation: Relation::Negation, right: "B".into() };
        let ab = Formula::forall(X, Formula::or(Formula::atom("A", &[X]), Formula::atom("B", &[X])));
        let ba = Formula::forall(Y, Formula::or(Formula::atom("B", &[Y]), Formula::atom("A", &[Y])));
        let mut set = AxiomSet::new();
        assert!(set.insert(Axiom::new(ab, src())));
        assert!(!set.insert(Axiom::new(ba, src())));
        assert_eq!(set.len(), 1);
    }

    #[test]
    fn clausify_implication() {
        let f = Formula::forall(X, Formula::implies(Formula::atom("A", &[X]), Formula::atom("B", &[X])));
        let (clauses, sig) = clausify(&f);
        assert_eq!(clauses.len(), 1);
        assert_eq!(sig.display_clause(&clauses[0]), "-A(x) | B(x)");
    }

    #[test]
    fn clausify_skolem_constant() {
        let f = Formula::exists(X, Formula::atom("A", &[X]));
        let (clauses, sig) = clausify(&f);
        assert_eq!(clauses.len(), 1);
        assert_eq!(clauses[0].literals[0].args, vec![Term::constant(0)]);
        assert_eq!(sig.funcs(), &[("c0".to_string(), 0)]);
    }

    #[test]
    fn clausify_skolem_function_under_universal() {
        let f = tr("all Europeans like some Italians");
        let (clauses, sig) = clausify(&f);
        let shown: Vec<String> = clauses.iter().map(|c| sig.display_clause(c)).collect();
        assert_eq!(shown, ["-Europeans(x) | Italians(f0(x))", "-Europeans(x) | like(x,f0(x))"]);
    }

    #[test]
    fn skolem_ids_are_unique_across_formulas() {
        let mut c = Clausifier::new();
        c.clausify(&tr("some Romans like some Italians"));
        c.clausify(&tr("some Romans like some Italians"));
        assert_eq!(c.signature.funcs().len(), 4);
    }
}
