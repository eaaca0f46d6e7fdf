//! Satisfiability of small clause sets and classification of sentence pairs
//! into the seven entailment relations.
//!
//! [`check_sat`] first searches for finite models of increasing size and then
//! falls back to resolution. Both engines are sound: a `Sat` verdict carries a
//! model verified against every clause, an `Unsat` verdict a derivation of the
//! empty clause.

mod model;
pub mod oracle;
pub mod resolution;
pub mod sat;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use crate::fol::{Clause, Literal, Signature};
use crate::fol::{Clausifier, Formula};
use crate::fol::AxiomSet;
pub use crate::relation::Relation as RelationLabel;
use crate::relation::Relation;
pub use model::{Interpretation, NamedInterpretation};
pub use oracle::{brute_force_label, OracleError};
pub use resolution::{Refutation, SaturationResult};

use model::{search_size, SizeOutcome};
use resolution::Saturation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub max_domain: usize,
    pub max_resolution_steps: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_domain: 4, max_resolution_steps: 50_000 }
    }
}

/// Decision budget of the propositional solver per domain size.
const MAX_DECISIONS: u64 = 1_000_000;

/// A clause set with the symbols it is written in.
#[derive(Clone, Debug, Default)]
pub struct ClauseSet {
    pub signature: Signature,
    pub clauses: Vec<Clause>,
}

impl ClauseSet {
    pub fn from_formulas<'a>(formulas: impl IntoIterator<Item = &'a Formula>) -> ClauseSet {
        let mut c = Clausifier::new();
        let clauses = formulas.into_iter().flat_map(|f| c.clausify(f)).collect();
        ClauseSet { signature: c.into_signature(), clauses }
    }

    pub fn display(&self) -> String {
        self.clauses
            .iter()
            .map(|c| self.signature.display_clause(c))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// A model that has been checked against the clauses it was built for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifiedModel(Interpretation);

impl VerifiedModel {
    /// Returns `None` unless `interp` satisfies every clause.
    pub fn verify(interp: Interpretation, clauses: &[Clause]) -> Option<VerifiedModel> {
        clauses.iter().all(|c| interp.satisfies(c)).then_some(VerifiedModel(interp))
    }

    pub fn interpretation(&self) -> &Interpretation {
        &self.0
    }

    pub fn size(&self) -> usize {
        self.0.size
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exhausted {
    /// No model up to `max_domain` and resolution ran out of steps.
    Steps,
    /// Resolution saturated without refutation (so the set is satisfiable),
    /// but no model was found within the domain bound.
    NoModelWithinDomain,
    /// The model search could not handle the clause shape or its decision
    /// budget, and resolution ran out of steps.
    Search,
}

#[derive(Clone, Debug)]
pub enum SatVerdict {
    Sat(VerifiedModel),
    Unsat(Refutation),
    Undecided(Exhausted),
}

impl SatVerdict {
    pub fn is_sat(&self) -> Option<bool> {
        match self {
            SatVerdict::Sat(_) => Some(true),
            SatVerdict::Unsat(_) => Some(false),
            SatVerdict::Undecided(_) => None,
        }
    }
}

/// Decides satisfiability: models of size `1..=max_domain` first, then
/// resolution under the step limit.
pub fn check_sat(set: &ClauseSet, limits: &Limits) -> SatVerdict {
    let mut search_failed = false;
    for size in 1..=limits.max_domain {
        match search_size(&set.clauses, &set.signature, size, MAX_DECISIONS) {
            Ok(SizeOutcome::Model(m)) => {
                let model = VerifiedModel::verify(m, &set.clauses)
                    .expect("grounded model satisfies its clauses");
                return SatVerdict::Sat(model);
            }
            Ok(SizeOutcome::NoModel) => {}
            Ok(SizeOutcome::Inconclusive) | Err(_) => search_failed = true,
        }
    }
    match Saturation::new(limits.max_resolution_steps).run(&set.clauses) {
        SaturationResult::Refuted(proof) => {
            debug_assert!(proof.check(&set.clauses).is_ok());
            SatVerdict::Unsat(proof)
        }
        SaturationResult::Saturated { .. } => SatVerdict::Undecided(Exhausted::NoModelWithinDomain),
        SaturationResult::Exhausted { .. } => SatVerdict::Undecided(if search_failed {
            Exhausted::Search
        } else {
            Exhausted::Steps
        }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SearchFailure {
    #[error("function terms nested below another function symbol")]
    NestedTerms,
    #[error("decision budget exhausted")]
    Budget,
}

/// Looks for a model with exactly `size` elements; `Ok(None)` means there is
/// none.
pub fn model_of_size(set: &ClauseSet, size: usize) -> Result<Option<VerifiedModel>, SearchFailure> {
    match search_size(&set.clauses, &set.signature, size, MAX_DECISIONS) {
        Ok(SizeOutcome::Model(m)) => Ok(Some(
            VerifiedModel::verify(m, &set.clauses).expect("grounded model satisfies its clauses"),
        )),
        Ok(SizeOutcome::NoModel) => Ok(None),
        Ok(SizeOutcome::Inconclusive) => Err(SearchFailure::Budget),
        Err(_) => Err(SearchFailure::NestedTerms),
    }
}

/// Which of the four sentence combinations a satisfiability check covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Combination {
    /// φ ∧ ψ
    Both,
    /// φ ∧ ¬ψ
    LeftOnly,
    /// ¬φ ∧ ψ
    RightOnly,
    /// ¬φ ∧ ¬ψ
    Neither,
}

impl Combination {
    pub const ALL: [Combination; 4] =
        [Combination::Both, Combination::LeftOnly, Combination::RightOnly, Combination::Neither];

    fn polarity(self) -> (bool, bool) {
        match self {
            Combination::Both => (true, true),
            Combination::LeftOnly => (true, false),
            Combination::RightOnly => (false, true),
            Combination::Neither => (false, false),
        }
    }
}

impl fmt::Display for Combination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Combination::Both => "A + phi + psi",
            Combination::LeftOnly => "A + phi + -psi",
            Combination::RightOnly => "A + -phi + psi",
            Combination::Neither => "A + -phi + -psi",
        })
    }
}

#[derive(Debug, thiserror::Error)]
#[error("satisfiability of {combination} undecided ({reason:?})")]
pub struct Undecided {
    pub combination: Combination,
    pub reason: Exhausted,
}

/// Full record of one pair classification.
#[derive(Debug)]
pub struct PairAnalysis {
    pub relation: Relation,
    /// Satisfiability of the four combinations, in [`Combination::ALL`] order.
    pub bits: [bool; 4],
    pub problems: Vec<ClauseSet>,
    pub verdicts: Vec<SatVerdict>,
}

impl PairAnalysis {
    pub fn explain(&self) -> String {
        let mut out = String::new();
        for (i, comb) in Combination::ALL.iter().enumerate() {
            let problem = &self.problems[i];
            out.push_str(&format!("SAT({comb}) = {}\n", self.bits[i]));
            match &self.verdicts[i] {
                SatVerdict::Sat(m) => {
                    out.push_str("  model:\n");
                    for line in m.interpretation().display(&problem.signature).lines() {
                        out.push_str(&format!("    {line}\n"));
                    }
                }
                SatVerdict::Unsat(r) => {
                    out.push_str(&format!("  refutation ({} steps):\n", r.step_count()));
                    for line in r.display(&problem.signature).lines() {
                        out.push_str(&format!("    {line}\n"));
                    }
                }
                SatVerdict::Undecided(e) => out.push_str(&format!("  undecided: {e:?}\n")),
            }
        }
        out
    }
}

/// Runs the four satisfiability checks and maps them to a relation.
pub fn analyze_pair(
    phi: &Formula,
    psi: &Formula,
    axioms: &AxiomSet,
    limits: &Limits,
) -> Result<PairAnalysis, Undecided> {
    let mut clausifier = Clausifier::new();
    let axiom_clauses: Vec<Clause> = axioms.formulas().flat_map(|f| clausifier.clausify(f)).collect();
    let not_phi = Formula::not(phi.clone());
    let not_psi = Formula::not(psi.clone());
    let left = [clausifier.clausify(phi), clausifier.clausify(&not_phi)];
    let right = [clausifier.clausify(psi), clausifier.clausify(&not_psi)];
    let signature = clausifier.into_signature();

    let mut bits = [false; 4];
    let mut problems = Vec::with_capacity(4);
    let mut verdicts = Vec::with_capacity(4);
    for (i, comb) in Combination::ALL.iter().enumerate() {
        let (lp, rp) = comb.polarity();
        let clauses = axiom_clauses
            .iter()
            .chain(&left[usize::from(!lp)])
            .chain(&right[usize::from(!rp)])
            .cloned()
            .collect();
        let problem = ClauseSet { signature: signature.clone(), clauses };
        let verdict = check_sat(&problem, limits);
        match verdict.is_sat() {
            Some(b) => bits[i] = b,
            None => {
                let SatVerdict::Undecided(reason) = verdict else { unreachable!() };
                return Err(Undecided { combination: *comb, reason });
            }
        }
        problems.push(problem);
        verdicts.push(verdict);
    }
    let relation = Relation::from_bits(bits[0], bits[1], bits[2], bits[3]);
    Ok(PairAnalysis { relation, bits, problems, verdicts })
}

/// The entailment relation between `phi` and `psi` given (already filtered)
/// axioms.
pub fn classify_pair(
    phi: &Formula,
    psi: &Formula,
    axioms: &AxiomSet,
    limits: &Limits,
) -> Result<Relation, Undecided> {
    analyze_pair(phi, psi, axioms, limits).map(|a| a.relation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fol::{compile_axioms, filter_axioms, translate, Term, X};
    use crate::lang::{parse_str, Language};

    fn lit(positive: bool, pred: u32, args: Vec<Term>) -> Literal {
        Literal { positive, pred, args }
    }

    fn set(clauses: Vec<Clause>, preds: &[(&str, usize)], funcs: &[usize]) -> ClauseSet {
        let mut signature = Signature::default();
        for (p, a) in preds {
            signature.intern_pred(p, *a);
        }
        for a in funcs {
            signature.new_func(*a);
        }
        ClauseSet { signature, clauses }
    }

    #[test]
    fn immediate_contradiction_is_unsat() {
        let s = set(
            vec![
                Clause::new(vec![lit(true, 0, vec![Term::constant(0)])]),
                Clause::new(vec![lit(false, 0, vec![Term::Var(0)])]),
            ],
            &[("A", 1)],
            &[0],
        );
        match check_sat(&s, &Limits::default()) {
            SatVerdict::Unsat(r) => r.check(&s.clauses).unwrap(),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn implication_is_satisfied_vacuously_in_one_element() {
        let s = set(
            vec![Clause::new(vec![lit(false, 0, vec![Term::Var(0)]), lit(true, 1, vec![Term::Var(0)])])],
            &[("A", 1), ("B", 1)],
            &[],
        );
        match check_sat(&s, &Limits::default()) {
            SatVerdict::Sat(m) => assert_eq!(m.size(), 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn resolution_takes_over_past_the_domain_bound() {
        // exists x A(x), all x -A(x) is unsat in every domain
        let f = [
            Formula::exists(X, Formula::atom("A", &[X])),
            Formula::forall(X, Formula::not(Formula::atom("A", &[X]))),
        ];
        let s = ClauseSet::from_formulas(&f);
        let limits = Limits { max_domain: 0, max_resolution_steps: 100 };
        assert!(matches!(check_sat(&s, &limits), SatVerdict::Unsat(_)));
    }

    fn pair(a: &str, b: &str) -> (Formula, Formula, AxiomSet) {
        let lang = Language::default_language();
        let phi = translate(&parse_str(a, &lang.vocabulary).unwrap());
        let psi = translate(&parse_str(b, &lang.vocabulary).unwrap());
        let axioms = filter_axioms(&compile_axioms(&lang), &phi, &psi);
        (phi, psi, axioms)
    }

    #[test]
    fn entailment_direction_of_first_example_pair_is_refuted() {
        let (phi, psi, axioms) =
            pair("all Europeans like some Italians", "not some Italians not like some Europeans");
        let mut formulas: Vec<Formula> = axioms.formulas().cloned().collect();
        formulas.push(phi);
        formulas.push(Formula::not(psi));
        let s = ClauseSet::from_formulas(&formulas);
        match check_sat(&s, &Limits::default()) {
            SatVerdict::Unsat(r) => r.check(&s.clauses).unwrap(),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn identical_sentences_are_equivalent() {
        let (phi, psi, axioms) = pair("some Romans not love all children", "some Romans not love all children");
        let a = analyze_pair(&phi, &psi, &axioms, &Limits::default()).unwrap();
        assert_eq!(a.relation, Relation::Equivalence);
        assert!(!a.bits[1] && !a.bits[2]);
    }

    #[test]
    fn example_pairs() {
        let cases = [
            ("<", "all Europeans like some Italians", "not some Italians not like some Europeans"),
            ("v", "all Germans not hate all not Italians", "not all not Italians love some not Italians"),
            ("#", "all children not hate all Romans", "all not Italians not fear all Romans"),
            ("|", "some not Europeans like all not Italians", "not some not Italians like all not Italians"),
            ("^", "not all not Germans not fear all Europeans", "not some not Germans fear all Europeans"),
        ];
        for (rel, a, b) in cases {
            let (phi, psi, axioms) = pair(a, b);
            let got = classify_pair(&phi, &psi, &axioms, &Limits::default()).unwrap();
            assert_eq!(got.symbol(), rel, "{a} / {b}");
            let back = classify_pair(&psi, &phi, &axioms, &Limits::default()).unwrap();
            assert_eq!(back, got.converse());
        }
    }

    #[test]
    fn negation_pair_has_no_joint_models() {
        let (phi, psi, axioms) =
            pair("not all not Germans not fear all Europeans", "not some not Germans fear all Europeans");
        let a = analyze_pair(&phi, &psi, &axioms, &Limits::default()).unwrap();
        assert_eq!(a.bits, [false, true, true, false]);
        for (p, v) in a.problems.iter().zip(&a.verdicts) {
            match v {
                SatVerdict::Sat(m) => assert!(p.clauses.iter().all(|c| m.interpretation().satisfies(c))),
                SatVerdict::Unsat(r) => r.check(&p.clauses).unwrap(),
                SatVerdict::Undecided(_) => panic!(),
            }
        }
        assert!(a.explain().contains("refutation"));
    }
}
