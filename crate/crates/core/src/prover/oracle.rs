//! Exhaustive model enumeration, used as an independent check on the prover.
//!
//! Every interpretation of a fixed predicate signature over domains
//! `1..=max_domain` is enumerated once; a formula is then summarized by the
//! bitset of interpretations satisfying it.

use std::collections::BTreeSet;

use crate::fol::{AxiomSet, Formula, Var};
use crate::relation::Relation;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("{count} interpretations exceed the cap of {cap}")]
    TooManyInterpretations { count: u128, cap: u64 },
    #[error("predicate {0} is not in the table's signature")]
    UnknownPredicate(String),
    #[error("predicate {0} has arity {1}; at most 2 is supported")]
    Arity(String, usize),
}

/// Satisfying interpretations of one formula, as a bitset over the table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Models(Vec<u64>);

impl Models {
    pub fn and(&self, other: &Models) -> Models {
        Models(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    pub fn not(&self, total: usize) -> Models {
        let mut words: Vec<u64> = self.0.iter().map(|w| !w).collect();
        let tail = total % 64;
        if tail != 0 {
            *words.last_mut().unwrap() &= (1u64 << tail) - 1;
        }
        Models(words)
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|w| *w == 0)
    }

    fn intersects3(a: &Models, b: &Models, c: &Models) -> bool {
        a.0.iter().zip(&b.0).zip(&c.0).any(|((x, y), z)| x & y & z != 0)
    }
}

#[derive(Debug)]
struct Layer {
    size: usize,
    /// bit offset of each predicate inside an interpretation mask
    offsets: Vec<usize>,
    bits: usize,
}

#[derive(Debug)]
pub struct ModelTable {
    preds: Vec<(String, usize)>,
    layers: Vec<Layer>,
    total: usize,
}

enum Compiled {
    Atom(usize, [Var; 2], usize),
    Not(Box<Compiled>),
    And(Box<Compiled>, Box<Compiled>),
    Or(Box<Compiled>, Box<Compiled>),
    Implies(Box<Compiled>, Box<Compiled>),
    Forall(Var, Box<Compiled>),
    Exists(Var, Box<Compiled>),
}

impl ModelTable {
    /// Enumerates all interpretations of `preds` up to `max_domain` elements,
    /// refusing when their number exceeds `cap`.
    pub fn new(
        preds: &BTreeSet<(String, usize)>,
        max_domain: usize,
        cap: u64,
    ) -> Result<ModelTable, OracleError> {
        let preds: Vec<(String, usize)> = preds.iter().cloned().collect();
        if let Some((p, a)) = preds.iter().find(|(_, a)| *a > 2) {
            return Err(OracleError::Arity(p.clone(), *a));
        }
        let mut layers = Vec::new();
        let mut count: u128 = 0;
        for size in 1..=max_domain {
            let mut offsets = Vec::with_capacity(preds.len());
            let mut bits = 0usize;
            for (_, arity) in &preds {
                offsets.push(bits);
                bits += size.pow(*arity as u32);
            }
            count += if bits >= 127 { u128::MAX / 2 } else { 1u128 << bits };
            if bits > 63 || count > cap as u128 {
                return Err(OracleError::TooManyInterpretations { count, cap });
            }
            layers.push(Layer { size, offsets, bits });
        }
        Ok(ModelTable { preds, layers, total: count as usize })
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    fn compile(&self, f: &Formula) -> Result<Compiled, OracleError> {
        let c = |g: &Formula| self.compile(g).map(Box::new);
        Ok(match f {
            Formula::Atom(a) => {
                let idx = self
                    .preds
                    .iter()
                    .position(|(p, ar)| *p == a.pred && *ar == a.args.len())
                    .ok_or_else(|| OracleError::UnknownPredicate(a.pred.clone()))?;
                let mut args = [0; 2];
                args[..a.args.len()].copy_from_slice(&a.args);
                Compiled::Atom(idx, args, a.args.len())
            }
            Formula::Not(g) => Compiled::Not(c(g)?),
            Formula::And(a, b) => Compiled::And(c(a)?, c(b)?),
            Formula::Or(a, b) => Compiled::Or(c(a)?, c(b)?),
            Formula::Implies(a, b) => Compiled::Implies(c(a)?, c(b)?),
            Formula::Forall(v, g) => Compiled::Forall(*v, c(g)?),
            Formula::Exists(v, g) => Compiled::Exists(*v, c(g)?),
        })
    }

    /// The set of interpretations in which the closed formula `f` is true.
    pub fn models(&self, f: &Formula) -> Result<Models, OracleError> {
        let compiled = self.compile(f)?;
        let max_var = f.bound_vars().into_iter().chain(f.free_vars()).max().unwrap_or(0);
        let mut env = vec![0usize; max_var as usize + 1];
        let mut words = vec![0u64; self.total.div_ceil(64)];
        let mut index = 0usize;
        for layer in &self.layers {
            for mask in 0..(1u64 << layer.bits) {
                if eval(&compiled, layer, mask, &mut env) {
                    words[index / 64] |= 1 << (index % 64);
                }
                index += 1;
            }
        }
        Ok(Models(words))
    }

    /// Interpretations satisfying every formula.
    pub fn models_of_all<'a>(
        &self,
        formulas: impl IntoIterator<Item = &'a Formula>,
    ) -> Result<Models, OracleError> {
        let mut acc = Models(vec![0; self.total.div_ceil(64)]).not(self.total);
        for f in formulas {
            acc = acc.and(&self.models(f)?);
        }
        Ok(acc)
    }

    /// Relation between the model sets of `phi` and `psi` restricted to models
    /// of `axioms`.
    pub fn label(&self, axioms: &Models, phi: &Models, psi: &Models) -> Relation {
        let not_phi = phi.not(self.total);
        let not_psi = psi.not(self.total);
        Relation::from_bits(
            Models::intersects3(axioms, phi, psi),
            Models::intersects3(axioms, phi, &not_psi),
            Models::intersects3(axioms, &not_phi, psi),
            Models::intersects3(axioms, &not_phi, &not_psi),
        )
    }
}

fn eval(f: &Compiled, layer: &Layer, mask: u64, env: &mut [usize]) -> bool {
    match f {
        Compiled::Atom(p, args, arity) => {
            let mut cell = 0;
            for k in (0..*arity).rev() {
                cell = cell * layer.size + env[args[k] as usize];
            }
            mask >> (layer.offsets[*p] + cell) & 1 == 1
        }
        Compiled::Not(g) => !eval(g, layer, mask, env),
        Compiled::And(a, b) => eval(a, layer, mask, env) && eval(b, layer, mask, env),
        Compiled::Or(a, b) => eval(a, layer, mask, env) || eval(b, layer, mask, env),
        Compiled::Implies(a, b) => !eval(a, layer, mask, env) || eval(b, layer, mask, env),
        Compiled::Forall(v, g) => {
            let saved = env[*v as usize];
            let r = (0..layer.size).all(|d| {
                env[*v as usize] = d;
                eval(g, layer, mask, env)
            });
            env[*v as usize] = saved;
            r
        }
        Compiled::Exists(v, g) => {
            let saved = env[*v as usize];
            let r = (0..layer.size).any(|d| {
                env[*v as usize] = d;
                eval(g, layer, mask, env)
            });
            env[*v as usize] = saved;
            r
        }
    }
}

/// Labels a pair by enumerating every interpretation of the occurring
/// predicates over domains of at most `max_domain` elements.
pub fn brute_force_label(
    phi: &Formula,
    psi: &Formula,
    axioms: &AxiomSet,
    max_domain: usize,
    cap: u64,
) -> Result<Relation, OracleError> {
    let mut preds = phi.predicates();
    preds.extend(psi.predicates());
    for f in axioms.formulas() {
        preds.extend(f.predicates());
    }
    let table = ModelTable::new(&preds, max_domain, cap)?;
    let a = table.models_of_all(axioms.formulas())?;
    Ok(table.label(&a, &table.models(phi)?, &table.models(psi)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fol::{X, Y};

    fn preds(list: &[(&str, usize)]) -> BTreeSet<(String, usize)> {
        list.iter().map(|(p, a)| (p.to_string(), *a)).collect()
    }

    #[test]
    fn counts_interpretations_per_domain_size() {
        let t = ModelTable::new(&preds(&[("A", 1), ("r", 2)]), 2, 1 << 20).unwrap();
        // 2^(1+1) + 2^(2+4)
        assert_eq!(t.len(), 4 + 64);
    }

    #[test]
    fn cap_is_enforced() {
        let err = ModelTable::new(&preds(&[("r", 2)]), 3, 100).unwrap_err();
        assert!(matches!(err, OracleError::TooManyInterpretations { .. }));
    }

    #[test]
    fn exists_not_and_forall_are_complementary() {
        let t = ModelTable::new(&preds(&[("A", 1)]), 3, 1 << 20).unwrap();
        let all = t.models(&Formula::forall(X, Formula::atom("A", &[X]))).unwrap();
        let some_not = t
            .models(&Formula::exists(X, Formula::not(Formula::atom("A", &[X]))))
            .unwrap();
        assert_eq!(all.not(t.len()), some_not);
        // all-A holds in exactly one interpretation per domain size
        let count: u32 = all.0.iter().map(|w| w.count_ones()).sum();
        assert_eq!(count, 3);
    }

    #[test]
    fn binary_atoms_use_argument_order() {
        let t = ModelTable::new(&preds(&[("r", 2)]), 2, 1 << 20).unwrap();
        let sym = Formula::forall(
            X,
            Formula::forall(Y, Formula::implies(Formula::atom("r", &[X, Y]), Formula::atom("r", &[Y, X]))),
        );
        let m = t.models(&sym).unwrap();
        // size 1: both; size 2: r(0,1) and r(1,0) agree, diagonal free -> 8
        let count: u32 = m.0.iter().map(|w| w.count_ones()).sum();
        assert_eq!(count, 2 + 8);
    }

    #[test]
    fn identical_and_negated_formulas() {
        let phi = Formula::exists(X, Formula::and(Formula::atom("A", &[X]), Formula::atom("B", &[X])));
        let ax = AxiomSet::new();
        assert_eq!(brute_force_label(&phi, &phi, &ax, 3, 1 << 20).unwrap(), Relation::Equivalence);
        let neg = Formula::not(phi.clone());
        assert_eq!(brute_force_label(&phi, &neg, &ax, 3, 1 << 20).unwrap(), Relation::Negation);
    }
}
