//! The seven entailment relations between two sets (or two sentences, read as
//! the sets of models in which they hold).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// One of the seven set-theoretic entailment relations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    /// `#`: none of the other six hold.
    Independence,
    /// `<`: strict subset.
    Forward,
    /// `>`: strict superset.
    Reverse,
    /// `=`: same set.
    Equivalence,
    /// `|`: disjoint but not exhaustive.
    Alternation,
    /// `^`: disjoint and exhaustive (complements).
    Negation,
    /// `v`: overlapping and exhaustive.
    Cover,
}

impl Relation {
    /// Canonical ordering, also used for class indices and confusion matrices.
    pub const ALL: [Relation; 7] = [
        Relation::Independence,
        Relation::Forward,
        Relation::Reverse,
        Relation::Equivalence,
        Relation::Alternation,
        Relation::Negation,
        Relation::Cover,
    ];

    pub const COUNT: usize = 7;

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Independence => "#",
            Relation::Forward => "<",
            Relation::Reverse => ">",
            Relation::Equivalence => "=",
            Relation::Alternation => "|",
            Relation::Negation => "^",
            Relation::Cover => "v",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Relation> {
        Relation::ALL.iter().copied().find(|r| r.symbol() == s)
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Relation> {
        Relation::ALL.get(i).copied()
    }

    /// The relation that holds with the arguments swapped.
    pub fn converse(self) -> Relation {
        match self {
            Relation::Forward => Relation::Reverse,
            Relation::Reverse => Relation::Forward,
            other => other,
        }
    }

    /// Maps the four joint-satisfiability bits of a pair `(x, y)` to a relation.
    ///
    /// `both = x ∩ y ≠ ∅`, `left_only = x ∖ y ≠ ∅`, `right_only = y ∖ x ≠ ∅`,
    /// `neither = D ∖ (x ∪ y) ≠ ∅`. The precedence order makes the mapping total,
    /// including degenerate (empty or universal) sets.
    pub fn from_bits(both: bool, left_only: bool, right_only: bool, neither: bool) -> Relation {
        match (both, left_only, right_only, neither) {
            (_, false, false, _) => Relation::Equivalence,
            (_, false, true, _) => Relation::Forward,
            (_, true, false, _) => Relation::Reverse,
            (false, _, _, false) => Relation::Negation,
            (false, _, _, true) => Relation::Alternation,
            (true, true, true, false) => Relation::Cover,
            _ => Relation::Independence,
        }
    }

    /// Relation between two finite subsets of the universe `0..universe`.
    pub fn between_sets(x: &[u32], y: &[u32], universe: u32) -> Relation {
        let in_x = |e: u32| x.contains(&e);
        let in_y = |e: u32| y.contains(&e);
        let mut bits = [false; 4];
        for e in 0..universe {
            let idx = match (in_x(e), in_y(e)) {
                (true, true) => 0,
                (true, false) => 1,
                (false, true) => 2,
                (false, false) => 3,
            };
            bits[idx] = true;
        }
        Relation::from_bits(bits[0], bits[1], bits[2], bits[3])
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("unknown relation symbol `{0}`")]
pub struct UnknownRelation(pub String);

impl FromStr for Relation {
    type Err = UnknownRelation;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Relation::from_symbol(s).ok_or_else(|| UnknownRelation(s.to_string()))
    }
}

impl Serialize for Relation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.symbol())
    }
}

impl<'de> Deserialize<'de> for Relation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
