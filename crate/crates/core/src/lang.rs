//! The artificial language: vocabulary, lexical taxonomy, fixed-shape grammar,
//! sentence sampling, parsing and rendering.
//!
//! Every sentence has the shape
//!
//! ```text
//! [not] Quant [not] Noun [not] Verb [not] Quant [not] Noun
//! ```
//!
//! where the object-determiner negation slot is only sampled when the
//! [`SlotPolicy`] enables it.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::relation::Relation;

pub const NOT: &str = "not";

#[derive(Debug, thiserror::Error)]
pub enum LangError {
    #[error("word class `{0}` is empty")]
    EmptyClass(&'static str),
    #[error("word `{0}` appears more than once")]
    DuplicateWord(String),
    #[error("`{0}` is reserved and cannot be used as a noun or verb")]
    ReservedWord(String),
    #[error("`{0}` is not a known noun or verb")]
    UnknownWord(String),
    #[error("`{0}` and `{1}` belong to different word classes")]
    CrossClass(String, String),
    #[error("pair ({0}, {1}) is assigned two different relations")]
    ConflictingRelation(String, String),
    #[error("self pair ({0}, {0}) must be `=`")]
    SelfRelation(String),
    #[error("no witness set for `{0}`")]
    MissingWitness(String),
    #[error("witness element {element} of `{word}` lies outside the universe 0..{universe}")]
    WitnessOutOfRange { word: String, element: u32, universe: u32 },
    #[error("taxonomy declares {word} {declared} {other} but the witness sets give {actual}")]
    Incoherent { word: String, other: String, declared: Relation, actual: Relation },
    #[error("invalid language config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantifier {
    All,
    Some,
}

impl Quantifier {
    pub fn as_str(self) -> &'static str {
        match self {
            Quantifier::All => "all",
            Quantifier::Some => "some",
        }
    }

    pub fn from_word(w: &str) -> Option<Quantifier> {
        match w {
            "all" => Some(Quantifier::All),
            "some" => Some(Quantifier::Some),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WordClass {
    Noun,
    Verb,
}

impl WordClass {
    pub fn name(self) -> &'static str {
        match self {
            WordClass::Noun => "noun",
            WordClass::Verb => "verb",
        }
    }
}

/// The lexicon of the language. The adverbs (`not` and the empty string) are fixed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    quantifiers: Vec<Quantifier>,
    nouns: Vec<String>,
    verbs: Vec<String>,
}

impl Vocabulary {
    pub fn new(
        quantifiers: Vec<Quantifier>,
        nouns: Vec<String>,
        verbs: Vec<String>,
    ) -> Result<Self, LangError> {
        if quantifiers.is_empty() {
            return Err(LangError::EmptyClass("quantifier"));
        }
        if nouns.is_empty() {
            return Err(LangError::EmptyClass("noun"));
        }
        if verbs.is_empty() {
            return Err(LangError::EmptyClass("verb"));
        }
        let mut seen = std::collections::HashSet::new();
        for q in &quantifiers {
            if !seen.insert(q.as_str().to_string()) {
                return Err(LangError::DuplicateWord(q.as_str().to_string()));
            }
        }
        for w in nouns.iter().chain(&verbs) {
            if w == NOT || w.is_empty() || Quantifier::from_word(w).is_some() {
                return Err(LangError::ReservedWord(w.clone()));
            }
            if w.chars().any(char::is_whitespace) {
                return Err(LangError::ReservedWord(w.clone()));
            }
            if !seen.insert(w.clone()) {
                return Err(LangError::DuplicateWord(w.clone()));
            }
        }
        Ok(Vocabulary { quantifiers, nouns, verbs })
    }

    pub fn quantifiers(&self) -> &[Quantifier] {
        &self.quantifiers
    }

    pub fn nouns(&self) -> &[String] {
        &self.nouns
    }

    pub fn verbs(&self) -> &[String] {
        &self.verbs
    }

    pub fn class_of(&self, w: &str) -> Option<WordClass> {
        if self.nouns.iter().any(|n| n == w) {
            Some(WordClass::Noun)
        } else if self.verbs.iter().any(|v| v == w) {
            Some(WordClass::Verb)
        } else {
            None
        }
    }

    /// Every surface token the language can produce, sorted.
    pub fn tokens(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .quantifiers
            .iter()
            .map(|q| q.as_str().to_string())
            .chain(std::iter::once(NOT.to_string()))
            .chain(self.nouns.iter().cloned())
            .chain(self.verbs.iter().cloned())
            .collect();
        out.sort();
        out
    }

    /// Restricts the vocabulary to the given nouns and verbs (order preserved).
    pub fn restrict(&self, nouns: &[&str], verbs: &[&str]) -> Result<Vocabulary, LangError> {
        for w in nouns.iter().chain(verbs) {
            if self.class_of(w).is_none() {
                return Err(LangError::UnknownWord(w.to_string()));
            }
        }
        Vocabulary::new(
            self.quantifiers.clone(),
            nouns.iter().map(|s| s.to_string()).collect(),
            verbs.iter().map(|s| s.to_string()).collect(),
        )
    }
}

/// Which negation slots the sampler may fill.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotPolicy {
    /// Allow `not` in front of the object quantifier.
    pub object_determiner: bool,
}

impl SlotPolicy {
    pub fn four_slots() -> Self {
        SlotPolicy { object_determiner: false }
    }

    pub fn five_slots() -> Self {
        SlotPolicy { object_determiner: true }
    }

    pub fn slot_count(self) -> usize {
        if self.object_determiner {
            5
        } else {
            4
        }
    }
}

/// Pairwise lexical relations inside each word class.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Taxonomy {
    nouns: HashMap<(String, String), Relation>,
    verbs: HashMap<(String, String), Relation>,
}

impl Taxonomy {
    /// Stores `w rel v` together with its converse. Rejects conflicts.
    pub fn insert(&mut self, class: WordClass, w: &str, rel: Relation, v: &str) -> Result<(), LangError> {
        if w == v {
            return if rel == Relation::Equivalence {
                Ok(())
            } else {
                Err(LangError::SelfRelation(w.to_string()))
            };
        }
        let map = match class {
            WordClass::Noun => &mut self.nouns,
            WordClass::Verb => &mut self.verbs,
        };
        for (key, r) in [((w, v), rel), ((v, w), rel.converse())] {
            let key = (key.0.to_string(), key.1.to_string());
            match map.get(&key) {
                Some(existing) if *existing != r => {
                    return Err(LangError::ConflictingRelation(w.to_string(), v.to_string()))
                }
                _ => {
                    map.insert(key, r);
                }
            }
        }
        Ok(())
    }

    fn get(&self, class: WordClass, w: &str, v: &str) -> Relation {
        if w == v {
            return Relation::Equivalence;
        }
        let map = match class {
            WordClass::Noun => &self.nouns,
            WordClass::Verb => &self.verbs,
        };
        map.get(&(w.to_string(), v.to_string()))
            .copied()
            .unwrap_or(Relation::Independence)
    }

    /// Stored pairs of one class with `w < v` lexicographically (one entry per
    /// unordered pair), sorted.
    pub fn pairs(&self, class: WordClass) -> Vec<(&str, Relation, &str)> {
        let map = match class {
            WordClass::Noun => &self.nouns,
            WordClass::Verb => &self.verbs,
        };
        let mut out: Vec<_> = map
            .iter()
            .filter(|((w, v), _)| w < v)
            .map(|((w, v), r)| (w.as_str(), *r, v.as_str()))
            .collect();
        out.sort();
        out
    }
}

/// Explicit finite sets standing in for word extensions, used to validate that a
/// taxonomy is realizable.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SetWitness {
    pub noun_universe: u32,
    pub verb_universe: u32,
    pub sets: BTreeMap<String, Vec<u32>>,
}

/// A vocabulary with its taxonomy, as loaded from a language config file.
#[derive(Clone, Debug)]
pub struct Language {
    pub vocabulary: Vocabulary,
    pub taxonomy: Taxonomy,
    pub witness: Option<SetWitness>,
}

#[derive(Serialize, Deserialize)]
struct LanguageFile {
    #[serde(default = "default_quantifiers")]
    quantifiers: Vec<Quantifier>,
    nouns: Vec<String>,
    verbs: Vec<String>,
    #[serde(default)]
    noun_relations: Vec<(String, Relation, String)>,
    #[serde(default)]
    verb_relations: Vec<(String, Relation, String)>,
    #[serde(default)]
    witness_universe: Option<UniverseFile>,
    #[serde(default)]
    set_witness: BTreeMap<String, Vec<u32>>,
}

#[derive(Serialize, Deserialize)]
struct UniverseFile {
    nouns: u32,
    verbs: u32,
}

fn default_quantifiers() -> Vec<Quantifier> {
    vec![Quantifier::All, Quantifier::Some]
}

const DEFAULT_LANGUAGE: &str = include_str!("../assets/default_language.json");

impl Language {
    /// The built-in five-noun, four-verb language.
    pub fn default_language() -> Language {
        Language::from_json(DEFAULT_LANGUAGE).expect("built-in language config is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Language, LangError> {
        let text = std::fs::read_to_string(path)?;
        Language::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Language, LangError> {
        let file: LanguageFile =
            serde_json::from_str(text).map_err(|e| LangError::Config(e.to_string()))?;
        let vocabulary = Vocabulary::new(file.quantifiers, file.nouns, file.verbs)?;
        let mut taxonomy = Taxonomy::default();
        for (class, rels) in [
            (WordClass::Noun, &file.noun_relations),
            (WordClass::Verb, &file.verb_relations),
        ] {
            for (w, r, v) in rels {
                for word in [w, v] {
                    if vocabulary.class_of(word) != Some(class) {
                        return Err(LangError::UnknownWord(word.clone()));
                    }
                }
                taxonomy.insert(class, w, *r, v)?;
            }
        }
        let witness = match file.witness_universe {
            Some(u) => Some(SetWitness {
                noun_universe: u.nouns,
                verb_universe: u.verbs,
                sets: file.set_witness,
            }),
            None if file.set_witness.is_empty() => None,
            None => return Err(LangError::Config("set_witness without witness_universe".into())),
        };
        let lang = Language { vocabulary, taxonomy, witness };
        if lang.witness.is_some() {
            lang.check_coherence()?;
        }
        Ok(lang)
    }

    pub fn to_json(&self) -> String {
        let rels = |class| {
            self.taxonomy
                .pairs(class)
                .into_iter()
                .map(|(w, r, v)| (w.to_string(), r, v.to_string()))
                .collect()
        };
        let file = LanguageFile {
            quantifiers: self.vocabulary.quantifiers.clone(),
            nouns: self.vocabulary.nouns.clone(),
            verbs: self.vocabulary.verbs.clone(),
            noun_relations: rels(WordClass::Noun),
            verb_relations: rels(WordClass::Verb),
            witness_universe: self
                .witness
                .as_ref()
                .map(|w| UniverseFile { nouns: w.noun_universe, verbs: w.verb_universe }),
            set_witness: self.witness.as_ref().map(|w| w.sets.clone()).unwrap_or_default(),
        };
        serde_json::to_string_pretty(&file).expect("language config serializes")
    }

    /// Relation between two words of the same class.
    pub fn lexical_relation(&self, w: &str, v: &str) -> Result<Relation, LangError> {
        let cw = self
            .vocabulary
            .class_of(w)
            .ok_or_else(|| LangError::UnknownWord(w.to_string()))?;
        let cv = self
            .vocabulary
            .class_of(v)
            .ok_or_else(|| LangError::UnknownWord(v.to_string()))?;
        if cw != cv {
            return Err(LangError::CrossClass(w.to_string(), v.to_string()));
        }
        Ok(self.taxonomy.get(cw, w, v))
    }

    /// Interprets every word as its witness set and checks that each pairwise
    /// relation (stored or implicit `#`) holds between the sets.
    pub fn check_coherence(&self) -> Result<(), LangError> {
        let witness = self
            .witness
            .as_ref()
            .ok_or_else(|| LangError::Config("no set witness configured".into()))?;
        for (class, words, universe) in [
            (WordClass::Noun, &self.vocabulary.nouns, witness.noun_universe),
            (WordClass::Verb, &self.vocabulary.verbs, witness.verb_universe),
        ] {
            let set = |w: &String| -> Result<&Vec<u32>, LangError> {
                let s = witness
                    .sets
                    .get(w)
                    .ok_or_else(|| LangError::MissingWitness(w.clone()))?;
                if let Some(&e) = s.iter().find(|&&e| e >= universe) {
                    return Err(LangError::WitnessOutOfRange { word: w.clone(), element: e, universe });
                }
                Ok(s)
            };
            for w in words {
                for v in words {
                    let actual = Relation::between_sets(set(w)?, set(v)?, universe);
                    let declared = self.taxonomy.get(class, w, v);
                    if actual != declared {
                        return Err(LangError::Incoherent {
                            word: w.clone(),
                            other: v.clone(),
                            declared,
                            actual,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Same language restricted to a sub-vocabulary; the taxonomy keeps only
    /// pairs inside it.
    pub fn restrict(&self, nouns: &[&str], verbs: &[&str]) -> Result<Language, LangError> {
        let vocabulary = self.vocabulary.restrict(nouns, verbs)?;
        let mut taxonomy = Taxonomy::default();
        for (class, keep) in [(WordClass::Noun, nouns), (WordClass::Verb, verbs)] {
            for (w, r, v) in self.taxonomy.pairs(class) {
                if keep.contains(&w) && keep.contains(&v) {
                    taxonomy.insert(class, w, r, v)?;
                }
            }
        }
        Ok(Language { vocabulary, taxonomy, witness: None })
    }
}

/// Determiner plus noun, each optionally negated.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NounPhrase {
    pub det_neg: bool,
    pub quant: Quantifier,
    pub noun_neg: bool,
    pub noun: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sentence {
    pub subject: NounPhrase,
    pub verb_neg: bool,
    pub verb: String,
    pub object: NounPhrase,
}

impl Sentence {
    pub fn negation_count(&self) -> usize {
        [
            self.subject.det_neg,
            self.subject.noun_neg,
            self.verb_neg,
            self.object.det_neg,
            self.object.noun_neg,
        ]
        .iter()
        .filter(|&&b| b)
        .count()
    }

    /// Number of surface tokens.
    pub fn len(&self) -> usize {
        5 + self.negation_count()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn tokens(&self) -> Vec<&str> {
        let mut out = Vec::with_capacity(self.len());
        push_np(&mut out, &self.subject);
        if self.verb_neg {
            out.push(NOT);
        }
        out.push(&self.verb);
        push_np(&mut out, &self.object);
        out
    }

    /// Renders the sentence as a space-separated surface string.
    pub fn render(&self) -> String {
        self.tokens().join(" ")
    }

    /// Applies `f` to every noun and verb (quantifiers and negations untouched).
    pub fn map_words(&self, mut f: impl FnMut(&str) -> String) -> Sentence {
        let mut s = self.clone();
        s.subject.noun = f(&self.subject.noun);
        s.verb = f(&self.verb);
        s.object.noun = f(&self.object.noun);
        s
    }

    pub fn content_words(&self) -> [&str; 3] {
        [&self.subject.noun, &self.verb, &self.object.noun]
    }
}

fn push_np<'a>(out: &mut Vec<&'a str>, np: &'a NounPhrase) {
    if np.det_neg {
        out.push(NOT);
    }
    out.push(np.quant.as_str());
    if np.noun_neg {
        out.push(NOT);
    }
    out.push(&np.noun);
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Samples one sentence with every slot drawn uniformly and independently.
pub fn generate_sentence<R: Rng + ?Sized>(
    rng: &mut R,
    vocab: &Vocabulary,
    policy: SlotPolicy,
) -> Sentence {
    let mut pick = |words: &[String]| words[rng.random_range(0..words.len())].clone();
    let subj_noun = pick(&vocab.nouns);
    let verb = pick(&vocab.verbs);
    let obj_noun = pick(&vocab.nouns);
    let quant = |rng: &mut R| vocab.quantifiers[rng.random_range(0..vocab.quantifiers.len())];
    let subj_quant = quant(rng);
    let obj_quant = quant(rng);
    Sentence {
        subject: NounPhrase {
            det_neg: rng.random(),
            quant: subj_quant,
            noun_neg: rng.random(),
            noun: subj_noun,
        },
        verb_neg: rng.random(),
        verb,
        object: NounPhrase {
            det_neg: policy.object_determiner && rng.random::<bool>(),
            quant: obj_quant,
            noun_neg: rng.random(),
            noun: obj_noun,
        },
    }
}

/// Every sentence licensed by the vocabulary and slot policy, in a fixed order.
pub fn enumerate_sentences(vocab: &Vocabulary, policy: SlotPolicy) -> Vec<Sentence> {
    let slots = policy.slot_count();
    let mut out = Vec::new();
    for sq in &vocab.quantifiers {
        for sn in &vocab.nouns {
            for v in &vocab.verbs {
                for oq in &vocab.quantifiers {
                    for on in &vocab.nouns {
                        for mask in 0u32..(1 << slots) {
                            let bit = |i: u32| mask & (1 << i) != 0;
                            out.push(Sentence {
                                subject: NounPhrase {
                                    det_neg: bit(0),
                                    quant: *sq,
                                    noun_neg: bit(1),
                                    noun: sn.clone(),
                                },
                                verb_neg: bit(2),
                                verb: v.clone(),
                                object: NounPhrase {
                                    det_neg: slots == 5 && bit(4),
                                    quant: *oq,
                                    noun_neg: bit(3),
                                    noun: on.clone(),
                                },
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("unknown token `{token}` at position {position}")]
    UnknownToken { position: usize, token: String },
    #[error("unexpected token `{token}` at position {position}, expected {expected}")]
    Unexpected { position: usize, token: String, expected: &'static str },
    #[error("sentence ends after {len} tokens, expected {expected}")]
    UnexpectedEnd { len: usize, expected: &'static str },
}

impl ParseError {
    /// 1-based token position of the error.
    pub fn position(&self) -> usize {
        match self {
            ParseError::UnknownToken { position, .. } | ParseError::Unexpected { position, .. } => {
                *position
            }
            ParseError::UnexpectedEnd { len, .. } => len + 1,
        }
    }
}

/// How noun and verb slots are checked while parsing.
enum Lexicon<'a> {
    Vocabulary(&'a Vocabulary),
    /// Any token other than a quantifier or `not` is accepted as a content word.
    Open,
}

impl Lexicon<'_> {
    fn accepts(&self, token: &str, class: WordClass) -> Result<bool, ()> {
        match self {
            Lexicon::Vocabulary(v) => match v.class_of(token) {
                Some(c) => Ok(c == class),
                None => Err(()),
            },
            Lexicon::Open => Ok(token != NOT && Quantifier::from_word(token).is_none()),
        }
    }
}

/// Parses surface tokens against the vocabulary.
pub fn parse<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary) -> Result<Sentence, ParseError> {
    Parser { tokens, pos: 0, lexicon: Lexicon::Vocabulary(vocab) }.sentence()
}

/// Parses surface tokens by position only, accepting any content word. Used for
/// datasets whose words were substituted with out-of-vocabulary replacements.
pub fn parse_open<S: AsRef<str>>(tokens: &[S]) -> Result<Sentence, ParseError> {
    Parser { tokens, pos: 0, lexicon: Lexicon::Open }.sentence()
}

pub fn parse_str(text: &str, vocab: &Vocabulary) -> Result<Sentence, ParseError> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    parse(&tokens, vocab)
}

struct Parser<'a, S> {
    tokens: &'a [S],
    pos: usize,
    lexicon: Lexicon<'a>,
}

impl<S: AsRef<str>> Parser<'_, S> {
    fn peek(&self) -> Option<&str> {
        self.tokens.get(self.pos).map(|t| t.as_ref())
    }

    fn error(&self, expected: &'static str) -> ParseError {
        match self.peek() {
            None => ParseError::UnexpectedEnd { len: self.tokens.len(), expected },
            Some(tok) => {
                let known = tok == NOT
                    || Quantifier::from_word(tok).is_some()
                    || match &self.lexicon {
                        Lexicon::Vocabulary(v) => v.class_of(tok).is_some(),
                        Lexicon::Open => true,
                    };
                if known {
                    ParseError::Unexpected { position: self.pos + 1, token: tok.to_string(), expected }
                } else {
                    ParseError::UnknownToken { position: self.pos + 1, token: tok.to_string() }
                }
            }
        }
    }

    fn negation(&mut self) -> bool {
        if self.peek() == Some(NOT) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn quantifier(&mut self) -> Result<Quantifier, ParseError> {
        let q = self
            .peek()
            .and_then(Quantifier::from_word)
            .ok_or_else(|| self.error("a quantifier"))?;
        if let Lexicon::Vocabulary(v) = &self.lexicon {
            if !v.quantifiers.contains(&q) {
                return Err(ParseError::UnknownToken {
                    position: self.pos + 1,
                    token: q.as_str().to_string(),
                });
            }
        }
        self.pos += 1;
        Ok(q)
    }

    fn word(&mut self, class: WordClass, expected: &'static str) -> Result<String, ParseError> {
        let tok = self.peek().ok_or_else(|| self.error(expected))?;
        match self.lexicon.accepts(tok, class) {
            Ok(true) => {
                let w = tok.to_string();
                self.pos += 1;
                Ok(w)
            }
            Ok(false) => Err(self.error(expected)),
            Err(()) => Err(ParseError::UnknownToken { position: self.pos + 1, token: tok.to_string() }),
        }
    }

    fn noun_phrase(&mut self) -> Result<NounPhrase, ParseError> {
        let det_neg = self.negation();
        let quant = self.quantifier()?;
        let noun_neg = self.negation();
        let noun = self.word(WordClass::Noun, "a noun")?;
        Ok(NounPhrase { det_neg, quant, noun_neg, noun })
    }

    fn sentence(mut self) -> Result<Sentence, ParseError> {
        let subject = self.noun_phrase()?;
        let verb_neg = self.negation();
        let verb = self.word(WordClass::Verb, "a verb")?;
        let object = self.noun_phrase()?;
        if self.pos < self.tokens.len() {
            return Err(self.error("end of sentence"));
        }
        Ok(Sentence { subject, verb_neg, verb, object })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lang() -> Language {
        Language::default_language()
    }

    #[test]
    fn default_language_is_coherent() {
        let l = lang();
        assert_eq!(l.vocabulary.nouns().len(), 5);
        assert_eq!(l.vocabulary.verbs().len(), 4);
        l.check_coherence().unwrap();
    }

    #[test]
    fn lexical_relations() {
        let l = lang();
        assert_eq!(l.lexical_relation("Romans", "Italians").unwrap(), Relation::Forward);
        assert_eq!(l.lexical_relation("Italians", "Romans").unwrap(), Relation::Reverse);
        assert_eq!(l.lexical_relation("children", "Germans").unwrap(), Relation::Independence);
        assert_eq!(l.lexical_relation("love", "love").unwrap(), Relation::Equivalence);
        assert_eq!(l.lexical_relation("like", "hate").unwrap(), Relation::Alternation);
        assert!(matches!(
            l.lexical_relation("love", "Romans"),
            Err(LangError::CrossClass(..))
        ));
        assert!(matches!(l.lexical_relation("dogs", "Romans"), Err(LangError::UnknownWord(_))));
    }

    #[test]
    fn converse_closure() {
        let l = lang();
        for class_words in [l.vocabulary.nouns(), l.vocabulary.verbs()] {
            for w in class_words {
                for v in class_words {
                    let a = l.lexical_relation(w, v).unwrap();
                    let b = l.lexical_relation(v, w).unwrap();
                    assert_eq!(a, b.converse(), "{w} {v}");
                }
            }
        }
    }

    #[test]
    fn incoherent_witness_is_rejected() {
        let mut text: serde_json::Value =
            serde_json::from_str(DEFAULT_LANGUAGE).unwrap();
        text["set_witness"]["Romans"] = serde_json::json!([0, 9]);
        let err = Language::from_json(&text.to_string()).unwrap_err();
        assert!(matches!(err, LangError::Incoherent { .. }), "{err}");
    }

    #[test]
    fn conflicting_relation_is_rejected() {
        let mut t = Taxonomy::default();
        t.insert(WordClass::Noun, "a", Relation::Forward, "b").unwrap();
        t.insert(WordClass::Noun, "b", Relation::Reverse, "a").unwrap();
        assert!(t.insert(WordClass::Noun, "b", Relation::Forward, "a").is_err());
        assert!(t.insert(WordClass::Noun, "a", Relation::Forward, "a").is_err());
    }

    #[test]
    fn config_round_trips() {
        let l = lang();
        let again = Language::from_json(&l.to_json()).unwrap();
        assert_eq!(again.vocabulary, l.vocabulary);
        assert_eq!(again.taxonomy, l.taxonomy);
        assert_eq!(again.witness, l.witness);
    }

    #[test]
    fn vocabulary_validation() {
        assert!(matches!(
            Vocabulary::new(vec![Quantifier::All], vec![], vec!["v".into()]),
            Err(LangError::EmptyClass("noun"))
        ));
        assert!(matches!(
            Vocabulary::new(vec![Quantifier::All], vec!["a".into()], vec!["a".into()]),
            Err(LangError::DuplicateWord(_))
        ));
        assert!(matches!(
            Vocabulary::new(vec![Quantifier::All], vec!["not".into()], vec!["v".into()]),
            Err(LangError::ReservedWord(_))
        ));
    }

    #[test]
    fn parse_reference_examples() {
        let v = lang().vocabulary;
        let s = parse_str("all Europeans like some Italians", &v).unwrap();
        assert_eq!(s.negation_count(), 0);
        assert_eq!(s.subject.quant, Quantifier::All);
        assert_eq!(s.object.noun, "Italians");

        let s = parse_str("not all not Germans not fear all Europeans", &v).unwrap();
        assert!(s.subject.det_neg && s.subject.noun_neg && s.verb_neg);
        assert!(!s.object.det_neg && !s.object.noun_neg);
        assert_eq!(s.len(), 8);
    }

    #[test]
    fn parse_errors_carry_positions() {
        let v = lang().vocabulary;
        let err = parse(&["all", "all", "Romans"], &v).unwrap_err();
        assert_eq!(err.position(), 2);
        let err = parse_str("all dogs like some Italians", &v).unwrap_err();
        assert_eq!(err, ParseError::UnknownToken { position: 2, token: "dogs".into() });
        let err = parse_str("all Romans like some", &v).unwrap_err();
        assert!(matches!(err, ParseError::UnexpectedEnd { len: 4, .. }));
        let err = parse_str("all Romans like some Italians not", &v).unwrap_err();
        assert_eq!(err.position(), 6);
        let err = parse_str("all Romans Italians some Italians", &v).unwrap_err();
        assert_eq!(err.position(), 3);
    }

    #[test]
    fn open_parse_accepts_new_words() {
        let s = parse_open(&["all", "kids", "not", "adore", "some", "rodents"]).unwrap();
        assert_eq!(s.subject.noun, "kids");
        assert!(s.verb_neg);
        assert!(parse_open(&["all", "not", "some"]).is_err());
    }

    #[test]
    fn render_examples() {
        let v = lang().vocabulary;
        let mut s = parse_str("all Europeans like some Italians", &v).unwrap();
        assert_eq!(s.render(), "all Europeans like some Italians");
        s.verb_neg = true;
        assert_eq!(s.render(), "all Europeans not like some Italians");
    }

    #[test]
    fn all_negations_give_length_nine() {
        let v = lang().vocabulary;
        let s = enumerate_sentences(&v, SlotPolicy::four_slots())
            .into_iter()
            .find(|s| s.negation_count() == 4)
            .unwrap();
        assert_eq!(s.len(), 9);
        let t = s.tokens();
        assert_eq!((t[0], t[2], t[4]), ("not", "not", "not"));
        assert_eq!(t[7], "not");
    }

    #[test]
    fn enumeration_counts() {
        let v = lang().vocabulary;
        let four = enumerate_sentences(&v, SlotPolicy::four_slots());
        assert_eq!(four.len(), 2 * 2 * 5 * 5 * 4 * 16);
        let distinct: std::collections::HashSet<String> = four.iter().map(|s| s.render()).collect();
        assert_eq!(distinct.len(), 6400);
        assert!(four.iter().all(|s| (5..=9).contains(&s.len())));
        let five = enumerate_sentences(&v, SlotPolicy::five_slots());
        assert_eq!(five.len(), 12800);
        assert!(five.iter().all(|s| (5..=10).contains(&s.len())));
    }

    #[test]
    fn generation_is_deterministic_and_well_formed() {
        let v = lang().vocabulary;
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let s = generate_sentence(&mut a, &v, SlotPolicy::four_slots());
            assert_eq!(s, generate_sentence(&mut b, &v, SlotPolicy::four_slots()));
            assert!(!s.object.det_neg);
            assert!((5..=9).contains(&s.len()));
            assert_eq!(parse(&s.tokens(), &v).unwrap(), s);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn render_parse_round_trip(seed in any::<u64>(), five in any::<bool>()) {
                let v = Language::default_language().vocabulary;
                let policy = if five { SlotPolicy::five_slots() } else { SlotPolicy::four_slots() };
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let s = generate_sentence(&mut rng, &v, policy);
                prop_assert_eq!(parse_str(&s.render(), &v).unwrap(), s.clone());
                prop_assert_eq!(parse_open(&s.tokens()).unwrap(), s);
            }
        }
    }
}
