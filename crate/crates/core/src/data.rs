//! Labeled pair datasets: sampling, splits, statistics, TSV files, pretrained
//! word vectors and word substitutions.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fol::{compile_axioms, filter_axioms, translate, AxiomSet};
use crate::lang::{enumerate_sentences, generate_sentence, parse_open, Language, ParseError, Sentence, SlotPolicy};
use crate::prover::{classify_pair, Limits};
use crate::relation::Relation;

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("infeasible split: {0}")]
    Infeasible(String),
    #[error("pair space exhausted after {tried} distinct pairs with {missing} records still missing")]
    Exhausted { tried: usize, missing: usize },
    #[error("embedding file {path}: line {line}: {message}")]
    Embedding { path: PathBuf, line: usize, message: String },
    #[error("words missing from embedding file: {}", .0.join(", "))]
    MissingWords(Vec<String>),
    #[error("substitution maps {0}, which is not a vocabulary word")]
    NotInVocabulary(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LabeledPair {
    pub relation: Relation,
    pub left: Sentence,
    pub right: Sentence,
}

impl LabeledPair {
    pub fn to_line(&self) -> String {
        format!("{}\t{}\t{}", self.relation, self.left, self.right)
    }

    pub fn contains_word(&self, w: &str) -> bool {
        self.left.content_words().contains(&w) || self.right.content_words().contains(&w)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_size: usize,
    pub test_size: usize,
    /// Allowed sentence lengths in the training split; `None` allows all.
    pub train_lengths: Option<BTreeSet<usize>>,
    pub test_lengths: Option<BTreeSet<usize>>,
    pub seed: u64,
    pub policy: SlotPolicy,
    #[serde(default)]
    pub sampler: PairSampler,
}

/// How candidate pairs are proposed and which of them are kept.
///
/// Independently drawn sentences are almost always logically independent
/// (about 97% `#` with the default language), so by default half of the
/// candidates reuse the left sentence's content words on the right, and `#`
/// is held to a fixed share of each split.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSampler {
    /// Probability that the right sentence takes its nouns and verb from the
    /// left sentence; otherwise it is drawn independently.
    pub related_fraction: f64,
    /// Exact share of `#` pairs per split; `None` keeps every labeled pair.
    pub independence_share: Option<f64>,
}

impl Default for PairSampler {
    fn default() -> Self {
        PairSampler { related_fraction: 0.5, independence_share: Some(0.5) }
    }
}

impl PairSampler {
    /// Plain i.i.d. pairs with no class control.
    pub fn uniform() -> Self {
        PairSampler { related_fraction: 0.0, independence_share: None }
    }
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_size: 30_000,
            test_size: 5_000,
            train_lengths: None,
            test_lengths: None,
            seed: 1,
            policy: SlotPolicy::four_slots(),
            sampler: PairSampler::default(),
        }
    }
}

/// A pair the prover could not decide within its limits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RejectedPair {
    pub left: Sentence,
    pub right: Sentence,
    pub reason: String,
}

#[derive(Clone, Debug, Default)]
pub struct GenerationStats {
    /// Distinct candidate pairs sent to the prover.
    pub labeled: usize,
    /// Candidates dropped because the ordered pair was already drawn.
    pub duplicates: usize,
    pub rejected: Vec<RejectedPair>,
    pub seconds: f64,
}

#[derive(Clone, Debug, Default)]
pub struct Dataset {
    pub train: Vec<LabeledPair>,
    pub test: Vec<LabeledPair>,
    pub stats: GenerationStats,
}

fn allowed(filter: &Option<BTreeSet<usize>>, s: &Sentence) -> bool {
    filter.as_ref().is_none_or(|f| f.contains(&s.len()))
}

/// Number of ordered pairs available to the train split, the test split, and
/// to both.
fn pair_counts(lang: &Language, spec: &SplitSpec) -> (u128, u128, u128) {
    let all = enumerate_sentences(&lang.vocabulary, spec.policy);
    let mut tr = 0u128;
    let mut te = 0u128;
    let mut both = 0u128;
    for s in &all {
        let a = allowed(&spec.train_lengths, s);
        let b = allowed(&spec.test_lengths, s);
        tr += a as u128;
        te += b as u128;
        both += (a && b) as u128;
    }
    (tr * tr, te * te, both * both)
}

pub fn check_feasible(lang: &Language, spec: &SplitSpec) -> Result<(), DataError> {
    let (tr, te, both) = pair_counts(lang, spec);
    if spec.train_size as u128 > tr {
        return Err(DataError::Infeasible(format!(
            "{} training pairs requested, {tr} exist under the length filter",
            spec.train_size
        )));
    }
    let test_room = te - both.min(spec.train_size as u128);
    if spec.test_size as u128 > test_room {
        return Err(DataError::Infeasible(format!(
            "{} test pairs requested, only {test_room} are guaranteed to remain after the training split",
            spec.test_size
        )));
    }
    Ok(())
}

/// Labels `left`/`right` with axioms filtered from `axioms`.
pub fn label_pair(
    left: &Sentence,
    right: &Sentence,
    axioms: &AxiomSet,
    limits: &Limits,
) -> Result<Relation, crate::prover::Undecided> {
    let phi = translate(left);
    let psi = translate(right);
    let filtered = filter_axioms(axioms, &phi, &psi);
    classify_pair(&phi, &psi, &filtered, limits)
}

const CHUNK: usize = 2048;

/// Give up when this many candidates per requested pair were labeled without
/// filling the split.
const MAX_CANDIDATES_PER_PAIR: usize = 2000;

/// Samples and labels the train and test splits.
///
/// Candidates are drawn sequentially from one seeded stream and labeled in
/// parallel chunks; acceptance happens in draw order, so the result does not
/// depend on the number of worker threads.
pub fn generate_dataset(lang: &Language, spec: &SplitSpec, limits: &Limits) -> Result<Dataset, DataError> {
    check_feasible(lang, spec)?;
    if let Some(share) = spec.sampler.independence_share {
        if !(0.0..=1.0).contains(&share) {
            return Err(DataError::Infeasible(format!("independence share {share} outside [0, 1]")));
        }
    }
    let start = Instant::now();
    let axioms = compile_axioms(lang);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut seen: HashSet<(Sentence, Sentence)> = HashSet::new();
    let mut stats = GenerationStats::default();
    let (train_pool, test_pool, _) = pair_counts(lang, spec);
    let mut splits = Vec::with_capacity(2);
    for (size, filter, pool) in [
        (spec.train_size, &spec.train_lengths, train_pool),
        (spec.test_size, &spec.test_lengths, test_pool),
    ] {
        let mut quota = Quota::new(size, spec.sampler.independence_share);
        let mut out: Vec<LabeledPair> = Vec::with_capacity(size);
        let mut tried_here = 0usize;
        while out.len() < size {
            let want = CHUNK.min(quota.expected_draws(size - out.len()));
            let mut batch = Vec::with_capacity(want);
            let mut draws = 0;
            while batch.len() < want && draws < CHUNK * 64 {
                draws += 1;
                let (left, right) = sample_pair(&mut rng, lang, spec, filter);
                if seen.insert((left.clone(), right.clone())) {
                    batch.push((left, right));
                } else {
                    stats.duplicates += 1;
                }
            }
            if batch.is_empty() {
                return Err(DataError::Exhausted { tried: stats.labeled, missing: size - out.len() });
            }
            tried_here += batch.len();
            stats.labeled += batch.len();
            let labels: Vec<_> = batch
                .par_iter()
                .map(|(l, r)| label_pair(l, r, &axioms, limits))
                .collect();
            for ((left, right), label) in batch.into_iter().zip(labels) {
                match label {
                    Ok(relation) if quota.take(relation) => out.push(LabeledPair { relation, left, right }),
                    Ok(_) => {
                        // labeled but not kept: leave it available to the next split
                        seen.remove(&(left, right));
                    }
                    Err(e) => {
                        log::warn!("undecided pair: {left} / {right}: {e}");
                        stats.rejected.push(RejectedPair { left, right, reason: e.to_string() });
                    }
                }
            }
            if out.len() < size
                && (tried_here as u128 >= pool || tried_here >= size.saturating_mul(MAX_CANDIDATES_PER_PAIR))
            {
                return Err(DataError::Exhausted { tried: stats.labeled, missing: size - out.len() });
            }
        }
        splits.push(out);
    }
    stats.seconds = start.elapsed().as_secs_f64();
    let test = splits.pop().unwrap();
    let train = splits.pop().unwrap();
    log::info!(
        "{} train and {} test pairs from {} candidates in {:.1}s",
        train.len(),
        test.len(),
        stats.labeled,
        stats.seconds
    );
    Ok(Dataset { train, test, stats })
}

/// Remaining room in one split, with the part reserved for `#` when its
/// share is fixed.
struct Quota {
    remaining: usize,
    independent: Option<usize>,
}

/// Rough fraction of non-`#` candidates under the related proposal, used only
/// to size labeling chunks.
const OTHER_RATE: f64 = 0.05;

impl Quota {
    fn new(size: usize, independence_share: Option<f64>) -> Quota {
        let independent = independence_share.map(|share| (share * size as f64).round() as usize);
        Quota { remaining: size, independent }
    }

    fn take(&mut self, r: Relation) -> bool {
        match (&mut self.independent, r == Relation::Independence) {
            (Some(0), true) => return false,
            (Some(i), true) => *i -= 1,
            (Some(i), false) if self.remaining == *i => return false,
            _ if self.remaining == 0 => return false,
            _ => {}
        }
        self.remaining -= 1;
        true
    }

    fn expected_draws(&self, missing: usize) -> usize {
        match self.independent {
            Some(i) if self.remaining > i => ((self.remaining - i) as f64 / OTHER_RATE) as usize + 16,
            _ => missing + 16,
        }
    }
}

fn sample_pair(
    rng: &mut ChaCha8Rng,
    lang: &Language,
    spec: &SplitSpec,
    filter: &Option<BTreeSet<usize>>,
) -> (Sentence, Sentence) {
    let left = sample_filtered(rng, lang, spec.policy, filter);
    let mut right = sample_filtered(rng, lang, spec.policy, filter);
    if spec.sampler.related_fraction > 0.0 && rng.random_bool(spec.sampler.related_fraction) {
        let nouns = [&left.subject.noun, &left.object.noun];
        right.subject.noun = nouns[rng.random_range(0..2)].clone();
        right.object.noun = nouns[rng.random_range(0..2)].clone();
        right.verb = left.verb.clone();
    }
    (left, right)
}

fn sample_filtered(
    rng: &mut ChaCha8Rng,
    lang: &Language,
    policy: SlotPolicy,
    filter: &Option<BTreeSet<usize>>,
) -> Sentence {
    loop {
        let s = generate_sentence(rng, &lang.vocabulary, policy);
        if allowed(filter, &s) {
            return s;
        }
    }
}

/// Relative frequency of each relation, in [`Relation::ALL`] order.
pub fn class_distribution(pairs: &[LabeledPair]) -> [f64; Relation::COUNT] {
    let mut counts = [0usize; Relation::COUNT];
    for p in pairs {
        counts[p.relation.index()] += 1;
    }
    let n = pairs.len().max(1) as f64;
    counts.map(|c| c as f64 / n)
}

/// `relation<TAB>train_freq<TAB>test_freq` with a header line.
pub fn distribution_tsv(train: &[LabeledPair], test: &[LabeledPair]) -> String {
    let tr = class_distribution(train);
    let te = class_distribution(test);
    let mut out = String::from("relation\ttrain_freq\ttest_freq\n");
    for r in Relation::ALL {
        writeln!(out, "{r}\t{:.6}\t{:.6}", tr[r.index()], te[r.index()]).unwrap();
    }
    out
}

pub fn write_dataset(pairs: &[LabeledPair], path: impl AsRef<Path>) -> Result<(), DataError> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    for p in pairs {
        writeln!(w, "{}", p.to_line())?;
    }
    w.flush()?;
    Ok(())
}

pub fn parse_line(line: &str) -> Result<LabeledPair, String> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 3 {
        return Err(format!("expected 3 tab-separated fields, found {}", fields.len()));
    }
    let relation: Relation = fields[0].trim().parse().map_err(|e| format!("{e}"))?;
    let sentence = |text: &str| {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        parse_open(&tokens).map_err(|e: ParseError| format!("{text:?}: {e}"))
    };
    Ok(LabeledPair { relation, left: sentence(fields[1])?, right: sentence(fields[2])? })
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Vec<LabeledPair>, DataError> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_line(&line).map_err(|message| DataError::Line { line: i + 1, message })?);
    }
    Ok(out)
}

/// Pretrained word vectors in the usual text format: a word followed by its
/// components, one word per line.
#[derive(Clone, Debug, Default)]
pub struct Embeddings {
    pub dim: usize,
    pub vectors: HashMap<String, Vec<f64>>,
}

impl Embeddings {
    /// Reads the file, keeping only `wanted` words when given. Lookups fall
    /// back to the lowercased word, since common distributions are lowercase.
    pub fn read(path: impl AsRef<Path>, wanted: Option<&BTreeSet<String>>) -> Result<Embeddings, DataError> {
        let path = path.as_ref();
        let keys: Option<HashSet<String>> = wanted.map(|w| {
            w.iter().flat_map(|s| [s.clone(), s.to_lowercase()]).collect()
        });
        let reader = BufReader::new(std::fs::File::open(path)?);
        let mut emb = Embeddings::default();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let mut parts = line.split(' ');
            let Some(word) = parts.next().filter(|w| !w.is_empty()) else { continue };
            if keys.as_ref().is_some_and(|k| !k.contains(word)) {
                continue;
            }
            let err = |message: String| DataError::Embedding { path: path.to_path_buf(), line: i + 1, message };
            let v: Vec<f64> = parts
                .filter(|p| !p.is_empty())
                .map(|p| p.parse::<f64>().map_err(|e| err(format!("{p:?}: {e}"))))
                .collect::<Result<_, _>>()?;
            if emb.dim == 0 {
                emb.dim = v.len();
            } else if v.len() != emb.dim {
                return Err(err(format!("expected {} components, found {}", emb.dim, v.len())));
            }
            emb.vectors.insert(word.to_string(), v);
        }
        Ok(emb)
    }

    pub fn get(&self, w: &str) -> Option<&[f64]> {
        self.vectors
            .get(w)
            .or_else(|| self.vectors.get(&w.to_lowercase()))
            .map(Vec::as_slice)
    }

    /// Words of `words` with no vector, in input order.
    pub fn missing<'a>(&self, words: impl IntoIterator<Item = &'a str>) -> Vec<String> {
        words.into_iter().filter(|w| self.get(w).is_none()).map(str::to_string).collect()
    }

    /// One minus cosine similarity.
    pub fn cos_dist(&self, a: &str, b: &str) -> Option<f64> {
        Some(cos_dist(self.get(a)?, self.get(b)?))
    }
}

pub fn cos_dist(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    1.0 - dot / (na * nb)
}

/// A word replacement applied to test data.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubstitutionSpec {
    pub name: String,
    pub mapping: BTreeMap<String, String>,
    #[serde(default)]
    pub embedding_source: Option<PathBuf>,
}

/// A file of substitutions sharing one embedding source.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubstitutionSuite {
    #[serde(default)]
    pub embedding_source: Option<PathBuf>,
    /// Accuracy is reported on the substituted fragment only (no before
    /// column), as for whole-ontology relocations.
    #[serde(default)]
    pub after_only: bool,
    pub substitutions: Vec<SubstitutionSpec>,
}

impl SubstitutionSuite {
    pub fn load(path: impl AsRef<Path>) -> Result<SubstitutionSuite, DataError> {
        let mut suite: SubstitutionSuite = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        for s in &mut suite.substitutions {
            if s.embedding_source.is_none() {
                s.embedding_source = suite.embedding_source.clone();
            }
        }
        Ok(suite)
    }

    /// Every replacement word in the suite.
    pub fn replacement_words(&self) -> BTreeSet<String> {
        self.substitutions.iter().flat_map(|s| s.mapping.values().cloned()).collect()
    }
}

/// The pairs touched by a substitution, before and after replacement.
#[derive(Clone, Debug, Default)]
pub struct Fragment {
    pub original: Vec<LabeledPair>,
    pub substituted: Vec<LabeledPair>,
}

/// Selects pairs containing a mapped word and replaces those words. Labels are
/// kept, which is correct when the mapping preserves every lexical relation.
pub fn apply_substitution(
    test: &[LabeledPair],
    spec: &SubstitutionSpec,
    lang: &Language,
    embeddings: Option<&Embeddings>,
) -> Result<Fragment, DataError> {
    for w in spec.mapping.keys() {
        if lang.vocabulary.class_of(w).is_none() {
            return Err(DataError::NotInVocabulary(w.clone()));
        }
    }
    if let Some(emb) = embeddings {
        let missing = emb.missing(spec.mapping.values().map(String::as_str));
        if !missing.is_empty() {
            return Err(DataError::MissingWords(missing));
        }
    }
    let replace = |w: &str| spec.mapping.get(w).cloned().unwrap_or_else(|| w.to_string());
    let mut frag = Fragment::default();
    for p in test {
        if spec.mapping.keys().any(|w| p.contains_word(w)) {
            frag.original.push(p.clone());
            frag.substituted.push(LabeledPair {
                relation: p.relation,
                left: p.left.map_words(replace),
                right: p.right.map_words(replace),
            });
        }
    }
    Ok(frag)
}
