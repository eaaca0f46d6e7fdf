//! Siamese encoder, comparison and classification layers, with hand-written
//! backpropagation through time.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use ndarray::{concatenate, s, Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use entail_core::lang::Sentence;

use crate::NetError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Srn,
    Gru,
    Lstm,
    /// Unweighted sum of word embeddings.
    Sum,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Srn, ModelKind::Gru, ModelKind::Lstm, ModelKind::Sum];

    /// Number of stacked gate blocks in the recurrent weight matrices.
    pub fn gates(self) -> usize {
        match self {
            ModelKind::Srn => 1,
            ModelKind::Gru => 3,
            ModelKind::Lstm => 4,
            ModelKind::Sum => 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Srn => "srn",
            ModelKind::Gru => "gru",
            ModelKind::Lstm => "lstm",
            ModelKind::Sum => "sum",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "srn" => Ok(ModelKind::Srn),
            "gru" => Ok(ModelKind::Gru),
            "lstm" => Ok(ModelKind::Lstm),
            "sum" | "sumnn" => Ok(ModelKind::Sum),
            _ => Err(format!("unknown model kind {s:?} (expected srn, gru, lstm or sum)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub hidden: usize,
    pub embedding: usize,
    pub sentence: usize,
    pub comparison: usize,
    pub classes: usize,
    /// Negative-side slope of the comparison layer's leaky ReLU.
    pub leak: f64,
    /// Embeddings are pretrained and never updated.
    pub frozen_embeddings: bool,
}

impl ModelConfig {
    pub fn new(kind: ModelKind) -> ModelConfig {
        ModelConfig {
            kind,
            hidden: 128,
            embedding: 25,
            sentence: 25,
            comparison: 75,
            classes: 7,
            leak: 0.01,
            frozen_embeddings: false,
        }
    }

    /// Width of the encoder output fed to the projection layer.
    pub fn encoder_width(&self) -> usize {
        match self.kind {
            ModelKind::Sum => self.embedding,
            _ => self.hidden,
        }
    }
}

/// Index of each trainable tensor in [`Params::tensors`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamId {
    Embedding,
    Input,
    Recurrent,
    Bias,
    Projection,
    ProjectionBias,
    Comparison,
    ComparisonBias,
    Classifier,
    ClassifierBias,
}

impl ParamId {
    pub const ALL: [ParamId; 10] = [
        ParamId::Embedding,
        ParamId::Input,
        ParamId::Recurrent,
        ParamId::Bias,
        ParamId::Projection,
        ParamId::ProjectionBias,
        ParamId::Comparison,
        ParamId::ComparisonBias,
        ParamId::Classifier,
        ParamId::ClassifierBias,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ParamId::Embedding => "embedding",
            ParamId::Input => "input",
            ParamId::Recurrent => "recurrent",
            ParamId::Bias => "bias",
            ParamId::Projection => "projection",
            ParamId::ProjectionBias => "projection_bias",
            ParamId::Comparison => "comparison",
            ParamId::ComparisonBias => "comparison_bias",
            ParamId::Classifier => "classifier",
            ParamId::ClassifierBias => "classifier_bias",
        }
    }
}

/// All trainable tensors, each stored as a matrix (biases are single rows).
#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub tensors: Vec<Array2<f64>>,
}

impl Params {
    pub fn get(&self, id: ParamId) -> &Array2<f64> {
        &self.tensors[id as usize]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Array2<f64> {
        &mut self.tensors[id as usize]
    }

    pub fn zeros_like(&self) -> Params {
        Params { tensors: self.tensors.iter().map(|t| Array2::zeros(t.raw_dim())).collect() }
    }

    pub fn shapes(config: &ModelConfig, vocab_size: usize) -> Vec<(usize, usize)> {
        let g = config.kind.gates() * config.hidden;
        let (d, h, s, c, k) = (config.embedding, config.hidden, config.sentence, config.comparison, config.classes);
        let recurrent = config.kind != ModelKind::Sum;
        vec![
            (vocab_size, d),
            if recurrent { (d, g) } else { (0, 0) },
            if recurrent { (h, g) } else { (0, 0) },
            if recurrent { (1, g) } else { (0, 0) },
            (config.encoder_width(), s),
            (1, s),
            (2 * s, c),
            (1, c),
            (c, k),
            (1, k),
        ]
    }
}

/// Token list of the encoder; fixed once the model is built, except for
/// frozen pretrained tables, which can take new words.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocab {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl From<Vec<String>> for Vocab {
    fn from(words: Vec<String>) -> Vocab {
        Vocab::new(words)
    }
}

impl From<Vocab> for Vec<String> {
    fn from(v: Vocab) -> Vec<String> {
        v.words
    }
}

impl Vocab {
    pub fn new<S: AsRef<str>>(words: impl IntoIterator<Item = S>) -> Vocab {
        let mut v = Vocab::default();
        for w in words {
            v.push(w.as_ref());
        }
        v
    }

    fn push(&mut self, w: &str) -> usize {
        if let Some(&i) = self.index.get(w) {
            return i;
        }
        self.words.push(w.to_string());
        self.index.insert(w.to_string(), self.words.len() - 1);
        self.words.len() - 1
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn get(&self, w: &str) -> Option<usize> {
        self.index.get(w).copied()
    }

    pub fn encode(&self, s: &Sentence) -> Result<Vec<usize>, NetError> {
        let tokens = s.tokens();
        let missing: Vec<String> =
            tokens.iter().filter(|t| self.get(t).is_none()).map(|t| t.to_string()).collect();
        if !missing.is_empty() {
            return Err(NetError::UnknownWords(missing));
        }
        Ok(tokens.iter().map(|t| self.index[*t]).collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub vocab: Vocab,
    pub params: Params,
}

fn uniform(rng: &mut ChaCha8Rng, rows: usize, cols: usize, bound: f64) -> Array2<f64> {
    let dist = Uniform::new_inclusive(-bound, bound).expect("finite bound");
    Array2::from_shape_simple_fn((rows, cols), || dist.sample(rng))
}

impl Model {
    /// Fresh parameters: uniform in ±1/√fan_in, with ±1/√hidden for both
    /// recurrent input and state weights, and standard normal embeddings.
    pub fn init(config: ModelConfig, vocab: Vocab, rng: &mut ChaCha8Rng) -> Model {
        let shapes = Params::shapes(&config, vocab.len());
        let normal = Normal::new(0.0, 1.0).expect("unit normal");
        let mut tensors = Vec::with_capacity(shapes.len());
        for (id, &(r, c)) in ParamId::ALL.iter().zip(&shapes) {
            let t = match id {
                ParamId::Embedding => Array2::from_shape_simple_fn((r, c), || normal.sample(rng)),
                ParamId::Input | ParamId::Recurrent | ParamId::Bias => {
                    uniform(rng, r, c, 1.0 / (config.hidden as f64).sqrt())
                }
                ParamId::Projection | ParamId::ProjectionBias => {
                    uniform(rng, r, c, 1.0 / (config.encoder_width() as f64).sqrt())
                }
                ParamId::Comparison | ParamId::ComparisonBias => {
                    uniform(rng, r, c, 1.0 / ((2 * config.sentence) as f64).sqrt())
                }
                ParamId::Classifier | ParamId::ClassifierBias => {
                    uniform(rng, r, c, 1.0 / (config.comparison as f64).sqrt())
                }
            };
            tensors.push(t);
        }
        Model { config, vocab, params: Params { tensors } }
    }

    /// Replaces the embedding table with pretrained vectors, which are frozen.
    pub fn set_pretrained(&mut self, table: Array2<f64>) -> Result<(), NetError> {
        let expected = (self.vocab.len(), self.config.embedding);
        if table.dim() != expected {
            return Err(NetError::Shape { what: "pretrained embeddings", expected, found: table.dim() });
        }
        *self.params.get_mut(ParamId::Embedding) = table;
        self.config.frozen_embeddings = true;
        Ok(())
    }

    /// Adds a word with a given vector to a frozen pretrained table.
    pub fn add_word(&mut self, word: &str, vector: &[f64]) -> Result<(), NetError> {
        if !self.config.frozen_embeddings {
            return Err(NetError::NotPretrained);
        }
        if vector.len() != self.config.embedding {
            return Err(NetError::Shape {
                what: "word vector",
                expected: (1, self.config.embedding),
                found: (1, vector.len()),
            });
        }
        if self.vocab.get(word).is_some() {
            return Ok(());
        }
        self.vocab.push(word);
        let row = Array2::from_shape_vec((1, vector.len()), vector.to_vec()).expect("row shape");
        let e = self.params.get(ParamId::Embedding);
        let grown = concatenate(Axis(0), &[e.view(), row.view()]).expect("matching widths");
        *self.params.get_mut(ParamId::Embedding) = grown;
        Ok(())
    }

    /// Which tensors the optimizer may change.
    pub fn trainable(&self) -> Vec<bool> {
        ParamId::ALL
            .iter()
            .map(|id| !(self.config.frozen_embeddings && *id == ParamId::Embedding))
            .collect()
    }

    /// Sentence vectors for token sequences.
    pub fn encode(&self, seqs: &[&[usize]]) -> Array2<f64> {
        self.encode_cached(seqs).0
    }

    fn encode_cached(&self, seqs: &[&[usize]]) -> (Array2<f64>, EncoderCache) {
        let enc = match self.config.kind {
            ModelKind::Sum => Encoded::Sum(self.sum_forward(seqs)),
            _ => Encoded::Recurrent(self.recurrent_forward(seqs)),
        };
        let pre = enc.output().dot(self.params.get(ParamId::Projection)) + self.params.get(ParamId::ProjectionBias);
        let out = pre.mapv(f64::tanh);
        (out.clone(), EncoderCache { enc, out })
    }

    fn sum_forward(&self, seqs: &[&[usize]]) -> SumCache {
        let e = self.params.get(ParamId::Embedding);
        let mut out = Array2::zeros((seqs.len(), self.config.embedding));
        let mut sorted = Vec::with_capacity(seqs.len());
        for (i, seq) in seqs.iter().enumerate() {
            // a fixed summation order makes the result exactly order-invariant
            let mut ids = seq.to_vec();
            ids.sort_unstable();
            let mut row = out.row_mut(i);
            for &id in &ids {
                row += &e.row(id);
            }
            sorted.push(ids);
        }
        SumCache { ids: sorted, out }
    }

    fn recurrent_forward(&self, seqs: &[&[usize]]) -> RecurrentCache {
        let n = seqs.len();
        let h = self.config.hidden;
        let kind = self.config.kind;
        let e = self.params.get(ParamId::Embedding);
        let w = self.params.get(ParamId::Input);
        let u = self.params.get(ParamId::Recurrent);
        let b = self.params.get(ParamId::Bias);
        let max_len = seqs.iter().map(|s| s.len()).max().unwrap_or(0);
        let mut state = Array2::zeros((n, h));
        let mut cell = Array2::zeros((n, h));
        let mut steps = Vec::with_capacity(max_len);
        for t in 0..max_len {
            let ids: Vec<usize> = seqs.iter().map(|s| s.get(t).copied().unwrap_or(0)).collect();
            let mask = Array1::from_iter(seqs.iter().map(|s| (t < s.len()) as u8 as f64));
            let x = e.select(Axis(0), &ids);
            let h_prev = state.clone();
            let c_prev = cell.clone();
            let (h_new, c_new, gates) = match kind {
                ModelKind::Srn => {
                    let a = x.dot(w) + h_prev.dot(u) + b;
                    let out = a.mapv(f64::tanh);
                    (out.clone(), None, Gates::Srn { out })
                }
                ModelKind::Gru => {
                    let azr = x.dot(&w.slice(s![.., ..2 * h])) + h_prev.dot(&u.slice(s![.., ..2 * h]))
                        + b.slice(s![.., ..2 * h]);
                    let zr = azr.mapv(sigmoid);
                    let z = zr.slice(s![.., ..h]).to_owned();
                    let r = zr.slice(s![.., h..]).to_owned();
                    let rh = &r * &h_prev;
                    let ah = x.dot(&w.slice(s![.., 2 * h..])) + rh.dot(&u.slice(s![.., 2 * h..]))
                        + b.slice(s![.., 2 * h..]);
                    let cand = ah.mapv(f64::tanh);
                    let out = &h_prev + &(&z * &(&cand - &h_prev));
                    (out, None, Gates::Gru { z, r, rh, cand })
                }
                ModelKind::Lstm => {
                    let a = x.dot(w) + h_prev.dot(u) + b;
                    let i = a.slice(s![.., ..h]).mapv(sigmoid);
                    let f = a.slice(s![.., h..2 * h]).mapv(sigmoid);
                    let o = a.slice(s![.., 2 * h..3 * h]).mapv(sigmoid);
                    let g = a.slice(s![.., 3 * h..]).mapv(f64::tanh);
                    let c_new = &f * &c_prev + &i * &g;
                    let tc = c_new.mapv(f64::tanh);
                    let out = &o * &tc;
                    (out, Some(c_new), Gates::Lstm { i, f, o, g, tc })
                }
                ModelKind::Sum => unreachable!("sum model has no recurrent cell"),
            };
            blend(&mut state, &h_new, &mask);
            if let Some(c_new) = c_new {
                blend(&mut cell, &c_new, &mask);
            }
            steps.push(Step { ids, mask, x, h_prev, c_prev, gates });
        }
        RecurrentCache { steps, out: state }
    }

    /// Class probabilities for pairs of sentence vectors.
    pub fn classify(&self, left: &Array2<f64>, right: &Array2<f64>) -> Array2<f64> {
        self.head_forward(left, right).probs
    }

    fn head_forward(&self, left: &Array2<f64>, right: &Array2<f64>) -> HeadCache {
        let joined = concatenate(Axis(1), &[left.view(), right.view()]).expect("equal batch sizes");
        let pre = joined.dot(self.params.get(ParamId::Comparison)) + self.params.get(ParamId::ComparisonBias);
        let leak = self.config.leak;
        let act = pre.mapv(|v| if v > 0.0 { v } else { leak * v });
        let logits = act.dot(self.params.get(ParamId::Classifier)) + self.params.get(ParamId::ClassifierBias);
        let probs = softmax_rows(&logits);
        HeadCache { joined, pre, act, probs }
    }

    /// Class probabilities for a batch of token-sequence pairs.
    pub fn predict(&self, left: &[&[usize]], right: &[&[usize]]) -> Array2<f64> {
        let mut all: Vec<&[usize]> = left.to_vec();
        all.extend_from_slice(right);
        let v = self.encode(&all);
        let n = left.len();
        self.classify(&v.slice(s![..n, ..]).to_owned(), &v.slice(s![n.., ..]).to_owned())
    }

    /// Mean cross-entropy of a batch and its gradient with respect to every
    /// tensor. Both sides go through one encoder pass, so the two branches
    /// share parameters by construction.
    pub fn loss_and_grad(&self, left: &[&[usize]], right: &[&[usize]], labels: &[usize]) -> (f64, Params, Array2<f64>) {
        let n = left.len();
        let mut all: Vec<&[usize]> = left.to_vec();
        all.extend_from_slice(right);
        let (vectors, enc_cache) = self.encode_cached(&all);
        let lv = vectors.slice(s![..n, ..]).to_owned();
        let rv = vectors.slice(s![n.., ..]).to_owned();
        let head = self.head_forward(&lv, &rv);

        let mut loss = 0.0;
        let mut dlogits = head.probs.clone();
        for (i, &y) in labels.iter().enumerate() {
            loss -= head.probs[[i, y]].max(f64::MIN_POSITIVE).ln();
            dlogits[[i, y]] -= 1.0;
        }
        loss /= n as f64;
        dlogits /= n as f64;

        let mut grads = self.params.zeros_like();
        let p = &self.params;
        *grads.get_mut(ParamId::Classifier) = head.act.t().dot(&dlogits);
        *grads.get_mut(ParamId::ClassifierBias) = sum_rows(&dlogits);
        let dact = dlogits.dot(&p.get(ParamId::Classifier).t());
        let leak = self.config.leak;
        let mut dpre = dact;
        Zip::from(&mut dpre).and(&head.pre).for_each(|d, &v| {
            if v <= 0.0 {
                *d *= leak
            }
        });
        *grads.get_mut(ParamId::Comparison) = head.joined.t().dot(&dpre);
        *grads.get_mut(ParamId::ComparisonBias) = sum_rows(&dpre);
        let djoined = dpre.dot(&p.get(ParamId::Comparison).t());
        let s = self.config.sentence;
        let dvectors = concatenate(Axis(0), &[djoined.slice(s![.., ..s]), djoined.slice(s![.., s..])])
            .expect("equal widths");
        self.encoder_backward(&enc_cache, &dvectors, &mut grads);
        (loss, grads, head.probs)
    }

    fn encoder_backward(&self, cache: &EncoderCache, dout: &Array2<f64>, grads: &mut Params) {
        let dpre = dout * &cache.out.mapv(|v| 1.0 - v * v);
        let enc_out = cache.enc.output();
        *grads.get_mut(ParamId::Projection) = enc_out.t().dot(&dpre);
        *grads.get_mut(ParamId::ProjectionBias) = sum_rows(&dpre);
        let denc = dpre.dot(&self.params.get(ParamId::Projection).t());
        match &cache.enc {
            Encoded::Sum(c) => {
                let de = grads.get_mut(ParamId::Embedding);
                for (i, ids) in c.ids.iter().enumerate() {
                    for &id in ids {
                        let mut row = de.row_mut(id);
                        row += &denc.row(i);
                    }
                }
            }
            Encoded::Recurrent(c) => self.recurrent_backward(c, denc, grads),
        }
    }

    fn recurrent_backward(&self, cache: &RecurrentCache, mut dh: Array2<f64>, grads: &mut Params) {
        let h = self.config.hidden;
        let w = self.params.get(ParamId::Input);
        let u = self.params.get(ParamId::Recurrent);
        let mut dw = Array2::<f64>::zeros(w.raw_dim());
        let mut du = Array2::<f64>::zeros(u.raw_dim());
        let mut db = Array2::<f64>::zeros((1, w.ncols()));
        let mut de = Array2::<f64>::zeros(self.params.get(ParamId::Embedding).raw_dim());
        let mut dc = Array2::<f64>::zeros(dh.raw_dim());
        for step in cache.steps.iter().rev() {
            let m = step.mask.view().insert_axis(Axis(1));
            let keep = m.mapv(|v| 1.0 - v);
            let dh_new = &dh * &m;
            let dh_keep = &dh * &keep;
            let (da_all, dx, dh_prev) = match &step.gates {
                Gates::Srn { out } => {
                    let da = &dh_new * &out.mapv(|v| 1.0 - v * v);
                    let dh_prev = da.dot(&u.t()) + &dh_keep;
                    let dx = da.dot(&w.t());
                    (da, dx, dh_prev)
                }
                Gates::Gru { z, r, rh, cand } => {
                    let dz = &dh_new * &(cand - &step.h_prev);
                    let dcand = &dh_new * z;
                    let mut dh_prev = &dh_new * &z.mapv(|v| 1.0 - v) + &dh_keep;
                    let dah = &dcand * &cand.mapv(|v| 1.0 - v * v);
                    let uh = u.slice(s![.., 2 * h..]);
                    let wh = w.slice(s![.., 2 * h..]);
                    du.slice_mut(s![.., 2 * h..]).scaled_add(1.0, &rh.t().dot(&dah));
                    let drh = dah.dot(&uh.t());
                    let dr = &drh * &step.h_prev;
                    dh_prev += &(&drh * r);
                    let daz = &dz * &z.mapv(|v| v * (1.0 - v));
                    let dar = &dr * &r.mapv(|v| v * (1.0 - v));
                    let dazr = concatenate(Axis(1), &[daz.view(), dar.view()]).expect("equal rows");
                    let uzr = u.slice(s![.., ..2 * h]);
                    let wzr = w.slice(s![.., ..2 * h]);
                    du.slice_mut(s![.., ..2 * h]).scaled_add(1.0, &step.h_prev.t().dot(&dazr));
                    dh_prev += &dazr.dot(&uzr.t());
                    let dx = dazr.dot(&wzr.t()) + dah.dot(&wh.t());
                    let da = concatenate(Axis(1), &[dazr.view(), dah.view()]).expect("equal rows");
                    // the recurrent gradient was accumulated piecewise above
                    (da, dx, dh_prev)
                }
                Gates::Lstm { i, f, o, g, tc } => {
                    let dcn = &dc * &m + &(&(&dh_new * o) * &tc.mapv(|v| 1.0 - v * v));
                    let dc_keep = &dc * &keep;
                    let d_o = &dh_new * tc;
                    let di = &dcn * g;
                    let dg = &dcn * i;
                    let df = &dcn * &step.c_prev;
                    dc = &dcn * f + &dc_keep;
                    let da = concatenate(
                        Axis(1),
                        &[
                            (&di * &i.mapv(|v| v * (1.0 - v))).view(),
                            (&df * &f.mapv(|v| v * (1.0 - v))).view(),
                            (&d_o * &o.mapv(|v| v * (1.0 - v))).view(),
                            (&dg * &g.mapv(|v| 1.0 - v * v)).view(),
                        ],
                    )
                    .expect("equal rows");
                    let dh_prev = da.dot(&u.t()) + &dh_keep;
                    let dx = da.dot(&w.t());
                    (da, dx, dh_prev)
                }
            };
            dw.scaled_add(1.0, &step.x.t().dot(&da_all));
            if !matches!(step.gates, Gates::Gru { .. }) {
                du.scaled_add(1.0, &step.h_prev.t().dot(&da_all));
            }
            db += &sum_rows(&da_all);
            for (row, &id) in step.ids.iter().enumerate() {
                if step.mask[row] > 0.0 {
                    let mut target = de.row_mut(id);
                    target += &dx.row(row);
                }
            }
            dh = dh_prev;
        }
        *grads.get_mut(ParamId::Input) = dw;
        *grads.get_mut(ParamId::Recurrent) = du;
        *grads.get_mut(ParamId::Bias) = db;
        *grads.get_mut(ParamId::Embedding) += &de;
    }
}

/// Single step of a recurrent cell on a batch; `state` is `(h, c)` with `c`
/// ignored except for the LSTM. Exposed for testing cell equations.
pub fn cell_step(model: &Model, x: &Array2<f64>, h: &Array2<f64>, c: &Array2<f64>) -> (Array2<f64>, Array2<f64>) {
    let hd = model.config.hidden;
    let w = model.params.get(ParamId::Input);
    let u = model.params.get(ParamId::Recurrent);
    let b = model.params.get(ParamId::Bias);
    match model.config.kind {
        ModelKind::Srn => ((x.dot(w) + h.dot(u) + b).mapv(f64::tanh), c.clone()),
        ModelKind::Gru => {
            let zr = (x.dot(&w.slice(s![.., ..2 * hd])) + h.dot(&u.slice(s![.., ..2 * hd])) + b.slice(s![.., ..2 * hd]))
                .mapv(sigmoid);
            let z = zr.slice(s![.., ..hd]).to_owned();
            let r = zr.slice(s![.., hd..]).to_owned();
            let cand = (x.dot(&w.slice(s![.., 2 * hd..])) + (&r * h).dot(&u.slice(s![.., 2 * hd..]))
                + b.slice(s![.., 2 * hd..]))
                .mapv(f64::tanh);
            (&z.mapv(|v| 1.0 - v) * h + &z * &cand, c.clone())
        }
        ModelKind::Lstm => {
            let a = x.dot(w) + h.dot(u) + b;
            let i = a.slice(s![.., ..hd]).mapv(sigmoid);
            let f = a.slice(s![.., hd..2 * hd]).mapv(sigmoid);
            let o = a.slice(s![.., 2 * hd..3 * hd]).mapv(sigmoid);
            let g = a.slice(s![.., 3 * hd..]).mapv(f64::tanh);
            let c_new = &f * c + &i * &g;
            (&o * &c_new.mapv(f64::tanh), c_new)
        }
        ModelKind::Sum => (h.clone(), c.clone()),
    }
}

fn blend(state: &mut Array2<f64>, new: &Array2<f64>, mask: &Array1<f64>) {
    for (mut row, (new_row, &m)) in state.rows_mut().into_iter().zip(new.rows().into_iter().zip(mask)) {
        if m > 0.0 {
            row.assign(&new_row);
        }
    }
}

fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

fn sum_rows(a: &Array2<f64>) -> Array2<f64> {
    a.sum_axis(Axis(0)).insert_axis(Axis(0))
}

pub fn softmax_rows(logits: &Array2<f64>) -> Array2<f64> {
    let mut out = logits.clone();
    for mut row in out.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row /= sum;
    }
    out
}

enum Gates {
    Srn { out: Array2<f64> },
    Gru { z: Array2<f64>, r: Array2<f64>, rh: Array2<f64>, cand: Array2<f64> },
    Lstm { i: Array2<f64>, f: Array2<f64>, o: Array2<f64>, g: Array2<f64>, tc: Array2<f64> },
}

struct Step {
    ids: Vec<usize>,
    mask: Array1<f64>,
    x: Array2<f64>,
    h_prev: Array2<f64>,
    c_prev: Array2<f64>,
    gates: Gates,
}

struct RecurrentCache {
    steps: Vec<Step>,
    out: Array2<f64>,
}

struct SumCache {
    ids: Vec<Vec<usize>>,
    out: Array2<f64>,
}

enum Encoded {
    Sum(SumCache),
    Recurrent(RecurrentCache),
}

impl Encoded {
    fn output(&self) -> ArrayView2<'_, f64> {
        match self {
            Encoded::Sum(c) => c.out.view(),
            Encoded::Recurrent(c) => c.out.view(),
        }
    }
}

struct EncoderCache {
    enc: Encoded,
    out: Array2<f64>,
}

struct HeadCache {
    joined: Array2<f64>,
    pre: Array2<f64>,
    act: Array2<f64>,
    probs: Array2<f64>,
}

/// Draws a model-sized random parameter set; used by gradient checks.
pub fn random_like<R: Rng>(params: &Params, rng: &mut R, scale: f64) -> Params {
    Params {
        tensors: params
            .tensors
            .iter()
            .map(|t| Array2::from_shape_simple_fn(t.raw_dim(), || rng.random_range(-scale..scale)))
            .collect(),
    }
}
