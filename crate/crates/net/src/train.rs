use std::fmt::Write as _;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use entail_core::data::LabeledPair;
use entail_core::Relation;

use crate::model::{Model, ModelConfig, Vocab};
use crate::optim::{AdaDelta, AdaDeltaConfig};
use crate::NetError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch: usize,
    pub seed: u64,
    pub optimizer: AdaDeltaConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { epochs: 50, batch: 32, seed: 1, optimizer: AdaDeltaConfig::default() }
    }
}

/// A labeled pair as token ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Example {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub label: usize,
}

pub fn encode_pairs(vocab: &Vocab, pairs: &[LabeledPair]) -> Result<Vec<Example>, NetError> {
    pairs
        .iter()
        .map(|p| {
            Ok(Example {
                left: vocab.encode(&p.left)?,
                right: vocab.encode(&p.right)?,
                label: p.relation.index(),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub loss: f64,
    /// Accuracy on the training batches as they were seen during the epoch.
    pub train_acc: f64,
    pub test_acc: f64,
}

pub fn metrics_header() -> &'static str {
    "epoch\tloss\ttrain_acc\ttest_acc"
}

impl EpochMetrics {
    pub fn to_tsv_row(&self) -> String {
        format!("{}\t{:.6}\t{:.4}\t{:.4}", self.epoch, self.loss, self.train_acc, self.test_acc)
    }
}

/// Model, optimizer state and the position in the training schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct Trainer {
    pub model: Model,
    pub optimizer: AdaDelta,
    pub config: TrainConfig,
    /// Number of completed epochs.
    pub epoch: usize,
}

impl Trainer {
    pub fn new(model_config: ModelConfig, vocab: Vocab, config: TrainConfig) -> Trainer {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let model = Model::init(model_config, vocab, &mut rng);
        Trainer::from_model(model, config)
    }

    pub fn from_model(model: Model, config: TrainConfig) -> Trainer {
        let optimizer = AdaDelta::new(config.optimizer, &model.params);
        Trainer { model, optimizer, config, epoch: 0 }
    }

    /// Order in which the training examples are visited in `epoch`; each
    /// epoch has its own stream of the run seed.
    pub fn epoch_order(&self, epoch: usize, n: usize) -> Vec<usize> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(epoch as u64 + 1);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        order
    }

    /// One minibatch update; returns the summed loss and the number of
    /// correct predictions.
    pub fn step(&mut self, batch: &[&Example]) -> Result<(f64, usize), NetError> {
        let left: Vec<&[usize]> = batch.iter().map(|e| e.left.as_slice()).collect();
        let right: Vec<&[usize]> = batch.iter().map(|e| e.right.as_slice()).collect();
        let labels: Vec<usize> = batch.iter().map(|e| e.label).collect();
        let (loss, grads, probs) = self.model.loss_and_grad(&left, &right, &labels);
        if !loss.is_finite() {
            return Err(NetError::NonFinite { tensor: "loss", index: 0, value: loss });
        }
        let trainable = self.model.trainable();
        self.optimizer.step(&mut self.model.params, &grads, &trainable)?;
        let correct = argmax_rows(&probs).iter().zip(&labels).filter(|(p, y)| p == y).count();
        Ok((loss * batch.len() as f64, correct))
    }

    /// Runs the next epoch and evaluates on `test`.
    pub fn run_epoch(&mut self, train: &[Example], test: &[Example]) -> Result<EpochMetrics, NetError> {
        let epoch = self.epoch + 1;
        let order = self.epoch_order(epoch, train.len());
        let mut loss = 0.0;
        let mut correct = 0;
        for chunk in order.chunks(self.config.batch.max(1)) {
            let batch: Vec<&Example> = chunk.iter().map(|&i| &train[i]).collect();
            let (l, c) = self.step(&batch)?;
            loss += l;
            correct += c;
        }
        self.epoch = epoch;
        let n = train.len().max(1) as f64;
        let test_acc = if test.is_empty() { 0.0 } else { evaluate(&self.model, test).accuracy() };
        Ok(EpochMetrics { epoch, loss: loss / n, train_acc: correct as f64 / n, test_acc })
    }

    /// Trains until `config.epochs` epochs are complete, calling `on_epoch`
    /// after each one.
    pub fn fit(
        &mut self,
        train: &[Example],
        test: &[Example],
        mut on_epoch: impl FnMut(&Trainer, &EpochMetrics) -> Result<(), NetError>,
    ) -> Result<Vec<EpochMetrics>, NetError> {
        let mut log = Vec::new();
        while self.epoch < self.config.epochs {
            let m = self.run_epoch(train, test)?;
            log::info!(
                "{} epoch {}: loss {:.4} train {:.2}% test {:.2}%",
                self.model.config.kind,
                m.epoch,
                m.loss,
                100.0 * m.train_acc,
                100.0 * m.test_acc
            );
            on_epoch(self, &m)?;
            log.push(m);
        }
        Ok(log)
    }
}

fn argmax_rows(probs: &Array2<f64>) -> Vec<usize> {
    probs
        .rows()
        .into_iter()
        .map(|row| {
            let mut best = 0;
            for (i, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = i;
                }
            }
            best
        })
        .collect()
}

/// Predicted class for every example, in batches of `EVAL_BATCH`.
pub fn predict(model: &Model, examples: &[Example]) -> Vec<usize> {
    const EVAL_BATCH: usize = 512;
    let mut out = Vec::with_capacity(examples.len());
    for chunk in examples.chunks(EVAL_BATCH) {
        let left: Vec<&[usize]> = chunk.iter().map(|e| e.left.as_slice()).collect();
        let right: Vec<&[usize]> = chunk.iter().map(|e| e.right.as_slice()).collect();
        out.extend(argmax_rows(&model.predict(&left, &right)));
    }
    out
}

/// Counts indexed by (target, prediction).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Confusion {
    pub counts: [[usize; Relation::COUNT]; Relation::COUNT],
}

impl Confusion {
    pub fn from_predictions(targets: impl IntoIterator<Item = usize>, predictions: impl IntoIterator<Item = usize>) -> Confusion {
        let mut counts = [[0; Relation::COUNT]; Relation::COUNT];
        for (t, p) in targets.into_iter().zip(predictions) {
            counts[t][p] += 1;
        }
        Confusion { counts }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn accuracy(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        (0..Relation::COUNT).map(|i| self.counts[i][i]).sum::<usize>() as f64 / total as f64
    }

    /// Each row divided by its total; empty rows stay zero.
    pub fn row_normalized(&self) -> [[f64; Relation::COUNT]; Relation::COUNT] {
        let mut out = [[0.0; Relation::COUNT]; Relation::COUNT];
        for (r, row) in self.counts.iter().enumerate() {
            let n: usize = row.iter().sum();
            if n > 0 {
                for (c, &v) in row.iter().enumerate() {
                    out[r][c] = v as f64 / n as f64;
                }
            }
        }
        out
    }

    /// Row-normalized table with rows as targets and columns as predictions.
    pub fn normalized_tsv(&self) -> String {
        table_tsv(&self.row_normalized(), |v| format!("{v:.4}"))
    }

    /// Raw counts of misclassifications only; the diagonal is zero.
    pub fn errors_tsv(&self) -> String {
        let mut m = self.counts;
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 0;
        }
        table_tsv(&m, |v| v.to_string())
    }
}

fn table_tsv<T: Copy>(m: &[[T; Relation::COUNT]; Relation::COUNT], fmt: impl Fn(T) -> String) -> String {
    let mut s = String::from("target\\prediction");
    for r in Relation::ALL {
        let _ = write!(s, "\t{}", r.symbol());
    }
    s.push('\n');
    for (i, row) in m.iter().enumerate() {
        s.push_str(Relation::ALL[i].symbol());
        for &v in row {
            let _ = write!(s, "\t{}", fmt(v));
        }
        s.push('\n');
    }
    s
}

pub fn evaluate(model: &Model, examples: &[Example]) -> Confusion {
    let predictions = predict(model, examples);
    Confusion::from_predictions(examples.iter().map(|e| e.label), predictions)
}
