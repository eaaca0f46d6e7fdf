//! Central-difference checks of the analytic gradients.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::model::{Model, ModelConfig, ModelKind, ParamId, Vocab};

pub const STEP: f64 = 1e-5;
pub const TOLERANCE: f64 = 1e-4;

/// Denominator floor. Rounding in a loss near 2 perturbs the central
/// difference by about 2·ε/STEP ≈ 4e-11, which is 4e-5 of this floor.
pub const FLOOR: f64 = 1e-6;

pub struct Batch {
    pub left: Vec<Vec<usize>>,
    pub right: Vec<Vec<usize>>,
    pub labels: Vec<usize>,
}

impl Batch {
    /// `n` pairs of random sequences of 1 to 6 tokens. Lengths differ inside
    /// the batch so that masked steps are exercised.
    pub fn random(rng: &mut ChaCha8Rng, vocab: usize, classes: usize, n: usize) -> Batch {
        let seq = |rng: &mut ChaCha8Rng| {
            let len = rng.random_range(1..=6);
            (0..len).map(|_| rng.random_range(0..vocab)).collect::<Vec<_>>()
        };
        Batch {
            left: (0..n).map(|_| seq(rng)).collect(),
            right: (0..n).map(|_| seq(rng)).collect(),
            labels: (0..n).map(|_| rng.random_range(0..classes)).collect(),
        }
    }

    fn views(&self) -> (Vec<&[usize]>, Vec<&[usize]>) {
        (self.left.iter().map(Vec::as_slice).collect(), self.right.iter().map(Vec::as_slice).collect())
    }

    pub fn loss(&self, model: &Model) -> f64 {
        let (l, r) = self.views();
        model.loss_and_grad(&l, &r, &self.labels).0
    }
}

/// Worst entry of a comparison, with a description of where it occurred.
#[derive(Clone, Debug, Default)]
pub struct Worst {
    pub error: f64,
    pub at: String,
}

/// Largest relative error between the analytic gradient and central
/// differences over every parameter entry.
pub fn worst_error(model: &Model, batch: &Batch) -> Worst {
    let (l, r) = batch.views();
    let (_, grads, _) = model.loss_and_grad(&l, &r, &batch.labels);
    let mut probe = model.clone();
    let mut worst = Worst::default();
    for id in ParamId::ALL {
        let analytic = grads.get(id);
        let cols = analytic.ncols();
        for idx in 0..analytic.len() {
            let pos = (idx / cols, idx % cols);
            let orig = probe.params.get(id)[pos];
            probe.params.get_mut(id)[pos] = orig + STEP;
            let up = batch.loss(&probe);
            probe.params.get_mut(id)[pos] = orig - STEP;
            let down = batch.loss(&probe);
            probe.params.get_mut(id)[pos] = orig;
            let numeric = (up - down) / (2.0 * STEP);
            let a = analytic[pos];
            let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(FLOOR);
            if err > worst.error {
                worst = Worst { error: err, at: format!("{}{pos:?}: analytic {a:e}, numeric {numeric:e}", id.name()) };
            }
        }
    }
    worst
}

/// A model with hidden size 8 and a six-word vocabulary.
pub fn small_model(kind: ModelKind, rng: &mut ChaCha8Rng) -> Model {
    let config = ModelConfig { hidden: 8, embedding: 5, sentence: 4, comparison: 6, ..ModelConfig::new(kind) };
    Model::init(config, Vocab::new((0..6).map(|i| format!("w{i}"))), rng)
}
