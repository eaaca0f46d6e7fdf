use entail_net::gradcheck::{small_model, worst_error, Batch, TOLERANCE};
use entail_net::model::{ModelKind, ParamId};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn check_kind(kind: ModelKind, configs: u64) {
    for seed in 0..configs {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 * seed + kind as u64);
        let model = small_model(kind, &mut rng);
        let batch = Batch::random(&mut rng, 6, 7, 3);
        let w = worst_error(&model, &batch);
        assert!(w.error <= TOLERANCE, "{kind} config {seed}: relative error {:e} at {}", w.error, w.at);
    }
}

#[test]
fn srn_gradients_match_finite_differences() {
    check_kind(ModelKind::Srn, 6);
}

#[test]
fn gru_gradients_match_finite_differences() {
    check_kind(ModelKind::Gru, 6);
}

#[test]
fn lstm_gradients_match_finite_differences() {
    check_kind(ModelKind::Lstm, 6);
}

#[test]
fn sum_gradients_match_finite_differences() {
    check_kind(ModelKind::Sum, 6);
}

#[test]
fn gradients_with_a_single_sentence_length() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for kind in [ModelKind::Srn, ModelKind::Gru, ModelKind::Lstm] {
        let model = small_model(kind, &mut rng);
        let mut batch = Batch::random(&mut rng, 6, 7, 4);
        for s in batch.left.iter_mut().chain(batch.right.iter_mut()) {
            s.resize(4, 1);
        }
        let w = worst_error(&model, &batch);
        assert!(w.error <= TOLERANCE, "{kind}: {:e} at {}", w.error, w.at);
    }
}

#[test]
fn frozen_embeddings_still_receive_a_correct_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut model = small_model(ModelKind::Gru, &mut rng);
    model.config.frozen_embeddings = true;
    assert!(!model.trainable()[ParamId::Embedding as usize]);
    let batch = Batch::random(&mut rng, 6, 7, 3);
    let w = worst_error(&model, &batch);
    assert!(w.error <= TOLERANCE, "{:e} at {}", w.error, w.at);
}
