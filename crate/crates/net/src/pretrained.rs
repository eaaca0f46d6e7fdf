use ndarray::Array2;

use entail_core::data::Embeddings;

use crate::model::{Model, ModelConfig, Vocab};
use crate::NetError;

/// Embedding table for `vocab` taken from pretrained vectors.
pub fn table(vocab: &Vocab, emb: &Embeddings) -> Result<Array2<f64>, NetError> {
    let missing = emb.missing(vocab.words().iter().map(String::as_str));
    if !missing.is_empty() {
        return Err(NetError::UnknownWords(missing));
    }
    let mut t = Array2::zeros((vocab.len(), emb.dim));
    for (i, w) in vocab.words().iter().enumerate() {
        let v = emb.get(w).expect("checked above");
        t.row_mut(i).assign(&ndarray::ArrayView1::from(v));
    }
    Ok(t)
}

/// Config with the embedding width of `emb` and frozen embeddings.
pub fn frozen_config(mut config: ModelConfig, emb: &Embeddings) -> ModelConfig {
    config.embedding = emb.dim;
    config.frozen_embeddings = true;
    config
}

/// Adds every word in `words` to a frozen model, with its pretrained vector.
pub fn extend(model: &mut Model, emb: &Embeddings, words: impl IntoIterator<Item = impl AsRef<str>>) -> Result<(), NetError> {
    let words: Vec<String> = words.into_iter().map(|w| w.as_ref().to_string()).collect();
    let missing = emb.missing(words.iter().map(String::as_str));
    if !missing.is_empty() {
        return Err(NetError::UnknownWords(missing));
    }
    for w in &words {
        model.add_word(w, emb.get(w).expect("checked above"))?;
    }
    Ok(())
}
