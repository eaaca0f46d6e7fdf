use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;

use entail_core::data::{read_dataset, Embeddings};
use entail_net::model::{ModelConfig, ModelKind, Vocab};
use entail_net::train::{encode_pairs, evaluate, metrics_header, Confusion, TrainConfig, Trainer};
use entail_net::{checkpoint, pretrained};

use crate::{create_dir, load_language, write_file, write_run_config, CliError};

#[derive(Args, Debug, Clone, Serialize)]
pub struct TrainArgs {
    /// Directory holding train.tsv and test.tsv.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "gru")]
    pub model: ModelKind,
    #[arg(long, default_value_t = 50)]
    pub epochs: usize,
    #[arg(long, default_value_t = 32)]
    pub batch: usize,
    /// Seed of the first run; run k uses seed + k.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub runs: u64,
    #[arg(long)]
    pub language: Option<PathBuf>,
    /// Pretrained word vectors; the embedding table is taken from this file
    /// and kept frozen.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

/// Final accuracies of one training run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunResult {
    pub seed: u64,
    pub train_acc: f64,
    pub test_acc: f64,
}

pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Fresh trainer for one run; with pretrained vectors the embedding table is
/// replaced after initialization, so the other tensors match a plain run.
fn new_trainer(args: &TrainArgs, vocab: Vocab, config: TrainConfig) -> Result<Trainer, CliError> {
    match &args.embeddings {
        None => Ok(Trainer::new(ModelConfig::new(args.model), vocab, config)),
        Some(path) => {
            let wanted: BTreeSet<String> = vocab.words().iter().cloned().collect();
            let emb = Embeddings::read(path, Some(&wanted))?;
            let table = pretrained::table(&vocab, &emb)?;
            let model_config = pretrained::frozen_config(ModelConfig::new(args.model), &emb);
            let mut t = Trainer::new(model_config, vocab, config);
            t.model.set_pretrained(table)?;
            Ok(t)
        }
    }
}

pub fn write_confusion(dir: &Path, c: &Confusion) -> Result<(), CliError> {
    write_file(&dir.join("confusion_normalized.tsv"), c.normalized_tsv())?;
    write_file(&dir.join("confusion_errors.tsv"), c.errors_tsv())
}

pub fn run(args: &TrainArgs) -> Result<Vec<RunResult>, CliError> {
    let lang = load_language(args.language.as_deref())?;
    let vocab = Vocab::new(lang.vocabulary.tokens());
    let train = encode_pairs(&vocab, &read_dataset(args.data.join("train.tsv"))?)?;
    let test = encode_pairs(&vocab, &read_dataset(args.data.join("test.tsv"))?)?;
    create_dir(&args.out)?;
    write_run_config(&args.out, "train", args)?;

    let mut results = Vec::new();
    for k in 0..args.runs {
        let seed = args.seed + k;
        let dir = args.out.join(format!("run-{seed}"));
        create_dir(&dir)?;
        write_run_config(&dir, "train", &TrainArgs { seed, runs: 1, out: dir.clone(), ..args.clone() })?;
        let config = TrainConfig { epochs: args.epochs, batch: args.batch, seed, ..TrainConfig::default() };
        let mut trainer = new_trainer(args, vocab.clone(), config)?;
        let mut log = format!("{}\n", metrics_header());
        let metrics_path = dir.join("metrics.tsv");
        trainer.fit(&train, &test, |_, m| {
            log.push_str(&m.to_tsv_row());
            log.push('\n');
            // rewritten after every epoch so that long runs can be followed
            std::fs::write(&metrics_path, &log).map_err(|e| entail_net::NetError::io(&metrics_path, e))
        })?;
        checkpoint::save(&trainer, dir.join("model.ckpt"))?;
        let train_acc = evaluate(&trainer.model, &train).accuracy();
        let confusion = evaluate(&trainer.model, &test);
        write_confusion(&dir, &confusion)?;
        let r = RunResult { seed, train_acc, test_acc: confusion.accuracy() };
        log::info!("{} seed {seed}: train {:.2}% test {:.2}%", args.model, 100.0 * r.train_acc, 100.0 * r.test_acc);
        results.push(r);
    }
    write_file(&args.out.join("summary.tsv"), summary_tsv(args.model, &results))?;
    Ok(results)
}

pub fn summary_tsv(kind: ModelKind, results: &[RunResult]) -> String {
    let mut s = String::from("model\tseed\ttrain_acc\ttest_acc\n");
    for r in results {
        let _ = writeln!(s, "{kind}\t{}\t{:.2}\t{:.2}", r.seed, 100.0 * r.train_acc, 100.0 * r.test_acc);
    }
    let (tm, ts) = mean_sd(&results.iter().map(|r| 100.0 * r.train_acc).collect::<Vec<_>>());
    let (em, es) = mean_sd(&results.iter().map(|r| 100.0 * r.test_acc).collect::<Vec<_>>());
    let _ = writeln!(s, "{kind}\tmean±sd\t{tm:.1} ± {ts:.1}\t{em:.1} ± {es:.1}");
    s
}

#[derive(Args, Debug, Serialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// A dataset file in the train.tsv format.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run_eval(args: &EvalArgs) -> Result<Confusion, CliError> {
    let trainer = checkpoint::load(&args.checkpoint)?;
    let data = encode_pairs(&trainer.model.vocab, &read_dataset(&args.data)?)?;
    let c = evaluate(&trainer.model, &data);
    create_dir(&args.out)?;
    write_run_config(&args.out, "eval", args)?;
    write_confusion(&args.out, &c)?;
    write_file(&args.out.join("accuracy.tsv"), format!("pairs\taccuracy\n{}\t{:.4}\n", c.total(), c.accuracy()))?;
    Ok(c)
}

