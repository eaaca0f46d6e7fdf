use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use entail_core::data::{apply_substitution, read_dataset, Embeddings, SubstitutionSuite};
use entail_net::train::{encode_pairs, evaluate};
use entail_net::{checkpoint, pretrained};

use crate::{create_dir, load_language, write_file, write_run_config, CliError};

#[derive(Args, Debug, Serialize)]
pub struct ZeroshotArgs {
    /// Model trained with frozen pretrained embeddings.
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Test pairs, in the test.tsv format.
    #[arg(long)]
    pub data: PathBuf,
    /// Substitution suite (JSON).
    #[arg(long)]
    pub sub: PathBuf,
    /// Pretrained vectors; overrides the suite's embedding source.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[arg(long)]
    pub language: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

/// Accuracy on the pairs touched by one substitution.
#[derive(Clone, Debug, Serialize)]
pub struct SubstitutionResult {
    pub name: String,
    /// Original word, replacement and their cosine distance.
    pub words: Vec<(String, String, f64)>,
    pub pairs: usize,
    pub before: Option<f64>,
    pub after: f64,
}

pub fn run(args: &ZeroshotArgs) -> Result<Vec<SubstitutionResult>, CliError> {
    let lang = load_language(args.language.as_deref())?;
    let suite = SubstitutionSuite::load(&args.sub)?;
    let trainer = checkpoint::load(&args.checkpoint)?;
    if !trainer.model.config.frozen_embeddings {
        return Err(CliError::Config("zero-shot evaluation needs a model trained with --embeddings".into()));
    }
    let test = read_dataset(&args.data)?;
    create_dir(&args.out)?;
    write_run_config(&args.out, "zeroshot", args)?;

    let mut results = Vec::new();
    for spec in &suite.substitutions {
        let path = args
            .embeddings
            .clone()
            .or_else(|| spec.embedding_source.clone())
            .ok_or_else(|| CliError::Config(format!("no embedding file for substitution {}", spec.name)))?;
        let wanted: BTreeSet<String> = spec.mapping.iter().flat_map(|(a, b)| [a.clone(), b.clone()]).collect();
        let emb = Embeddings::read(&path, Some(&wanted))?;
        let frag = apply_substitution(&test, spec, &lang, Some(&emb))?;
        let mut model = trainer.model.clone();
        pretrained::extend(&mut model, &emb, spec.mapping.values())?;
        let mut words = Vec::new();
        for (w, s) in &spec.mapping {
            let d = emb
                .cos_dist(w, s)
                .ok_or_else(|| CliError::Data(format!("no vector for {w}")))?;
            log::info!("cos_dist({w}, {s}) = {d:.2}");
            words.push((w.clone(), s.clone(), d));
        }
        let before = if suite.after_only {
            None
        } else {
            Some(evaluate(&model, &encode_pairs(&model.vocab, &frag.original)?).accuracy())
        };
        let after = evaluate(&model, &encode_pairs(&model.vocab, &frag.substituted)?).accuracy();
        results.push(SubstitutionResult { name: spec.name.clone(), words, pairs: frag.original.len(), before, after });
    }
    write_file(&args.out.join("zeroshot.tsv"), results_tsv(&results))?;
    Ok(results)
}

pub fn results_tsv(results: &[SubstitutionResult]) -> String {
    let mut s = String::from("substitution\twords\tcos_dist\tpairs\tbefore\tafter\n");
    for r in results {
        let words: Vec<String> = r.words.iter().map(|(a, b, _)| format!("{a}->{b}")).collect();
        let dists: Vec<String> = r.words.iter().map(|(.., d)| format!("{d:.2}")).collect();
        let before = r.before.map_or("-".to_string(), |b| format!("{:.1}", 100.0 * b));
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}\t{before}\t{:.1}",
            r.name,
            words.join(","),
            dists.join(","),
            r.pairs,
            100.0 * r.after
        );
    }
    s
}
