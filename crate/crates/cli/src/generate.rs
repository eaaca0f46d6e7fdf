use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use entail_core::data::{distribution_tsv, generate_dataset, write_dataset, PairSampler, SplitSpec};
use entail_core::prover::Limits;
use entail_core::SlotPolicy;

use crate::{create_dir, load_language, write_file, write_run_config, CliError};

#[derive(Args, Debug, Serialize)]
pub struct GenerateArgs {
    /// Language description (JSON); the built-in language when omitted.
    #[arg(long)]
    pub language: Option<PathBuf>,
    #[arg(long, default_value_t = 30_000)]
    pub train: usize,
    #[arg(long, default_value_t = 5_000)]
    pub test: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Sentence lengths allowed in the training split, e.g. 5,7,8.
    #[arg(long, value_delimiter = ',')]
    pub train_lengths: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub test_lengths: Option<Vec<usize>>,
    /// Also allow `not` before the object quantifier.
    #[arg(long)]
    pub five_neg_slots: bool,
    /// Sample pairs uniformly, without the related-pair proposals or the
    /// fixed independence share.
    #[arg(long)]
    pub uniform: bool,
    #[arg(long, default_value_t = Limits::default().max_domain)]
    pub max_domain: usize,
    #[arg(long, default_value_t = Limits::default().max_resolution_steps)]
    pub max_resolution_steps: usize,
    /// Fail when more than this fraction of labeled candidates is undecided.
    #[arg(long, default_value_t = 0.01)]
    pub max_undecided_rate: f64,
    #[arg(long)]
    pub out: PathBuf,
}

impl GenerateArgs {
    pub fn split_spec(&self) -> SplitSpec {
        let set = |v: &Option<Vec<usize>>| v.as_ref().map(|v| v.iter().copied().collect::<BTreeSet<_>>());
        SplitSpec {
            train_size: self.train,
            test_size: self.test,
            train_lengths: set(&self.train_lengths),
            test_lengths: set(&self.test_lengths),
            seed: self.seed,
            policy: if self.five_neg_slots { SlotPolicy::five_slots() } else { SlotPolicy::four_slots() },
            sampler: if self.uniform { PairSampler::uniform() } else { PairSampler::default() },
        }
    }
}

pub fn run(args: &GenerateArgs) -> Result<(), CliError> {
    let lang = load_language(args.language.as_deref())?;
    let spec = args.split_spec();
    let limits = Limits { max_domain: args.max_domain, max_resolution_steps: args.max_resolution_steps };
    create_dir(&args.out)?;
    write_run_config(&args.out, "generate", args)?;
    let data = generate_dataset(&lang, &spec, &limits)?;
    write_dataset(&data.train, args.out.join("train.tsv"))?;
    write_dataset(&data.test, args.out.join("test.tsv"))?;
    write_file(&args.out.join("distribution.tsv"), distribution_tsv(&data.train, &data.test))?;

    let stats = &data.stats;
    let mut log = String::new();
    let _ = writeln!(log, "labeled\t{}", stats.labeled);
    let _ = writeln!(log, "duplicates\t{}", stats.duplicates);
    let _ = writeln!(log, "undecided\t{}", stats.rejected.len());
    let _ = writeln!(log, "seconds\t{:.1}", stats.seconds);
    for r in &stats.rejected {
        let _ = writeln!(log, "rejected\t{}\t{}\t{}", r.left, r.right, r.reason);
    }
    write_file(&args.out.join("generation.log"), log)?;
    log::info!(
        "{} train / {} test pairs from {} labeled candidates in {:.1}s",
        data.train.len(),
        data.test.len(),
        stats.labeled,
        stats.seconds
    );

    let rate = stats.rejected.len() as f64 / stats.labeled.max(1) as f64;
    if rate > args.max_undecided_rate {
        return Err(CliError::Undecided(format!(
            "{} of {} candidates undecided ({:.2}% > {:.2}%)",
            stats.rejected.len(),
            stats.labeled,
            100.0 * rate,
            100.0 * args.max_undecided_rate
        )));
    }
    Ok(())
}
