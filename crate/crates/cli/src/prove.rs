use std::path::PathBuf;

use clap::Args;

use entail_core::fol::{compile_axioms, filter_axioms, translate};
use entail_core::lang::parse_str;
use entail_core::prover::{analyze_pair, Limits};

use crate::{load_language, CliError};

#[derive(Args, Debug)]
pub struct ProveArgs {
    pub left: String,
    pub right: String,
    #[arg(long)]
    pub language: Option<PathBuf>,
    /// Print the translations, the axioms used, the four satisfiability
    /// results and a model or refutation for each.
    #[arg(long)]
    pub explain: bool,
    #[arg(long, default_value_t = Limits::default().max_domain)]
    pub max_domain: usize,
}

/// The relation symbol, followed by the explanation when requested.
pub fn run(args: &ProveArgs) -> Result<String, CliError> {
    let lang = load_language(args.language.as_deref())?;
    let left = parse_str(&args.left, &lang.vocabulary)?;
    let right = parse_str(&args.right, &lang.vocabulary)?;
    let (phi, psi) = (translate(&left), translate(&right));
    let axioms = filter_axioms(&compile_axioms(&lang), &phi, &psi);
    let limits = Limits { max_domain: args.max_domain, ..Limits::default() };
    let analysis = analyze_pair(&phi, &psi, &axioms, &limits)?;
    let mut out = format!("{}\n", analysis.relation.symbol());
    if args.explain {
        out.push_str(&format!("left:  {phi}\nright: {psi}\naxioms ({}):\n", axioms.len()));
        for a in axioms.axioms() {
            out.push_str(&format!("  {}    [{} {} {}]\n", a.formula, a.source.left, a.source.relation.symbol(), a.source.right));
        }
        out.push_str(&analysis.explain());
    }
    Ok(out)
}
