//! `npproc compare`: one row per model on a shared held-out set.

use serde::Serialize;

use npproc_core::corpus::{load_uci_bow, read_model};
use npproc_core::topics::{perplexity, FittedModel};
use npproc_core::RngStream;

use crate::args::{CompareArgs, OutputFormat};
use crate::provenance::{comment_header, emit, json_artifact};
use crate::CliError;

#[derive(Serialize)]
struct CompareRow {
    name: String,
    k_active: usize,
    log_perplexity: f64,
    perplexity: f64,
    scored_tokens: u64,
}

#[derive(Serialize)]
struct ComparePayload {
    rows: Vec<CompareRow>,
}

pub fn cmd_compare(args: &CompareArgs) -> Result<(), CliError> {
    let heldout = load_uci_bow(&args.heldout_docword, &args.heldout_vocab)?;

    let mut entries: Vec<(String, FittedModel)> = Vec::new();
    for path in &args.models {
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        entries.push((name, read_model(path)?));
    }
    if args.uniform_baseline {
        entries.push((
            "uniform".to_string(),
            FittedModel::uniform(1, heldout.vocab_size())?,
        ));
    }

    let mut rows = Vec::with_capacity(entries.len());
    for (name, model) in &entries {
        // Every model sees the same stream, so folds and shuffles match.
        let mut rng = RngStream::new(args.seed, 0);
        let report = perplexity(model, &heldout, args.fold_in, &mut rng)?;
        rows.push(CompareRow {
            name: name.clone(),
            k_active: model.k_active(),
            log_perplexity: report.log_perplexity,
            perplexity: report.perplexity,
            scored_tokens: report.scored_tokens,
        });
    }

    let content = match args.format {
        OutputFormat::Json => json_artifact(args, args.seed, ComparePayload { rows }),
        OutputFormat::Csv => {
            let mut out = comment_header(args, args.seed);
            out.push_str("name,k_active,log_perplexity,perplexity,scored_tokens\n");
            for r in &rows {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.name, r.k_active, r.log_perplexity, r.perplexity, r.scored_tokens
                ));
            }
            out
        }
    };
    emit(&args.out, &content)?;
    Ok(())
}
