//! `npproc score` and `npproc eval` subcommands.

use npproc_core::corpus::{load_uci_bow, read_model};
use npproc_core::ibp::{log_prob_lof, read_matrix_blocks, IbpParams};
use npproc_core::topics::perplexity;
use npproc_core::RngStream;

use crate::args::{EvalArgs, ScoreIbpArgs};
use crate::provenance::{comment_header, emit, json_artifact};
use crate::CliError;

pub fn cmd_score_ibp(args: &ScoreIbpArgs) -> Result<(), CliError> {
    let params = IbpParams::new(args.alpha, args.beta)?;
    let text = std::fs::read_to_string(&args.file)?;
    let matrices = read_matrix_blocks(&text)?;
    if matrices.is_empty() {
        return Err(format!("{}: no matrices found", args.file.display()).into());
    }
    let mut out = comment_header(args, 0);
    for z in &matrices {
        out.push_str(&format!("{}\n", log_prob_lof(z, &params).ln()));
    }
    emit(&args.out, &out)?;
    Ok(())
}

pub fn cmd_eval_perplexity(args: &EvalArgs) -> Result<(), CliError> {
    let model = read_model(&args.model)?;
    let heldout = load_uci_bow(&args.heldout_docword, &args.heldout_vocab)?;
    let mut rng = RngStream::new(args.seed, 0);
    let report = perplexity(&model, &heldout, args.fold_in, &mut rng)?;
    emit(&args.out, &json_artifact(args, args.seed, report))?;
    Ok(())
}
