//! Held-out evaluation: document-completion perplexity.

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::rng::RngStream;

use super::FittedModel;

/// Result of a perplexity evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerplexityReport {
    /// Negative mean per-token log-likelihood over scored tokens.
    pub log_perplexity: f64,
    pub perplexity: f64,
    pub scored_tokens: u64,
    /// Documents whose fold-in or scored half came out empty.
    pub skipped_docs: u64,
}

/// Fixed-point iterations for the fold-in weight estimate.
const FOLD_IN_ITERS: usize = 64;

/// Document-completion perplexity of `model` on `heldout`.
///
/// Each held-out document's tokens are shuffled; the first
/// `ceil(fold_in_fraction * N_d)` estimate the document's topic weights by
/// token-level conditional estimation with the model's topic rows held
/// fixed, and the remainder are scored. Documents with an empty half are
/// skipped and counted.
pub fn perplexity(
    model: &FittedModel,
    heldout: &Corpus,
    fold_in_fraction: f64,
    rng: &mut RngStream,
) -> Result<PerplexityReport> {
    if !(fold_in_fraction > 0.0 && fold_in_fraction < 1.0) {
        return Err(Error::Domain(format!(
            "fold-in fraction must lie in (0,1), got {fold_in_fraction}"
        )));
    }
    model.validate()?;
    if heldout.n_docs() == 0 {
        return Err(Error::domain("held-out corpus has no documents"));
    }
    if heldout.vocab_size() > model.vocab_size() {
        return Err(Error::Shape(format!(
            "held-out vocabulary {} exceeds the model's {}",
            heldout.vocab_size(),
            model.vocab_size()
        )));
    }

    let k = model.n_topics();
    let conc = model.doc_topic_conc;
    let beta = &model.topic_word_probs;

    let mut total_ln = 0.0;
    let mut scored_tokens = 0u64;
    let mut skipped_docs = 0u64;
    for d in 0..heldout.n_docs() {
        let mut tokens = heldout.doc_tokens(d);
        rng.shuffle(&mut tokens);
        let n = tokens.len();
        let n_in = (fold_in_fraction * n as f64).ceil() as usize;
        if n == 0 || n_in >= n {
            skipped_docs += 1;
            continue;
        }
        let (fold_in, scored) = tokens.split_at(n_in);
        let theta = estimate_weights(beta, fold_in, conc, k);
        for &w in scored {
            let p: f64 = (0..k).map(|kk| theta[kk] * beta[kk][w as usize]).sum();
            total_ln += p.ln();
        }
        scored_tokens += scored.len() as u64;
    }

    if scored_tokens == 0 {
        return Err(Error::domain(
            "no scorable tokens: every held-out document was skipped",
        ));
    }
    let log_perplexity = -total_ln / scored_tokens as f64;
    Ok(PerplexityReport {
        log_perplexity,
        perplexity: log_perplexity.exp(),
        scored_tokens,
        skipped_docs,
    })
}

/// EM fixed point for the document's topic weights with the topic rows
/// held fixed: responsibilities under the current theta, then a smoothed
/// re-estimate.
fn estimate_weights(beta: &[Vec<f64>], fold_in: &[u32], conc: f64, k: usize) -> Vec<f64> {
    let mut theta = vec![1.0 / k as f64; k];
    if k == 1 {
        return theta;
    }
    let denom = fold_in.len() as f64 + k as f64 * conc;
    let mut resp = vec![0.0; k];
    for _ in 0..FOLD_IN_ITERS {
        let mut counts = vec![0.0; k];
        for &w in fold_in {
            let mut total = 0.0;
            for kk in 0..k {
                resp[kk] = theta[kk] * beta[kk][w as usize];
                total += resp[kk];
            }
            if total > 0.0 {
                for kk in 0..k {
                    counts[kk] += resp[kk] / total;
                }
            }
        }
        for kk in 0..k {
            theta[kk] = (counts[kk] + conc) / denom;
        }
    }
    theta
}
