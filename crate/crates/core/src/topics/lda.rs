//! Latent Dirichlet allocation: forward generation and collapsed Gibbs.

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::logprob::ln_gamma;
use crate::rng::RngStream;

use super::{
    normalize_row, sample_doc_length, sample_simplex, synthetic_vocab, FittedModel, LdaParams,
    ModelKind, SweepView, TopicState,
};

/// Ground truth retained from a generated corpus.
#[derive(Debug, Clone)]
pub struct LdaTruth {
    /// Token-level assignments in the corpus's canonical token order.
    pub state: TopicState,
    pub topic_word_probs: Vec<Vec<f64>>,
    /// The theta drawn for each document.
    pub doc_topic_props: Vec<Vec<f64>>,
}

/// Generate a corpus from the LDA process.
///
/// Per document: length from the floored Poisson, theta from the symmetric
/// Dirichlet, then (topic, word) per token. Topic rows are drawn from
/// Dir(eta) unless supplied. Tokens are sorted by word id so the returned
/// assignments line up with [`Corpus::doc_tokens`].
pub fn lda_generate(
    params: &LdaParams,
    n_docs: usize,
    topic_word_probs: Option<&[Vec<f64>]>,
    rng: &mut RngStream,
) -> Result<(Corpus, LdaTruth)> {
    if n_docs == 0 {
        return Err(Error::domain("n_docs must be >= 1"));
    }
    let k = params.n_topics;
    let v = params.vocab_size;

    let beta: Vec<Vec<f64>> = match topic_word_probs {
        Some(rows) => {
            if rows.len() != k || rows.iter().any(|r| r.len() != v) {
                return Err(Error::Shape(format!(
                    "topic_word_probs must be {k} x {v}"
                )));
            }
            for row in rows {
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > 1e-9 || row.iter().any(|&p| p < 0.0) {
                    return Err(Error::domain("topic_word_probs rows must sum to 1"));
                }
            }
            rows.to_vec()
        }
        None => (0..k)
            .map(|_| sample_simplex(params.topic_word_conc, v, rng))
            .collect::<Result<_>>()?,
    };

    let mut docs_sparse = Vec::with_capacity(n_docs);
    let mut docs_tokens = Vec::with_capacity(n_docs);
    let mut z_all = Vec::with_capacity(n_docs);
    let mut thetas = Vec::with_capacity(n_docs);
    for _ in 0..n_docs {
        let len = sample_doc_length(params.mean_doc_length, rng)?;
        let theta = sample_simplex(params.doc_topic_conc, k, rng)?;
        let mut pairs: Vec<(u32, usize)> = Vec::with_capacity(len);
        for _ in 0..len {
            let topic = rng.sample_categorical(&theta)?;
            let word = rng.sample_categorical(&beta[topic])? as u32;
            pairs.push((word, topic));
        }
        pairs.sort_by_key(|&(w, _)| w);

        let mut sparse: Vec<(u32, u32)> = Vec::new();
        for &(w, _) in &pairs {
            match sparse.last_mut() {
                Some(last) if last.0 == w => last.1 += 1,
                _ => sparse.push((w, 1)),
            }
        }
        docs_sparse.push(sparse);
        docs_tokens.push(pairs.iter().map(|&(w, _)| w).collect::<Vec<u32>>());
        z_all.push(pairs.iter().map(|&(_, t)| t).collect::<Vec<usize>>());
        thetas.push(theta);
    }

    let corpus = Corpus::new(synthetic_vocab(v), docs_sparse, None)?;
    let state = TopicState::from_assignments(&docs_tokens, z_all, k, v)?;
    Ok((
        corpus,
        LdaTruth {
            state,
            topic_word_probs: beta,
            doc_topic_props: thetas,
        },
    ))
}

/// Collapsed Gibbs fit; see [`lda_gibbs_fit_observed`] for the observer hook.
pub fn lda_gibbs_fit(
    corpus: &Corpus,
    params: &LdaParams,
    n_iters: usize,
    burn_in: usize,
    rng: &mut RngStream,
) -> Result<FittedModel> {
    lda_gibbs_fit_observed(corpus, params, n_iters, burn_in, rng, &mut |_| {})
}

/// Collapsed Gibbs fit with a per-sweep observer.
///
/// Each token is resampled with weight
/// `(n_dk + alpha)(n_kw + eta)/(n_k + V eta)` computed without the token
/// itself; point estimates average the count tables over post-burn-in
/// sweeps. Empty documents are skipped; an empty corpus is an error.
pub fn lda_gibbs_fit_observed(
    corpus: &Corpus,
    params: &LdaParams,
    n_iters: usize,
    burn_in: usize,
    rng: &mut RngStream,
    observer: &mut dyn FnMut(&SweepView),
) -> Result<FittedModel> {
    let docs = expand_corpus(corpus, params.vocab_size)?;
    if n_iters <= burn_in {
        return Err(Error::Domain(format!(
            "need n_iters > burn_in, got {n_iters} <= {burn_in}"
        )));
    }
    let k = params.n_topics;
    let v = params.vocab_size;
    let alpha = params.doc_topic_conc;
    let eta = params.topic_word_conc;

    let z: Vec<Vec<usize>> = docs
        .iter()
        .map(|tokens| tokens.iter().map(|_| rng.uniform_index(k)).collect())
        .collect();
    let mut state = TopicState::from_assignments(&docs, z, k, v)?;

    let mut acc = CountAccumulator::new(docs.len(), k, v);
    let mut weights = vec![0.0; k];
    for sweep in 0..n_iters {
        for (d, tokens) in docs.iter().enumerate() {
            for (t, &w) in tokens.iter().enumerate() {
                let old = state.z()[d][t];
                state.decrement(d, w, old);
                for (kk, wt) in weights.iter_mut().enumerate() {
                    *wt = (state.n_dk()[d][kk] as f64 + alpha)
                        * (state.n_kw()[kk][w as usize] as f64 + eta)
                        / (state.n_k()[kk] as f64 + v as f64 * eta);
                }
                let new = rng.sample_categorical(&weights)?;
                state.increment(d, w, new);
                state.set_assignment(d, t, new);
            }
        }
        debug_assert!(state.consistent_with(&docs));
        observer(&SweepView {
            sweep,
            state: &state,
            gates: None,
        });
        if sweep >= burn_in {
            acc.add(&state);
        }
    }

    let (doc_topic_probs, topic_word_probs) = acc.into_estimates(alpha, eta);
    Ok(FittedModel {
        kind: ModelKind::Lda,
        topic_word_probs,
        doc_topic_probs,
        ftm_gates: None,
        doc_topic_conc: alpha,
    })
}

/// Collapsed joint log-probability ln p(w, z) of a sampler state; used for
/// convergence traces and chain comparison.
pub fn lda_joint_log_prob(state: &TopicState, params: &LdaParams) -> f64 {
    let k = params.n_topics as f64;
    let v = params.vocab_size as f64;
    let alpha = params.doc_topic_conc;
    let eta = params.topic_word_conc;
    let mut ln = 0.0;
    for row in state.n_dk() {
        let n_d: u32 = row.iter().sum();
        if n_d == 0 {
            continue;
        }
        ln += ln_gamma(k * alpha) - ln_gamma(n_d as f64 + k * alpha);
        for &c in row {
            if c > 0 {
                ln += ln_gamma(c as f64 + alpha) - ln_gamma(alpha);
            }
        }
    }
    for (kk, row) in state.n_kw().iter().enumerate() {
        ln += ln_gamma(v * eta) - ln_gamma(state.n_k()[kk] as f64 + v * eta);
        for &c in row {
            if c > 0 {
                ln += ln_gamma(c as f64 + eta) - ln_gamma(eta);
            }
        }
    }
    ln
}

pub(crate) fn expand_corpus(corpus: &Corpus, vocab_size: usize) -> Result<Vec<Vec<u32>>> {
    if corpus.vocab_size() != vocab_size {
        return Err(Error::Shape(format!(
            "corpus vocabulary {} != params vocab_size {vocab_size}",
            corpus.vocab_size()
        )));
    }
    if corpus.n_docs() == 0 || corpus.total_tokens() == 0 {
        return Err(Error::domain("corpus has no tokens to fit"));
    }
    Ok((0..corpus.n_docs()).map(|d| corpus.doc_tokens(d)).collect())
}

/// Running sums of the count tables across averaged sweeps.
pub(crate) struct CountAccumulator {
    n_dk: Vec<Vec<f64>>,
    n_kw: Vec<Vec<f64>>,
    sweeps: usize,
}

impl CountAccumulator {
    pub(crate) fn new(n_docs: usize, k: usize, v: usize) -> Self {
        CountAccumulator {
            n_dk: vec![vec![0.0; k]; n_docs],
            n_kw: vec![vec![0.0; v]; k],
            sweeps: 0,
        }
    }

    pub(crate) fn add(&mut self, state: &TopicState) {
        for (acc, row) in self.n_dk.iter_mut().zip(state.n_dk()) {
            for (a, &c) in acc.iter_mut().zip(row) {
                *a += c as f64;
            }
        }
        for (acc, row) in self.n_kw.iter_mut().zip(state.n_kw()) {
            for (a, &c) in acc.iter_mut().zip(row) {
                *a += c as f64;
            }
        }
        self.sweeps += 1;
    }

    pub(crate) fn mean_n_dk(&self) -> Vec<Vec<f64>> {
        let s = self.sweeps as f64;
        self.n_dk
            .iter()
            .map(|row| row.iter().map(|&c| c / s).collect())
            .collect()
    }

    pub(crate) fn mean_n_kw(&self) -> Vec<Vec<f64>> {
        let s = self.sweeps as f64;
        self.n_kw
            .iter()
            .map(|row| row.iter().map(|&c| c / s).collect())
            .collect()
    }

    /// Smooth the averaged counts into row-stochastic estimates.
    fn into_estimates(self, alpha: f64, eta: f64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let mut theta = self.mean_n_dk();
        for row in &mut theta {
            for vme in row.iter_mut() {
                *vme += alpha;
            }
            normalize_row(row);
        }
        let mut phi = self.mean_n_kw();
        for row in &mut phi {
            for vme in row.iter_mut() {
                *vme += eta;
            }
            normalize_row(row);
        }
        (theta, phi)
    }
}
