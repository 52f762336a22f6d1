//! Generative topic models and their collapsed Gibbs samplers.
//!
//! Two models ship: plain latent Dirichlet allocation, and the focused
//! topic model whose per-document topic weights are a Dirichlet drawn on
//! an IBP-sampled binary support, so a strong corpus-level topic can be
//! shut off within a document. [`perplexity`] evaluates either on held-out
//! documents with the document-completion protocol.

mod eval;
mod ftm;
mod lda;

pub use eval::{perplexity, PerplexityReport};
pub use ftm::{
    ftm_generate, ftm_gibbs_fit, ftm_gibbs_fit_observed, ftm_joint_log_prob,
    gating_invariant_holds, FtmTruth,
};
pub use lda::{
    lda_generate, lda_gibbs_fit, lda_gibbs_fit_observed, lda_joint_log_prob, LdaTruth,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ibp::IbpParams;

/// Parameters of the LDA generative process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LdaParams {
    /// Number of topics k.
    pub n_topics: usize,
    /// Symmetric document-topic concentration (alpha).
    pub doc_topic_conc: f64,
    /// Symmetric topic-word concentration (eta).
    pub topic_word_conc: f64,
    /// Mean document length (kappa).
    pub mean_doc_length: f64,
    pub vocab_size: usize,
}

impl LdaParams {
    pub fn new(
        n_topics: usize,
        doc_topic_conc: f64,
        topic_word_conc: f64,
        mean_doc_length: f64,
        vocab_size: usize,
    ) -> Result<Self> {
        if n_topics == 0 {
            return Err(Error::domain("n_topics must be >= 1"));
        }
        if vocab_size == 0 {
            return Err(Error::domain("vocab_size must be >= 1"));
        }
        for (name, v) in [
            ("doc_topic_conc", doc_topic_conc),
            ("topic_word_conc", topic_word_conc),
            ("mean_doc_length", mean_doc_length),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Domain(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        Ok(LdaParams {
            n_topics,
            doc_topic_conc,
            topic_word_conc,
            mean_doc_length,
            vocab_size,
        })
    }
}

/// Parameters of the focused topic model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FtmParams {
    /// Buffet parameters driving the binary gate matrix.
    pub ibp: IbpParams,
    /// Concentration (phi) applied to each active topic cell.
    pub topic_conc: f64,
    /// Symmetric topic-word concentration (eta).
    pub topic_word_conc: f64,
    /// Mean document length (kappa).
    pub mean_doc_length: f64,
    pub vocab_size: usize,
}

impl FtmParams {
    pub fn new(
        ibp: IbpParams,
        topic_conc: f64,
        topic_word_conc: f64,
        mean_doc_length: f64,
        vocab_size: usize,
    ) -> Result<Self> {
        if vocab_size == 0 {
            return Err(Error::domain("vocab_size must be >= 1"));
        }
        for (name, v) in [
            ("topic_conc", topic_conc),
            ("topic_word_conc", topic_word_conc),
            ("mean_doc_length", mean_doc_length),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Domain(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        Ok(FtmParams {
            ibp,
            topic_conc,
            topic_word_conc,
            mean_doc_length,
            vocab_size,
        })
    }
}

/// Per-token topic assignments with the count tables the samplers keep
/// incrementally: doc x topic, topic x word, and per-topic totals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopicState {
    z: Vec<Vec<usize>>,
    n_dk: Vec<Vec<u32>>,
    n_kw: Vec<Vec<u32>>,
    n_k: Vec<u32>,
}

impl TopicState {
    /// Build count tables from scratch for given assignments and tokens.
    pub fn from_assignments(
        docs: &[Vec<u32>],
        z: Vec<Vec<usize>>,
        n_topics: usize,
        vocab_size: usize,
    ) -> Result<Self> {
        if docs.len() != z.len() {
            return Err(Error::Shape(format!(
                "{} documents but {} assignment vectors",
                docs.len(),
                z.len()
            )));
        }
        let mut n_dk = vec![vec![0u32; n_topics]; docs.len()];
        let mut n_kw = vec![vec![0u32; vocab_size]; n_topics];
        let mut n_k = vec![0u32; n_topics];
        for (d, (tokens, zs)) in docs.iter().zip(&z).enumerate() {
            if tokens.len() != zs.len() {
                return Err(Error::Shape(format!(
                    "document {d} has {} tokens but {} assignments",
                    tokens.len(),
                    zs.len()
                )));
            }
            for (&w, &k) in tokens.iter().zip(zs) {
                if k >= n_topics || w as usize >= vocab_size {
                    return Err(Error::domain("assignment or word id out of range"));
                }
                n_dk[d][k] += 1;
                n_kw[k][w as usize] += 1;
                n_k[k] += 1;
            }
        }
        Ok(TopicState { z, n_dk, n_kw, n_k })
    }

    pub fn z(&self) -> &[Vec<usize>] {
        &self.z
    }

    pub fn n_dk(&self) -> &[Vec<u32>] {
        &self.n_dk
    }

    pub fn n_kw(&self) -> &[Vec<u32>] {
        &self.n_kw
    }

    pub fn n_k(&self) -> &[u32] {
        &self.n_k
    }

    pub fn n_topics(&self) -> usize {
        self.n_k.len()
    }

    /// True when the incrementally maintained tables match a from-scratch
    /// rebuild — the checked consistency invariant.
    pub fn consistent_with(&self, docs: &[Vec<u32>]) -> bool {
        match TopicState::from_assignments(
            docs,
            self.z.clone(),
            self.n_topics(),
            self.n_kw.first().map_or(0, |r| r.len()),
        ) {
            Ok(rebuilt) => rebuilt == *self,
            Err(_) => false,
        }
    }

    pub(crate) fn decrement(&mut self, d: usize, w: u32, k: usize) {
        self.n_dk[d][k] -= 1;
        self.n_kw[k][w as usize] -= 1;
        self.n_k[k] -= 1;
    }

    pub(crate) fn increment(&mut self, d: usize, w: u32, k: usize) {
        self.n_dk[d][k] += 1;
        self.n_kw[k][w as usize] += 1;
        self.n_k[k] += 1;
    }

    pub(crate) fn set_assignment(&mut self, d: usize, t: usize, k: usize) {
        self.z[d][t] = k;
    }
}

/// Which generative model a fitted artifact came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Lda,
    Ftm,
}

/// Point estimates from a Gibbs run: row-stochastic topic-word and
/// doc-topic matrices, plus the binary gate matrix for focused models.
///
/// `doc_topic_conc` carries the doc-side concentration into held-out
/// evaluation, where fold-in tokens estimate a fresh document's weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub kind: ModelKind,
    pub topic_word_probs: Vec<Vec<f64>>,
    pub doc_topic_probs: Vec<Vec<f64>>,
    pub ftm_gates: Option<Vec<Vec<bool>>>,
    pub doc_topic_conc: f64,
}

impl FittedModel {
    /// The calibration baseline: every topic row exactly uniform.
    pub fn uniform(n_topics: usize, vocab_size: usize) -> Result<Self> {
        if n_topics == 0 || vocab_size == 0 {
            return Err(Error::domain("uniform model needs n_topics, vocab_size >= 1"));
        }
        let row = vec![1.0 / vocab_size as f64; vocab_size];
        Ok(FittedModel {
            kind: ModelKind::Lda,
            topic_word_probs: vec![row; n_topics],
            doc_topic_probs: vec![vec![1.0 / n_topics as f64; n_topics]],
            ftm_gates: None,
            doc_topic_conc: 1.0,
        })
    }

    pub fn n_topics(&self) -> usize {
        self.topic_word_probs.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.topic_word_probs.first().map_or(0, |r| r.len())
    }

    /// Occupied topic count: total topics for LDA, gate-supported topics
    /// (any document open) for a focused model.
    pub fn k_active(&self) -> usize {
        match &self.ftm_gates {
            None => self.n_topics(),
            Some(gates) => (0..self.n_topics())
                .filter(|&k| gates.iter().any(|row| row[k]))
                .count(),
        }
    }

    /// Check the distributional-row and gating invariants.
    pub fn validate(&self) -> Result<()> {
        if self.topic_word_probs.is_empty() {
            return Err(Error::domain("model has no topics"));
        }
        let v = self.vocab_size();
        for row in &self.topic_word_probs {
            if row.len() != v {
                return Err(Error::domain("ragged topic_word_probs"));
            }
            check_stochastic_row(row)?;
        }
        let k = self.n_topics();
        for row in &self.doc_topic_probs {
            if row.len() != k {
                return Err(Error::domain("ragged doc_topic_probs"));
            }
            check_stochastic_row(row)?;
        }
        if let Some(gates) = &self.ftm_gates {
            if gates.len() != self.doc_topic_probs.len() {
                return Err(Error::domain("gate rows do not match doc rows"));
            }
            for (g_row, p_row) in gates.iter().zip(&self.doc_topic_probs) {
                if g_row.len() != k {
                    return Err(Error::domain("ragged ftm_gates"));
                }
                for (&g, &p) in g_row.iter().zip(p_row) {
                    if !g && p != 0.0 {
                        return Err(Error::domain(
                            "doc_topic_probs positive where the gate is closed",
                        ));
                    }
                }
            }
        }
        if !self.doc_topic_conc.is_finite() || self.doc_topic_conc <= 0.0 {
            return Err(Error::domain("doc_topic_conc must be finite and > 0"));
        }
        Ok(())
    }
}

fn check_stochastic_row(row: &[f64]) -> Result<()> {
    let sum: f64 = row.iter().sum();
    if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) || (sum - 1.0).abs() > 1e-10 {
        return Err(Error::Domain(format!(
            "row is not a probability vector (sum {sum})"
        )));
    }
    Ok(())
}

/// A view of the sampler state handed to per-sweep observers.
pub struct SweepView<'a> {
    /// Sweep index, starting at 0.
    pub sweep: usize,
    pub state: &'a TopicState,
    /// Gate matrix; `None` for LDA.
    pub gates: Option<&'a [Vec<bool>]>,
}

/// Document length draw: Poisson(kappa), resampled once on zero, then
/// floored at one. The resulting mean is kappa/(1 - exp(-kappa)) up to the
/// second-chance correction.
pub(crate) fn sample_doc_length(
    kappa: f64,
    rng: &mut crate::rng::RngStream,
) -> Result<usize> {
    let mut n = rng.sample_poisson(kappa)?;
    if n == 0 {
        n = rng.sample_poisson(kappa)?;
    }
    Ok(n.max(1) as usize)
}

/// Dirichlet draw that tolerates a single cell (a point mass).
pub(crate) fn sample_simplex(
    conc: f64,
    len: usize,
    rng: &mut crate::rng::RngStream,
) -> Result<Vec<f64>> {
    if len == 1 {
        return Ok(vec![1.0]);
    }
    rng.sample_dirichlet(&vec![conc; len])
}

/// Synthetic vocabulary for generated corpora.
pub(crate) fn synthetic_vocab(vocab_size: usize) -> Vec<String> {
    (0..vocab_size).map(|i| format!("w{i}")).collect()
}

/// Normalize smoothed counts into a probability row.
pub(crate) fn normalize_row(row: &mut [f64]) {
    let sum: f64 = row.iter().sum();
    debug_assert!(sum > 0.0);
    for v in row.iter_mut() {
        *v /= sum;
    }
}
