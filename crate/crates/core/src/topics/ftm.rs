//! Focused topic model: document weights from a Dirichlet restricted to an
//! IBP-sampled binary support.
//!
//! The gate matrix decouples a topic's corpus-level strength from its
//! per-document activation; a closed gate zeroes the topic's weight in
//! that document outright. Inference truncates the buffet at `k_max`
//! columns so the gate conditionals can use the finite Beta-Bernoulli
//! prior in closed form.

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::ibp::{ibp_sample, log_prob_finite, FeatureMatrix};
use crate::logprob::ln_gamma;
use crate::rng::RngStream;

use super::lda::{expand_corpus, CountAccumulator};
use super::{
    normalize_row, sample_doc_length, sample_simplex, synthetic_vocab, FittedModel, FtmParams,
    ModelKind, SweepView, TopicState,
};

/// Ground truth retained from a generated corpus.
#[derive(Debug, Clone)]
pub struct FtmTruth {
    pub state: TopicState,
    pub topic_word_probs: Vec<Vec<f64>>,
    /// Gated theta per document; exactly zero off the gate support.
    pub doc_topic_props: Vec<Vec<f64>>,
    /// Documents whose empty gate row was rescued with a fresh topic.
    pub n_rescued: usize,
}

/// Generate a corpus from the focused process.
///
/// Gates come from [`ibp_sample`] over documents; a document with no
/// active topic activates one fresh singleton topic. Each theta is a
/// Dirichlet on the document's active cells only.
pub fn ftm_generate(
    params: &FtmParams,
    n_docs: usize,
    rng: &mut RngStream,
) -> Result<(Corpus, Vec<Vec<bool>>, FtmTruth)> {
    if n_docs == 0 {
        return Err(Error::domain("n_docs must be >= 1"));
    }
    let v = params.vocab_size;

    let b = ibp_sample(n_docs, &params.ibp, rng)?;
    let mut gates: Vec<Vec<bool>> = (0..n_docs).map(|i| b.row(i)).collect();
    let mut n_rescued = 0;
    for d in 0..n_docs {
        if !gates[d].iter().any(|&g| g) {
            for (i, row) in gates.iter_mut().enumerate() {
                row.push(i == d);
            }
            n_rescued += 1;
        }
    }
    let k_total = gates[0].len();

    let beta: Vec<Vec<f64>> = (0..k_total)
        .map(|_| sample_simplex(params.topic_word_conc, v, rng))
        .collect::<Result<_>>()?;

    let mut docs_sparse = Vec::with_capacity(n_docs);
    let mut docs_tokens = Vec::with_capacity(n_docs);
    let mut z_all = Vec::with_capacity(n_docs);
    let mut thetas = Vec::with_capacity(n_docs);
    for gate_row in &gates {
        let active: Vec<usize> = (0..k_total).filter(|&k| gate_row[k]).collect();
        let active_theta = sample_simplex(params.topic_conc, active.len(), rng)?;
        let mut theta = vec![0.0; k_total];
        for (&k, &p) in active.iter().zip(&active_theta) {
            theta[k] = p;
        }

        let len = sample_doc_length(params.mean_doc_length, rng)?;
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
    let state = TopicState::from_assignments(&docs_tokens, z_all, k_total, v)?;
    Ok((
        corpus,
        gates,
        FtmTruth {
            state,
            topic_word_probs: beta,
            doc_topic_props: thetas,
            n_rescued,
        },
    ))
}

/// Truncated Gibbs fit; see [`ftm_gibbs_fit_observed`] for the observer hook.
pub fn ftm_gibbs_fit(
    corpus: &Corpus,
    params: &FtmParams,
    k_max: usize,
    n_iters: usize,
    burn_in: usize,
    rng: &mut RngStream,
) -> Result<FittedModel> {
    ftm_gibbs_fit_observed(corpus, params, k_max, n_iters, burn_in, rng, &mut |_| {})
}

/// Truncated Gibbs fit with a per-sweep observer.
///
/// Tokens resample as in LDA but only over gated topics. A gate with
/// document counts is forced open; otherwise it flips by the Bernoulli
/// conditional combining the finite Beta-Bernoulli prior odds with the
/// document's gated Dirichlet-multinomial likelihood ratio.
pub fn ftm_gibbs_fit_observed(
    corpus: &Corpus,
    params: &FtmParams,
    k_max: usize,
    n_iters: usize,
    burn_in: usize,
    rng: &mut RngStream,
    observer: &mut dyn FnMut(&SweepView),
) -> Result<FittedModel> {
    if k_max < 2 {
        return Err(Error::domain("k_max must be >= 2"));
    }
    if n_iters <= burn_in {
        return Err(Error::Domain(format!(
            "need n_iters > burn_in, got {n_iters} <= {burn_in}"
        )));
    }
    let docs = expand_corpus(corpus, params.vocab_size)?;
    let n_docs = docs.len();
    let v = params.vocab_size;
    let phi = params.topic_conc;
    let eta = params.topic_word_conc;
    let ibp_alpha = params.ibp.alpha();
    let a = ibp_alpha / k_max as f64;

    // Sparse start: each document seeds one topic and only forced gates
    // begin open. An all-open start mixes poorly: every open gate keeps
    // capturing stray tokens, which forces it open again.
    let z: Vec<Vec<usize>> = docs
        .iter()
        .map(|tokens| {
            let seed_topic = rng.uniform_index(k_max);
            tokens.iter().map(|_| seed_topic).collect()
        })
        .collect();
    let mut state = TopicState::from_assignments(&docs, z, k_max, v)?;
    let mut gates: Vec<Vec<bool>> = state
        .n_dk()
        .iter()
        .map(|row| row.iter().map(|&c| c > 0).collect())
        .collect();
    let mut col_open: Vec<usize> = (0..k_max)
        .map(|k| gates.iter().filter(|row| row[k]).count())
        .collect();

    let mut acc = CountAccumulator::new(n_docs, k_max, v);
    let mut gate_open_sum = vec![vec![0u32; k_max]; n_docs];
    let mut averaged = 0usize;
    let mut weights = vec![0.0; k_max];
    for sweep in 0..n_iters {
        // Token updates, restricted to gated topics.
        for (d, tokens) in docs.iter().enumerate() {
            for (t, &w) in tokens.iter().enumerate() {
                let old = state.z()[d][t];
                state.decrement(d, w, old);
                for (kk, wt) in weights.iter_mut().enumerate() {
                    *wt = if gates[d][kk] {
                        (state.n_dk()[d][kk] as f64 + phi)
                            * (state.n_kw()[kk][w as usize] as f64 + eta)
                            / (state.n_k()[kk] as f64 + v as f64 * eta)
                    } else {
                        0.0
                    };
                }
                let new = rng.sample_categorical(&weights)?;
                state.increment(d, w, new);
                state.set_assignment(d, t, new);
            }
        }

        // Gate updates.
        for d in 0..n_docs {
            let n_d = docs[d].len() as f64;
            for k in 0..k_max {
                let forced = state.n_dk()[d][k] > 0;
                let was_open = gates[d][k];
                let open = if forced {
                    true
                } else {
                    let m_other = (col_open[k] - was_open as usize) as f64;
                    // Beta(a, 1) predictive odds given the other documents.
                    let mut ln_odds = (m_other + a).ln() - (n_docs as f64 - m_other).ln();
                    if n_d > 0.0 {
                        let active_other = gates[d]
                            .iter()
                            .enumerate()
                            .filter(|&(kk, &g)| g && kk != k)
                            .count() as f64;
                        ln_odds += ln_gamma(phi * (active_other + 1.0))
                            - ln_gamma(n_d + phi * (active_other + 1.0))
                            - ln_gamma(phi * active_other)
                            + ln_gamma(n_d + phi * active_other);
                    }
                    let p_open = if ln_odds > 0.0 {
                        1.0 / (1.0 + (-ln_odds).exp())
                    } else {
                        let e = ln_odds.exp();
                        e / (1.0 + e)
                    };
                    rng.sample_bernoulli(p_open)
                };
                gates[d][k] = open;
                col_open[k] = col_open[k] - was_open as usize + open as usize;
            }
        }

        debug_assert!(gating_invariant_holds(&state, &gates));
        observer(&SweepView {
            sweep,
            state: &state,
            gates: Some(&gates),
        });
        if sweep >= burn_in {
            acc.add(&state);
            for (sums, row) in gate_open_sum.iter_mut().zip(&gates) {
                for (s, &g) in sums.iter_mut().zip(row) {
                    *s += g as u32;
                }
            }
            averaged += 1;
        }
    }

    // Majority-vote gates; a document whose every gate falls below the
    // majority threshold keeps its most-often-open one.
    let mut fitted_gates = vec![vec![false; k_max]; n_docs];
    for d in 0..n_docs {
        let mut any = false;
        let mut best = 0;
        for k in 0..k_max {
            if gate_open_sum[d][k] * 2 > averaged as u32 {
                fitted_gates[d][k] = true;
                any = true;
            }
            if gate_open_sum[d][k] > gate_open_sum[d][best] {
                best = k;
            }
        }
        if !any {
            fitted_gates[d][best] = true;
        }
    }

    let mean_n_dk = acc.mean_n_dk();
    let mut doc_topic_probs = vec![vec![0.0; k_max]; n_docs];
    for d in 0..n_docs {
        for k in 0..k_max {
            if fitted_gates[d][k] {
                doc_topic_probs[d][k] = mean_n_dk[d][k] + phi;
            }
        }
        normalize_row(&mut doc_topic_probs[d]);
    }
    let mut topic_word_probs = acc.mean_n_kw();
    for row in &mut topic_word_probs {
        for vme in row.iter_mut() {
            *vme += eta;
        }
        normalize_row(row);
    }

    Ok(FittedModel {
        kind: ModelKind::Ftm,
        topic_word_probs,
        doc_topic_probs,
        ftm_gates: Some(fitted_gates),
        doc_topic_conc: phi,
    })
}

/// The hard invariant of the truncated sampler: a topic with tokens in a
/// document must have that document's gate open.
pub fn gating_invariant_holds(state: &TopicState, gates: &[Vec<bool>]) -> bool {
    state
        .n_dk()
        .iter()
        .zip(gates)
        .all(|(counts, row)| {
            counts
                .iter()
                .zip(row)
                .all(|(&c, &g)| c == 0 || g)
        })
}

/// Joint log-probability ln p(w, z, b) of a truncated sampler state.
pub fn ftm_joint_log_prob(
    state: &TopicState,
    gates: &[Vec<bool>],
    params: &FtmParams,
    k_max: usize,
) -> f64 {
    let phi = params.topic_conc;
    let eta = params.topic_word_conc;
    let v = params.vocab_size as f64;

    let n_rows = gates.len();
    let columns: Vec<Vec<bool>> = (0..k_max)
        .map(|k| gates.iter().map(|row| row[k]).collect())
        .collect();
    let gate_matrix = FeatureMatrix::from_columns(n_rows, columns)
        .expect("gate rows form a valid matrix");
    let mut ln = log_prob_finite(&gate_matrix, k_max, params.ibp.alpha())
        .expect("k_max bounds the active columns")
        .ln();

    for (d, row) in state.n_dk().iter().enumerate() {
        let n_d: u32 = row.iter().sum();
        if n_d == 0 {
            continue;
        }
        let active = gates[d].iter().filter(|&&g| g).count() as f64;
        ln += ln_gamma(phi * active) - ln_gamma(n_d as f64 + phi * active);
        for (k, &c) in row.iter().enumerate() {
            if c > 0 {
                debug_assert!(gates[d][k]);
                ln += ln_gamma(c as f64 + phi) - ln_gamma(phi);
            }
        }
    }
    for (k, row) in state.n_kw().iter().enumerate() {
        ln += ln_gamma(v * eta) - ln_gamma(state.n_k()[k] as f64 + v * eta);
        for &c in row {
            if c > 0 {
                ln += ln_gamma(c as f64 + eta) - ln_gamma(eta);
            }
        }
    }
    ln
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ibp::{expected_features, IbpParams};

    fn rng(seed: u64) -> RngStream {
        RngStream::new(seed, 0)
    }

    fn params(alpha: f64, v: usize) -> FtmParams {
        FtmParams::new(
            IbpParams::new(alpha, 1.0).unwrap(),
            2.0,
            0.3,
            25.0,
            v,
        )
        .unwrap()
    }

    #[test]
    fn theta_is_zero_off_the_gate_support() {
        let p = params(2.0, 12);
        let (_, gates, truth) = ftm_generate(&p, 30, &mut rng(1)).unwrap();
        for (gate_row, theta) in gates.iter().zip(&truth.doc_topic_props) {
            for (&g, &t) in gate_row.iter().zip(theta) {
                if !g {
                    assert_eq!(t, 0.0);
                }
            }
            let s: f64 = theta.iter().sum();
            assert!((s - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn single_active_topic_is_a_point_mass() {
        let p = params(0.3, 8);
        // Small alpha: most docs have few topics; find a single-gate doc.
        let mut found = false;
        for seed in 0..50 {
            let (_, gates, truth) = ftm_generate(&p, 10, &mut rng(seed)).unwrap();
            for (gate_row, theta) in gates.iter().zip(&truth.doc_topic_props) {
                if gate_row.iter().filter(|&&g| g).count() == 1 {
                    let k = gate_row.iter().position(|&g| g).unwrap();
                    assert_eq!(theta[k], 1.0);
                    found = true;
                }
            }
        }
        assert!(found, "no single-topic document in 50 seeds");
    }

    #[test]
    fn mean_topic_count_matches_buffet_expectation_plus_rescues() {
        let p = params(1.5, 6);
        let n_docs = 12;
        let want_ibp = expected_features(n_docs, &p.ibp).unwrap();
        let runs = 1000;
        let mut total = 0.0;
        let mut rescued = 0.0;
        let mut totsq = 0.0;
        let mut r = rng(2);
        for _ in 0..runs {
            let (_, gates, truth) = ftm_generate(&p, n_docs, &mut r).unwrap();
            let k = gates[0].len() as f64;
            total += k;
            totsq += k * k;
            rescued += truth.n_rescued as f64;
        }
        let mean = total / runs as f64;
        let var = totsq / runs as f64 - mean * mean;
        let want = want_ibp + rescued / runs as f64;
        let se = (var / runs as f64).sqrt();
        assert!((mean - want).abs() <= 3.0 * se, "mean {mean} vs {want}");
    }

    #[test]
    fn gating_invariant_every_sweep() {
        let p = params(2.0, 10);
        let (corpus, _, _) = ftm_generate(&p, 15, &mut rng(3)).unwrap();
        let mut sweeps = 0;
        ftm_gibbs_fit_observed(&corpus, &p, 8, 6, 2, &mut rng(4), &mut |view| {
            assert!(gating_invariant_holds(view.state, view.gates.unwrap()));
            sweeps += 1;
        })
        .unwrap();
        assert_eq!(sweeps, 6);
    }

    #[test]
    fn fitted_model_respects_gates_and_rows() {
        let p = params(2.0, 10);
        let (corpus, _, _) = ftm_generate(&p, 15, &mut rng(5)).unwrap();
        let model = ftm_gibbs_fit(&corpus, &p, 8, 8, 3, &mut rng(6)).unwrap();
        model.validate().unwrap();
        let gates = model.ftm_gates.as_ref().unwrap();
        for (g_row, p_row) in gates.iter().zip(&model.doc_topic_probs) {
            for (&g, &pv) in g_row.iter().zip(p_row) {
                if !g {
                    assert_eq!(pv, 0.0);
                }
            }
        }
        assert!(model.k_active() >= 1);
        assert!(model.k_active() <= 8);
    }

    #[test]
    fn fit_is_seed_deterministic() {
        let p = params(1.0, 8);
        let (corpus, _, _) = ftm_generate(&p, 10, &mut rng(7)).unwrap();
        let a = ftm_gibbs_fit(&corpus, &p, 6, 6, 2, &mut rng(8)).unwrap();
        let b = ftm_gibbs_fit(&corpus, &p, 6, 6, 2, &mut rng(8)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn joint_log_prob_matches_finite_prior_ratio() {
        // Flipping a zero-count gate changes the joint by exactly the
        // closed-form odds the sampler uses.
        let p = params(1.0, 8);
        let (corpus, _, _) = ftm_generate(&p, 6, &mut rng(9)).unwrap();
        let docs = expand_corpus(&corpus, 8).unwrap();
        let k_max = 5;
        let z: Vec<Vec<usize>> = docs
            .iter()
            .map(|tokens| tokens.iter().map(|_| 0usize).collect())
            .collect();
        let state = TopicState::from_assignments(&docs, z, k_max, 8).unwrap();
        let mut gates = vec![vec![false; k_max]; 6];
        for row in &mut gates {
            row[0] = true;
        }
        gates[2][3] = true;

        let base = ftm_joint_log_prob(&state, &gates, &p, k_max);
        let mut flipped = gates.clone();
        flipped[4][3] = true;
        let with_open = ftm_joint_log_prob(&state, &flipped, &p, k_max);

        // Analytic: prior odds (m+a)/(N-m) with m=1 other open, plus the
        // likelihood ratio for doc 4 gaining one active topic.
        let a = p.ibp.alpha() / k_max as f64;
        let n_docs = 6.0;
        let n_d = docs[4].len() as f64;
        let phi = p.topic_conc;
        let want = ((1.0 + a) / (n_docs - 1.0)).ln()
            + ln_gamma(phi * 2.0)
            - ln_gamma(n_d + phi * 2.0)
            - ln_gamma(phi)
            + ln_gamma(n_d + phi);
        assert!(
            ((with_open - base) - want).abs() <= 1e-10,
            "delta {} vs {want}",
            with_open - base
        );
    }

    #[test]
    fn rejects_bad_arguments() {
        let p = params(1.0, 8);
        let (corpus, _, _) = ftm_generate(&p, 5, &mut rng(10)).unwrap();
        assert!(ftm_gibbs_fit(&corpus, &p, 1, 5, 1, &mut rng(11)).is_err());
        assert!(ftm_gibbs_fit(&corpus, &p, 4, 3, 3, &mut rng(12)).is_err());
        let vocab = vec!["a".to_string()];
        let empty = Corpus::new(vocab, vec![vec![]], None).unwrap();
        let p1 = FtmParams::new(IbpParams::new(1.0, 1.0).unwrap(), 1.0, 0.5, 5.0, 1).unwrap();
        assert!(ftm_gibbs_fit(&empty, &p1, 4, 5, 1, &mut rng(13)).is_err());
    }
}
