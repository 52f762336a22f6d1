//! Property tests for the cross-cutting invariants.

use proptest::collection::vec;
use proptest::prelude::*;

use npproc_core::corpus::{load_uci_bow, read_model, split_heldout, write_model, write_uci_bow, Corpus, SplitSpec};
use npproc_core::crp::{crp_log_prob, crp_sample, DpParams, Partition};
use npproc_core::ibp::{log_prob_lof, lof_canonicalize, FeatureMatrix, IbpParams};
use npproc_core::topics::{FittedModel, ModelKind};
use npproc_core::RngStream;

proptest! {
    #[test]
    fn crp_log_prob_depends_only_on_size_multiset(
        raw in vec(0usize..5, 1..12),
        alpha in 0.05f64..20.0,
        perm_seed in 0u64..1000,
    ) {
        let params = DpParams::new(alpha).unwrap();
        let base = Partition::from_assignments(&raw).unwrap();
        let want = crp_log_prob(&base, &params).ln();

        // Permute items.
        let mut shuffled = raw.clone();
        let mut rng = RngStream::new(perm_seed, 0);
        rng.shuffle(&mut shuffled);
        let permuted = Partition::from_assignments(&shuffled).unwrap();
        prop_assert_eq!(crp_log_prob(&permuted, &params).ln().to_bits(), want.to_bits());

        // Relabel clusters.
        let relabeled: Vec<usize> = raw.iter().map(|&c| (c * 7 + 3) % 11).collect();
        let relabeled = Partition::from_assignments(&relabeled).unwrap();
        prop_assert_eq!(crp_log_prob(&relabeled, &params).ln().to_bits(), want.to_bits());
    }

    #[test]
    fn crp_sample_yields_valid_canonical_partitions(
        n in 1usize..40,
        alpha in 0.05f64..10.0,
        seed in 0u64..500,
    ) {
        let params = DpParams::new(alpha).unwrap();
        let mut rng = RngStream::new(seed, 0);
        let p = crp_sample(n, &params, &mut rng).unwrap();
        prop_assert_eq!(p.n_items(), n);
        prop_assert_eq!(p.cluster_sizes().iter().sum::<usize>(), n);
        // Canonical order of appearance.
        let mut seen = 0usize;
        for &c in p.assignments() {
            prop_assert!(c <= seen);
            if c == seen {
                seen += 1;
            }
        }
        prop_assert_eq!(seen, p.n_clusters());
        for (c, &size) in p.cluster_sizes().iter().enumerate() {
            let count = p.assignments().iter().filter(|&&a| a == c).count();
            prop_assert_eq!(count, size);
        }
    }

    #[test]
    fn lof_probability_is_permutation_invariant(
        bits in vec(any::<bool>(), 1..24),
        n_rows in 2usize..5,
        alpha in 0.1f64..5.0,
        beta in 0.2f64..4.0,
        seed in 0u64..100,
    ) {
        let n_cols = bits.len() / n_rows;
        prop_assume!(n_cols >= 1);
        let columns: Vec<Vec<bool>> = (0..n_cols)
            .map(|c| bits[c * n_rows..(c + 1) * n_rows].to_vec())
            .collect();
        let z = FeatureMatrix::from_columns(n_rows, columns).unwrap();
        let params = IbpParams::new(alpha, beta).unwrap();
        let want = log_prob_lof(&z, &params).ln();

        let mut rng = RngStream::new(seed, 0);
        // Row permutation.
        let mut order: Vec<usize> = (0..n_rows).collect();
        rng.shuffle(&mut order);
        let rows: Vec<Vec<bool>> = order.iter().map(|&i| z.row(i)).collect();
        if z.k_plus() > 0 {
            let permuted = FeatureMatrix::from_rows(&rows).unwrap();
            prop_assert_eq!(log_prob_lof(&permuted, &params).ln().to_bits(), want.to_bits());
            // Same lof class key either way.
            prop_assert_eq!(
                lof_canonicalize(&z).histories().len(),
                lof_canonicalize(&permuted).histories().len()
            );
        }
        // Column permutation.
        let mut cols = z.columns().to_vec();
        rng.shuffle(&mut cols);
        let shuffled = FeatureMatrix::from_columns(n_rows, cols).unwrap();
        prop_assert_eq!(log_prob_lof(&shuffled, &params).ln().to_bits(), want.to_bits());
        prop_assert_eq!(lof_canonicalize(&shuffled), lof_canonicalize(&z));
    }

    #[test]
    fn uci_round_trip_and_split_partition(
        doc_specs in vec(vec((0u32..12, 1u32..9), 0..8), 2..10),
        fraction in 0.1f64..0.9,
        seed in 0u64..1000,
    ) {
        let vocab: Vec<String> = (0..12).map(|i| format!("tok{i}")).collect();
        let docs: Vec<Vec<(u32, u32)>> = doc_specs
            .iter()
            .map(|entries| {
                let mut map = std::collections::BTreeMap::new();
                for &(w, c) in entries {
                    *map.entry(w).or_insert(0) += c;
                }
                map.into_iter().collect()
            })
            .collect();
        let corpus = Corpus::new(vocab, docs, None).unwrap();

        let dir = std::env::temp_dir().join(format!("npproc-prop-{}-{seed}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let docword = dir.join("docword.txt");
        let vocabf = dir.join("vocab.txt");
        write_uci_bow(&corpus, &docword, &vocabf).unwrap();
        let loaded = load_uci_bow(&docword, &vocabf).unwrap();
        prop_assert_eq!(&loaded, &corpus);
        std::fs::remove_dir_all(&dir).ok();

        let d = corpus.n_docs();
        let n_held = (fraction * d as f64).ceil() as usize;
        prop_assume!(n_held < d);
        let spec = SplitSpec::new(fraction, seed).unwrap();
        let (train, held) = split_heldout(&corpus, &spec).unwrap();
        prop_assert_eq!(held.n_docs(), n_held);
        prop_assert_eq!(train.n_docs() + held.n_docs(), d);
        prop_assert_eq!(
            train.total_tokens() + held.total_tokens(),
            corpus.total_tokens()
        );
    }

    #[test]
    fn model_json_round_trip_is_exact(
        k in 1usize..5,
        v in 2usize..8,
        seed in 0u64..1000,
    ) {
        let mut rng = RngStream::new(seed, 0);
        let mut rows = Vec::with_capacity(k);
        for _ in 0..k {
            rows.push(rng.sample_dirichlet(&vec![0.7; v]).unwrap());
        }
        let doc_row = if k == 1 {
            vec![1.0]
        } else {
            rng.sample_dirichlet(&vec![1.3; k]).unwrap()
        };
        let model = FittedModel {
            kind: ModelKind::Lda,
            topic_word_probs: rows,
            doc_topic_probs: vec![doc_row; 3],
            ftm_gates: None,
            doc_topic_conc: 0.5 + rng.uniform(),
        };
        let dir = std::env::temp_dir().join(format!("npproc-model-{}-{seed}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("model.json");
        write_model(&model, &path).unwrap();
        let loaded = read_model(&path).unwrap();
        std::fs::remove_dir_all(&dir).ok();
        // serde_json serializes f64 shortest-round-trip, so equality is exact.
        prop_assert_eq!(loaded, model);
    }
}
