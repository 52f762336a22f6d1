//! Corpus ingestion, held-out splitting, and model persistence.
//!
//! The single ingestion format is UCI bag-of-words: a three-line header
//! (D documents, W vocabulary entries, NNZ triples) followed by NNZ lines
//! of `docID wordID count`, all 1-indexed. The vocabulary file has one
//! token per line; line i names word-id i-1.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::topics::FittedModel;

/// An immutable bag-of-words corpus with sparse per-document counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    vocab: Vec<String>,
    /// Per document: (word_id, count) sorted by word_id, counts >= 1.
    docs: Vec<Vec<(u32, u32)>>,
    doc_ids: Option<Vec<String>>,
    total_tokens: u64,
}

impl Corpus {
    /// Build from sparse documents. Entries are sorted by word id;
    /// duplicate word ids within a document are an error.
    pub fn new(
        vocab: Vec<String>,
        docs: Vec<Vec<(u32, u32)>>,
        doc_ids: Option<Vec<String>>,
    ) -> Result<Self> {
        if vocab.is_empty() {
            return Err(Error::domain("corpus needs a nonempty vocabulary"));
        }
        if let Some(ids) = &doc_ids {
            if ids.len() != docs.len() {
                return Err(Error::Shape(format!(
                    "{} doc ids for {} documents",
                    ids.len(),
                    docs.len()
                )));
            }
        }
        let w = vocab.len() as u32;
        let mut total = 0u64;
        let mut sorted_docs = Vec::with_capacity(docs.len());
        for mut doc in docs {
            doc.sort_by_key(|&(wid, _)| wid);
            for pair in doc.windows(2) {
                if pair[0].0 == pair[1].0 {
                    return Err(Error::Domain(format!(
                        "duplicate word id {} within a document",
                        pair[0].0
                    )));
                }
            }
            for &(wid, count) in &doc {
                if wid >= w {
                    return Err(Error::Domain(format!(
                        "word id {wid} out of range for vocabulary of {w}"
                    )));
                }
                if count == 0 {
                    return Err(Error::domain("stored counts must be >= 1"));
                }
                total += count as u64;
            }
            sorted_docs.push(doc);
        }
        Ok(Corpus {
            vocab,
            docs: sorted_docs,
            doc_ids,
            total_tokens: total,
        })
    }

    pub fn n_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn doc_ids(&self) -> Option<&[String]> {
        self.doc_ids.as_deref()
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn doc(&self, d: usize) -> &[(u32, u32)] {
        &self.docs[d]
    }

    pub fn doc_len(&self, d: usize) -> u64 {
        self.docs[d].iter().map(|&(_, c)| c as u64).sum()
    }

    /// Expand a document into its token list, word-sorted (the canonical
    /// token order used by the samplers).
    pub fn doc_tokens(&self, d: usize) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.doc_len(d) as usize);
        for &(wid, count) in &self.docs[d] {
            for _ in 0..count {
                out.push(wid);
            }
        }
        out
    }

    /// Recompute the cached token total and compare; true when consistent.
    pub fn check_token_total(&self) -> bool {
        let sum: u64 = self
            .docs
            .iter()
            .flat_map(|d| d.iter().map(|&(_, c)| c as u64))
            .sum();
        sum == self.total_tokens
    }
}

/// Deterministic document-level held-out split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub heldout_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(heldout_fraction: f64, seed: u64) -> Result<Self> {
        if !(heldout_fraction > 0.0 && heldout_fraction < 1.0) {
            return Err(Error::Domain(format!(
                "held-out fraction must lie in (0,1), got {heldout_fraction}"
            )));
        }
        Ok(SplitSpec {
            heldout_fraction,
            seed,
        })
    }
}

fn read_header_line(lines: &mut std::str::Lines, lineno: &mut usize, what: &str) -> Result<usize> {
    *lineno += 1;
    let line = lines.next().ok_or_else(|| Error::Parse {
        line: *lineno,
        msg: format!("missing {what} header line"),
    })?;
    line.trim().parse().map_err(|_| Error::Parse {
        line: *lineno,
        msg: format!("expected {what} as a nonnegative integer, got {line:?}"),
    })
}

/// Load a UCI bag-of-words corpus from a docword file and a vocab file.
///
/// Ids are converted from 1-indexed to 0-indexed. Documents that never
/// appear in a triple are kept as empty documents. Duplicate (doc, word)
/// triples accumulate.
pub fn load_uci_bow(docword_path: impl AsRef<Path>, vocab_path: impl AsRef<Path>) -> Result<Corpus> {
    let text = fs::read_to_string(&docword_path)?;
    let mut lines = text.lines();
    let mut lineno = 0usize;
    let d = read_header_line(&mut lines, &mut lineno, "D")?;
    let w = read_header_line(&mut lines, &mut lineno, "W")?;
    let nnz = read_header_line(&mut lines, &mut lineno, "NNZ")?;
    if d == 0 || w == 0 {
        return Err(Error::Parse {
            line: lineno,
            msg: format!("degenerate corpus shape D={d}, W={w}"),
        });
    }

    let mut maps: Vec<BTreeMap<u32, u64>> = vec![BTreeMap::new(); d];
    let mut seen = 0usize;
    for line in lines.by_ref() {
        lineno += 1;
        if seen == nnz {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("header promised {nnz} triples but the body has more"),
            });
        }
        let mut parts = line.split_whitespace();
        let mut field = |name: &str| -> Result<i64> {
            parts
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::Parse {
                    line: lineno,
                    msg: format!("expected {name} in triple, got {line:?}"),
                })
        };
        let doc = field("docID")?;
        let word = field("wordID")?;
        let count = field("count")?;
        if doc < 1 || doc as usize > d {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("docID {doc} out of range 1..={d}"),
            });
        }
        if word < 1 || word as usize > w {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("wordID {word} out of range 1..={w}"),
            });
        }
        if count < 1 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("count must be positive, got {count}"),
            });
        }
        *maps[doc as usize - 1].entry(word as u32 - 1).or_insert(0) += count as u64;
        seen += 1;
    }
    if seen != nnz {
        return Err(Error::Parse {
            line: lineno + 1,
            msg: format!("header promised {nnz} triples but the body has only {seen}"),
        });
    }

    let vocab_text = fs::read_to_string(&vocab_path)?;
    let vocab: Vec<String> = vocab_text.lines().map(|l| l.to_string()).collect();
    if vocab.len() != w {
        return Err(Error::Format(format!(
            "vocab file has {} entries but the docword header says W={w}",
            vocab.len()
        )));
    }

    let docs: Vec<Vec<(u32, u32)>> = maps
        .into_iter()
        .map(|m| {
            m.into_iter()
                .map(|(wid, c)| {
                    u32::try_from(c)
                        .map(|c| (wid, c))
                        .map_err(|_| Error::domain("accumulated count overflows u32"))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Corpus::new(vocab, docs, None)
}

/// Write a corpus in UCI bag-of-words form with canonical doc-major,
/// word-minor triple ordering. Loading the result reproduces the corpus.
pub fn write_uci_bow(
    corpus: &Corpus,
    docword_path: impl AsRef<Path>,
    vocab_path: impl AsRef<Path>,
) -> Result<()> {
    let nnz: usize = corpus.docs.iter().map(|d| d.len()).sum();
    let mut out = String::new();
    out.push_str(&format!(
        "{}\n{}\n{}\n",
        corpus.n_docs(),
        corpus.vocab_size(),
        nnz
    ));
    for (d, doc) in corpus.docs.iter().enumerate() {
        for &(wid, count) in doc {
            out.push_str(&format!("{} {} {}\n", d + 1, wid + 1, count));
        }
    }
    fs::write(docword_path, out)?;
    let mut vocab_out = corpus.vocab.join("\n");
    vocab_out.push('\n');
    fs::write(vocab_path, vocab_out)?;
    Ok(())
}

/// Split whole documents into train and held-out corpora.
///
/// ceil(fraction * D) documents are held out, chosen by a seeded shuffle;
/// both halves keep the full vocabulary and original document order.
pub fn split_heldout(corpus: &Corpus, spec: &SplitSpec) -> Result<(Corpus, Corpus)> {
    let d = corpus.n_docs();
    if d < 2 {
        return Err(Error::domain("split requires at least 2 documents"));
    }
    let n_held = (spec.heldout_fraction * d as f64).ceil() as usize;
    if n_held >= d {
        return Err(Error::Domain(format!(
            "holding out {n_held} of {d} documents would empty the training set"
        )));
    }
    let mut order: Vec<usize> = (0..d).collect();
    let mut rng = RngStream::new(spec.seed, 0);
    rng.shuffle(&mut order);
    let mut held: Vec<usize> = order[..n_held].to_vec();
    held.sort_unstable();

    let mut held_mask = vec![false; d];
    for &i in &held {
        held_mask[i] = true;
    }
    let pick = |want_held: bool| -> Result<Corpus> {
        let docs: Vec<Vec<(u32, u32)>> = (0..d)
            .filter(|&i| held_mask[i] == want_held)
            .map(|i| corpus.docs[i].clone())
            .collect();
        let doc_ids = corpus.doc_ids.as_ref().map(|ids| {
            (0..d)
                .filter(|&i| held_mask[i] == want_held)
                .map(|i| ids[i].clone())
                .collect()
        });
        Corpus::new(corpus.vocab.clone(), docs, doc_ids)
    };
    Ok((pick(false)?, pick(true)?))
}

const MODEL_FORMAT: &str = "npproc-model";
const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelEnvelope {
    format: String,
    version: u32,
    model: FittedModel,
}

/// Persist a fitted model as versioned JSON.
pub fn write_model(model: &FittedModel, path: impl AsRef<Path>) -> Result<()> {
    let envelope = ModelEnvelope {
        format: MODEL_FORMAT.to_string(),
        version: MODEL_VERSION,
        model: model.clone(),
    };
    let json = serde_json::to_string_pretty(&envelope)
        .map_err(|e| Error::Format(format!("model serialization failed: {e}")))?;
    fs::write(path, json)?;
    Ok(())
}

/// Read a model written by [`write_model`], checking format and version.
pub fn read_model(path: impl AsRef<Path>) -> Result<FittedModel> {
    let text = fs::read_to_string(path)?;
    let envelope: ModelEnvelope = serde_json::from_str(&text)
        .map_err(|e| Error::Format(format!("model deserialization failed: {e}")))?;
    if envelope.format != MODEL_FORMAT {
        return Err(Error::Format(format!(
            "expected format {MODEL_FORMAT:?}, got {:?}",
            envelope.format
        )));
    }
    if envelope.version != MODEL_VERSION {
        return Err(Error::Format(format!(
            "unsupported model version {} (expected {MODEL_VERSION})",
            envelope.version
        )));
    }
    envelope.model.validate()?;
    Ok(envelope.model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn tmpfile(name: &str, content: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("npproc-corpus-tests");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join(format!("{}-{name}", std::process::id()));
        let mut f = fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    #[test]
    fn minimal_file_parses() {
        let docword = tmpfile("min-doc", "1\n2\n1\n1 1 3\n");
        let vocab = tmpfile("min-voc", "apple\nbanana\n");
        let corpus = load_uci_bow(&docword, &vocab).unwrap();
        assert_eq!(corpus.n_docs(), 1);
        assert_eq!(corpus.vocab_size(), 2);
        assert_eq!(corpus.doc(0), &[(0, 3)]);
        assert_eq!(corpus.total_tokens(), 3);
        assert!(corpus.check_token_total());
    }

    #[test]
    fn nnz_shortfall_is_reported() {
        let docword = tmpfile("short-doc", "1\n2\n2\n1 1 3\n");
        let vocab = tmpfile("short-voc", "a\nb\n");
        let err = load_uci_bow(&docword, &vocab).unwrap_err();
        match err {
            Error::Parse { line, msg } => {
                assert_eq!(line, 5);
                assert!(msg.contains("only 1"), "msg: {msg}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn body_overflow_and_bad_ids_error() {
        let vocab = tmpfile("ids-voc", "a\nb\n");
        let over = tmpfile("over-doc", "1\n2\n1\n1 1 3\n1 2 1\n");
        assert!(matches!(
            load_uci_bow(&over, &vocab),
            Err(Error::Parse { line: 5, .. })
        ));
        let bad_doc = tmpfile("badid-doc", "1\n2\n1\n2 1 3\n");
        assert!(load_uci_bow(&bad_doc, &vocab).is_err());
        let bad_word = tmpfile("badword-doc", "1\n2\n1\n1 3 1\n");
        assert!(load_uci_bow(&bad_word, &vocab).is_err());
        let bad_count = tmpfile("badcount-doc", "1\n2\n1\n1 1 0\n");
        assert!(load_uci_bow(&bad_count, &vocab).is_err());
    }

    #[test]
    fn vocab_length_must_match_header() {
        let docword = tmpfile("wmis-doc", "1\n3\n1\n1 1 1\n");
        let vocab = tmpfile("wmis-voc", "a\nb\n");
        assert!(matches!(
            load_uci_bow(&docword, &vocab),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn empty_documents_are_preserved() {
        let docword = tmpfile("empty-doc", "3\n2\n1\n2 2 5\n");
        let vocab = tmpfile("empty-voc", "a\nb\n");
        let corpus = load_uci_bow(&docword, &vocab).unwrap();
        assert_eq!(corpus.n_docs(), 3);
        assert_eq!(corpus.doc_len(0), 0);
        assert_eq!(corpus.doc_len(1), 5);
        assert_eq!(corpus.doc_len(2), 0);
    }

    #[test]
    fn write_then_load_is_a_fixpoint() {
        let mut rng = RngStream::new(42, 0);
        for trial in 0..20 {
            let w = 2 + rng.uniform_index(10);
            let d = 1 + rng.uniform_index(8);
            let vocab: Vec<String> = (0..w).map(|i| format!("tok{i}")).collect();
            let docs: Vec<Vec<(u32, u32)>> = (0..d)
                .map(|_| {
                    let mut doc = Vec::new();
                    for wid in 0..w as u32 {
                        if rng.uniform() < 0.4 {
                            doc.push((wid, 1 + rng.uniform_index(9) as u32));
                        }
                    }
                    doc
                })
                .collect();
            let corpus = Corpus::new(vocab, docs, None).unwrap();
            let p1 = tmpfile(&format!("rt-doc-{trial}"), "");
            let v1 = tmpfile(&format!("rt-voc-{trial}"), "");
            write_uci_bow(&corpus, &p1, &v1).unwrap();
            let loaded = load_uci_bow(&p1, &v1).unwrap();
            assert_eq!(loaded, corpus);
            // Writing again is byte-identical: canonical ordering.
            let p2 = tmpfile(&format!("rt2-doc-{trial}"), "");
            let v2 = tmpfile(&format!("rt2-voc-{trial}"), "");
            write_uci_bow(&loaded, &p2, &v2).unwrap();
            assert_eq!(fs::read(&p1).unwrap(), fs::read(&p2).unwrap());
            assert_eq!(fs::read(&v1).unwrap(), fs::read(&v2).unwrap());
        }
    }

    fn toy_corpus(d: usize) -> Corpus {
        let vocab = vec!["a".into(), "b".into(), "c".into()];
        let docs = (0..d)
            .map(|i| vec![(0u32, 1 + (i % 3) as u32), (2u32, 1u32)])
            .collect();
        Corpus::new(vocab, docs, None).unwrap()
    }

    #[test]
    fn split_respects_fraction_and_partition() {
        let corpus = toy_corpus(10);
        let spec = SplitSpec::new(0.1, 7).unwrap();
        let (train, held) = split_heldout(&corpus, &spec).unwrap();
        assert_eq!(held.n_docs(), 1);
        assert_eq!(train.n_docs(), 9);
        assert_eq!(
            train.total_tokens() + held.total_tokens(),
            corpus.total_tokens()
        );
        assert_eq!(train.vocab(), corpus.vocab());
        assert_eq!(held.vocab(), corpus.vocab());
    }

    #[test]
    fn split_is_seed_deterministic() {
        let corpus = toy_corpus(100);
        let spec = SplitSpec::new(0.3, 11).unwrap();
        let (t1, h1) = split_heldout(&corpus, &spec).unwrap();
        let (t2, h2) = split_heldout(&corpus, &spec).unwrap();
        assert_eq!(t1, t2);
        assert_eq!(h1, h2);
        let other = SplitSpec::new(0.3, 12).unwrap();
        let (_, h3) = split_heldout(&corpus, &other).unwrap();
        assert_ne!(h1, h3, "different seeds should split differently");
    }

    #[test]
    fn split_rejects_degenerate_requests() {
        assert!(SplitSpec::new(0.0, 1).is_err());
        assert!(SplitSpec::new(1.0, 1).is_err());
        let corpus = toy_corpus(1);
        let spec = SplitSpec::new(0.5, 1).unwrap();
        assert!(split_heldout(&corpus, &spec).is_err());
        let two = toy_corpus(2);
        let spec = SplitSpec::new(0.9, 1).unwrap();
        assert!(split_heldout(&two, &spec).is_err(), "train set would be empty");
    }

    #[test]
    fn corpus_validation() {
        assert!(Corpus::new(vec![], vec![], None).is_err());
        let vocab = vec!["a".to_string()];
        assert!(Corpus::new(vocab.clone(), vec![vec![(1, 1)]], None).is_err());
        assert!(Corpus::new(vocab.clone(), vec![vec![(0, 0)]], None).is_err());
        assert!(Corpus::new(vocab.clone(), vec![vec![(0, 1), (0, 2)]], None).is_err());
        assert!(Corpus::new(vocab, vec![vec![(0, 1)]], Some(vec![])).is_err());
    }
}
