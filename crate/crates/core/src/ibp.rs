//! Beta-Bernoulli feature allocation and the Indian buffet process.
//!
//! The Beta process itself is never simulated; everything runs through its
//! marginalized Bernoulli-process predictive. [`ibp_sample`] is the
//! sequential buffet construction, [`finite_bb_sample`] the K-column
//! Beta(alpha/K, 1)-Bernoulli approximation that converges to it, and
//! [`log_prob_lof`] the exact two-parameter equivalence-class probability
//! over left-ordered forms. Column "histories" order the lof and the
//! multiplicities of repeated histories (K_h) give the class-collapsing
//! correction.
//!
//! Parameter mapping: the predictive's concentration c is exposed as
//! `beta` and the base-measure mass gamma as `alpha`; beta = 1 recovers
//! the one-parameter buffet.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::logprob::{ln_gamma, LogProb};
use crate::rng::RngStream;

/// Mass (`alpha`) and concentration (`beta`) of the buffet predictive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IbpParams {
    alpha: f64,
    beta: f64,
}

impl IbpParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 || !beta.is_finite() || beta <= 0.0 {
            return Err(Error::Domain(format!(
                "IBP parameters must be finite and > 0, got alpha={alpha}, beta={beta}"
            )));
        }
        Ok(IbpParams { alpha, beta })
    }

    /// One-parameter buffet: beta = 1.
    pub fn one_param(alpha: f64) -> Result<Self> {
        IbpParams::new(alpha, 1.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// A binary N x K+ feature-assignment matrix stored column-wise.
///
/// All-zero columns are dropped on construction, so `m[k] >= 1` always
/// holds for the stored columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureMatrix {
    n_rows: usize,
    columns: Vec<Vec<bool>>,
    m: Vec<usize>,
}

impl FeatureMatrix {
    /// Matrix over `n_rows` datapoints with no active features.
    pub fn empty(n_rows: usize) -> Result<Self> {
        if n_rows == 0 {
            return Err(Error::domain("feature matrix needs at least one row"));
        }
        Ok(FeatureMatrix {
            n_rows,
            columns: Vec::new(),
            m: Vec::new(),
        })
    }

    /// Build from column bit-vectors; all-zero columns are dropped.
    pub fn from_columns(n_rows: usize, columns: Vec<Vec<bool>>) -> Result<Self> {
        let mut fm = FeatureMatrix::empty(n_rows)?;
        for col in columns {
            if col.len() != n_rows {
                return Err(Error::Shape(format!(
                    "column length {} != n_rows {n_rows}",
                    col.len()
                )));
            }
            fm.push_column(col);
        }
        Ok(fm)
    }

    /// Build from row bit-vectors (all the same length).
    pub fn from_rows(rows: &[Vec<bool>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::domain("feature matrix needs at least one row"));
        }
        let k = rows[0].len();
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::domain("rows must all have the same length"));
        }
        let columns = (0..k)
            .map(|j| rows.iter().map(|r| r[j]).collect())
            .collect();
        FeatureMatrix::from_columns(rows.len(), columns)
    }

    fn push_column(&mut self, col: Vec<bool>) {
        let m = col.iter().filter(|&&b| b).count();
        if m > 0 {
            self.columns.push(col);
            self.m.push(m);
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    /// Number of active features K+.
    pub fn k_plus(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Vec<bool>] {
        &self.columns
    }

    /// Per-column datapoint counts m_k.
    pub fn column_sums(&self) -> &[usize] {
        &self.m
    }

    pub fn row(&self, i: usize) -> Vec<bool> {
        self.columns.iter().map(|c| c[i]).collect()
    }
}

/// The binary history of a column, most significant bit at row 1.
///
/// Comparison is numeric: `Vec<bool>` lexicographic order on equal-length
/// MSB-first bit strings coincides with comparing the integers
/// `sum_i z_ik 2^(N-i)`, so histories work for any N; `code_u64` is the
/// exact integer for N <= 63.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct History(Vec<bool>);

impl History {
    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    /// The integer history code; `None` once N exceeds 63 bits.
    pub fn code_u64(&self) -> Option<u64> {
        if self.0.len() > 63 {
            return None;
        }
        let mut code = 0u64;
        for &b in &self.0 {
            code = code << 1 | b as u64;
        }
        Some(code)
    }
}

/// A feature matrix in left-ordered form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LofForm {
    matrix: FeatureMatrix,
    histories: Vec<History>,
    k_h_counts: BTreeMap<History, usize>,
}

impl LofForm {
    /// The column-reordered matrix, histories non-increasing.
    pub fn matrix(&self) -> &FeatureMatrix {
        &self.matrix
    }

    /// Per-column histories, non-increasing.
    pub fn histories(&self) -> &[History] {
        &self.histories
    }

    /// Multiplicity K_h of each realized history.
    pub fn k_h_counts(&self) -> &BTreeMap<History, usize> {
        &self.k_h_counts
    }

    /// A canonical text key for the equivalence class [Z]; handy for
    /// bucketing Monte Carlo draws.
    pub fn class_key(&self) -> String {
        let cols: Vec<String> = self
            .histories
            .iter()
            .map(|h| h.bits().iter().map(|&b| if b { '1' } else { '0' }).collect())
            .collect();
        cols.join("|")
    }
}

/// Sequential buffet draw over `n >= 1` customers.
///
/// Customer i takes existing dish k with probability m_k/(beta+i-1), then
/// samples Poisson(alpha*beta/(beta+i-1)) new dishes of its own. Columns
/// are kept in order of dish creation.
pub fn ibp_sample(n: usize, params: &IbpParams, rng: &mut RngStream) -> Result<FeatureMatrix> {
    if n == 0 {
        return Err(Error::domain("ibp_sample requires n >= 1"));
    }
    let (alpha, beta) = (params.alpha, params.beta);
    let mut columns: Vec<Vec<bool>> = Vec::new();
    let mut m: Vec<usize> = Vec::new();
    for i in 1..=n {
        let denom = beta + (i - 1) as f64;
        for k in 0..columns.len() {
            let take = rng.sample_bernoulli(m[k] as f64 / denom);
            columns[k].push(take);
            if take {
                m[k] += 1;
            }
        }
        let new_dishes = rng.sample_poisson(alpha * beta / denom)?;
        for _ in 0..new_dishes {
            let mut col = vec![false; i];
            col[i - 1] = true;
            columns.push(col);
            m.push(1);
        }
    }
    // Dishes created by later customers are short; pad to full length.
    for col in &mut columns {
        col.resize(n, false);
    }
    FeatureMatrix::from_columns(n, columns)
}

/// Finite K-column Beta(alpha/K, 1)-Bernoulli draw.
///
/// Columns that come out all-zero are dropped per the matrix invariant;
/// score such draws with [`log_prob_finite`], which takes the full K.
pub fn finite_bb_sample(
    n: usize,
    k: usize,
    alpha: f64,
    rng: &mut RngStream,
) -> Result<FeatureMatrix> {
    if n == 0 || k == 0 {
        return Err(Error::domain("finite_bb_sample requires n >= 1 and k >= 1"));
    }
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::Domain(format!(
            "alpha must be finite and > 0, got {alpha}"
        )));
    }
    let a = alpha / k as f64;
    let mut fm = FeatureMatrix::empty(n)?;
    for _ in 0..k {
        let pi = rng.sample_beta(a, 1.0)?;
        let col: Vec<bool> = (0..n).map(|_| rng.sample_bernoulli(pi)).collect();
        fm.push_column(col);
    }
    Ok(fm)
}

/// Left-ordered form: columns stably sorted by descending history, with
/// equal histories collapsed into K_h multiplicities.
pub fn lof_canonicalize(z: &FeatureMatrix) -> LofForm {
    let mut order: Vec<usize> = (0..z.k_plus()).collect();
    let histories: Vec<History> = z.columns.iter().map(|c| History(c.clone())).collect();
    order.sort_by(|&a, &b| histories[b].cmp(&histories[a]));

    let sorted_cols: Vec<Vec<bool>> = order.iter().map(|&k| z.columns[k].clone()).collect();
    let sorted_hists: Vec<History> = order.iter().map(|&k| histories[k].clone()).collect();
    let mut k_h_counts: BTreeMap<History, usize> = BTreeMap::new();
    for h in &sorted_hists {
        *k_h_counts.entry(h.clone()).or_insert(0) += 1;
    }
    LofForm {
        matrix: FeatureMatrix::from_columns(z.n_rows, sorted_cols)
            .expect("sorted columns preserve validity"),
        histories: sorted_hists,
        k_h_counts,
    }
}

/// Exact log-probability of the lof equivalence class [Z]:
///
/// `K+ ln(alpha beta) - sum_h ln K_h! - alpha sum_i beta/(beta+i-1)
///  + sum_k [ln G(m_k) + ln G(N - m_k + beta) - ln G(N + beta)]`
///
/// The matrix is canonicalized internally and both sums run in sorted
/// order, so row permutations and input column permutations give
/// bit-identical results.
pub fn log_prob_lof(z: &FeatureMatrix, params: &IbpParams) -> LogProb {
    let (alpha, beta) = (params.alpha, params.beta);
    let n = z.n_rows as f64;
    let k_plus = z.k_plus();

    let mut ln = (k_plus as f64) * (alpha * beta).ln();

    let lof = lof_canonicalize(z);
    let mut multiplicities: Vec<usize> = lof.k_h_counts.values().copied().collect();
    multiplicities.sort_unstable();
    for &kh in &multiplicities {
        ln -= ln_gamma(kh as f64 + 1.0);
    }

    ln -= alpha * harmonic_like(z.n_rows, beta);

    let mut sums = z.m.clone();
    sums.sort_unstable();
    let ln_gamma_n_beta = ln_gamma(n + beta);
    for &mk in &sums {
        ln += ln_gamma(mk as f64) + ln_gamma(n - mk as f64 + beta) - ln_gamma_n_beta;
    }
    LogProb::new(ln)
}

/// Log-probability of a specific binary matrix under the finite model.
///
/// `z` stores only its nonzero columns; `k` is the full column count
/// including the all-zero ones, so `k >= z.k_plus()` is required. Each
/// column contributes `ln(a) + ln G(m + a) + ln G(N - m + 1) - ln G(N + 1 + a)`
/// with `a = alpha/k`, the Beta(a, 1)-Bernoulli integral in closed form.
pub fn log_prob_finite(z: &FeatureMatrix, k: usize, alpha: f64) -> Result<LogProb> {
    if k == 0 {
        return Err(Error::domain("k must be >= 1"));
    }
    if k < z.k_plus() {
        return Err(Error::Domain(format!(
            "k = {k} is smaller than the {} active columns",
            z.k_plus()
        )));
    }
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::Domain(format!(
            "alpha must be finite and > 0, got {alpha}"
        )));
    }
    let n = z.n_rows as f64;
    let a = alpha / k as f64;
    let column_term = |m: f64| -> f64 {
        a.ln() + ln_gamma(m + a) + ln_gamma(n - m + 1.0) - ln_gamma(n + 1.0 + a)
    };
    let mut sums = z.m.clone();
    sums.sort_unstable();
    let mut ln = 0.0;
    for &mk in &sums {
        ln += column_term(mk as f64);
    }
    ln += (k - z.k_plus()) as f64 * column_term(0.0);
    Ok(LogProb::new(ln))
}

/// Expected number of active features: `alpha * sum_{i=1}^{n} beta/(beta+i-1)`.
pub fn expected_features(n: usize, params: &IbpParams) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("expected_features requires n >= 1"));
    }
    Ok(params.alpha * harmonic_like(n, params.beta))
}

fn harmonic_like(n: usize, beta: f64) -> f64 {
    (1..=n).map(|i| beta / (beta + (i - 1) as f64)).sum()
}

/// Formats a matrix as the block interchange format: a header line
/// `N K+` followed by N rows of 0/1 characters.
pub fn format_matrix_block(z: &FeatureMatrix) -> String {
    let mut out = format!("{} {}\n", z.n_rows, z.k_plus());
    for i in 0..z.n_rows {
        for col in &z.columns {
            out.push(if col[i] { '1' } else { '0' });
        }
        out.push('\n');
    }
    out
}

/// Reads matrices in the block format produced by [`format_matrix_block`].
/// Blank lines and `#` comment lines are skipped between blocks.
pub fn read_matrix_blocks(text: &str) -> Result<Vec<FeatureMatrix>> {
    let mut out = Vec::new();
    let mut lines = text.lines().enumerate().peekable();
    loop {
        // Skip separators.
        while let Some((_, l)) = lines.peek() {
            if l.trim().is_empty() || l.starts_with('#') {
                lines.next();
            } else {
                break;
            }
        }
        let Some((lineno, header)) = lines.next() else {
            break;
        };
        let parse_err = |msg: String, at: usize| Error::Parse {
            line: at + 1,
            msg,
        };
        let mut parts = header.split_whitespace();
        let n: usize = parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| parse_err(format!("expected 'N K' header, got {header:?}"), lineno))?;
        let k: usize = parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| parse_err(format!("expected 'N K' header, got {header:?}"), lineno))?;
        if n == 0 {
            return Err(parse_err("matrix must have N >= 1".into(), lineno));
        }
        let mut rows = Vec::with_capacity(n);
        for r in 0..n {
            let Some((rl, row)) = lines.next() else {
                return Err(parse_err(
                    format!("expected {n} rows, input ended early"),
                    lineno + 1 + r,
                ));
            };
            let row = row.trim();
            if row.len() != k {
                return Err(parse_err(
                    format!("expected {k} columns, got {}", row.len()),
                    rl,
                ));
            }
            let bits: Vec<bool> = row
                .chars()
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    other => Err(parse_err(format!("invalid character {other:?}"), rl)),
                })
                .collect::<Result<_>>()?;
            rows.push(bits);
        }
        out.push(FeatureMatrix::from_rows(&rows)?);
    }
    Ok(out)
}
