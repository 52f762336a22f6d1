//! Dirichlet Process through its marginalized predictive: the Chinese
//! restaurant process.
//!
//! The random measure G is never materialized. Sequential seating gives the
//! exchangeable partition law directly, and `crp_log_prob` scores a whole
//! partition in closed form. `dirichlet_partition_check` validates the
//! finite-partition Dirichlet property E[G(cell)] = H(cell) by painting
//! each new table with a cell color drawn from the base masses.

use crate::error::{Error, Result};
use crate::logprob::{ln_gamma, LogProb};
use crate::rng::RngStream;

/// Concentration parameter of a Dirichlet Process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpParams {
    alpha: f64,
}

impl DpParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::Domain(format!(
                "DP concentration must be finite and > 0, got {alpha}"
            )));
        }
        Ok(DpParams { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// A partition of `n` items into labeled clusters.
///
/// Labels are canonical by order of appearance: item 0 is in cluster 0 and
/// a new cluster's label is one past the largest label seen so far. This
/// makes exchangeability statements testable as bit-identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    assignments: Vec<usize>,
    cluster_sizes: Vec<usize>,
}

impl Partition {
    /// Build from arbitrary labels; relabels into canonical form.
    pub fn from_assignments(raw: &[usize]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::domain("partition needs at least one item"));
        }
        let mut relabel: Vec<(usize, usize)> = Vec::new(); // (old, new)
        let mut assignments = Vec::with_capacity(raw.len());
        let mut cluster_sizes = Vec::new();
        for &old in raw {
            let new = match relabel.iter().find(|(o, _)| *o == old) {
                Some(&(_, n)) => n,
                None => {
                    let n = relabel.len();
                    relabel.push((old, n));
                    cluster_sizes.push(0);
                    n
                }
            };
            assignments.push(new);
            cluster_sizes[new] += 1;
        }
        Ok(Partition {
            assignments,
            cluster_sizes,
        })
    }

    pub fn n_items(&self) -> usize {
        self.assignments.len()
    }

    pub fn n_clusters(&self) -> usize {
        self.cluster_sizes.len()
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn cluster_sizes(&self) -> &[usize] {
        &self.cluster_sizes
    }
}

/// Sequential CRP draw over `n >= 1` items.
///
/// Item i joins an existing cluster c with probability size_c/(alpha+i-1)
/// and opens a new cluster with probability alpha/(alpha+i-1).
pub fn crp_sample(n: usize, params: &DpParams, rng: &mut RngStream) -> Result<Partition> {
    if n == 0 {
        return Err(Error::domain("crp_sample requires n >= 1"));
    }
    let alpha = params.alpha;
    let mut assignments = Vec::with_capacity(n);
    let mut cluster_sizes: Vec<usize> = Vec::new();
    assignments.push(0);
    cluster_sizes.push(1);
    for i in 1..n {
        let total = alpha + i as f64;
        let u = rng.uniform() * total;
        let mut acc = 0.0;
        let mut chosen = cluster_sizes.len(); // default: new cluster
        for (c, &size) in cluster_sizes.iter().enumerate() {
            acc += size as f64;
            if u < acc {
                chosen = c;
                break;
            }
        }
        if chosen == cluster_sizes.len() {
            cluster_sizes.push(1);
        } else {
            cluster_sizes[chosen] += 1;
        }
        assignments.push(chosen);
    }
    Ok(Partition {
        assignments,
        cluster_sizes,
    })
}

/// Exact log-probability of a partition under the CRP:
/// `alpha^K * prod_c (size_c - 1)! / prod_{i=1}^{n} (alpha + i - 1)`.
///
/// Depends only on the multiset of cluster sizes; sizes are accumulated in
/// sorted order so any relabeling or item permutation gives a bit-identical
/// result.
pub fn crp_log_prob(p: &Partition, params: &DpParams) -> LogProb {
    let alpha = params.alpha;
    let n = p.n_items();
    let mut sizes = p.cluster_sizes.clone();
    sizes.sort_unstable();
    let mut ln = (sizes.len() as f64) * alpha.ln();
    for &s in &sizes {
        ln += ln_gamma(s as f64);
    }
    for i in 1..=n {
        ln -= (alpha + (i - 1) as f64).ln();
    }
    LogProb::new(ln)
}

/// Expected number of clusters after `n` customers: sum_i alpha/(alpha+i-1).
pub fn expected_clusters(n: usize, params: &DpParams) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("expected_clusters requires n >= 1"));
    }
    let alpha = params.alpha;
    Ok((1..=n).map(|i| alpha / (alpha + (i - 1) as f64)).sum())
}

/// Outcome of [`dirichlet_partition_check`].
#[derive(Debug, Clone)]
pub struct PartitionCheckReport {
    /// Base-measure mass of each cell (the target means).
    pub cell_masses: Vec<f64>,
    /// Monte Carlo mean of the aggregated per-cell mass.
    pub cell_means: Vec<f64>,
    /// |mean - target| per cell.
    pub abs_errors: Vec<f64>,
    /// Three standard errors of each mean.
    pub tolerances: Vec<f64>,
    /// Empirical variance of each cell's mass across draws.
    pub cell_variances: Vec<f64>,
    pub n_draws: usize,
    /// Customers seated per simulated restaurant.
    pub n_customers: usize,
    pub passed: bool,
}

/// Customers seated per draw when aggregating table masses into cells.
const CHECK_CUSTOMERS: usize = 400;

/// Validates E[G(cell_i)] = H(cell_i) by simulation.
///
/// Each draw seats [`CHECK_CUSTOMERS`] customers in a CRP(alpha); every new
/// table is painted cell i with probability `cell_masses[i]`, and the
/// table sizes are aggregated per cell. The report passes when every cell
/// mean lands within three standard errors of its base mass.
pub fn dirichlet_partition_check(
    cell_masses: &[f64],
    alpha: f64,
    n_draws: usize,
    rng: &mut RngStream,
) -> Result<PartitionCheckReport> {
    if cell_masses.len() < 2 {
        return Err(Error::domain("need at least 2 cells"));
    }
    if cell_masses.iter().any(|&m| !m.is_finite() || m < 0.0) {
        return Err(Error::domain("cell masses must be finite and >= 0"));
    }
    let total: f64 = cell_masses.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!(
            "cell masses must sum to 1, got {total}"
        )));
    }
    if n_draws == 0 {
        return Err(Error::domain("n_draws must be >= 1"));
    }
    let params = DpParams::new(alpha)?;

    let k = cell_masses.len();
    let mut sum = vec![0.0; k];
    let mut sumsq = vec![0.0; k];
    for _ in 0..n_draws {
        let partition = crp_sample(CHECK_CUSTOMERS, &params, rng)?;
        let mut cell_mass = vec![0.0; k];
        for &size in partition.cluster_sizes() {
            let cell = rng.sample_categorical(cell_masses)?;
            cell_mass[cell] += size as f64 / CHECK_CUSTOMERS as f64;
        }
        for (i, &m) in cell_mass.iter().enumerate() {
            sum[i] += m;
            sumsq[i] += m * m;
        }
    }

    let nd = n_draws as f64;
    let cell_means: Vec<f64> = sum.iter().map(|s| s / nd).collect();
    let cell_variances: Vec<f64> = sumsq
        .iter()
        .zip(&cell_means)
        .map(|(sq, m)| (sq / nd - m * m).max(0.0))
        .collect();
    let tolerances: Vec<f64> = cell_variances
        .iter()
        .map(|v| (3.0 * (v / nd).sqrt()).max(1e-9))
        .collect();
    let abs_errors: Vec<f64> = cell_means
        .iter()
        .zip(cell_masses)
        .map(|(m, t)| (m - t).abs())
        .collect();
    let passed = abs_errors
        .iter()
        .zip(&tolerances)
        .all(|(e, t)| e <= t);

    Ok(PartitionCheckReport {
        cell_masses: cell_masses.to_vec(),
        cell_means,
        abs_errors,
        tolerances,
        cell_variances,
        n_draws,
        n_customers: CHECK_CUSTOMERS,
        passed,
    })
}
