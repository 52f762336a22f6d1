//! Gaussian Process prior sampling and exact posterior conditioning over
//! finite sets of one-dimensional inputs.
//!
//! A GP is a prior over functions specified by a mean measure and a
//! covariance kernel; any finite set of points gets a joint Gaussian. The
//! posterior at test points conditions that joint Gaussian on observed
//! training pairs via a cached Cholesky factorization.

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Supported covariance kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelKind {
    SquaredExponential,
}

/// Covariance measure k(x, x').
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    kind: KernelKind,
    lengthscale: f64,
    signal_variance: f64,
}

impl KernelSpec {
    pub fn squared_exponential(lengthscale: f64, signal_variance: f64) -> Result<Self> {
        if !lengthscale.is_finite() || lengthscale <= 0.0 {
            return Err(Error::Domain(format!(
                "lengthscale must be finite and > 0, got {lengthscale}"
            )));
        }
        if !signal_variance.is_finite() || signal_variance <= 0.0 {
            return Err(Error::Domain(format!(
                "signal variance must be finite and > 0, got {signal_variance}"
            )));
        }
        Ok(KernelSpec {
            kind: KernelKind::SquaredExponential,
            lengthscale,
            signal_variance,
        })
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn lengthscale(&self) -> f64 {
        self.lengthscale
    }

    pub fn signal_variance(&self) -> f64 {
        self.signal_variance
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self.kind {
            KernelKind::SquaredExponential => {
                let d = (x - y) / self.lengthscale;
                self.signal_variance * (-0.5 * d * d).exp()
            }
        }
    }
}

/// Mean measure m(x); zero unless stated otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeanMeasure {
    Zero,
    Constant(f64),
}

impl MeanMeasure {
    pub fn eval(&self, _x: f64) -> f64 {
        match self {
            MeanMeasure::Zero => 0.0,
            MeanMeasure::Constant(c) => *c,
        }
    }
}

/// A fitted GP: training data plus the cached lower-triangular factor of
/// `K_train + noise I + jitter I`.
#[derive(Debug, Clone)]
pub struct GpModel {
    kernel: KernelSpec,
    mean: MeanMeasure,
    train_x: Vec<f64>,
    train_y: Vec<f64>,
    noise_variance: f64,
    chol: Option<Lower>,
    jitter: f64,
}

impl GpModel {
    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn mean(&self) -> &MeanMeasure {
        &self.mean
    }

    pub fn train_x(&self) -> &[f64] {
        &self.train_x
    }

    pub fn train_y(&self) -> &[f64] {
        &self.train_y
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    /// Diagonal jitter that made the factorization succeed.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }
}

/// Dense lower-triangular Cholesky factor, row-major packed.
#[derive(Debug, Clone)]
struct Lower {
    n: usize,
    data: Vec<f64>, // data[i*(i+1)/2 + j] for j <= i
}

impl Lower {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * (i + 1) / 2 + j]
    }

    /// Solve L z = b.
    fn forward_solve(&self, b: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; self.n];
        for i in 0..self.n {
            let mut acc = b[i];
            for j in 0..i {
                acc -= self.at(i, j) * z[j];
            }
            z[i] = acc / self.at(i, i);
        }
        z
    }

    /// Solve L^T x = z.
    fn backward_solve(&self, z: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for i in (0..self.n).rev() {
            let mut acc = z[i];
            for j in i + 1..self.n {
                acc -= self.at(j, i) * x[j];
            }
            x[i] = acc / self.at(i, i);
        }
        x
    }

    /// y = L z.
    fn mul(&self, z: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..=i).map(|j| self.at(i, j) * z[j]).sum())
            .collect()
    }
}

fn cholesky(a: &[Vec<f64>]) -> Option<Lower> {
    let n = a.len();
    let mut data = vec![0.0; n * (n + 1) / 2];
    let idx = |i: usize, j: usize| i * (i + 1) / 2 + j;
    for i in 0..n {
        for j in 0..=i {
            let mut acc = a[i][j];
            for k in 0..j {
                acc -= data[idx(i, k)] * data[idx(j, k)];
            }
            if i == j {
                if !(acc > 0.0) || !acc.is_finite() {
                    return None;
                }
                data[idx(i, j)] = acc.sqrt();
            } else {
                data[idx(i, j)] = acc / data[idx(j, j)];
            }
        }
    }
    Some(Lower { n, data })
}

/// Relative jitter ladder: 1e-9 * signal_variance escalating tenfold.
const JITTER_LADDER: [f64; 7] = [1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3];

/// Factor `base + jitter I`, escalating the jitter until the matrix goes
/// positive definite. Returns the factor and the jitter that worked.
fn cholesky_with_jitter(base: &[Vec<f64>], signal_variance: f64) -> Result<(Lower, f64)> {
    let n = base.len();
    let mut last_jitter = 0.0;
    for rel in JITTER_LADDER {
        let jitter = rel * signal_variance;
        last_jitter = jitter;
        let mut a = base.to_vec();
        for (i, row) in a.iter_mut().enumerate().take(n) {
            row[i] += jitter;
        }
        if let Some(l) = cholesky(&a) {
            return Ok((l, jitter));
        }
    }
    Err(Error::Numeric(format!(
        "Gram matrix not positive definite even with jitter {last_jitter:e}"
    )))
}

fn check_points(points: &[f64]) -> Result<()> {
    if let Some(p) = points.iter().find(|p| !p.is_finite()) {
        return Err(Error::Domain(format!("non-finite input point {p}")));
    }
    Ok(())
}

/// Kernel Gram matrix over `points`. Symmetric by construction: the upper
/// triangle is mirrored from the lower, and the diagonal is exactly the
/// signal variance.
pub fn gram_matrix(points: &[f64], kernel: &KernelSpec) -> Result<Vec<Vec<f64>>> {
    if points.is_empty() {
        return Err(Error::domain("gram_matrix requires at least one point"));
    }
    check_points(points)?;
    let n = points.len();
    let mut g = vec![vec![0.0; n]; n];
    for i in 0..n {
        g[i][i] = kernel.signal_variance;
        for j in 0..i {
            let v = kernel.eval(points[i], points[j]);
            g[i][j] = v;
            g[j][i] = v;
        }
    }
    Ok(g)
}

/// One draw from the joint Gaussian N(m(points), K + jitter I).
pub fn gp_prior_sample(
    points: &[f64],
    mean: &MeanMeasure,
    kernel: &KernelSpec,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    let gram = gram_matrix(points, kernel)?;
    let (l, _) = cholesky_with_jitter(&gram, kernel.signal_variance)?;
    let z: Vec<f64> = (0..points.len()).map(|_| rng.sample_std_normal()).collect();
    let lz = l.mul(&z);
    Ok(points
        .iter()
        .zip(&lz)
        .map(|(&x, &v)| mean.eval(x) + v)
        .collect())
}

/// Condition a GP on training data, caching the factorization.
///
/// An empty training set is allowed and makes the posterior the prior.
pub fn gp_fit(
    train_x: &[f64],
    train_y: &[f64],
    mean: MeanMeasure,
    kernel: KernelSpec,
    noise_variance: f64,
) -> Result<GpModel> {
    if train_x.len() != train_y.len() {
        return Err(Error::Shape(format!(
            "train_x has {} points but train_y has {}",
            train_x.len(),
            train_y.len()
        )));
    }
    if !noise_variance.is_finite() || noise_variance < 0.0 {
        return Err(Error::Domain(format!(
            "noise variance must be finite and >= 0, got {noise_variance}"
        )));
    }
    check_points(train_x)?;
    check_points(train_y)?;

    let (chol, jitter) = if train_x.is_empty() {
        (None, 0.0)
    } else {
        let mut gram = gram_matrix(train_x, &kernel)?;
        for (i, row) in gram.iter_mut().enumerate() {
            row[i] += noise_variance;
        }
        let (l, j) = cholesky_with_jitter(&gram, kernel.signal_variance)?;
        (Some(l), j)
    };

    Ok(GpModel {
        kernel,
        mean,
        train_x: train_x.to_vec(),
        train_y: train_y.to_vec(),
        noise_variance,
        chol,
        jitter,
    })
}

/// Exact posterior mean and covariance at `test_x`.
///
/// With no training data this returns the prior (mean measure and Gram
/// matrix) exactly. The covariance is assembled from cross-solve dot
/// products, which keeps it bit-symmetric.
pub fn gp_posterior(model: &GpModel, test_x: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    if test_x.is_empty() {
        return Err(Error::domain("gp_posterior requires at least one test point"));
    }
    check_points(test_x)?;

    let prior_mean: Vec<f64> = test_x.iter().map(|&x| model.mean.eval(x)).collect();
    let prior_cov = gram_matrix(test_x, &model.kernel)?;

    let Some(l) = &model.chol else {
        return Ok((prior_mean, prior_cov));
    };

    let n = model.train_x.len();
    let t = test_x.len();

    // alpha = (K + sigma^2 I)^-1 (y - m(X))
    let resid: Vec<f64> = model
        .train_y
        .iter()
        .zip(&model.train_x)
        .map(|(&y, &x)| y - model.mean.eval(x))
        .collect();
    let alpha = l.backward_solve(&l.forward_solve(&resid));

    // Cross-covariance K(test, train) and its forward solves.
    let mut mean = prior_mean;
    let mut v = vec![vec![0.0; t]; n]; // v[:, j] = L^-1 k(train, test_j)
    for j in 0..t {
        let k_star: Vec<f64> = model
            .train_x
            .iter()
            .map(|&x| model.kernel.eval(x, test_x[j]))
            .collect();
        mean[j] += k_star.iter().zip(&alpha).map(|(a, b)| a * b).sum::<f64>();
        for (i, z) in l.forward_solve(&k_star).into_iter().enumerate() {
            v[i][j] = z;
        }
    }

    let mut cov = prior_cov;
    for a in 0..t {
        for b in 0..=a {
            let dot: f64 = (0..n).map(|i| v[i][a] * v[i][b]).sum();
            cov[a][b] -= dot;
            if a != b {
                cov[b][a] = cov[a][b];
            }
        }
    }
    Ok((mean, cov))
}
