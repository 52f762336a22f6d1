//! Log-space probability arithmetic.
//!
//! Everything downstream multiplies long chains of Gamma-function ratios,
//! which underflow far below `f64::MIN_POSITIVE` in linear space. All
//! probability math in this crate therefore lives on the natural-log scale:
//! [`log_gamma`] for the Gamma terms, [`log_sum_exp`] for mixtures, and
//! [`LogProb`] as the carrier type for normalized log-probabilities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A probability on the natural-log scale.
///
/// `-inf` encodes an impossible event. Values are mathematically `<= 0`
/// for normalized probabilities, though rounding may leave a result a few
/// ulps above zero for probability-one events.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct LogProb(f64);

impl LogProb {
    /// Probability zero.
    pub const ZERO: LogProb = LogProb(f64::NEG_INFINITY);
    /// Probability one.
    pub const ONE: LogProb = LogProb(0.0);

    pub fn new(ln_p: f64) -> Self {
        debug_assert!(!ln_p.is_nan(), "LogProb cannot hold NaN");
        LogProb(ln_p)
    }

    /// The natural log of the probability.
    pub fn ln(self) -> f64 {
        self.0
    }

    /// The probability itself; underflows to 0 for very negative values.
    pub fn prob(self) -> f64 {
        self.0.exp()
    }

    pub fn is_impossible(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }
}

impl From<LogProb> for f64 {
    fn from(lp: LogProb) -> f64 {
        lp.0
    }
}

impl std::fmt::Display for LogProb {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_74;

// Lanczos approximation, g = 607/128, 15 terms (Godfrey's coefficients).
// Relative error is a few ulps over the positive reals.
const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS: [f64; 15] = [
    0.999_999_999_999_997_09,
    57.156_235_665_862_923,
    -59.597_960_355_475_49,
    14.136_097_974_741_746,
    -0.491_913_816_097_620_2,
    3.399_464_998_481_188_9e-5,
    4.652_362_892_704_857_5e-5,
    -9.837_447_530_487_956e-5,
    1.580_887_032_249_124_9e-4,
    -2.102_644_417_241_048_7e-4,
    2.174_396_181_152_126_4e-4,
    -1.643_181_065_367_639e-4,
    8.441_822_398_385_274e-5,
    -2.619_083_840_158_141e-5,
    3.689_918_265_953_162e-6,
];

/// Natural log of the Gamma function for `x > 0`.
///
/// Errors on non-positive or non-finite input.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!(
            "log_gamma requires finite x > 0, got {x}"
        )));
    }
    Ok(ln_gamma(x))
}

/// Unchecked version of [`log_gamma`] for internal hot paths.
/// Returns NaN outside the domain.
pub(crate) fn ln_gamma(x: f64) -> f64 {
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    if x < 0.5 {
        // One recurrence step keeps the series in its accurate range.
        return ln_gamma(x + 1.0) - x.ln();
    }
    let mut sum = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (x + i as f64);
    }
    let tmp = x + LANCZOS_G + 0.5;
    (x + 0.5) * tmp.ln() - tmp + HALF_LN_2PI + (sum / x).ln()
}

/// `ln(sum_i exp(xs_i))`, max-shifted for stability.
///
/// An empty slice yields `-inf` (the empty sum).
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let mut m = f64::NEG_INFINITY;
    for &x in xs {
        if x > m {
            m = x;
        }
    }
    if !m.is_finite() {
        return m;
    }
    let mut s = 0.0;
    for &x in xs {
        s += (x - m).exp();
    }
    m + s.ln()
}

/// Regularized lower incomplete gamma P(a, x).
///
/// Series expansion for `x < a + 1`, continued fraction otherwise.
pub fn reg_gamma_p(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() || !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "reg_gamma_p requires a > 0 and x >= 0, got a={a}, x={x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x < a + 1.0 {
        Ok(gamma_p_series(a, x))
    } else {
        Ok(1.0 - gamma_q_cf(a, x))
    }
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
pub fn reg_gamma_q(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() || !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "reg_gamma_q requires a > 0 and x >= 0, got a={a}, x={x}"
        )));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x < a + 1.0 {
        Ok(1.0 - gamma_p_series(a, x))
    } else {
        Ok(gamma_q_cf(a, x))
    }
}

/// Survival function of the chi-squared distribution with `df` degrees of
/// freedom: P(X > stat).
pub fn chi_square_sf(stat: f64, df: f64) -> Result<f64> {
    if !(df > 0.0) {
        return Err(Error::Domain(format!(
            "chi_square_sf requires df > 0, got {df}"
        )));
    }
    reg_gamma_q(0.5 * df, 0.5 * stat.max(0.0))
}

const GAMMA_EPS: f64 = 1e-15;
const GAMMA_ITMAX: usize = 600;

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let ln_pre = a * x.ln() - x - ln_gamma(a);
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..GAMMA_ITMAX {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * GAMMA_EPS {
            break;
        }
    }
    (ln_pre + sum.ln()).exp()
}

// Lentz's algorithm for the continued-fraction form of Q(a, x).
fn gamma_q_cf(a: f64, x: f64) -> f64 {
    let ln_pre = a * x.ln() - x - ln_gamma(a);
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..GAMMA_ITMAX {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < GAMMA_EPS {
            break;
        }
    }
    (ln_pre + h.ln()).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_gamma_anchors() {
        // Gamma(1) = 1, Gamma(5) = 4!, Gamma(1/2) = sqrt(pi)
        assert_eq!(log_gamma(1.0).unwrap(), 0.0);
        assert!((log_gamma(5.0).unwrap() - 24.0_f64.ln()).abs() <= 1e-12);
        let ln_sqrt_pi = 0.5 * std::f64::consts::PI.ln();
        assert!((log_gamma(0.5).unwrap() - ln_sqrt_pi).abs() <= 1e-12);
    }

    #[test]
    fn log_gamma_recurrence_grid() {
        // |lg(x+1) - lg(x) - ln x| small on x = 0.1, 0.2, ..., 100
        for i in 1..=1000 {
            let x = i as f64 / 10.0;
            let lhs = ln_gamma(x + 1.0) - ln_gamma(x) - x.ln();
            assert!(
                lhs.abs() <= 1e-10,
                "recurrence violated at x={x}: residual {lhs:e}"
            );
        }
    }

    #[test]
    fn log_gamma_domain_errors() {
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-3.0).is_err());
        assert!(log_gamma(f64::NAN).is_err());
        assert!(log_gamma(f64::INFINITY).is_err());
    }

    #[test]
    fn log_gamma_large_arguments() {
        // Stirling cross-checks computed with mpmath at 50 digits.
        let cases = [
            (10.0, 12.801827480081469),
            (100.0, 359.1342053695754),
            (1e3, 5905.220423209181),
            (1e6, 12815504.569147612),
            (1e-3, 6.907178885383854),
        ];
        for (x, want) in cases {
            let got = log_gamma(x).unwrap();
            let rel = if want == 0.0 {
                got.abs()
            } else {
                ((got - want) / want).abs()
            };
            assert!(rel <= 1e-13, "x={x}: got {got}, want {want}, rel {rel:e}");
        }
    }

    #[test]
    fn log_sum_exp_basics() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_eq!(
            log_sum_exp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]),
            f64::NEG_INFINITY
        );
        let got = log_sum_exp(&[0.5, 2.0]);
        let want = (0.5_f64.exp() + 2.0_f64.exp()).ln();
        assert!((got - want).abs() < 1e-14);
        // Magnitudes that overflow the naive form.
        let got = log_sum_exp(&[1234.0, 1232.0]);
        let want = 1232.0 + (2.0_f64.exp() + 1.0).ln();
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn incomplete_gamma_anchors() {
        // Frozen from scipy.special: gammainc / gammaincc / chi2.sf.
        let cases = [
            (0.5, 0.5, 0.682_689_492_137_085_9),
            (2.0, 1.0, 0.264_241_117_657_115_3),
            (5.0, 10.0, 0.970_747_311_923_038_9),
            (9.5, 18.095_434_564_635_025, 0.99),
        ];
        for (a, x, want_p) in cases {
            let p = reg_gamma_p(a, x).unwrap();
            assert!(
                (p - want_p).abs() < 1e-10,
                "P({a},{x}) = {p}, want {want_p}"
            );
            let q = reg_gamma_q(a, x).unwrap();
            assert!((p + q - 1.0).abs() < 1e-12);
        }
        // chi2.sf(36.19086912927005, 19) = 0.01
        let sf = chi_square_sf(36.190_869_129_270_05, 19.0).unwrap();
        assert!((sf - 0.01).abs() < 1e-10, "sf = {sf}");
    }

    #[test]
    fn logprob_carrier() {
        assert!(LogProb::ZERO.is_impossible());
        assert_eq!(LogProb::ONE.prob(), 1.0);
        let lp = LogProb::new(std::f64::consts::LN_2.copysign(-1.0));
        assert!((lp.prob() - 0.5).abs() < 1e-15);
        assert!(lp < LogProb::ONE);
    }
}
