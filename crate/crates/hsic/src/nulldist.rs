//! Null-distribution approximations and p-values.
//!
//! Three routes from a statistic to a p-value:
//!
//! * the three-cumulant matched chi-square approximation for `T_n` (the
//!   default), with a two-cumulant Gamma fallback when the estimated third
//!   cumulant product is non-positive;
//! * the two-parameter Gamma approximation for `T_{n,G}` (the classical
//!   baseline), matching mean and variance only;
//! * the permutation distribution of `T_n`.
//!
//! The chi-square and Gamma survival functions share one regularized
//! incomplete-gamma routine: series expansion below `a + 1`, continued
//! fraction above, relative tolerance 1e-12, at most 500 iterations.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::centering::center_unbiased;
use crate::error::{Error, Result};
use crate::kernel::{gram, KernelConfig, Sample};
use crate::seeding;
use crate::stat::{hsic_estimate, statistic, CumulantEstimates, StatisticKind, StatisticValue};

const REL_TOL: f64 = 1e-12;

/// Iteration budget for the incomplete-gamma series and continued fraction.
/// Both need O(sqrt(a)) terms when `x` sits near `a`, and the Gamma-baseline
/// test produces shapes in the tens of thousands on high-dimensional data,
/// so the cap grows with the shape; 500 covers every small-shape case.
fn gamma_iter_budget(a: f64) -> usize {
    500 + (10.0 * a.sqrt()) as usize
}
/// Tag for permutation stream seeds under [`seeding::derive`].
const PERMUTATION_TAG: u64 = 1;

// ---------------------------------------------------------------------------
// Regularized incomplete gamma
// ---------------------------------------------------------------------------

/// Natural log of the gamma function (Lanczos approximation, g = 7).
fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    use std::f64::consts::PI;
    if x < 0.5 {
        // Reflection keeps small arguments accurate.
        (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x)
    } else {
        let z = x - 1.0;
        let mut acc = COEF[0];
        for (i, c) in COEF.iter().enumerate().skip(1) {
            acc += c / (z + i as f64);
        }
        let t = z + 7.5;
        0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
    }
}

/// Regularized upper incomplete gamma `Q(a, x)`.
fn reg_gamma_upper(a: f64, x: f64) -> Result<f64> {
    if !a.is_finite() || a <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "incomplete gamma needs a > 0, got {a}"
        )));
    }
    if x.is_nan() {
        return Err(Error::InvalidParameter("incomplete gamma at NaN".into()));
    }
    if x <= 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    let log_prefactor = -x + a * x.ln() - ln_gamma(a);
    let prefactor = log_prefactor.exp();
    let max_iter = gamma_iter_budget(a);
    if x < a + 1.0 {
        // Series for P(a, x); Q = 1 - P.
        let mut ap = a;
        let mut term = 1.0 / a;
        let mut sum = term;
        for _ in 0..max_iter {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * REL_TOL {
                return Ok(1.0 - prefactor * sum);
            }
        }
        Err(Error::Numeric(format!(
            "incomplete gamma series did not converge (a={a}, x={x})"
        )))
    } else {
        // Modified Lentz continued fraction for Q(a, x).
        const FPMIN: f64 = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / FPMIN;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..=max_iter {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < FPMIN {
                d = FPMIN;
            }
            c = b + an / c;
            if c.abs() < FPMIN {
                c = FPMIN;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < REL_TOL {
                return Ok(prefactor * h);
            }
        }
        Err(Error::Numeric(format!(
            "incomplete gamma continued fraction did not converge (a={a}, x={x})"
        )))
    }
}

/// Survival function of the chi-square distribution with `d` degrees of
/// freedom (`d` may be fractional): `P(chi^2_d >= x) = Q(d/2, x/2)`.
/// Returns 1 for `x <= 0`.
pub fn chi_sq_sf(x: f64, d: f64) -> Result<f64> {
    if !d.is_finite() || d <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "chi-square degrees of freedom must be positive, got {d}"
        )));
    }
    reg_gamma_upper(d / 2.0, x / 2.0)
}

/// Survival function of the Gamma distribution with the given shape and
/// scale: `Q(shape, t / scale)`. Returns 1 for `t <= 0`.
pub fn gamma_sf(t: f64, shape: f64, scale: f64) -> Result<f64> {
    if !shape.is_finite() || shape <= 0.0 || !scale.is_finite() || scale <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "gamma parameters must be positive, got shape={shape}, scale={scale}"
        )));
    }
    reg_gamma_upper(shape, t / scale)
}

// ---------------------------------------------------------------------------
// Cumulant matching
// ---------------------------------------------------------------------------

/// Parameters of the shifted chi-square approximation `beta0 + beta1 *
/// chi^2_d`; `d` may be fractional. The implied skewness is `sqrt(8/d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSqMatch {
    pub beta0: f64,
    pub beta1: f64,
    pub d: f64,
}

/// Result of matching the first three cumulants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CumulantMatch {
    /// Positive third-cumulant product: the shifted chi-square fit.
    ChiSq(ChiSqMatch),
    /// Non-positive third-cumulant product (possible in finite samples);
    /// the two-cumulant Gamma fit stands in.
    SkewFallback { shape: f64, scale: f64 },
}

/// Two-parameter Gamma fit to a given mean and variance.
fn gamma_match(mean: f64, variance: f64) -> Result<(f64, f64)> {
    if !(mean > 0.0) || !(variance > 0.0) {
        return Err(Error::DegenerateNull(format!(
            "gamma moment match needs positive mean and variance, got mean={mean}, var={variance}"
        )));
    }
    Ok((mean * mean / variance, variance / mean))
}

/// Match `beta0 + beta1 * chi^2_d` to the estimated cumulants of the
/// statistic:
///
/// * `beta0 = M1N1 - (M2N2)^2 / (M3N3)`
/// * `beta1 = M3N3 / (M2N2)`
/// * `d = (M2N2)^3 / (M3N3)^2`
///
/// where the products pair the two samples' estimates. When the estimated
/// third-cumulant product is non-positive the match signals the Gamma
/// fallback instead; when the variance product is (numerically) zero the
/// null distribution is degenerate and no approximation exists.
pub fn match_three_cumulants(m: &CumulantEstimates, n: &CumulantEstimates) -> Result<CumulantMatch> {
    let p1 = m.c1 * n.c1;
    let p2 = m.c2 * n.c2;
    let p3 = m.c3 * n.c3;
    // Variance scale for the degeneracy cutoff: p2 has the units of p1^2.
    let eps = 1e-14 * (p1 * p1).max(f64::MIN_POSITIVE);
    if p2 <= eps {
        return Err(Error::DegenerateNull(format!(
            "statistic has no variance to match (M2*N2 = {p2})"
        )));
    }
    if p3 <= 0.0 {
        let (shape, scale) = gamma_match(p1, 2.0 * p2)?;
        return Ok(CumulantMatch::SkewFallback { shape, scale });
    }
    Ok(CumulantMatch::ChiSq(ChiSqMatch {
        beta0: p1 - p2 * p2 / p3,
        beta1: p3 / p2,
        d: p2.powi(3) / (p3 * p3),
    }))
}

// ---------------------------------------------------------------------------
// Test results
// ---------------------------------------------------------------------------

/// Which test produced a [`TestResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    /// Three-cumulant matched chi-square approximation of `T_n`.
    New,
    /// Two-parameter Gamma approximation of `T_{n,G}`.
    Gamma,
    /// Permutation distribution of `T_n`.
    Permutation,
}

/// Method-specific parameters recorded alongside a p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "approx", rename_all = "snake_case")]
pub enum TestDetail {
    /// Shifted chi-square parameters of the NEW test.
    ChiSq { beta0: f64, beta1: f64, d: f64 },
    /// Gamma parameters; `fallback` marks the NEW test's skew fallback as
    /// opposed to the ordinary Gamma baseline.
    Gamma {
        shape: f64,
        scale: f64,
        fallback: bool,
    },
    /// Permutation count and how many permuted statistics reached the
    /// observed one.
    Permutation { permutations: usize, exceeded: usize },
}

/// Outcome of one independence test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub method: MethodKind,
    pub n: usize,
    pub statistic: f64,
    pub hsic_estimate: f64,
    pub p_value: f64,
    pub sigma2_x: f64,
    pub sigma2_y: f64,
    pub detail: TestDetail,
}

/// p-value of the NEW test: `P(chi^2_d >= (T_n - beta0) / beta1)` under the
/// three-cumulant match, or the Gamma fallback tail when the third-cumulant
/// product is non-positive.
pub fn p_value_new(
    tn: &StatisticValue,
    m: &CumulantEstimates,
    n: &CumulantEstimates,
) -> Result<(f64, TestDetail)> {
    if tn.kind != StatisticKind::New {
        return Err(Error::InvalidParameter(
            "the NEW approximation applies to the unbiased statistic".into(),
        ));
    }
    match match_three_cumulants(m, n)? {
        CumulantMatch::ChiSq(fit) => {
            let p = chi_sq_sf((tn.value - fit.beta0) / fit.beta1, fit.d)?;
            Ok((
                p,
                TestDetail::ChiSq {
                    beta0: fit.beta0,
                    beta1: fit.beta1,
                    d: fit.d,
                },
            ))
        }
        CumulantMatch::SkewFallback { shape, scale } => {
            let p = gamma_sf(tn.value, shape, scale)?;
            Ok((
                p,
                TestDetail::Gamma {
                    shape,
                    scale,
                    fallback: true,
                },
            ))
        }
    }
}

/// p-value of the Gamma baseline: fit `Gamma(shape, scale)` to the mean
/// `M1N1` and variance `2 M2N2` estimated from the biased-centered Gram
/// matrices, then take its upper tail at `T_{n,G}`.
pub fn p_value_gamma(
    tng: &StatisticValue,
    m_b: &CumulantEstimates,
    n_b: &CumulantEstimates,
) -> Result<(f64, TestDetail)> {
    if tng.kind != StatisticKind::Gretton {
        return Err(Error::InvalidParameter(
            "the Gamma approximation applies to the biased statistic".into(),
        ));
    }
    let mean = m_b.c1 * n_b.c1;
    let variance = 2.0 * m_b.c2 * n_b.c2;
    let (shape, scale) = gamma_match(mean, variance)?;
    let p = gamma_sf(tng.value, shape, scale)?;
    Ok((
        p,
        TestDetail::Gamma {
            shape,
            scale,
            fallback: false,
        },
    ))
}

/// Permutation test on the unbiased statistic.
///
/// Gram matrices are computed once; permutation `b` draws a uniform
/// permutation from a stream seeded by `(seed, b)` alone, so any number of
/// threads (or a re-run) reproduces the same p-value. Each permutation
/// re-indexes the centered y-Gram in O(n^2). The p-value uses the add-one
/// convention `(1 + #{T_b >= T_obs}) / (m + 1)` and therefore never
/// reaches 0.
pub fn p_value_permutation(
    x: &Sample,
    y: &Sample,
    cfg_x: &KernelConfig,
    cfg_y: &KernelConfig,
    m: usize,
    seed: u64,
) -> Result<TestResult> {
    if m < 1 {
        return Err(Error::InvalidParameter(
            "permutation count must be at least 1".into(),
        ));
    }
    let n = x.n();
    if n != y.n() {
        return Err(Error::SizeMismatch {
            left: n,
            right: y.n(),
        });
    }
    if n < 3 {
        return Err(Error::TooFewObservations { needed: 3, got: n });
    }
    let kg = gram(x, cfg_x)?;
    let lg = gram(y, cfg_y)?;
    let kc = center_unbiased(&kg)?;
    let lc = center_unbiased(&lg)?;
    let observed = statistic(&kc, &lc)?;

    // Unbiased centering commutes with joint re-indexing, so permuting the
    // centered matrix equals centering the permuted Gram matrix.
    let kv = kc.values();
    let lv = lc.values();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut exceeded = 0usize;
    for b in 1..=m as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seeding::derive(seed, PERMUTATION_TAG, b));
        perm.shuffle(&mut rng);
        let mut acc = 0.0;
        for i in 0..n {
            let li = perm[i];
            for j in 0..n {
                acc += kv[[i, j]] * lv[[li, perm[j]]];
            }
        }
        if acc / n as f64 >= observed.value {
            exceeded += 1;
        }
    }
    let p_value = (1.0 + exceeded as f64) / (m as f64 + 1.0);
    Ok(TestResult {
        method: MethodKind::Permutation,
        n,
        statistic: observed.value,
        hsic_estimate: hsic_estimate(&observed),
        p_value,
        sigma2_x: kg.sigma2(),
        sigma2_y: lg.sigma2(),
        detail: TestDetail::Permutation {
            permutations: m,
            exceeded,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::Array2;
    use proptest::prelude::*;
    use rand::Rng;

    fn cum(c1: f64, c2: f64, c3: f64) -> CumulantEstimates {
        CumulantEstimates { c1, c2, c3, n: 10 }
    }

    #[test]
    fn sf_is_one_at_zero_and_below() {
        for d in [0.01, 1.0, 2.0, 17.5] {
            assert_eq!(chi_sq_sf(0.0, d).unwrap(), 1.0);
            assert_eq!(chi_sq_sf(-3.0, d).unwrap(), 1.0);
        }
    }

    #[test]
    fn sf_closed_form_two_degrees() {
        for i in 0..=200 {
            let x = i as f64 * 0.5;
            let got = chi_sq_sf(x, 2.0).unwrap();
            let expected = (-x / 2.0).exp();
            assert!(
                (got - expected).abs() <= 1e-12,
                "x={x}: {got} vs {expected}"
            );
        }
    }

    #[test]
    fn sf_matches_high_precision_reference_values() {
        // Reference values computed with 30-digit arithmetic.
        let cases = [
            (3.841459, 1.0, 0.049999994653195766),
            (0.5, 1.0, 0.479500122186953462),
            (1.0, 1.0, 0.317310507862914103),
            (2.0, 2.0, 0.367879441171442322),
            (5.991465, 2.0, 0.049999988677700836),
            (7.814728, 3.0, 0.049999997831966144),
            (10.0, 4.0, 0.040427681994512803),
            (0.1, 0.01, 0.012282742034091855),
            (3.0, 2.5, 0.305849629445817914),
            (100.0, 80.0, 0.064570368921132976),
            (950.0, 1000.0, 0.869124065745688426),
            (123.4, 56.7, 7.44529463200132293e-7),
            (0.25, 0.25, 0.192199550591940054),
        ];
        for (x, d, expected) in cases {
            let got = chi_sq_sf(x, d).unwrap();
            assert!(
                (got - expected).abs() <= 1e-10,
                "sf({x}, {d}) = {got}, expected {expected}"
            );
        }
        // Deep tail with tiny degrees of freedom.
        let tail = chi_sq_sf(1000.0, 0.01).unwrap();
        assert!((tail - 7.355915398829799e-223).abs() <= 1e-232 || tail < 1e-220);
    }

    #[test]
    fn sf_rejects_bad_degrees() {
        assert!(chi_sq_sf(1.0, 0.0).is_err());
        assert!(chi_sq_sf(1.0, -2.0).is_err());
        assert!(chi_sq_sf(1.0, f64::NAN).is_err());
    }

    #[test]
    fn gamma_sf_reference_values() {
        // Gamma(2, 1) tail at 2 has closed form 3 e^-2.
        let got = gamma_sf(2.0, 2.0, 1.0).unwrap();
        assert_abs_diff_eq!(got, 3.0 * (-2.0f64).exp(), epsilon = 1e-13);
        // Gamma(1/2, 2) is chi-square with one degree of freedom.
        let got = gamma_sf(3.841459, 0.5, 2.0).unwrap();
        assert_abs_diff_eq!(got, 0.05, epsilon = 1e-4);
        let got = gamma_sf(5.0, 1.7, 0.9).unwrap();
        assert_abs_diff_eq!(got, 0.015831716751361711, epsilon = 1e-12);
        assert_eq!(gamma_sf(0.0, 1.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn match_unit_cumulants() {
        let m = cum(1.0, 1.0, 1.0);
        match match_three_cumulants(&m, &m).unwrap() {
            CumulantMatch::ChiSq(fit) => {
                assert_abs_diff_eq!(fit.beta0, 0.0, epsilon = 1e-15);
                assert_abs_diff_eq!(fit.beta1, 1.0, epsilon = 1e-15);
                assert_abs_diff_eq!(fit.d, 1.0, epsilon = 1e-15);
            }
            other => panic!("expected chi-square fit, got {other:?}"),
        }
    }

    #[test]
    fn match_hand_products() {
        // M1N1 = 2, M2N2 = 4, M3N3 = 8
        let m = cum(2.0, 4.0, 8.0);
        let n = cum(1.0, 1.0, 1.0);
        match match_three_cumulants(&m, &n).unwrap() {
            CumulantMatch::ChiSq(fit) => {
                assert_abs_diff_eq!(fit.beta0, 0.0, epsilon = 1e-15);
                assert_abs_diff_eq!(fit.beta1, 2.0, epsilon = 1e-15);
                assert_abs_diff_eq!(fit.d, 1.0, epsilon = 1e-15);
            }
            other => panic!("expected chi-square fit, got {other:?}"),
        }
    }

    #[test]
    fn match_reproduces_the_three_cumulants() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for _ in 0..200 {
            let p1: f64 = rng.random_range(0.05..5.0);
            let p2: f64 = rng.random_range(0.05..5.0);
            let p3: f64 = rng.random_range(0.05..5.0);
            let m = cum(p1, p2, p3);
            let n = cum(1.0, 1.0, 1.0);
            let fit = match match_three_cumulants(&m, &n).unwrap() {
                CumulantMatch::ChiSq(fit) => fit,
                other => panic!("unexpected {other:?}"),
            };
            let mean = fit.beta0 + fit.beta1 * fit.d;
            let var = 2.0 * fit.beta1 * fit.beta1 * fit.d;
            let third = 8.0 * fit.beta1.powi(3) * fit.d;
            assert!((mean - p1).abs() <= 1e-10 * p1.abs().max(1.0));
            assert!((var - 2.0 * p2).abs() <= 1e-10 * (2.0 * p2));
            assert!((third - 8.0 * p3).abs() <= 1e-10 * (8.0 * p3));
            let skew = 8.0 * p3 / (2.0 * p2).powf(1.5);
            assert!(((8.0 / fit.d).sqrt() - skew).abs() <= 1e-10 * skew);
        }
    }

    #[test]
    fn match_degenerate_when_no_variance() {
        let m = cum(1.0, 0.0, 0.0);
        assert!(matches!(
            match_three_cumulants(&m, &m),
            Err(Error::DegenerateNull(_))
        ));
    }

    #[test]
    fn match_signals_fallback_on_nonpositive_skew() {
        let m = cum(1.0, 1.0, -0.5);
        let n = cum(1.0, 1.0, 1.0);
        match match_three_cumulants(&m, &n).unwrap() {
            CumulantMatch::SkewFallback { shape, scale } => {
                // mean 1, variance 2 -> shape 1/2, scale 2 (chi-square_1)
                assert_abs_diff_eq!(shape, 0.5, epsilon = 1e-15);
                assert_abs_diff_eq!(scale, 2.0, epsilon = 1e-15);
            }
            other => panic!("expected fallback, got {other:?}"),
        }
    }

    fn stat_new(value: f64, n: usize) -> StatisticValue {
        StatisticValue {
            value,
            kind: StatisticKind::New,
            n,
        }
    }

    #[test]
    fn p_new_is_one_at_the_shift() {
        let m = cum(1.0, 1.0, 1.0);
        // beta0 = 0, so T_n = 0 sits at the shift.
        let (p, _) = p_value_new(&stat_new(0.0, 10), &m, &m).unwrap();
        assert_eq!(p, 1.0);
    }

    #[test]
    fn p_new_reduces_to_chi1_table_value() {
        let m = cum(1.0, 1.0, 1.0);
        let (p, detail) = p_value_new(&stat_new(3.841459, 10), &m, &m).unwrap();
        assert_abs_diff_eq!(p, 0.05, epsilon = 1e-4);
        assert!(matches!(detail, TestDetail::ChiSq { .. }));
    }

    #[test]
    fn p_new_tail_limit() {
        let m = cum(1.0, 1.0, 1.0);
        let (p, _) = p_value_new(&stat_new(1e6, 10), &m, &m).unwrap();
        assert!(p < 1e-100);
    }

    #[test]
    fn p_new_uses_gamma_fallback_and_flags_it() {
        let m = cum(1.0, 1.0, -1.0);
        let n = cum(1.0, 1.0, 1.0);
        let (p, detail) = p_value_new(&stat_new(3.841459, 10), &m, &n).unwrap();
        match detail {
            TestDetail::Gamma {
                fallback: true,
                shape,
                scale,
            } => {
                assert_abs_diff_eq!(shape, 0.5, epsilon = 1e-15);
                assert_abs_diff_eq!(scale, 2.0, epsilon = 1e-15);
            }
            other => panic!("expected flagged gamma fallback, got {other:?}"),
        }
        assert_abs_diff_eq!(p, 0.05, epsilon = 1e-4);
    }

    #[test]
    fn p_new_rejects_biased_statistic() {
        let s = StatisticValue {
            value: 1.0,
            kind: StatisticKind::Gretton,
            n: 10,
        };
        let m = cum(1.0, 1.0, 1.0);
        assert!(p_value_new(&s, &m, &m).is_err());
    }

    #[test]
    fn p_gamma_closed_forms() {
        let tng = |v: f64| StatisticValue {
            value: v,
            kind: StatisticKind::Gretton,
            n: 10,
        };
        // mean 1, variance 2 -> exactly chi-square_1
        let m = cum(1.0, 1.0, 0.0);
        let (p, _) = p_value_gamma(&tng(3.841459), &m, &m.clone()).unwrap();
        assert_abs_diff_eq!(p, 0.05, epsilon = 1e-4);
        let (p, _) = p_value_gamma(&tng(0.0), &m, &m.clone()).unwrap();
        assert_eq!(p, 1.0);
        // mean 2, variance 2 -> shape 2, scale 1; closed form (1+x) e^-x
        let m2 = cum(2.0, 1.0, 0.0);
        let n2 = cum(1.0, 1.0, 0.0);
        let (p, detail) = p_value_gamma(&tng(2.0), &m2, &n2).unwrap();
        assert_abs_diff_eq!(p, 3.0 * (-2.0f64).exp(), epsilon = 1e-12);
        match detail {
            TestDetail::Gamma { fallback, .. } => assert!(!fallback),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn p_gamma_degenerate_mean() {
        let tng = StatisticValue {
            value: 1.0,
            kind: StatisticKind::Gretton,
            n: 10,
        };
        let m = cum(-1.0, 1.0, 0.0);
        let n = cum(1.0, 1.0, 0.0);
        assert!(matches!(
            p_value_gamma(&tng, &m, &n),
            Err(Error::DegenerateNull(_))
        ));
    }

    fn gaussian_sample(n: usize, rng: &mut ChaCha8Rng) -> Sample {
        let pts: Vec<f64> = (0..n)
            .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        Sample::vector(Array2::from_shape_vec((n, 1), pts).unwrap()).unwrap()
    }

    #[test]
    fn permutation_is_deterministic_in_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let x = gaussian_sample(20, &mut rng);
        let y = gaussian_sample(20, &mut rng);
        let cfg = KernelConfig::auto();
        let a = p_value_permutation(&x, &y, &cfg, &cfg, 50, 7).unwrap();
        let b = p_value_permutation(&x, &y, &cfg, &cfg, 50, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn permutation_detects_self_dependence() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let x = gaussian_sample(30, &mut rng);
        let cfg = KernelConfig::auto();
        let r = p_value_permutation(&x, &x.clone(), &cfg, &cfg, 99, 11).unwrap();
        // A perfectly dependent pair should beat every permutation.
        assert_eq!(r.p_value, 1.0 / 100.0);
        match r.detail {
            TestDetail::Permutation {
                permutations,
                exceeded,
            } => {
                assert_eq!(permutations, 99);
                assert_eq!(exceeded, 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn permutation_p_value_formula_and_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let x = gaussian_sample(15, &mut rng);
        let y = gaussian_sample(15, &mut rng);
        let cfg = KernelConfig::auto();
        let r = p_value_permutation(&x, &y, &cfg, &cfg, 19, 3).unwrap();
        match r.detail {
            TestDetail::Permutation { exceeded, .. } => {
                assert_eq!(r.p_value, (1.0 + exceeded as f64) / 20.0);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(r.p_value >= 1.0 / 20.0 && r.p_value <= 1.0);
    }

    #[test]
    fn permutation_rejects_bad_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let x = gaussian_sample(10, &mut rng);
        let y = gaussian_sample(9, &mut rng);
        let cfg = KernelConfig::auto();
        assert!(matches!(
            p_value_permutation(&x, &y, &cfg, &cfg, 10, 0),
            Err(Error::SizeMismatch { .. })
        ));
        let y10 = gaussian_sample(10, &mut rng);
        assert!(matches!(
            p_value_permutation(&x, &y10, &cfg, &cfg, 0, 0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn observed_statistic_invariant_under_joint_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let n = 12;
        let x = gaussian_sample(n, &mut rng);
        let y = gaussian_sample(n, &mut rng);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let permute = |s: &Sample| {
            let data = s.data();
            let rows: Vec<f64> = order.iter().flat_map(|&i| data.row(i).to_vec()).collect();
            Sample::vector(Array2::from_shape_vec((n, 1), rows).unwrap()).unwrap()
        };
        let cfg = KernelConfig::fixed(1.0);
        let observed = |a: &Sample, b: &Sample| {
            let kg = gram(a, &cfg).unwrap();
            let lg = gram(b, &cfg).unwrap();
            statistic(
                &center_unbiased(&kg).unwrap(),
                &center_unbiased(&lg).unwrap(),
            )
            .unwrap()
            .value
        };
        let t0 = observed(&x, &y);
        let t1 = observed(&permute(&x), &permute(&y));
        assert!((t0 - t1).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn p_new_is_strictly_decreasing_in_the_statistic(
            t1 in -2.0f64..30.0,
            gap in 0.01f64..5.0,
            c2 in 0.2f64..3.0,
            c3 in 0.05f64..3.0,
        ) {
            let m = cum(1.0, c2, c3);
            let n = cum(1.0, 1.0, 1.0);
            let beta0 = match match_three_cumulants(&m, &n).unwrap() {
                CumulantMatch::ChiSq(fit) => fit.beta0,
                other => panic!("unexpected {other:?}"),
            };
            let (p_low, _) = p_value_new(&stat_new(t1, 10), &m, &n).unwrap();
            let (p_high, _) = p_value_new(&stat_new(t1 + gap, 10), &m, &n).unwrap();
            if t1 > beta0 && p_low > 1e-300 {
                // strictly decreasing above the shift, until the tail
                // saturates at double-precision zero
                prop_assert!(p_high < p_low, "{p_high} !< {p_low}");
            } else {
                // flat at 1 below the shift
                prop_assert!(p_high <= p_low);
            }
        }

        #[test]
        fn sf_monotone_in_x(d in 0.05f64..50.0, x in 0.0f64..40.0, gap in 0.01f64..5.0) {
            let hi = chi_sq_sf(x, d).unwrap();
            let lo = chi_sq_sf(x + gap, d).unwrap();
            prop_assert!(lo <= hi);
        }
    }
}
