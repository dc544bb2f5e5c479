//! The test statistics and the cumulant estimators.
//!
//! `T_n` is the trace of the product of the two unbiased-centered Gram
//! matrices divided by `n`; the Gretton variant `T_{n,G}` is the same trace
//! on the biased-centered matrices. The first three cumulant estimators of
//! each sample come from trace identities that avoid enumerating index
//! triples: only one matrix product is needed and the cube is never formed.

use serde::{Deserialize, Serialize};

use crate::centering::{kahan_sum, CenteredGram, CenteringMode};
use crate::error::{Error, Result};

/// Which statistic a value represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticKind {
    /// `T_n`, built from unbiased-centered Gram matrices.
    New,
    /// `T_{n,G}`, built from biased-centered Gram matrices.
    Gretton,
}

/// A computed statistic value together with its kind and sample size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatisticValue {
    pub value: f64,
    pub kind: StatisticKind,
    pub n: usize,
}

/// First three cumulant estimators of one sample's centered Gram:
/// mean-like `c1`, variance-like `c2 >= 0`, and the third-moment-like `c3`
/// (which can be negative in finite samples).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CumulantEstimates {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub n: usize,
}

/// `T_n` or `T_{n,G}`: `(1/n) * sum_ij Kc[i][j] * Lc[i][j]`, which equals
/// the trace of the matrix product for symmetric inputs. The kind follows
/// the centering mode of the inputs.
pub fn statistic(kc: &CenteredGram, lc: &CenteredGram) -> Result<StatisticValue> {
    let n = kc.n();
    if n != lc.n() {
        return Err(Error::SizeMismatch {
            left: n,
            right: lc.n(),
        });
    }
    if n < 2 {
        return Err(Error::TooFewObservations { needed: 2, got: n });
    }
    if kc.mode() != lc.mode() {
        return Err(Error::ModeMismatch);
    }
    let total = kahan_sum(
        kc.values()
            .iter()
            .zip(lc.values().iter())
            .map(|(a, b)| a * b),
    );
    let kind = match kc.mode() {
        CenteringMode::Unbiased => StatisticKind::New,
        CenteringMode::Biased => StatisticKind::Gretton,
    };
    Ok(StatisticValue {
        value: total / n as f64,
        kind,
        n,
    })
}

/// The point estimate of HSIC, `statistic / n`.
pub fn hsic_estimate(stat: &StatisticValue) -> f64 {
    stat.value / stat.n as f64
}

/// First three cumulant estimators of a centered Gram matrix `A` via the
/// trace identities:
///
/// * `c1 = tr(A) / n`
/// * `c2 = [n(n-1)]^-1 [tr(A^2) - tr(A o A)]`
/// * `c3 = [n(n-1)(n-2)]^-1 {tr(A^3) - 3 tr(diag(A) A^2) + 2 tr(A o A o A)}`
///
/// where `o` is the entrywise product. `tr(A^2)` uses the symmetry of `A`
/// (sum of squared entries) and `tr(A^3)` contracts `A` against `A^2`
/// entrywise, so only one matrix product is formed.
pub fn cumulants(cc: &CenteredGram) -> Result<CumulantEstimates> {
    let n = cc.n();
    if n < 3 {
        return Err(Error::TooFewObservations { needed: 3, got: n });
    }
    let a = cc.values();
    let nf = n as f64;

    let trace = kahan_sum((0..n).map(|i| a[[i, i]]));
    let c1 = trace / nf;

    let tr_a2 = kahan_sum(a.iter().map(|v| v * v));
    let tr_diag_sq = kahan_sum((0..n).map(|i| a[[i, i]] * a[[i, i]]));
    let pairs = nf * (nf - 1.0);
    let raw_c2 = (tr_a2 - tr_diag_sq) / pairs;
    // The exact value is a sum of squared off-diagonal entries; rounding in
    // the two trace accumulations can leave a negligible negative residue.
    let c2_floor = -1e-14 * (tr_a2 / pairs).max(1.0);
    let c2 = if raw_c2 >= 0.0 {
        raw_c2
    } else if raw_c2 >= c2_floor {
        0.0
    } else {
        return Err(Error::Numeric(format!(
            "second cumulant estimate is negative beyond rounding: {raw_c2}"
        )));
    };

    let a2 = a.dot(a);
    let tr_a3 = kahan_sum(a.iter().zip(a2.iter()).map(|(x, y)| x * y));
    let tr_diag_a2 = kahan_sum((0..n).map(|i| a[[i, i]] * a2[[i, i]]));
    let tr_cube_diag = kahan_sum((0..n).map(|i| a[[i, i]].powi(3)));
    let c3 = (tr_a3 - 3.0 * tr_diag_a2 + 2.0 * tr_cube_diag) / (nf * (nf - 1.0) * (nf - 2.0));

    for (name, v) in [("c1", c1), ("c2", c2), ("c3", c3)] {
        if !v.is_finite() {
            return Err(Error::Numeric(format!("cumulant {name} is not finite")));
        }
    }
    Ok(CumulantEstimates { c1, c2, c3, n })
}
