//! Unbiased and biased centering of Gram matrices.
//!
//! The unbiased centering subtracts leave-one-out row and column means and
//! adds back the off-diagonal grand mean; the biased centering is the usual
//! double centering `H K H` with `H = I - J/n`. Neither `H` nor the all-ones
//! matrix is ever materialized: row sums and the grand sum are precomputed
//! once and the result assembled entrywise in O(n^2).

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::kernel::GramMatrix;

/// Which centering produced a [`CenteredGram`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CenteringMode {
    /// Leave-one-out centering; the entries are unbiased estimators of the
    /// centered kernel.
    Unbiased,
    /// Double centering `H K H`; the entries are the biased estimators.
    Biased,
}

/// A centered Gram matrix tagged with its centering mode.
#[derive(Debug, Clone)]
pub struct CenteredGram {
    values: Array2<f64>,
    mode: CenteringMode,
}

impl CenteredGram {
    /// Wrap an existing symmetric matrix as a centered Gram. Intended for
    /// feeding synthetic or precomputed matrices into the estimators.
    pub fn from_symmetric(values: Array2<f64>, mode: CenteringMode) -> Result<Self> {
        let (r, c) = values.dim();
        if r != c {
            return Err(Error::SizeMismatch { left: r, right: c });
        }
        for ((i, j), v) in values.indexed_iter() {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("values[{i}][{j}]")));
            }
            if values[[j, i]] != *v {
                return Err(Error::InvalidParameter(format!(
                    "matrix not symmetric at ({i},{j})"
                )));
            }
        }
        Ok(Self { values, mode })
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn mode(&self) -> CenteringMode {
        self.mode
    }
}

/// Compensated (Kahan) sum; keeps long accumulations accurate and
/// independent of how the work might later be chunked.
pub(crate) fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

struct Sums {
    row: Vec<f64>,
    total: f64,
    trace: f64,
}

fn sums(k: &Array2<f64>) -> Sums {
    let n = k.nrows();
    let row: Vec<f64> = (0..n)
        .map(|i| kahan_sum(k.row(i).iter().copied()))
        .collect();
    let total = kahan_sum(row.iter().copied());
    let trace = kahan_sum((0..n).map(|i| k[[i, i]]));
    Sums { row, total, trace }
}

/// Assemble `K[i][j] - a[i] - a[j] + c` for symmetric `K`, mirroring the
/// upper triangle so the output is exactly symmetric.
fn center_with(k: &Array2<f64>, a: &[f64], c: f64) -> Array2<f64> {
    let n = k.nrows();
    let mut out = Array2::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let v = k[[i, j]] - a[i] - a[j] + c;
            out[[i, j]] = v;
            out[[j, i]] = v;
        }
    }
    out
}

/// Unbiased centering: entry `(i, j)` is
/// `K[i][j] - sum_{v != i} K[i][v]/(n-1) - sum_{u != j} K[u][j]/(n-1)
///  + sum_{u != v} K[u][v]/(n(n-1))`.
pub fn center_unbiased(k: &GramMatrix) -> Result<CenteredGram> {
    let n = k.n();
    if n < 2 {
        return Err(Error::TooFewObservations { needed: 2, got: n });
    }
    let s = sums(k.values());
    let nf = n as f64;
    let a: Vec<f64> = (0..n)
        .map(|i| (s.row[i] - k.values()[[i, i]]) / (nf - 1.0))
        .collect();
    let c = (s.total - s.trace) / (nf * (nf - 1.0));
    Ok(CenteredGram {
        values: center_with(k.values(), &a, c),
        mode: CenteringMode::Unbiased,
    })
}

/// Biased (double) centering: entry `(i, j)` is
/// `K[i][j] - rowmean_i - colmean_j + grandmean`, i.e. `H K H`.
pub fn center_biased(k: &GramMatrix) -> CenteredGram {
    let n = k.n();
    let s = sums(k.values());
    let nf = n as f64;
    let a: Vec<f64> = s.row.iter().map(|r| r / nf).collect();
    let c = s.total / (nf * nf);
    CenteredGram {
        values: center_with(k.values(), &a, c),
        mode: CenteringMode::Biased,
    }
}
