//! Gaussian RBF Gram matrices over vector or functional observations.
//!
//! Curves are compared through the L2 distance approximated by the
//! trapezoidal rule on a shared time grid; vectors through the Euclidean
//! distance. The kernel width is either fixed or selected by the median
//! heuristic (median squared pairwise distance divided by two, so the median
//! pair sits at exponent -1).

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the observations of a [`Sample`] are interpreted.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleKind {
    /// Each row is a point in `R^p`.
    Vector,
    /// Each row is a curve evaluated on the shared, strictly increasing
    /// time grid.
    Functional { grid: Vec<f64> },
}

/// An ordered collection of `n` observations, each a `p`-vector or a curve
/// evaluated at `k` grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    data: Array2<f64>,
    kind: SampleKind,
}

impl Sample {
    /// A vector-valued sample; rows are observations.
    pub fn vector(data: Array2<f64>) -> Result<Self> {
        let (n, p) = data.dim();
        if n == 0 {
            return Err(Error::EmptySample);
        }
        if p == 0 {
            return Err(Error::InvalidParameter("dimension p must be >= 1".into()));
        }
        check_finite(&data)?;
        Ok(Self {
            data,
            kind: SampleKind::Vector,
        })
    }

    /// A functional sample; rows are curve values on `grid`.
    pub fn functional(data: Array2<f64>, grid: Vec<f64>) -> Result<Self> {
        let (n, k) = data.dim();
        if n == 0 {
            return Err(Error::EmptySample);
        }
        validate_grid(&grid)?;
        if k != grid.len() {
            return Err(Error::RowLength {
                row: 0,
                expected: grid.len(),
                found: k,
            });
        }
        check_finite(&data)?;
        Ok(Self {
            data,
            kind: SampleKind::Functional { grid },
        })
    }

    /// Number of observations.
    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    /// Row length: the dimension `p` or the grid size `k`.
    pub fn width(&self) -> usize {
        self.data.ncols()
    }

    /// The underlying `n x p` (or `n x k`) value matrix.
    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn kind(&self) -> &SampleKind {
        &self.kind
    }

    /// The time grid for functional samples, `None` for vector samples.
    pub fn grid(&self) -> Option<&[f64]> {
        match &self.kind {
            SampleKind::Vector => None,
            SampleKind::Functional { grid } => Some(grid),
        }
    }
}

fn check_finite(data: &Array2<f64>) -> Result<()> {
    for ((i, j), v) in data.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("data[{i}][{j}] = {v}")));
        }
    }
    Ok(())
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::GridTooShort(grid.len()));
    }
    for (r, w) in grid.windows(2).enumerate() {
        if !w[0].is_finite() || !w[1].is_finite() {
            return Err(Error::NonFinite(format!("grid[{r}..={}]", r + 1)));
        }
        if w[1] <= w[0] {
            return Err(Error::GridNotIncreasing(r + 1));
        }
    }
    Ok(())
}

/// Kernel family; only the Gaussian RBF is implemented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    #[default]
    GaussianRbf,
}

/// Kernel width: selected from the data or fixed to a positive value.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Width {
    #[default]
    Auto,
    Fixed(f64),
}

/// Configuration of one kernel: family plus width.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct KernelConfig {
    pub family: KernelFamily,
    pub width: Width,
}

impl KernelConfig {
    /// Gaussian RBF with data-selected width.
    pub fn auto() -> Self {
        Self::default()
    }

    /// Gaussian RBF with a fixed width `sigma2 > 0`.
    pub fn fixed(sigma2: f64) -> Self {
        Self {
            family: KernelFamily::GaussianRbf,
            width: Width::Fixed(sigma2),
        }
    }

    fn validate(&self) -> Result<()> {
        if let Width::Fixed(s2) = self.width {
            if !s2.is_finite() || s2 <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "kernel width sigma2 must be positive and finite, got {s2}"
                )));
            }
        }
        Ok(())
    }
}

/// A symmetric `n x n` matrix of kernel evaluations, together with the width
/// actually used. For the Gaussian RBF every entry lies in `(0, 1]` and the
/// diagonal is exactly 1, so the boundedness condition required by the
/// asymptotic theory holds by construction.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    values: Array2<f64>,
    sigma2: f64,
}

impl GramMatrix {
    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    /// The kernel width used to build this matrix.
    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }
}

/// Trapezoidal quadrature weights for a strictly increasing grid:
/// integrating `sum(w[r] * f[r])` equals the trapezoidal rule for
/// `integral of f` over `[grid[0], grid[k-1]]`.
fn trapezoid_weights(grid: &[f64]) -> Vec<f64> {
    let k = grid.len();
    let mut w = vec![0.0; k];
    for r in 0..k - 1 {
        let h = (grid[r + 1] - grid[r]) / 2.0;
        w[r] += h;
        w[r + 1] += h;
    }
    w
}

/// Trapezoidal-rule approximation of the squared L2 norm of a curve:
/// `integral of x(t)^2 dt` over the grid span.
pub fn functional_sq_norm(values: &[f64], grid: &[f64]) -> Result<f64> {
    validate_grid(grid)?;
    if values.len() != grid.len() {
        return Err(Error::RowLength {
            row: 0,
            expected: grid.len(),
            found: values.len(),
        });
    }
    for (r, v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("curve value [{r}]")));
        }
    }
    let w = trapezoid_weights(grid);
    Ok(values.iter().zip(&w).map(|(v, wi)| wi * v * v).sum())
}

/// All pairwise squared distances of a sample: Euclidean for vectors,
/// trapezoidal L2 for curves. Symmetric with zero diagonal.
pub fn pairwise_sq_dist(s: &Sample) -> Array2<f64> {
    let n = s.n();
    let w = s.grid().map(trapezoid_weights);
    let data = s.data();
    let mut d = Array2::zeros((n, n));
    for i in 0..n {
        let xi = data.row(i);
        for j in (i + 1)..n {
            let xj = data.row(j);
            let dij = match &w {
                // Weighted squared distance = trapezoid rule on (x_i - x_j)^2.
                Some(w) => xi
                    .iter()
                    .zip(xj.iter())
                    .zip(w.iter())
                    .map(|((a, b), wi)| wi * (a - b) * (a - b))
                    .sum(),
                None => xi
                    .iter()
                    .zip(xj.iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum(),
            };
            d[[i, j]] = dij;
            d[[j, i]] = dij;
        }
    }
    d
}

/// Median-heuristic kernel width: median of the squared pairwise distances
/// over pairs `i < j`, divided by two. With an even pair count the two
/// central order statistics are averaged.
///
/// Errors with [`Error::DegenerateSample`] when every pairwise distance is
/// zero (all observations identical).
pub fn select_width(s: &Sample) -> Result<f64> {
    let n = s.n();
    if n < 2 {
        return Err(Error::TooFewObservations { needed: 2, got: n });
    }
    let d = pairwise_sq_dist(s);
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            dists.push(d[[i, j]]);
        }
    }
    dists.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    let m = dists.len();
    let median = if m % 2 == 1 {
        dists[m / 2]
    } else {
        (dists[m / 2 - 1] + dists[m / 2]) / 2.0
    };
    if median <= 0.0 {
        // More than half the pairs coincide. Identical observations are
        // allowed, so take the median of the nonzero distances instead;
        // only a fully identical sample has no usable width.
        let first_nonzero = match dists.iter().position(|&d| d > 0.0) {
            Some(idx) => idx,
            None => return Err(Error::DegenerateSample),
        };
        let nz = &dists[first_nonzero..];
        let m = nz.len();
        let median_nz = if m % 2 == 1 {
            nz[m / 2]
        } else {
            (nz[m / 2 - 1] + nz[m / 2]) / 2.0
        };
        return Ok(median_nz / 2.0);
    }
    Ok(median / 2.0)
}

/// The Gaussian RBF Gram matrix `K[i][j] = exp(-||x_i - x_j||^2 / (2 sigma2))`
/// with the width taken from `cfg` or selected by [`select_width`].
pub fn gram(s: &Sample, cfg: &KernelConfig) -> Result<GramMatrix> {
    cfg.validate()?;
    let sigma2 = match cfg.width {
        Width::Fixed(s2) => s2,
        Width::Auto => select_width(s)?,
    };
    let n = s.n();
    let mut values = pairwise_sq_dist(s);
    let inv = -1.0 / (2.0 * sigma2);
    values.mapv_inplace(|d| (d * inv).exp());
    for i in 0..n {
        values[[i, i]] = 1.0;
    }
    Ok(GramMatrix { values, sigma2 })
}
