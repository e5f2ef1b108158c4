//! Kernel similarity matrices over the observed support.
//!
//! Column `j` of a [`SimilarityMatrix`] is the distribution `p(y_i | x_j)` over
//! the `n` observed points, built from a product of per-feature RBF kernels.
//! Feature weights enter as kernel exponents, so all arithmetic stays in
//! log-space until the per-column softmax.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::scalar::{log_sum_exp, Scalar};

/// Default multiplicative probability floor of the perturbed matrix.
pub const DEFAULT_FLOOR: f64 = 1e-12;

/// Observations × features, all finite, at least 2 × 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix<T> {
    values: Array2<T>,
}

impl<T: Scalar> DataMatrix<T> {
    pub fn new(values: Array2<T>) -> Result<Self> {
        let (rows, cols) = values.dim();
        if rows < 2 || cols < 1 {
            return Err(Error::TooSmall { rows, cols });
        }
        if let Some(((row, col), _)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { row, col });
        }
        Ok(Self { values })
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn p(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> ArrayView2<'_, T> {
        self.values.view()
    }

    pub fn feature(&self, m: usize) -> ArrayView1<'_, T> {
        self.values.column(m)
    }

    /// Sample (n-1) standard deviation of every feature.
    pub fn feature_std(&self) -> Array1<T> {
        let n = T::of_usize(self.n());
        self.values
            .axis_iter(Axis(1))
            .map(|col| {
                let mean = col.sum() / n;
                let ss: T = col.iter().map(|&v| (v - mean) * (v - mean)).sum();
                (ss / (n - T::one())).sqrt()
            })
            .collect()
    }

    /// Per-feature z-scoring.
    pub fn standardized(&self) -> Result<Self> {
        let n = T::of_usize(self.n());
        let std = self.feature_std();
        let mut out = self.values.clone();
        for (m, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            if !(std[m] > T::zero()) {
                return Err(Error::ConstantFeature(m));
            }
            let mean = col.sum() / n;
            col.mapv_inplace(|v| (v - mean) / std[m]);
        }
        Ok(Self { values: out })
    }

    /// Copy with the listed feature columns only, in the given order.
    pub fn select_features(&self, features: &[usize]) -> Result<Self> {
        if let Some(&bad) = features.iter().find(|&&m| m >= self.p()) {
            return Err(Error::DimensionMismatch {
                what: "feature index",
                expected: self.p(),
                found: bad,
            });
        }
        Self::new(self.values.select(Axis(1), features))
    }

    /// Copy with rows reordered so that new row `i` is old row `order[i]`.
    pub fn select_rows(&self, order: &[usize]) -> Result<Self> {
        Self::new(self.values.select(Axis(0), order))
    }
}

/// Positive per-feature kernel bandwidths.
#[derive(Debug, Clone, PartialEq)]
pub struct Bandwidths<T> {
    lambda: Array1<T>,
}

impl<T: Scalar> Bandwidths<T> {
    pub fn new(lambda: impl Into<Array1<T>>) -> Result<Self> {
        let lambda = lambda.into();
        if let Some(m) = lambda
            .iter()
            .position(|&l| !(l > T::zero()) || !l.is_finite())
        {
            return Err(Error::InvalidBandwidth(m));
        }
        Ok(Self { lambda })
    }

    pub fn values(&self) -> ArrayView1<'_, T> {
        self.lambda.view()
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    pub fn select(&self, features: &[usize]) -> Self {
        Self {
            lambda: self.lambda.select(Axis(0), features),
        }
    }
}

/// Column-stochastic `n × n` matrix with strictly positive entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix<T> {
    cols: Array2<T>,
}

impl<T: Scalar> SimilarityMatrix<T> {
    /// Validates a hand-built matrix: square, positive, columns summing to one.
    pub fn from_columns(cols: Array2<T>) -> Result<Self> {
        let (r, c) = cols.dim();
        if r != c {
            return Err(Error::DimensionMismatch {
                what: "similarity matrix columns",
                expected: r,
                found: c,
            });
        }
        if cols.iter().any(|&v| !(v > T::zero()) || !v.is_finite()) {
            return Err(Error::InvalidDistribution(
                "similarity entries must be finite and positive".into(),
            ));
        }
        for (j, col) in cols.axis_iter(Axis(1)).enumerate() {
            let s: T = col.sum();
            if (s - T::one()).abs() > T::mass_tolerance() {
                return Err(Error::InvalidDistribution(format!(
                    "column {j} sums to {s}"
                )));
            }
        }
        Ok(Self { cols })
    }

    pub fn n(&self) -> usize {
        self.cols.nrows()
    }

    /// `p(y_· | x_j)`.
    pub fn column(&self, j: usize) -> ArrayView1<'_, T> {
        self.cols.column(j)
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.cols[(i, j)]
    }

    pub fn as_array(&self) -> ArrayView2<'_, T> {
        self.cols.view()
    }
}

/// Multivariate normal-reference bandwidths, one per feature.
///
/// `λ_m = σ_m (4 / (p + 2))^{1/(p+4)} n^{-1/(p+4)}`.
pub fn default_bandwidths<T: Scalar>(x: &DataMatrix<T>) -> Result<Bandwidths<T>> {
    let n = T::of_usize(x.n());
    let p = T::of_usize(x.p());
    let expo = T::one() / (p + T::lit(4.0));
    let factor = (T::lit(4.0) / (p + T::lit(2.0))).powf(expo) * n.powf(-expo);
    let std = x.feature_std();
    if let Some(m) = std.iter().position(|&s| !(s > T::zero())) {
        return Err(Error::ConstantFeature(m));
    }
    Bandwidths::new(std.mapv(|s| s * factor))
}

/// `S_ij = -Σ_m w_m (y_im - y_jm)^2 / (2 λ_m^2)`.
///
/// Features with zero weight are skipped outright, so the result is
/// bit-identical to dropping those columns.
pub fn weighted_log_scores<T: Scalar>(
    x: &DataMatrix<T>,
    bandwidths: &Bandwidths<T>,
    weights: &[T],
) -> Result<Array2<T>> {
    let p = x.p();
    if bandwidths.len() != p {
        return Err(Error::DimensionMismatch {
            what: "bandwidths",
            expected: p,
            found: bandwidths.len(),
        });
    }
    if weights.len() != p {
        return Err(Error::DimensionMismatch {
            what: "weights",
            expected: p,
            found: weights.len(),
        });
    }
    let active: Vec<(usize, T)> = weights
        .iter()
        .enumerate()
        .filter(|(_, &w)| w != T::zero())
        .map(|(m, &w)| {
            let l = bandwidths.lambda[m];
            (m, w / (T::lit(2.0) * l * l))
        })
        .collect();

    let n = x.n();
    let vals = x.values();
    let mut scores = Array2::<T>::zeros((n, n));
    for i in 0..n {
        let yi = vals.row(i);
        for j in (i + 1)..n {
            let yj = vals.row(j);
            let mut acc = T::zero();
            for &(m, c) in &active {
                let d = yi[m] - yj[m];
                acc = acc - c * d * d;
            }
            scores[(i, j)] = acc;
            scores[(j, i)] = acc;
        }
    }
    Ok(scores)
}

/// Per-column softmax (via log-sum-exp), floored at `floor / n`, renormalized.
pub fn normalize_columns<T: Scalar>(scores: &Array2<T>, floor: T) -> Result<SimilarityMatrix<T>> {
    let (r, c) = scores.dim();
    if r != c {
        return Err(Error::DimensionMismatch {
            what: "score matrix columns",
            expected: r,
            found: c,
        });
    }
    if let Some(((row, col), _)) = scores.indexed_iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite { row, col });
    }
    let min_mass = floor / T::of_usize(r);
    let mut cols = Array2::<T>::zeros((r, c));
    for (src, mut dst) in scores.axis_iter(Axis(1)).zip(cols.axis_iter_mut(Axis(1))) {
        let lse = log_sum_exp(src.iter().copied());
        let mut total = T::zero();
        for (d, &s) in dst.iter_mut().zip(src.iter()) {
            let v = (s - lse).exp();
            *d = if v > min_mass { v } else { min_mass };
            total = total + *d;
        }
        dst.mapv_inplace(|v| v / total);
    }
    Ok(SimilarityMatrix { cols })
}

/// Weighted similarity matrix with the given floor.
pub fn weighted_similarity<T: Scalar>(
    x: &DataMatrix<T>,
    bandwidths: &Bandwidths<T>,
    weights: &[T],
    floor: T,
) -> Result<SimilarityMatrix<T>> {
    normalize_columns(&weighted_log_scores(x, bandwidths, weights)?, floor)
}

/// Similarity matrix built from feature `m` alone (0-based) at unit weight.
pub fn per_feature_similarity<T: Scalar>(
    x: &DataMatrix<T>,
    bandwidths: &Bandwidths<T>,
    m: usize,
    floor: T,
) -> Result<SimilarityMatrix<T>> {
    if m >= x.p() {
        return Err(Error::DimensionMismatch {
            what: "feature index",
            expected: x.p(),
            found: m,
        });
    }
    let mut e = vec![T::zero(); x.p()];
    e[m] = T::one();
    weighted_similarity(x, bandwidths, &e, floor)
}
