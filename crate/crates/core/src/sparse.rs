//! Sparse DIB: alternating DIB clustering with feature-weight updates.
//!
//! Weights are the exponents of the per-feature kernels. After each clustering
//! pass they are set proportional to the per-feature mutual information
//! `I(Y_m; T)` and projected onto
//! `C = { w : ||w||_2 <= 1, ||w||_1 <= u, w >= 0 }` with Dykstra's algorithm.

use std::ops::Deref;

use ndarray::ArrayView1;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dib::{mutual_information_yt, run_dib, DibConfig, DibResult, Partition};
use crate::error::{Error, Result};
use crate::info::normalized_weight_entropy;
use crate::kmeans::kmeans;
use crate::scalar::Scalar;
use crate::similarity::{
    default_bandwidths, per_feature_similarity, weighted_similarity, Bandwidths, DataMatrix,
    DEFAULT_FLOOR,
};

/// Weights at or below this count as deselected.
pub const NONZERO_THRESHOLD: f64 = 1e-12;

/// Tolerance on the L2 and L1 constraints of a returned weight vector.
pub const CONSTRAINT_SLACK: f64 = 1e-8;

/// Nonnegative per-feature kernel exponents.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector<T> {
    w: Vec<T>,
}

impl<T: Scalar> WeightVector<T> {
    pub fn new(w: Vec<T>) -> Result<Self> {
        if let Some(m) = w.iter().position(|&x| !(x >= T::zero()) || !x.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "weight {m} must be finite and nonnegative"
            )));
        }
        Ok(Self { w })
    }

    /// Every weight `1/√p`.
    pub fn uniform(p: usize) -> Self {
        let v = T::one() / T::of_usize(p).sqrt();
        Self { w: vec![v; p] }
    }

    pub fn l1(&self) -> T {
        self.w.iter().copied().sum()
    }

    pub fn l2(&self) -> T {
        self.w.iter().map(|&x| x * x).sum::<T>().sqrt()
    }

    pub fn support(&self) -> Vec<usize> {
        let thr = T::lit(NONZERO_THRESHOLD);
        self.w
            .iter()
            .enumerate()
            .filter(|(_, &x)| x > thr)
            .map(|(m, _)| m)
            .collect()
    }

    pub fn nonzero_count(&self) -> usize {
        self.support().len()
    }

    pub fn normalized_entropy(&self) -> Result<T> {
        normalized_weight_entropy(&self.w)
    }

    /// Membership in `C` for budget `u`, up to [`CONSTRAINT_SLACK`].
    pub fn is_feasible(&self, u: T) -> bool {
        let slack = T::lit(CONSTRAINT_SLACK);
        self.w.iter().all(|&x| x >= T::zero())
            && self.l2() <= T::one() + slack
            && self.l1() <= u + slack
    }

    pub fn into_inner(self) -> Vec<T> {
        self.w
    }
}

impl<T> Deref for WeightVector<T> {
    type Target = [T];

    fn deref(&self) -> &[T] {
        &self.w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightInit {
    Uniform,
    WarmStart,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SparseDibConfig {
    /// L1 budget.
    pub u: f64,
    /// Relative L1 change of the weights that counts as convergence.
    pub eps: f64,
    pub max_outer: usize,
    pub init: WeightInit,
    pub dib: DibConfig,
    pub dykstra_tol: f64,
    pub dykstra_max: usize,
    /// K-Means restarts for the warm start.
    pub kmeans_restarts: usize,
    /// Probability floor of the similarity matrices.
    pub floor: f64,
    /// Seed each grid point of a sparsity sweep with the previous point's weights.
    pub sweep_warm_start: bool,
}

impl Default for SparseDibConfig {
    fn default() -> Self {
        Self {
            u: 2.0,
            eps: 1e-5,
            max_outer: 50,
            init: WeightInit::Uniform,
            dib: DibConfig::default(),
            dykstra_tol: 1e-10,
            dykstra_max: 1000,
            kmeans_restarts: 10,
            floor: DEFAULT_FLOOR,
            sweep_warm_start: true,
        }
    }
}

impl SparseDibConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.u > 0.0) || !self.u.is_finite() {
            return bad("u must be positive and finite");
        }
        if !(self.eps > 0.0) {
            return bad("eps must be positive");
        }
        if self.max_outer < 1 {
            return bad("max_outer must be at least 1");
        }
        if !(self.dykstra_tol > 0.0) || self.dykstra_max < 1 {
            return bad("dykstra tolerance and iteration cap must be positive");
        }
        if !(self.floor > 0.0) || self.floor >= 1.0 {
            return bad("floor must lie in (0, 1)");
        }
        self.dib.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DykstraProjection<T> {
    pub weights: WeightVector<T>,
    pub iterations: usize,
    /// False when `max_iter` was reached with the change still above `tol`.
    pub converged: bool,
}

fn project_l2_ball<T: Scalar>(v: &mut [T]) {
    let norm = v.iter().map(|&x| x * x).sum::<T>().sqrt();
    if norm > T::one() {
        for x in v.iter_mut() {
            *x = *x / norm;
        }
    }
}

/// Projection onto `{ w >= 0, ||w||_1 <= u }`.
pub(crate) fn project_l1_orthant<T: Scalar>(v: &mut [T], u: T) {
    for x in v.iter_mut() {
        if *x < T::zero() {
            *x = T::zero();
        }
    }
    let total: T = v.iter().copied().sum();
    if total <= u {
        return;
    }
    let mut sorted: Vec<T> = v.iter().copied().filter(|&x| x > T::zero()).collect();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite weights"));
    let mut cumulative = T::zero();
    let mut theta = T::zero();
    for (i, &s) in sorted.iter().enumerate() {
        cumulative = cumulative + s;
        let candidate = (cumulative - u) / T::of_usize(i + 1);
        if s > candidate {
            theta = candidate;
        } else {
            break;
        }
    }
    for x in v.iter_mut() {
        *x = if *x > theta { *x - theta } else { T::zero() };
    }
}

/// Euclidean projection of `v` onto `C` by Dykstra's alternating projections
/// between the unit L2 ball and the budgeted nonnegative L1 ball.
pub fn project_dykstra<T: Scalar>(
    v: &[T],
    u: T,
    tol: T,
    max_iter: usize,
) -> Result<DykstraProjection<T>> {
    if !(u > T::zero()) || !u.is_finite() {
        return Err(Error::InvalidConfig("u must be positive and finite".into()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidConfig(
            "projection input must be finite".into(),
        ));
    }
    let p = v.len();
    let mut x = v.to_vec();
    let mut inc_a = vec![T::zero(); p];
    let mut inc_b = vec![T::zero(); p];
    let mut y = vec![T::zero(); p];
    let mut next = vec![T::zero(); p];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        for i in 0..p {
            y[i] = x[i] + inc_a[i];
        }
        project_l2_ball(&mut y);
        for i in 0..p {
            inc_a[i] = x[i] + inc_a[i] - y[i];
            next[i] = y[i] + inc_b[i];
        }
        project_l1_orthant(&mut next, u);
        let mut change = T::zero();
        let mut gap = T::zero();
        for i in 0..p {
            inc_b[i] = y[i] + inc_b[i] - next[i];
            change = change.max((next[i] - x[i]).abs());
            gap = gap.max((next[i] - y[i]).abs());
        }
        std::mem::swap(&mut x, &mut next);
        if change < tol && gap < tol {
            converged = true;
            break;
        }
    }
    // x is in the L1 set exactly; a radial shrink keeps it there and closes any L2 gap
    project_l2_ball(&mut x);
    Ok(DykstraProjection {
        weights: WeightVector { w: x },
        iterations,
        converged,
    })
}

/// `I(Y_m; T)` for every feature `m`, each from its own single-feature kernel.
pub fn per_feature_mi_vector<T: Scalar>(
    x: &DataMatrix<T>,
    bandwidths: &Bandwidths<T>,
    part: &Partition,
    floor: T,
) -> Result<Vec<T>> {
    if part.len() != x.n() {
        return Err(Error::DimensionMismatch {
            what: "partition length",
            expected: x.n(),
            found: part.len(),
        });
    }
    (0..x.p())
        .into_par_iter()
        .map(|m| {
            let pm = per_feature_similarity(x, bandwidths, m, floor)?;
            Ok(mutual_information_yt(&pm, part))
        })
        .collect()
}

/// `w ∝ mi`, scaled to unit L2 norm and projected onto `C` with budget `cfg.u`.
pub fn update_weights<T: Scalar>(mi: &[T], cfg: &SparseDibConfig) -> Result<DykstraProjection<T>> {
    if mi.iter().any(|&v| !(v >= T::zero())) {
        return Err(Error::InvalidConfig(
            "mutual informations must be nonnegative".into(),
        ));
    }
    if mi.iter().all(|&v| v <= T::lit(1e-15)) {
        return Err(Error::DegenerateMi);
    }
    let norm = mi.iter().map(|&v| v * v).sum::<T>().sqrt();
    let direction: Vec<T> = mi.iter().map(|&v| v / norm).collect();
    project_dykstra(
        &direction,
        T::lit(cfg.u),
        T::lit(cfg.dykstra_tol),
        cfg.dykstra_max,
    )
}

/// Weights from per-feature MI against a K-Means partition of the standardized data.
pub fn warm_start_weights<T: Scalar>(
    x: &DataMatrix<T>,
    bandwidths: &Bandwidths<T>,
    cfg: &SparseDibConfig,
) -> Result<WeightVector<T>> {
    let k = cfg.dib.k;
    if x.n() < k {
        return Err(Error::InsufficientPoints { n: x.n(), k });
    }
    // constant columns carry no cluster signal; leave them at zero after scaling
    let std = x.feature_std();
    let nf = T::of_usize(x.n());
    let means: Vec<T> = (0..x.p()).map(|m| x.feature(m).sum() / nf).collect();
    let raw = x.values();
    let scaled = ndarray::Array2::from_shape_fn(raw.dim(), |(i, m)| {
        if std[m] > T::zero() {
            (raw[(i, m)] - means[m]) / std[m]
        } else {
            T::zero()
        }
    });
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.dib.seed);
    rng.set_stream(u64::MAX);
    let fit = kmeans(scaled.view(), k, cfg.kmeans_restarts, &mut rng)?;
    let part = Partition::new(fit.labels, k)?.compact();
    let mi = per_feature_mi_vector(x, bandwidths, &part, T::lit(cfg.floor))?;
    Ok(update_weights(&mi, cfg)?.weights)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseDibResult<T> {
    pub partition: Partition,
    pub weights: WeightVector<T>,
    /// `I(Y_m; T)` of the final partition, nats.
    pub per_feature_mi: Vec<T>,
    pub outer_iterations: usize,
    pub converged: bool,
    pub weight_entropy: T,
    pub nonzero_count: usize,
    /// Relative L1 weight change after every outer iteration.
    pub weight_change_trace: Vec<T>,
    /// Every weight projection met its tolerance.
    pub projection_converged: bool,
    /// Final DIB run (objective trace, β, I(Y;T), H(T)).
    pub dib: DibResult<T>,
}

/// Sparse DIB with bandwidths from the normal-reference rule.
pub fn run_sparse_dib<T: Scalar>(
    x: &DataMatrix<T>,
    cfg: &SparseDibConfig,
) -> Result<SparseDibResult<T>> {
    let b = default_bandwidths(x)?;
    run_sparse_dib_with(x, &b, cfg, None)
}

/// Sparse DIB with explicit bandwidths; `initial` overrides `cfg.init`.
pub fn run_sparse_dib_with<T: Scalar>(
    x: &DataMatrix<T>,
    bandwidths: &Bandwidths<T>,
    cfg: &SparseDibConfig,
    initial: Option<&WeightVector<T>>,
) -> Result<SparseDibResult<T>> {
    cfg.validate()?;
    if bandwidths.len() != x.p() {
        return Err(Error::DimensionMismatch {
            what: "bandwidths",
            expected: x.p(),
            found: bandwidths.len(),
        });
    }
    let floor = T::lit(cfg.floor);
    let mut weights = match (initial, cfg.init) {
        (Some(w), _) => {
            if w.len() != x.p() {
                return Err(Error::DimensionMismatch {
                    what: "initial weights",
                    expected: x.p(),
                    found: w.len(),
                });
            }
            w.clone()
        }
        (None, WeightInit::Uniform) => WeightVector::uniform(x.p()),
        (None, WeightInit::WarmStart) => warm_start_weights(x, bandwidths, cfg)?,
    };
    if weights.l1() <= T::zero() {
        return Err(Error::AllZeroWeights);
    }

    let eps = T::lit(cfg.eps);
    let mut change_trace = Vec::new();
    let mut projection_converged = true;
    let mut converged = false;
    let mut outer = 0;
    let mut last = None;
    while outer < cfg.max_outer {
        outer += 1;
        let p = weighted_similarity(x, bandwidths, &weights, floor)?;
        let dib = run_dib(&p, &cfg.dib)?;
        let mi = per_feature_mi_vector(x, bandwidths, &dib.partition, floor)?;
        let proj = update_weights(&mi, cfg)?;
        projection_converged &= proj.converged;
        let num: T = proj
            .weights
            .iter()
            .zip(weights.iter())
            .map(|(&a, &b)| (a - b).abs())
            .sum();
        let change = num / weights.l1();
        change_trace.push(change);
        weights = proj.weights;
        last = Some((dib, mi));
        if change < eps {
            converged = true;
            break;
        }
    }
    let (dib, per_feature_mi) = last.expect("at least one outer iteration");
    let weight_entropy = weights.normalized_entropy()?;
    let nonzero_count = weights.nonzero_count();
    Ok(SparseDibResult {
        partition: dib.partition.clone(),
        weights,
        per_feature_mi,
        outer_iterations: outer,
        converged,
        weight_entropy,
        nonzero_count,
        weight_change_trace: change_trace,
        projection_converged,
        dib,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuningPoint<T> {
    pub u: T,
    pub normalized_entropy: T,
    pub nonzero_count: usize,
    pub support: Vec<usize>,
    /// The L1 budget binds (`||w||_1 = u`); otherwise `u` has no effect on `w`.
    pub budget_active: bool,
    pub converged: bool,
    pub weights: WeightVector<T>,
    pub partition: Partition,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plateau<T> {
    pub u_low: T,
    pub u_high: T,
    /// Index range `[start, end]` into the trajectory points.
    pub start: usize,
    pub end: usize,
    pub support: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuningTrajectory<T> {
    pub points: Vec<TuningPoint<T>>,
    pub plateau: Option<Plateau<T>>,
    /// Grid indices where the nonzero count dropped relative to the previous point.
    pub monotonicity_violations: Vec<usize>,
}

/// Minimum run length that counts as a plateau.
pub const MIN_PLATEAU_LEN: usize = 3;

/// Longest maximal run of consecutive budget-active points sharing one support;
/// ties go to the smaller `u`.
pub fn find_plateau<T: Scalar>(points: &[TuningPoint<T>]) -> Option<Plateau<T>> {
    let mut best: Option<(usize, usize)> = None;
    let mut i = 0;
    while i < points.len() {
        if !points[i].budget_active {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < points.len()
            && points[j + 1].budget_active
            && points[j + 1].support == points[i].support
        {
            j += 1;
        }
        let len = j - i + 1;
        if len >= MIN_PLATEAU_LEN && best.is_none_or(|(s, e)| len > e - s + 1) {
            best = Some((i, j));
        }
        i = j + 1;
    }
    best.map(|(start, end)| Plateau {
        u_low: points[start].u,
        u_high: points[end].u,
        start,
        end,
        support: points[start].support.clone(),
    })
}

fn tuning_point<T: Scalar>(u: T, res: SparseDibResult<T>) -> TuningPoint<T> {
    let budget_active = res.weights.l1() >= u * (T::one() - T::lit(1e-6));
    TuningPoint {
        u,
        normalized_entropy: res.weight_entropy,
        nonzero_count: res.nonzero_count,
        support: res.weights.support(),
        budget_active,
        converged: res.converged,
        weights: res.weights,
        partition: res.partition,
    }
}

/// Sparse DIB across an ascending grid of budgets with plateau detection.
pub fn tune_sparsity<T: Scalar>(
    x: &DataMatrix<T>,
    bandwidths: &Bandwidths<T>,
    cfg: &SparseDibConfig,
    u_grid: &[f64],
) -> Result<TuningTrajectory<T>> {
    if u_grid.is_empty() {
        return Err(Error::InvalidConfig("u grid is empty".into()));
    }
    if u_grid.iter().any(|&u| !(u > 0.0) || !u.is_finite())
        || u_grid.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::InvalidConfig(
            "u grid must be positive and strictly ascending".into(),
        ));
    }
    let with_u = |u: f64| SparseDibConfig { u, ..cfg.clone() };
    let points = if cfg.sweep_warm_start {
        let mut points: Vec<TuningPoint<T>> = Vec::with_capacity(u_grid.len());
        for &u in u_grid {
            let init = points.last().map(|pt| pt.weights.clone());
            let res = run_sparse_dib_with(x, bandwidths, &with_u(u), init.as_ref())?;
            points.push(tuning_point(T::lit(u), res));
        }
        points
    } else {
        u_grid
            .par_iter()
            .map(|&u| {
                let res = run_sparse_dib_with(x, bandwidths, &with_u(u), None)?;
                Ok(tuning_point(T::lit(u), res))
            })
            .collect::<Result<Vec<_>>>()?
    };
    let monotonicity_violations = points
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1].nonzero_count < w[0].nonzero_count)
        .map(|(i, _)| i + 1)
        .collect();
    let plateau = find_plateau(&points);
    Ok(TuningTrajectory {
        points,
        plateau,
        monotonicity_violations,
    })
}

/// `Σ|a - b| / Σ|b|`.
pub fn relative_l1_change<T: Scalar>(a: ArrayView1<'_, T>, b: ArrayView1<'_, T>) -> T {
    let num: T = a.iter().zip(b.iter()).map(|(&x, &y)| (x - y).abs()).sum();
    let den: T = b.iter().map(|x| x.abs()).sum();
    num / den
}
