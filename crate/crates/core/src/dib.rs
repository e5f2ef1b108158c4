//! Deterministic information bottleneck clustering over a fixed similarity matrix.
//!
//! Alternates between re-estimating the cluster model `(q(t), q(y|t))` and
//! hard-assigning every observation to `argmax_t ln q(t) - β KL(p(y|x_j) || q(y|t))`.
//! With the model at its closed-form optimum for the current partition, each
//! pass can only lower `H(T) - β I(Y;T)`.

use ndarray::{Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::{entropy_of, mutual_information, DiscreteDistribution, JointDistribution};
use crate::scalar::Scalar;
use crate::similarity::SimilarityMatrix;

/// Hard assignment of `n` observations to clusters `0..k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
}

impl Partition {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if let Some(&label) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::LabelOutOfRange { label, k });
        }
        Ok(Self { labels, k })
    }

    /// Labels taken as given; `k` is one past the largest label.
    pub fn from_labels(labels: Vec<usize>) -> Self {
        let k = labels.iter().max().map_or(0, |&m| m + 1);
        Self { labels, k }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    pub fn first_empty(&self) -> Option<usize> {
        self.sizes().iter().position(|&s| s == 0)
    }

    /// Drops empty clusters, keeping the relative order of the rest.
    pub fn compact(&self) -> Self {
        let sizes = self.sizes();
        let mut map = vec![usize::MAX; self.k];
        let mut next = 0;
        for (t, &s) in sizes.iter().enumerate() {
            if s > 0 {
                map[t] = next;
                next += 1;
            }
        }
        Self {
            labels: self.labels.iter().map(|&l| map[l]).collect(),
            k: next,
        }
    }

    /// Relabels clusters in order of first appearance; equal for partitions
    /// that differ only by label names.
    pub fn canonical(&self) -> Self {
        let mut map = vec![usize::MAX; self.k];
        let mut next = 0;
        let labels = self
            .labels
            .iter()
            .map(|&l| {
                if map[l] == usize::MAX {
                    map[l] = next;
                    next += 1;
                }
                map[l]
            })
            .collect();
        Self { labels, k: next }
    }

    /// Entropy of the empirical label proportions.
    pub fn entropy<T: Scalar>(&self) -> T {
        let n = T::of_usize(self.len());
        let props: Array1<T> = self
            .sizes()
            .into_iter()
            .map(|s| T::of_usize(s) / n)
            .collect();
        entropy_of(props.view())
    }
}

/// Cluster prior `q(t)` and per-cluster distributions `q(y|t)` (one column per cluster).
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel<T> {
    prior: DiscreteDistribution<T>,
    cond: Array2<T>,
}

impl<T: Scalar> ClusterModel<T> {
    pub fn prior(&self) -> &DiscreteDistribution<T> {
        &self.prior
    }

    pub fn cond(&self) -> &Array2<T> {
        &self.cond
    }

    pub fn k(&self) -> usize {
        self.cond.ncols()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DibConfig {
    pub k: usize,
    pub beta0: f64,
    pub beta_growth: f64,
    pub max_beta_retries: usize,
    pub max_iters: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Consecutive unchanged passes that count as convergence.
    pub tol_iters: usize,
}

impl Default for DibConfig {
    fn default() -> Self {
        Self {
            k: 2,
            beta0: 1.0,
            beta_growth: 1.2,
            max_beta_retries: 20,
            max_iters: 100,
            restarts: 10,
            seed: 0,
            tol_iters: 1,
        }
    }
}

impl DibConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.k < 1 {
            return bad("k must be at least 1");
        }
        if self.restarts < 1 {
            return bad("restarts must be at least 1");
        }
        if !(self.beta0 > 0.0) || !self.beta0.is_finite() {
            return bad("beta0 must be positive");
        }
        if !(self.beta_growth > 1.0) || !self.beta_growth.is_finite() {
            return bad("beta_growth must exceed 1");
        }
        if self.tol_iters < 1 {
            return bad("tol_iters must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DibResult<T> {
    pub partition: Partition,
    pub model: ClusterModel<T>,
    /// `I(Y;T)` in nats.
    pub mi: T,
    /// `H(T)` in nats.
    pub ht: T,
    pub beta_final: T,
    pub iterations: usize,
    /// `H(T) - β I(Y;T)` after the initial model fit and after every accepted pass.
    pub objective_trace: Vec<T>,
    /// β in force for each trace entry; a change marks an empty-cluster retry.
    pub beta_trace: Vec<T>,
    /// The restart had to give up a cluster.
    pub collapsed: bool,
    pub converged: bool,
    /// Index of the winning restart.
    pub restart: usize,
}

/// Closed-form model for a partition under uniform `p(x) = 1/n`.
pub fn update_cluster_model<T: Scalar>(
    p: &SimilarityMatrix<T>,
    part: &Partition,
) -> Result<ClusterModel<T>> {
    let n = p.n();
    if part.len() != n {
        return Err(Error::DimensionMismatch {
            what: "partition length",
            expected: n,
            found: part.len(),
        });
    }
    let sizes = part.sizes();
    if let Some(t) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::EmptyCluster(t));
    }
    let k = part.k();
    let mut cond = Array2::<T>::zeros((n, k));
    for (j, &t) in part.labels().iter().enumerate() {
        let mut dst = cond.column_mut(t);
        dst.zip_mut_with(&p.column(j), |d, &s| *d = *d + s);
    }
    for (t, mut col) in cond.axis_iter_mut(Axis(1)).enumerate() {
        let size = T::of_usize(sizes[t]);
        col.mapv_inplace(|v| v / size);
    }
    let nf = T::of_usize(n);
    let prior = DiscreteDistribution::new(
        sizes
            .iter()
            .map(|&s| T::of_usize(s) / nf)
            .collect::<Array1<T>>(),
    )?;
    Ok(ClusterModel { prior, cond })
}

/// `ln q(t) - β KL(p(·|x_j) || q(·|t))`.
pub fn dib_score<T: Scalar>(
    p: &SimilarityMatrix<T>,
    j: usize,
    t: usize,
    model: &ClusterModel<T>,
    beta: T,
) -> T {
    let col = p.column(j);
    let q = model.cond.column(t);
    let kl: T = col
        .iter()
        .zip(q.iter())
        .map(|(&pi, &qi)| pi * (pi.ln() - qi.ln()))
        .sum();
    model.prior.probs()[t].ln() - beta * kl
}

/// Precomputed logs so a full assignment pass costs `n² k` multiply-adds.
struct Scorer<T> {
    log_p: Array2<T>,
}

impl<T: Scalar> Scorer<T> {
    fn new(p: &SimilarityMatrix<T>) -> Self {
        Self {
            log_p: p.as_array().mapv(|v| v.ln()),
        }
    }

    fn assign(&self, p: &SimilarityMatrix<T>, model: &ClusterModel<T>, beta: T) -> Partition {
        let k = model.k();
        let log_q = model.cond.mapv(|v| v.ln());
        let log_prior: Vec<T> = model.prior.probs().iter().map(|v| v.ln()).collect();
        let labels = (0..p.n())
            .map(|j| {
                let col = p.column(j);
                let lp = self.log_p.column(j);
                let mut best = 0;
                let mut best_score = T::neg_infinity();
                for t in 0..k {
                    let lq = log_q.column(t);
                    let mut kl = T::zero();
                    for i in 0..col.len() {
                        kl = kl + col[i] * (lp[i] - lq[i]);
                    }
                    let score = log_prior[t] - beta * kl;
                    if score > best_score {
                        best_score = score;
                        best = t;
                    }
                }
                best
            })
            .collect();
        Partition { labels, k }
    }
}

/// Hard reassignment of every observation; ties go to the smallest cluster index.
pub fn assign_step<T: Scalar>(
    p: &SimilarityMatrix<T>,
    model: &ClusterModel<T>,
    beta: T,
) -> Partition {
    Scorer::new(p).assign(p, model, beta)
}

/// `I(Y;T)` for the joint `m(y_i, t) = (1/n) Σ_{j ∈ t} P(i, j)`.
pub fn mutual_information_yt<T: Scalar>(p: &SimilarityMatrix<T>, part: &Partition) -> T {
    let n = p.n();
    let mut joint = Array2::<T>::zeros((n, part.k()));
    for (j, &t) in part.labels().iter().enumerate() {
        let mut dst = joint.column_mut(t);
        dst.zip_mut_with(&p.column(j), |d, &s| *d = *d + s);
    }
    let nf = T::of_usize(n);
    joint.mapv_inplace(|v| v / nf);
    mutual_information(&JointDistribution::new_unchecked(joint))
}

fn objective<T: Scalar>(p: &SimilarityMatrix<T>, part: &Partition, beta: T) -> (T, T, T) {
    let ht = part.entropy::<T>();
    let mi = mutual_information_yt(p, part);
    (ht - beta * mi, ht, mi)
}

fn random_partition(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Partition {
    const MAX_DRAWS: usize = 1000;
    for _ in 0..MAX_DRAWS {
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let part = Partition { labels, k };
        if part.first_empty().is_none() {
            return part;
        }
    }
    // k close to n: seed every cluster with one distinct point, rest uniform
    let mut labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    for (t, &j) in order.iter().take(k).enumerate() {
        labels[j] = t;
    }
    Partition { labels, k }
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

fn run_restart<T: Scalar>(
    p: &SimilarityMatrix<T>,
    scorer: &Scorer<T>,
    cfg: &DibConfig,
    restart: usize,
) -> Result<DibResult<T>> {
    let mut rng = restart_rng(cfg.seed, restart);
    let growth = T::lit(cfg.beta_growth);
    let mut beta = T::lit(cfg.beta0);
    let mut part = random_partition(p.n(), cfg.k, &mut rng);
    let mut model = update_cluster_model(p, &part)?;
    let (obj, _, _) = objective(p, &part, beta);
    let mut objective_trace = vec![obj];
    let mut beta_trace = vec![beta];
    let mut collapsed = false;
    let mut converged = false;
    let mut unchanged = 0;
    let mut iterations = 0;

    while iterations < cfg.max_iters {
        iterations += 1;
        let mut next = scorer.assign(p, &model, beta);
        if next.first_empty().is_some() {
            let mut retries = 0;
            while next.first_empty().is_some() && retries < cfg.max_beta_retries {
                beta = beta * growth;
                next = scorer.assign(p, &model, beta);
                retries += 1;
            }
            if next.first_empty().is_some() {
                next = next.compact();
                collapsed = true;
            }
        }
        if next == part {
            unchanged += 1;
            if unchanged >= cfg.tol_iters {
                converged = true;
                break;
            }
            continue;
        }
        unchanged = 0;
        part = next;
        model = update_cluster_model(p, &part)?;
        let (obj, _, _) = objective(p, &part, beta);
        objective_trace.push(obj);
        beta_trace.push(beta);
    }

    let ht = part.entropy::<T>();
    let mi = mutual_information_yt(p, &part);
    Ok(DibResult {
        partition: part,
        model,
        mi,
        ht,
        beta_final: beta,
        iterations,
        objective_trace,
        beta_trace,
        collapsed,
        converged,
        restart,
    })
}

/// Best of `cfg.restarts` random restarts by `I(Y;T)`, ties to lower `H(T)`
/// then lower restart index.
pub fn run_dib<T: Scalar>(p: &SimilarityMatrix<T>, cfg: &DibConfig) -> Result<DibResult<T>> {
    cfg.validate()?;
    let n = p.n();
    if n < cfg.k {
        return Err(Error::InsufficientPoints { n, k: cfg.k });
    }
    let scorer = Scorer::new(p);
    let runs = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| run_restart(p, &scorer, cfg, r))
        .collect::<Result<Vec<_>>>()?;
    let mut best: Option<DibResult<T>> = None;
    for run in runs {
        let better = match &best {
            None => true,
            Some(b) => run.mi > b.mi || (run.mi == b.mi && run.ht < b.ht),
        };
        if better {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}
