//! Synthetic Gaussian-mixture benchmarks: a `K`-component mixture on the
//! first `ρ = ⌊p q⌋` features, iid standard normal noise on the rest.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dib::Partition;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::similarity::DataMatrix;

const MAX_REJECTIONS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Balance {
    Balanced,
    /// Mixing proportions proportional to `1, 2, ..., K`.
    Unbalanced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Spherical,
    /// Diagonal covariances, variances uniform on `[0.5, 1.5]`.
    Elliptical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub n: usize,
    pub p: usize,
    /// Informative fraction `q` in `(0, 1]`.
    pub q_ratio: f64,
    pub k: usize,
    pub balance: Balance,
    pub shape: Shape,
    /// Half-width of the mean box and minimum pairwise mean distance, in noise std units.
    pub separation: f64,
    pub seed: u64,
    #[serde(default)]
    pub shuffle_columns: bool,
}

impl MixtureSpec {
    /// `⌊p q⌋`.
    pub fn informative_count(&self) -> usize {
        (self.p as f64 * self.q_ratio + 1e-9).floor() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InfeasibleSpec(m));
        if !(self.q_ratio > 0.0 && self.q_ratio <= 1.0) {
            return bad(format!("q_ratio {} outside (0, 1]", self.q_ratio));
        }
        if self.informative_count() < 1 {
            return bad(format!(
                "p = {} with q = {} leaves no informative feature",
                self.p, self.q_ratio
            ));
        }
        if self.k < 1 || 2 * self.k > self.n {
            return bad(format!(
                "k = {} needs at least {} points, have {}",
                self.k,
                2 * self.k,
                self.n
            ));
        }
        if !(self.separation > 0.0) || !self.separation.is_finite() {
            return bad("separation must be positive".into());
        }
        Ok(())
    }

    pub fn mixing_proportions(&self) -> Vec<f64> {
        match self.balance {
            Balance::Balanced => vec![1.0 / self.k as f64; self.k],
            Balance::Unbalanced => {
                let total = (self.k * (self.k + 1) / 2) as f64;
                (1..=self.k).map(|i| i as f64 / total).collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset<T> {
    pub data: DataMatrix<T>,
    pub labels: Partition,
    /// Column indices of the informative features, ascending.
    pub informative: Vec<usize>,
    /// New column `c` holds generated column `column_permutation[c]`, when shuffled.
    pub column_permutation: Option<Vec<usize>>,
    /// Component means over the informative block.
    pub means: Vec<Vec<f64>>,
    /// Component variances over the informative block.
    pub variances: Vec<Vec<f64>>,
}

fn draw_means(spec: &MixtureSpec, rho: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
    let s = spec.separation;
    for _ in 0..MAX_REJECTIONS {
        let means: Vec<Vec<f64>> = (0..spec.k)
            .map(|_| (0..rho).map(|_| rng.random_range(-s..=s)).collect())
            .collect();
        let separated = (0..spec.k).all(|a| {
            (a + 1..spec.k).all(|b| {
                let d2: f64 = means[a]
                    .iter()
                    .zip(&means[b])
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum();
                d2.sqrt() >= s
            })
        });
        if separated {
            return Ok(means);
        }
    }
    Err(Error::InfeasibleSpec(format!(
        "could not place {} means {} apart in {} dimensions",
        spec.k, s, rho
    )))
}

fn draw_labels(spec: &MixtureSpec, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    let props = spec.mixing_proportions();
    for _ in 0..MAX_REJECTIONS {
        let labels: Vec<usize> = (0..spec.n)
            .map(|_| {
                let r: f64 = rng.random();
                let mut acc = 0.0;
                for (t, &w) in props.iter().enumerate() {
                    acc += w;
                    if r < acc {
                        return t;
                    }
                }
                spec.k - 1
            })
            .collect();
        let mut counts = vec![0usize; spec.k];
        for &l in &labels {
            counts[l] += 1;
        }
        if counts.iter().all(|&c| c >= 2) {
            return Ok(labels);
        }
    }
    Err(Error::InfeasibleSpec(
        "could not draw at least two points per component".into(),
    ))
}

/// Deterministic in `spec.seed`.
pub fn generate<T: Scalar>(spec: &MixtureSpec) -> Result<LabeledDataset<T>> {
    spec.validate()?;
    let rho = spec.informative_count();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let means = draw_means(spec, rho, &mut rng)?;
    let variances: Vec<Vec<f64>> = (0..spec.k)
        .map(|_| match spec.shape {
            Shape::Spherical => vec![1.0; rho],
            Shape::Elliptical => (0..rho).map(|_| rng.random_range(0.5..=1.5)).collect(),
        })
        .collect();
    let labels = draw_labels(spec, &mut rng)?;

    let mut values = Array2::<f64>::zeros((spec.n, spec.p));
    for (i, &t) in labels.iter().enumerate() {
        for m in 0..spec.p {
            let z: f64 = StandardNormal.sample(&mut rng);
            values[(i, m)] = if m < rho {
                means[t][m] + variances[t][m].sqrt() * z
            } else {
                z
            };
        }
    }

    let (values, informative, column_permutation) = if spec.shuffle_columns {
        let mut perm: Vec<usize> = (0..spec.p).collect();
        perm.shuffle(&mut rng);
        let shuffled = Array2::from_shape_fn((spec.n, spec.p), |(i, c)| values[(i, perm[c])]);
        let mut informative: Vec<usize> = (0..spec.p).filter(|&c| perm[c] < rho).collect();
        informative.sort_unstable();
        (shuffled, informative, Some(perm))
    } else {
        (values, (0..rho).collect(), None)
    };

    let std_ok = values.columns().into_iter().all(|c| {
        let first = c[0];
        c.iter().any(|&v| v != first)
    });
    if !std_ok {
        return Err(Error::InfeasibleSpec("generated a constant column".into()));
    }

    Ok(LabeledDataset {
        data: DataMatrix::new(values.mapv(T::lit))?,
        labels: Partition::new(labels, spec.k)?,
        informative,
        column_permutation,
        means,
        variances,
    })
}
