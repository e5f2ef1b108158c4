//! Lloyd's K-Means with k-means++ seeding, used only to warm-start feature weights.

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAX_LLOYD_ITERS: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit<T> {
    pub labels: Vec<usize>,
    pub centroids: Array2<T>,
    /// Within-cluster sum of squares.
    pub inertia: T,
}

fn sq_dist<T: Scalar>(a: ArrayView1<'_, T>, b: ArrayView1<'_, T>) -> T {
    a.iter()
        .zip(b.iter())
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum()
}

fn nearest<T: Scalar>(point: ArrayView1<'_, T>, centroids: &Array2<T>) -> (usize, T) {
    let mut best = (0, T::infinity());
    for (c, centroid) in centroids.axis_iter(Axis(0)).enumerate() {
        let d = sq_dist(point, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus_seed<T: Scalar, R: Rng>(data: ArrayView2<'_, T>, k: usize, rng: &mut R) -> Array2<T> {
    let n = data.nrows();
    let mut centroids = Array2::<T>::zeros((k, data.ncols()));
    centroids
        .row_mut(0)
        .assign(&data.row(rng.random_range(0..n)));
    let mut d2: Vec<T> = (0..n)
        .map(|i| sq_dist(data.row(i), centroids.row(0)))
        .collect();
    for c in 1..k {
        let total: T = d2.iter().copied().sum();
        let pick = if total > T::zero() {
            let target = T::lit(rng.random::<f64>()) * total;
            let mut acc = T::zero();
            let mut chosen = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                acc = acc + d;
                if acc > target {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centroids.row_mut(c).assign(&data.row(pick));
        for (i, d) in d2.iter_mut().enumerate() {
            let nd = sq_dist(data.row(i), centroids.row(c));
            if nd < *d {
                *d = nd;
            }
        }
    }
    centroids
}

fn lloyd<T: Scalar>(data: ArrayView2<'_, T>, mut centroids: Array2<T>) -> KMeansFit<T> {
    let (n, p) = data.dim();
    let k = centroids.nrows();
    let mut labels = vec![usize::MAX; n];
    for _ in 0..MAX_LLOYD_ITERS {
        let mut changed = false;
        for (i, row) in data.axis_iter(Axis(0)).enumerate() {
            let (c, _) = nearest(row, &centroids);
            if labels[i] != c {
                labels[i] = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = Array2::<T>::zeros((k, p));
        let mut counts = vec![0usize; k];
        for (i, row) in data.axis_iter(Axis(0)).enumerate() {
            let mut s = sums.row_mut(labels[i]);
            s.zip_mut_with(&row, |d, &v| *d = *d + v);
            counts[labels[i]] += 1;
        }
        for c in 0..k {
            if counts[c] > 0 {
                let cnt = T::of_usize(counts[c]);
                centroids.row_mut(c).assign(&sums.row(c).mapv(|v| v / cnt));
            } else {
                // re-seed an empty centroid at the worst-fit point
                let far = (0..n)
                    .max_by(|&a, &b| {
                        let da = sq_dist(data.row(a), centroids.row(labels[a]));
                        let db = sq_dist(data.row(b), centroids.row(labels[b]));
                        da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal)
                    })
                    .unwrap_or(0);
                centroids.row_mut(c).assign(&data.row(far));
            }
        }
    }
    let inertia = data
        .axis_iter(Axis(0))
        .map(|row| nearest(row, &centroids).1)
        .sum();
    let labels = data
        .axis_iter(Axis(0))
        .map(|row| nearest(row, &centroids).0)
        .collect();
    KMeansFit {
        labels,
        centroids,
        inertia,
    }
}

/// Best of `restarts` k-means++ / Lloyd runs by inertia.
pub fn kmeans<T: Scalar, R: Rng>(
    data: ArrayView2<'_, T>,
    k: usize,
    restarts: usize,
    rng: &mut R,
) -> Result<KMeansFit<T>> {
    let n = data.nrows();
    if k == 0 || n < k {
        return Err(Error::InsufficientPoints { n, k });
    }
    let mut best: Option<KMeansFit<T>> = None;
    for _ in 0..restarts.max(1) {
        let fit = lloyd(data, plus_plus_seed(data, k, rng));
        if best.as_ref().is_none_or(|b| fit.inertia < b.inertia) {
            best = Some(fit);
        }
    }
    Ok(best.expect("at least one restart"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn separates_obvious_blobs() {
        let data = array![
            [0.0, 0.1],
            [0.2, 0.0],
            [0.1, 0.2],
            [10.0, 10.1],
            [10.2, 9.9],
            [9.8, 10.0]
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let fit = kmeans(data.view(), 2, 5, &mut rng).unwrap();
        assert_eq!(fit.labels[0], fit.labels[1]);
        assert_eq!(fit.labels[1], fit.labels[2]);
        assert_eq!(fit.labels[3], fit.labels[4]);
        assert_ne!(fit.labels[0], fit.labels[3]);
        assert!(fit.inertia < 0.5);
    }

    #[test]
    fn too_many_clusters() {
        let data = array![[0.0], [1.0]];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(kmeans(data.view(), 3, 1, &mut rng).is_err());
    }
}
