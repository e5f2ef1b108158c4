#![allow(dead_code)]

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sdib::{
    default_bandwidths, mutual_information_yt, weighted_similarity, DataMatrix64, Partition,
    SimilarityMatrix64,
};

pub fn gaussian_data(n: usize, p: usize, seed: u64) -> DataMatrix64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DataMatrix64::new(Array2::from_shape_fn((n, p), |_| {
        StandardNormal.sample(&mut rng)
    }))
    .unwrap()
}

pub fn unit_similarity(x: &DataMatrix64) -> SimilarityMatrix64 {
    let b = default_bandwidths(x).unwrap();
    weighted_similarity(x, &b, &vec![1.0; x.p()], sdib::DEFAULT_FLOOR).unwrap()
}

/// Largest I(Y;T) over all 2-partitions with both blocks nonempty.
pub fn brute_force_max_mi(p: &SimilarityMatrix64) -> f64 {
    let n = p.n();
    (1..(1u32 << (n - 1)))
        .map(|mask| {
            let labels = (0..n)
                .map(|i| {
                    if i == 0 {
                        0
                    } else {
                        ((mask >> (i - 1)) & 1) as usize
                    }
                })
                .collect();
            mutual_information_yt(p, &Partition::new(labels, 2).unwrap())
        })
        .fold(f64::NEG_INFINITY, f64::max)
}
