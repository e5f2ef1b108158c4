//! Chance-adjusted agreement between two partitions: ARI and AMI.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cross-tabulation of two labelings over the distinct labels of each side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    counts: Vec<Vec<u64>>,
    row_sums: Vec<u64>,
    col_sums: Vec<u64>,
    n: u64,
}

impl ContingencyTable {
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let cols = counts.first().map_or(0, Vec::len);
        if counts.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidConfig("ragged contingency table".into()));
        }
        let row_sums: Vec<u64> = counts.iter().map(|r| r.iter().sum()).collect();
        let col_sums: Vec<u64> = (0..cols)
            .map(|c| counts.iter().map(|r| r[c]).sum())
            .collect();
        let n = row_sums.iter().sum();
        Ok(Self {
            counts,
            row_sums,
            col_sums,
            n,
        })
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn row_sums(&self) -> &[u64] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[u64] {
        &self.col_sums
    }

    pub fn total(&self) -> u64 {
        self.n
    }

    pub fn transpose(&self) -> Self {
        let cols = self.col_sums.len();
        let counts = (0..cols)
            .map(|c| self.counts.iter().map(|r| r[c]).collect())
            .collect();
        Self {
            counts,
            row_sums: self.col_sums.clone(),
            col_sums: self.row_sums.clone(),
            n: self.n,
        }
    }

    /// Both labelings induce the same partition up to label names.
    pub fn is_identity_up_to_relabeling(&self) -> bool {
        let rows_ok = self
            .counts
            .iter()
            .all(|r| r.iter().filter(|&&c| c > 0).count() == 1);
        let cols_ok =
            (0..self.col_sums.len()).all(|c| self.counts.iter().filter(|r| r[c] > 0).count() == 1);
        rows_ok && cols_ok
    }

    /// Mutual information of the empirical joint, nats.
    pub fn mutual_information(&self) -> f64 {
        let n = self.n as f64;
        let mut mi = 0.0;
        for (i, row) in self.counts.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                if c > 0 {
                    let c = c as f64;
                    mi +=
                        c / n * (n * c / (self.row_sums[i] as f64 * self.col_sums[j] as f64)).ln();
                }
            }
        }
        mi.max(0.0)
    }

    pub fn row_entropy(&self) -> f64 {
        marginal_entropy(&self.row_sums, self.n)
    }

    pub fn col_entropy(&self) -> f64 {
        marginal_entropy(&self.col_sums, self.n)
    }
}

fn marginal_entropy(sums: &[u64], n: u64) -> f64 {
    let n = n as f64;
    let h: f64 = sums
        .iter()
        .filter(|&&s| s > 0)
        .map(|&s| {
            let p = s as f64 / n;
            -p * p.ln()
        })
        .sum();
    h.max(0.0)
}

/// Cell `(r, c)` counts observations labeled `r` in `a` and `c` in `b`.
///
/// Rows and columns follow the order in which labels first appear, so
/// renaming labels leaves the table (and every index computed from it)
/// bit-identical.
pub fn contingency<L: Ord + Clone>(a: &[L], b: &[L]) -> Result<ContingencyTable> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::InvalidConfig("labelings are empty".into()));
    }
    let index = |labels: &[L]| {
        let mut map = BTreeMap::new();
        for l in labels {
            let next = map.len();
            map.entry(l.clone()).or_insert(next);
        }
        map
    };
    let ra = index(a);
    let rb = index(b);
    let mut counts = vec![vec![0u64; rb.len()]; ra.len()];
    for (x, y) in a.iter().zip(b) {
        counts[ra[x]][rb[y]] += 1;
    }
    ContingencyTable::from_counts(counts)
}

fn pairs(x: u64) -> f64 {
    (x as f64) * (x as f64 - 1.0) / 2.0
}

/// Hubert–Arabie adjusted Rand index.
pub fn ari(t: &ContingencyTable) -> f64 {
    if t.is_identity_up_to_relabeling() {
        return 1.0;
    }
    let index: f64 = t.counts.iter().flatten().map(|&c| pairs(c)).sum();
    let sum_a: f64 = t.row_sums.iter().map(|&c| pairs(c)).sum();
    let sum_b: f64 = t.col_sums.iter().map(|&c| pairs(c)).sum();
    let expected = sum_a * sum_b / pairs(t.n);
    let max_index = 0.5 * (sum_a + sum_b);
    let den = max_index - expected;
    if den == 0.0 {
        return 0.0;
    }
    (index - expected) / den
}

/// How the two entropies are combined into the AMI upper bound.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmiNormalizer {
    Min,
    Geometric,
    #[default]
    Arithmetic,
    Max,
}

impl AmiNormalizer {
    fn combine(self, a: f64, b: f64) -> f64 {
        match self {
            Self::Min => a.min(b),
            Self::Geometric => (a * b).sqrt(),
            Self::Arithmetic => 0.5 * (a + b),
            Self::Max => a.max(b),
        }
    }
}

fn log_factorials(n: u64) -> Vec<f64> {
    let mut table = vec![0.0; n as usize + 1];
    for k in 1..=n as usize {
        table[k] = table[k - 1] + (k as f64).ln();
    }
    table
}

/// `E[MI]` under the hypergeometric model with both marginals fixed.
pub fn expected_mutual_information(t: &ContingencyTable) -> f64 {
    let n = t.n;
    let nf = n as f64;
    let lf = log_factorials(n);
    let mut emi = 0.0;
    for &a in &t.row_sums {
        for &b in &t.col_sums {
            let lo = (a + b).saturating_sub(n).max(1);
            let hi = a.min(b);
            let base =
                lf[a as usize] + lf[b as usize] + lf[(n - a) as usize] + lf[(n - b) as usize]
                    - lf[n as usize];
            for nij in lo..=hi {
                let term = nij as f64 / nf * (nf * nij as f64 / (a as f64 * b as f64)).ln();
                let log_prob = base
                    - lf[nij as usize]
                    - lf[(a - nij) as usize]
                    - lf[(b - nij) as usize]
                    - lf[(n + nij - a - b) as usize];
                emi += term * log_prob.exp();
            }
        }
    }
    emi
}

/// Adjusted mutual information with the arithmetic-mean normalizer.
pub fn ami(t: &ContingencyTable) -> f64 {
    ami_with(t, AmiNormalizer::Arithmetic)
}

pub fn ami_with(t: &ContingencyTable, normalizer: AmiNormalizer) -> f64 {
    if t.is_identity_up_to_relabeling() {
        return 1.0;
    }
    let mi = t.mutual_information();
    let emi = expected_mutual_information(t);
    let bound = normalizer.combine(t.row_entropy(), t.col_entropy());
    let den = bound - emi;
    if den.abs() <= f64::EPSILON {
        return 0.0;
    }
    (mi - emi) / den
}

/// ARI of two labelings.
pub fn adjusted_rand_index<L: Ord + Clone>(a: &[L], b: &[L]) -> Result<f64> {
    Ok(ari(&contingency(a, b)?))
}

/// AMI (arithmetic normalizer) of two labelings.
pub fn adjusted_mutual_information<L: Ord + Clone>(a: &[L], b: &[L]) -> Result<f64> {
    Ok(ami(&contingency(a, b)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn contingency_examples() {
        let t = contingency(&[1, 1, 2, 2], &[1, 1, 2, 2]).unwrap();
        assert_eq!(t.counts(), &[vec![2, 0], vec![0, 2]]);
        let t = contingency(&[1, 1, 2, 2], &[1, 2, 1, 2]).unwrap();
        assert_eq!(t.counts(), &[vec![1, 1], vec![1, 1]]);
        assert_eq!(t.total(), 4);
        assert_eq!(t.row_sums(), &[2, 2]);
        assert_eq!(
            contingency(&[1, 2], &[1]).unwrap_err(),
            Error::LengthMismatch { left: 2, right: 1 }
        );
    }

    #[test]
    fn ari_examples() {
        assert_eq!(
            adjusted_rand_index(&[0, 0, 1, 1, 2], &[5, 5, 3, 3, 9]).unwrap(),
            1.0
        );
        assert_eq!(
            adjusted_rand_index(&[0, 0, 0, 0], &[0, 1, 0, 1]).unwrap(),
            0.0
        );
        // pair counts: 2 co-clustered in both, 4 in each side, C(5,2) = 10
        // -> (2 - 1.6) / (4 - 1.6)
        let v = adjusted_rand_index(&[1, 1, 2, 2, 2], &[1, 1, 1, 2, 2]).unwrap();
        assert_abs_diff_eq!(v, 1.0 / 6.0, epsilon = 1e-12);
    }

    #[test]
    fn ari_all_singletons_vs_one_cluster() {
        assert_eq!(
            adjusted_rand_index(&[0, 1, 2, 3], &[0, 0, 0, 0]).unwrap(),
            0.0
        );
    }

    #[test]
    fn ami_examples() {
        assert_eq!(
            adjusted_mutual_information(&[0, 0, 1, 1, 2], &[2, 2, 0, 0, 1]).unwrap(),
            1.0
        );
        let a = [0, 0, 1, 1, 1, 2, 2, 0];
        let b = [1, 0, 1, 1, 0, 2, 2, 2];
        let relabeled: Vec<i32> = b.iter().map(|&x| [7, 3, 5][x as usize]).collect();
        assert_eq!(
            adjusted_mutual_information(&a, &b).unwrap(),
            adjusted_mutual_information(&a, &relabeled).unwrap()
        );
        assert_eq!(
            adjusted_mutual_information(&[0, 0, 0, 0], &[0, 1, 0, 1]).unwrap(),
            0.0
        );
    }

    #[test]
    fn normalizers_order() {
        let t = contingency(&[0, 0, 0, 1, 1, 2, 2, 2, 2], &[0, 0, 1, 1, 1, 1, 2, 2, 0]).unwrap();
        let v: Vec<f64> = [
            AmiNormalizer::Min,
            AmiNormalizer::Geometric,
            AmiNormalizer::Arithmetic,
            AmiNormalizer::Max,
        ]
        .iter()
        .map(|&n| ami_with(&t, n))
        .collect();
        assert!(v[0] >= v[1] && v[1] >= v[2] && v[2] >= v[3]);
    }

    #[test]
    fn emi_of_one_sided_trivial_table_is_zero() {
        let t = contingency(&[0, 0, 0], &[0, 1, 2]).unwrap();
        assert_abs_diff_eq!(expected_mutual_information(&t), 0.0, epsilon = 1e-15);
    }
}
