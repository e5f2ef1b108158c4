//! Discrete information measures over finite supports, in nats.
//!
//! Distributions are validated once at construction; the measures themselves
//! are total functions over valid inputs.

use ndarray::{Array1, Array2, ArrayView1, Axis};

use crate::error::{Error, Result};
use crate::scalar::{xlogx, Scalar};

/// Probability mass function over `len()` outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution<T> {
    probs: Array1<T>,
}

impl<T: Scalar> DiscreteDistribution<T> {
    pub fn new(probs: impl Into<Array1<T>>) -> Result<Self> {
        let probs = probs.into();
        check_mass(probs.view())?;
        Ok(Self { probs })
    }

    /// Normalizes nonnegative masses to sum to one.
    pub fn from_masses(masses: impl Into<Array1<T>>) -> Result<Self> {
        let masses = masses.into();
        if masses.iter().any(|&m| !(m >= T::zero()) || !m.is_finite()) {
            return Err(Error::InvalidDistribution(
                "masses must be finite and nonnegative".into(),
            ));
        }
        let total: T = masses.iter().copied().sum();
        if !(total > T::zero()) {
            return Err(Error::InvalidDistribution("total mass is zero".into()));
        }
        Self::new(masses.mapv(|m| m / total))
    }

    pub fn uniform(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        Ok(Self {
            probs: Array1::from_elem(len, T::one() / T::of_usize(len)),
        })
    }

    pub fn probs(&self) -> ArrayView1<'_, T> {
        self.probs.view()
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

fn check_mass<T: Scalar>(probs: ArrayView1<'_, T>) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidDistribution("empty support".into()));
    }
    if let Some(i) = probs.iter().position(|&p| !p.is_finite() || p < T::zero()) {
        return Err(Error::InvalidDistribution(format!(
            "entry {i} is negative or non-finite"
        )));
    }
    let total: T = probs.iter().copied().sum();
    if (total - T::one()).abs() > T::mass_tolerance() {
        return Err(Error::InvalidDistribution(format!(
            "mass sums to {total}, not 1"
        )));
    }
    Ok(())
}

/// Joint mass over (Y, T): rows index Y, columns index T.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution<T> {
    mass: Array2<T>,
}

impl<T: Scalar> JointDistribution<T> {
    pub fn new(mass: Array2<T>) -> Result<Self> {
        if mass.is_empty() {
            return Err(Error::InvalidDistribution("empty joint".into()));
        }
        if mass.iter().any(|&m| !m.is_finite() || m < T::zero()) {
            return Err(Error::InvalidDistribution(
                "joint entries must be finite and nonnegative".into(),
            ));
        }
        let total: T = mass.iter().copied().sum();
        if (total - T::one()).abs() > T::mass_tolerance() {
            return Err(Error::InvalidDistribution(format!(
                "joint mass sums to {total}, not 1"
            )));
        }
        Ok(Self { mass })
    }

    /// Skips validation; callers guarantee the invariants by construction.
    pub(crate) fn new_unchecked(mass: Array2<T>) -> Self {
        Self { mass }
    }

    pub fn mass(&self) -> &Array2<T> {
        &self.mass
    }

    /// Row marginal (over Y).
    pub fn marginal_rows(&self) -> Array1<T> {
        self.mass.sum_axis(Axis(1))
    }

    /// Column marginal (over T).
    pub fn marginal_cols(&self) -> Array1<T> {
        self.mass.sum_axis(Axis(0))
    }

    pub fn transpose(&self) -> Self {
        Self {
            mass: self.mass.t().to_owned(),
        }
    }

    /// Entropy of the joint as a flattened distribution.
    pub fn joint_entropy(&self) -> T {
        -self.mass.iter().copied().map(xlogx).sum::<T>()
    }
}

/// Shannon entropy `-Σ p ln p`.
pub fn entropy<T: Scalar>(d: &DiscreteDistribution<T>) -> T {
    entropy_of(d.probs())
}

pub(crate) fn entropy_of<T: Scalar>(probs: ArrayView1<'_, T>) -> T {
    let h = -probs.iter().copied().map(xlogx).sum::<T>();
    // -0.0 and round-off below zero both collapse to 0
    if h > T::zero() {
        h
    } else {
        T::zero()
    }
}

/// `D_KL(p || q) = Σ p ln(p/q)`.
pub fn kl_divergence<T: Scalar>(
    p: &DiscreteDistribution<T>,
    q: &DiscreteDistribution<T>,
) -> Result<T> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            what: "kl_divergence support",
            expected: p.len(),
            found: q.len(),
        });
    }
    kl_of(p.probs(), q.probs())
}

pub(crate) fn kl_of<T: Scalar>(p: ArrayView1<'_, T>, q: ArrayView1<'_, T>) -> Result<T> {
    let mut acc = T::zero();
    for (i, (&pi, &qi)) in p.iter().zip(q.iter()).enumerate() {
        if pi > T::zero() {
            if !(qi > T::zero()) {
                return Err(Error::AbsoluteContinuityViolation { index: i });
            }
            acc = acc + pi * (pi / qi).ln();
        }
    }
    Ok(if acc > T::zero() { acc } else { T::zero() })
}

/// `I(Y;T)` of a joint distribution.
pub fn mutual_information<T: Scalar>(j: &JointDistribution<T>) -> T {
    let rows = j.marginal_rows();
    let cols = j.marginal_cols();
    let mut acc = T::zero();
    for ((r, c), &m) in j.mass.indexed_iter() {
        if m > T::zero() {
            acc = acc + m * (m / (rows[r] * cols[c])).ln();
        }
    }
    if acc > T::zero() {
        acc
    } else {
        T::zero()
    }
}

/// Entropy of `w / ||w||_1` divided by `ln p`; zero for a single weight.
pub fn normalized_weight_entropy<T: Scalar>(w: &[T]) -> Result<T> {
    let total: T = w.iter().map(|x| x.abs()).sum();
    if !(total > T::zero()) {
        return Err(Error::AllZeroWeights);
    }
    if w.len() == 1 {
        return Ok(T::zero());
    }
    let h = -w.iter().map(|&x| xlogx(x.abs() / total)).sum::<T>();
    let h = if h > T::zero() { h } else { T::zero() };
    Ok(h / T::of_usize(w.len()).ln())
}
