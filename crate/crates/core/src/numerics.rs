//! Logit and probability vectors, temperature softmax and the divergences
//! built on top of it.
//!
//! The public functions take validated newtypes. Slice kernels with the same
//! semantics are exposed for hot loops (training, benchmarks) that already
//! hold validated data.

use std::ops::Deref;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense class-logit vector: at least two classes, every entry finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Logits<S>(Vec<S>);

impl<S: Scalar> Logits<S> {
    pub fn new(values: Vec<S>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::TooFewClasses(values.len()));
        }
        if let Some((index, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite {
                index,
                value: v.to_f64_lossy(),
            });
        }
        Ok(Logits(values))
    }

    /// Caller guarantees the invariants (e.g. the values are a permutation of
    /// an already validated vector).
    pub(crate) fn from_trusted(values: Vec<S>) -> Self {
        debug_assert!(values.len() >= 2 && values.iter().all(|v| v.is_finite()));
        Logits(values)
    }

    pub fn classes(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[S] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<S> {
        self.0
    }

    /// Index of the largest entry; ties go to the lowest index.
    pub fn argmax(&self) -> usize {
        argmax(&self.0)
    }

    pub fn sum(&self) -> S {
        self.0.iter().copied().sum()
    }
}

impl<S> Deref for Logits<S> {
    type Target = [S];

    fn deref(&self) -> &[S] {
        &self.0
    }
}

/// A point on the open probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct Probs<S>(Vec<S>);

impl<S: Scalar> Probs<S> {
    pub fn new(values: Vec<S>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::TooFewClasses(values.len()));
        }
        for (index, &p) in values.iter().enumerate() {
            if !(p > S::zero() && p <= S::one()) {
                return Err(Error::InvalidProbability {
                    index,
                    value: p.to_f64_lossy(),
                });
            }
        }
        let total: S = values.iter().copied().sum();
        if (total - S::one()).abs() > S::simplex_tolerance(values.len()) {
            return Err(Error::NotNormalized(total.to_f64_lossy()));
        }
        Ok(Probs(values))
    }

    pub fn classes(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[S] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<S> {
        self.0
    }
}

impl<S> Deref for Probs<S> {
    type Target = [S];

    fn deref(&self) -> &[S] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Temperature<S>(S);

impl<S: Scalar> Temperature<S> {
    pub fn new(t: S) -> Result<Self> {
        if t.is_finite() && t > S::zero() {
            Ok(Temperature(t))
        } else {
            Err(Error::InvalidTemperature(t.to_f64_lossy()))
        }
    }

    pub fn one() -> Self {
        Temperature(S::one())
    }

    pub fn get(self) -> S {
        self.0
    }
}

/// Ground-truth class index. Validity depends on the class count of the
/// vector it is paired with, so it is checked at the point of use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(pub usize);

impl Label {
    pub fn index(self) -> usize {
        self.0
    }

    pub fn check(self, classes: usize) -> Result<usize> {
        if self.0 < classes {
            Ok(self.0)
        } else {
            Err(Error::LabelOutOfRange {
                label: self.0,
                classes,
            })
        }
    }
}

impl From<usize> for Label {
    fn from(index: usize) -> Self {
        Label(index)
    }
}

fn same_len(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::LengthMismatch { left, right })
    }
}

/// Temperature softmax with max subtraction. Entries that underflow are
/// raised to [`Scalar::prob_floor`] so the result stays strictly positive.
pub fn softmax<S: Scalar>(z: &Logits<S>, t: Temperature<S>) -> Probs<S> {
    let mut out = vec![S::zero(); z.classes()];
    softmax_into(z, t.get(), &mut out);
    Probs(out)
}

pub fn kl_divergence<S: Scalar>(p_tea: &Probs<S>, p_stu: &Probs<S>) -> Result<S> {
    same_len(p_tea.classes(), p_stu.classes())?;
    Ok(kl_slices(p_tea, p_stu))
}

pub fn cross_entropy<S: Scalar>(p_stu: &Probs<S>, y: Label) -> Result<S> {
    let y = y.check(p_stu.classes())?;
    Ok(-p_stu[y].max(S::prob_floor()).ln())
}

/// Classical KD divergence `KL(softmax(z_tea/T) || softmax(z_stu/T))`,
/// without the `T^2` gradient scaling.
pub fn kd_loss<S: Scalar>(z_tea: &Logits<S>, z_stu: &Logits<S>, t: Temperature<S>) -> Result<S> {
    same_len(z_tea.classes(), z_stu.classes())?;
    kl_divergence(&softmax(z_tea, t), &softmax(z_stu, t))
}

/// Slice kernel behind [`softmax`]; `t` must be positive and `z` finite.
pub fn softmax_into<S: Scalar>(z: &[S], t: S, out: &mut [S]) {
    debug_assert_eq!(z.len(), out.len());
    let inv_t = t.recip();
    let max = z.iter().fold(S::neg_infinity(), |m, &v| m.max(v * inv_t));
    let mut total = S::zero();
    for (o, &v) in out.iter_mut().zip(z) {
        *o = (v * inv_t - max).exp();
        total += *o;
    }
    let floor = S::prob_floor();
    for o in out.iter_mut() {
        *o = (*o / total).max(floor);
    }
}

/// Slice kernel behind [`kl_divergence`]; lengths must match.
pub fn kl_slices<S: Scalar>(p: &[S], q: &[S]) -> S {
    let floor = S::prob_floor();
    p.iter()
        .zip(q)
        .map(|(&a, &b)| kl_term(a.max(floor), b.max(floor)))
        .sum()
}

/// `a ln(a/b) + b - a`, which sums to the divergence over two distributions
/// and is non-negative term by term. The `b - a` part keeps mass that
/// rounding dropped from the other entries (`1 - 1e-30 == 1.0`), where the
/// bare `a ln(a/b)` sum can come out slightly negative.
#[inline]
pub(crate) fn kl_term<S: Scalar>(a: S, b: S) -> S {
    (a * (a / b).ln() + (b - a)).max(S::zero())
}

/// Index of the largest entry under the total order; ties go to the lowest index.
pub fn argmax<S: Scalar>(z: &[S]) -> usize {
    let mut best = 0;
    let mut best_key = z[0].order_key();
    for (j, v) in z.iter().enumerate().skip(1) {
        let k = v.order_key();
        if k > best_key {
            best = j;
            best_key = k;
        }
    }
    best
}
