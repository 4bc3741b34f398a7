//! Label-guided pre-processing of teacher logits.
//!
//! All operators work on raw logits (before temperature scaling) and only
//! move existing values around, so the multiset of logits is preserved.
//!
//! Ranks use a stable descending order: larger value first, ties broken by
//! ascending class index. Comparisons use the IEEE total order so the result
//! is well defined down to the sign of zero.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{argmax, Label, Logits};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformKind {
    Identity,
    Swap,
    Sort,
}

impl TransformKind {
    pub const ALL: [TransformKind; 3] = [Self::Identity, Self::Swap, Self::Sort];

    pub fn name(self) -> &'static str {
        match self {
            Self::Identity => "identity",
            Self::Swap => "swap",
            Self::Sort => "sort",
        }
    }
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TransformKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "identity" | "kd" => Ok(Self::Identity),
            "swap" => Ok(Self::Swap),
            "sort" => Ok(Self::Sort),
            other => Err(Error::param(
                "transform",
                format!("unknown transform `{other}` (expected identity, swap or sort)"),
            )),
        }
    }
}

/// A pre-processing pipeline: the kind-transform, optionally followed by
/// z-score standardization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TransformSpec {
    pub kind: TransformKind,
    #[serde(default)]
    pub standardize: bool,
}

impl TransformSpec {
    pub const IDENTITY: TransformSpec = TransformSpec::new(TransformKind::Identity, false);

    pub const fn new(kind: TransformKind, standardize: bool) -> Self {
        TransformSpec { kind, standardize }
    }

    pub fn is_noop(&self) -> bool {
        self.kind == TransformKind::Identity && !self.standardize
    }

    /// `true` when the output is guaranteed to rank the label first.
    pub fn corrects_teacher(&self) -> bool {
        self.kind != TransformKind::Identity
    }
}

impl Default for TransformSpec {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl fmt::Display for TransformSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.standardize {
            write!(f, "{}+zscore", self.kind)
        } else {
            write!(f, "{}", self.kind)
        }
    }
}

impl FromStr for TransformSpec {
    type Err = Error;

    /// Accepts `identity`, `swap`, `sort`, each optionally suffixed with `+zscore`.
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once('+') {
            Some((kind, "zscore")) => Ok(TransformSpec::new(kind.parse()?, true)),
            Some(_) => Err(Error::param("transform", format!("unknown modifier in `{s}`"))),
            None => Ok(TransformSpec::new(s.parse()?, false)),
        }
    }
}

/// Class indices in rank order: `order[r]` is the class at rank `r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankPermutation(Vec<usize>);

impl RankPermutation {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; order.len()];
        for &c in &order {
            if c >= order.len() || std::mem::replace(&mut seen[c], true) {
                return Err(Error::NotAPermutation(order.len()));
            }
        }
        Ok(RankPermutation(order))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Rank of `class`, i.e. the inverse permutation evaluated at `class`.
    pub fn rank_of(&self, class: usize) -> Option<usize> {
        self.0.iter().position(|&c| c == class)
    }
}

/// `true` when class `a` with value `va` ranks above class `b` with value `vb`.
#[inline]
fn ranks_above<S: Scalar>(va: S, a: usize, vb: S, b: usize) -> bool {
    match va.total_cmp(&vb) {
        Ordering::Greater => true,
        Ordering::Equal => a < b,
        Ordering::Less => false,
    }
}

/// 0-based rank of class `y` in `z` under the stable descending order.
pub fn rank_of_class<S: Scalar>(z: &[S], y: usize) -> usize {
    let zy = z[y];
    z.iter()
        .enumerate()
        .filter(|&(j, &v)| ranks_above(v, j, zy, y))
        .count()
}

/// One-hot mask with `alpha` at the label position.
pub fn one_hot_mask<S: Scalar>(classes: usize, y: Label, alpha: S) -> Result<Vec<S>> {
    let y = y.check(classes)?;
    if !(alpha.is_finite() && alpha > S::zero()) {
        return Err(Error::param("alpha", "must be finite and positive"));
    }
    let mut m = vec![S::zero(); classes];
    m[y] = alpha;
    Ok(m)
}

/// Adds `alpha = (max - min) + 1` at the label, which puts the label strictly
/// on top for any real logits.
pub fn modified_logit<S: Scalar>(z: &Logits<S>, y: Label) -> Result<Logits<S>> {
    let yi = y.check(z.classes())?;
    let (min, max) = z
        .iter()
        .fold((S::infinity(), S::neg_infinity()), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let mut alpha = (max - min) + S::one();
    // Rounding can leave z[y] + alpha == max when the logits are huge.
    while z[yi] + alpha <= max {
        alpha = alpha + alpha;
        if !alpha.is_finite() {
            break;
        }
    }
    let mask = one_hot_mask(z.classes(), y, alpha).map_err(|_| Error::MaskOverflow)?;
    // -0.0 + 0.0 is +0.0, so only the boosted entry is touched
    let mut modified = z.as_slice().to_vec();
    modified[yi] += mask[yi];
    Logits::new(modified).map_err(|_| Error::MaskOverflow)
}

/// Stable descending sort returning the sorted values and the class order.
pub fn descending_argsort<S: Scalar>(z: &Logits<S>) -> (Logits<S>, RankPermutation) {
    let mut order: Vec<usize> = (0..z.classes()).collect();
    order.sort_by(|&a, &b| z[b].total_cmp(&z[a]));
    let values = order.iter().map(|&c| z[c]).collect();
    (Logits::from_trusted(values), RankPermutation(order))
}

/// Sort-based correction built literally from the two argsorts: the order of
/// the label-boosted logits receives the sorted original values, i.e.
/// `w[I'[r]] = v[r]` for every rank `r`.
///
/// [`sort_transform`] computes the same vector without the full sorts.
pub fn sort_transform_by_argsort<S: Scalar>(z: &Logits<S>, y: Label) -> Result<Logits<S>> {
    let modified = modified_logit(z, y)?;
    let (_, target_order) = descending_argsort(&modified);
    let (values, _) = descending_argsort(z);
    let mut out = vec![S::zero(); z.classes()];
    for (&class, &v) in target_order.as_slice().iter().zip(values.iter()) {
        out[class] = v;
    }
    Ok(Logits::from_trusted(out))
}

/// Moves the label to rank 0 with the top value; every class ranked above the
/// label drops by exactly one rank and takes the value of the class below it.
/// Classes ranked below the label are untouched.
pub fn sort_transform<S: Scalar>(z: &Logits<S>, y: Label) -> Result<Logits<S>> {
    let y = y.check(z.classes())?;
    let mut out = z.as_slice().to_vec();
    sort_in_place(&mut out, y);
    Ok(Logits::from_trusted(out))
}

/// In-place kernel behind [`sort_transform`]; `y` must be in range.
pub fn sort_in_place<S: Scalar>(z: &mut [S], y: usize) {
    let zy = z[y];
    let ky = zy.order_key();
    // (inverted value key, index): ascending order is the descending rank
    let mut above: Vec<u128> = z
        .iter()
        .enumerate()
        .filter_map(|(j, v)| {
            let k = v.order_key();
            (k > ky || (k == ky && j < y)).then_some(((!k as u128) << 64) | j as u128)
        })
        .collect();
    if above.is_empty() {
        return;
    }
    above.sort_unstable();
    let class = |packed: u128| packed as u64 as usize;
    let top = z[class(above[0])];
    for pair in above.windows(2) {
        z[class(pair[0])] = z[class(pair[1])];
    }
    z[class(above[above.len() - 1])] = zy;
    z[y] = top;
}

/// Exchanges the label's logit with the current maximum (lowest index on ties).
pub fn swap_transform<S: Scalar>(z: &Logits<S>, y: Label) -> Result<Logits<S>> {
    let y = y.check(z.classes())?;
    let mut out = z.as_slice().to_vec();
    swap_in_place(&mut out, y);
    Ok(Logits::from_trusted(out))
}

pub fn swap_in_place<S: Scalar>(z: &mut [S], y: usize) {
    let top = argmax(z);
    z.swap(top, y);
}

/// `(z - mean) / std` with the population standard deviation.
pub fn zscore_standardize<S: Scalar>(z: &Logits<S>) -> Result<Logits<S>> {
    let mut out = z.as_slice().to_vec();
    zscore_in_place(&mut out)?;
    Logits::new(out)
}

pub fn zscore_in_place<S: Scalar>(z: &mut [S]) -> Result<()> {
    let n = S::of(z.len() as f64);
    let mean = z.iter().copied().sum::<S>() / n;
    let var = z.iter().map(|&v| (v - mean) * (v - mean)).sum::<S>() / n;
    let std = var.sqrt();
    if !(std > S::zero()) {
        return Err(Error::ConstantVector(z[0].to_f64_lossy()));
    }
    for v in z.iter_mut() {
        *v = (*v - mean) / std;
    }
    Ok(())
}

pub fn apply_transform<S: Scalar>(spec: TransformSpec, z: &Logits<S>, y: Label) -> Result<Logits<S>> {
    let yi = y.check(z.classes())?;
    let mut out = z.as_slice().to_vec();
    apply_in_place(spec, &mut out, yi)?;
    Ok(Logits::from_trusted(out))
}

/// In-place kernel behind [`apply_transform`]; `y` must be in range.
pub fn apply_in_place<S: Scalar>(spec: TransformSpec, z: &mut [S], y: usize) -> Result<()> {
    match spec.kind {
        TransformKind::Identity => {}
        TransformKind::Swap => swap_in_place(z, y),
        TransformKind::Sort => sort_in_place(z, y),
    }
    if spec.standardize {
        zscore_in_place(z)?;
    }
    Ok(())
}
