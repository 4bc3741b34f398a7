//! Brute-force references for the transforms and the divergence.
//!
//! Nothing here shares code with the production paths beyond the value
//! types: the iterated-swap ladder rescans the vector on every step and the
//! KL reference accumulates in a different order.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{kl_term, Label, Logits, Probs};
use crate::scalar::Scalar;
use crate::transforms::{
    rank_of_class, sort_transform, sort_transform_by_argsort, swap_transform,
};

/// Largest class count the exhaustive check accepts (7! * 7 cases at the top).
pub const MAX_EXHAUSTIVE_CLASSES: usize = 7;

/// Repeated adjacent swaps: while some class holds a strictly larger value
/// than the label, exchange the label's value with the smallest strictly
/// larger value (the lowest-ranked holder on ties). Returns the output and
/// the number of exchanges.
///
/// Exchanges with a tied neighbour would not change any value, so they are
/// skipped; on inputs with distinct values the count equals the label's rank.
pub fn iterated_swap_trace<S: Scalar>(z: &Logits<S>, y: Label) -> Result<(Logits<S>, usize)> {
    let y = y.check(z.classes())?;
    let mut w = z.as_slice().to_vec();
    let exchanges = iterated_swap_in_place(&mut w, y);
    Logits::new(w).map(|l| (l, exchanges))
}

/// Slice form of [`iterated_swap_trace`]; `y` must be in range.
pub fn iterated_swap_in_place<S: Scalar>(w: &mut [S], y: usize) -> usize {
    let mut exchanges = 0;
    loop {
        let mut next: Option<usize> = None;
        for j in 0..w.len() {
            if j == y || !w[j].total_cmp(&w[y]).is_gt() {
                continue;
            }
            next = match next {
                None => Some(j),
                Some(n) => {
                    let ord = w[j].total_cmp(&w[n]);
                    // smaller value wins; among equals the larger index ranks lower
                    if ord.is_lt() || (ord.is_eq() && j > n) {
                        Some(j)
                    } else {
                        Some(n)
                    }
                }
            };
        }
        match next {
            Some(n) => {
                w.swap(n, y);
                exchanges += 1;
            }
            None => return exchanges,
        }
    }
}

pub fn iterated_swap_oracle<S: Scalar>(z: &Logits<S>, y: Label) -> Result<Logits<S>> {
    iterated_swap_trace(z, y).map(|(w, _)| w)
}

/// KL divergence summed over terms in ascending magnitude.
pub fn naive_kl_oracle<S: Scalar>(p: &Probs<S>, q: &Probs<S>) -> Result<S> {
    if p.classes() != q.classes() {
        return Err(Error::LengthMismatch {
            left: p.classes(),
            right: q.classes(),
        });
    }
    let floor = S::prob_floor();
    let mut terms: Vec<S> = p
        .iter()
        .zip(q.iter())
        .map(|(&a, &b)| kl_term(a.max(floor), b.max(floor)))
        .collect();
    terms.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    let mut total = S::zero();
    for t in terms {
        total += t;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FailureCase {
    pub logits: Vec<f64>,
    pub label: usize,
    pub reason: String,
}

impl fmt::Display for FailureCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "z={:?} y={}: {}", self.logits, self.label, self.reason)
    }
}

/// Outcome of an equivalence run; failures are collected rather than raised.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EquivalenceReport {
    /// `(classes, cases)` pairs in increasing class order.
    pub cases_by_classes: Vec<(usize, usize)>,
    pub cases: usize,
    pub failure_count: usize,
    /// First few failing cases, in case order.
    pub failures: Vec<FailureCase>,
}

const KEPT_FAILURES: usize = 16;

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }

    fn merge(mut self, other: EquivalenceReport) -> Self {
        self.cases += other.cases;
        self.failure_count += other.failure_count;
        self.failures.extend(other.failures);
        self.failures.truncate(KEPT_FAILURES);
        for (c, n) in other.cases_by_classes {
            match self.cases_by_classes.iter_mut().find(|(k, _)| *k == c) {
                Some((_, m)) => *m += n,
                None => self.cases_by_classes.push((c, n)),
            }
        }
        self.cases_by_classes.sort_unstable();
        self
    }

    fn record(&mut self, classes: usize, failure: Option<FailureCase>) {
        self.cases += 1;
        match self.cases_by_classes.last_mut() {
            Some((c, n)) if *c == classes => *n += 1,
            _ => self.cases_by_classes.push((classes, 1)),
        }
        if let Some(f) = failure {
            self.failure_count += 1;
            if self.failures.len() < KEPT_FAILURES {
                self.failures.push(f);
            }
        }
    }
}

impl fmt::Display for EquivalenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (c, n) in &self.cases_by_classes {
            writeln!(f, "  C={c:<5} cases={n}")?;
        }
        write!(f, "  total cases={} failures={}", self.cases, self.failure_count)?;
        for fail in &self.failures {
            write!(f, "\n  FAIL {fail}")?;
        }
        Ok(())
    }
}

fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

fn sorted_bits(v: &[f64]) -> Vec<u64> {
    let mut v = v.to_vec();
    v.sort_by(f64::total_cmp);
    bits(&v)
}

/// Checks one `(z, y)` case against the oracle and every transform invariant.
/// `distinct` enables the checks that only hold without ties.
pub fn check_case(z: &[f64], y: usize, distinct: bool) -> Option<FailureCase> {
    let fail = |reason: String| {
        Some(FailureCase {
            logits: z.to_vec(),
            label: y,
            reason,
        })
    };
    let input = match Logits::new(z.to_vec()) {
        Ok(l) => l,
        Err(e) => return fail(format!("invalid input: {e}")),
    };
    let label = Label(y);
    let (sorted, swapped, (oracle, exchanges), literal) = match (
        sort_transform(&input, label),
        swap_transform(&input, label),
        iterated_swap_trace(&input, label),
        sort_transform_by_argsort(&input, label),
    ) {
        (Ok(a), Ok(b), Ok(c), Ok(d)) => (a, b, c, d),
        _ => return fail("transform returned an error".into()),
    };
    if bits(&sorted) != bits(&oracle) {
        return fail(format!("sort {:?} != iterated swap {:?}", sorted.as_slice(), oracle.as_slice()));
    }
    if bits(&sorted) != bits(&literal) {
        return fail(format!("sort {:?} != argsort route {:?}", sorted.as_slice(), literal.as_slice()));
    }
    let reference = sorted_bits(z);
    if sorted_bits(&sorted) != reference || sorted_bits(&swapped) != reference {
        return fail("value multiset changed".into());
    }
    let sum_in: f64 = z.iter().sum();
    for (name, out) in [("sort", &sorted), ("swap", &swapped)] {
        let sum_out: f64 = out.iter().sum();
        if (sum_out - sum_in).abs() / sum_in.abs().max(1.0) > 1e-9 {
            return fail(format!("{name} changed the sum: {sum_in} -> {sum_out}"));
        }
    }
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if sorted[y] != max || swapped[y] != max {
        return fail("label does not hold the maximum".into());
    }
    match sort_transform(&sorted, label) {
        Ok(again) if bits(&again) == bits(&sorted) => {}
        _ => return fail("sort is not idempotent".into()),
    }
    match swap_transform(&swapped, label) {
        Ok(again) if bits(&again) == bits(&swapped) => {}
        _ => return fail("swap is not idempotent".into()),
    }
    let rank = rank_of_class(z, y);
    if rank == 0 && (bits(&sorted) != bits(z) || bits(&swapped) != bits(z)) {
        return fail("correct prediction was modified".into());
    }
    if rank == 1 && bits(&sorted) != bits(&swapped) {
        return fail("sort and swap disagree with the label at rank 2".into());
    }
    if distinct {
        if sorted.argmax() != y || swapped.argmax() != y {
            return fail("label is not the argmax".into());
        }
        if exchanges != rank {
            return fail(format!("oracle used {exchanges} exchanges for rank {rank}"));
        }
    }
    None
}

/// Every permutation of `{1, ..., C}` for every `C <= c_max`, with every label.
pub fn exhaustive_equivalence_check(c_max: usize) -> Result<EquivalenceReport> {
    if !(2..=MAX_EXHAUSTIVE_CLASSES).contains(&c_max) {
        return Err(Error::param(
            "cmax",
            format!("must be in 2..={MAX_EXHAUSTIVE_CLASSES}, got {c_max}"),
        ));
    }
    let mut report = EquivalenceReport::default();
    for classes in 2..=c_max {
        let mut perm: Vec<f64> = (1..=classes).map(|v| v as f64).collect();
        loop {
            for y in 0..classes {
                report.record(classes, check_case(&perm, y, true));
            }
            if !next_permutation(&mut perm) {
                break;
            }
        }
    }
    Ok(report)
}

/// Lexicographic successor; returns `false` after the last permutation.
fn next_permutation(v: &mut [f64]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).expect("pivot exists");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Randomized cases with class counts log-uniform over `[2, max_classes]`.
/// Roughly a third of the cases use small integer values to exercise ties,
/// and a few include signed zeros. Each case derives its own RNG from
/// `seed`, so the result does not depend on scheduling.
pub fn randomized_equivalence_check(
    cases: usize,
    max_classes: usize,
    seed: u64,
) -> Result<EquivalenceReport> {
    if max_classes < 2 {
        return Err(Error::param("max_classes", "must be at least 2"));
    }
    let report = (0..cases)
        .into_par_iter()
        .fold(EquivalenceReport::default, |mut report, i| {
            let (z, y, distinct) = random_case(i as u64, max_classes, seed);
            report.record(z.len(), check_case(&z, y, distinct));
            report
        })
        .reduce(EquivalenceReport::default, EquivalenceReport::merge);
    Ok(report)
}

fn random_case(index: u64, max_classes: usize, seed: u64) -> (Vec<f64>, usize, bool) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let log_c = rng.random_range(0.0..=(max_classes as f64).ln() - 2f64.ln());
    let classes = ((2.0 * log_c.exp()).round() as usize).clamp(2, max_classes);
    let z: Vec<f64> = match rng.random_range(0..6) {
        0 | 1 => (0..classes)
            .map(|_| rng.random_range(-3i32..=3) as f64)
            .collect(),
        2 => (0..classes)
            .map(|_| match rng.random_range(0..4) {
                0 => 0.0,
                1 => -0.0,
                _ => rng.sample::<f64, _>(StandardNormal),
            })
            .collect(),
        _ => {
            let scale = 10f64.powf(rng.random_range(-3.0..3.0));
            (0..classes)
                .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
                .collect()
        }
    };
    let y = rng.random_range(0..classes);
    let mut seen: Vec<u64> = z.iter().map(|v| v.to_bits()).collect();
    seen.sort_unstable();
    seen.dedup();
    let distinct = seen.len() == classes;
    (z, y, distinct)
}
