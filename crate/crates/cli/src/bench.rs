//! Per-record latency of the logit transforms on synthetic records.

use std::fmt::Write as _;
use std::hint::black_box;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sortkd::oracle::iterated_swap_in_place;
use sortkd::transforms::{sort_in_place, swap_in_place};

use crate::error::CliError;

/// Cap on the generated record pool, in `f64` values (4 MiB), so the
/// timings measure the transforms rather than DRAM bandwidth. Larger runs
/// cycle through the pool.
const POOL_VALUES: usize = 1 << 19;
const WARMUP_RECORDS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchMethod {
    Identity,
    Swap,
    Sort,
    /// The iterated adjacent-swap oracle.
    SwapPlusPlus,
}

impl BenchMethod {
    pub const ALL: [BenchMethod; 4] = [
        BenchMethod::Identity,
        BenchMethod::Swap,
        BenchMethod::Sort,
        BenchMethod::SwapPlusPlus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BenchMethod::Identity => "identity",
            BenchMethod::Swap => "swap",
            BenchMethod::Sort => "sort",
            BenchMethod::SwapPlusPlus => "swap++",
        }
    }

    #[inline]
    fn apply(self, z: &mut [f64], y: usize) {
        match self {
            BenchMethod::Identity => {}
            BenchMethod::Swap => swap_in_place(z, y),
            BenchMethod::Sort => sort_in_place(z, y),
            BenchMethod::SwapPlusPlus => {
                iterated_swap_in_place(z, y);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchOptions {
    pub classes: Vec<usize>,
    pub records: usize,
    pub reps: usize,
    pub seed: u64,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            classes: vec![10, 100, 1000],
            records: 10_000,
            reps: 3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRow {
    pub classes: usize,
    pub method: BenchMethod,
    /// Best repetition's whole-pass time divided by the record count.
    pub mean_ns: f64,
    /// 99th percentile of individually timed records, best repetition.
    pub p99_ns: f64,
}

struct Pool {
    classes: usize,
    logits: Vec<f64>,
    labels: Vec<usize>,
}

impl Pool {
    fn generate(classes: usize, records: usize, seed: u64) -> Pool {
        let n = records.min(POOL_VALUES / classes).max(1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(classes as u64);
        let logits = (0..n * classes).map(|_| rng.sample(StandardNormal)).collect();
        let labels = (0..n).map(|_| rng.random_range(0..classes)).collect();
        Pool { classes, logits, labels }
    }

    #[inline]
    fn row(&self, i: usize) -> (&[f64], usize) {
        let k = i % self.labels.len();
        (&self.logits[k * self.classes..(k + 1) * self.classes], self.labels[k])
    }
}

/// Each record is copied into a scratch buffer and transformed there, so
/// every row includes the same copy and the identity row is the copy alone.
fn timed_pass(pool: &Pool, method: BenchMethod, records: usize, scratch: &mut [f64]) -> f64 {
    let start = Instant::now();
    for i in 0..records {
        let (z, y) = pool.row(i);
        scratch.copy_from_slice(z);
        method.apply(scratch, black_box(y));
        black_box(&*scratch);
    }
    start.elapsed().as_nanos() as f64 / records as f64
}

fn percentile_pass(pool: &Pool, method: BenchMethod, records: usize, scratch: &mut [f64], samples: &mut Vec<u64>) -> f64 {
    samples.clear();
    for i in 0..records {
        let (z, y) = pool.row(i);
        let start = Instant::now();
        scratch.copy_from_slice(z);
        method.apply(scratch, black_box(y));
        black_box(&*scratch);
        samples.push(start.elapsed().as_nanos() as u64);
    }
    let k = ((samples.len() as f64 * 0.99).ceil() as usize).clamp(1, samples.len()) - 1;
    *samples.select_nth_unstable(k).1 as f64
}

pub fn run_bench(opts: &BenchOptions) -> Result<Vec<BenchRow>, CliError> {
    if let Some(&c) = opts.classes.iter().find(|&&c| c < 2) {
        return Err(CliError::Invalid(format!("--classes values must be at least 2, got {c}")));
    }
    if opts.records == 0 || opts.reps == 0 {
        return Err(CliError::Invalid("--records and --reps must be at least 1".into()));
    }
    let mut rows = Vec::new();
    let mut samples = Vec::with_capacity(opts.records);
    for &c in &opts.classes {
        let pool = Pool::generate(c, opts.records, opts.seed);
        let mut scratch = vec![0.0; c];
        for method in BenchMethod::ALL {
            timed_pass(&pool, method, WARMUP_RECORDS.min(opts.records), &mut scratch);
            let mut mean = f64::INFINITY;
            let mut p99 = f64::INFINITY;
            for _ in 0..opts.reps {
                mean = mean.min(timed_pass(&pool, method, opts.records, &mut scratch));
                p99 = p99.min(percentile_pass(&pool, method, opts.records, &mut scratch, &mut samples));
            }
            rows.push(BenchRow {
                classes: c,
                method,
                mean_ns: mean,
                p99_ns: p99,
            });
        }
    }
    Ok(rows)
}

pub fn find(rows: &[BenchRow], classes: usize, method: BenchMethod) -> Option<&BenchRow> {
    rows.iter().find(|r| r.classes == classes && r.method == method)
}

pub fn format_bench(rows: &[BenchRow]) -> String {
    let mut s = format!("{:>6}  {:<9} {:>12} {:>12}\n", "C", "transform", "mean_ns", "p99_ns");
    for r in rows {
        let _ = writeln!(s, "{:>6}  {:<9} {:>12.1} {:>12.1}", r.classes, r.method.name(), r.mean_ns, r.p99_ns);
    }
    let mut classes: Vec<usize> = rows.iter().map(|r| r.classes).collect();
    classes.dedup();
    for c in classes {
        if let (Some(sort), Some(swap), Some(pp)) = (
            find(rows, c, BenchMethod::Sort),
            find(rows, c, BenchMethod::Swap),
            find(rows, c, BenchMethod::SwapPlusPlus),
        ) {
            let _ = writeln!(
                s,
                "C={c}: sort/swap {:.2}x, sort/swap++ {:.2}x",
                sort.mean_ns / swap.mean_ns,
                sort.mean_ns / pp.mean_ns
            );
        }
    }
    s
}
