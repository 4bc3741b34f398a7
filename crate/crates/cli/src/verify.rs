use std::io::Write;

use sortkd::oracle::{exhaustive_equivalence_check, randomized_equivalence_check, MAX_EXHAUSTIVE_CLASSES};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub cmax: usize,
    pub random_cases: usize,
    /// Upper bound on the class count of randomized cases.
    pub random_classes: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            cmax: 6,
            random_cases: 100_000,
            random_classes: 64,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifySummary {
    pub cases: usize,
    pub failures: usize,
}

impl VerifySummary {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// `sortkd verify`: exhaustive check up to `cmax` classes, then the
/// randomized suite.
pub fn cmd_verify<W: Write>(opts: VerifyOptions, out: &mut W) -> Result<VerifySummary, CliError> {
    if !(2..=MAX_EXHAUSTIVE_CLASSES).contains(&opts.cmax) {
        return Err(CliError::Invalid(format!(
            "--cmax must be between 2 and {MAX_EXHAUSTIVE_CLASSES}, got {}",
            opts.cmax
        )));
    }
    if opts.random_classes < 2 {
        return Err(CliError::Invalid("--random-classes must be at least 2".into()));
    }
    let io = |e| CliError::io("<stdout>", e);
    let exhaustive = exhaustive_equivalence_check(opts.cmax)?;
    writeln!(out, "exhaustive, C = 2..={}", opts.cmax).map_err(io)?;
    writeln!(out, "{exhaustive}").map_err(io)?;
    let random = randomized_equivalence_check(opts.random_cases, opts.random_classes, opts.seed)?;
    writeln!(
        out,
        "randomized, {} cases, C <= {}, seed {}",
        opts.random_cases, opts.random_classes, opts.seed
    )
    .map_err(io)?;
    writeln!(out, "{random}").map_err(io)?;
    let summary = VerifySummary {
        cases: exhaustive.cases + random.cases,
        failures: exhaustive.failure_count + random.failure_count,
    };
    writeln!(
        out,
        "total cases checked: {}, failures: {}",
        summary.cases, summary.failures
    )
    .map_err(io)?;
    Ok(summary)
}
