use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sortkd::distill::{run_experiment_suite, ExperimentConfig, SuiteOutcome, SummaryRow, TeacherReport};

use crate::error::CliError;

pub const METRICS_FILE: &str = "metrics.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const NOISE_TABLE_FILE: &str = "noise_table.txt";

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a ExperimentConfig,
    dataset_hash: &'a str,
    teacher: &'a TeacherReport,
    summary: &'a [SummaryRow],
    files: Vec<&'static str>,
}

/// Reads an experiment config. `.json` files are parsed as JSON, anything
/// else as TOML. The file is merged key by key over the built-in
/// experiment, so a partial `[teacher.train]` table keeps the teacher's
/// other defaults. Unknown keys are errors.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let invalid = |e: &dyn std::fmt::Display| CliError::Invalid(format!("{}: {e}", path.display()));
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let user: Value = if is_json {
        serde_json::from_str(&text).map_err(|e| invalid(&e))?
    } else {
        toml::from_str(&text).map_err(|e| invalid(&e))?
    };
    let mut merged = serde_json::to_value(ExperimentConfig::default()).expect("defaults serialize");
    merge(&mut merged, user);
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(merged).map_err(|e| {
        let key = e.path().to_string();
        CliError::Invalid(format!("{}: `{key}`: {}", path.display(), e.inner()))
    })?;
    cfg.validate()?;
    Ok(cfg)
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let to_err = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::Invalid(format!("{}: {other:?}", path.display())),
    };
    let mut w = csv::Writer::from_path(path).map_err(to_err)?;
    for row in rows {
        w.serialize(row).map_err(to_err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn format_summary(outcome: &SuiteOutcome) -> String {
    let mut s = format!(
        "teacher: train top-1 {:.4}, test top-1 {:.4}\n{:<14} {:>11} {:>5} {:>10} {:>8} {:>10}\n",
        outcome.teacher.train_top1, outcome.teacher.test_top1, "transform", "noise_ratio", "runs", "mean_top1", "std", "corr_rate"
    );
    for r in &outcome.summary {
        let rate = r
            .min_teacher_correction_rate
            .map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
        s.push_str(&format!(
            "{:<14} {:>11} {:>5} {:>10.4} {:>8.4} {:>10}\n",
            r.transform, r.noise_ratio, r.runs, r.mean_test_top1, r.std_test_top1, rate
        ));
    }
    s
}

/// `sortkd train`: runs the grid and writes `metrics.csv`, `summary.csv`,
/// `manifest.json` and, when identity and sort were both run,
/// `noise_table.txt` into `out_dir`.
pub fn cmd_train<W: Write>(
    config: &Path,
    out_dir: &Path,
    dataset_seed: Option<u64>,
    out: &mut W,
) -> Result<SuiteOutcome, CliError> {
    let mut cfg = load_config(config)?;
    if let Some(seed) = dataset_seed {
        cfg.dataset.seed = seed;
    }
    let outcome = run_experiment_suite(&cfg)?;
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;

    write_csv(&out_dir.join(METRICS_FILE), &outcome.runs)?;
    write_csv(&out_dir.join(SUMMARY_FILE), &outcome.summary)?;
    let mut files = vec![METRICS_FILE, SUMMARY_FILE];
    let noise_table = outcome.noise_table();
    if let Some(table) = &noise_table {
        let path = out_dir.join(NOISE_TABLE_FILE);
        fs::write(&path, table).map_err(|e| CliError::io(&path, e))?;
        files.push(NOISE_TABLE_FILE);
    }
    let manifest = Manifest {
        tool: "sortkd",
        version: env!("CARGO_PKG_VERSION"),
        config: &cfg,
        dataset_hash: &outcome.teacher.dataset_hash,
        teacher: &outcome.teacher,
        summary: &outcome.summary,
        files,
    };
    let path = out_dir.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json + "\n").map_err(|e| CliError::io(&path, e))?;

    let io = |e| CliError::io("<stdout>", e);
    write!(out, "{}", format_summary(&outcome)).map_err(io)?;
    if let Some(table) = noise_table {
        write!(out, "\n{table}").map_err(io)?;
    }
    writeln!(out, "\nwrote {}", out_dir.display()).map_err(io)?;
    Ok(outcome)
}
