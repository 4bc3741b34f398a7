//! Grid runner: one frozen teacher, students trained per (method, noise
//! ratio, seed) cell, summarized as mean and standard deviation.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::generate_synthetic_dataset;
use super::train::{top1, train, TrainConfig};
use crate::error::{Error, Result};
use crate::transforms::{TransformKind, TransformSpec};

/// How a student is supervised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Cross-entropy on labels only, no teacher.
    HardLabel,
    Distill(TransformSpec),
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::HardLabel => f.write_str("hard_label"),
            Method::Distill(spec) => write!(f, "{spec}"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "hard_label" {
            Ok(Method::HardLabel)
        } else {
            s.parse().map(Method::Distill)
        }
    }
}

impl Serialize for Method {
    fn serialize<Ser: serde::Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    pub classes: usize,
    pub dims: usize,
    pub n_per_class: usize,
    pub spread: f64,
    pub seed: u64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            classes: 10,
            dims: 16,
            n_per_class: 200,
            spread: DEFAULT_SPREAD,
            seed: 0,
        }
    }
}

/// Within-class standard deviation picked from a pilot sweep so the default
/// teacher misclassifies about 15% of its training set.
pub const DEFAULT_SPREAD: f64 = 1.3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub hidden: usize,
    pub train: TrainConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetConfig,
    pub teacher: ModelConfig,
    /// Hyperparameters shared by every student; `seed`, `noise_ratio` and
    /// `transform` are overridden per cell.
    pub student: ModelConfig,
    pub methods: Vec<Method>,
    pub noise_ratios: Vec<f64>,
    pub seeds: Vec<u64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: DatasetConfig::default(),
            teacher: ModelConfig {
                hidden: 128,
                train: TrainConfig {
                    kd_weight: 0.0,
                    learning_rate: 0.02,
                    weight_decay: 5e-3,
                    epochs: 30,
                    seed: 1000,
                    ..TrainConfig::default()
                },
            },
            student: ModelConfig {
                hidden: 32,
                train: TrainConfig {
                    epochs: 40,
                    ..TrainConfig::default()
                },
            },
            methods: TransformKind::ALL
                .iter()
                .map(|&k| Method::Distill(TransformSpec::new(k, false)))
                .collect(),
            noise_ratios: vec![0.0],
            seeds: (0..10).collect(),
        }
    }
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            hidden: 32,
            train: TrainConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let ds = &self.dataset;
        if ds.classes < 3 {
            return Err(Error::param("dataset.classes", "must be at least 3"));
        }
        if ds.dims < 2 {
            return Err(Error::param("dataset.dims", "must be at least 2"));
        }
        if !(ds.spread.is_finite() && ds.spread > 0.0) {
            return Err(Error::param("dataset.spread", "must be positive"));
        }
        if ds.n_per_class < 5 {
            return Err(Error::param("dataset.n_per_class", "must be at least 5"));
        }
        for (prefix, model) in [("teacher", &self.teacher), ("student", &self.student)] {
            if model.hidden == 0 {
                return Err(Error::param(format!("{prefix}.hidden"), "must be at least 1"));
            }
            model.train.validate().map_err(|e| match e {
                Error::InvalidParameter { name, reason } => Error::InvalidParameter {
                    name: format!("{prefix}.{name}"),
                    reason,
                },
                other => other,
            })?;
        }
        if self.methods.is_empty() {
            return Err(Error::param("methods", "must list at least one method"));
        }
        if self.seeds.is_empty() {
            return Err(Error::param("seeds", "must list at least one seed"));
        }
        if self.noise_ratios.is_empty() {
            return Err(Error::param("noise_ratios", "must list at least one ratio"));
        }
        if let Some(r) = self.noise_ratios.iter().find(|r| !(0.0..1.0).contains(*r)) {
            return Err(Error::param("noise_ratios", format!("{r} is outside [0, 1)")));
        }
        Ok(())
    }
}

/// One row of the per-run metrics CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub transform: String,
    pub noise_ratio: f64,
    pub seed: u64,
    pub final_test_top1: f64,
    pub teacher_correction_rate: Option<f64>,
    pub epochs: usize,
}

/// Mean and sample standard deviation of test top-1 for one (method, noise) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub transform: String,
    pub noise_ratio: f64,
    pub runs: usize,
    pub mean_test_top1: f64,
    pub std_test_top1: f64,
    pub min_teacher_correction_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeacherReport {
    pub train_top1: f64,
    pub test_top1: f64,
    pub dataset_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub teacher: TeacherReport,
    pub runs: Vec<RunRow>,
    pub summary: Vec<SummaryRow>,
}

impl SuiteOutcome {
    pub fn cell(&self, method: Method, noise_ratio: f64) -> Option<&SummaryRow> {
        let name = method.to_string();
        self.summary
            .iter()
            .find(|r| r.transform == name && r.noise_ratio == noise_ratio)
    }

    /// Pivot of identity (KD) vs sort per noise ratio, when both were run.
    pub fn noise_table(&self) -> Option<String> {
        let off = Method::Distill(TransformSpec::new(TransformKind::Identity, false));
        let on = Method::Distill(TransformSpec::new(TransformKind::Sort, false));
        let mut ratios: Vec<f64> = Vec::new();
        for r in &self.summary {
            if !ratios.contains(&r.noise_ratio) {
                ratios.push(r.noise_ratio);
            }
        }
        let mut out = String::from("noise_ratio  sort  mean_test_top1  delta\n");
        for r in ratios {
            let (a, b) = (self.cell(off, r)?, self.cell(on, r)?);
            out.push_str(&format!("{r:<11}  off   {:<14.4}  -\n", a.mean_test_top1));
            out.push_str(&format!(
                "{r:<11}  on    {:<14.4}  {:+.4}\n",
                b.mean_test_top1,
                b.mean_test_top1 - a.mean_test_top1
            ));
        }
        Some(out)
    }
}

pub fn run_experiment_suite(cfg: &ExperimentConfig) -> Result<SuiteOutcome> {
    cfg.validate()?;
    let ds = &cfg.dataset;
    let data = generate_synthetic_dataset::<f64>(ds.classes, ds.dims, ds.n_per_class, ds.spread, ds.seed)?;
    let teacher_cfg = TrainConfig {
        noise_ratio: 0.0,
        transform: TransformSpec::IDENTITY,
        ..cfg.teacher.train
    };
    let (teacher, _) = train(cfg.teacher.hidden, &data, &teacher_cfg, None)?;
    let report = TeacherReport {
        train_top1: top1(&teacher, &data.train)?,
        test_top1: top1(&teacher, &data.test)?,
        dataset_hash: data.content_hash(),
    };

    let cells: Vec<(usize, Method, f64, u64)> = cfg
        .methods
        .iter()
        .enumerate()
        .flat_map(|(mi, &m)| {
            cfg.noise_ratios
                .iter()
                .flat_map(move |&r| cfg.seeds.iter().map(move |&s| (mi, m, r, s)))
        })
        .collect();

    let mut runs: Vec<(usize, RunRow)> = cells
        .par_iter()
        .enumerate()
        .map(|(cell_id, &(_, method, noise_ratio, seed))| {
            let mut run_cfg = TrainConfig {
                seed,
                noise_ratio,
                ..cfg.student.train
            };
            let teacher = match method {
                Method::HardLabel => None,
                Method::Distill(spec) => {
                    run_cfg.transform = spec;
                    Some(&teacher)
                }
            };
            let (_, m) = train(cfg.student.hidden, &data, &run_cfg, teacher)?;
            Ok((
                cell_id,
                RunRow {
                    transform: method.to_string(),
                    noise_ratio,
                    seed,
                    final_test_top1: m.final_test_top1,
                    teacher_correction_rate: m.teacher_correction_rate,
                    epochs: run_cfg.epochs,
                },
            ))
        })
        .collect::<Result<_>>()?;
    runs.sort_by_key(|(id, _)| *id);
    let runs: Vec<RunRow> = runs.into_iter().map(|(_, r)| r).collect();

    let mut summary = Vec::new();
    for method in &cfg.methods {
        let name = method.to_string();
        for &ratio in &cfg.noise_ratios {
            let cell: Vec<&RunRow> = runs
                .iter()
                .filter(|r| r.transform == name && r.noise_ratio == ratio)
                .collect();
            let acc: Vec<f64> = cell.iter().map(|r| r.final_test_top1).collect();
            let (mean, std) = mean_std(&acc);
            let min_rate = cell
                .iter()
                .filter_map(|r| r.teacher_correction_rate)
                .reduce(f64::min);
            summary.push(SummaryRow {
                transform: name.clone(),
                noise_ratio: ratio,
                runs: cell.len(),
                mean_test_top1: mean,
                std_test_top1: std,
                min_teacher_correction_rate: min_rate,
            });
        }
    }
    Ok(SuiteOutcome {
        teacher: report,
        runs,
        summary,
    })
}

/// Mean and sample (n - 1) standard deviation; the deviation is 0 for one value.
pub fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() == 1 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
