//! Desk-scale teacher/student harness: synthetic data, a small MLP with
//! hand-written gradients, SGD training and an experiment grid.

pub mod data;
pub mod mlp;
pub mod suite;
pub mod train;

pub use data::{generate_synthetic_dataset, inject_symmetric_noise, DataSplits, Dataset, Split};
pub use mlp::{backward, batch_loss, finite_difference_gradients, total_loss, ForwardCache, Gradients, LossConfig, Mlp, MlpShape};
pub use suite::{
    run_experiment_suite, DatasetConfig, ExperimentConfig, Method, ModelConfig, RunRow, SuiteOutcome, SummaryRow, TeacherReport,
};
pub use train::{train, EpochMetrics, RunMetrics, TrainConfig};
