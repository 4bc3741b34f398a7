//! Label-guided sort and swap pre-processing of teacher logits for knowledge
//! distillation, the classical KD loss, brute-force reference
//! implementations, and a small teacher/student harness to exercise them.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which is what the tooling uses.

pub mod distill;
pub mod error;
pub mod numerics;
pub mod oracle;
pub mod scalar;
pub mod transforms;

pub use error::{Error, Result};
pub use numerics::{
    cross_entropy, kd_loss, kl_divergence, softmax, Label, Logits, Probs, Temperature,
};
pub use scalar::Scalar;
pub use transforms::{
    apply_transform, descending_argsort, modified_logit, one_hot_mask, sort_transform,
    swap_transform, zscore_standardize, RankPermutation, TransformKind, TransformSpec,
};

pub type LogitVector = Logits<f64>;
pub type ProbVector = Probs<f64>;
pub type Temp = Temperature<f64>;
pub type MlpModel = distill::Mlp<f64>;
pub type Dataset = distill::Dataset<f64>;
