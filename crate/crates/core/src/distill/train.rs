use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::data::{inject_symmetric_noise, DataSplits, Dataset};
use super::mlp::{backward, batch_loss, LossConfig, Mlp, MlpShape};
use crate::error::{Error, Result};
use crate::numerics::argmax;
use crate::scalar::Scalar;
use crate::transforms::{apply_in_place, TransformSpec};

const SHUFFLE_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub temperature: f64,
    pub ce_weight: f64,
    pub kd_weight: f64,
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub noise_ratio: f64,
    pub transform: TransformSpec,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            temperature: 4.0,
            ce_weight: 1.0,
            kd_weight: 1.0,
            learning_rate: 0.05,
            momentum: 0.9,
            weight_decay: 5e-4,
            epochs: 30,
            batch_size: 64,
            seed: 0,
            noise_ratio: 0.0,
            transform: TransformSpec::IDENTITY,
        }
    }
}

impl TrainConfig {
    pub fn loss(&self) -> LossConfig {
        LossConfig {
            temperature: self.temperature,
            ce_weight: self.ce_weight,
            kd_weight: self.kd_weight,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be positive, got {v}")))
            }
        };
        let non_negative = |name: &'static str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be non-negative, got {v}")))
            }
        };
        positive("temperature", self.temperature)?;
        positive("learning_rate", self.learning_rate)?;
        non_negative("ce_weight", self.ce_weight)?;
        non_negative("kd_weight", self.kd_weight)?;
        non_negative("weight_decay", self.weight_decay)?;
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::param("momentum", format!("must be in [0, 1), got {}", self.momentum)));
        }
        if !(0.0..1.0).contains(&self.noise_ratio) {
            return Err(Error::param("noise_ratio", format!("must be in [0, 1), got {}", self.noise_ratio)));
        }
        if self.epochs == 0 {
            return Err(Error::param("epochs", "must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::param("batch_size", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_top1: f64,
    pub test_top1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub epochs: Vec<EpochMetrics>,
    pub final_test_top1: f64,
    /// Fraction of training samples whose pre-processed teacher logits rank
    /// the (possibly noisy) training label first. `None` without a teacher.
    pub teacher_correction_rate: Option<f64>,
}

/// Fraction of rows whose argmax equals the label.
pub fn top1<S: Scalar>(model: &Mlp<S>, ds: &Dataset<S>) -> Result<f64> {
    if ds.is_empty() {
        return Ok(0.0);
    }
    let logits = model.logits(&ds.inputs)?;
    let c = model.shape.classes;
    let hits = ds
        .labels
        .iter()
        .enumerate()
        .filter(|&(i, &y)| argmax(&logits[i * c..(i + 1) * c]) == y)
        .count();
    Ok(hits as f64 / ds.len() as f64)
}

/// Teacher logits for `x`, each row pre-processed with its label.
pub fn teacher_targets<S: Scalar>(teacher: &Mlp<S>, x: &[S], labels: &[usize], spec: TransformSpec) -> Result<Vec<S>> {
    let mut z = teacher.logits(x)?;
    if !spec.is_noop() {
        let c = teacher.shape.classes;
        for (row, &y) in z.chunks_exact_mut(c).zip(labels) {
            apply_in_place(spec, row, y)?;
        }
    }
    Ok(z)
}

/// Share of rows where the label's logit is the row maximum. Ties at the
/// maximum count as corrected.
pub fn correction_rate<S: Scalar>(targets: &[S], labels: &[usize], classes: usize) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let hits = targets
        .chunks_exact(classes)
        .zip(labels)
        .filter(|(row, &y)| row.iter().all(|v| *v <= row[y]))
        .count();
    hits as f64 / labels.len() as f64
}

/// Mini-batch SGD with momentum and weight decay on
/// `ce_weight * CE + kd_weight * T^2 * KL`, against a frozen teacher when
/// one is given. Label noise (if any) is injected into the training split
/// first, and the transform sees the noisy labels.
pub fn train<S: Scalar>(
    hidden: usize,
    data: &DataSplits<S>,
    cfg: &TrainConfig,
    teacher: Option<&Mlp<S>>,
) -> Result<(Mlp<S>, RunMetrics)> {
    cfg.validate()?;
    let shape = MlpShape {
        inputs: data.dims(),
        hidden,
        classes: data.classes(),
    };
    if let Some(t) = teacher {
        if t.shape.classes != shape.classes || t.shape.inputs != shape.inputs {
            return Err(Error::Shape {
                context: "teacher output width",
                expected: shape.classes,
                found: t.shape.classes,
            });
        }
    }
    let train_set = inject_symmetric_noise(&data.train, cfg.noise_ratio, cfg.seed)?;
    let loss_cfg = cfg.loss();

    let teacher_correction_rate = match teacher {
        Some(t) => {
            let targets = teacher_targets(t, &train_set.inputs, &train_set.labels, cfg.transform)?;
            Some(correction_rate(&targets, &train_set.labels, shape.classes))
        }
        None => None,
    };

    let mut model = Mlp::init(shape, cfg.seed)?;
    let mut velocity = Mlp::<S>::zeros(shape);
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    shuffle_rng.set_stream(SHUFFLE_STREAM);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let lr = S::of(cfg.learning_rate);
    let mu = S::of(cfg.momentum);
    let wd = S::of(cfg.weight_decay);

    let mut epochs = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut loss_sum = 0.0;
        let mut batches = 0;
        for (b, idx) in order.chunks(cfg.batch_size).enumerate() {
            let (x, y) = train_set.gather(idx);
            let cache = model.forward(&x)?;
            let targets = match teacher {
                Some(t) => Some(teacher_targets(t, &x, &y, cfg.transform)?),
                None => None,
            };
            let loss = batch_loss(&cache, targets.as_deref(), &y, &loss_cfg)?.to_f64_lossy();
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch, batch: b, loss });
            }
            loss_sum += loss;
            batches += 1;
            let grads = backward(&model, &cache, targets.as_deref(), &y, &loss_cfg)?;
            let mut finite = true;
            for ((p, v), g) in model
                .tensors_mut()
                .into_iter()
                .zip(velocity.tensors_mut())
                .zip(grads.tensors())
            {
                for ((pi, vi), &gi) in p.iter_mut().zip(v.iter_mut()).zip(g) {
                    *vi = mu * *vi + gi + wd * *pi;
                    *pi -= lr * *vi;
                    finite &= pi.is_finite();
                }
            }
            if !finite {
                return Err(Error::Diverged { epoch, batch: b, loss });
            }
        }
        epochs.push(EpochMetrics {
            epoch,
            train_loss: loss_sum / batches as f64,
            train_top1: top1(&model, &train_set)?,
            test_top1: top1(&model, &data.test)?,
        });
    }
    let final_test_top1 = epochs.last().map_or(0.0, |e| e.test_top1);
    Ok((
        model,
        RunMetrics {
            epochs,
            final_test_top1,
            teacher_correction_rate,
        },
    ))
}
