//! One-hidden-layer ReLU perceptron with hand-derived gradients for the
//! combined cross-entropy + temperature-scaled KD objective.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{kl_slices, softmax_into};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpShape {
    pub inputs: usize,
    pub hidden: usize,
    pub classes: usize,
}

/// `logits = W2 * relu(W1 * x + b1) + b2`, weights stored row-major
/// (`W1` is `hidden x inputs`, `W2` is `classes x hidden`).
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<S> {
    pub shape: MlpShape,
    pub w1: Vec<S>,
    pub b1: Vec<S>,
    pub w2: Vec<S>,
    pub b2: Vec<S>,
}

/// Gradients, laid out exactly like the parameters of [`Mlp`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<S> {
    pub w1: Vec<S>,
    pub b1: Vec<S>,
    pub w2: Vec<S>,
    pub b2: Vec<S>,
}

impl<S: Scalar> Gradients<S> {
    pub fn zeros(shape: MlpShape) -> Self {
        Gradients {
            w1: vec![S::zero(); shape.hidden * shape.inputs],
            b1: vec![S::zero(); shape.hidden],
            w2: vec![S::zero(); shape.classes * shape.hidden],
            b2: vec![S::zero(); shape.classes],
        }
    }

    pub fn tensors(&self) -> [&[S]; 4] {
        [&self.w1, &self.b1, &self.w2, &self.b2]
    }

    pub fn tensors_mut(&mut self) -> [&mut Vec<S>; 4] {
        [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2]
    }
}

/// Activations kept from a forward pass for the matching backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache<S> {
    pub batch: usize,
    pub inputs: Vec<S>,
    pub pre_activation: Vec<S>,
    pub hidden: Vec<S>,
    pub logits: Vec<S>,
}

impl<S> ForwardCache<S> {
    pub fn logits_row(&self, i: usize, classes: usize) -> &[S] {
        &self.logits[i * classes..(i + 1) * classes]
    }
}

/// Loss hyperparameters: `ce_weight * CE(z_stu) + kd_weight * T^2 * KL(p_tea^T || p_stu^T)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub temperature: f64,
    pub ce_weight: f64,
    pub kd_weight: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            temperature: 4.0,
            ce_weight: 1.0,
            kd_weight: 1.0,
        }
    }
}

impl<S: Scalar> Mlp<S> {
    pub fn zeros(shape: MlpShape) -> Self {
        let g = Gradients::zeros(shape);
        Mlp {
            shape,
            w1: g.w1,
            b1: g.b1,
            w2: g.w2,
            b2: g.b2,
        }
    }

    /// He-normal first layer, `1/sqrt(fan_in)` output layer, zero biases.
    pub fn init(shape: MlpShape, seed: u64) -> Result<Self> {
        if shape.inputs == 0 || shape.hidden == 0 || shape.classes < 2 {
            return Err(Error::param("model shape", format!("{shape:?}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = Self::zeros(shape);
        let s1 = (2.0 / shape.inputs as f64).sqrt();
        let s2 = (1.0 / shape.hidden as f64).sqrt();
        for w in m.w1.iter_mut() {
            *w = S::of(s1 * rng.sample::<f64, _>(StandardNormal));
        }
        for w in m.w2.iter_mut() {
            *w = S::of(s2 * rng.sample::<f64, _>(StandardNormal));
        }
        Ok(m)
    }

    pub fn tensors(&self) -> [&[S]; 4] {
        [&self.w1, &self.b1, &self.w2, &self.b2]
    }

    pub fn tensors_mut(&mut self) -> [&mut Vec<S>; 4] {
        [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2]
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    /// `x` holds a row-major batch of `x.len() / inputs` samples.
    pub fn forward(&self, x: &[S]) -> Result<ForwardCache<S>> {
        let MlpShape { inputs, hidden, classes } = self.shape;
        if !x.len().is_multiple_of(inputs) {
            return Err(Error::Shape {
                context: "forward input width",
                expected: inputs,
                found: x.len() % inputs,
            });
        }
        let batch = x.len() / inputs;
        let mut pre = vec![S::zero(); batch * hidden];
        let mut act = vec![S::zero(); batch * hidden];
        let mut logits = vec![S::zero(); batch * classes];
        for n in 0..batch {
            let xr = &x[n * inputs..(n + 1) * inputs];
            for h in 0..hidden {
                let w = &self.w1[h * inputs..(h + 1) * inputs];
                let mut a = self.b1[h];
                for (wi, xi) in w.iter().zip(xr) {
                    a += *wi * *xi;
                }
                pre[n * hidden + h] = a;
                act[n * hidden + h] = a.max(S::zero());
            }
            let hr = &act[n * hidden..(n + 1) * hidden];
            for c in 0..classes {
                let w = &self.w2[c * hidden..(c + 1) * hidden];
                let mut a = self.b2[c];
                for (wi, hi) in w.iter().zip(hr) {
                    a += *wi * *hi;
                }
                logits[n * classes + c] = a;
            }
        }
        Ok(ForwardCache {
            batch,
            inputs: x.to_vec(),
            pre_activation: pre,
            hidden: act,
            logits,
        })
    }

    pub fn logits(&self, x: &[S]) -> Result<Vec<S>> {
        self.forward(x).map(|c| c.logits)
    }
}

fn check_batch<S>(cache: &ForwardCache<S>, teacher: Option<&[S]>, labels: &[usize], classes: usize) -> Result<()> {
    if labels.len() != cache.batch {
        return Err(Error::Shape {
            context: "labels per batch",
            expected: cache.batch,
            found: labels.len(),
        });
    }
    if let Some(t) = teacher {
        if t.len() != cache.logits.len() {
            return Err(Error::Shape {
                context: "teacher logits",
                expected: cache.logits.len(),
                found: t.len(),
            });
        }
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
        return Err(Error::LabelOutOfRange { label: bad, classes });
    }
    Ok(())
}

/// Per-sample objective. `z_tea` must already be pre-processed; without a
/// teacher only the cross-entropy term remains.
pub fn total_loss<S: Scalar>(z_stu: &[S], z_tea: Option<&[S]>, y: usize, cfg: &LossConfig) -> Result<S> {
    let c = z_stu.len();
    if y >= c {
        return Err(Error::LabelOutOfRange { label: y, classes: c });
    }
    let mut p = vec![S::zero(); c];
    softmax_into(z_stu, S::one(), &mut p);
    let mut loss = S::of(cfg.ce_weight) * -p[y].max(S::prob_floor()).ln();
    if let Some(zt) = z_tea {
        if zt.len() != c {
            return Err(Error::LengthMismatch { left: zt.len(), right: c });
        }
        if cfg.kd_weight != 0.0 {
            let t = S::of(cfg.temperature);
            let mut ps = vec![S::zero(); c];
            let mut pt = vec![S::zero(); c];
            softmax_into(z_stu, t, &mut ps);
            softmax_into(zt, t, &mut pt);
            loss += S::of(cfg.kd_weight) * t * t * kl_slices(&pt, &ps);
        }
    }
    Ok(loss)
}

/// Mean of [`total_loss`] over the batch held in `cache`.
pub fn batch_loss<S: Scalar>(
    cache: &ForwardCache<S>,
    z_tea: Option<&[S]>,
    labels: &[usize],
    cfg: &LossConfig,
) -> Result<S> {
    let classes = cache.logits.len() / cache.batch.max(1);
    check_batch(cache, z_tea, labels, classes)?;
    let mut total = S::zero();
    for (n, &y) in labels.iter().enumerate() {
        let zt = z_tea.map(|t| &t[n * classes..(n + 1) * classes]);
        total += total_loss(cache.logits_row(n, classes), zt, y, cfg)?;
    }
    Ok(total / S::of(cache.batch as f64))
}

/// Gradient of [`batch_loss`] with respect to every parameter.
///
/// At the logits, the KD term contributes `kd_weight * T * (p_stu^T - p_tea^T)`
/// and the cross-entropy term `ce_weight * (p_stu - onehot(y))`.
pub fn backward<S: Scalar>(
    model: &Mlp<S>,
    cache: &ForwardCache<S>,
    z_tea: Option<&[S]>,
    labels: &[usize],
    cfg: &LossConfig,
) -> Result<Gradients<S>> {
    let MlpShape { inputs, hidden, classes } = model.shape;
    if cache.logits.len() != cache.batch * classes || cache.inputs.len() != cache.batch * inputs {
        return Err(Error::Shape {
            context: "forward cache",
            expected: cache.batch * classes,
            found: cache.logits.len(),
        });
    }
    check_batch(cache, z_tea, labels, classes)?;

    let scale = S::one() / S::of(cache.batch as f64);
    let ce_w = S::of(cfg.ce_weight);
    let kd_w = S::of(cfg.kd_weight);
    let t = S::of(cfg.temperature);
    let mut g = Gradients::zeros(model.shape);
    let mut dz = vec![S::zero(); classes];
    let mut p = vec![S::zero(); classes];
    let mut ps = vec![S::zero(); classes];
    let mut pt = vec![S::zero(); classes];
    let mut dh = vec![S::zero(); hidden];

    for (n, &y) in labels.iter().enumerate() {
        let z = cache.logits_row(n, classes);
        softmax_into(z, S::one(), &mut p);
        for c in 0..classes {
            dz[c] = ce_w * p[c];
        }
        dz[y] -= ce_w;
        if let Some(teacher) = z_tea {
            if cfg.kd_weight != 0.0 {
                softmax_into(z, t, &mut ps);
                softmax_into(&teacher[n * classes..(n + 1) * classes], t, &mut pt);
                for c in 0..classes {
                    dz[c] += kd_w * t * (ps[c] - pt[c]);
                }
            }
        }
        for d in dz.iter_mut() {
            *d *= scale;
        }

        let h_row = &cache.hidden[n * hidden..(n + 1) * hidden];
        for c in 0..classes {
            g.b2[c] += dz[c];
            let gw = &mut g.w2[c * hidden..(c + 1) * hidden];
            for (gwi, &hi) in gw.iter_mut().zip(h_row) {
                *gwi += dz[c] * hi;
            }
        }
        for (h, dhh) in dh.iter_mut().enumerate() {
            let mut acc = S::zero();
            for c in 0..classes {
                acc += model.w2[c * hidden + h] * dz[c];
            }
            *dhh = if cache.pre_activation[n * hidden + h] > S::zero() {
                acc
            } else {
                S::zero()
            };
        }
        let x_row = &cache.inputs[n * inputs..(n + 1) * inputs];
        for (h, &d) in dh.iter().enumerate() {
            if d == S::zero() {
                continue;
            }
            g.b1[h] += d;
            let gw = &mut g.w1[h * inputs..(h + 1) * inputs];
            for (gwi, &xi) in gw.iter_mut().zip(x_row) {
                *gwi += d * xi;
            }
        }
    }
    Ok(g)
}

/// Central-difference estimate of every parameter gradient of
/// [`batch_loss`], perturbing one parameter at a time by `±h`.
pub fn finite_difference_gradients<S: Scalar>(
    model: &Mlp<S>,
    x: &[S],
    z_tea: Option<&[S]>,
    labels: &[usize],
    cfg: &LossConfig,
    h: S,
) -> Result<Gradients<S>> {
    let mut probe = model.clone();
    let mut g = Gradients::zeros(model.shape);
    let two_h = h + h;
    for (k, out) in [&mut g.w1, &mut g.b1, &mut g.w2, &mut g.b2].into_iter().enumerate() {
        for i in 0..out.len() {
            let orig = probe.tensors()[k][i];
            probe.tensors_mut()[k][i] = orig + h;
            let up = batch_loss(&probe.forward(x)?, z_tea, labels, cfg)?;
            probe.tensors_mut()[k][i] = orig - h;
            let down = batch_loss(&probe.forward(x)?, z_tea, labels, cfg)?;
            probe.tensors_mut()[k][i] = orig;
            out[i] = (up - down) / two_h;
        }
    }
    Ok(g)
}
