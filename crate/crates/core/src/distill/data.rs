use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Distance between the two classes that share a group centre.
const SIBLING_GAP: f64 = 2.0;
/// Norm of each group centre.
const GROUP_RADIUS: f64 = 4.0;
const TRAIN_FRACTION: f64 = 0.8;

const NOISE_STREAM: u64 = 0x6e6f697365;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

/// Row-major `n x dims` inputs with one label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<S> {
    pub inputs: Vec<S>,
    pub labels: Vec<usize>,
    pub dims: usize,
    pub classes: usize,
    pub split: Split,
}

impl<S: Scalar> Dataset<S> {
    pub fn new(inputs: Vec<S>, labels: Vec<usize>, dims: usize, classes: usize, split: Split) -> Result<Self> {
        if dims == 0 || inputs.len() != labels.len() * dims {
            return Err(Error::Shape {
                context: "dataset inputs",
                expected: labels.len() * dims,
                found: inputs.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
            return Err(Error::LabelOutOfRange { label: bad, classes });
        }
        Ok(Dataset {
            inputs,
            labels,
            dims,
            classes,
            split,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.inputs[i * self.dims..(i + 1) * self.dims]
    }

    /// Copies the rows at `indices` into one contiguous batch.
    pub fn gather(&self, indices: &[usize]) -> (Vec<S>, Vec<usize>) {
        let mut x = Vec::with_capacity(indices.len() * self.dims);
        let mut y = Vec::with_capacity(indices.len());
        for &i in indices {
            x.extend_from_slice(self.row(i));
            y.push(self.labels[i]);
        }
        (x, y)
    }

    fn hash_into(&self, hasher: &mut Sha256) {
        for v in &self.inputs {
            hasher.update(v.to_f64_lossy().to_le_bytes());
        }
        for &l in &self.labels {
            hasher.update((l as u64).to_le_bytes());
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataSplits<S> {
    pub train: Dataset<S>,
    pub test: Dataset<S>,
}

impl<S: Scalar> DataSplits<S> {
    pub fn classes(&self) -> usize {
        self.train.classes
    }

    pub fn dims(&self) -> usize {
        self.train.dims
    }

    /// Git-style object hash over both splits: SHA-256 of
    /// `"blob <len>\0" + payload`, where the payload is the little-endian
    /// `f64` inputs followed by `u64` labels, train split first.
    pub fn content_hash(&self) -> String {
        let len = (self.train.inputs.len() + self.test.inputs.len()) * 8
            + (self.train.labels.len() + self.test.labels.len()) * 8;
        let mut hasher = Sha256::new();
        hasher.update(format!("blob {len}\0").as_bytes());
        self.train.hash_into(&mut hasher);
        self.test.hash_into(&mut hasher);
        let digest = hasher.finalize();
        let mut out = String::from("sha256:");
        for b in digest {
            out.push_str(&format!("{b:02x}"));
        }
        out
    }
}

/// Gaussian clusters. Classes come in pairs sharing a group centre, offset
/// by a small gap, so sibling classes overlap and a good classifier still
/// confuses them. With an odd class count the last class has no sibling.
/// Each class gets exactly `n_per_class` points, 80% of which go to train.
pub fn generate_synthetic_dataset<S: Scalar>(
    classes: usize,
    dims: usize,
    n_per_class: usize,
    spread: f64,
    seed: u64,
) -> Result<DataSplits<S>> {
    if classes < 3 {
        return Err(Error::param("classes", format!("must be at least 3, got {classes}")));
    }
    if dims < 2 {
        return Err(Error::param("dims", format!("must be at least 2, got {dims}")));
    }
    if !(spread.is_finite() && spread > 0.0) {
        return Err(Error::param("spread", format!("must be positive, got {spread}")));
    }
    let n_train = (n_per_class as f64 * TRAIN_FRACTION).round() as usize;
    if n_train == 0 || n_train == n_per_class {
        return Err(Error::param(
            "n_per_class",
            format!("{n_per_class} points per class cannot be split 80/20"),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = |rng: &mut ChaCha8Rng| {
        let v: Vec<f64> = (0..dims).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.into_iter().map(|x| x / norm).collect::<Vec<f64>>()
    };
    let mut means = Vec::with_capacity(classes);
    for _ in 0..classes.div_ceil(2) {
        let centre: Vec<f64> = unit(&mut rng).into_iter().map(|x| x * GROUP_RADIUS).collect();
        let offset = unit(&mut rng);
        for sign in [-0.5, 0.5] {
            if means.len() < classes {
                means.push(
                    centre
                        .iter()
                        .zip(&offset)
                        .map(|(c, o)| c + sign * SIBLING_GAP * o)
                        .collect::<Vec<f64>>(),
                );
            }
        }
    }

    let mut train = (Vec::new(), Vec::new());
    let mut test = (Vec::new(), Vec::new());
    for (class, mean) in means.iter().enumerate() {
        let mut points: Vec<Vec<S>> = (0..n_per_class)
            .map(|_| {
                mean.iter()
                    .map(|&m| S::of(m + spread * rng.sample::<f64, _>(StandardNormal)))
                    .collect()
            })
            .collect();
        points.shuffle(&mut rng);
        for (i, p) in points.into_iter().enumerate() {
            let dst = if i < n_train { &mut train } else { &mut test };
            dst.0.extend(p);
            dst.1.push(class);
        }
    }
    Ok(DataSplits {
        train: Dataset::new(train.0, train.1, dims, classes, Split::Train)?,
        test: Dataset::new(test.0, test.1, dims, classes, Split::Test)?,
    })
}

/// Replaces each training label, with probability `ratio`, by a uniformly
/// drawn different class. Test splits are returned unchanged.
pub fn inject_symmetric_noise<S: Scalar>(ds: &Dataset<S>, ratio: f64, seed: u64) -> Result<Dataset<S>> {
    if !(0.0..1.0).contains(&ratio) {
        return Err(Error::param("noise_ratio", format!("must be in [0, 1), got {ratio}")));
    }
    let mut out = ds.clone();
    if ds.split == Split::Test || ratio == 0.0 {
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(NOISE_STREAM);
    for label in out.labels.iter_mut() {
        if rng.random::<f64>() < ratio {
            let other = rng.random_range(0..ds.classes - 1);
            *label = if other >= *label { other + 1 } else { other };
        }
    }
    Ok(out)
}
