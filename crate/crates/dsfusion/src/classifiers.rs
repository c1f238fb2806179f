//! Small deterministic classifiers that emit score matrices.
//!
//! They exist so the harness can run without an external model zoo; any
//! classifier that writes a score CSV can take their place.

use std::fmt;
use std::str::FromStr;

use dsfusion_core::boe::{ConfusionMatrix, ScoreMatrix};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierSpec {
    /// Majority vote of the `k` nearest training samples (Euclidean).
    Knn { k: usize },
    /// Softmin over the distances to the class means.
    NearestCentroid,
    /// One-vs-rest logistic regression on standardized features.
    LogisticLinear { ridge: f64 },
}

impl ClassifierSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ClassifierSpec::Knn { k } if k == 0 || k % 2 == 0 => {
                Err(Error::Classifier(format!("k must be odd and positive, got {k}")))
            }
            ClassifierSpec::LogisticLinear { ridge } if !(ridge >= 0.0 && ridge.is_finite()) => {
                Err(Error::Classifier(format!("ridge must be non-negative, got {ridge}")))
            }
            _ => Ok(()),
        }
    }

    /// The classifier pool of the benchmark defaults: kNN with k = 5..15 plus
    /// the two other built-ins.
    pub fn default_pool() -> Vec<ClassifierSpec> {
        let mut pool: Vec<ClassifierSpec> = [5, 7, 9, 11, 13, 15]
            .into_iter()
            .map(|k| ClassifierSpec::Knn { k })
            .collect();
        pool.push(ClassifierSpec::NearestCentroid);
        pool.push(ClassifierSpec::LogisticLinear { ridge: 0.01 });
        pool
    }
}

impl fmt::Display for ClassifierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassifierSpec::Knn { k } => write!(f, "knn{k}"),
            ClassifierSpec::NearestCentroid => f.write_str("centroid"),
            ClassifierSpec::LogisticLinear { ridge } => write!(f, "logistic{ridge}"),
        }
    }
}

/// Parses `knn5`, `knn:5`, `centroid`, `logistic`, `logistic:0.1`.
impl FromStr for ClassifierSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Classifier(format!("cannot parse classifier spec {s:?}"));
        let spec = if let Some(rest) = s.strip_prefix("knn") {
            let k = rest.trim_start_matches(':').parse().map_err(|_| bad())?;
            ClassifierSpec::Knn { k }
        } else if s == "centroid" || s == "nearest_centroid" {
            ClassifierSpec::NearestCentroid
        } else if let Some(rest) = s.strip_prefix("logistic") {
            let rest = rest.trim_start_matches(':');
            let ridge = if rest.is_empty() {
                0.01
            } else {
                rest.parse().map_err(|_| bad())?
            };
            ClassifierSpec::LogisticLinear { ridge }
        } else {
            return Err(bad());
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone)]
pub struct TrainedClassifier {
    spec: ClassifierSpec,
    classes: Vec<String>,
    n_features: usize,
    model: Model,
}

#[derive(Debug, Clone)]
enum Model {
    Knn { k: usize, train: Dataset },
    Centroid { centroids: Vec<Vec<f64>> },
    Logistic { mean: Vec<f64>, scale: Vec<f64>, coef: Vec<Vec<f64>> },
}

const LOGISTIC_EPOCHS: usize = 400;
const LOGISTIC_RATE: f64 = 0.5;

pub fn train(spec: &ClassifierSpec, data: &Dataset) -> Result<TrainedClassifier> {
    spec.validate()?;
    let counts = data.class_counts();
    if let Some(missing) = counts.iter().position(|&c| c == 0) {
        return Err(Error::Classifier(format!(
            "class {:?} has no training samples",
            data.classes()[missing]
        )));
    }
    let model = match *spec {
        ClassifierSpec::Knn { k } => {
            if k > data.n_samples() {
                return Err(Error::Classifier(format!(
                    "k = {k} exceeds {} training samples",
                    data.n_samples()
                )));
            }
            Model::Knn {
                k,
                train: data.clone(),
            }
        }
        ClassifierSpec::NearestCentroid => {
            let mut centroids = vec![vec![0.0; data.n_features()]; data.n_classes()];
            for (row, &l) in data.rows().zip(data.labels()) {
                for (c, x) in centroids[l].iter_mut().zip(row) {
                    *c += x;
                }
            }
            for (c, &n) in centroids.iter_mut().zip(&counts) {
                c.iter_mut().for_each(|v| *v /= n as f64);
            }
            Model::Centroid { centroids }
        }
        ClassifierSpec::LogisticLinear { ridge } => train_logistic(data, ridge),
    };
    Ok(TrainedClassifier {
        spec: spec.clone(),
        classes: data.classes().to_vec(),
        n_features: data.n_features(),
        model,
    })
}

fn train_logistic(data: &Dataset, ridge: f64) -> Model {
    let n = data.n_samples() as f64;
    let nf = data.n_features();
    let mut mean = vec![0.0; nf];
    for row in data.rows() {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x / n;
        }
    }
    let mut scale = vec![0.0; nf];
    for row in data.rows() {
        for ((s, x), m) in scale.iter_mut().zip(row).zip(&mean) {
            *s += (x - m) * (x - m) / n;
        }
    }
    let scale: Vec<f64> = scale
        .into_iter()
        .map(|v| if v > 0.0 { 1.0 / v.sqrt() } else { 0.0 })
        .collect();
    let xs: Vec<Vec<f64>> = data.rows().map(|r| standardize(r, &mean, &scale)).collect();

    // full-batch gradient descent from zero, one binary model per class
    let coef = (0..data.n_classes())
        .map(|class| {
            let mut w = vec![0.0; nf + 1];
            for _ in 0..LOGISTIC_EPOCHS {
                let mut grad = vec![0.0; nf + 1];
                for (x, &l) in xs.iter().zip(data.labels()) {
                    let target = if l == class { 1.0 } else { 0.0 };
                    let err = sigmoid(linear(&w, x)) - target;
                    grad[nf] += err;
                    for (g, xi) in grad.iter_mut().zip(x) {
                        *g += err * xi;
                    }
                }
                for j in 0..=nf {
                    let penalty = if j < nf { ridge * w[j] } else { 0.0 };
                    w[j] -= LOGISTIC_RATE * (grad[j] / n + penalty);
                }
            }
            w
        })
        .collect();
    Model::Logistic { mean, scale, coef }
}

fn standardize(row: &[f64], mean: &[f64], scale: &[f64]) -> Vec<f64> {
    row.iter()
        .zip(mean)
        .zip(scale)
        .map(|((x, m), s)| (x - m) * s)
        .collect()
}

/// Weights first, bias last.
fn linear(w: &[f64], x: &[f64]) -> f64 {
    w[x.len()] + w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl TrainedClassifier {
    pub fn spec(&self) -> &ClassifierSpec {
        &self.spec
    }

    pub fn id(&self) -> String {
        self.spec.to_string()
    }

    pub fn score(&self, data: &Dataset) -> Result<ScoreMatrix> {
        if data.n_features() != self.n_features {
            return Err(Error::Shape(format!(
                "{} was trained on {} features, got {}",
                self.id(),
                self.n_features,
                data.n_features()
            )));
        }
        let rows = data.rows().map(|x| self.score_row(x)).collect();
        Ok(ScoreMatrix::new(self.id(), self.classes.clone(), rows)?)
    }

    fn score_row(&self, x: &[f64]) -> Vec<f64> {
        let n_c = self.classes.len();
        match &self.model {
            Model::Knn { k, train } => {
                let mut order: Vec<(f64, usize)> = train
                    .rows()
                    .enumerate()
                    .map(|(i, r)| (sq_dist(x, r), i))
                    .collect();
                // equal distances resolve to the lower training index
                order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                let mut votes = vec![0.0; n_c];
                for &(_, i) in &order[..*k] {
                    votes[train.labels()[i]] += 1.0;
                }
                votes.iter().map(|v| v / *k as f64).collect()
            }
            Model::Centroid { centroids } => {
                let d: Vec<f64> = centroids.iter().map(|c| sq_dist(x, c).sqrt()).collect();
                let min = d.iter().copied().fold(f64::INFINITY, f64::min);
                let e: Vec<f64> = d.iter().map(|v| (min - v).exp()).collect();
                let total: f64 = e.iter().sum();
                e.iter().map(|v| v / total).collect()
            }
            Model::Logistic { mean, scale, coef } => {
                let z = standardize(x, mean, scale);
                coef.iter().map(|w| sigmoid(linear(w, &z))).collect()
            }
        }
    }

    pub fn predict(&self, data: &Dataset) -> Result<Vec<usize>> {
        Ok(self.score(data)?.argmax())
    }

    /// Argmax predictions against the labels of `data`.
    pub fn confusion(&self, data: &Dataset) -> Result<ConfusionMatrix> {
        let predicted = self.predict(data)?;
        Ok(ConfusionMatrix::from_predictions(
            self.classes.len(),
            &predicted,
            data.labels(),
        )?)
    }
}
