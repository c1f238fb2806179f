use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Labelled feature matrix, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    classes: Vec<String>,
    n_features: usize,
    features: Vec<f64>,
    labels: Vec<usize>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        classes: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: Vec<usize>,
    ) -> Result<Self> {
        let n_features = rows.first().map_or(0, Vec::len);
        if n_features == 0 {
            return Err(Error::Dataset("no features".into()));
        }
        if rows.len() != labels.len() {
            return Err(Error::Dataset(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        if let Some(i) = rows.iter().position(|r| r.len() != n_features) {
            return Err(Error::Dataset(format!(
                "row {i} has {} features, expected {n_features}",
                rows[i].len()
            )));
        }
        if let Some(&l) = labels.iter().find(|&&l| l >= classes.len()) {
            return Err(Error::Dataset(format!("label {l} outside {} classes", classes.len())));
        }
        Ok(Dataset {
            name: name.into(),
            classes,
            n_features,
            features: rows.into_iter().flatten().collect(),
            labels,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.features.chunks(self.n_features)
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes.len()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Majority count over minority count, among classes that occur.
    pub fn imbalance_ratio(&self) -> f64 {
        let counts: Vec<usize> = self.class_counts().into_iter().filter(|&c| c > 0).collect();
        match (counts.iter().max(), counts.iter().min()) {
            (Some(&max), Some(&min)) => max as f64 / min as f64,
            _ => 1.0,
        }
    }

    /// Least frequent class; ties go to the highest index.
    pub fn minority_class(&self) -> usize {
        let counts = self.class_counts();
        let mut best = 0;
        for (k, &c) in counts.iter().enumerate() {
            if c <= counts[best] {
                best = k;
            }
        }
        best
    }

    /// Samples at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.n_features);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        Dataset {
            name: self.name.clone(),
            classes: self.classes.clone(),
            n_features: self.n_features,
            features,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// Same samples and labels with a new feature matrix of the same shape.
    pub fn with_features(&self, features: Vec<f64>) -> Result<Dataset> {
        if features.len() != self.features.len() {
            return Err(Error::Dataset("feature matrix shape changed".into()));
        }
        Ok(Dataset {
            features,
            ..self.clone()
        })
    }

    pub(crate) fn features(&self) -> &[f64] {
        &self.features
    }
}

/// Two Gaussian classes whose means are `separation` standard deviations
/// apart along every feature axis.
#[derive(Debug, Clone, PartialEq)]
pub struct BlobSpec {
    pub per_class: [usize; 2],
    pub n_features: usize,
    pub separation: f64,
    pub seed: u64,
}

impl Default for BlobSpec {
    fn default() -> Self {
        BlobSpec {
            per_class: [200, 100],
            n_features: 4,
            separation: 1.0,
            seed: 7,
        }
    }
}

pub const BLOB_CLASSES: [&str; 2] = ["healthy", "defect"];

pub fn two_blobs(spec: &BlobSpec) -> Result<Dataset> {
    if spec.n_features == 0 || spec.per_class.contains(&0) {
        return Err(Error::Dataset("two_blobs needs features and samples in both classes".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    // interleave classes so any prefix of the file is mixed
    let total: usize = spec.per_class.iter().sum();
    let mut emitted = [0usize; 2];
    for n in 0..total {
        let class = if emitted[1] * total < spec.per_class[1] * n && emitted[1] < spec.per_class[1] {
            1
        } else if emitted[0] < spec.per_class[0] {
            0
        } else {
            1
        };
        emitted[class] += 1;
        let mean = class as f64 * spec.separation;
        let row: Vec<f64> = (0..spec.n_features)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                mean + z
            })
            .collect();
        rows.push(row);
        labels.push(class);
    }
    Dataset::new(
        format!("two-blobs-{}x{}", total, spec.n_features),
        BLOB_CLASSES.iter().map(|s| s.to_string()).collect(),
        rows,
        labels,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn imbalance_and_minority() {
        let ds = two_blobs(&BlobSpec {
            per_class: [60, 20],
            ..Default::default()
        })
        .unwrap();
        assert_eq!(ds.class_counts(), vec![60, 20]);
        assert_eq!(ds.imbalance_ratio(), 3.0);
        assert_eq!(ds.minority_class(), 1);

        let balanced = two_blobs(&BlobSpec {
            per_class: [100, 100],
            ..Default::default()
        })
        .unwrap();
        assert_eq!(balanced.imbalance_ratio(), 1.0);
        assert_eq!(balanced.minority_class(), 1);
    }

    #[test]
    fn blobs_are_deterministic() {
        let a = two_blobs(&BlobSpec::default()).unwrap();
        let b = two_blobs(&BlobSpec::default()).unwrap();
        assert_eq!(a, b);
        let c = two_blobs(&BlobSpec {
            seed: 8,
            ..Default::default()
        })
        .unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn shape_validation() {
        let classes = vec!["a".to_string(), "b".to_string()];
        assert!(Dataset::new("x", classes.clone(), vec![vec![1.0], vec![1.0, 2.0]], vec![0, 1]).is_err());
        assert!(Dataset::new("x", classes.clone(), vec![vec![1.0]], vec![2]).is_err());
        assert!(Dataset::new("x", classes.clone(), vec![vec![1.0]], vec![0, 1]).is_err());
        assert!(Dataset::new("x", classes, vec![], vec![]).is_err());
    }

    #[test]
    fn subset_keeps_rows() {
        let ds = two_blobs(&BlobSpec::default()).unwrap();
        let s = ds.subset(&[5, 2]);
        assert_eq!(s.row(0), ds.row(5));
        assert_eq!(s.labels(), &[ds.labels()[5], ds.labels()[2]]);
    }
}
