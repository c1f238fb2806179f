//! From classifier outputs to bodies of evidence.
//!
//! A classifier's score row `ŷ` is discounted per class by a weight vector
//! `w` taken from its confusion matrix. Sample `i` then has mass `w_k ŷ_k` on
//! each singleton `{E_k}` and the remainder on the whole frame, which stands
//! for the classifier's ignorance.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::mass::{Frame, MassFunction};
use crate::MASS_SUM_TOLERANCE;

/// Counts `N[i][k]` of samples predicted as class `i` whose true class is `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    n: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    /// `rows[i][k]`: predicted `i`, true `k`.
    pub fn new(rows: Vec<Vec<u64>>) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::InvalidConfusion(format!("need at least 2 classes, got {n}")));
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != n) {
            return Err(Error::InvalidConfusion(format!(
                "row {bad} has {} entries, expected {n}",
                rows[bad].len()
            )));
        }
        let counts: Vec<u64> = rows.into_iter().flatten().collect();
        if counts.iter().all(|&c| c == 0) {
            return Err(Error::InvalidConfusion("matrix has no samples".into()));
        }
        Ok(ConfusionMatrix { n, counts })
    }

    /// Tallies `(predicted, truth)` pairs over `n_classes` classes.
    pub fn from_predictions(n_classes: usize, predicted: &[usize], truth: &[usize]) -> Result<Self> {
        if predicted.len() != truth.len() {
            return Err(Error::InvalidConfusion(format!(
                "{} predictions for {} labels",
                predicted.len(),
                truth.len()
            )));
        }
        let mut rows = vec![vec![0u64; n_classes]; n_classes];
        for (&p, &t) in predicted.iter().zip(truth) {
            if p >= n_classes || t >= n_classes {
                return Err(Error::InvalidConfusion(format!(
                    "class index out of range: predicted {p}, truth {t}"
                )));
            }
            rows[p][t] += 1;
        }
        ConfusionMatrix::new(rows)
    }

    pub fn n_classes(&self) -> usize {
        self.n
    }

    pub fn get(&self, predicted: usize, truth: usize) -> u64 {
        self.counts[predicted * self.n + truth]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u64]> {
        self.counts.chunks(self.n)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Fraction of samples on the diagonal.
    pub fn accuracy(&self) -> f64 {
        let trace: u64 = (0..self.n).map(|k| self.get(k, k)).sum();
        trace as f64 / self.total() as f64
    }

    /// `Pre_k = N_kk / Σ_i N_ik`. A zero denominator yields 0.
    pub fn precision(&self) -> Vec<f64> {
        (0..self.n)
            .map(|k| {
                let col: u64 = (0..self.n).map(|i| self.get(i, k)).sum();
                ratio(self.get(k, k), col, "precision", k)
            })
            .collect()
    }

    /// `Rec_k = N_kk / Σ_j N_kj`. A zero denominator yields 0.
    pub fn recall(&self) -> Vec<f64> {
        (0..self.n)
            .map(|k| {
                let row: u64 = (0..self.n).map(|j| self.get(k, j)).sum();
                ratio(self.get(k, k), row, "recall", k)
            })
            .collect()
    }
}

fn ratio(num: u64, den: u64, what: &str, class: usize) -> f64 {
    if den == 0 {
        log::warn!("{what} of class {class} has a zero denominator; using 0");
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Dempster's rule for two Bayesian masses `(a, 1-a)` and `(b, 1-b)` on the
/// frame {reliable, unreliable}; returns the combined mass on "reliable".
pub fn scalar_dempster(a: f64, b: f64) -> Result<f64> {
    for v in [a, b] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidWeights(format!("{v} is not in [0, 1]")));
        }
    }
    let agree = a * b;
    let den = agree + (1.0 - a) * (1.0 - b);
    if den <= 0.0 {
        return Err(Error::TotalConflict { k: 1.0, left: 0, right: 1 });
    }
    Ok(agree / den)
}

/// The six confusion-matrix weightings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WeightScheme {
    /// All ones.
    W0,
    /// Overall accuracy on every class.
    W1,
    /// Per-class precision.
    W2,
    /// Per-class recall.
    W3,
    /// Precision ⊕ recall.
    W4,
    /// Accuracy ⊕ precision.
    W5,
}

impl WeightScheme {
    pub const ALL: [WeightScheme; 6] = [
        WeightScheme::W0,
        WeightScheme::W1,
        WeightScheme::W2,
        WeightScheme::W3,
        WeightScheme::W4,
        WeightScheme::W5,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w{}", self.index())
    }
}

impl FromStr for WeightScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let idx = s
            .trim()
            .strip_prefix(['w', 'W', 'p', 'P'])
            .and_then(|d| d.parse::<usize>().ok());
        match idx {
            Some(i) if i < 6 => Ok(WeightScheme::ALL[i]),
            _ => Err(Error::InvalidWeights(format!("unknown weighting scheme {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    pub scheme: WeightScheme,
    values: Vec<f64>,
}

impl WeightVector {
    pub fn new(scheme: WeightScheme, values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidWeights(format!("weight {v} is not in [0, 1]")));
        }
        Ok(WeightVector { scheme, values })
    }

    pub fn ones(n_classes: usize) -> Self {
        WeightVector {
            scheme: WeightScheme::W0,
            values: vec![1.0; n_classes],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

pub fn build_weight(scheme: WeightScheme, cm: &ConfusionMatrix) -> Result<WeightVector> {
    let n = cm.n_classes();
    let values = match scheme {
        WeightScheme::W0 => vec![1.0; n],
        WeightScheme::W1 => vec![cm.accuracy(); n],
        WeightScheme::W2 => cm.precision(),
        WeightScheme::W3 => cm.recall(),
        WeightScheme::W4 => cm
            .precision()
            .into_iter()
            .zip(cm.recall())
            .map(|(p, r)| scalar_dempster(p, r))
            .collect::<Result<_>>()?,
        WeightScheme::W5 => {
            let acc = cm.accuracy();
            cm.precision()
                .into_iter()
                .map(|p| scalar_dempster(acc, p))
                .collect::<Result<_>>()?
        }
    };
    WeightVector::new(scheme, values)
}

/// Row-normalized classifier outputs, one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    pub classifier_id: String,
    classes: Vec<String>,
    data: Vec<f64>,
}

impl ScoreMatrix {
    /// Negative scores are clamped to 0, then each row is scaled to sum to 1.
    /// A row with nothing left becomes uniform.
    pub fn new(classifier_id: impl Into<String>, classes: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_c = classes.len();
        if n_c == 0 {
            return Err(Error::InvalidScores("no classes".into()));
        }
        let mut data = Vec::with_capacity(rows.len() * n_c);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n_c {
                return Err(Error::InvalidScores(format!(
                    "row {i} has {} scores, expected {n_c}",
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::InvalidScores(format!("row {i} contains {v}")));
            }
            let clamped: Vec<f64> = row.into_iter().map(|v| v.max(0.0)).collect();
            let sum: f64 = clamped.iter().sum();
            if sum > 0.0 {
                data.extend(clamped.iter().map(|v| v / sum));
            } else {
                data.extend(core::iter::repeat(1.0 / n_c as f64).take(n_c));
            }
        }
        Ok(ScoreMatrix {
            classifier_id: classifier_id.into(),
            classes,
            data,
        })
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn n_samples(&self) -> usize {
        self.data.len() / self.classes.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.classes.len();
        &self.data[i * n..(i + 1) * n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.classes.len())
    }

    /// Index of the largest score per sample; ties go to the lowest index.
    pub fn argmax(&self) -> Vec<usize> {
        self.rows().map(argmax).collect()
    }
}

pub(crate) fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = k;
        }
    }
    best
}

/// One classifier's mass functions, one per sample, over the class frame.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyOfEvidence {
    pub classifier_id: String,
    pub frame: Frame,
    pub per_sample: Vec<MassFunction>,
}

impl BodyOfEvidence {
    pub fn new(classifier_id: impl Into<String>, frame: Frame, per_sample: Vec<MassFunction>) -> Result<Self> {
        if per_sample.iter().any(|m| *m.frame() != frame) {
            return Err(Error::FrameMismatch);
        }
        Ok(BodyOfEvidence {
            classifier_id: classifier_id.into(),
            frame,
            per_sample,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.per_sample.len()
    }

    /// Per-sample argmax of the singleton masses.
    pub fn predictions(&self) -> Vec<usize> {
        self.per_sample.iter().map(MassFunction::argmax_singleton).collect()
    }
}

/// `m(E_k) = w_k ŷ_k`, `m(Θ) = 1 - Σ_k w_k ŷ_k`.
pub fn build_boe(scores: &ScoreMatrix, w: &WeightVector) -> Result<BodyOfEvidence> {
    let n_c = scores.n_classes();
    if w.values().len() != n_c {
        return Err(Error::ShapeMismatch(format!(
            "{} weights for {n_c} classes",
            w.values().len()
        )));
    }
    let frame = Frame::new(scores.classes().iter().cloned())?;
    let mut per_sample = Vec::with_capacity(scores.n_samples());
    let mut singles = vec![0.0; n_c];
    for (i, row) in scores.rows().enumerate() {
        for ((s, &wk), &y) in singles.iter_mut().zip(w.values()).zip(row) {
            *s = wk * y;
            if !(0.0..=1.0).contains(s) {
                return Err(Error::InvalidMass {
                    bits: 0,
                    value: *s,
                });
            }
        }
        let mut ignorance = 1.0 - singles.iter().sum::<f64>();
        if ignorance < 0.0 {
            if ignorance < -MASS_SUM_TOLERANCE {
                return Err(Error::InvalidScores(format!(
                    "sample {i}: weighted scores exceed 1 by {}",
                    -ignorance
                )));
            }
            ignorance = 0.0;
        }
        per_sample.push(MassFunction::from_singletons(frame.clone(), &singles, ignorance)?);
    }
    Ok(BodyOfEvidence {
        classifier_id: scores.classifier_id.clone(),
        frame,
        per_sample,
    })
}
