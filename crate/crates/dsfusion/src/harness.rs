//! Experiment protocol: stratified splits, exhaustive ensemble enumeration,
//! weighting-scheme selection on validation data, repetition statistics and
//! noise sweeps.

use std::collections::BTreeMap;
use std::fmt;

use dsfusion_core::boe::{build_boe, build_weight, BodyOfEvidence, ConfusionMatrix, ScoreMatrix};
use dsfusion_core::{fuse, MassFunction, PipelineConfig, WeightScheme};
use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{train, ClassifierSpec};
use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Largest classifier pool whose subsets are enumerated.
pub const MAX_POOL: usize = 20;

/// Derives an independent seed for `stream` from `root`.
pub fn derive_seed(root: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(root);
    rng.set_stream(stream);
    rng.next_u64()
}

const SPLIT_STREAM: u64 = 1 << 32;
const NOISE_STREAM: u64 = 2 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_frac: f64,
    pub valid_frac: f64,
    pub test_frac: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_frac: 0.50,
            valid_frac: 0.15,
            test_frac: 0.35,
            seed: 0,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let fracs = [self.train_frac, self.valid_frac, self.test_frac];
        if fracs.iter().any(|f| !(*f > 0.0 && *f < 1.0)) {
            return Err(Error::Config(format!("split fractions must lie in (0, 1), got {fracs:?}")));
        }
        if (fracs.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("split fractions must sum to 1, got {fracs:?}")));
        }
        Ok(())
    }
}

/// Sample indices of each partition, sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Splits {
    pub train: Vec<usize>,
    pub valid: Vec<usize>,
    pub test: Vec<usize>,
}

/// Shuffles each class separately and cuts it by the split fractions, so
/// every partition holds at least one sample of every class.
pub fn stratified_split(ds: &Dataset, spec: &SplitSpec) -> Result<Splits> {
    spec.validate()?;
    let mut by_class = vec![Vec::new(); ds.n_classes()];
    for (i, &l) in ds.labels().iter().enumerate() {
        by_class[l].push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut splits = Splits {
        train: Vec::new(),
        valid: Vec::new(),
        test: Vec::new(),
    };
    for (class, mut idx) in by_class.into_iter().enumerate() {
        let n = idx.len();
        if n < 3 {
            return Err(Error::Dataset(format!(
                "class {:?} has {n} samples, at least 3 are needed to split",
                ds.classes()[class]
            )));
        }
        idx.shuffle(&mut rng);
        let n_train = ((n as f64 * spec.train_frac).round() as usize).clamp(1, n - 2);
        let n_valid = ((n as f64 * spec.valid_frac).round() as usize).clamp(1, n - n_train - 1);
        splits.train.extend_from_slice(&idx[..n_train]);
        splits.valid.extend_from_slice(&idx[n_train..n_train + n_valid]);
        splits.test.extend_from_slice(&idx[n_train + n_valid..]);
    }
    splits.train.sort_unstable();
    splits.valid.sort_unstable();
    splits.test.sort_unstable();
    Ok(splits)
}

/// Members of one ensemble as strictly increasing pool indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EnsembleId(Vec<usize>);

impl EnsembleId {
    pub fn new(mut members: Vec<usize>) -> Result<Self> {
        members.sort_unstable();
        members.dedup();
        if members.is_empty() {
            return Err(Error::Config("an ensemble needs at least one member".into()));
        }
        Ok(EnsembleId(members))
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn size(&self) -> usize {
        self.0.len()
    }
}

/// 1-based members joined by `+`, e.g. `1+3+4`.
impl fmt::Display for EnsembleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.iter().map(|i| i + 1).join("+"))
    }
}

/// All non-empty subsets of the pool up to `max_size` members, grouped by
/// size and lexicographic within a size.
pub fn enumerate_ensembles(pool_size: usize, max_size: Option<usize>) -> Result<Vec<EnsembleId>> {
    if pool_size == 0 {
        return Err(Error::Config("classifier pool is empty".into()));
    }
    if pool_size > MAX_POOL {
        return Err(Error::Config(format!(
            "pool of {pool_size} classifiers exceeds the enumeration limit of {MAX_POOL}"
        )));
    }
    let max_size = max_size.unwrap_or(pool_size).min(pool_size);
    Ok((1..=max_size)
        .flat_map(|size| (0..pool_size).combinations(size).map(EnsembleId))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub rms_fraction: f64,
    pub seed: u64,
}

/// Adds zero-mean Gaussian noise to every feature column with standard
/// deviation `rms_fraction` times the column's root mean square.
pub fn add_rms_noise(ds: &Dataset, spec: &NoiseSpec) -> Result<Dataset> {
    if !(spec.rms_fraction >= 0.0 && spec.rms_fraction.is_finite()) {
        return Err(Error::Config(format!("noise level must be non-negative, got {}", spec.rms_fraction)));
    }
    if spec.rms_fraction == 0.0 {
        return Ok(ds.clone());
    }
    let nf = ds.n_features();
    let n = ds.n_samples() as f64;
    let mut rms = vec![0.0; nf];
    for row in ds.rows() {
        for (r, x) in rms.iter_mut().zip(row) {
            *r += x * x;
        }
    }
    let sd: Vec<f64> = rms.iter().map(|s| spec.rms_fraction * (s / n).sqrt()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut features = ds.features().to_vec();
    for row in features.chunks_mut(nf) {
        for (x, &s) in row.iter_mut().zip(&sd) {
            if s > 0.0 {
                let normal = Normal::new(0.0, s).expect("positive finite standard deviation");
                *x += normal.sample(&mut rng);
            }
        }
    }
    ds.with_features(features)
}

/// Metrics of one ensemble under one weighting scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub valid_acc: f64,
    pub test_acc: f64,
    /// Precision on the defect class over the test split.
    pub test_spc: f64,
    /// Test samples whose evidences were in total conflict.
    pub undecided: usize,
}

/// Scores of every pool member on the validation and test splits, with
/// their bodies of evidence precomputed for each scheme.
#[derive(Debug, Clone)]
pub struct PreparedPool {
    schemes: Vec<WeightScheme>,
    members: Vec<Member>,
    valid_labels: Vec<usize>,
    test_labels: Vec<usize>,
    defect_class: usize,
}

#[derive(Debug, Clone)]
struct Member {
    valid_pred: Vec<usize>,
    test_pred: Vec<usize>,
    /// `(valid, test)` per scheme, in `PreparedPool::schemes` order.
    boes: Vec<(BodyOfEvidence, BodyOfEvidence)>,
}

/// Inputs for one member: its confusion matrix on training data and its
/// scores on the validation and test splits.
#[derive(Debug, Clone)]
pub struct MemberScores {
    pub train_confusion: ConfusionMatrix,
    pub valid: ScoreMatrix,
    pub test: ScoreMatrix,
}

impl PreparedPool {
    pub fn new(
        members: Vec<MemberScores>,
        schemes: &[WeightScheme],
        valid_labels: Vec<usize>,
        test_labels: Vec<usize>,
        defect_class: usize,
    ) -> Result<Self> {
        if schemes.is_empty() {
            return Err(Error::Config("no weighting scheme selected".into()));
        }
        let mut schemes = schemes.to_vec();
        schemes.sort_unstable();
        schemes.dedup();
        let members = members
            .into_iter()
            .map(|m| {
                if m.valid.n_samples() != valid_labels.len() || m.test.n_samples() != test_labels.len() {
                    return Err(Error::Shape(format!(
                        "{}: scores do not match the split sizes",
                        m.valid.classifier_id
                    )));
                }
                if defect_class >= m.valid.n_classes() {
                    return Err(Error::Config(format!("defect class {defect_class} is out of range")));
                }
                let boes = schemes
                    .iter()
                    .map(|&s| {
                        let w = build_weight(s, &m.train_confusion)?;
                        Ok((build_boe(&m.valid, &w)?, build_boe(&m.test, &w)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Member {
                    valid_pred: m.valid.argmax(),
                    test_pred: m.test.argmax(),
                    boes,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PreparedPool {
            schemes,
            members,
            valid_labels,
            test_labels,
            defect_class,
        })
    }

    /// A pool of ready-made bodies of evidence, `(valid, test)` per member,
    /// evaluated as a single scheme `w0`. Singletons use the argmax of their
    /// singleton masses.
    pub fn from_evidence(
        members: Vec<(BodyOfEvidence, BodyOfEvidence)>,
        valid_labels: Vec<usize>,
        test_labels: Vec<usize>,
        defect_class: usize,
    ) -> Result<Self> {
        let members = members
            .into_iter()
            .map(|(valid, test)| {
                if valid.n_samples() != valid_labels.len() || test.n_samples() != test_labels.len() {
                    return Err(Error::Shape(format!(
                        "{}: evidence does not match the split sizes",
                        valid.classifier_id
                    )));
                }
                if defect_class >= valid.frame.len() {
                    return Err(Error::Config(format!("defect class {defect_class} is out of range")));
                }
                Ok(Member {
                    valid_pred: valid.predictions(),
                    test_pred: test.predictions(),
                    boes: vec![(valid, test)],
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PreparedPool {
            schemes: vec![WeightScheme::W0],
            members,
            valid_labels,
            test_labels,
            defect_class,
        })
    }

    /// Schemes in evaluation order (ascending).
    pub fn schemes(&self) -> &[WeightScheme] {
        &self.schemes
    }

    pub fn pool_size(&self) -> usize {
        self.members.len()
    }

    /// Singleton ensembles report the member's raw argmax metrics for every
    /// scheme; larger ones fuse the members' evidences per sample.
    pub fn evaluate(&self, ens: &EnsembleId, scheme: WeightScheme, cfg: &PipelineConfig) -> Result<Evaluation> {
        let s = self
            .schemes
            .iter()
            .position(|&x| x == scheme)
            .ok_or_else(|| Error::Config(format!("scheme {scheme} was not prepared")))?;
        if let Some(&bad) = ens.members().iter().find(|&&i| i >= self.members.len()) {
            return Err(Error::Config(format!("ensemble member {} is outside the pool", bad + 1)));
        }
        let (valid, test): (Vec<Option<usize>>, Vec<Option<usize>>) = if let [only] = ens.members() {
            let m = &self.members[*only];
            (
                m.valid_pred.iter().copied().map(Some).collect(),
                m.test_pred.iter().copied().map(Some).collect(),
            )
        } else {
            let valid: Vec<&BodyOfEvidence> = ens.members().iter().map(|&i| &self.members[i].boes[s].0).collect();
            let test: Vec<&BodyOfEvidence> = ens.members().iter().map(|&i| &self.members[i].boes[s].1).collect();
            (fused_predictions(&valid, cfg)?, fused_predictions(&test, cfg)?)
        };
        Ok(Evaluation {
            valid_acc: accuracy(&valid, &self.valid_labels),
            test_acc: accuracy(&test, &self.test_labels),
            test_spc: precision_of(self.defect_class, &test, &self.test_labels),
            undecided: test.iter().filter(|p| p.is_none()).count(),
        })
    }
}

/// `None` where the evidences are in total conflict.
fn fused_predictions(boes: &[&BodyOfEvidence], cfg: &PipelineConfig) -> Result<Vec<Option<usize>>> {
    let n = boes[0].n_samples();
    let mut column: Vec<&MassFunction> = Vec::with_capacity(boes.len());
    (0..n)
        .map(|i| {
            column.clear();
            column.extend(boes.iter().map(|b| &b.per_sample[i]));
            match fuse(&column, cfg) {
                Ok(f) => Ok(Some(f.predicted)),
                Err(dsfusion_core::Error::TotalConflict { .. }) => Ok(None),
                Err(e) => Err(e.into()),
            }
        })
        .collect()
}

fn accuracy(pred: &[Option<usize>], truth: &[usize]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    let hits = pred.iter().zip(truth).filter(|(p, t)| **p == Some(**t)).count();
    hits as f64 / truth.len() as f64
}

/// Correct predictions of `class` over all predictions of `class`; 0 when
/// the class is never predicted.
fn precision_of(class: usize, pred: &[Option<usize>], truth: &[usize]) -> f64 {
    let predicted = pred.iter().filter(|p| **p == Some(class)).count();
    if predicted == 0 {
        return 0.0;
    }
    let hits = pred
        .iter()
        .zip(truth)
        .filter(|(p, t)| **p == Some(class) && **t == class)
        .count();
    hits as f64 / predicted as f64
}

/// Highest validation accuracy; ties go to the scheme listed first.
pub fn select_best_scheme(by_scheme: &[(WeightScheme, Evaluation)]) -> Option<(WeightScheme, Evaluation)> {
    let mut best: Option<(WeightScheme, Evaluation)> = None;
    for &(s, e) in by_scheme {
        match best {
            Some((bs, be)) if e.valid_acc < be.valid_acc || (e.valid_acc == be.valid_acc && s >= bs) => {}
            _ => best = Some((s, e)),
        }
    }
    best
}

/// Label used for the validation-selected approach in reports.
pub const BEST_LABEL: &str = "best";

/// Where pool members come from.
#[derive(Debug, Clone)]
pub enum PoolSource {
    /// Built-in classifiers, trained per repetition on the training split.
    Classifiers(Vec<ClassifierSpec>),
    /// Precomputed scores for every sample of the dataset, one matrix per member.
    Scores(Vec<ScoreMatrix>),
}

impl PoolSource {
    pub fn len(&self) -> usize {
        match self {
            PoolSource::Classifiers(v) => v.len(),
            PoolSource::Scores(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn names(&self) -> Vec<String> {
        match self {
            PoolSource::Classifiers(v) => v.iter().map(ToString::to_string).collect(),
            PoolSource::Scores(v) => v.iter().map(|s| s.classifier_id.clone()).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct HarnessConfig {
    pub schemes: Vec<WeightScheme>,
    pub split: SplitSpec,
    pub repetitions: usize,
    pub noise_levels: Vec<f64>,
    pub max_ensemble_size: Option<usize>,
    pub root_seed: u64,
    /// Retrain on noisy features; otherwise train on clean features and
    /// only score noisy ones.
    pub retrain: bool,
    /// Class whose precision is reported as specificity; defaults to the
    /// minority class.
    pub defect_class: Option<usize>,
    pub pipeline: PipelineConfig,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            schemes: WeightScheme::ALL.to_vec(),
            split: SplitSpec::default(),
            repetitions: 1,
            noise_levels: vec![0.0],
            max_ensemble_size: None,
            root_seed: 0,
            retrain: true,
            defect_class: None,
            pipeline: PipelineConfig::default(),
        }
    }
}

/// One (repetition, noise, ensemble, approach) result. `scheme` is a
/// weighting scheme or [`BEST_LABEL`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub rep: usize,
    pub noise: f64,
    pub ensemble: String,
    pub size: usize,
    pub scheme: String,
    pub valid_acc: Option<f64>,
    pub test_acc: Option<f64>,
    pub test_spc: Option<f64>,
    pub undecided: Option<usize>,
    /// Scheme picked on validation data, for `best` rows.
    pub selected: Option<String>,
    pub error: Option<String>,
}

/// Maximum test accuracy of one approach over all ensembles and the number
/// of ensembles attaining it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproachSummary {
    pub rep: usize,
    pub noise: f64,
    pub scheme: String,
    pub max_acc: f64,
    pub spc: f64,
    pub occurrences: usize,
    pub first_ensemble: String,
}

/// Best ensemble of each size under the validation-selected scheme,
/// aggregated over repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeStat {
    pub noise: f64,
    pub size: usize,
    pub reps: usize,
    pub mean_acc: f64,
    pub std_acc: f64,
    pub mean_spc: f64,
    pub std_spc: f64,
}

/// Best fused ensemble (two or more members) under the validation-selected
/// scheme, aggregated over repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseStat {
    pub noise: f64,
    pub reps: usize,
    pub mean_acc: f64,
    pub std_acc: f64,
    pub min_acc: f64,
    pub max_acc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub dataset: String,
    pub pool: Vec<String>,
    pub defect_class: String,
    pub cells: Vec<CellRecord>,
    pub summary: Vec<ApproachSummary>,
    pub size_stats: Vec<SizeStat>,
    pub noise_stats: Vec<NoiseStat>,
}

/// Runs every repetition and noise level and aggregates the results.
pub fn run_statistical(ds: &Dataset, pool: &PoolSource, cfg: &HarnessConfig) -> Result<ExperimentReport> {
    cfg.split.validate()?;
    cfg.pipeline.validate()?;
    if cfg.repetitions == 0 {
        return Err(Error::Config("repetitions must be at least 1".into()));
    }
    if cfg.noise_levels.is_empty() {
        return Err(Error::Config("no noise level selected".into()));
    }
    if let PoolSource::Scores(scores) = pool {
        if cfg.noise_levels.iter().any(|&n| n != 0.0) {
            return Err(Error::Config("noise levels need built-in classifiers, not precomputed scores".into()));
        }
        if let Some(s) = scores.iter().find(|s| s.n_samples() != ds.n_samples()) {
            return Err(Error::Shape(format!(
                "{} has {} rows, dataset has {} samples",
                s.classifier_id,
                s.n_samples(),
                ds.n_samples()
            )));
        }
        if let Some(s) = scores.iter().find(|s| s.n_classes() != ds.n_classes()) {
            return Err(Error::Shape(format!(
                "{} has {} classes, dataset has {}",
                s.classifier_id,
                s.n_classes(),
                ds.n_classes()
            )));
        }
    }
    let defect_class = cfg.defect_class.unwrap_or_else(|| ds.minority_class());
    if defect_class >= ds.n_classes() {
        return Err(Error::Config(format!("defect class {defect_class} is out of range")));
    }
    let ensembles = enumerate_ensembles(pool.len(), cfg.max_ensemble_size)?;

    let mut cells = Vec::new();
    for rep in 0..cfg.repetitions {
        let split = SplitSpec {
            seed: derive_seed(cfg.root_seed, SPLIT_STREAM | rep as u64),
            ..cfg.split
        };
        let splits = stratified_split(ds, &split)?;
        for (level, &noise) in cfg.noise_levels.iter().enumerate() {
            let stream = NOISE_STREAM | (rep * cfg.noise_levels.len() + level) as u64;
            let noisy = add_rms_noise(
                ds,
                &NoiseSpec {
                    rms_fraction: noise,
                    seed: derive_seed(cfg.root_seed, stream),
                },
            )?;
            let prepared = prepare(ds, &noisy, pool, &splits, cfg, defect_class)?;
            log::info!("repetition {rep}, noise {noise}: evaluating {} ensembles", ensembles.len());
            let per_ensemble: Vec<Vec<CellRecord>> = ensembles
                .par_iter()
                .map(|ens| evaluate_cells(&prepared, ens, rep, noise, &cfg.pipeline))
                .collect();
            cells.extend(per_ensemble.into_iter().flatten());
        }
    }

    let summary = summarize(&cells);
    let size_stats = size_stats(&cells);
    let noise_stats = noise_stats(&cells);
    Ok(ExperimentReport {
        dataset: ds.name.clone(),
        pool: pool.names(),
        defect_class: ds.classes()[defect_class].clone(),
        cells,
        summary,
        size_stats,
        noise_stats,
    })
}

fn prepare(
    clean: &Dataset,
    noisy: &Dataset,
    pool: &PoolSource,
    splits: &Splits,
    cfg: &HarnessConfig,
    defect_class: usize,
) -> Result<PreparedPool> {
    let valid_labels: Vec<usize> = splits.valid.iter().map(|&i| noisy.labels()[i]).collect();
    let test_labels: Vec<usize> = splits.test.iter().map(|&i| noisy.labels()[i]).collect();
    let members = match pool {
        PoolSource::Classifiers(specs) => {
            let fit_on = if cfg.retrain { noisy } else { clean };
            let train_set = fit_on.subset(&splits.train);
            let valid = noisy.subset(&splits.valid);
            let test = noisy.subset(&splits.test);
            specs
                .par_iter()
                .map(|spec| {
                    let clf = train(spec, &train_set)?;
                    Ok(MemberScores {
                        train_confusion: clf.confusion(&train_set)?,
                        valid: clf.score(&valid)?,
                        test: clf.score(&test)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?
        }
        PoolSource::Scores(scores) => scores
            .iter()
            .map(|s| {
                let pick = |idx: &[usize]| {
                    ScoreMatrix::new(
                        s.classifier_id.clone(),
                        s.classes().to_vec(),
                        idx.iter().map(|&i| s.row(i).to_vec()).collect(),
                    )
                };
                let train_scores = pick(&splits.train)?;
                let train_truth: Vec<usize> = splits.train.iter().map(|&i| clean.labels()[i]).collect();
                Ok(MemberScores {
                    train_confusion: ConfusionMatrix::from_predictions(
                        s.n_classes(),
                        &train_scores.argmax(),
                        &train_truth,
                    )?,
                    valid: pick(&splits.valid)?,
                    test: pick(&splits.test)?,
                })
            })
            .collect::<Result<Vec<_>>>()?,
    };
    PreparedPool::new(members, &cfg.schemes, valid_labels, test_labels, defect_class)
}

fn evaluate_cells(
    prepared: &PreparedPool,
    ens: &EnsembleId,
    rep: usize,
    noise: f64,
    pipeline: &PipelineConfig,
) -> Vec<CellRecord> {
    let cell = |scheme: String| CellRecord {
        rep,
        noise,
        ensemble: ens.to_string(),
        size: ens.size(),
        scheme,
        valid_acc: None,
        test_acc: None,
        test_spc: None,
        undecided: None,
        selected: None,
        error: None,
    };
    let fill = |mut c: CellRecord, e: &Evaluation| {
        c.valid_acc = Some(e.valid_acc);
        c.test_acc = Some(e.test_acc);
        c.test_spc = Some(e.test_spc);
        c.undecided = Some(e.undecided);
        c
    };
    let mut out = Vec::with_capacity(prepared.schemes().len() + 1);
    let mut ok = Vec::new();
    for &scheme in prepared.schemes() {
        match prepared.evaluate(ens, scheme, pipeline) {
            Ok(e) => {
                out.push(fill(cell(scheme.to_string()), &e));
                ok.push((scheme, e));
            }
            Err(err) => {
                log::warn!("ensemble {ens}, {scheme}: {err}");
                let mut c = cell(scheme.to_string());
                c.error = Some(err.to_string());
                out.push(c);
            }
        }
    }
    let mut best = cell(BEST_LABEL.to_string());
    match select_best_scheme(&ok) {
        Some((s, e)) => {
            best = fill(best, &e);
            best.selected = Some(s.to_string());
        }
        None => best.error = Some("every scheme failed".into()),
    }
    out.push(best);
    out
}

/// Accuracies are compared after rounding to 9 decimals.
fn acc_key(x: f64) -> i64 {
    (x * 1e9).round() as i64
}

/// Groups cells by `(rep, noise, scheme)` preserving first-seen order.
fn grouped<'a, K: Ord + Clone>(
    cells: &'a [CellRecord],
    key: impl Fn(&CellRecord) -> K,
) -> BTreeMap<K, Vec<&'a CellRecord>> {
    let mut groups: BTreeMap<K, Vec<&CellRecord>> = BTreeMap::new();
    for c in cells.iter().filter(|c| c.test_acc.is_some()) {
        groups.entry(key(c)).or_default().push(c);
    }
    groups
}

/// The first cell attaining the highest test accuracy, and how many do.
fn best_of<'a>(cells: &[&'a CellRecord]) -> Option<(&'a CellRecord, usize)> {
    let max = cells.iter().filter_map(|c| c.test_acc).map(acc_key).max()?;
    let hits: Vec<&&CellRecord> = cells
        .iter()
        .filter(|c| c.test_acc.map(acc_key) == Some(max))
        .collect();
    Some((hits[0], hits.len()))
}

fn scheme_order(s: &str) -> usize {
    s.parse::<WeightScheme>().map_or(usize::MAX, WeightScheme::index)
}

/// Per (repetition, noise, approach): max test accuracy and its number of
/// occurrences over all ensembles.
pub fn summarize(cells: &[CellRecord]) -> Vec<ApproachSummary> {
    let groups = grouped(cells, |c| (c.rep, NoiseKey(c.noise), scheme_order(&c.scheme), c.scheme.clone()));
    groups
        .into_iter()
        .filter_map(|((rep, noise, _, scheme), group)| {
            let (best, occurrences) = best_of(&group)?;
            Some(ApproachSummary {
                rep,
                noise: noise.0,
                scheme,
                max_acc: best.test_acc?,
                spc: best.test_spc?,
                occurrences,
                first_ensemble: best.ensemble.clone(),
            })
        })
        .collect()
}

fn size_stats(cells: &[CellRecord]) -> Vec<SizeStat> {
    let groups = grouped(cells, |c| (NoiseKey(c.noise), c.size, c.rep, c.scheme == BEST_LABEL));
    let mut per_size: BTreeMap<(NoiseKey, usize), (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for ((noise, size, _, is_best), group) in groups {
        if !is_best {
            continue;
        }
        if let Some((best, _)) = best_of(&group) {
            let entry = per_size.entry((noise, size)).or_default();
            entry.0.push(best.test_acc.unwrap_or(0.0));
            entry.1.push(best.test_spc.unwrap_or(0.0));
        }
    }
    per_size
        .into_iter()
        .map(|((noise, size), (acc, spc))| {
            let (mean_acc, std_acc) = mean_std(&acc);
            let (mean_spc, std_spc) = mean_std(&spc);
            SizeStat {
                noise: noise.0,
                size,
                reps: acc.len(),
                mean_acc,
                std_acc,
                mean_spc,
                std_spc,
            }
        })
        .collect()
}

fn noise_stats(cells: &[CellRecord]) -> Vec<NoiseStat> {
    let groups = grouped(cells, |c| (NoiseKey(c.noise), c.rep, c.scheme == BEST_LABEL && c.size >= 2));
    let mut per_noise: BTreeMap<NoiseKey, Vec<f64>> = BTreeMap::new();
    for ((noise, _, fused_best), group) in groups {
        if !fused_best {
            continue;
        }
        if let Some((best, _)) = best_of(&group) {
            per_noise.entry(noise).or_default().push(best.test_acc.unwrap_or(0.0));
        }
    }
    per_noise
        .into_iter()
        .map(|(noise, acc)| {
            let (mean_acc, std_acc) = mean_std(&acc);
            NoiseStat {
                noise: noise.0,
                reps: acc.len(),
                mean_acc,
                std_acc,
                min_acc: acc.iter().copied().fold(f64::INFINITY, f64::min),
                max_acc: acc.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            }
        })
        .collect()
}

/// Mean and sample standard deviation (0 for fewer than two values).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Total order on noise levels, which are finite and non-negative.
#[derive(Debug, Clone, Copy, PartialEq)]
struct NoiseKey(f64);

impl Eq for NoiseKey {}

impl PartialOrd for NoiseKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for NoiseKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}
