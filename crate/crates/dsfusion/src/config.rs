//! Benchmark run configuration: command-line flags merged with an optional
//! flat TOML file whose values take precedence.

use std::fs;
use std::path::{Path, PathBuf};

use dsfusion_core::{DisagreementConfig, DistanceWeighting, FusionRule, PipelineConfig, WeightScheme};
use serde::{Deserialize, Serialize};

use crate::classifiers::ClassifierSpec;
use crate::error::{Error, Result};
use crate::harness::{HarnessConfig, SplitSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Distance {
    Identity,
    Jaccard,
}

impl From<Distance> for DistanceWeighting {
    fn from(d: Distance) -> Self {
        match d {
            Distance::Identity => DistanceWeighting::Identity,
            Distance::Jaccard => DistanceWeighting::Jaccard,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    /// Dempster's rule over the weighted evidences.
    Weighted,
    /// Dempster's rule over copies of the credibility-averaged evidence.
    Averaged,
}

impl From<Rule> for FusionRule {
    fn from(r: Rule) -> Self {
        match r {
            Rule::Weighted => FusionRule::WeightedEvidences,
            Rule::Averaged => FusionRule::AveragedEvidence,
        }
    }
}

/// Overrides of the fusion pipeline defaults.
#[derive(Debug, Clone, Default, PartialEq, clap::Args)]
pub struct PipelineOverrides {
    /// Logarithm base of the Deng entropy [default: 10]
    #[arg(long)]
    pub deng_log_base: Option<f64>,
    /// Logarithm base of the BJS divergence [default: 2]
    #[arg(long)]
    pub bjs_log_base: Option<f64>,
    /// Scale of the disagreement degree [default: 0.5]
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Weighting of the evidence distance [default: identity]
    #[arg(long, value_enum)]
    pub distance: Option<Distance>,
    /// Combination of the weighted evidences [default: weighted]
    #[arg(long, value_enum)]
    pub rule: Option<Rule>,
}

impl PipelineOverrides {
    pub fn to_config(&self) -> Result<PipelineConfig> {
        let mut cfg = PipelineConfig::default();
        if let Some(b) = self.deng_log_base {
            cfg.deng_log_base = b;
        }
        if let Some(b) = self.bjs_log_base {
            cfg.bjs_log_base = b;
        }
        if let Some(s) = self.sigma {
            cfg.disagreement = DisagreementConfig::new(s)?;
        }
        if let Some(d) = self.distance {
            cfg.distance_weighting = d.into();
        }
        if let Some(r) = self.rule {
            cfg.rule = r.into();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn overlay<T: Clone>(dst: &mut Option<T>, src: &Option<T>) {
    if src.is_some() {
        dst.clone_from(src);
    }
}

/// Every benchmark setting; unset fields fall back to defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub datasets: Option<Vec<PathBuf>>,
    pub seed: Option<u64>,
    pub classifiers: Option<Vec<String>>,
    pub scores: Option<Vec<PathBuf>>,
    pub schemes: Option<Vec<String>>,
    pub noise_levels: Option<Vec<f64>>,
    pub repetitions: Option<usize>,
    pub max_ensemble_size: Option<usize>,
    pub output: Option<PathBuf>,
    pub retrain: Option<bool>,
    pub defect_class: Option<String>,
    pub deng_log_base: Option<f64>,
    pub bjs_log_base: Option<f64>,
    pub sigma: Option<f64>,
    pub distance: Option<Distance>,
    pub rule: Option<Rule>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Fields set in `other` replace those in `self`.
    pub fn overlay(mut self, other: &RunConfig) -> Self {
        overlay(&mut self.datasets, &other.datasets);
        overlay(&mut self.seed, &other.seed);
        overlay(&mut self.classifiers, &other.classifiers);
        overlay(&mut self.scores, &other.scores);
        overlay(&mut self.schemes, &other.schemes);
        overlay(&mut self.noise_levels, &other.noise_levels);
        overlay(&mut self.repetitions, &other.repetitions);
        overlay(&mut self.max_ensemble_size, &other.max_ensemble_size);
        overlay(&mut self.output, &other.output);
        overlay(&mut self.retrain, &other.retrain);
        overlay(&mut self.defect_class, &other.defect_class);
        overlay(&mut self.deng_log_base, &other.deng_log_base);
        overlay(&mut self.bjs_log_base, &other.bjs_log_base);
        overlay(&mut self.sigma, &other.sigma);
        overlay(&mut self.distance, &other.distance);
        overlay(&mut self.rule, &other.rule);
        self
    }

    pub fn pipeline(&self) -> PipelineOverrides {
        PipelineOverrides {
            deng_log_base: self.deng_log_base,
            bjs_log_base: self.bjs_log_base,
            sigma: self.sigma,
            distance: self.distance,
            rule: self.rule,
        }
    }

    pub fn with_pipeline(mut self, p: &PipelineOverrides) -> Self {
        self.deng_log_base = p.deng_log_base;
        self.bjs_log_base = p.bjs_log_base;
        self.sigma = p.sigma;
        self.distance = p.distance;
        self.rule = p.rule;
        self
    }

    pub fn datasets(&self) -> Result<&[PathBuf]> {
        match self.datasets.as_deref() {
            Some(d) if !d.is_empty() => Ok(d),
            _ => Err(Error::Config("no dataset given".into())),
        }
    }

    pub fn output(&self) -> PathBuf {
        self.output.clone().unwrap_or_else(|| PathBuf::from("dsfusion-out"))
    }

    /// Built-in classifiers, or `None` when external scores are used.
    pub fn classifier_specs(&self) -> Result<Option<Vec<ClassifierSpec>>> {
        match (&self.classifiers, &self.scores) {
            (Some(_), Some(_)) => Err(Error::Config("give classifiers or scores, not both".into())),
            (None, Some(s)) if s.is_empty() => Err(Error::Config("empty score list".into())),
            (None, Some(_)) => Ok(None),
            (Some(c), None) => {
                if c.is_empty() {
                    return Err(Error::Config("empty classifier list".into()));
                }
                c.iter().map(|s| s.parse()).collect::<Result<Vec<_>>>().map(Some)
            }
            (None, None) => Ok(Some(ClassifierSpec::default_pool())),
        }
    }

    /// Everything except the dataset, pool and defect class, which the
    /// caller resolves per dataset.
    pub fn harness(&self) -> Result<HarnessConfig> {
        let defaults = HarnessConfig::default();
        let schemes = match &self.schemes {
            Some(s) if s.is_empty() => return Err(Error::Config("empty scheme list".into())),
            Some(s) => s.iter().map(|x| x.parse::<WeightScheme>()).collect::<Result<Vec<_>, _>>()?,
            None => defaults.schemes,
        };
        let noise_levels = self.noise_levels.clone().unwrap_or(defaults.noise_levels);
        if let Some(n) = noise_levels.iter().find(|n| !(**n >= 0.0 && n.is_finite())) {
            return Err(Error::Config(format!("noise level {n} must be non-negative")));
        }
        if self.max_ensemble_size == Some(0) {
            return Err(Error::Config("max ensemble size must be at least 1".into()));
        }
        Ok(HarnessConfig {
            schemes,
            split: SplitSpec::default(),
            repetitions: self.repetitions.unwrap_or(defaults.repetitions),
            noise_levels,
            max_ensemble_size: self.max_ensemble_size,
            root_seed: self.seed.unwrap_or(defaults.root_seed),
            retrain: self.retrain.unwrap_or(defaults.retrain),
            defect_class: None,
            pipeline: self.pipeline().to_config()?,
        })
    }
}
