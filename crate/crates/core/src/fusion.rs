//! Credibility-weighted Dempster-Shafer fusion of several classifiers.
//!
//! For one sample with evidences `m_1..m_N` from `N` classifiers:
//!
//! 1. `aBJS_i`: mean BJS divergence of `m_i` to the others.
//! 2. `m*_i`: disagreement degree of `m_i`.
//! 3. `SD_i = 1 / (aBJS_i · m*_i)`, with `aBJS_i` floored at [`SUPPORT_FLOOR`].
//! 4. `S̄D = SD / Σ SD`.
//! 5. `CD_i = exp(E_d(m_i)) · S̄D_i` with `E_d` the Deng entropy.
//! 6. `C̄D = CD / Σ CD`.
//! 7. `WE_i = C̄D_i · m_i`.
//! 8. Dempster's rule over the weighted evidences, see [`FusionRule`].

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use core::borrow::Borrow;

use crate::boe::BodyOfEvidence;
use crate::error::{Error, Result};
use crate::mass::{dempster_fold, FocalSet, Frame, MassFunction};
use crate::metrics::{
    deng_in, ln_base, DisagreementConfig, DistanceWeighting, EvidenceGroup,
};

/// Floor on `aBJS_i` before inversion, so identical evidences get finite support.
pub const SUPPORT_FLOOR: f64 = 1e-9;

/// How the weighted evidences are combined in the last step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FusionRule {
    /// `⊕_i WE_i`: Dempster's rule directly on the weighted rows, each step
    /// normalized by the non-conflicting mass.
    #[default]
    WeightedEvidences,
    /// Sum the weighted rows into one mass function `m̃ = Σ_i C̄D_i m_i` and
    /// combine `N` copies of it.
    AveragedEvidence,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub deng_log_base: f64,
    pub bjs_log_base: f64,
    pub disagreement: DisagreementConfig,
    pub distance_weighting: DistanceWeighting,
    pub rule: FusionRule,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            deng_log_base: 10.0,
            bjs_log_base: 2.0,
            disagreement: DisagreementConfig::default(),
            distance_weighting: DistanceWeighting::Identity,
            rule: FusionRule::WeightedEvidences,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        ln_base(self.deng_log_base)?;
        ln_base(self.bjs_log_base)?;
        DisagreementConfig::new(self.disagreement.sigma())?;
        Ok(())
    }
}

/// Every intermediate quantity of one fusion, indexed by classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionDiagnostics {
    /// Focal sets that index the columns of `weighted`.
    pub basis: Vec<FocalSet>,
    pub average_bjs: Vec<f64>,
    pub scatter: f64,
    pub scatter_without: Vec<f64>,
    pub disagreement: Vec<f64>,
    pub support: Vec<f64>,
    pub support_norm: Vec<f64>,
    pub deng_entropy: Vec<f64>,
    pub credibility: Vec<f64>,
    pub credibility_norm: Vec<f64>,
    pub weighted: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleFusion {
    pub fused: MassFunction,
    /// Index of the largest fused singleton mass.
    pub predicted: usize,
    /// `None` when a single evidence was passed through unchanged.
    pub diagnostics: Option<FusionDiagnostics>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusionResult {
    pub frame: Frame,
    pub samples: Vec<SampleFusion>,
}

impl FusionResult {
    pub fn predicted(&self) -> Vec<usize> {
        self.samples.iter().map(|s| s.predicted).collect()
    }

    /// One row per sample: singleton masses `m({E_1})..m({E_n})`, then `m(Θ)`.
    pub fn to_matrix(&self) -> Vec<Vec<f64>> {
        self.samples
            .iter()
            .map(|s| {
                let mut row = s.fused.singleton_masses();
                row.push(s.fused.ignorance());
                row
            })
            .collect()
    }
}

/// `aBJS_i = Σ_{j≠i} BJS(m_i, m_j) / (N - 1)`.
pub fn average_bjs(ms: &[MassFunction], log_base: f64) -> Result<Vec<f64>> {
    let ln_b = ln_base(log_base)?;
    Ok(EvidenceGroup::new(ms)?.average_bjs(ln_b))
}

/// Raw and normalized values of a per-classifier degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Degrees {
    pub raw: Vec<f64>,
    pub normalized: Vec<f64>,
}

fn normalized(raw: Vec<f64>) -> Degrees {
    let total: f64 = raw.iter().sum();
    let normalized = raw.iter().map(|v| v / total).collect();
    Degrees { raw, normalized }
}

/// `SD_i = (aBJS_i · m*_i)^-1` and its normalization.
pub fn support_degree(ms: &[MassFunction], cfg: &PipelineConfig) -> Result<Degrees> {
    cfg.validate()?;
    let group = EvidenceGroup::new(ms)?;
    let abjs = group.average_bjs(ln_base(cfg.bjs_log_base)?);
    let dis = group.disagreement(&cfg.disagreement, cfg.distance_weighting)?;
    Ok(support_from(&abjs, &dis.degrees))
}

pub(crate) fn support_from(average_bjs: &[f64], disagreement: &[f64]) -> Degrees {
    normalized(
        average_bjs
            .iter()
            .zip(disagreement)
            .map(|(&a, &d)| 1.0 / (a.max(SUPPORT_FLOOR) * d))
            .collect(),
    )
}

/// `CD_i = exp(E_d(m_i)) · S̄D_i` and its normalization.
pub fn credibility_degree(
    ms: &[MassFunction],
    support_norm: &[f64],
    cfg: &PipelineConfig,
) -> Result<Degrees> {
    if ms.len() != support_norm.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} supports for {} evidences",
            support_norm.len(),
            ms.len()
        )));
    }
    let ln_b = ln_base(cfg.deng_log_base)?;
    let entropy: Vec<f64> = ms.iter().map(|m| deng_in(m.focal_sets(), ln_b)).collect();
    Ok(credibility_from(&entropy, support_norm))
}

fn credibility_from(entropy: &[f64], support_norm: &[f64]) -> Degrees {
    normalized(
        entropy
            .iter()
            .zip(support_norm)
            .map(|(&e, &s)| libm::exp(e) * s)
            .collect(),
    )
}

/// `WE_i = C̄D_i · m_i`, laid out on the sorted union of the focal sets of `ms`
/// (see [`crate::metrics::focal_basis`]).
pub fn weight_evidences(ms: &[MassFunction], credibility_norm: &[f64]) -> Result<Vec<Vec<f64>>> {
    if ms.len() != credibility_norm.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} credibilities for {} evidences",
            credibility_norm.len(),
            ms.len()
        )));
    }
    let basis = crate::metrics::focal_basis(ms);
    Ok(ms
        .iter()
        .zip(credibility_norm)
        .map(|(m, &c)| m.to_vector(&basis).into_iter().map(|v| c * v).collect())
        .collect())
}

/// Fuses the evidences of several classifiers about one sample.
///
/// A single evidence is returned unchanged without diagnostics.
pub fn fuse<M: Borrow<MassFunction>>(ms: &[M], cfg: &PipelineConfig) -> Result<SampleFusion> {
    cfg.validate()?;
    match ms {
        [] => Err(Error::TooFewEvidences { needed: 1, got: 0 }),
        [only] => {
            let only = only.borrow();
            Ok(SampleFusion {
                fused: only.clone(),
                predicted: only.argmax_singleton(),
                diagnostics: None,
            })
        }
        _ => fuse_group(EvidenceGroup::new(ms)?, ms, cfg),
    }
}

fn fuse_group<M: Borrow<MassFunction>>(
    group: EvidenceGroup,
    ms: &[M],
    cfg: &PipelineConfig,
) -> Result<SampleFusion> {
    let average_bjs = group.average_bjs(ln_base(cfg.bjs_log_base)?);
    let dis = group.disagreement(&cfg.disagreement, cfg.distance_weighting)?;
    let support = support_from(&average_bjs, &dis.degrees);

    let ln_deng = ln_base(cfg.deng_log_base)?;
    let deng_entropy: Vec<f64> = ms
        .iter()
        .map(|m| deng_in(m.borrow().focal_sets(), ln_deng))
        .collect();
    let credibility = credibility_from(&deng_entropy, &support.normalized);

    let weighted: Vec<Vec<f64>> = group
        .rows
        .iter()
        .zip(&credibility.normalized)
        .map(|(row, &c)| row.iter().map(|v| c * v).collect())
        .collect();

    let as_map = |row: &[f64]| -> BTreeMap<FocalSet, f64> {
        group
            .basis
            .iter()
            .copied()
            .zip(row.iter().copied())
            .filter(|(_, v)| *v > 0.0)
            .collect()
    };
    let fused_map = match cfg.rule {
        FusionRule::WeightedEvidences => {
            let rows: Vec<BTreeMap<FocalSet, f64>> = weighted.iter().map(|r| as_map(r)).collect();
            let refs: Vec<&BTreeMap<FocalSet, f64>> = rows.iter().collect();
            dempster_fold(&refs)?
        }
        FusionRule::AveragedEvidence => {
            let averaged: Vec<f64> = (0..group.basis.len())
                .map(|c| weighted.iter().map(|r| r[c]).sum())
                .collect();
            let row = as_map(&averaged);
            let refs: Vec<&BTreeMap<FocalSet, f64>> = (0..ms.len()).map(|_| &row).collect();
            dempster_fold(&refs)?
        }
    };
    let fused = MassFunction::from_map_unchecked(group.frame.clone(), fused_map);
    Ok(SampleFusion {
        predicted: fused.argmax_singleton(),
        fused,
        diagnostics: Some(FusionDiagnostics {
            basis: group.basis,
            average_bjs,
            scatter: dis.scatter,
            scatter_without: dis.scatter_without,
            disagreement: dis.degrees,
            support: support.raw,
            support_norm: support.normalized,
            deng_entropy,
            credibility: credibility.raw,
            credibility_norm: credibility.normalized,
            weighted,
        }),
    })
}

/// Applies [`fuse`] to every sample of a set of aligned bodies of evidence.
pub fn fuse_dataset(boes: &[BodyOfEvidence], cfg: &PipelineConfig) -> Result<FusionResult> {
    let first = boes.first().ok_or(Error::TooFewEvidences { needed: 1, got: 0 })?;
    for b in &boes[1..] {
        if b.n_samples() != first.n_samples() {
            return Err(Error::ShapeMismatch(format!(
                "sample counts: {} has {}, {} has {}",
                first.classifier_id,
                first.n_samples(),
                b.classifier_id,
                b.n_samples()
            )));
        }
        if b.frame != first.frame {
            return Err(Error::FrameMismatch);
        }
    }
    let mut samples = Vec::with_capacity(first.n_samples());
    for i in 0..first.n_samples() {
        let column: Vec<&MassFunction> = boes.iter().map(|b| &b.per_sample[i]).collect();
        samples.push(fuse(&column, cfg)?);
    }
    Ok(FusionResult {
        frame: first.frame.clone(),
        samples,
    })
}
