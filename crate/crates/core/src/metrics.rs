//! Conflict measures between bodies of evidence.
//!
//! All measures treat each focal set, composite sets included, as one
//! coordinate of a mass vector. Two mass functions are compared on the union
//! of their focal sets; coordinates where both are zero contribute nothing.
//! `0 · log 0` is taken as 0 throughout.

use alloc::collections::BTreeSet;
use core::borrow::Borrow;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::mass::{FocalSet, Frame, MassFunction};

/// Default σ of the disagreement degree.
pub const DEFAULT_SIGMA: f64 = 0.5;

/// Weighting matrix of the evidence distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DistanceWeighting {
    /// Plain Euclidean distance between mass vectors.
    #[default]
    Identity,
    /// Jousselme-style weighting `Jac(A, B) = |A ∩ B| / |A ∪ B|`.
    Jaccard,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisagreementConfig {
    sigma: f64,
}

impl DisagreementConfig {
    pub fn new(sigma: f64) -> Result<Self> {
        if sigma.is_finite() && sigma > 0.0 {
            Ok(DisagreementConfig { sigma })
        } else {
            Err(Error::InvalidSigma(sigma))
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

impl Default for DisagreementConfig {
    fn default() -> Self {
        DisagreementConfig {
            sigma: DEFAULT_SIGMA,
        }
    }
}

pub(crate) fn ln_base(base: f64) -> Result<f64> {
    if base.is_finite() && base > 1.0 {
        Ok(libm::log(base))
    } else {
        Err(Error::InvalidLogBase(base))
    }
}

fn same_frame(a: &MassFunction, b: &MassFunction) -> Result<()> {
    if a.frame() == b.frame() {
        Ok(())
    } else {
        Err(Error::FrameMismatch)
    }
}

/// Deng entropy `-Σ m(A) log(m(A) / (2^|A| - 1))`.
pub fn deng_entropy(m: &MassFunction, log_base: f64) -> Result<f64> {
    let ln_b = ln_base(log_base)?;
    Ok(deng_in(m.focal_sets(), ln_b))
}

pub(crate) fn deng_in(masses: impl Iterator<Item = (FocalSet, f64)>, ln_b: f64) -> f64 {
    let mut acc = 0.0;
    for (set, m) in masses {
        if m > 0.0 {
            let volume = libm::exp2(set.len() as f64) - 1.0;
            acc -= m * libm::log(m / volume);
        }
    }
    acc / ln_b
}

/// Shannon entropy of the mass vector, one outcome per focal set.
pub fn shannon_entropy(m: &MassFunction, log_base: f64) -> Result<f64> {
    let ln_b = ln_base(log_base)?;
    Ok(shannon_in(m.focal_sets().map(|(_, v)| v), ln_b))
}

pub(crate) fn shannon_in(values: impl Iterator<Item = f64>, ln_b: f64) -> f64 {
    let mut acc = 0.0;
    for v in values {
        if v > 0.0 {
            acc -= v * libm::log(v);
        }
    }
    acc / ln_b
}

/// Belief Jensen-Shannon divergence `H((m1+m2)/2) - H(m1)/2 - H(m2)/2`.
pub fn bjs_divergence(m1: &MassFunction, m2: &MassFunction, log_base: f64) -> Result<f64> {
    same_frame(m1, m2)?;
    let ln_b = ln_base(log_base)?;
    let basis = focal_basis([m1, m2]);
    Ok(bjs_vectors(&m1.to_vector(&basis), &m2.to_vector(&basis), ln_b))
}

pub(crate) fn bjs_vectors(a: &[f64], b: &[f64], ln_b: f64) -> f64 {
    let mid = a.iter().zip(b).map(|(x, y)| (x + y) / 2.0);
    let h_mid = shannon_in(mid, ln_b);
    let h_a = shannon_in(a.iter().copied(), ln_b);
    let h_b = shannon_in(b.iter().copied(), ln_b);
    (h_mid - (h_a + h_b) / 2.0).max(0.0)
}

/// Sorted union of the focal sets of `ms`.
pub fn focal_basis<'a, I>(ms: I) -> Vec<FocalSet>
where
    I: IntoIterator<Item = &'a MassFunction>,
{
    let mut sets = BTreeSet::new();
    for m in ms {
        sets.extend(m.focal_sets().map(|(s, _)| s));
    }
    sets.into_iter().collect()
}

/// `sqrt((m1 - m2)ᵀ W (m1 - m2))`, without the customary ½ factor.
pub fn evidence_distance(
    m1: &MassFunction,
    m2: &MassFunction,
    weighting: DistanceWeighting,
) -> Result<f64> {
    same_frame(m1, m2)?;
    let basis = focal_basis([m1, m2]);
    let metric = DistanceMetric::new(&basis, weighting);
    Ok(metric.distance(&m1.to_vector(&basis), &m2.to_vector(&basis)))
}

/// Evidence distance on a fixed focal basis; the Jaccard matrix is built once.
pub(crate) struct DistanceMetric {
    jaccard: Option<Vec<f64>>,
    n: usize,
}

impl DistanceMetric {
    pub(crate) fn new(basis: &[FocalSet], weighting: DistanceWeighting) -> Self {
        let n = basis.len();
        let jaccard = match weighting {
            DistanceWeighting::Identity => None,
            DistanceWeighting::Jaccard => Some(
                basis
                    .iter()
                    .flat_map(|a| basis.iter().map(move |b| a.jaccard(*b)))
                    .collect(),
            ),
        };
        DistanceMetric { jaccard, n }
    }

    pub(crate) fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        let q = match &self.jaccard {
            None => diff.iter().map(|d| d * d).sum::<f64>(),
            Some(w) => {
                let mut q = 0.0;
                for i in 0..self.n {
                    for j in 0..self.n {
                        q += diff[i] * w[i * self.n + j] * diff[j];
                    }
                }
                q
            }
        };
        libm::sqrt(q.max(0.0))
    }
}

/// Centre of a group of bodies of evidence and its leave-one-out variants.
#[derive(Debug, Clone)]
pub struct Centers {
    pub global: MassFunction,
    /// `leave_one_out[q]` averages every evidence except `q`, dividing by `L - 1`.
    pub leave_one_out: Vec<MassFunction>,
}

/// Componentwise means of `ms`.
pub fn boe_centers(ms: &[MassFunction]) -> Result<Centers> {
    let group = EvidenceGroup::new(ms)?;
    let global = group.to_mass(&group.center(None));
    let leave_one_out = (0..ms.len())
        .map(|q| group.to_mass(&group.center(Some(q))))
        .collect();
    Ok(Centers {
        global,
        leave_one_out,
    })
}

/// Scatter terms and disagreement degrees of a group of evidences.
#[derive(Debug, Clone, PartialEq)]
pub struct Disagreement {
    /// Mean distance to the global centre.
    pub scatter: f64,
    /// `scatter_without[q]`: mean distance of the others to the centre that excludes `q`.
    pub scatter_without: Vec<f64>,
    /// `0.5 + atan((scatter - scatter_without[q]) / σ) / π`.
    pub degrees: Vec<f64>,
}

/// Disagreement degree of every evidence in `ms`.
pub fn disagreement(
    ms: &[MassFunction],
    cfg: &DisagreementConfig,
    weighting: DistanceWeighting,
) -> Result<Disagreement> {
    EvidenceGroup::new(ms)?.disagreement(cfg, weighting)
}

/// Disagreement degree of evidence `q` against the rest of `ms`.
pub fn disagreement_degree(
    ms: &[MassFunction],
    q: usize,
    cfg: &DisagreementConfig,
    weighting: DistanceWeighting,
) -> Result<f64> {
    if q >= ms.len() {
        return Err(Error::IndexOutOfRange {
            index: q,
            len: ms.len(),
        });
    }
    Ok(disagreement(ms, cfg, weighting)?.degrees[q])
}

pub(crate) fn squash(scatter: f64, scatter_without: f64, sigma: f64) -> f64 {
    0.5 + libm::atan((scatter - scatter_without) / sigma) / PI
}

/// A list of mass functions laid out on their common focal basis.
pub(crate) struct EvidenceGroup {
    pub(crate) frame: Frame,
    pub(crate) basis: Vec<FocalSet>,
    pub(crate) rows: Vec<Vec<f64>>,
}

impl EvidenceGroup {
    pub(crate) fn new<M: Borrow<MassFunction>>(ms: &[M]) -> Result<Self> {
        if ms.len() < 2 {
            return Err(Error::TooFewEvidences {
                needed: 2,
                got: ms.len(),
            });
        }
        let frame = ms[0].borrow().frame().clone();
        if ms.iter().any(|m| *m.borrow().frame() != frame) {
            return Err(Error::FrameMismatch);
        }
        let basis = focal_basis(ms.iter().map(Borrow::borrow));
        let rows = ms.iter().map(|m| m.borrow().to_vector(&basis)).collect();
        Ok(EvidenceGroup { frame, basis, rows })
    }

    pub(crate) fn len(&self) -> usize {
        self.rows.len()
    }

    /// Mean of all rows, or of all rows but `skip`.
    ///
    /// Computed as a reference row plus the mean offset from it, so a group of
    /// identical rows has exactly that row as its centre.
    pub(crate) fn center(&self, skip: Option<usize>) -> Vec<f64> {
        let members: Vec<&Vec<f64>> = self
            .rows
            .iter()
            .enumerate()
            .filter(|(j, _)| Some(*j) != skip)
            .map(|(_, r)| r)
            .collect();
        let count = members.len() as f64;
        let reference = members[0];
        (0..self.basis.len())
            .map(|c| {
                let offset: f64 = members.iter().map(|r| r[c] - reference[c]).sum();
                (reference[c] + offset / count).max(0.0)
            })
            .collect()
    }

    pub(crate) fn to_mass(&self, row: &[f64]) -> MassFunction {
        MassFunction::from_map_unchecked(
            self.frame.clone(),
            self.basis.iter().copied().zip(row.iter().copied()).collect(),
        )
    }

    pub(crate) fn average_bjs(&self, ln_b: f64) -> Vec<f64> {
        let n = self.len();
        let mut pair = alloc::vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = bjs_vectors(&self.rows[i], &self.rows[j], ln_b);
                pair[i * n + j] = d;
                pair[j * n + i] = d;
            }
        }
        (0..n)
            .map(|i| pair[i * n..(i + 1) * n].iter().sum::<f64>() / (n - 1) as f64)
            .collect()
    }

    pub(crate) fn disagreement(
        &self,
        cfg: &DisagreementConfig,
        weighting: DistanceWeighting,
    ) -> Result<Disagreement> {
        let metric = DistanceMetric::new(&self.basis, weighting);
        let n = self.len();
        let center = self.center(None);
        let scatter =
            self.rows.iter().map(|r| metric.distance(r, &center)).sum::<f64>() / n as f64;
        let scatter_without: Vec<f64> = (0..n)
            .map(|q| {
                let c = self.center(Some(q));
                self.rows
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != q)
                    .map(|(_, r)| metric.distance(r, &c))
                    .sum::<f64>()
                    / (n - 1) as f64
            })
            .collect();
        let degrees = scatter_without
            .iter()
            .map(|&w| squash(scatter, w, cfg.sigma()))
            .collect();
        Ok(Disagreement {
            scatter,
            scatter_without,
            degrees,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn frame() -> Frame {
        Frame::indexed(2).unwrap()
    }

    fn bba(e1: f64, e2: f64, both: f64) -> MassFunction {
        MassFunction::from_singletons(frame(), &[e1, e2], both).unwrap()
    }

    fn worked() -> Vec<MassFunction> {
        vec![
            bba(0.5, 0.1, 0.4),
            bba(0.3, 0.3, 0.4),
            bba(0.5, 0.0, 0.5),
            bba(0.4, 0.2, 0.4),
        ]
    }

    #[test]
    fn deng_examples() {
        let ms = worked();
        assert!((deng_entropy(&ms[0], 10.0).unwrap() - 0.601).abs() < 5e-4);
        assert!((deng_entropy(&ms[2], 10.0).unwrap() - 0.540).abs() < 5e-4);
        let d = MassFunction::categorical(frame(), FocalSet::singleton(0)).unwrap();
        assert_eq!(deng_entropy(&d, 10.0).unwrap(), 0.0);
        assert_eq!(deng_entropy(&d, 2.0).unwrap(), 0.0);
        assert_eq!(deng_entropy(&d, 1.0), Err(Error::InvalidLogBase(1.0)));
        assert!(deng_entropy(&d, f64::NAN).is_err());
    }

    #[test]
    fn shannon_examples() {
        let d = MassFunction::categorical(frame(), FocalSet::singleton(0)).unwrap();
        assert_eq!(shannon_entropy(&d, 2.0).unwrap(), 0.0);
        let half = bba(0.5, 0.5, 0.0);
        assert!((shannon_entropy(&half, 2.0).unwrap() - 1.0).abs() < 1e-15);
        // -2 (0.3 log2 0.3) - 0.4 log2 0.4
        let expected = -2.0 * 0.3 * libm::log2(0.3) - 0.4 * libm::log2(0.4);
        let h = shannon_entropy(&worked()[1], 2.0).unwrap();
        assert!((h - expected).abs() < 1e-12);
        assert!((h - 1.571).abs() < 5e-4);
    }

    #[test]
    fn bjs_examples() {
        let ms = worked();
        for m in &ms {
            assert_eq!(bjs_divergence(m, m, 2.0).unwrap(), 0.0);
        }
        assert!((bjs_divergence(&ms[0], &ms[1], 2.0).unwrap() - 0.056).abs() < 5e-4);
        assert!((bjs_divergence(&ms[0], &ms[3], 2.0).unwrap() - 0.0163).abs() < 5e-5);
        let other = MassFunction::vacuous(Frame::indexed(3).unwrap());
        assert_eq!(bjs_divergence(&ms[0], &other, 2.0), Err(Error::FrameMismatch));
    }

    #[test]
    fn distance_examples() {
        let ms = worked();
        let center = bba(0.425, 0.150, 0.425);
        for w in [DistanceWeighting::Identity, DistanceWeighting::Jaccard] {
            assert_eq!(evidence_distance(&ms[0], &ms[0], w).unwrap(), 0.0);
        }
        let d = evidence_distance(&ms[0], &center, DistanceWeighting::Identity).unwrap();
        assert!((d - 0.094).abs() < 5e-4);
        let loo = bba(0.4, 0.5 / 3.0, 1.3 / 3.0);
        let d = evidence_distance(&ms[1], &loo, DistanceWeighting::Identity).unwrap();
        assert!((d - 0.170).abs() < 5e-4);
    }

    #[test]
    fn jaccard_distance_by_hand() {
        // diff = (0.1, -0.1, 0) on {E1}, {E2}, Θ; Jac = [[1,0,.5],[0,1,.5],[.5,.5,1]]
        // quadratic form = 0.01 + 0.01 = 0.02
        let a = bba(0.5, 0.1, 0.4);
        let b = bba(0.4, 0.2, 0.4);
        let d = evidence_distance(&a, &b, DistanceWeighting::Jaccard).unwrap();
        assert!((d - libm::sqrt(0.02)).abs() < 1e-12);
        // diff = (0.1, 0, -0.1): 0.01 + 0.01 - 2 * 0.5 * 0.01 = 0.01
        let c = bba(0.4, 0.1, 0.5);
        let d = evidence_distance(&a, &c, DistanceWeighting::Jaccard).unwrap();
        assert!((d - 0.1).abs() < 1e-12);
    }

    #[test]
    fn center_examples() {
        let c = boe_centers(&worked()).unwrap();
        let g = c.global.to_vector(&focal_basis([&c.global]));
        for (x, e) in g.iter().zip([0.425, 0.150, 0.425]) {
            assert!((x - e).abs() < 1e-12);
        }
        let l = &c.leave_one_out[0];
        assert!((l.mass(FocalSet::singleton(0)) - 0.4).abs() < 1e-12);
        assert!((l.mass(FocalSet::singleton(1)) - 0.5 / 3.0).abs() < 1e-12);
        assert!((l.ignorance() - 1.3 / 3.0).abs() < 1e-12);

        let m = bba(0.1, 0.7, 0.2);
        let same = boe_centers(&[m.clone(), m.clone(), m.clone()]).unwrap();
        assert_eq!(same.global, m);
        assert!(same.leave_one_out.iter().all(|c| *c == m));
        assert!(matches!(
            boe_centers(core::slice::from_ref(&m)),
            Err(Error::TooFewEvidences { .. })
        ));
    }

    #[test]
    fn disagreement_examples() {
        let cfg = DisagreementConfig::default();
        let d = disagreement(&worked(), &cfg, DistanceWeighting::Identity).unwrap();
        assert!((d.scatter - 0.134).abs() < 5e-4);
        for (x, e) in d.scatter_without.iter().zip([0.141, 0.099, 0.094, 0.154]) {
            assert!((x - e).abs() < 5e-4);
        }
        for (x, e) in d.degrees.iter().zip([0.496, 0.522, 0.525, 0.487]) {
            assert!((x - e).abs() < 5e-4, "{:?}", d.degrees);
        }
        let one = disagreement_degree(&worked(), 2, &cfg, DistanceWeighting::Identity).unwrap();
        assert_eq!(one, d.degrees[2]);
        assert!(disagreement_degree(&worked(), 4, &cfg, DistanceWeighting::Identity).is_err());

        let m = bba(0.3, 0.3, 0.4);
        let d = disagreement(&vec![m; 5], &cfg, DistanceWeighting::Jaccard).unwrap();
        assert!(d.degrees.iter().all(|&x| x == 0.5));
    }

    #[test]
    fn sigma_validation() {
        assert!(DisagreementConfig::new(0.0).is_err());
        assert!(DisagreementConfig::new(-1.0).is_err());
        assert!(DisagreementConfig::new(f64::INFINITY).is_err());
        assert_eq!(DisagreementConfig::new(2.0).unwrap().sigma(), 2.0);
    }
}
