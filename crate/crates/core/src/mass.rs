//! Frames of discernment, focal sets and mass functions.
//!
//! A focal set is a bitmask over the ordered elements of its frame, so frames
//! hold at most [`MAX_FRAME_SIZE`] elements. Mass functions store only focal
//! sets with strictly positive mass, keyed in bitmask order, which makes map
//! equality exact and iteration order canonical.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::MASS_SUM_TOLERANCE;

pub const MAX_FRAME_SIZE: usize = 64;

/// Combined masses below this value are dropped and the rest renormalized.
pub const PRUNE_THRESHOLD: f64 = 1e-12;

/// Conflict at or above `1 - TOTAL_CONFLICT_EPS` makes Dempster's rule undefined.
pub const TOTAL_CONFLICT_EPS: f64 = 1e-12;

/// A subset of a frame, encoded as a bitmask over the frame's element order.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FocalSet(u64);

impl FocalSet {
    pub const EMPTY: FocalSet = FocalSet(0);

    pub const fn from_bits(bits: u64) -> Self {
        FocalSet(bits)
    }

    /// # Panics
    /// If `index >= MAX_FRAME_SIZE`.
    pub fn singleton(index: usize) -> Self {
        assert!(index < MAX_FRAME_SIZE, "element index {index} exceeds frame capacity");
        FocalSet(1 << index)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        indices
            .into_iter()
            .fold(FocalSet::EMPTY, |acc, i| acc.union(FocalSet::singleton(i)))
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    /// Cardinality |A|.
    pub const fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub const fn intersection(self, other: FocalSet) -> FocalSet {
        FocalSet(self.0 & other.0)
    }

    pub const fn union(self, other: FocalSet) -> FocalSet {
        FocalSet(self.0 | other.0)
    }

    pub const fn is_subset_of(self, other: FocalSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub const fn contains(self, index: usize) -> bool {
        index < MAX_FRAME_SIZE && self.0 & (1 << index) != 0
    }

    pub fn is_singleton(self) -> bool {
        self.len() == 1
    }

    /// Element indices in increasing order.
    pub fn indices(self) -> impl Iterator<Item = usize> {
        (0..MAX_FRAME_SIZE).filter(move |&i| self.contains(i))
    }

    /// |A ∩ B| / |A ∪ B|, with the convention 1 for two empty sets.
    pub fn jaccard(self, other: FocalSet) -> f64 {
        let union = self.union(other).len();
        if union == 0 {
            return 1.0;
        }
        self.intersection(other).len() as f64 / union as f64
    }
}

impl fmt::Debug for FocalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.indices()).finish()
    }
}

impl fmt::Display for FocalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (n, i) in self.indices().enumerate() {
            if n > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        f.write_str("}")
    }
}

/// An ordered, finite set of mutually exclusive hypotheses.
///
/// Element order is fixed at construction and defines the bit layout of every
/// [`FocalSet`] on this frame. Cloning is cheap.
#[derive(Clone)]
pub struct Frame {
    labels: Arc<[String]>,
}

impl Frame {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidFrame("a frame needs at least one element".into()));
        }
        if labels.len() > MAX_FRAME_SIZE {
            return Err(Error::InvalidFrame(format!(
                "{} elements exceed the maximum of {MAX_FRAME_SIZE}",
                labels.len()
            )));
        }
        for (i, label) in labels.iter().enumerate() {
            if label.is_empty() {
                return Err(Error::InvalidFrame(format!("element {i} has an empty label")));
            }
            if labels[..i].contains(label) {
                return Err(Error::InvalidFrame(format!("duplicate label {label:?}")));
            }
        }
        Ok(Frame {
            labels: labels.into(),
        })
    }

    /// Frame with labels `E1..Ek`.
    pub fn indexed(size: usize) -> Result<Self> {
        Frame::new((1..=size).map(|i| format!("E{i}")))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> Option<&str> {
        self.labels.get(index).map(String::as_str)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// The whole frame, i.e. total ignorance.
    pub fn full(&self) -> FocalSet {
        if self.len() == MAX_FRAME_SIZE {
            FocalSet(u64::MAX)
        } else {
            FocalSet((1u64 << self.len()) - 1)
        }
    }

    pub fn contains(&self, set: FocalSet) -> bool {
        set.is_subset_of(self.full())
    }

    pub fn complement(&self, set: FocalSet) -> FocalSet {
        FocalSet(!set.0 & self.full().0)
    }

    /// Focal set from element labels.
    pub fn set_of(&self, labels: &[&str]) -> Result<FocalSet> {
        labels.iter().try_fold(FocalSet::EMPTY, |acc, l| {
            self.index_of(l)
                .map(|i| acc.union(FocalSet::singleton(i)))
                .ok_or_else(|| Error::InvalidFrame(format!("unknown element {l:?}")))
        })
    }

    pub(crate) fn check(&self, set: FocalSet) -> Result<()> {
        if self.contains(set) {
            Ok(())
        } else {
            Err(Error::OutsideFrame {
                bits: set.bits(),
                size: self.len(),
            })
        }
    }

    pub fn describe(&self, set: FocalSet) -> String {
        if set == self.full() && self.len() > 1 {
            return "Θ".to_string();
        }
        let names: Vec<&str> = set.indices().filter_map(|i| self.label(i)).collect();
        format!("{{{}}}", names.join(","))
    }
}

impl PartialEq for Frame {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.labels, &other.labels) || self.labels == other.labels
    }
}

impl Eq for Frame {}

impl fmt::Debug for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Frame").field(&&*self.labels).finish()
    }
}

/// A basic belief assignment: unit mass spread over non-empty subsets of a frame.
#[derive(Clone, PartialEq)]
pub struct MassFunction {
    frame: Frame,
    masses: BTreeMap<FocalSet, f64>,
}

impl MassFunction {
    /// Builds a mass function from `(focal set, mass)` pairs.
    ///
    /// Repeated focal sets accumulate. Zero masses are dropped. Fails if a set
    /// is empty or outside the frame, a mass is negative or not finite, or the
    /// total differs from 1 by more than [`MASS_SUM_TOLERANCE`].
    pub fn new<I>(frame: Frame, assignments: I) -> Result<Self>
    where
        I: IntoIterator<Item = (FocalSet, f64)>,
    {
        let mut masses = BTreeMap::new();
        for (set, value) in assignments {
            if set.is_empty() {
                if value == 0.0 {
                    continue;
                }
                return Err(Error::EmptyFocalSet);
            }
            frame.check(set)?;
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidMass {
                    bits: set.bits(),
                    value,
                });
            }
            if value > 0.0 {
                *masses.entry(set).or_insert(0.0) += value;
            }
        }
        let sum: f64 = masses.values().sum();
        if (sum - 1.0).abs() > MASS_SUM_TOLERANCE {
            return Err(Error::NotNormalized { sum });
        }
        Ok(MassFunction { frame, masses })
    }

    /// All mass on the whole frame.
    pub fn vacuous(frame: Frame) -> Self {
        let mut masses = BTreeMap::new();
        masses.insert(frame.full(), 1.0);
        MassFunction { frame, masses }
    }

    /// All mass on `set`.
    pub fn categorical(frame: Frame, set: FocalSet) -> Result<Self> {
        MassFunction::new(frame, [(set, 1.0)])
    }

    /// Mass on each singleton `{E_k}` plus an explicit ignorance mass on the
    /// whole frame.
    pub fn from_singletons(frame: Frame, singletons: &[f64], ignorance: f64) -> Result<Self> {
        if singletons.len() != frame.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} singleton masses for a frame of {}",
                singletons.len(),
                frame.len()
            )));
        }
        let full = frame.full();
        let pairs = singletons
            .iter()
            .enumerate()
            .map(|(k, &m)| (FocalSet::singleton(k), m))
            .chain(core::iter::once((full, ignorance)));
        MassFunction::new(frame, pairs)
    }

    /// Callers guarantee the invariants; masses are stored as given minus zeros.
    pub(crate) fn from_map_unchecked(frame: Frame, mut masses: BTreeMap<FocalSet, f64>) -> Self {
        masses.retain(|_, v| *v > 0.0);
        MassFunction { frame, masses }
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn mass(&self, set: FocalSet) -> f64 {
        self.masses.get(&set).copied().unwrap_or(0.0)
    }

    /// m(Θ).
    pub fn ignorance(&self) -> f64 {
        self.mass(self.frame.full())
    }

    /// Focal sets with positive mass, in canonical order.
    pub fn focal_sets(&self) -> impl Iterator<Item = (FocalSet, f64)> + '_ {
        self.masses.iter().map(|(&s, &m)| (s, m))
    }

    pub fn num_focal_sets(&self) -> usize {
        self.masses.len()
    }

    pub fn is_vacuous(&self) -> bool {
        self.masses.len() == 1 && self.ignorance() > 0.0
    }

    /// Masses laid out along `basis`; sets absent from `basis` are ignored.
    pub fn to_vector(&self, basis: &[FocalSet]) -> Vec<f64> {
        basis.iter().map(|&s| self.mass(s)).collect()
    }

    /// Singleton masses `m({E_k})` for every frame element.
    pub fn singleton_masses(&self) -> Vec<f64> {
        (0..self.frame.len())
            .map(|k| self.mass(FocalSet::singleton(k)))
            .collect()
    }

    /// Index of the largest singleton mass; ties go to the lowest index.
    pub fn argmax_singleton(&self) -> usize {
        let mut best = 0;
        let mut best_mass = f64::NEG_INFINITY;
        for k in 0..self.frame.len() {
            let m = self.mass(FocalSet::singleton(k));
            if m > best_mass {
                best = k;
                best_mass = m;
            }
        }
        best
    }

    pub fn sum(&self) -> f64 {
        self.masses.values().sum()
    }

    /// Bel(A) = Σ_{B ⊆ A} m(B).
    pub fn belief(&self, a: FocalSet) -> Result<f64> {
        self.frame.check(a)?;
        Ok(self
            .masses
            .iter()
            .filter(|(b, _)| b.is_subset_of(a))
            .map(|(_, m)| m)
            .sum())
    }

    /// Pl(A) = Σ_{B ∩ A ≠ ∅} m(B).
    pub fn plausibility(&self, a: FocalSet) -> Result<f64> {
        self.frame.check(a)?;
        Ok(self
            .masses
            .iter()
            .filter(|(b, _)| !b.intersection(a).is_empty())
            .map(|(_, m)| m)
            .sum())
    }

    fn same_frame(&self, other: &MassFunction) -> Result<()> {
        if self.frame == other.frame {
            Ok(())
        } else {
            Err(Error::FrameMismatch)
        }
    }

    /// Conflict coefficient K: mass of the products landing on the empty set.
    pub fn conflict(&self, other: &MassFunction) -> Result<f64> {
        self.same_frame(other)?;
        let mut products: Vec<f64> = Vec::new();
        for (a, ma) in &self.masses {
            for (b, mb) in &other.masses {
                if a.intersection(*b).is_empty() {
                    products.push(ma * mb);
                }
            }
        }
        Ok(sorted_sum(&mut products))
    }

    /// Dempster's rule of combination.
    pub fn combine(&self, other: &MassFunction) -> Result<MassFunction> {
        self.same_frame(other)?;
        let masses = orthogonal_sum(&self.masses, &other.masses)
            .map_err(|k| Error::TotalConflict { k, left: 0, right: 1 })?;
        Ok(MassFunction {
            frame: self.frame.clone(),
            masses,
        })
    }
}

impl fmt::Debug for MassFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.masses.iter().map(|(s, m)| (self.frame.describe(*s), m)))
            .finish()
    }
}

/// Left fold of Dempster's rule: `((m1 ⊕ m2) ⊕ m3) ⊕ …`.
///
/// On total conflict the error reports `left = i - 1`, the last index of the
/// already combined prefix, and `right = i`.
pub fn combine_many(ms: &[MassFunction]) -> Result<MassFunction> {
    let (first, rest) = ms.split_first().ok_or(Error::TooFewEvidences { needed: 1, got: 0 })?;
    if rest.iter().any(|m| m.frame != first.frame) {
        return Err(Error::FrameMismatch);
    }
    let rows: Vec<&BTreeMap<FocalSet, f64>> = ms.iter().map(|m| &m.masses).collect();
    let masses = dempster_fold(&rows)?;
    Ok(MassFunction {
        frame: first.frame.clone(),
        masses,
    })
}

/// Dempster's rule over non-negative, not necessarily normalized, mass rows.
///
/// Each step takes the conjunctive sum and divides by the mass that did not
/// land on the empty set. For unit-sum inputs that is exactly `1 - K`.
pub(crate) fn dempster_fold(rows: &[&BTreeMap<FocalSet, f64>]) -> Result<BTreeMap<FocalSet, f64>> {
    let (first, rest) = rows.split_first().ok_or(Error::TooFewEvidences { needed: 1, got: 0 })?;
    let mut acc: BTreeMap<FocalSet, f64> = (*first).clone();
    if rest.is_empty() {
        let total: f64 = acc.values().sum();
        if total <= 0.0 {
            return Err(Error::NotNormalized { sum: total });
        }
        acc.values_mut().for_each(|v| *v /= total);
        return Ok(acc);
    }
    for (i, row) in rest.iter().enumerate() {
        acc = orthogonal_sum(&acc, row).map_err(|k| Error::TotalConflict {
            k,
            left: i,
            right: i + 1,
        })?;
    }
    Ok(acc)
}

/// Normalized conjunctive sum. `Err(k)` carries the relative conflict when the
/// combination is undefined.
///
/// Contributions to each focal set are summed in sorted order, so swapping the
/// operands yields bit-identical output.
fn orthogonal_sum(
    a: &BTreeMap<FocalSet, f64>,
    b: &BTreeMap<FocalSet, f64>,
) -> core::result::Result<BTreeMap<FocalSet, f64>, f64> {
    let mut products: Vec<(FocalSet, f64)> = Vec::with_capacity(a.len() * b.len());
    let mut conflicting: Vec<f64> = Vec::new();
    for (sa, ma) in a {
        for (sb, mb) in b {
            let p = ma * mb;
            let meet = sa.intersection(*sb);
            if meet.is_empty() {
                conflicting.push(p);
            } else {
                products.push((meet, p));
            }
        }
    }
    products.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));

    let mut joint: BTreeMap<FocalSet, f64> = BTreeMap::new();
    for (set, p) in products {
        *joint.entry(set).or_insert(0.0) += p;
    }
    let kept: f64 = joint.values().sum();
    let conflict = sorted_sum(&mut conflicting);
    let total = kept + conflict;
    if !(total > 0.0) {
        return Err(1.0);
    }
    let k = conflict / total;
    if !(kept > 0.0) || k >= 1.0 - TOTAL_CONFLICT_EPS {
        return Err(k);
    }

    joint.values_mut().for_each(|v| *v /= kept);
    joint.retain(|_, v| *v >= PRUNE_THRESHOLD);
    let renorm: f64 = joint.values().sum();
    if renorm != 1.0 {
        joint.values_mut().for_each(|v| *v /= renorm);
    }
    Ok(joint)
}

fn sorted_sum(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum()
}
