//! Partitioned finite ground sets and configurations.
//!
//! The ground set is a fixed ordering of `n` points, each carrying a part
//! label (side 1 or side 2 of the split) and a strictly positive weight.
//! Configurations are subsets of point indices; the particle-hole
//! involution keeps the part-1 points of a configuration and flips the
//! part-2 points to their holes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use nalgebra::DMatrix;

/// Side of the split X = X₁ ⊔ X₂.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Part {
    One,
    Two,
}

impl Part {
    /// Numeric label used in file formats (1 or 2).
    pub fn label(self) -> u8 {
        match self {
            Part::One => 1,
            Part::Two => 2,
        }
    }

    pub fn from_label(label: u8) -> Result<Self, SpaceError> {
        match label {
            1 => Ok(Part::One),
            2 => Ok(Part::Two),
            other => Err(SpaceError::BadPartLabel(other)),
        }
    }

    pub fn other(self) -> Self {
        match self {
            Part::One => Part::Two,
            Part::Two => Part::One,
        }
    }
}

impl Serialize for Part {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.label())
    }
}

impl<'de> Deserialize<'de> for Part {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let label = u8::deserialize(d)?;
        Part::from_label(label).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SpaceError {
    #[error("part label must be 1 or 2, got {0}")]
    BadPartLabel(u8),
    #[error("index {index} out of bounds for ground set of size {n}")]
    OutOfBounds { index: usize, n: usize },
    #[error("duplicate index {0} in configuration")]
    DuplicateIndex(usize),
    #[error("weight at index {index} must be strictly positive, got {weight}")]
    NonPositiveWeight { index: usize, weight: f64 },
    #[error("expected {expected} {what}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
}

/// Finite ground set with a two-part split and point weights.
///
/// The point ordering is canonical: every matrix bound to this space
/// indexes rows and columns by the same ordering. Part-1 and part-2
/// points may interleave freely.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionedSpace {
    part: Vec<Part>,
    weights: Vec<f64>,
    labels: Option<Vec<String>>,
}

impl PartitionedSpace {
    pub fn new(
        part: Vec<Part>,
        weights: Option<Vec<f64>>,
        labels: Option<Vec<String>>,
    ) -> Result<Self, SpaceError> {
        let n = part.len();
        let weights = weights.unwrap_or_else(|| vec![1.0; n]);
        if weights.len() != n {
            return Err(SpaceError::LengthMismatch {
                what: "weights",
                expected: n,
                got: weights.len(),
            });
        }
        for (index, &weight) in weights.iter().enumerate() {
            if weight <= 0.0 || !weight.is_finite() {
                return Err(SpaceError::NonPositiveWeight { index, weight });
            }
        }
        if let Some(ref labels) = labels {
            if labels.len() != n {
                return Err(SpaceError::LengthMismatch {
                    what: "labels",
                    expected: n,
                    got: labels.len(),
                });
            }
        }
        Ok(Self {
            part,
            weights,
            labels,
        })
    }

    /// Counting-measure space: all weights 1.
    pub fn counting(part: Vec<Part>) -> Self {
        let n = part.len();
        Self {
            part,
            weights: vec![1.0; n],
            labels: None,
        }
    }

    /// Convenience constructor from numeric labels (1/2).
    pub fn from_labels(labels: &[u8]) -> Result<Self, SpaceError> {
        let part = labels
            .iter()
            .map(|&l| Part::from_label(l))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::counting(part))
    }

    /// Space with `n1` part-1 points followed by `n2` part-2 points.
    pub fn two_blocks(n1: usize, n2: usize) -> Self {
        let mut part = vec![Part::One; n1];
        part.extend(std::iter::repeat_n(Part::Two, n2));
        Self::counting(part)
    }

    pub fn n(&self) -> usize {
        self.part.len()
    }

    pub fn part(&self, index: usize) -> Part {
        self.part[index]
    }

    pub fn parts(&self) -> &[Part] {
        &self.part
    }

    pub fn weight(&self, index: usize) -> f64 {
        self.weights[index]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn has_unit_weights(&self) -> bool {
        self.weights.iter().all(|&w| w == 1.0)
    }

    /// Indices belonging to the given part, in ground-set order.
    pub fn indices_of(&self, which: Part) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.part[i] == which).collect()
    }

    pub fn count_of(&self, which: Part) -> usize {
        self.part.iter().filter(|&&p| p == which).count()
    }

    /// Orthogonal projection P₁ or P₂ as a 0/1 diagonal matrix.
    pub fn projector(&self, which: Part) -> DMatrix<f64> {
        DMatrix::from_fn(self.n(), self.n(), |i, j| {
            if i == j && self.part[i] == which {
                1.0
            } else {
                0.0
            }
        })
    }

    /// J = P₁ − P₂ as a ±1 diagonal matrix.
    pub fn j_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n(), self.n(), |i, j| {
            if i != j {
                0.0
            } else if self.part[i] == Part::One {
                1.0
            } else {
                -1.0
            }
        })
    }

    fn check_bounds(&self, indices: &[usize]) -> Result<(), SpaceError> {
        for &index in indices {
            if index >= self.n() {
                return Err(SpaceError::OutOfBounds { index, n: self.n() });
            }
        }
        Ok(())
    }

    /// Particle-hole involution: Iγ = (γ ∩ X₁) ∪ (X₂ \ γ).
    pub fn complement(&self, gamma: &Configuration) -> Result<Configuration, SpaceError> {
        self.check_bounds(gamma.members())?;
        let members = (0..self.n())
            .filter(|&i| match self.part[i] {
                Part::One => gamma.contains(i),
                Part::Two => !gamma.contains(i),
            })
            .collect();
        Ok(Configuration::from_sorted(members))
    }

    /// Splits a window into (Δ ∩ X₁, Δ ∩ X₂).
    pub fn window_split(
        &self,
        delta: &IndexWindow,
    ) -> Result<(IndexWindow, IndexWindow), SpaceError> {
        self.check_bounds(delta.indices())?;
        let (one, two): (Vec<usize>, Vec<usize>) = delta
            .indices()
            .iter()
            .partition(|&&i| self.part[i] == Part::One);
        Ok((IndexWindow::from_sorted(one), IndexWindow::from_sorted(two)))
    }

    /// Sub-space induced by a window: part labels, weights, and labels
    /// are inherited at the selected indices, in ground-set order.
    pub fn restrict(&self, delta: &IndexWindow) -> Result<PartitionedSpace, SpaceError> {
        self.check_bounds(delta.indices())?;
        let idx = delta.indices();
        Ok(PartitionedSpace {
            part: idx.iter().map(|&i| self.part[i]).collect(),
            weights: idx.iter().map(|&i| self.weights[i]).collect(),
            labels: self
                .labels
                .as_ref()
                .map(|ls| idx.iter().map(|&i| ls[i].clone()).collect()),
        })
    }

    /// Complement of a configuration given as a bitmask (bit i = point i).
    /// Only valid for n ≤ 64.
    pub fn complement_mask(&self, mask: u64) -> u64 {
        debug_assert!(self.n() <= 64);
        let mut out = 0u64;
        for i in 0..self.n() {
            let present = mask >> i & 1 == 1;
            let keep = match self.part[i] {
                Part::One => present,
                Part::Two => !present,
            };
            if keep {
                out |= 1 << i;
            }
        }
        out
    }
}

/// A point-process sample: a sorted set of ground-set indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Configuration {
    members: Vec<usize>,
}

impl Configuration {
    /// Builds a configuration, sorting the indices; duplicates are an error.
    pub fn new(mut members: Vec<usize>) -> Result<Self, SpaceError> {
        members.sort_unstable();
        for w in members.windows(2) {
            if w[0] == w[1] {
                return Err(SpaceError::DuplicateIndex(w[0]));
            }
        }
        Ok(Self { members })
    }

    pub(crate) fn from_sorted(members: Vec<usize>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        Self { members }
    }

    pub fn empty() -> Self {
        Self { members: vec![] }
    }

    pub fn full(n: usize) -> Self {
        Self {
            members: (0..n).collect(),
        }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.members.binary_search(&index).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    /// Bitmask form (bit i set iff point i present); requires indices < 64.
    pub fn to_mask(&self) -> u64 {
        debug_assert!(self.members.last().is_none_or(|&m| m < 64));
        self.members.iter().fold(0u64, |acc, &i| acc | 1 << i)
    }

    pub fn from_mask(mask: u64, n: usize) -> Self {
        Self {
            members: (0..n).filter(|&i| mask >> i & 1 == 1).collect(),
        }
    }
}

/// A finite observation window Δ: a sorted subset of ground-set indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexWindow {
    indices: Vec<usize>,
}

impl IndexWindow {
    pub fn new(mut indices: Vec<usize>) -> Result<Self, SpaceError> {
        indices.sort_unstable();
        for w in indices.windows(2) {
            if w[0] == w[1] {
                return Err(SpaceError::DuplicateIndex(w[0]));
            }
        }
        Ok(Self { indices })
    }

    pub(crate) fn from_sorted(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Self { indices }
    }

    pub fn empty() -> Self {
        Self { indices: vec![] }
    }

    pub fn full(n: usize) -> Self {
        Self {
            indices: (0..n).collect(),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }
}
