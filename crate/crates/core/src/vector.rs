use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Class label of a training point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn from_sign(value: f64) -> Label {
        if value >= 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn value(self) -> i8 {
        match self {
            Label::Positive => 1,
            Label::Negative => -1,
        }
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.value())
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        }
    }
}

impl TryFrom<i64> for Label {
    type Error = Error;

    fn try_from(value: i64) -> Result<Label> {
        match value {
            1 => Ok(Label::Positive),
            -1 => Ok(Label::Negative),
            other => Err(Error::InvalidData(format!(
                "label must be +1 or -1, got {other}"
            ))),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Positive => f.write_str("+1"),
            Label::Negative => f.write_str("-1"),
        }
    }
}

/// A point in `R^dim` stored as `(index, value)` pairs with 1-based,
/// strictly increasing indices. Zero coordinates may be omitted.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    coords: Vec<(usize, f64)>,
    dim: usize,
}

impl FeatureVector {
    pub fn new(dim: usize, coords: Vec<(usize, f64)>) -> Result<FeatureVector> {
        let mut last = 0;
        for &(index, value) in &coords {
            if index <= last || index > dim {
                return Err(Error::InvalidData(format!(
                    "index {index} out of order or outside 1..={dim}"
                )));
            }
            if !value.is_finite() {
                return Err(Error::InvalidData(format!(
                    "non-finite value at index {index}"
                )));
            }
            last = index;
        }
        Ok(FeatureVector { coords, dim })
    }

    /// Builds a sparse vector from dense values, dropping exact zeros.
    pub fn from_dense(values: &[f64]) -> Result<FeatureVector> {
        let coords = values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (i + 1, *v))
            .collect();
        FeatureVector::new(values.len(), coords)
    }

    pub fn zeros(dim: usize) -> FeatureVector {
        FeatureVector {
            coords: Vec::new(),
            dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[(usize, f64)] {
        &self.coords
    }

    pub fn nnz(&self) -> usize {
        self.coords.len()
    }

    /// Value at a 1-based index; absent coordinates are zero.
    pub fn get(&self, index: usize) -> f64 {
        self.coords
            .binary_search_by_key(&index, |&(i, _)| i)
            .map(|pos| self.coords[pos].1)
            .unwrap_or(0.0)
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.dim];
        self.scatter_into(&mut out);
        out
    }

    pub(crate) fn scatter_into(&self, out: &mut [f64]) {
        for &(index, value) in &self.coords {
            out[index - 1] = value;
        }
    }

    /// Same point with a larger declared dimensionality.
    pub fn with_dim(mut self, dim: usize) -> Result<FeatureVector> {
        if let Some(&(last, _)) = self.coords.last() {
            if last > dim {
                return Err(Error::Dimension {
                    expected: dim,
                    found: last,
                });
            }
        }
        self.dim = dim;
        Ok(self)
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim != dim {
            return Err(Error::Dimension {
                expected: dim,
                found: self.dim,
            });
        }
        Ok(())
    }

    /// Inner product over the shared support of two sparse vectors.
    pub fn dot(&self, other: &FeatureVector) -> f64 {
        let (a, b) = (&self.coords, &other.coords);
        let (mut i, mut j) = (0, 0);
        let mut sum = 0.0;
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                core::cmp::Ordering::Less => i += 1,
                core::cmp::Ordering::Greater => j += 1,
                core::cmp::Ordering::Equal => {
                    sum += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        sum
    }

    /// Inner product with a dense weight vector indexed from zero.
    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.coords
            .iter()
            .map(|&(index, value)| dense[index - 1] * value)
            .sum()
    }

    pub fn squared_distance(&self, other: &FeatureVector) -> f64 {
        let (a, b) = (&self.coords, &other.coords);
        let (mut i, mut j) = (0, 0);
        let mut sum = 0.0;
        while i < a.len() || j < b.len() {
            let d = match (a.get(i), b.get(j)) {
                (Some(&(ia, va)), Some(&(ib, vb))) if ia == ib => {
                    i += 1;
                    j += 1;
                    va - vb
                }
                (Some(&(ia, va)), Some(&(ib, _))) if ia < ib => {
                    i += 1;
                    va
                }
                (Some(&(_, va)), None) => {
                    i += 1;
                    va
                }
                (_, Some(&(_, vb))) => {
                    j += 1;
                    -vb
                }
                (None, None) => unreachable!(),
            };
            sum += d * d;
        }
        sum
    }
}
