//! Truncated ℓ¹ sequence space.
//!
//! A [`TruncatedVector`] is an element of the span of the first `N`
//! coordinate vectors of ℓ¹. The coordinate blocks of the decomposition are
//! one-dimensional, so the block projection `Q_h` keeps coordinate `h` and
//! the partial-sum projection `P_h` keeps coordinates `1..=h`. Indices are
//! 1-based throughout the public API.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::sum::compensated_sum;

/// Finitely supported ℓ¹ vector with an explicit truncation dimension.
///
/// Serializes as a plain JSON array of numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TruncatedVector {
    coords: Vec<f64>,
}

impl TryFrom<Vec<f64>> for TruncatedVector {
    type Error = LabError;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Self::new(coords)
    }
}

impl From<TruncatedVector> for Vec<f64> {
    fn from(v: TruncatedVector) -> Self {
        v.coords
    }
}

impl TruncatedVector {
    /// Validates that the vector is nonempty and every coefficient is finite.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(LabError::InvalidInput(
                "truncation dimension must be >= 1".into(),
            ));
        }
        if let Some(position) = coords.iter().position(|c| !c.is_finite()) {
            return Err(LabError::NonFinite {
                position: position + 1,
            });
        }
        Ok(Self { coords })
    }

    /// Wraps coordinates produced by finite arithmetic on finite inputs.
    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty());
        debug_assert!(coords.iter().all(|c| c.is_finite()));
        Self { coords }
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(LabError::InvalidInput(
                "truncation dimension must be >= 1".into(),
            ));
        }
        Ok(Self {
            coords: vec![0.0; dim],
        })
    }

    /// The unit vector `e_k`.
    pub fn basis(k: usize, dim: usize) -> Result<Self> {
        check_index(k, dim)?;
        let mut v = Self::zeros(dim)?;
        v.coords[k - 1] = 1.0;
        Ok(v)
    }

    /// Builds a vector from 1-based `(index, value)` pairs; repeated indices accumulate.
    pub fn from_sparse(dim: usize, entries: &[(usize, f64)]) -> Result<Self> {
        let mut v = Self::zeros(dim)?;
        for &(k, value) in entries {
            check_index(k, dim)?;
            v.coords[k - 1] += value;
        }
        Self::new(v.coords)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Coordinate `x_k`, 1-based.
    pub fn get(&self, k: usize) -> Result<f64> {
        check_index(k, self.dim())?;
        Ok(self.coords[k - 1])
    }

    /// `Q_h x`: keeps only coordinate `h`.
    pub fn project_q(&self, h: usize) -> Result<Self> {
        check_index(h, self.dim())?;
        let mut coords = vec![0.0; self.dim()];
        coords[h - 1] = self.coords[h - 1];
        Ok(Self { coords })
    }

    /// `P_h x`: zeroes every coordinate above `h`.
    pub fn project_p(&self, h: usize) -> Result<Self> {
        check_index(h, self.dim())?;
        let mut coords = self.coords.clone();
        coords[h..].iter_mut().for_each(|c| *c = 0.0);
        Ok(Self { coords })
    }

    pub fn norm_l1(&self) -> f64 {
        compensated_sum(self.coords.iter().map(|c| c.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0.0)
    }

    /// Largest coordinate value together with its 1-based index (first on ties).
    pub fn max_coordinate(&self) -> (usize, f64) {
        let mut best = (1, self.coords[0]);
        for (i, &c) in self.coords.iter().enumerate().skip(1) {
            if c > best.1 {
                best = (i + 1, c);
            }
        }
        best
    }

    /// Smallest index `j` whose cumulative absolute mass reaches half the total.
    ///
    /// Returns `None` for the zero vector.
    pub fn median_index(&self) -> Option<usize> {
        let total = self.norm_l1();
        if total == 0.0 {
            return None;
        }
        let mut acc = 0.0;
        for (i, c) in self.coords.iter().enumerate() {
            acc += c.abs();
            if acc >= 0.5 * total {
                return Some(i + 1);
            }
        }
        Some(self.dim())
    }

    pub fn scale(&self, alpha: f64) -> Self {
        Self::from_raw(self.coords.iter().map(|c| alpha * c).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &Self) -> Result<()> {
        check_same_dim(self.dim(), other.dim())?;
        for (a, b) in self.coords.iter_mut().zip(&other.coords) {
            *a += alpha * b;
        }
        Ok(())
    }

    /// ℓ¹ distance `‖self − other‖₁`.
    pub fn distance_l1(&self, other: &Self) -> Result<f64> {
        check_same_dim(self.dim(), other.dim())?;
        Ok(compensated_sum(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| (a - b).abs()),
        ))
    }

    fn zip_with(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Result<Self> {
        check_same_dim(self.dim(), other.dim())?;
        Ok(Self::from_raw(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        ))
    }
}

pub(crate) fn check_index(k: usize, dim: usize) -> Result<()> {
    if (1..=dim).contains(&k) {
        Ok(())
    } else {
        Err(LabError::IndexOutOfRange { index: k, dim })
    }
}

pub(crate) fn check_same_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(LabError::DimensionMismatch { expected, found })
    }
}

/// Bounded functional on ℓ¹, i.e. an element of ℓ^∞.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DualFunctional {
    /// `f = (1, 1, …)`, the coordinate-sum functional.
    ConstantOne,
    Sequence {
        values: Vec<f64>,
    },
}

impl DualFunctional {
    pub fn sequence(values: Vec<f64>) -> Result<Self> {
        if let Some(position) = values.iter().position(|c| !c.is_finite()) {
            return Err(LabError::NonFinite {
                position: position + 1,
            });
        }
        Ok(Self::Sequence { values })
    }

    pub fn sup_norm(&self) -> f64 {
        match self {
            Self::ConstantOne => 1.0,
            Self::Sequence { values } => values.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    /// The duality pairing `⟨x, f⟩ = Σ f_k x_k`.
    pub fn pair(&self, x: &TruncatedVector) -> Result<f64> {
        match self {
            Self::ConstantOne => Ok(compensated_sum(x.coords.iter().copied())),
            Self::Sequence { values } => {
                if values.len() < x.dim() {
                    return Err(LabError::DimensionMismatch {
                        expected: x.dim(),
                        found: values.len(),
                    });
                }
                Ok(compensated_sum(
                    x.coords.iter().zip(values).map(|(a, b)| a * b),
                ))
            }
        }
    }
}
