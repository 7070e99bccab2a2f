//! Probability vectors on the simplex Δₙ.

use crate::{Error, Result};

/// Absolute tolerance on `|Σ pᵢ - 1|` accepted by [`SimplexVector::new`].
pub const SUM_TOLERANCE: f64 = 1e-9;

/// A nonnegative vector summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexVector(Vec<f64>);

impl SimplexVector {
    /// Validates `weights` as a member of Δₙ (finite, nonnegative, sum within
    /// [`SUM_TOLERANCE`] of one). The stored vector is not renormalized.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        validate_entries(&weights)?;
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidInput(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self(weights))
    }

    /// Divides by the total. Rejects empty, negative, or all-zero input.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        validate_entries(&weights)?;
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidInput("weights sum to zero".into()));
        }
        Ok(Self(weights.into_iter().map(|w| w / total).collect()))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("empty distribution".into()));
        }
        Ok(Self(vec![1.0 / n as f64; n]))
    }

    /// The point mass on `index`.
    pub fn dirac(n: usize, index: usize) -> Result<Self> {
        if index >= n {
            return Err(Error::IndexOutOfRange { i: index, j: 0, n });
        }
        let mut w = vec![0.0; n];
        w[index] = 1.0;
        Ok(Self(w))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub(crate) fn from_raw(weights: Vec<f64>) -> Self {
        Self(weights)
    }
}

impl AsRef<[f64]> for SimplexVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

fn validate_entries(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::InvalidInput("empty distribution".into()));
    }
    if let Some((i, w)) = weights
        .iter()
        .enumerate()
        .find(|(_, w)| !w.is_finite() || **w < 0.0)
    {
        return Err(Error::InvalidInput(format!(
            "weight {i} is {w}, expected a finite nonnegative value"
        )));
    }
    Ok(())
}

/// ℓ1 distance between two equal-length slices.
pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_off_simplex() {
        assert!(SimplexVector::new(vec![0.5, 0.6]).is_err());
        assert!(SimplexVector::new(vec![1.5, -0.5]).is_err());
        assert!(SimplexVector::new(vec![]).is_err());
        assert!(SimplexVector::new(vec![f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn normalizes() {
        let p = SimplexVector::normalized(vec![1.0, 3.0]).unwrap();
        assert_eq!(p.as_slice(), &[0.25, 0.75]);
        assert!(SimplexVector::normalized(vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn dirac_and_uniform() {
        assert_eq!(SimplexVector::dirac(3, 1).unwrap().as_slice(), &[0.0, 1.0, 0.0]);
        assert!(SimplexVector::dirac(3, 3).is_err());
        assert_eq!(SimplexVector::uniform(4).unwrap().as_slice(), &[0.25; 4]);
    }
}
