//! Observation storage.
//!
//! A [`Dataset`] holds `n` rows of `dim` reals in row-major order. For
//! conditional (regression) data the rows are covariate vectors `u` and a
//! separate response vector holds `y`.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// A single observation borrowed from a [`Dataset`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Obs<'a> {
    Point(&'a [f64]),
    Pair { covariates: &'a [f64], response: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    dim: usize,
    values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    response: Option<Vec<f64>>,
}

fn check_finite(values: &[f64], what: &str) -> Result<()> {
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "{what} contains a non-finite value at flat index {i}"
        )));
    }
    Ok(())
}

impl Dataset {
    /// Unconditional data: `values.len()` must be a multiple of `dim`.
    pub fn points(dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("observation dimension must be positive".into()));
        }
        if values.len() % dim != 0 {
            return Err(Error::InvalidInput(format!(
                "{} values do not form rows of length {dim}",
                values.len()
            )));
        }
        check_finite(&values, "data")?;
        Ok(Self { dim, values, response: None })
    }

    pub fn univariate(values: Vec<f64>) -> Result<Self> {
        Self::points(1, values)
    }

    /// Conditional data: `covariates` is `n × p` row-major, `response` has length `n`.
    pub fn regression(p: usize, covariates: Vec<f64>, response: Vec<f64>) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidInput("covariate count must be positive".into()));
        }
        if covariates.len() != p * response.len() {
            return Err(Error::InvalidInput(format!(
                "{} covariate values do not match {} responses with p = {p}",
                covariates.len(),
                response.len()
            )));
        }
        check_finite(&covariates, "covariates")?;
        check_finite(&response, "response")?;
        Ok(Self { dim: p, values: covariates, response: Some(response) })
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Row length: observation dimension, or covariate count for conditional data.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_conditional(&self) -> bool {
        self.response.is_some()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn responses(&self) -> Option<&[f64]> {
        self.response.as_deref()
    }

    #[inline]
    pub fn obs(&self, i: usize) -> Obs<'_> {
        match &self.response {
            None => Obs::Point(self.row(i)),
            Some(y) => Obs::Pair { covariates: self.row(i), response: y[i] },
        }
    }

    /// Rows reordered (or resampled) by `indices`.
    pub fn select(&self, indices: &[usize]) -> Self {
        let mut values = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        let response = self.response.as_ref().map(|y| indices.iter().map(|&i| y[i]).collect());
        Self { dim: self.dim, values, response }
    }

    /// Appends `other` after `self`.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim || self.is_conditional() != other.is_conditional() {
            return Err(Error::InvalidInput("cannot concatenate datasets of different shape".into()));
        }
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        let response = match (&self.response, &other.response) {
            (Some(a), Some(b)) => Some(a.iter().chain(b).copied().collect()),
            _ => None,
        };
        Ok(Self { dim: self.dim, values, response })
    }

    /// SHA-256 over the little-endian bytes of every stored value.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.dim as u64).to_le_bytes());
        for v in &self.values {
            hasher.update(v.to_le_bytes());
        }
        if let Some(y) = &self.response {
            hasher.update(b"response");
            for v in y {
                hasher.update(v.to_le_bytes());
            }
        }
        hex::encode(hasher.finalize())
    }
}
