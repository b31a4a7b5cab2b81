//! Cancellation-aware residuals.
//!
//! An identity is written as a list of additive terms that should sum to
//! zero. The relative residual is `|Σ terms| / (Σ |terms| + 1e-30)`; for
//! tensor identities the absolute values are component max-norms.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::tensor::Tensor;

pub const RESIDUAL_FLOOR: f64 = 1e-30;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Residual {
    pub label: String,
    pub abs: f64,
    pub scale: f64,
}

impl Residual {
    pub fn relative(&self) -> f64 {
        self.abs / (self.scale + RESIDUAL_FLOOR)
    }

    /// Terms of `Σ t = 0`.
    pub fn scalar(label: impl Into<String>, terms: &[f64]) -> Self {
        Self {
            label: label.into(),
            abs: terms.iter().sum::<f64>().abs(),
            scale: terms.iter().map(|t| t.abs()).sum(),
        }
    }

    pub fn jets(label: impl Into<String>, terms: &[&Jet]) -> Result<Self> {
        let values = terms.iter().map(|j| j.value()).collect::<Result<Vec<_>>>()?;
        Ok(Self::scalar(label, &values))
    }

    pub fn tensors(label: impl Into<String>, terms: &[&Tensor<Jet>]) -> Result<Self> {
        let first = terms.first().ok_or_else(|| Error::Config("empty identity".into()))?;
        let values = terms.iter().map(|t| t.values()).collect::<Result<Vec<_>>>()?;
        if terms.iter().any(|t| t.slots() != first.slots() || t.dim() != first.dim()) {
            return Err(Error::Config("identity terms have different shapes".into()));
        }
        let ncomp = values[0].len();
        let abs = (0..ncomp).map(|c| values.iter().map(|v| v[c]).sum::<f64>().abs()).fold(0.0, f64::max);
        let scale = values.iter().map(|v| v.iter().map(|x| x.abs()).fold(0.0, f64::max)).sum();
        Ok(Self { label: label.into(), abs, scale })
    }

    /// `lhs ≥ rhs`; the residual is the size of any violation.
    pub fn inequality(label: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self { label: label.into(), abs: (rhs - lhs).max(0.0), scale: lhs.abs() + rhs.abs() }
    }
}

/// Largest relative residual in a set.
pub fn worst(residuals: &[Residual]) -> f64 {
    residuals.iter().map(Residual::relative).fold(0.0, f64::max)
}
