//! Scalar algebra shared by the jet pathway and the finite-difference grid.
//!
//! Geometry and Harnack quantities are written once against [`Field`]; the
//! jet implementation differentiates exactly, the grid implementation with
//! periodic central stencils.

use std::fmt::Debug;

use crate::error::{Error, Result};
use crate::jet::{Jet, VarRole};

pub trait Field: Clone + Debug + Send + Sync {
    fn constant_like(&self, c: f64) -> Self;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn scale(&self, c: f64) -> Self;
    fn recip(&self) -> Result<Self>;
    fn sqrt(&self) -> Result<Self>;
    fn exp(&self) -> Self;
    fn ln(&self) -> Result<Self>;
    /// Derivative along spatial coordinate `axis`.
    fn partial(&self, axis: usize) -> Result<Self>;
    /// Size used for symmetry and cancellation tests.
    fn magnitude(&self) -> f64;
    /// Smallest pointwise value (the base-point value for a jet).
    fn min_value(&self) -> f64;

    fn zero_like(&self) -> Self {
        self.constant_like(0.0)
    }

    fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    fn div(&self, rhs: &Self) -> Result<Self> {
        Ok(self.mul(&rhs.recip()?))
    }

    /// `self += a * b`
    fn add_product(&mut self, a: &Self, b: &Self) {
        *self = self.add(&a.mul(b));
    }

    fn add_scaled(&self, rhs: &Self, c: f64) -> Self {
        self.add(&rhs.scale(c))
    }
}

/// Sum of an iterator of field values; `None` for an empty iterator.
pub fn sum<'a, F: Field + 'a>(items: impl IntoIterator<Item = &'a F>) -> Option<F> {
    let mut it = items.into_iter();
    let first = it.next()?.clone();
    Some(it.fold(first, |acc, x| acc.add(x)))
}

impl Field for Jet {
    fn constant_like(&self, c: f64) -> Self {
        Jet::constant(self.space(), c)
    }

    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }

    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }

    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }

    fn scale(&self, c: f64) -> Self {
        Jet::scale(self, c)
    }

    fn recip(&self) -> Result<Self> {
        Jet::recip(self)
    }

    fn sqrt(&self) -> Result<Self> {
        Jet::sqrt(self)
    }

    fn exp(&self) -> Self {
        Jet::exp(self)
    }

    fn ln(&self) -> Result<Self> {
        Jet::ln(self)
    }

    fn partial(&self, axis: usize) -> Result<Self> {
        let role = VarRole::Space(axis as u8);
        let var = self
            .space()
            .var_of(role)
            .ok_or(Error::DimensionMismatch { expected: self.space().space_dim(), got: axis + 1 })?;
        Jet::partial(self, var)
    }

    fn magnitude(&self) -> f64 {
        self.max_abs_exact()
    }

    fn min_value(&self) -> f64 {
        self.coeffs()[0]
    }

    fn add_product(&mut self, a: &Self, b: &Self) {
        *self += &(a * b);
    }
}
