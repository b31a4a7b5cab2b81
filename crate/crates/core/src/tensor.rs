//! Dense coordinate tensors with per-slot variance.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::jet::Jet;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variance {
    Up,
    Down,
}

pub use Variance::{Down, Up};

/// Components `T^{..}_{..}` stored row-major in slot order.
#[derive(Clone, Debug)]
pub struct Tensor<F> {
    dim: usize,
    slots: Vec<Variance>,
    comps: Vec<F>,
}

/// All index tuples of the given rank, row-major.
pub fn index_tuples(dim: usize, rank: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = dim.pow(rank as u32);
    (0..total).map(move |mut flat| {
        let mut idx = vec![0; rank];
        for slot in (0..rank).rev() {
            idx[slot] = flat % dim;
            flat /= dim;
        }
        idx
    })
}

impl<F: Field> Tensor<F> {
    pub fn from_fn(dim: usize, slots: &[Variance], mut f: impl FnMut(&[usize]) -> F) -> Self {
        let comps = index_tuples(dim, slots.len()).map(|i| f(&i)).collect();
        Self { dim, slots: slots.to_vec(), comps }
    }

    pub fn try_from_fn(
        dim: usize,
        slots: &[Variance],
        mut f: impl FnMut(&[usize]) -> Result<F>,
    ) -> Result<Self> {
        let comps = index_tuples(dim, slots.len()).map(|i| f(&i)).collect::<Result<_>>()?;
        Ok(Self { dim, slots: slots.to_vec(), comps })
    }

    pub fn zeros(dim: usize, slots: &[Variance], template: &F) -> Self {
        let zero = template.zero_like();
        Self { dim, slots: slots.to_vec(), comps: vec![zero; dim.pow(slots.len() as u32)] }
    }

    pub fn from_components(dim: usize, slots: &[Variance], comps: Vec<F>) -> Result<Self> {
        let expected = dim.pow(slots.len() as u32);
        if comps.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: comps.len() });
        }
        Ok(Self { dim, slots: slots.to_vec(), comps })
    }

    /// Rank-0 tensor.
    pub fn scalar(value: F) -> Self {
        Self { dim: 0, slots: Vec::new(), comps: vec![value] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.slots.len()
    }

    pub fn slots(&self) -> &[Variance] {
        &self.slots
    }

    pub fn covariant_arity(&self) -> usize {
        self.slots.iter().filter(|v| **v == Down).count()
    }

    pub fn contravariant_arity(&self) -> usize {
        self.slots.iter().filter(|v| **v == Up).count()
    }

    pub fn comps(&self) -> &[F] {
        &self.comps
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.slots.len());
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, idx: &[usize]) -> &F {
        &self.comps[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: F) {
        let o = self.offset(idx);
        self.comps[o] = value;
    }

    pub fn get_mut(&mut self, idx: &[usize]) -> &mut F {
        let o = self.offset(idx);
        &mut self.comps[o]
    }

    pub fn map(&self, f: impl FnMut(&F) -> F) -> Self {
        Self { dim: self.dim, slots: self.slots.clone(), comps: self.comps.iter().map(f).collect() }
    }

    pub fn try_map(&self, f: impl FnMut(&F) -> Result<F>) -> Result<Self> {
        Ok(Self {
            dim: self.dim,
            slots: self.slots.clone(),
            comps: self.comps.iter().map(f).collect::<Result<_>>()?,
        })
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim || self.slots != other.slots {
            return Err(Error::Config(format!(
                "tensor shape mismatch: {:?}/{} vs {:?}/{}",
                self.slots, self.dim, other.slots, other.dim
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        Ok(self.zip_with(other, |a, b| a.add(b)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        Ok(self.zip_with(other, |a, b| a.sub(b)))
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|a| a.scale(c))
    }

    /// Multiply every component by the scalar field `s`.
    pub fn times(&self, s: &F) -> Self {
        self.map(|a| a.mul(s))
    }

    fn zip_with(&self, other: &Self, mut f: impl FnMut(&F, &F) -> F) -> Self {
        Self {
            dim: self.dim,
            slots: self.slots.clone(),
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| f(a, b)).collect(),
        }
    }

    /// Swap the two slots of a rank-2 tensor.
    pub fn transpose(&self) -> Self {
        assert_eq!(self.rank(), 2);
        Tensor::from_fn(self.dim, &[self.slots[1], self.slots[0]], |i| self.get(&[i[1], i[0]]).clone())
    }
}

impl Tensor<Jet> {
    /// Component values at the base point.
    pub fn values(&self) -> Result<Vec<f64>> {
        self.comps.iter().map(Jet::value).collect()
    }

    pub fn max_abs_value(&self) -> Result<f64> {
        Ok(self.values()?.into_iter().map(f64::abs).fold(0.0, f64::max))
    }

    /// Largest `|T_ij − T_ji|` over the exact coefficients.
    pub fn asymmetry(&self) -> f64 {
        assert_eq!(self.rank(), 2);
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..i {
                let d = self.get(&[i, j]) - self.get(&[j, i]);
                worst = worst.max(d.max_abs_exact());
            }
        }
        worst
    }
}
