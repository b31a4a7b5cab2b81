//! Truncated multivariate Taylor arithmetic.
//!
//! A [`Jet`] stores the normalized Taylor coefficients `c_α` of a function
//! around a base point, so the represented function is `Σ c_α (x - p)^α` and
//! `∂^α f(p) = c_α · α!`. Coefficients live in a dense vector indexed by
//! graded-lexicographic multi-index, with all index tables precomputed once
//! per [`JetSpace`].
//!
//! Every jet also carries a [`Precision`]: the set of coefficients that are
//! known exactly. Differentiation consumes precision (one unit per space or
//! deformation derivative, two per time derivative, since time derivatives
//! of parabolic quantities are fed by second space derivatives), and reading
//! a coefficient outside the exact set is an [`Error::InsufficientOrder`].

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

/// Maximum number of jet variables.
pub const MAX_VARS: usize = 6;
/// Maximum total order.
pub const MAX_ORDER: usize = 8;

pub type MultiIndex = [u8; MAX_VARS];

/// What a jet variable stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum VarRole {
    /// Spatial coordinate with the given axis number.
    Space(u8),
    /// Flow time `t`.
    Time,
    /// Deformation parameter `s`.
    Deform,
}

impl VarRole {
    /// Precision cost of one derivative in this variable.
    pub fn weight(self) -> i32 {
        match self {
            VarRole::Time => 2,
            _ => 1,
        }
    }
}

/// Which coefficients of a jet are exact.
///
/// `c_α` is exact when the weighted degree of `α` is at most `weighted` and
/// its time degree is at most `time`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Precision {
    pub weighted: i32,
    pub time: i32,
}

impl Precision {
    /// Exact polynomial of degree ≤ 1 (constants and seeds).
    pub const EXACT: Precision = Precision { weighted: i32::MAX / 4, time: i32::MAX / 4 };

    pub fn new(weighted: i32, time: i32) -> Self {
        Self { weighted, time }
    }

    pub fn meet(self, other: Precision) -> Precision {
        Precision {
            weighted: self.weighted.min(other.weighted),
            time: self.time.min(other.time),
        }
    }

    fn capped(self, order: usize) -> Precision {
        Precision { weighted: self.weighted.min(order as i32), time: self.time }
    }

    pub fn covers(self, wdeg: u32, tdeg: u8) -> bool {
        (wdeg as i64) <= self.weighted as i64 && (tdeg as i64) <= self.time as i64
    }
}

/// Variable layout, truncation order and the precomputed index tables.
pub struct JetSpace {
    roles: Vec<VarRole>,
    order: usize,
    indices: Vec<MultiIndex>,
    degree: Vec<u8>,
    wdeg: Vec<u32>,
    tdeg: Vec<u8>,
    /// `cum[d]` = number of multi-indices with total degree ≤ d.
    cum: Vec<usize>,
    lookup: HashMap<MultiIndex, usize>,
    /// Row-major `len × len` table of `index(α + β)`; only the prefix of each
    /// row with `deg(α) + deg(β) ≤ order` is meaningful.
    mul_table: Vec<u16>,
    /// Per variable: index of `α + e_v` for every `α` of degree `< order`.
    shift: Vec<Vec<u16>>,
}

impl fmt::Debug for JetSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JetSpace")
            .field("roles", &self.roles)
            .field("order", &self.order)
            .field("len", &self.indices.len())
            .finish()
    }
}

fn compositions(total: usize, parts: usize, prefix: &mut Vec<u8>, out: &mut Vec<MultiIndex>) {
    if parts == 1 {
        prefix.push(total as u8);
        let mut idx = [0u8; MAX_VARS];
        idx[..prefix.len()].copy_from_slice(prefix);
        out.push(idx);
        prefix.pop();
        return;
    }
    for first in (0..=total).rev() {
        prefix.push(first as u8);
        compositions(total - first, parts - 1, prefix, out);
        prefix.pop();
    }
}

impl JetSpace {
    /// Build a space with the given variable roles and truncation order.
    pub fn new(roles: Vec<VarRole>, order: usize) -> Result<Arc<Self>> {
        let nv = roles.len();
        if nv == 0 || nv > MAX_VARS {
            return Err(Error::Config(format!("jet space needs 1..={MAX_VARS} variables, got {nv}")));
        }
        if order == 0 || order > MAX_ORDER {
            return Err(Error::Config(format!("jet order must be in 1..={MAX_ORDER}, got {order}")));
        }
        for (i, r) in roles.iter().enumerate() {
            if roles[..i].contains(r) {
                return Err(Error::Config(format!("duplicate jet variable role {r:?}")));
            }
        }

        let mut indices = Vec::new();
        let mut cum = Vec::with_capacity(order + 1);
        for d in 0..=order {
            compositions(d, nv, &mut Vec::new(), &mut indices);
            cum.push(indices.len());
        }
        let len = indices.len();
        let degree: Vec<u8> = indices.iter().map(|a| a.iter().sum()).collect();
        let wdeg = indices
            .iter()
            .map(|a| roles.iter().enumerate().map(|(v, r)| a[v] as u32 * r.weight() as u32).sum())
            .collect();
        let tdeg = indices
            .iter()
            .map(|a| roles.iter().position(|r| *r == VarRole::Time).map_or(0, |v| a[v]))
            .collect();
        let lookup: HashMap<MultiIndex, usize> =
            indices.iter().enumerate().map(|(i, a)| (*a, i)).collect();

        let mut mul_table = vec![u16::MAX; len * len];
        for i in 0..len {
            let lim = cum[order - degree[i] as usize];
            for j in 0..lim {
                let mut sum = indices[i];
                for v in 0..nv {
                    sum[v] += indices[j][v];
                }
                mul_table[i * len + j] = lookup[&sum] as u16;
            }
        }

        let shift = (0..nv)
            .map(|v| {
                (0..len)
                    .map(|i| {
                        if (degree[i] as usize) < order {
                            let mut up = indices[i];
                            up[v] += 1;
                            lookup[&up] as u16
                        } else {
                            u16::MAX
                        }
                    })
                    .collect()
            })
            .collect();

        Ok(Arc::new(Self { roles, order, indices, degree, wdeg, tdeg, cum, lookup, mul_table, shift }))
    }

    /// Space of `dim` spatial coordinates plus optional time and deformation variables.
    pub fn with_roles(dim: usize, time: bool, deform: bool, order: usize) -> Result<Arc<Self>> {
        let mut roles: Vec<VarRole> = (0..dim as u8).map(VarRole::Space).collect();
        if time {
            roles.push(VarRole::Time);
        }
        if deform {
            roles.push(VarRole::Deform);
        }
        Self::new(roles, order)
    }

    pub fn num_vars(&self) -> usize {
        self.roles.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn roles(&self) -> &[VarRole] {
        &self.roles
    }

    /// Number of stored coefficients.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn var_of(&self, role: VarRole) -> Option<usize> {
        self.roles.iter().position(|r| *r == role)
    }

    pub fn space_dim(&self) -> usize {
        self.roles.iter().filter(|r| matches!(r, VarRole::Space(_))).count()
    }

    pub fn multi_indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn index_of(&self, alpha: &[u8]) -> Option<usize> {
        if alpha.len() > MAX_VARS {
            return None;
        }
        let mut key = [0u8; MAX_VARS];
        key[..alpha.len()].copy_from_slice(alpha);
        self.lookup.get(&key).copied()
    }

    pub(crate) fn time_degree(&self, i: usize) -> u8 {
        self.tdeg[i]
    }

    pub(crate) fn weighted_degree(&self, i: usize) -> u32 {
        self.wdeg[i]
    }

    pub(crate) fn shift_index(&self, var: usize, i: usize) -> Option<usize> {
        let k = self.shift[var][i];
        (k != u16::MAX).then_some(k as usize)
    }
}

/// A truncated Taylor expansion in a [`JetSpace`].
#[derive(Clone)]
pub struct Jet {
    space: Arc<JetSpace>,
    coeffs: Vec<f64>,
    prec: Precision,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("value", &self.coeffs[0])
            .field("precision", &self.prec)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.space, &other.space) && self.coeffs == other.coeffs
    }
}

fn factorial(alpha: &[u8]) -> f64 {
    alpha.iter().map(|&a| (1..=a as u32).map(f64::from).product::<f64>()).product()
}

impl Jet {
    pub fn constant(space: &Arc<JetSpace>, c: f64) -> Self {
        let mut coeffs = vec![0.0; space.len()];
        coeffs[0] = c;
        Self { space: space.clone(), coeffs, prec: Precision::EXACT }
    }

    pub fn zero(space: &Arc<JetSpace>) -> Self {
        Self::constant(space, 0.0)
    }

    /// The coordinate function of variable `var`, expanded around `base`.
    pub fn variable(space: &Arc<JetSpace>, var: usize, base: f64) -> Result<Self> {
        if var >= space.num_vars() {
            return Err(Error::DimensionMismatch { expected: space.num_vars(), got: var + 1 });
        }
        let mut jet = Self::constant(space, base);
        let mut alpha = [0u8; MAX_VARS];
        alpha[var] = 1;
        jet.coeffs[space.lookup[&alpha]] = 1.0;
        Ok(jet)
    }

    pub fn from_coeffs(space: &Arc<JetSpace>, coeffs: Vec<f64>, prec: Precision) -> Result<Self> {
        if coeffs.len() != space.len() {
            return Err(Error::DimensionMismatch { expected: space.len(), got: coeffs.len() });
        }
        Ok(Self { space: space.clone(), coeffs, prec: prec.capped(space.order) })
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    pub fn set_precision(&mut self, prec: Precision) {
        self.prec = prec;
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// Value at the base point.
    pub fn value(&self) -> Result<f64> {
        self.coeff(&[])
    }

    /// Normalized Taylor coefficient `c_α`.
    pub fn coeff(&self, alpha: &[u8]) -> Result<f64> {
        let total: usize = alpha.iter().map(|&a| a as usize).sum();
        if alpha.len() > self.space.num_vars() {
            return Err(Error::DimensionMismatch { expected: self.space.num_vars(), got: alpha.len() });
        }
        if total > self.space.order {
            return Err(Error::InsufficientOrder(format!(
                "multi-index of degree {total} exceeds jet order {}",
                self.space.order
            )));
        }
        let i = self.space.index_of(alpha).expect("degree checked above");
        if !self.prec.covers(self.space.wdeg[i], self.space.tdeg[i]) {
            return Err(Error::InsufficientOrder(format!(
                "coefficient {alpha:?} not exact (precision {:?})",
                self.prec
            )));
        }
        Ok(self.coeffs[i])
    }

    /// Partial derivative `∂^α` at the base point, `c_α · α!`.
    pub fn deriv(&self, alpha: &[u8]) -> Result<f64> {
        Ok(self.coeff(alpha)? * factorial(alpha))
    }

    fn same_space(&self, other: &Jet) {
        assert!(Arc::ptr_eq(&self.space, &other.space), "jets from different jet spaces");
    }

    /// Derivative with respect to jet variable `var`.
    pub fn partial(&self, var: usize) -> Result<Jet> {
        let space = &self.space;
        if var >= space.num_vars() {
            return Err(Error::DimensionMismatch { expected: space.num_vars(), got: var + 1 });
        }
        let role = space.roles[var];
        let base = self.prec.capped(space.order);
        let prec = Precision {
            weighted: base.weighted - role.weight(),
            time: if role == VarRole::Time { base.time - 1 } else { base.time },
        };
        if prec.weighted < 0 || prec.time < 0 {
            return Err(Error::InsufficientOrder(format!(
                "cannot differentiate in {role:?}: precision {:?}",
                self.prec
            )));
        }
        let mut coeffs = vec![0.0; space.len()];
        for (i, out) in coeffs.iter_mut().enumerate() {
            if let Some(k) = space.shift_index(var, i) {
                let alpha = &space.indices[k];
                *out = self.coeffs[k] * alpha[var] as f64;
            }
        }
        Ok(Jet { space: space.clone(), coeffs, prec })
    }

    /// Derivative with respect to the variable carrying `role`.
    pub fn partial_role(&self, role: VarRole) -> Result<Jet> {
        let var = self
            .space
            .var_of(role)
            .ok_or_else(|| Error::Config(format!("jet space has no {role:?} variable")))?;
        self.partial(var)
    }

    pub fn scale(&self, c: f64) -> Jet {
        Jet { space: self.space.clone(), coeffs: self.coeffs.iter().map(|a| a * c).collect(), prec: self.prec }
    }

    pub fn add_const(&self, c: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += c;
        out
    }

    fn mul_into(&self, other: &Jet, out: &mut [f64]) {
        let space = &self.space;
        let len = space.len();
        let k = space.order;
        for (i, &ai) in self.coeffs.iter().enumerate() {
            if ai == 0.0 {
                continue;
            }
            let lim = space.cum[k - space.degree[i] as usize];
            let row = &space.mul_table[i * len..i * len + lim];
            for (&t, &bj) in row.iter().zip(&other.coeffs[..lim]) {
                out[t as usize] += ai * bj;
            }
        }
    }

    /// Compose the power series `Σ s_k (x - x0)^k` with this jet, where `x0`
    /// is the jet's constant term.
    fn compose(&self, series: &[f64]) -> Jet {
        let mut delta = self.clone();
        delta.coeffs[0] = 0.0;
        let mut acc = Jet::constant(&self.space, *series.last().unwrap());
        for &s in series.iter().rev().skip(1) {
            let mut next = vec![0.0; self.space.len()];
            acc.mul_into(&delta, &mut next);
            next[0] += s;
            acc.coeffs = next;
        }
        acc.prec = self.prec.capped(self.space.order);
        acc
    }

    fn order(&self) -> usize {
        self.space.order
    }

    pub fn exp(&self) -> Jet {
        let e = self.coeffs[0].exp();
        let mut series = Vec::with_capacity(self.order() + 1);
        let mut fact = 1.0;
        for k in 0..=self.order() {
            if k > 0 {
                fact *= k as f64;
            }
            series.push(e / fact);
        }
        self.compose(&series)
    }

    pub fn ln(&self) -> Result<Jet> {
        let a0 = self.coeffs[0];
        if !(a0 > 0.0) {
            return Err(Error::Singular(format!("log of jet with constant term {a0}")));
        }
        let mut series = vec![a0.ln()];
        for k in 1..=self.order() {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            series.push(sign / (k as f64 * a0.powi(k as i32)));
        }
        Ok(self.compose(&series))
    }

    /// Real power `x^p`; needs a positive constant term.
    pub fn powf(&self, p: f64) -> Result<Jet> {
        let a0 = self.coeffs[0];
        if !(a0 > 0.0) {
            return Err(Error::Singular(format!("real power of jet with constant term {a0}")));
        }
        let mut series = Vec::with_capacity(self.order() + 1);
        let mut binom = 1.0;
        for k in 0..=self.order() {
            if k > 0 {
                binom *= (p - (k as f64 - 1.0)) / k as f64;
            }
            series.push(binom * a0.powf(p - k as f64));
        }
        Ok(self.compose(&series))
    }

    pub fn sqrt(&self) -> Result<Jet> {
        self.powf(0.5)
    }

    pub fn recip(&self) -> Result<Jet> {
        let a0 = self.coeffs[0];
        if a0 == 0.0 || !a0.is_finite() {
            return Err(Error::Singular(format!("division by jet with constant term {a0}")));
        }
        let series: Vec<f64> = (0..=self.order())
            .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } / a0.powi(k as i32 + 1))
            .collect();
        Ok(self.compose(&series))
    }

    pub fn div(&self, other: &Jet) -> Result<Jet> {
        Ok(self * &other.recip()?)
    }

    fn trig(&self, phase: usize) -> Jet {
        let a0 = self.coeffs[0];
        let derivs = [a0.sin(), a0.cos(), -a0.sin(), -a0.cos()];
        let mut fact = 1.0;
        let series: Vec<f64> = (0..=self.order())
            .map(|k| {
                if k > 0 {
                    fact *= k as f64;
                }
                derivs[(k + phase) % 4] / fact
            })
            .collect();
        self.compose(&series)
    }

    pub fn sin(&self) -> Jet {
        self.trig(0)
    }

    pub fn cos(&self) -> Jet {
        self.trig(1)
    }

    pub fn square(&self) -> Jet {
        self * self
    }

    /// Largest absolute coefficient among the exact ones.
    pub fn max_abs_exact(&self) -> f64 {
        (0..self.space.len())
            .filter(|&i| self.prec.covers(self.space.wdeg[i], self.space.tdeg[i]))
            .map(|i| self.coeffs[i].abs())
            .fold(0.0, f64::max)
    }
}

/// One jet per spatial variable of `space`, expanded around `point`.
pub fn seed_variables(point: &[f64], space: &Arc<JetSpace>) -> Result<Vec<Jet>> {
    let dim = space.space_dim();
    if point.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: point.len() });
    }
    (0..dim)
        .map(|axis| {
            let var = space.var_of(VarRole::Space(axis as u8)).expect("space variables are contiguous");
            Jet::variable(space, var, point[axis])
        })
        .collect()
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.same_space(rhs);
        Jet {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
            prec: self.prec.meet(rhs.prec),
        }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.same_space(rhs);
        Jet {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
            prec: self.prec.meet(rhs.prec),
        }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.same_space(rhs);
        let mut coeffs = vec![0.0; self.space.len()];
        self.mul_into(rhs, &mut coeffs);
        Jet { space: self.space.clone(), coeffs, prec: self.prec.meet(rhs.prec).capped(self.space.order) }
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        self.add_const(rhs)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                (&self).$m(rhs)
            }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                self.$m(&rhs)
            }
        }
        impl $tr<f64> for Jet {
            type Output = Jet;
            fn $m(self, rhs: f64) -> Jet {
                (&self).$m(rhs)
            }
        }
    };
}

impl Sub<f64> for &Jet {
    type Output = Jet;
    fn sub(self, rhs: f64) -> Jet {
        self.add_const(-rhs)
    }
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        self.same_space(rhs);
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
        self.prec = self.prec.meet(rhs.prec);
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        self.same_space(rhs);
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
        self.prec = self.prec.meet(rhs.prec);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space1(order: usize) -> Arc<JetSpace> {
        JetSpace::new(vec![VarRole::Space(0)], order).unwrap()
    }

    fn close(a: f64, b: f64) {
        assert!((a - b).abs() <= 1e-14 * (1.0 + b.abs()), "{a} vs {b}");
    }

    #[test]
    fn seed_identity() {
        let s = space1(3);
        let x = &seed_variables(&[2.0], &s).unwrap()[0];
        assert_eq!(x.coeffs(), &[2.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn seed_two_variables_at_origin() {
        let s = JetSpace::with_roles(2, false, false, 2).unwrap();
        let xs = seed_variables(&[0.0, 0.0], &s).unwrap();
        assert_eq!(xs.len(), 2);
        for (axis, x) in xs.iter().enumerate() {
            assert_eq!(x.coeffs().iter().filter(|c| **c != 0.0).count(), 1);
            let mut alpha = [0u8; 2];
            alpha[axis] = 1;
            assert_eq!(x.coeff(&alpha).unwrap(), 1.0);
        }
    }

    #[test]
    fn seed_dimension_mismatch() {
        let s = JetSpace::with_roles(2, true, false, 2).unwrap();
        assert!(matches!(
            seed_variables(&[1.0], &s),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn square_of_shifted_seed() {
        let s = space1(3);
        let x = &seed_variables(&[1.0], &s).unwrap()[0];
        let sq = x * x;
        assert_eq!(&sq.coeffs()[..3], &[1.0, 2.0, 1.0]);
    }

    #[test]
    fn product_of_linear_factors() {
        let s = JetSpace::with_roles(2, false, false, 2).unwrap();
        let xs = seed_variables(&[0.0, 0.0], &s).unwrap();
        let p = (&xs[0] + 1.0) * (&xs[1] + 1.0);
        assert_eq!(p.coeff(&[0, 0]).unwrap(), 1.0);
        assert_eq!(p.coeff(&[1, 0]).unwrap(), 1.0);
        assert_eq!(p.coeff(&[0, 1]).unwrap(), 1.0);
        assert_eq!(p.coeff(&[1, 1]).unwrap(), 1.0);
        assert_eq!(p.coeff(&[2, 0]).unwrap(), 0.0);
        assert_eq!(p.deriv(&[1, 1]).unwrap(), 1.0);
    }

    #[test]
    fn geometric_series() {
        let s = space1(3);
        let x = &seed_variables(&[0.0], &s).unwrap()[0];
        let r = (x + 1.0).recip().unwrap();
        for (c, e) in r.coeffs().iter().zip([1.0, -1.0, 1.0, -1.0]) {
            close(*c, e);
        }
    }

    #[test]
    fn self_difference_is_zero() {
        let s = space1(3);
        let x = &seed_variables(&[0.7], &s).unwrap()[0];
        assert!((x - x).coeffs().iter().all(|c| *c == 0.0));
    }

    #[test]
    fn division_by_zero_constant_term() {
        let s = space1(3);
        let x = &seed_variables(&[0.0], &s).unwrap()[0];
        assert!(matches!(x.recip(), Err(Error::Singular(_))));
        assert!(matches!(Jet::constant(&s, 1.0).div(x), Err(Error::Singular(_))));
    }

    #[test]
    fn analytic_examples() {
        let s2 = space1(2);
        let x = &seed_variables(&[0.0], &s2).unwrap()[0];
        for (c, e) in x.exp().coeffs().iter().zip([1.0, 1.0, 0.5]) {
            close(*c, e);
        }
        let s3 = space1(3);
        let x = &seed_variables(&[0.0], &s3).unwrap()[0];
        let l = (x + 1.0).ln().unwrap();
        for (c, e) in l.coeffs().iter().zip([0.0, 1.0, -0.5, 1.0 / 3.0]) {
            close(*c, e);
        }
        let s1 = space1(1);
        let x = &seed_variables(&[0.0], &s1).unwrap()[0];
        let r = (x + 4.0).sqrt().unwrap();
        close(r.coeffs()[0], 2.0);
        close(r.coeffs()[1], 0.25);
    }

    #[test]
    fn analytic_domain_errors() {
        let s = space1(3);
        let x = &seed_variables(&[-1.0], &s).unwrap()[0];
        assert!(matches!(x.ln(), Err(Error::Singular(_))));
        assert!(matches!(x.sqrt(), Err(Error::Singular(_))));
        assert!(matches!(x.powf(1.5), Err(Error::Singular(_))));
    }

    #[test]
    fn trig_derivatives() {
        let s = space1(5);
        let x = &seed_variables(&[0.4], &s).unwrap()[0];
        let sn = x.sin();
        let cs = x.cos();
        let a: f64 = 0.4;
        let sin_d = [a.sin(), a.cos(), -a.sin(), -a.cos(), a.sin(), a.cos()];
        for k in 0..=5u8 {
            close(sn.deriv(&[k]).unwrap(), sin_d[k as usize]);
            close(cs.deriv(&[k]).unwrap(), sin_d[(k as usize + 1) % 4]);
        }
    }

    #[test]
    fn cubic_second_derivative() {
        let s = space1(3);
        let x = &seed_variables(&[2.0], &s).unwrap()[0];
        let cube = &(x * x) * x;
        close(cube.deriv(&[2]).unwrap(), 12.0);
        close(cube.deriv(&[3]).unwrap(), 6.0);
    }

    #[test]
    fn zero_jet_coefficients() {
        let s = JetSpace::with_roles(2, true, false, 4).unwrap();
        let z = Jet::zero(&s);
        assert_eq!(z.coeff(&[1, 2, 1]).unwrap(), 0.0);
    }

    #[test]
    fn order_overflow_is_an_error() {
        let s = space1(3);
        let x = &seed_variables(&[0.0], &s).unwrap()[0];
        assert!(matches!(x.coeff(&[4]), Err(Error::InsufficientOrder(_))));
    }

    #[test]
    fn derivative_consumes_precision() {
        let s = JetSpace::with_roles(1, true, false, 4).unwrap();
        let x = Jet::variable(&s, 0, 0.3).unwrap();
        let t = Jet::variable(&s, 1, 0.1).unwrap();
        let f = (&x * &t).exp();
        assert_eq!(f.precision().weighted, 4);
        let ft = f.partial_role(VarRole::Time).unwrap();
        assert_eq!(ft.precision().weighted, 2);
        let ftt = ft.partial_role(VarRole::Time).unwrap();
        assert_eq!(ftt.precision().weighted, 0);
        assert!(ftt.value().is_ok());
        assert!(matches!(ftt.partial(0), Err(Error::InsufficientOrder(_))));
        // d/dt exp(xt) = x exp(xt)
        close(ft.value().unwrap(), 0.3 * (0.03f64).exp());
    }

    #[test]
    fn space_bounds() {
        assert!(JetSpace::new(vec![], 2).is_err());
        assert!(JetSpace::with_roles(2, false, false, 0).is_err());
        assert!(JetSpace::with_roles(2, false, false, 9).is_err());
        let s = JetSpace::with_roles(3, true, true, 3).unwrap();
        // C(3 + 5, 5)
        assert_eq!(s.len(), 56);
    }
}
