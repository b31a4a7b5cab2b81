//! Coordinate Riemannian calculus over any [`Field`].
//!
//! Conventions (pinned by the sign-anchor tests below):
//!
//! * `Γ^k_ij = ½ g^{kl}(∂_i g_jl + ∂_j g_il − ∂_l g_ij)`
//! * `R^l_{kij} = ∂_iΓ^l_{jk} − ∂_jΓ^l_{ik} + Γ^l_{ip}Γ^p_{jk} − Γ^l_{jp}Γ^p_{ik}`,
//!   the `∂_l` component of `R(∂_i, ∂_j)∂_k`
//! * `R_ijkl = g_lm R^m_{kij}`, so `R_ijji` is the sectional curvature of
//!   the `(i, j)` plane times `|∂_i ∧ ∂_j|²` (positive on spheres)
//! * `R_jk = g^{il} R_ijkl`, `R = g^{jk} R_jk`
//!
//! Covariant derivatives prepend their new slot: `(∇T)_{m…} = ∇_m T_{…}`.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::tensor::{index_tuples, Down, Tensor, Up, Variance};

/// Metric, connection and curvature at one evaluation site.
#[derive(Clone, Debug)]
pub struct CurvaturePack<F> {
    pub metric: Tensor<F>,
    pub inverse: Tensor<F>,
    /// `Γ^k_ij`, stored `[k][i][j]`.
    pub christoffel: Tensor<F>,
    /// All-covariant `R_ijkl`.
    pub riemann: Tensor<F>,
    pub ricci: Tensor<F>,
    pub scalar: F,
    pub det: F,
}

fn det_and_inverse<F: Field>(g: &Tensor<F>) -> Result<(F, Tensor<F>)> {
    let n = g.dim();
    let e = |i: usize, j: usize| g.get(&[i, j]);
    match n {
        1 => {
            let det = e(0, 0).clone();
            let inv = Tensor::from_components(1, &[Up, Up], vec![det.recip()?])?;
            Ok((det, inv))
        }
        2 => {
            let det = e(0, 0).mul(e(1, 1)).sub(&e(0, 1).mul(e(1, 0)));
            let r = det.recip()?;
            let comps = vec![
                e(1, 1).mul(&r),
                e(0, 1).mul(&r).neg(),
                e(1, 0).mul(&r).neg(),
                e(0, 0).mul(&r),
            ];
            Ok((det, Tensor::from_components(2, &[Up, Up], comps)?))
        }
        3 => {
            let cof = |i: usize, j: usize| {
                let (r0, r1) = match i {
                    0 => (1, 2),
                    1 => (0, 2),
                    _ => (0, 1),
                };
                let (c0, c1) = match j {
                    0 => (1, 2),
                    1 => (0, 2),
                    _ => (0, 1),
                };
                let minor = e(r0, c0).mul(e(r1, c1)).sub(&e(r0, c1).mul(e(r1, c0)));
                if (i + j) % 2 == 0 {
                    minor
                } else {
                    minor.neg()
                }
            };
            let mut det = e(0, 0).mul(&cof(0, 0));
            det.add_product(e(0, 1), &cof(0, 1));
            det.add_product(e(0, 2), &cof(0, 2));
            let r = det.recip()?;
            // inverse = adjugate / det, adjugate = cofactor transpose
            let inv = Tensor::from_fn(3, &[Up, Up], |ij| cof(ij[1], ij[0]).mul(&r));
            Ok((det, inv))
        }
        _ => Err(Error::Config(format!("metric dimension {n} unsupported (1..=3)"))),
    }
}

/// Check that `g` is symmetric and positive definite everywhere it is sampled.
pub fn validate_metric<F: Field>(g: &Tensor<F>) -> Result<()> {
    let n = g.dim();
    let scale = g.comps().iter().map(Field::magnitude).fold(0.0, f64::max);
    for i in 0..n {
        for j in 0..i {
            let asym = g.get(&[i, j]).sub(g.get(&[j, i])).magnitude();
            if asym > 1e-12 * scale.max(1.0) {
                return Err(Error::NotSymmetric(asym));
            }
        }
    }
    // Sylvester: leading principal minors positive.
    for k in 1..=n {
        let sub = Tensor::from_fn(k, &[Down, Down], |ij| g.get(ij).clone());
        let (det, _) = det_and_inverse(&sub).map_err(|_| Error::NotPositiveDefinite)?;
        if !(det.min_value() > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
    }
    Ok(())
}

impl<F: Field> CurvaturePack<F> {
    /// Connection and curvature of the metric `g_ij` (slots `Down, Down`).
    pub fn from_metric(metric: Tensor<F>) -> Result<Self> {
        if metric.slots() != [Down, Down] {
            return Err(Error::Config("metric must be a (0,2) tensor".into()));
        }
        let n = metric.dim();
        let (det, inverse) = det_and_inverse(&metric)?;

        // dg[l][i][j] = ∂_l g_ij
        let dg = Tensor::try_from_fn(n, &[Down, Down, Down], |lij| metric.get(&lij[1..]).partial(lij[0]))?;

        // first-kind symbols Γ_lij = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
        let first = Tensor::from_fn(n, &[Down, Down, Down], |lij| {
            let (l, i, j) = (lij[0], lij[1], lij[2]);
            dg.get(&[i, j, l]).add(dg.get(&[j, i, l])).sub(dg.get(&[l, i, j])).scale(0.5)
        });
        let christoffel = Tensor::from_fn(n, &[Up, Down, Down], |kij| {
            let mut acc = metric.get(&[0, 0]).zero_like();
            for l in 0..n {
                acc.add_product(inverse.get(&[kij[0], l]), first.get(&[l, kij[1], kij[2]]));
            }
            acc
        });

        // dgam[m][l][j][k] = ∂_m Γ^l_jk
        let dgam =
            Tensor::try_from_fn(n, &[Down, Up, Down, Down], |mljk| christoffel.get(&mljk[1..]).partial(mljk[0]))?;

        // R^l_{kij}, stored [l][k][i][j]
        let mixed = Tensor::from_fn(n, &[Up, Down, Down, Down], |lkij| {
            let (l, k, i, j) = (lkij[0], lkij[1], lkij[2], lkij[3]);
            let mut acc = dgam.get(&[i, l, j, k]).sub(dgam.get(&[j, l, i, k]));
            for p in 0..n {
                acc.add_product(christoffel.get(&[l, i, p]), christoffel.get(&[p, j, k]));
                acc = acc.sub(&christoffel.get(&[l, j, p]).mul(christoffel.get(&[p, i, k])));
            }
            acc
        });

        let riemann = Tensor::from_fn(n, &[Down, Down, Down, Down], |ijkl| {
            let (i, j, k, l) = (ijkl[0], ijkl[1], ijkl[2], ijkl[3]);
            let mut acc = metric.get(&[0, 0]).zero_like();
            for m in 0..n {
                acc.add_product(metric.get(&[l, m]), mixed.get(&[m, k, i, j]));
            }
            acc
        });

        let ricci = Tensor::from_fn(n, &[Down, Down], |jk| {
            let mut acc = metric.get(&[0, 0]).zero_like();
            for i in 0..n {
                for l in 0..n {
                    acc.add_product(inverse.get(&[i, l]), riemann.get(&[i, jk[0], jk[1], l]));
                }
            }
            acc
        });
        let scalar = trace(&ricci, &inverse);

        Ok(Self { metric, inverse, christoffel, riemann, ricci, scalar, det })
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    fn zero(&self) -> F {
        self.scalar.zero_like()
    }

    /// `√det g`.
    pub fn volume_density(&self) -> Result<F> {
        self.det.sqrt()
    }

    /// `∇T`, with the new covariant slot first.
    pub fn covariant_derivative(&self, t: &Tensor<F>) -> Result<Tensor<F>> {
        let n = self.dim();
        if t.rank() > 0 && t.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: t.dim() });
        }
        let mut slots = vec![Down];
        slots.extend_from_slice(t.slots());
        let partials: Vec<Tensor<F>> = (0..n).map(|m| t.try_map(|c| c.partial(m))).collect::<Result<_>>()?;
        Ok(Tensor::from_fn(n, &slots, |idx| {
            let m = idx[0];
            let rest = &idx[1..];
            let mut acc = partials[m].get(rest).clone();
            let mut probe = rest.to_vec();
            for (s, var) in t.slots().iter().enumerate() {
                let orig = rest[s];
                for p in 0..n {
                    probe[s] = p;
                    match var {
                        Up => acc.add_product(self.christoffel.get(&[orig, m, p]), t.get(&probe)),
                        Down => acc = acc.sub(&self.christoffel.get(&[p, m, orig]).mul(t.get(&probe))),
                    }
                }
                probe[s] = orig;
            }
            acc
        }))
    }

    /// The additive pieces of `∇T`: the coordinate derivative followed by one
    /// connection term per slot. They sum to [`Self::covariant_derivative`].
    pub fn covariant_derivative_parts(&self, t: &Tensor<F>) -> Result<Vec<Tensor<F>>> {
        let n = self.dim();
        if t.rank() > 0 && t.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: t.dim() });
        }
        let mut slots = vec![Down];
        slots.extend_from_slice(t.slots());
        let partials: Vec<Tensor<F>> = (0..n).map(|m| t.try_map(|c| c.partial(m))).collect::<Result<_>>()?;
        let mut parts = vec![Tensor::from_fn(n, &slots, |idx| partials[idx[0]].get(&idx[1..]).clone())];
        for (s, var) in t.slots().iter().enumerate() {
            parts.push(Tensor::from_fn(n, &slots, |idx| {
                let (m, rest) = (idx[0], &idx[1..]);
                let orig = rest[s];
                let mut probe = rest.to_vec();
                let mut acc = self.zero();
                for p in 0..n {
                    probe[s] = p;
                    match var {
                        Up => acc.add_product(self.christoffel.get(&[orig, m, p]), t.get(&probe)),
                        Down => acc = acc.sub(&self.christoffel.get(&[p, m, orig]).mul(t.get(&probe))),
                    }
                }
                acc
            }));
        }
        Ok(parts)
    }

    /// Contract slots `a < b`, inserting the metric or its inverse when the
    /// variances agree.
    pub fn contract(&self, t: &Tensor<F>, a: usize, b: usize) -> Result<Tensor<F>> {
        let n = self.dim();
        if a >= b || b >= t.rank() {
            return Err(Error::Config(format!("bad contraction slots ({a}, {b}) for rank {}", t.rank())));
        }
        let (va, vb) = (t.slots()[a], t.slots()[b]);
        let slots: Vec<Variance> =
            t.slots().iter().enumerate().filter(|(s, _)| *s != a && *s != b).map(|(_, v)| *v).collect();
        let weight = |i: usize, j: usize| -> Option<&F> {
            match (va, vb) {
                (Down, Down) => Some(self.inverse.get(&[i, j])),
                (Up, Up) => Some(self.metric.get(&[i, j])),
                _ => None,
            }
        };
        let build = |rest: &[usize]| {
            let mut full = vec![0; t.rank()];
            let mut it = rest.iter();
            for (s, slot) in full.iter_mut().enumerate() {
                if s != a && s != b {
                    *slot = *it.next().unwrap();
                }
            }
            let mut acc = self.zero();
            for i in 0..n {
                full[a] = i;
                match weight(i, i) {
                    None => {
                        full[b] = i;
                        acc = acc.add(t.get(&full));
                    }
                    Some(_) => {
                        for j in 0..n {
                            full[b] = j;
                            acc.add_product(weight(i, j).unwrap(), t.get(&full));
                        }
                    }
                }
            }
            acc
        };
        if slots.is_empty() {
            return Ok(Tensor::scalar(build(&[])));
        }
        Ok(Tensor::from_fn(n, &slots, build))
    }

    /// Raise slot `s` of a tensor whose slot is covariant.
    pub fn raise(&self, t: &Tensor<F>, s: usize) -> Result<Tensor<F>> {
        self.move_index(t, s, Down, Up)
    }

    /// Lower slot `s` of a tensor whose slot is contravariant.
    pub fn lower(&self, t: &Tensor<F>, s: usize) -> Result<Tensor<F>> {
        self.move_index(t, s, Up, Down)
    }

    fn move_index(&self, t: &Tensor<F>, s: usize, from: Variance, to: Variance) -> Result<Tensor<F>> {
        if t.slots().get(s) != Some(&from) {
            return Err(Error::Config(format!("slot {s} is not {from:?}")));
        }
        let n = self.dim();
        let w = if to == Up { &self.inverse } else { &self.metric };
        let mut slots = t.slots().to_vec();
        slots[s] = to;
        Ok(Tensor::from_fn(n, &slots, |idx| {
            let mut probe = idx.to_vec();
            let mut acc = self.zero();
            for p in 0..n {
                probe[s] = p;
                acc.add_product(w.get(&[idx[s], p]), t.get(&probe));
            }
            acc
        }))
    }

    /// Full metric inner product of two tensors with identical slots.
    pub fn inner(&self, a: &Tensor<F>, b: &Tensor<F>) -> Result<F> {
        if a.slots() != b.slots() {
            return Err(Error::Config("inner product of tensors with different slots".into()));
        }
        let mut raised = b.clone();
        for (s, v) in b.slots().iter().enumerate() {
            raised = match v {
                Down => self.raise(&raised, s)?,
                Up => self.lower(&raised, s)?,
            };
        }
        let mut acc = self.zero();
        for (x, y) in a.comps().iter().zip(raised.comps()) {
            acc.add_product(x, y);
        }
        Ok(acc)
    }

    pub fn norm_squared(&self, a: &Tensor<F>) -> Result<F> {
        self.inner(a, a)
    }

    /// Covector `∂_i φ`.
    pub fn differential(&self, phi: &F) -> Result<Tensor<F>> {
        Tensor::try_from_fn(self.dim(), &[Down], |i| phi.partial(i[0]))
    }

    /// Vector `∇^i φ = g^{ij} ∂_j φ`.
    pub fn gradient(&self, phi: &F) -> Result<Tensor<F>> {
        self.raise(&self.differential(phi)?, 0)
    }

    /// `∇_i ∇_j φ`.
    pub fn hessian(&self, phi: &F) -> Result<Tensor<F>> {
        self.covariant_derivative(&self.differential(phi)?)
    }

    pub fn laplacian(&self, phi: &F) -> Result<F> {
        Ok(trace(&self.hessian(phi)?, &self.inverse))
    }

    /// Rough Laplacian `g^{ij} ∇_i ∇_j T`.
    pub fn rough_laplacian(&self, t: &Tensor<F>) -> Result<Tensor<F>> {
        if t.rank() == 0 {
            return Ok(Tensor::scalar(self.laplacian(&t.comps()[0])?));
        }
        let dd = self.covariant_derivative(&self.covariant_derivative(t)?)?;
        self.contract(&dd, 0, 1)
    }

    fn require_symmetric(&self, h: &Tensor<F>) -> Result<()> {
        if h.slots() != [Down, Down] {
            return Err(Error::Config("expected a symmetric (0,2) tensor".into()));
        }
        let scale = h.comps().iter().map(Field::magnitude).fold(0.0, f64::max);
        for i in 0..self.dim() {
            for j in 0..i {
                let asym = h.get(&[i, j]).sub(h.get(&[j, i])).magnitude();
                if asym > 1e-12 * scale.max(1e-300) {
                    return Err(Error::NotSymmetric(asym));
                }
            }
        }
        Ok(())
    }

    /// `Δ_L h_pq = Δh_pq + 2 R_{pijq} h^{ij} − R_p^k h_kq − R_q^k h_pk`.
    pub fn lichnerowicz(&self, h: &Tensor<F>) -> Result<Tensor<F>> {
        self.require_symmetric(h)?;
        let n = self.dim();
        let rough = self.rough_laplacian(h)?;
        let h_up = self.raise(&self.raise(h, 0)?, 1)?;
        let ric_mixed = self.raise(&self.ricci, 1)?; // R_p^k
        Ok(Tensor::from_fn(n, &[Down, Down], |pq| {
            let (p, q) = (pq[0], pq[1]);
            let mut acc = rough.get(pq).clone();
            let mut curv = self.zero();
            for i in 0..n {
                for j in 0..n {
                    curv.add_product(self.riemann.get(&[p, i, j, q]), h_up.get(&[i, j]));
                }
            }
            acc = acc.add_scaled(&curv, 2.0);
            for k in 0..n {
                acc = acc.sub(&ric_mixed.get(&[p, k]).mul(h.get(&[k, q])));
                acc = acc.sub(&ric_mixed.get(&[q, k]).mul(h.get(&[p, k])));
            }
            acc
        }))
    }

    /// `(div h)_i = g^{jk} ∇_j h_ki`.
    pub fn divergence(&self, h: &Tensor<F>) -> Result<Tensor<F>> {
        if h.slots() != [Down, Down] {
            return Err(Error::Config("divergence expects a (0,2) tensor".into()));
        }
        self.contract(&self.covariant_derivative(h)?, 0, 1)
    }

    /// `div(div h) = g^{il} ∇_l (div h)_i`.
    pub fn div_div(&self, h: &Tensor<F>) -> Result<F> {
        let d = self.divergence(h)?;
        let dd = self.covariant_derivative(&d)?;
        Ok(self.contract(&dd, 0, 1)?.comps()[0].clone())
    }
}

/// `g^{ij} A_ij` for a (0,2) tensor and an inverse metric.
pub fn trace<F: Field>(a: &Tensor<F>, inverse: &Tensor<F>) -> F {
    let n = a.dim();
    let mut acc = a.get(&[0, 0]).zero_like();
    for (ij, x) in index_tuples(n, 2).zip(a.comps()) {
        acc.add_product(inverse.get(&ij), x);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::{seed_variables, Jet, JetSpace};
    use std::sync::Arc;

    fn conformal(space: &Arc<JetSpace>, p: &[f64], factor: impl Fn(&[Jet]) -> Jet) -> Tensor<Jet> {
        let x = seed_variables(p, space).unwrap();
        let phi = factor(&x);
        let zero = Jet::zero(space);
        Tensor::from_fn(p.len(), &[Down, Down], |ij| if ij[0] == ij[1] { phi.clone() } else { zero.clone() })
    }

    fn cigar(space: &Arc<JetSpace>, p: &[f64]) -> CurvaturePack<Jet> {
        let g = conformal(space, p, |x| {
            let r2 = &(&x[0] * &x[0]) + &(&x[1] * &x[1]);
            Jet::constant(space, 4.0).div(&(r2 + 1.0)).unwrap()
        });
        CurvaturePack::from_metric(g).unwrap()
    }

    fn unit_sphere(space: &Arc<JetSpace>, p: &[f64]) -> CurvaturePack<Jet> {
        let g = conformal(space, p, |x| {
            let r2 = &(&x[0] * &x[0]) + &(&x[1] * &x[1]);
            let d = r2 + 1.0;
            Jet::constant(space, 4.0).div(&(&d * &d)).unwrap()
        });
        CurvaturePack::from_metric(g).unwrap()
    }

    fn space(order: usize) -> Arc<JetSpace> {
        JetSpace::with_roles(2, false, false, order).unwrap()
    }

    #[test]
    fn covariant_derivative_parts_sum_to_derivative() {
        let s = space(4);
        let pack = cigar(&s, &[0.3, -0.8]);
        let whole = pack.covariant_derivative(&pack.ricci).unwrap();
        let parts = pack.covariant_derivative_parts(&pack.ricci).unwrap();
        assert_eq!(parts.len(), 3);
        let sum = parts[1..].iter().fold(parts[0].clone(), |a, b| a.add(b).unwrap());
        for (a, b) in whole.comps().iter().zip(sum.comps()) {
            assert!((a.value().unwrap() - b.value().unwrap()).abs() < 1e-14);
        }
    }

    fn assert_small(t: &Tensor<Jet>, tol: f64) {
        let m = t.max_abs_value().unwrap();
        assert!(m <= tol, "max component {m:e} > {tol:e}");
    }

    #[test]
    fn flat_metric_has_no_curvature() {
        let s = space(4);
        let pack = CurvaturePack::from_metric(conformal(&s, &[0.3, -0.2], |_| Jet::constant(&s, 1.0))).unwrap();
        assert_small(&pack.christoffel, 0.0);
        assert_small(&pack.riemann, 0.0);
        assert_eq!(pack.scalar.value().unwrap(), 0.0);
        assert_eq!(pack.volume_density().unwrap().value().unwrap(), 1.0);
    }

    /// `R = −2 e^{−2u} Δ₀u` for `g = e^{2u} δ` in two dimensions.
    fn conformal_scalar_oracle(u_lap0: f64, u: f64) -> f64 {
        -2.0 * (-2.0 * u).exp() * u_lap0
    }

    #[test]
    fn cigar_scalar_curvature_matches_conformal_oracle() {
        let s = space(4);
        for p in [[0.0, 0.0], [0.7, -1.1], [2.0, 0.5]] {
            let pack = cigar(&s, &p);
            let r2 = p[0] * p[0] + p[1] * p[1];
            // u = ln 2 − ½ ln(1 + r²), Δ₀u = −2/(1 + r²)²
            let u = 2f64.ln() - 0.5 * (1.0 + r2).ln();
            let expected = conformal_scalar_oracle(-2.0 / (1.0 + r2).powi(2), u);
            let got = pack.scalar.value().unwrap();
            assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
        }
        assert!((cigar(&s, &[0.0, 0.0]).scalar.value().unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn unit_sphere_has_scalar_curvature_two() {
        let s = space(4);
        for p in [[0.0, 0.0], [0.4, 0.9], [-1.7, 0.2], [3.0, -2.5]] {
            let r = unit_sphere(&s, &p).scalar.value().unwrap();
            assert!((r - 2.0).abs() < 1e-10, "R = {r}");
        }
    }

    #[test]
    fn riemann_symmetries_and_bianchi() {
        let s = JetSpace::with_roles(3, false, false, 3).unwrap();
        let x = seed_variables(&[0.2, -0.4, 0.9], &s).unwrap();
        // a non-conformal, non-diagonal metric
        let g = Tensor::from_fn(3, &[Down, Down], |ij| {
            let (i, j) = (ij[0].min(ij[1]), ij[0].max(ij[1]));
            let base = if i == j { 2.0 } else { 0.0 };
            let wiggle = (&x[i] * &x[j]).scale(0.1) + (&x[(i + j) % 3]).sin().scale(0.05);
            wiggle + base
        });
        let pack = CurvaturePack::from_metric(g).unwrap();
        let r = &pack.riemann;
        let scale = r.max_abs_value().unwrap();
        assert!(scale > 1e-3);
        let mut worst: f64 = 0.0;
        for ijkl in index_tuples(3, 4) {
            let (i, j, k, l) = (ijkl[0], ijkl[1], ijkl[2], ijkl[3]);
            let v = |a, b, c, d| r.get(&[a, b, c, d]).value().unwrap();
            worst = worst.max((v(i, j, k, l) + v(j, i, k, l)).abs());
            worst = worst.max((v(i, j, k, l) + v(i, j, l, k)).abs());
            worst = worst.max((v(i, j, k, l) - v(k, l, i, j)).abs());
            worst = worst.max((v(i, j, k, l) + v(j, k, i, l) + v(k, i, j, l)).abs());
        }
        assert!(worst <= 1e-10 * scale, "worst {worst:e}");
    }

    #[test]
    fn metric_compatibility_and_lichnerowicz_harmonic_metric() {
        let s = space(5);
        let pack = cigar(&s, &[0.6, 1.3]);
        assert_small(&pack.covariant_derivative(&pack.metric).unwrap(), 1e-10);
        assert_small(&pack.lichnerowicz(&pack.metric).unwrap(), 1e-10);
        assert_small(&pack.divergence(&pack.metric).unwrap(), 1e-10);
        let sphere = unit_sphere(&s, &[-0.5, 0.8]);
        assert_small(&sphere.lichnerowicz(&sphere.metric).unwrap(), 1e-10);
    }

    #[test]
    fn contracted_bianchi_on_cigar() {
        let s = space(5);
        for p in [[0.6, 1.3], [-2.1, 0.4]] {
            let pack = cigar(&s, &p);
            let div = pack.divergence(&pack.ricci).unwrap();
            let half_grad = pack.differential(&pack.scalar).unwrap().scale(0.5);
            assert_small(&div.sub(&half_grad).unwrap(), 1e-10);
        }
    }

    #[test]
    fn scalar_curvature_critical_at_cigar_tip() {
        let s = space(4);
        let pack = cigar(&s, &[0.0, 0.0]);
        assert_small(&pack.differential(&pack.scalar).unwrap(), 1e-14);
    }

    #[test]
    fn flat_laplacians() {
        let s = space(4);
        let x = seed_variables(&[0.3, 0.8], &s).unwrap();
        let one = Jet::constant(&s, 1.0);
        let zero = Jet::zero(&s);
        let g = Tensor::from_fn(2, &[Down, Down], |ij| if ij[0] == ij[1] { one.clone() } else { zero.clone() });
        let pack = CurvaturePack::from_metric(g).unwrap();
        let phi = &(&x[0] * &x[0]) + &(&x[1] * &x[1]);
        assert!((pack.laplacian(&phi).unwrap().value().unwrap() - 4.0).abs() < 1e-14);
        let lin = &x[0].scale(3.0) - &x[1];
        assert_eq!(pack.laplacian(&lin).unwrap().value().unwrap(), 0.0);

        // h = cos(x) δ: div h = (−sin x, 0), div div h = −cos x, Δ_L h = Δh
        let c = x[0].cos();
        let h = Tensor::from_fn(2, &[Down, Down], |ij| if ij[0] == ij[1] { c.clone() } else { zero.clone() });
        let d = pack.divergence(&h).unwrap().values().unwrap();
        assert!((d[0] + 0.3f64.sin()).abs() < 1e-14 && d[1] == 0.0);
        assert!((pack.div_div(&h).unwrap().value().unwrap() + 0.3f64.cos()).abs() < 1e-14);
        let lh = pack.lichnerowicz(&h).unwrap();
        let rough = pack.rough_laplacian(&h).unwrap();
        assert_small(&lh.sub(&rough).unwrap(), 0.0);
        assert!((lh.get(&[0, 0]).value().unwrap() + 0.3f64.cos()).abs() < 1e-14);
    }

    #[test]
    fn cigar_volume_density_at_origin() {
        let s = space(3);
        assert!((cigar(&s, &[0.0, 0.0]).volume_density().unwrap().value().unwrap() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn constant_scaling_behaviour() {
        let s = space(4);
        let p = [0.9, -0.3];
        let base = cigar(&s, &p);
        let scaled = CurvaturePack::from_metric(base.metric.scale(4.0)).unwrap();
        let c = |a: &Tensor<Jet>, b: &Tensor<Jet>, f: f64| {
            for (x, y) in a.values().unwrap().iter().zip(b.values().unwrap()) {
                assert!((x * f - y).abs() <= 1e-12 * (1.0 + y.abs()), "{x} {y}");
            }
        };
        c(&base.riemann, &scaled.riemann, 4.0);
        c(&base.ricci, &scaled.ricci, 1.0);
        let (r0, r1) = (base.scalar.value().unwrap(), scaled.scalar.value().unwrap());
        assert!((r0 / 4.0 - r1).abs() < 1e-14);
        let (v0, v1) =
            (base.volume_density().unwrap().value().unwrap(), scaled.volume_density().unwrap().value().unwrap());
        assert!((v0 * 4.0 - v1).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_metrics() {
        let s = space(2);
        let one = Jet::constant(&s, 1.0);
        let half = Jet::constant(&s, 0.5);
        let asym = Tensor::from_fn(2, &[Down, Down], |ij| if ij == [0, 1] { half.clone() } else { one.clone() });
        assert!(matches!(validate_metric(&asym), Err(Error::NotSymmetric(_))));
        let indefinite =
            Tensor::from_fn(2, &[Down, Down], |ij| if ij[0] == ij[1] { one.clone() } else { one.scale(2.0) });
        assert!(matches!(validate_metric(&indefinite), Err(Error::NotPositiveDefinite)));
        let pack = cigar(&s, &[0.1, 0.2]);
        assert!(matches!(pack.lichnerowicz(&asym), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn insufficient_order_is_reported() {
        let s = space(2);
        let pack = cigar(&s, &[0.1, 0.2]);
        assert!(matches!(pack.covariant_derivative(&pack.ricci), Err(Error::InsufficientOrder(_))));
    }
}
