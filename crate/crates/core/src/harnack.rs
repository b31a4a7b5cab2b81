//! Harnack-type quantities built from a [`CurvaturePack`] and fields.
//!
//! Everything here is generic over [`Field`]; time derivatives are passed in
//! by the caller (exact for jets, finite differences on the grid).

use crate::error::{Error, Result};
use crate::field::Field;
use crate::geometry::{trace, CurvaturePack};
use crate::tensor::{Down, Tensor, Up};

/// `M_pq = ΔR_pq − ½∇_p∇_q R + 2R_pijq R^ij − R_pk R^k_q` and
/// `P_ipq = ∇_i R_pq − ∇_p R_qi`.
#[derive(Clone, Debug)]
pub struct MatrixHarnack<F> {
    pub m: Tensor<F>,
    pub p: Tensor<F>,
}

pub fn matrix_harnack<F: Field>(pack: &CurvaturePack<F>) -> Result<MatrixHarnack<F>> {
    let n = pack.dim();
    let rc = &pack.ricci;
    let d_rc = pack.covariant_derivative(rc)?;
    let p = Tensor::from_fn(n, &[Down, Down, Down], |ipq| {
        let (i, p, q) = (ipq[0], ipq[1], ipq[2]);
        d_rc.get(&[i, p, q]).sub(d_rc.get(&[p, q, i]))
    });
    let lap_rc = pack.rough_laplacian(rc)?;
    let hess_r = pack.hessian(&pack.scalar)?;
    let rc_up = pack.raise(&pack.raise(rc, 0)?, 1)?;
    let rc_mixed = pack.raise(rc, 1)?;
    let m = Tensor::from_fn(n, &[Down, Down], |pq| {
        let (p, q) = (pq[0], pq[1]);
        let mut acc = lap_rc.get(pq).add_scaled(hess_r.get(pq), -0.5);
        let mut curv = acc.zero_like();
        for i in 0..n {
            for j in 0..n {
                curv.add_product(pack.riemann.get(&[p, i, j, q]), rc_up.get(&[i, j]));
            }
        }
        acc = acc.add_scaled(&curv, 2.0);
        for k in 0..n {
            acc = acc.sub(&rc_mixed.get(&[p, k]).mul(rc.get(&[k, q])));
        }
        acc
    });
    Ok(MatrixHarnack { m, p })
}

/// `P_ipq V^i` for a vector `V`.
pub fn p_contract_first<F: Field>(p: &Tensor<F>, v: &Tensor<F>) -> Tensor<F> {
    let n = p.dim();
    Tensor::from_fn(n, &[Down, Down], |pq| {
        let mut acc = p.get(&[0, pq[0], pq[1]]).zero_like();
        for i in 0..n {
            acc.add_product(p.get(&[i, pq[0], pq[1]]), v.get(&[i]));
        }
        acc
    })
}

/// `R_pijq V^j`.
pub fn riemann_contract<F: Field>(pack: &CurvaturePack<F>, v: &Tensor<F>) -> Tensor<F> {
    let n = pack.dim();
    Tensor::from_fn(n, &[Down, Down, Down], |ipq| {
        let (i, p, q) = (ipq[0], ipq[1], ipq[2]);
        let mut acc = pack.scalar.zero_like();
        for j in 0..n {
            acc.add_product(pack.riemann.get(&[p, i, j, q]), v.get(&[j]));
        }
        acc
    })
}

/// `A(V, W) = A_ij V^i W^j` for a (0,2) tensor and two vectors.
pub fn bilinear<F: Field>(a: &Tensor<F>, v: &Tensor<F>, w: &Tensor<F>) -> F {
    let n = a.dim();
    let mut acc = a.get(&[0, 0]).zero_like();
    for i in 0..n {
        for j in 0..n {
            acc.add_product(a.get(&[i, j]), &v.get(&[i]).mul(w.get(&[j])));
        }
    }
    acc
}

/// `ω(V) = ω_i V^i`.
pub fn pair<F: Field>(w: &Tensor<F>, v: &Tensor<F>) -> F {
    let mut acc = w.comps()[0].zero_like();
    for (a, b) in w.comps().iter().zip(v.comps()) {
        acc.add_product(a, b);
    }
    acc
}

fn require_vector<F: Field>(x: &Tensor<F>, n: usize) -> Result<()> {
    if x.slots() != [Up] {
        return Err(Error::Config("expected a vector field".into()));
    }
    if x.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x.dim() });
    }
    Ok(())
}

/// The four additive pieces of `Z(h, X)`.
#[derive(Clone, Debug)]
pub struct ZParts<F> {
    /// `div(div h)`
    pub div_div: F,
    /// `⟨Rc, h⟩`
    pub ricci: F,
    /// `2⟨div h, X⟩`
    pub cross: F,
    /// `h(X, X)`
    pub quadratic: F,
}

impl<F: Field> ZParts<F> {
    pub fn total(&self) -> F {
        self.div_div.add(&self.ricci).add(&self.cross).add(&self.quadratic)
    }

    pub fn terms(&self) -> [&F; 4] {
        [&self.div_div, &self.ricci, &self.cross, &self.quadratic]
    }
}

/// Linear trace Harnack quantity `Z(h, X)`.
pub fn linear_trace_z<F: Field>(pack: &CurvaturePack<F>, h: &Tensor<F>, x: &Tensor<F>) -> Result<ZParts<F>> {
    require_vector(x, pack.dim())?;
    let div = pack.divergence(h)?;
    Ok(ZParts {
        div_div: pack.div_div(h)?,
        ricci: pack.inner(&pack.ricci, h)?,
        cross: pair(&div, x).scale(2.0),
        quadratic: bilinear(h, x, x),
    })
}

/// `ΔR + 2|Rc|² + 2⟨∇R, X⟩ + 2Rc(X, X)`, returned as its four terms.
pub fn trace_harnack_terms<F: Field>(pack: &CurvaturePack<F>, x: &Tensor<F>) -> Result<[F; 4]> {
    require_vector(x, pack.dim())?;
    let dr = pack.differential(&pack.scalar)?;
    Ok([
        pack.laplacian(&pack.scalar)?,
        pack.norm_squared(&pack.ricci)?.scale(2.0),
        pair(&dr, x).scale(2.0),
        bilinear(&pack.ricci, x, x).scale(2.0),
    ])
}

pub fn trace_harnack<F: Field>(pack: &CurvaturePack<F>, x: &Tensor<F>) -> Result<F> {
    let [a, b, c, d] = trace_harnack_terms(pack, x)?;
    Ok(a.add(&b).add(&c).add(&d))
}

/// The four lines of the right-hand side of the evolution of `Z(h, X)`
/// under the linearized Ricci flow.
#[derive(Clone, Debug)]
pub struct ZEvolutionTerms<F> {
    /// `2h^pq(M_pq + 2P_ipq X^i + R_pijq X^i X^j)`
    pub curvature: F,
    /// `−4(∇_j X^i − R_j^i) ∇^j(div(h)_i + h_ik X^k)`
    pub gradient: F,
    /// `2(div(h)_j + h_ij X^i)(∂_t X^j − ΔX^j − R^j_k X^k)`
    pub drift: F,
    /// `2h_ij(∇_p X^i − R_p^i)(∇^p X^j − R^pj)`
    pub quadratic: F,
}

impl<F: Field> ZEvolutionTerms<F> {
    pub fn total(&self) -> F {
        self.curvature.add(&self.gradient).add(&self.drift).add(&self.quadratic)
    }

    pub fn terms(&self) -> [&F; 4] {
        [&self.curvature, &self.gradient, &self.drift, &self.quadratic]
    }
}

/// Evaluate the right-hand side of `(∂_t − Δ)Z(h, X)`. `dx_dt` holds the
/// coordinate time derivatives `∂X^j/∂t`.
pub fn z_evolution_rhs<F: Field>(
    pack: &CurvaturePack<F>,
    h: &Tensor<F>,
    x: &Tensor<F>,
    dx_dt: &Tensor<F>,
) -> Result<ZEvolutionTerms<F>> {
    let n = pack.dim();
    require_vector(x, n)?;
    require_vector(dx_dt, n)?;
    let mh = matrix_harnack(pack)?;
    let h_up = pack.raise(&pack.raise(h, 0)?, 1)?;
    let zero = pack.scalar.zero_like();

    let px = p_contract_first(&mh.p, x);
    let rxx = Tensor::from_fn(n, &[Down, Down], |pq| {
        let (p, q) = (pq[0], pq[1]);
        let mut acc = zero.clone();
        for i in 0..n {
            for j in 0..n {
                acc.add_product(pack.riemann.get(&[p, i, j, q]), &x.get(&[i]).mul(x.get(&[j])));
            }
        }
        acc
    });
    let mut curvature = zero.clone();
    for (idx, hpq) in crate::tensor::index_tuples(n, 2).zip(h_up.comps()) {
        let inner = mh.m.get(&idx).add_scaled(px.get(&idx), 2.0).add(rxx.get(&idx));
        curvature.add_product(hpq, &inner);
    }
    let curvature = curvature.scale(2.0);

    // A_j^i = ∇_j X^i − R_j^i, slots (Down j, Up i)
    let a = pack.covariant_derivative(x)?.sub(&pack.raise(&pack.ricci, 1)?)?;
    // w_i = div(h)_i + h_ik X^k
    let div = pack.divergence(h)?;
    let w = Tensor::from_fn(n, &[Down], |i| {
        let mut acc = div.get(i).clone();
        for k in 0..n {
            acc.add_product(h.get(&[i[0], k]), x.get(&[k]));
        }
        acc
    });
    let grad_w = pack.raise(&pack.covariant_derivative(&w)?, 0)?;
    let mut gradient = zero.clone();
    for (a_ji, gw) in a.comps().iter().zip(grad_w.comps()) {
        gradient.add_product(a_ji, gw);
    }
    let gradient = gradient.scale(-4.0);

    let lap_x = pack.rough_laplacian(x)?;
    let rc_mixed = pack.raise(&pack.ricci, 0)?; // R^j_k
    let mut drift = zero.clone();
    for j in 0..n {
        let mut heat = dx_dt.get(&[j]).sub(lap_x.get(&[j]));
        for k in 0..n {
            heat = heat.sub(&rc_mixed.get(&[j, k]).mul(x.get(&[k])));
        }
        drift.add_product(w.get(&[j]), &heat);
    }
    let drift = drift.scale(2.0);

    // B^{pj} = g^{pq} A_q^j
    let b = pack.raise(&a, 0)?;
    let mut quadratic = zero;
    for i in 0..n {
        for j in 0..n {
            let mut s = pack.scalar.zero_like();
            for p in 0..n {
                s.add_product(a.get(&[p, i]), b.get(&[p, j]));
            }
            quadratic.add_product(h.get(&[i, j]), &s);
        }
    }
    let quadratic = quadratic.scale(2.0);

    Ok(ZEvolutionTerms { curvature, gradient, drift, quadratic })
}

/// `H = g^ij h_ij`.
pub fn trace_h<F: Field>(pack: &CurvaturePack<F>, h: &Tensor<F>) -> F {
    trace(h, &pack.inverse)
}

/// `W = t²(Z(h, −∇f) + H/(2t))`; `t` is the time as a field value.
pub fn shrinker_w<F: Field>(pack: &CurvaturePack<F>, h: &Tensor<F>, f: &F, t: &F) -> Result<F> {
    if !(t.min_value() < 0.0) || t.magnitude() == 0.0 {
        return Err(Error::Domain("the shrinker quantity needs t < 0".into()));
    }
    let x = pack.gradient(f)?.scale(-1.0);
    let z = linear_trace_z(pack, h, &x)?.total();
    let big_h = trace_h(pack, h);
    let inner = z.add(&big_h.div(&t.scale(2.0))?);
    Ok(t.mul(t).mul(&inner))
}

/// `R + 2Δf − |∇f|²`.
pub fn perelman_scalar<F: Field>(pack: &CurvaturePack<F>, f: &F) -> Result<F> {
    let grad2 = pack.norm_squared(&pack.differential(f)?)?;
    Ok(pack.scalar.add(&pack.laplacian(f)?.scale(2.0)).sub(&grad2))
}

/// `V = (2Δf − |∇f|² + R)e^{−f}`.
pub fn perelman_v<F: Field>(pack: &CurvaturePack<F>, f: &F) -> Result<F> {
    Ok(perelman_scalar(pack, f)?.mul(&f.neg().exp()))
}

/// `−2|Rc + ∇∇f|² e^{−f}`.
pub fn perelman_v_rhs<F: Field>(pack: &CurvaturePack<F>, f: &F) -> Result<F> {
    let s = pack.ricci.add(&pack.hessian(f)?)?;
    Ok(pack.norm_squared(&s)?.mul(&f.neg().exp()).scale(-2.0))
}

/// `v = log u`, `Q = Δv + R`, `P = 2Q + |∇v|² + R` and
/// `P_ε = 2Δv + |∇v|² + (2ε + 1)R`.
#[derive(Clone, Debug)]
pub struct Section2<F> {
    pub v: F,
    pub dv: Tensor<F>,
    pub hess_v: Tensor<F>,
    pub lap_v: F,
    pub grad_v2: F,
    pub q: F,
    pub p: F,
    pub p_eps: F,
    pub eps: f64,
}

pub fn section2_quantities<F: Field>(pack: &CurvaturePack<F>, u: &F, eps: f64) -> Result<Section2<F>> {
    if eps == 0.0 {
        return Err(Error::Config("epsilon must be nonzero".into()));
    }
    if !(u.min_value() > 0.0) {
        return Err(Error::Positivity(format!("u has minimum {}", u.min_value())));
    }
    let v = u.ln()?;
    let dv = pack.differential(&v)?;
    let hess_v = pack.covariant_derivative(&dv)?;
    let lap_v = trace(&hess_v, &pack.inverse);
    let grad_v2 = pack.norm_squared(&dv)?;
    let r = &pack.scalar;
    let q = lap_v.add(r);
    let p = q.scale(2.0).add(&grad_v2).add(r);
    let p_eps = lap_v.scale(2.0).add(&grad_v2).add(&r.scale(2.0 * eps + 1.0));
    Ok(Section2 { v, dv, hess_v, lap_v, grad_v2, q, p, p_eps, eps })
}

/// `L_ε φ = ½(∂_t φ − ε⁻¹Δφ) − ε⁻¹∇v·∇φ`; `ε = 1` gives `L`.
pub fn l_eps<F: Field>(pack: &CurvaturePack<F>, dv: &Tensor<F>, phi: &F, dphi_dt: &F, eps: f64) -> Result<F> {
    let inv = 1.0 / eps;
    let lap = pack.laplacian(phi)?;
    let drift = pack.inner(dv, &pack.differential(phi)?)?;
    Ok(dphi_dt.sub(&lap.scale(inv)).scale(0.5).sub(&drift.scale(inv)))
}

/// `Rc(∇a, ∇b)` for scalar fields given by their differentials.
pub fn ricci_of_gradients<F: Field>(pack: &CurvaturePack<F>, da: &Tensor<F>, db: &Tensor<F>) -> Result<F> {
    let ga = pack.raise(da, 0)?;
    let gb = pack.raise(db, 0)?;
    Ok(bilinear(&pack.ricci, &ga, &gb))
}

/// Terms of `|∇∇v|² + ⟨Rc, ∇∇v⟩ + Rc(∇(v−f), ∇(v−f))`.
pub fn lq_rhs<F: Field>(pack: &CurvaturePack<F>, s2: &Section2<F>, df: &Tensor<F>) -> Result<[F; 3]> {
    let w = s2.dv.sub(df)?;
    Ok([
        pack.norm_squared(&s2.hess_v)?,
        pack.inner(&pack.ricci, &s2.hess_v)?,
        ricci_of_gradients(pack, &w, &w)?,
    ])
}

/// Terms of `|Rc|² − |∇∇v|²`.
pub fn l_grad_rhs<F: Field>(pack: &CurvaturePack<F>, s2: &Section2<F>) -> Result<[F; 2]> {
    Ok([pack.norm_squared(&pack.ricci)?, pack.norm_squared(&s2.hess_v)?.neg()])
}

/// Terms of `|∇∇v + Rc|² + 2Rc(∇(v−f), ∇(v−f))`.
pub fn lp_rhs<F: Field>(pack: &CurvaturePack<F>, s2: &Section2<F>, df: &Tensor<F>) -> Result<[F; 2]> {
    let w = s2.dv.sub(df)?;
    Ok([
        pack.norm_squared(&s2.hess_v.add(&pack.ricci)?)?,
        ricci_of_gradients(pack, &w, &w)?.scale(2.0),
    ])
}

/// Ricci terms of the interpolated Bochner formula in the first grouping:
/// `2ε⁻¹Rc(∇(v−εf), ∇(v−εf)) + (1−ε⁻¹)Rc(∇(v+f), ∇(v+f))`.
pub fn ricci_terms_first<F: Field>(pack: &CurvaturePack<F>, dv: &Tensor<F>, df: &Tensor<F>, eps: f64) -> Result<[F; 2]> {
    let inv = 1.0 / eps;
    let a = dv.sub(&df.scale(eps))?;
    let b = dv.add(df)?;
    Ok([
        ricci_of_gradients(pack, &a, &a)?.scale(2.0 * inv),
        ricci_of_gradients(pack, &b, &b)?.scale(1.0 - inv),
    ])
}

/// The same Ricci terms regrouped:
/// `(1+ε⁻¹)Rc(∇(v−f), ∇(v−f)) + 2(ε−ε⁻¹)Rc(∇f, ∇f)`.
pub fn ricci_terms_second<F: Field>(pack: &CurvaturePack<F>, dv: &Tensor<F>, df: &Tensor<F>, eps: f64) -> Result<[F; 2]> {
    let inv = 1.0 / eps;
    let a = dv.sub(df)?;
    Ok([
        ricci_of_gradients(pack, &a, &a)?.scale(1.0 + inv),
        ricci_of_gradients(pack, df, df)?.scale(2.0 * (eps - inv)),
    ])
}

/// Terms of the right-hand side of `L_ε P_ε`:
/// `ε⁻¹|∇∇v|² + 2⟨Rc, ∇∇v⟩ + ε⁻¹|Rc|²` plus the first-grouping Ricci terms.
pub fn l_eps_p_eps_rhs<F: Field>(pack: &CurvaturePack<F>, s2: &Section2<F>, df: &Tensor<F>) -> Result<[F; 5]> {
    let inv = 1.0 / s2.eps;
    let [r1, r2] = ricci_terms_first(pack, &s2.dv, df, s2.eps)?;
    Ok([
        pack.norm_squared(&s2.hess_v)?.scale(inv),
        pack.inner(&pack.ricci, &s2.hess_v)?.scale(2.0),
        pack.norm_squared(&pack.ricci)?.scale(inv),
        r1,
        r2,
    ])
}

/// `(½(∂_t + Δ) + ∇v·∇)φ`, the `ε = −1` operator.
pub fn backward_operator<F: Field>(pack: &CurvaturePack<F>, dv: &Tensor<F>, phi: &F, dphi_dt: &F) -> Result<F> {
    l_eps(pack, dv, phi, dphi_dt, -1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{make_perturbation, PerturbationKind, VectorFieldKind, VectorFieldSpec};
    use crate::jet::{Jet, VarRole};
    use crate::residual::Residual;
    use crate::solitons::{catalog_get, Frame, SolitonSpec};

    fn setup(name: &str, p: &[f64], t: f64, time: bool, order: usize) -> (SolitonSpec, Frame, CurvaturePack<Jet>) {
        let spec = catalog_get(name).unwrap();
        let frame = spec.frame(spec.jet_space(time, false, order).unwrap(), p, t).unwrap();
        let pack = spec.curvature_at(&frame).unwrap();
        (spec, frame, pack)
    }

    fn neg_grad(pack: &CurvaturePack<Jet>, f: &Jet) -> Tensor<Jet> {
        pack.gradient(f).unwrap().scale(-1.0)
    }

    #[test]
    fn flat_quantities_vanish() {
        let (_, frame, pack) = setup("flat_torus", &[0.3, 0.2], 0.0, false, 6);
        let mh = matrix_harnack(&pack).unwrap();
        assert!(mh.m.max_abs_value().unwrap() == 0.0 && mh.p.max_abs_value().unwrap() == 0.0);
        let x = VectorFieldSpec::new(VectorFieldKind::RandomPolynomial, 3).evaluate(&pack, &frame, None, 0).unwrap();
        assert_eq!(trace_harnack(&pack, &x).unwrap().value().unwrap(), 0.0);
        let zero = x.scale(0.0);
        let z = linear_trace_z(&pack, &pack.metric, &zero).unwrap().total();
        assert_eq!(z.value().unwrap(), 0.0);
    }

    #[test]
    fn cigar_static_matrix_identities() {
        for p in [[0.3, 0.7], [-1.2, 0.5], [2.1, -2.4]] {
            let (spec, frame, pack) = setup("cigar_static", &p, 0.0, false, 6);
            let f = spec.potential_at(&frame).unwrap();
            let grad_f = pack.gradient(&f).unwrap();
            let mh = matrix_harnack(&pack).unwrap();
            let pf = p_contract_first(&mh.p, &grad_f);
            let r = Residual::tensors("M", &[&mh.m, &pf.scale(-1.0)]).unwrap();
            assert!(r.relative() < 1e-10, "{r:?}");
            let rf = riemann_contract(&pack, &grad_f);
            let r = Residual::tensors("P", &[&mh.p, &rf.scale(-1.0)]).unwrap();
            assert!(r.relative() < 1e-10, "{r:?}");
        }
    }

    #[test]
    fn p_trace_is_half_grad_r() {
        let (_, _, pack) = setup("torus_generic", &[0.9, 2.2], 0.0, false, 6);
        let mh = matrix_harnack(&pack).unwrap();
        let tr = pack.contract(&mh.p, 1, 2).unwrap();
        let half_dr = pack.differential(&pack.scalar).unwrap().scale(0.5);
        let r = Residual::tensors("Bianchi", &[&tr, &half_dr.scale(-1.0)]).unwrap();
        assert!(r.relative() < 1e-10, "{r:?}");
    }

    #[test]
    fn z_examples_on_cigar() {
        let (spec, frame, pack) = setup("cigar_static", &[0.8, -0.3], 0.0, false, 6);
        let f = spec.potential_at(&frame).unwrap();
        let x = neg_grad(&pack, &f);
        let zg = linear_trace_z(&pack, &pack.metric, &x).unwrap().total().value().unwrap();
        assert!((zg - 1.0).abs() < 1e-12, "{zg}");
        let zr = linear_trace_z(&pack, &pack.ricci, &x).unwrap().total().value().unwrap();
        assert!(zr.abs() < 1e-12);
        let th = trace_harnack(&pack, &x).unwrap().value().unwrap();
        assert!(th.abs() < 1e-12);
    }

    #[test]
    fn z_is_quadratic_in_x_and_matches_trace_harnack() {
        let (_, frame, pack) = setup("cigar_flow", &[0.8, -0.3], 0.2, true, 6);
        let x = VectorFieldSpec::new(VectorFieldKind::RandomPolynomial, 8).evaluate(&pack, &frame, None, 1).unwrap();
        let h = make_perturbation(PerturbationKind::RandomJetSeed, 4).evaluate(&pack, &frame, 1).unwrap();
        let z = linear_trace_z(&pack, &h, &x).unwrap();
        let z0 = linear_trace_z(&pack, &h, &x.scale(0.0)).unwrap();
        let div = pack.divergence(&h).unwrap();
        let lhs = z.total() - z0.total() - pair(&div, &x).scale(2.0) - bilinear(&h, &x, &x);
        assert!(lhs.value().unwrap().abs() < 1e-12 * (1.0 + z.total().value().unwrap().abs()));

        let th = trace_harnack(&pack, &x).unwrap();
        let zr = linear_trace_z(&pack, &pack.ricci, &x).unwrap().total();
        let r = Residual::jets("H4t", &[&th, &zr.scale(-2.0)]).unwrap();
        assert!(r.relative() < 1e-10, "{r:?}");
    }

    #[test]
    fn shrinker_w_examples() {
        let (spec, frame, pack) = setup("gaussian_shrinker", &[0.0, 0.0], -1.0, true, 5);
        let f = spec.potential_at(&frame).unwrap();
        let t = frame.time_jet();
        let w = shrinker_w(&pack, &pack.metric, &f, &t).unwrap().value().unwrap();
        assert!((w + 1.0).abs() < 1e-13, "{w}");
        let w = shrinker_w(&pack, &pack.ricci, &f, &t).unwrap().value().unwrap();
        assert_eq!(w, 0.0);

        // away from the origin: Z(g, −∇f) = |x|²/4 at t = −1
        let (spec, frame, pack) = setup("gaussian_shrinker", &[0.6, -1.0], -1.0, true, 5);
        let f = spec.potential_at(&frame).unwrap();
        let w = shrinker_w(&pack, &pack.metric, &f, &frame.time_jet()).unwrap().value().unwrap();
        assert!((w - (1.36 / 4.0 - 1.0)).abs() < 1e-13);

        let (spec, frame, pack) = setup("sphere_shrinker", &[0.6, -1.0], -0.7, true, 5);
        let f = spec.potential_at(&frame).unwrap();
        let w = shrinker_w(&pack, &pack.ricci, &f, &frame.time_jet()).unwrap().value().unwrap();
        assert!(w.abs() < 1e-12, "{w}");
    }

    #[test]
    fn shrinker_w_rejects_nonnegative_time() {
        let (_, frame, pack) = setup("flat_torus", &[0.1, 0.2], 0.5, true, 4);
        let f = frame.constant(0.0);
        assert!(matches!(shrinker_w(&pack, &pack.metric, &f, &frame.time_jet()), Err(Error::Domain(_))));
    }

    #[test]
    fn perelman_scalar_examples() {
        let spec = SolitonSpec::flat_steady_linear(vec![0.6, 0.8]);
        let frame = spec.frame(spec.jet_space(true, false, 4).unwrap(), &[0.4, 0.1], 0.3).unwrap();
        let pack = spec.curvature_at(&frame).unwrap();
        let f = spec.potential_at(&frame).unwrap();
        assert!((perelman_scalar(&pack, &f).unwrap().value().unwrap() + 1.0).abs() < 1e-14);

        // Δf = −R and |∇f|² = 1 − R give R − 2R − (1 − R) = −1 everywhere
        for p in [[0.0, 0.0], [1.1, 0.4], [-2.0, 1.7]] {
            let (spec, frame, pack) = setup("cigar_static", &p, 0.0, false, 5);
            let f = spec.potential_at(&frame).unwrap();
            assert!((perelman_scalar(&pack, &f).unwrap().value().unwrap() + 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn section2_trivial_case() {
        let (spec, frame, pack) = setup("cigar_flow_v2", &[0.7, 0.5], 0.1, true, 5);
        let f = spec.potential_at(&frame).unwrap();
        let s2 = section2_quantities(&pack, &f.exp(), 1.0).unwrap();
        assert!((s2.v.value().unwrap() - f.value().unwrap()).abs() < 1e-14);
        assert!(s2.q.value().unwrap().abs() < 1e-13);
        assert!((s2.p.value().unwrap() - 1.0).abs() < 1e-13);
        assert!((s2.p_eps.value().unwrap() - s2.p.value().unwrap()).abs() < 1e-14);
        assert!(section2_quantities(&pack, &f.exp(), 0.0).is_err());
        assert!(matches!(section2_quantities(&pack, &f.exp().scale(-1.0), 1.0), Err(Error::Positivity(_))));
    }

    #[test]
    fn ricci_groupings_agree_on_generic_metric() {
        let (_, frame, pack) = setup("torus_generic", &[1.0, 2.0], 0.0, false, 4);
        let x = frame.coords().unwrap();
        let v = (&x[0] * &x[1]).sin();
        let f = x[0].cos() + &x[1].scale(0.3);
        let (dv, df) = (pack.differential(&v).unwrap(), pack.differential(&f).unwrap());
        for eps in [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0] {
            let a = ricci_terms_first(&pack, &dv, &df, eps).unwrap();
            let b = ricci_terms_second(&pack, &dv, &df, eps).unwrap();
            let r = Residual::jets("B7", &[&a[0], &a[1], &-b[0].clone(), &-b[1].clone()]).unwrap();
            assert!(r.relative() < 1e-12, "{eps}: {r:?}");
        }
    }

    #[test]
    fn z_evolution_terms_vanish_for_ricci_on_steady_cigar() {
        let (spec, frame, pack) = setup("cigar_flow", &[0.5, 1.3], -0.2, true, 6);
        let f = spec.potential_at(&frame).unwrap();
        let x = neg_grad(&pack, &f);
        let dx = x.try_map(|c| c.partial_role(VarRole::Time)).unwrap();
        let terms = z_evolution_rhs(&pack, &pack.ricci, &x, &dx).unwrap();
        let scale = pack.scalar.value().unwrap().powi(2);
        for t in terms.terms() {
            assert!(t.value().unwrap().abs() < 1e-10 * scale, "{:?}", t.value());
        }
    }
}
