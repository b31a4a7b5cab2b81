//! Registry of identity checks and the sampling runner.
//!
//! Each check evaluates one identity at seeded quasi-random points of a
//! soliton's sampling box and reports relative residuals.

use std::collections::BTreeMap;
use std::time::Instant;

use globset::{Glob, GlobMatcher};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::fields::{
    make_perturbation, propagate_lichnerowicz, propagate_scalar, random_spatial_jet, trace_of, Evolution,
    PerturbationKind, ScalarFieldKind, ScalarFieldSpec, VectorFieldKind, VectorFieldSpec, DEFAULT_SPATIAL_ORDER,
};
use crate::geometry::CurvaturePack;
use crate::harnack::{self, Section2};
use crate::jet::{Jet, VarRole};
use crate::residual::{worst, Residual};
use crate::rng::{stream_rng, Stream};
use crate::solitons::{
    catalog, normalization_identities, soliton_residual, steady_identities, Chart, Frame, PotentialRule,
    SolitonClass, SolitonSpec,
};
use crate::tensor::{Down, Tensor, Up};

pub const DEFAULT_TOLERANCE: f64 = 1e-8;
/// Largest tolerance a caller may request.
pub const MAX_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_ORDER: usize = 6;
pub const DEFAULT_POINTS: usize = 32;
/// `ε` values used by the interpolation checks.
pub const EPSILON_SET: [f64; 6] = [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0];

type Evaluator = fn(&Sample) -> Result<Vec<Residual>>;
type Applicability = fn(&SolitonSpec) -> bool;

/// A registered identity.
#[derive(Clone)]
pub struct CheckSpec {
    pub id: &'static str,
    pub description: &'static str,
    /// Mathematical context of the identity.
    pub anchor: &'static str,
    /// Field kinds the evaluator draws.
    pub fields: &'static [&'static str],
    pub tolerance: f64,
    pub min_order: usize,
    /// Some checks need more samples than requested (inequalities).
    pub min_points: usize,
    applies: Applicability,
    evaluate: Evaluator,
}

impl std::fmt::Debug for CheckSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CheckSpec").field("id", &self.id).field("tolerance", &self.tolerance).finish()
    }
}

impl CheckSpec {
    pub fn applies_to(&self, spec: &SolitonSpec) -> bool {
        (self.applies)(spec)
    }

    /// Evaluate at one sample.
    pub fn evaluate(&self, sample: &Sample) -> Result<Vec<Residual>> {
        (self.evaluate)(sample)
    }
}

/// One evaluation site.
#[derive(Clone, Debug)]
pub struct Sample<'a> {
    pub spec: &'a SolitonSpec,
    pub point: Vec<f64>,
    pub time: f64,
    pub seed: u64,
    pub index: u64,
    pub order: usize,
}

impl<'a> Sample<'a> {
    pub fn frame(&self, time: bool, deform: bool) -> Result<Frame> {
        let space = self.spec.jet_space(time, deform, self.order)?;
        self.spec.frame(space, &self.point, self.time)
    }

    fn spatial_order(&self) -> usize {
        DEFAULT_SPATIAL_ORDER.min(self.order - 1)
    }
}

fn is_steady_flow(s: &SolitonSpec) -> bool {
    s.class == SolitonClass::Steady && s.is_flow
}

fn is_shrinker(s: &SolitonSpec) -> bool {
    s.class == SolitonClass::Shrinking
}

fn is_cigar_flow(s: &SolitonSpec) -> bool {
    matches!(s.chart, Chart::CigarFlow)
}

fn dt(j: &Jet) -> Result<Jet> {
    j.partial_role(VarRole::Time)
}

fn dt_tensor(t: &Tensor<Jet>) -> Result<Tensor<Jet>> {
    t.try_map(dt)
}

fn heat(pack: &CurvaturePack<Jet>, q: &Jet) -> Result<[Jet; 2]> {
    Ok([dt(q)?, -pack.laplacian(q)?])
}

fn labelled(mut r: Residual, label: &str) -> Residual {
    r.label = label.into();
    r
}

fn s1(s: &Sample) -> Result<Vec<Residual>> {
    soliton_residual(s.spec, &s.point, s.time, s.order)
}

fn s2(s: &Sample) -> Result<Vec<Residual>> {
    steady_identities(s.spec, &s.frame(false, false)?)
}

fn s3(s: &Sample) -> Result<Vec<Residual>> {
    normalization_identities(s.spec, &s.frame(false, false)?)
}

fn static_setup(s: &Sample) -> Result<(Frame, CurvaturePack<Jet>, Jet)> {
    let frame = s.frame(false, false)?;
    let pack = s.spec.curvature_at(&frame)?;
    let f = s.spec.potential_at(&frame)?;
    Ok((frame, pack, f))
}

fn over_2t(frame: &Frame, a: &Jet) -> Result<Jet> {
    a.div(&frame.time_jet().scale(2.0))
}

fn h1(s: &Sample) -> Result<Vec<Residual>> {
    let (frame, pack, f) = static_setup(s)?;
    let grad_f = pack.gradient(&f)?;
    let mh = harnack::matrix_harnack(&pack)?;
    let pf = harnack::p_contract_first(&mh.p, &grad_f).scale(-1.0);
    if s.spec.class == SolitonClass::Shrinking {
        let t2 = frame.time_jet().scale(2.0).recip()?;
        let rc = pack.ricci.times(&t2);
        return Ok(vec![Residual::tensors("M + Rc/2t - P(grad f)", &[&mh.m, &rc, &pf])?]);
    }
    Ok(vec![Residual::tensors("M - P(grad f)", &[&mh.m, &pf])?])
}

fn h2(s: &Sample) -> Result<Vec<Residual>> {
    let (_, pack, f) = static_setup(s)?;
    let n = pack.dim();
    let grad_f = pack.gradient(&f)?;
    // P_ipq = ∇_i R_pq − ∇_p R_qi, with ∇ expanded into its additive pieces
    let mut terms = Vec::new();
    for part in pack.covariant_derivative_parts(&pack.ricci)? {
        terms.push(part.clone());
        terms.push(Tensor::from_fn(n, &[Down, Down, Down], |ipq| part.get(&[ipq[1], ipq[2], ipq[0]]).neg()));
    }
    terms.push(harnack::riemann_contract(&pack, &grad_f).scale(-1.0));
    let refs: Vec<&Tensor<Jet>> = terms.iter().collect();
    Ok(vec![Residual::tensors("P - Rm(grad f)", &refs)?])
}

/// `Rc + ∇∇f − λg` and, along a flow, `(∂_t − Δ)∇f − Rc(∇f) + (1/t)∇f`
/// (the last term only for shrinkers).
fn h3(s: &Sample) -> Result<Vec<Residual>> {
    let shrinking = s.spec.class == SolitonClass::Shrinking;
    let frame = s.frame(s.spec.is_flow, false)?;
    let pack = s.spec.curvature_at(&frame)?;
    let f = s.spec.potential_at(&frame)?;
    let mut out = Vec::new();
    let hess = pack.hessian(&f)?;
    let lambda = pack.metric.scale(-s.spec.soliton_constant(s.time));
    out.push(Residual::tensors("Hess f + Rc - lambda g", &[&hess, &pack.ricci, &lambda])?);
    if s.spec.is_flow {
        let n = pack.dim();
        let grad_f = pack.gradient(&f)?;
        let d = dt_tensor(&grad_f)?;
        let lap = pack.rough_laplacian(&grad_f)?.scale(-1.0);
        let rc_mixed = pack.raise(&pack.ricci, 0)?;
        let rcf = Tensor::from_fn(n, &[Up], |j| {
            let mut acc = f.zero_like();
            for k in 0..n {
                acc.add_product(rc_mixed.get(&[j[0], k]), grad_f.get(&[k]));
            }
            acc.neg()
        });
        if shrinking {
            let over_t = grad_f.times(&frame.time_jet().recip()?);
            out.push(Residual::tensors("(dt - lap) grad f - Rc(grad f) + grad f/t", &[&d, &lap, &rcf, &over_t])?);
        } else {
            out.push(Residual::tensors("(dt - lap) grad f - Rc(grad f)", &[&d, &lap, &rcf])?);
        }
    }
    Ok(out)
}

fn h4(s: &Sample) -> Result<Vec<Residual>> {
    let (frame, pack, f) = static_setup(s)?;
    let x = pack.gradient(&f)?.scale(-1.0);
    let z = harnack::linear_trace_z(&pack, &pack.ricci, &x)?;
    let mut terms: Vec<Jet> = z.terms().into_iter().cloned().collect();
    if s.spec.class == SolitonClass::Shrinking {
        terms.push(over_2t(&frame, &pack.scalar)?);
    }
    let refs: Vec<&Jet> = terms.iter().collect();
    Ok(vec![Residual::jets("Z(Rc, -grad f)", &refs)?])
}

fn h4t(s: &Sample) -> Result<Vec<Residual>> {
    let frame = s.frame(false, false)?;
    let pack = s.spec.curvature_at(&frame)?;
    let x = VectorFieldSpec::new(VectorFieldKind::RandomPolynomial, s.seed).evaluate(&pack, &frame, None, s.index)?;
    let th = harnack::trace_harnack_terms(&pack, &x)?;
    let z = harnack::linear_trace_z(&pack, &pack.ricci, &x)?;
    let neg: Vec<Jet> = z.terms().iter().map(|t| t.scale(-2.0)).collect();
    let refs: Vec<&Jet> = th.iter().chain(neg.iter()).collect();
    Ok(vec![Residual::jets("trace Harnack - 2Z(Rc, X)", &refs)?])
}

/// Time-propagated random `h` at a space-time frame.
fn propagated_h(s: &Sample, frame: &Frame, pack: &CurvaturePack<Jet>) -> Result<Tensor<Jet>> {
    let mut field = make_perturbation(PerturbationKind::RandomJetSeed, s.seed);
    field.spatial_order = s.spatial_order();
    let h0 = field.evaluate(pack, frame, s.index)?;
    propagate_lichnerowicz(h0, pack, field.spatial_order, 1)
}

fn flow_setup(s: &Sample) -> Result<(Frame, CurvaturePack<Jet>)> {
    let frame = s.frame(true, false)?;
    let pack = s.spec.curvature_at(&frame)?;
    Ok((frame, pack))
}

fn eq1(s: &Sample) -> Result<Vec<Residual>> {
    let (frame, pack) = flow_setup(s)?;
    let h = propagated_h(s, &frame, &pack)?;
    let x = VectorFieldSpec::new(VectorFieldKind::RandomPolynomial, s.seed).evaluate(&pack, &frame, None, s.index)?;
    let dx = dt_tensor(&x)?;
    let z = harnack::linear_trace_z(&pack, &h, &x)?.total();
    let rhs = harnack::z_evolution_rhs(&pack, &h, &x, &dx)?;
    let [a, b] = heat(&pack, &z)?;
    let neg: Vec<Jet> = rhs.terms().iter().map(|t| t.neg()).collect();
    let mut refs = vec![&a, &b];
    refs.extend(neg.iter());
    let mut out = vec![Residual::jets("(dt - lap) Z - rhs", &refs)?];
    if s.spec.class == SolitonClass::Steady {
        out.extend(eq1_terms_vanish(s)?);
    }
    Ok(out)
}

fn abs_values(t: &Tensor<Jet>) -> Result<Vec<f64>> {
    Ok(t.values()?.into_iter().map(f64::abs).collect())
}

/// With `h = Rc` and `X = −∇f` on a steady soliton each of the four lines
/// of the `Z` evolution vanishes. Each line is normalized by the size of
/// its own factors, so cancellation inside a factor is measured relative
/// to the pieces that cancel.
pub fn eq1_terms_vanish(s: &Sample) -> Result<Vec<Residual>> {
    let (frame, pack) = flow_setup(s)?;
    let f = s.spec.potential_at(&frame)?;
    let n = pack.dim();
    let h = pack.ricci.clone();
    let x = pack.gradient(&f)?.scale(-1.0);
    let dx = dt_tensor(&x)?;
    let terms = harnack::z_evolution_rhs(&pack, &h, &x, &dx)?;

    let mh = harnack::matrix_harnack(&pack)?;
    let h_up = abs_values(&pack.raise(&pack.raise(&h, 0)?, 1)?)?;
    let m = abs_values(&mh.m)?;
    let px = abs_values(&harnack::p_contract_first(&mh.p, &x))?;
    let xv = x.values()?;
    let rm = pack.riemann.values()?;
    let mut s1 = 0.0;
    for p in 0..n {
        for q in 0..n {
            let mut rxx = 0.0;
            for i in 0..n {
                for j in 0..n {
                    rxx += (rm[((p * n + i) * n + j) * n + q] * xv[i] * xv[j]).abs();
                }
            }
            let k = p * n + q;
            s1 += h_up[k] * (m[k] + 2.0 * px[k] + rxx);
        }
    }
    let s1 = 2.0 * s1;

    let dxv = abs_values(&pack.covariant_derivative(&x)?)?;
    let rc_mixed = abs_values(&pack.raise(&pack.ricci, 1)?)?;
    let a: Vec<f64> = dxv.iter().zip(&rc_mixed).map(|(u, v)| u + v).collect();
    let div = pack.divergence(&h)?;
    let w = Tensor::from_fn(n, &[Down], |i| {
        let mut acc = div.get(i).clone();
        for k in 0..n {
            acc.add_product(h.get(&[i[0], k]), x.get(&[k]));
        }
        acc
    });
    let gw = abs_values(&pack.raise(&pack.covariant_derivative(&w)?, 0)?)?;
    let s2 = 4.0 * a.iter().zip(&gw).map(|(u, v)| u * v).sum::<f64>();

    let wv = abs_values(&w)?;
    let dtx = abs_values(&dx)?;
    let lap = abs_values(&pack.rough_laplacian(&x)?)?;
    let rup = pack.raise(&pack.ricci, 0)?.values()?;
    let mut s3 = 0.0;
    for j in 0..n {
        let rcx: f64 = (0..n).map(|k| (rup[j * n + k] * xv[k]).abs()).sum();
        s3 += wv[j] * (dtx[j] + lap[j] + rcx);
    }
    let s3 = 2.0 * s3;

    // a is stored (Down p, Up i); raising p only permutes magnitudes through g^{pq}
    let inv = abs_values(&pack.inverse)?;
    let hv = abs_values(&h)?;
    let mut s4 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for p in 0..n {
                for q in 0..n {
                    acc += a[p * n + i] * inv[p * n + q] * a[q * n + j];
                }
            }
            s4 += hv[i * n + j] * acc;
        }
    }
    let s4 = 2.0 * s4;

    let labels = ["curvature line", "gradient line", "drift line", "quadratic line"];
    terms
        .terms()
        .iter()
        .zip([s1, s2, s3, s4])
        .zip(labels)
        .map(|((t, scale), label)| {
            Ok(Residual { label: format!("{label} with h = Rc, X = -grad f"), abs: t.value()?.abs(), scale })
        })
        .collect()
}

fn l1(s: &Sample) -> Result<Vec<Residual>> {
    let (frame, pack) = flow_setup(s)?;
    let f = s.spec.potential_at(&frame)?;
    let h = propagated_h(s, &frame, &pack)?;
    let x = pack.gradient(&f)?.scale(-1.0);
    let z = harnack::linear_trace_z(&pack, &h, &x)?.total();
    let [a, b] = heat(&pack, &z)?;
    Ok(vec![Residual::jets("(dt - lap) Z(h, -grad f)", &[&a, &b])?])
}

fn l2(s: &Sample) -> Result<Vec<Residual>> {
    let (frame, pack) = flow_setup(s)?;
    let f = s.spec.potential_at(&frame)?;
    let t = frame.time_jet();
    let h = propagated_h(s, &frame, &pack)?;
    let x = pack.gradient(&f)?.scale(-1.0);
    let z = harnack::linear_trace_z(&pack, &h, &x)?.total();
    let big_h = trace_of(&h, &pack);
    let y = z + &big_h.div(&t.scale(2.0))?;
    let [a, b] = heat(&pack, &y)?;
    let decay = y.div(&t)?.scale(2.0);
    let w = harnack::shrinker_w(&pack, &h, &f, &t)?;
    let [wa, wb] = heat(&pack, &w)?;
    let [ha, hb] = heat(&pack, &big_h)?;
    let hr = pack.inner(&h, &pack.ricci)?.scale(-2.0);
    Ok(vec![
        Residual::jets("(dt - lap) Y + (2/t) Y", &[&a, &b, &decay])?,
        Residual::jets("(dt - lap) W", &[&wa, &wb])?,
        Residual::jets("(dt - lap) H - 2<h, Rc>", &[&ha, &hb, &hr])?,
    ])
}

fn r1(s: &Sample) -> Result<Vec<Residual>> {
    let frame = s.frame(false, true)?;
    let sv = frame.deform_jet()?;
    let g = s.spec.metric_at(&frame)?;
    let pack = crate::geometry::CurvaturePack::from_metric(g.clone())?;
    let f = s.spec.potential_at(&frame)?;
    let mut field = make_perturbation(PerturbationKind::RandomJetSeed, s.seed);
    field.spatial_order = s.spatial_order();
    let h = field.evaluate(&pack, &frame, s.index)?;
    let big_h = trace_of(&h, &pack);

    let gs = g.add(&h.times(&sv))?;
    let pack_s = crate::geometry::CurvaturePack::from_metric(gs)?;
    let fs = &f + &(&sv * &big_h.scale(0.5));
    let ds = |j: &Jet| j.partial_role(VarRole::Deform);
    let dp = ds(&harnack::perelman_scalar(&pack_s, &fs)?)?;

    let x = pack.gradient(&f)?.scale(-1.0);
    let z = harnack::linear_trace_z(&pack, &h, &x)?;
    let neg_z: Vec<Jet> = z.terms().iter().map(|t| t.neg()).collect();
    let hr = pack.inner(&h, &pack.ricci)?.scale(2.0);
    let hf = pack.inner(&h, &pack.hessian(&f)?)?.scale(2.0);
    let mut refs = vec![&dp];
    refs.extend(neg_z.iter());
    refs.push(&hr);
    refs.push(&hf);
    let variation = Residual::jets("ds(R + 2 lap f - |grad f|^2) - Z + 2<h, Rc + Hess f>", &refs)?;

    let ef = fs.neg().exp();
    let vol = pack_s.volume_density()?;
    let a = &ef * &ds(&vol)?;
    let b = &vol * &ds(&ef)?;
    let measure = Residual::jets("ds(e^-f dmu)", &[&a, &b])?;
    Ok(vec![variation, measure])
}

fn box_star_terms(pack: &CurvaturePack<Jet>, f: &Jet) -> Result<[Jet; 4]> {
    let v = harnack::perelman_v(pack, f)?;
    let rhs = harnack::perelman_v_rhs(pack, f)?;
    Ok([dt(&v)?.neg(), pack.laplacian(&v)?.neg(), &pack.scalar * &v, rhs.neg()])
}

fn r2(s: &Sample) -> Result<Vec<Residual>> {
    let (frame, pack) = flow_setup(s)?;
    let mut rng = stream_rng(s.seed, s.index, Stream::Potential);
    let m = s.spatial_order();
    let seed = random_spatial_jet(&frame.space, m, &mut rng)?;
    let f = propagate_scalar(seed, Evolution::ConjugatePotential, &pack, m, 1)?;
    let t = box_star_terms(&pack, &f)?;
    let mut out = vec![Residual::jets("box* V + 2|Rc + Hess f|^2 e^-f", &[&t[0], &t[1], &t[2], &t[3]])?];
    if let Some(f0) = s.spec.conjugate_potential_at(&frame) {
        let t = box_star_terms(&pack, &f0?)?;
        out.push(Residual::jets("box* V for the soliton potential", &[&t[0], &t[1], &t[2], &t[3]])?);
    }
    Ok(out)
}

fn b1(s: &Sample) -> Result<Vec<Residual>> {
    let (frame, pack) = flow_setup(s)?;
    let f = s.spec.potential_at(&frame)?;
    let u = f.exp();
    let [a, b] = heat(&pack, &u)?;
    let c = (&pack.scalar * &u).neg();
    Ok(vec![Residual::jets("dt e^f - lap e^f - R e^f", &[&a, &b, &c])?])
}

/// Random positive `u` propagated under `∂_t u = ε⁻¹Δu + Ru`.
fn section2_setup(s: &Sample, eps: f64) -> Result<(Frame, CurvaturePack<Jet>, Section2<Jet>, Tensor<Jet>)> {
    let (frame, pack) = flow_setup(s)?;
    let mut spec = ScalarFieldSpec::new(ScalarFieldKind::RandomJetSeed, s.seed, true);
    spec.spatial_order = s.spatial_order();
    let u0 = spec.evaluate(&frame, None, s.index)?;
    let u = propagate_scalar(u0, Evolution::ScalarHeat { eps }, &pack, spec.spatial_order, 1)?;
    let s2 = harnack::section2_quantities(&pack, &u, eps)?;
    let df = pack.differential(&s.spec.potential_at(&frame)?)?;
    Ok((frame, pack, s2, df))
}

fn apply_l(pack: &CurvaturePack<Jet>, s2: &Section2<Jet>, phi: &Jet, eps: f64) -> Result<Jet> {
    harnack::l_eps(pack, &s2.dv, phi, &dt(phi)?, eps)
}

fn b2(s: &Sample) -> Result<Vec<Residual>> {
    let (_, pack, s2, df) = section2_setup(s, 1.0)?;
    let lq = apply_l(&pack, &s2, &s2.q, 1.0)?;
    let [a, b, c] = harnack::lq_rhs(&pack, &s2, &df)?;
    Ok(vec![Residual::jets("LQ - rhs", &[&lq, &-a, &-b, &-c])?])
}

fn b3(s: &Sample) -> Result<Vec<Residual>> {
    let (_, pack, s2, _) = section2_setup(s, 1.0)?;
    let phi = &s2.grad_v2 + &pack.scalar;
    let l = apply_l(&pack, &s2, &phi, 1.0)?;
    let [a, b] = harnack::l_grad_rhs(&pack, &s2)?;
    Ok(vec![Residual::jets("L(|grad v|^2 + R) - rhs", &[&l, &-a, &-b])?])
}

fn b4(s: &Sample) -> Result<Vec<Residual>> {
    let (frame, pack, s2, _) = section2_setup(s, 1.0)?;
    let f = s.spec.potential_at(&frame)?;
    let df = pack.differential(&f)?;
    let lp = apply_l(&pack, &s2, &s2.p, 1.0)?;
    let [a, b] = harnack::lp_rhs(&pack, &s2, &df)?;
    let hess_diff = pack.hessian(&(&s2.v - &f))?.scale(-1.0);
    Ok(vec![
        Residual::jets("LP - rhs", &[&lp, &-a, &-b])?,
        Residual::tensors("Hess v + Rc - Hess(v - f)", &[&s2.hess_v, &pack.ricci, &hess_diff])?,
    ])
}

fn b5(s: &Sample) -> Result<Vec<Residual>> {
    let (_, pack, s2, _) = section2_setup(s, 1.0)?;
    let lp = apply_l(&pack, &s2, &s2.p, 1.0)?.value()?;
    let q = s2.q.value()?;
    let rc_min = min_eigenvalue_2x2(&pack)?;
    if rc_min <= 0.0 {
        return Err(Error::Domain(format!("Ricci not positive at the sample ({rc_min})")));
    }
    Ok(vec![Residual::inequality("LP >= Q^2/n", lp, q * q / pack.dim() as f64)])
}

/// Smallest eigenvalue of `Rc` relative to `g` (2D charts only).
fn min_eigenvalue_2x2(pack: &CurvaturePack<Jet>) -> Result<f64> {
    if pack.dim() != 2 {
        return Err(Error::Config("Ricci positivity test implemented for surfaces".into()));
    }
    let a = pack.raise(&pack.ricci, 0)?.values()?;
    let (tr, det) = (a[0] + a[3], a[0] * a[3] - a[1] * a[2]);
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    Ok(tr / 2.0 - disc)
}

fn b6(s: &Sample) -> Result<Vec<Residual>> {
    EPSILON_SET
        .iter()
        .map(|&eps| {
            let (frame, pack, s2, _) = section2_setup(s, eps)?;
            let df = pack.differential(&s.spec.potential_at(&frame)?)?;
            let l = apply_l(&pack, &s2, &s2.p_eps, eps)?;
            let rhs = harnack::l_eps_p_eps_rhs(&pack, &s2, &df)?;
            let neg: Vec<Jet> = rhs.iter().map(|t| t.neg()).collect();
            let mut refs = vec![&l];
            refs.extend(neg.iter());
            Ok(labelled(Residual::jets("", &refs)?, &format!("L_eps P_eps - rhs, eps = {eps}")))
        })
        .collect()
}

fn b7(s: &Sample) -> Result<Vec<Residual>> {
    let frame = s.frame(false, false)?;
    let pack = s.spec.curvature_at(&frame)?;
    let mut rng = stream_rng(s.seed, s.index, Stream::Scalar);
    let m = s.spatial_order();
    let v = random_spatial_jet(&frame.space, m, &mut rng)?;
    let f = random_spatial_jet(&frame.space, m, &mut rng)?;
    let (dv, df) = (pack.differential(&v)?, pack.differential(&f)?);
    EPSILON_SET
        .iter()
        .map(|&eps| {
            let [a, b] = harnack::ricci_terms_first(&pack, &dv, &df, eps)?;
            let [c, d] = harnack::ricci_terms_second(&pack, &dv, &df, eps)?;
            Ok(labelled(Residual::jets("", &[&a, &b, &-c, &-d])?, &format!("Ricci regrouping, eps = {eps}")))
        })
        .collect()
}

fn b8(s: &Sample) -> Result<Vec<Residual>> {
    let (frame, pack, s2, _) = section2_setup(s, -1.0)?;
    let f = s.spec.potential_at(&frame)?;
    let phi = &(&s2.lap_v.scale(2.0) + &s2.grad_v2) - &pack.scalar;
    let lhs = harnack::backward_operator(&pack, &s2.dv, &phi, &dt(&phi)?)?;
    let a = pack.norm_squared(&pack.ricci.sub(&s2.hess_v)?)?;
    let b = pack.norm_squared(&pack.hessian(&(&f + &s2.v))?)?;
    Ok(vec![
        Residual::jets("backward L P_-1 + |Rc - Hess v|^2", &[&lhs, &a])?,
        Residual::jets("|Rc - Hess v|^2 - |Hess(f + v)|^2", &[&a, &-b])?,
    ])
}

fn any(_: &SolitonSpec) -> bool {
    true
}

fn soliton(s: &SolitonSpec) -> bool {
    s.is_soliton()
}

fn steady(s: &SolitonSpec) -> bool {
    s.class == SolitonClass::Steady
}

fn normalized_steady(s: &SolitonSpec) -> bool {
    steady(s) && s.normalized
}

fn flow(s: &SolitonSpec) -> bool {
    s.is_flow
}

fn steady_flow_gradient_rule(s: &SolitonSpec) -> bool {
    is_steady_flow(s) && s.rule == PotentialRule::GradientSquared
}

fn registry_table() -> Vec<CheckSpec> {
    let c = |id, description, anchor, fields, tolerance, min_order, applies: Applicability, evaluate: Evaluator| {
        CheckSpec { id, description, anchor, fields, tolerance, min_order, min_points: 0, applies, evaluate }
    };
    let none: &[&str] = &[];
    vec![
        c("CHK-S1", "soliton equation and flow equations of the chart", "Rc + ∇∇f = λg with ∂g/∂t = −2Rc and the potential's time rule", none, 1e-9, 3, soliton, s1),
        c("CHK-S2", "steady identities ΔR + 2|Rc|² = ⟨∇R,∇f⟩ and 2Rc(∇f) = ∇R", "contracted second Bianchi identity on a gradient soliton", none, DEFAULT_TOLERANCE, 4, soliton, s2),
        c("CHK-S3", "R = −Δf = 1 − |∇f|²", "normalization of a steady soliton", none, DEFAULT_TOLERANCE, 3, normalized_steady, s3),
        c("CHK-H1", "M_pq = P_ipq ∇^i f", "matrix Harnack tensors on a steady soliton", none, DEFAULT_TOLERANCE, 5, steady, h1),
        c("CHK-H1s", "M_pq + R_pq/(2t) = P_ipq ∇^i f", "matrix Harnack tensors on a shrinking soliton", none, DEFAULT_TOLERANCE, 5, is_shrinker, h1),
        c("CHK-H2", "P_ipq = R_pijq ∇^j f", "derivative of the soliton equation", none, DEFAULT_TOLERANCE, 4, soliton, h2),
        c("CHK-H3", "∇∇f + Rc = 0 and ((∂t − Δ)∇f)^j = R^j_k ∇^k f", "evolution of ∇f on a steady soliton", none, DEFAULT_TOLERANCE, 4, steady, h3),
        c("CHK-H3s", "∇∇f + Rc = −g/(2t) and ((∂t − Δ)∇f)^j − R^j_k ∇^k f = −∇^j f/t", "evolution of ∇f on a shrinking soliton", none, DEFAULT_TOLERANCE, 4, is_shrinker, h3),
        c("CHK-H4", "Z(Rc, −∇f) = 0", "linear trace Harnack with h = Rc on a steady soliton", none, DEFAULT_TOLERANCE, 5, steady, h4),
        c("CHK-H4s", "Z(Rc, −∇f) + R/(2t) = 0", "linear trace Harnack with h = Rc on a shrinking soliton", none, DEFAULT_TOLERANCE, 5, is_shrinker, h4),
        c("CHK-H4t", "ΔR + 2|Rc|² + 2⟨∇R,X⟩ + 2Rc(X,X) = 2Z(Rc, X)", "trace Harnack quadratic as Z(Rc, X)", &["random_polynomial X"], 1e-9, 5, any, h4t),
        c("CHK-EQ1", "(∂t − Δ)Z(h, X) equals the four-line curvature expression", "evolution of Z(h, X) under the linearized Ricci flow", &["random_jet_seed h", "random_polynomial X"], DEFAULT_TOLERANCE, 6, flow, eq1),
        c("CHK-L1", "(∂t − Δ)Z(h, −∇f) = 0", "heat equation for the linear trace Harnack on a steady soliton", &["random_jet_seed h"], DEFAULT_TOLERANCE, 6, is_steady_flow, l1),
        c("CHK-L2", "(∂t − Δ)(t²(Z + H/2t)) = 0 and (∂t − Δ)(Z + H/2t) = −(2/t)(Z + H/2t)", "linear trace Harnack on a shrinking soliton", &["random_jet_seed h"], DEFAULT_TOLERANCE, 6, is_shrinker, l2),
        c("CHK-R1", "∂s(R + 2Δf − |∇f|²) = Z(h, −∇f) − 2⟨h, Rc + ∇∇f⟩ and ∂s(e^{−f}dμ) = 0", "variation of the weighted scalar curvature along g + sh, f + sH/2", &["random_jet_seed h"], DEFAULT_TOLERANCE, 6, any, r1),
        c("CHK-R2", "□*V = −2|Rc + ∇∇f|²e^{−f}", "conjugate heat operator applied to (2Δf − |∇f|² + R)e^{−f}", &["random_jet_seed f"], DEFAULT_TOLERANCE, 6, is_steady_flow, r2),
        c("CHK-B1", "∂t e^f = Δe^f + Re^f", "e^f solves the linearized flow equation for u", &["exp_f u"], DEFAULT_TOLERANCE, 4, steady_flow_gradient_rule, b1),
        c("CHK-B2", "LQ = |∇∇v|² + ⟨Rc,∇∇v⟩ + Rc(∇(v−f),∇(v−f))", "Li–Yau–Hamilton quantity Q = Δv + R", &["random_jet_seed u"], DEFAULT_TOLERANCE, 6, is_steady_flow, b2),
        c("CHK-B3", "L(|∇v|² + R) = |Rc|² − |∇∇v|²", "evolution of |∇v|² + R", &["random_jet_seed u"], DEFAULT_TOLERANCE, 6, is_steady_flow, b3),
        c("CHK-B4", "LP = |∇∇v + Rc|² + 2Rc(∇(v−f),∇(v−f))", "Bochner formula for P = 2Δv + |∇v|² + 3R", &["random_jet_seed u"], DEFAULT_TOLERANCE, 6, is_steady_flow, b4),
        CheckSpec {
            min_points: 128,
            ..c("CHK-B5", "LP ≥ Q²/n where Rc > 0", "sampled consequence of the Bochner formula", &["random_jet_seed u"], DEFAULT_TOLERANCE, 6, is_cigar_flow_any, b5)
        },
        c("CHK-B6", "L_ε P_ε equals its Bochner right-hand side for ε ∈ {±2, ±1, ±1/2}", "interpolation ∂u/∂t = ε⁻¹Δu + Ru", &["random_jet_seed u"], DEFAULT_TOLERANCE, 6, is_steady_flow, b6),
        c("CHK-B7", "the two groupings of the Ricci terms agree", "algebraic rewrite of the interpolated Ricci terms", &["random_jet_seed v", "random_jet_seed f"], DEFAULT_TOLERANCE, 3, any, b7),
        c("CHK-B8", "(½(∂t + Δ) + ∇v·∇)(2Δv + |∇v|² − R) = −|Rc − ∇∇v|² = −|∇∇(f+v)|²", "ε = −1 endpoint of the interpolation", &["random_jet_seed u"], DEFAULT_TOLERANCE, 6, is_steady_flow, b8),
    ]
}

fn is_cigar_flow_any(s: &SolitonSpec) -> bool {
    is_cigar_flow(s) && is_steady_flow(s)
}

/// All registered checks in their stable order.
pub fn registry() -> &'static [CheckSpec] {
    static REGISTRY: std::sync::OnceLock<Vec<CheckSpec>> = std::sync::OnceLock::new();
    REGISTRY.get_or_init(registry_table)
}

pub fn check_by_id(id: &str) -> Result<&'static CheckSpec> {
    registry().iter().find(|c| c.id == id).ok_or_else(|| Error::UnknownCheck(id.into()))
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base) as f64 * inv;
        i /= base;
        inv /= base as f64;
    }
    out
}

const PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];
/// Coordinates closer than this to an axis are pushed off it.
const AXIS_GAP: f64 = 0.05;

/// Seeded quasi-random `(point, time)` samples in the soliton's box.
///
/// Halton points with a random Cranley–Patterson shift; coordinates within
/// [`AXIS_GAP`] of zero are moved away from the axis.
pub fn sample_points(spec: &SolitonSpec, seed: u64, n: usize) -> Vec<(Vec<f64>, f64)> {
    let b = &spec.sampling;
    let dims = spec.dim + 1;
    let mut rng = stream_rng(seed, 0, Stream::Sampling);
    let shift: Vec<f64> = (0..dims).map(|_| rng.gen::<f64>()).collect();
    (0..n)
        .map(|k| {
            let u: Vec<f64> =
                (0..dims).map(|d| (radical_inverse(k as u64 + 1, PRIMES[d]) + shift[d]).fract()).collect();
            let point = (0..spec.dim)
                .map(|d| {
                    let x = b.lo[d] + u[d] * (b.hi[d] - b.lo[d]);
                    if x.abs() < AXIS_GAP {
                        x + 2.0 * AXIS_GAP.copysign(x)
                    } else {
                        x
                    }
                })
                .collect();
            let (t0, t1) = b.time;
            (point, t0 + u[spec.dim] * (t1 - t0))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub check_id: String,
    pub soliton: String,
    pub seed: u64,
    pub n_points: usize,
    /// Worst relative residual at each sample.
    pub residuals: Vec<f64>,
    pub max_rel_residual: f64,
    pub median_rel_residual: f64,
    pub tolerance: f64,
    pub status: CheckStatus,
    pub millis: u64,
    /// Label of the identity with the largest residual.
    pub worst_identity: Option<String>,
    pub message: Option<String>,
}

impl CheckReport {
    fn skipped(check: &CheckSpec, spec: &SolitonSpec, seed: u64, tolerance: f64, why: String) -> Self {
        Self {
            check_id: check.id.into(),
            soliton: spec.name.clone(),
            seed,
            n_points: 0,
            residuals: Vec::new(),
            max_rel_residual: 0.0,
            median_rel_residual: 0.0,
            tolerance,
            status: CheckStatus::Skipped,
            millis: 0,
            worst_identity: None,
            message: Some(why),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub n_points: usize,
    pub order: usize,
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { seed: 42, n_points: DEFAULT_POINTS, order: DEFAULT_ORDER, tolerances: BTreeMap::new() }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.order > crate::jet::MAX_ORDER {
            return Err(Error::Config(format!("order {} exceeds {}", self.order, crate::jet::MAX_ORDER)));
        }
        if self.n_points == 0 {
            return Err(Error::Config("at least one sample point is needed".into()));
        }
        for (id, tol) in &self.tolerances {
            check_by_id(id)?;
            if !(*tol > 0.0 && *tol <= MAX_TOLERANCE) {
                return Err(Error::Config(format!("tolerance {tol} for {id} must lie in (0, {MAX_TOLERANCE}]")));
            }
        }
        Ok(())
    }

    pub fn tolerance_for(&self, check: &CheckSpec) -> f64 {
        self.tolerances.get(check.id).copied().unwrap_or(check.tolerance)
    }
}

fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Evaluate one check on one soliton. Inapplicable pairs give a skipped
/// report; an order below the check's requirement is a configuration error.
pub fn run_check(id: &str, spec: &SolitonSpec, config: &RunConfig) -> Result<CheckReport> {
    config.validate()?;
    let check = check_by_id(id)?;
    let tolerance = config.tolerance_for(check);
    if !check.applies_to(spec) {
        let why = format!("{} does not apply to {}", check.id, spec.name);
        return Ok(CheckReport::skipped(check, spec, config.seed, tolerance, why));
    }
    if config.order < check.min_order {
        return Err(Error::Config(format!(
            "{} needs jet order at least {}, got {}",
            check.id, check.min_order, config.order
        )));
    }
    let start = Instant::now();
    let n = config.n_points.max(check.min_points);
    let points = sample_points(spec, config.seed, n);
    let results: Vec<Result<Vec<Residual>>> = points
        .par_iter()
        .enumerate()
        .map(|(k, (p, t))| {
            let sample = Sample { spec, point: p.clone(), time: *t, seed: config.seed, index: k as u64, order: config.order };
            check.evaluate(&sample)
        })
        .collect();

    let mut residuals = Vec::with_capacity(n);
    let mut worst_identity: Option<(f64, String)> = None;
    let mut message = None;
    for r in results {
        match r {
            Ok(rs) => {
                let w = worst(&rs);
                residuals.push(w);
                for x in &rs {
                    let rel = x.relative();
                    if worst_identity.as_ref().map_or(true, |(m, _)| rel > *m) {
                        worst_identity = Some((rel, x.label.clone()));
                    }
                }
            }
            Err(Error::Config(e)) => return Err(Error::Config(e)),
            Err(e) => {
                residuals.push(f64::INFINITY);
                message.get_or_insert_with(|| e.to_string());
            }
        }
    }
    let max = residuals.iter().copied().fold(0.0, f64::max);
    let status = if max <= tolerance { CheckStatus::Pass } else { CheckStatus::Fail };
    Ok(CheckReport {
        check_id: check.id.into(),
        soliton: spec.name.clone(),
        seed: config.seed,
        n_points: n,
        median_rel_residual: median(&residuals),
        max_rel_residual: max,
        residuals,
        tolerance,
        status,
        millis: start.elapsed().as_millis() as u64,
        worst_identity: worst_identity.map(|(_, l)| l),
        message,
    })
}

/// Reports for a suite plus warnings (for example an empty selection).
#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub reports: Vec<CheckReport>,
    pub warnings: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(|r| r.status != CheckStatus::Fail)
    }

    pub fn counts(&self) -> (usize, usize, usize) {
        let count = |s| self.reports.iter().filter(|r| r.status == s).count();
        (count(CheckStatus::Pass), count(CheckStatus::Fail), count(CheckStatus::Skipped))
    }
}

fn matcher(pattern: &str) -> Result<GlobMatcher> {
    let pattern = if pattern.eq_ignore_ascii_case("all") { "*" } else { pattern };
    Ok(Glob::new(pattern).map_err(|e| Error::Config(format!("bad pattern `{pattern}`: {e}")))?.compile_matcher())
}

fn split_filter(filter: &str) -> Result<Vec<GlobMatcher>> {
    filter.split(',').map(str::trim).filter(|s| !s.is_empty()).map(matcher).collect()
}

/// Whether `name` matches a comma-separated list of globs (`all` is `*`).
pub fn filter_matches(filter: &str, name: &str) -> Result<bool> {
    Ok(split_filter(filter)?.iter().any(|m| m.is_match(name)))
}

/// Registered checks selected by a filter, in registry order.
pub fn select_checks(filter: &str) -> Result<Vec<&'static CheckSpec>> {
    let matchers = split_filter(filter)?;
    Ok(registry().iter().filter(|c| matchers.iter().any(|m| m.is_match(c.id))).collect())
}

/// Run every `(check, soliton)` pair matching the two glob filters over the
/// catalog (comma-separated alternatives allowed; `all` means everything).
pub fn run_suite(check_filter: &str, soliton_filter: &str, config: &RunConfig) -> Result<SuiteReport> {
    run_suite_on(check_filter, soliton_filter, &catalog(), config)
}

pub fn run_suite_on(
    check_filter: &str,
    soliton_filter: &str,
    solitons: &[SolitonSpec],
    config: &RunConfig,
) -> Result<SuiteReport> {
    config.validate()?;
    let chosen = select_checks(check_filter)?;
    let sols = split_filter(soliton_filter)?;
    let specs: Vec<&SolitonSpec> = solitons.iter().filter(|s| sols.iter().any(|m| m.is_match(&s.name))).collect();
    let mut warnings = Vec::new();
    if chosen.is_empty() {
        warnings.push(format!("no registered check matches `{check_filter}`"));
    }
    if specs.is_empty() {
        warnings.push(format!("no catalog soliton matches `{soliton_filter}`"));
    }
    let pairs: Vec<(&CheckSpec, &SolitonSpec)> =
        chosen.iter().flat_map(|c| specs.iter().map(move |s| (*c, *s))).collect();
    let reports = pairs.par_iter().map(|(c, s)| run_check(c.id, s, config)).collect::<Result<Vec<_>>>()?;
    if !reports.is_empty() && reports.iter().all(|r| r.status == CheckStatus::Skipped) {
        warnings.push("every selected pairing was skipped".into());
    }
    Ok(SuiteReport { reports, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solitons::catalog_get;

    fn cfg(seed: u64, n: usize) -> RunConfig {
        RunConfig { seed, n_points: n, ..RunConfig::default() }
    }

    #[test]
    fn registry_ids_are_unique_and_stable() {
        let ids: Vec<&str> = registry().iter().map(|c| c.id).collect();
        assert_eq!(ids.len(), 24);
        let mut sorted = ids.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), ids.len());
        assert_eq!(ids[0], "CHK-S1");
        assert!(registry().iter().all(|c| c.tolerance <= MAX_TOLERANCE));
    }

    #[test]
    fn halton_points_stay_in_box_and_off_axes() {
        let spec = catalog_get("cigar_flow").unwrap();
        let pts = sample_points(&spec, 5, 64);
        assert_eq!(pts, sample_points(&spec, 5, 64));
        assert_ne!(pts, sample_points(&spec, 6, 64));
        for (p, t) in &pts {
            for x in p {
                assert!(x.abs() >= AXIS_GAP && x.abs() <= 3.0 + 2.0 * AXIS_GAP);
            }
            assert!((-0.5..=0.5).contains(t));
        }
    }

    #[test]
    fn inapplicable_pair_is_skipped() {
        let spec = catalog_get("flat_steady_linear").unwrap();
        let r = run_check("CHK-L2", &spec, &cfg(1, 4)).unwrap();
        assert_eq!(r.status, CheckStatus::Skipped);
    }

    #[test]
    fn order_shortfall_is_a_config_error() {
        let spec = catalog_get("cigar_flow").unwrap();
        let config = RunConfig { order: 4, ..cfg(1, 2) };
        assert!(matches!(run_check("CHK-EQ1", &spec, &config), Err(Error::Config(_))));
    }

    #[test]
    fn tolerance_overrides_are_bounded() {
        let mut config = cfg(1, 2);
        config.tolerances.insert("CHK-S1".into(), 1e-3);
        assert!(config.validate().is_err());
        config.tolerances.insert("CHK-S1".into(), 1e-7);
        assert!(config.validate().is_ok());
        config.tolerances.insert("CHK-NOPE".into(), 1e-7);
        assert!(matches!(config.validate(), Err(Error::UnknownCheck(_))));
    }

    #[test]
    fn h4_on_cigar_static() {
        let spec = catalog_get("cigar_static").unwrap();
        let r = run_check("CHK-H4", &spec, &cfg(3, 8)).unwrap();
        assert_eq!(r.status, CheckStatus::Pass, "{r:?}");
        assert!(r.max_rel_residual <= 1e-9);
    }

    #[test]
    fn empty_selection_warns() {
        let s = run_suite("CHK-NOTHING", "all", &cfg(1, 2)).unwrap();
        assert!(s.reports.is_empty());
        assert!(!s.warnings.is_empty());
        assert!(s.passed());
    }
}
