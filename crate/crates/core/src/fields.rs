//! Perturbations `h`, vector fields `X` and scalar fields `u`, plus jet
//! propagation that fills time-derivative coefficients from an evolution
//! equation.
//!
//! Propagation works degree by degree in time: the coefficient of
//! `(x − p)^α (t − t₀)^r` equals `1/r` times the coefficient of
//! `(x − p)^α (t − t₀)^{r−1}` in the right-hand side, which is already exact
//! because it only involves coefficients of lower time degree.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::geometry::CurvaturePack;
use crate::jet::{Jet, JetSpace, Precision, VarRole};
use crate::rng::{stream_rng, Stream};
use crate::solitons::{Frame, PotentialRule};
use crate::tensor::{Down, Tensor, Up};
use crate::trig::TrigPolynomial;

/// Default spatial order of seeded jets.
pub const DEFAULT_SPATIAL_ORDER: usize = 5;
/// Default number of propagated time orders.
pub const DEFAULT_TIME_ORDER: usize = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    Ricci,
    Metric,
    ExplicitClosedForm,
    RandomJetSeed,
}

impl std::str::FromStr for PerturbationKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ricci" => Ok(Self::Ricci),
            "metric" => Ok(Self::Metric),
            "explicit_closed_form" => Ok(Self::ExplicitClosedForm),
            "random_jet_seed" => Ok(Self::RandomJetSeed),
            _ => Err(Error::Config(format!("unknown perturbation kind `{s}`"))),
        }
    }
}

/// Generator for a symmetric 2-tensor `h`.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationField {
    pub kind: PerturbationKind,
    pub seed: u64,
    pub spatial_order: usize,
}

pub fn make_perturbation(kind: PerturbationKind, seed: u64) -> PerturbationField {
    PerturbationField { kind, seed, spatial_order: DEFAULT_SPATIAL_ORDER }
}

/// Draw a jet whose purely spatial coefficients of degree `≤ order` are
/// uniform in `(−1, 1)`; time-dependent coefficients are left for
/// propagation.
pub fn random_spatial_jet(space: &std::sync::Arc<JetSpace>, order: usize, rng: &mut impl Rng) -> Result<Jet> {
    if order > space.order() {
        return Err(Error::InsufficientOrder(format!(
            "seed order {order} exceeds jet order {}",
            space.order()
        )));
    }
    let spatial: Vec<bool> = space.roles().iter().map(|r| matches!(r, VarRole::Space(_))).collect();
    let coeffs = space
        .multi_indices()
        .iter()
        .map(|alpha| {
            let deg: usize = alpha.iter().map(|&a| a as usize).sum();
            let pure = alpha.iter().zip(&spatial).all(|(&a, &s)| s || a == 0);
            if pure && deg <= order {
                rng.gen_range(-1.0..1.0)
            } else {
                0.0
            }
        })
        .collect();
    Jet::from_coeffs(space, coeffs, Precision::new(order as i32, 0))
}

fn symmetric_from(dim: usize, mut f: impl FnMut(usize, usize) -> Result<Jet>) -> Result<Tensor<Jet>> {
    let mut upper = Vec::new();
    for i in 0..dim {
        for j in i..dim {
            upper.push(((i, j), f(i, j)?));
        }
    }
    let lookup = |i: usize, j: usize| {
        let key = (i.min(j), i.max(j));
        upper.iter().find(|(k, _)| *k == key).map(|(_, v)| v.clone()).expect("all pairs filled")
    };
    Ok(Tensor::from_fn(dim, &[Down, Down], |ij| lookup(ij[0], ij[1])))
}

impl PerturbationField {
    /// Evaluate `h` at a frame. `point_index` keys the per-point random stream.
    pub fn evaluate(&self, pack: &CurvaturePack<Jet>, frame: &Frame, point_index: u64) -> Result<Tensor<Jet>> {
        let n = pack.dim();
        match self.kind {
            PerturbationKind::Ricci => Ok(pack.ricci.clone()),
            PerturbationKind::Metric => Ok(pack.metric.clone()),
            PerturbationKind::ExplicitClosedForm => {
                let x = frame.coords()?;
                let mut rng = stream_rng(self.seed, 0, Stream::Perturbation);
                symmetric_from(n, |_, _| {
                    let p = TrigPolynomial::random(&mut rng, 2, 3, 1.0);
                    let y = if n > 1 { &x[1] } else { &x[0] };
                    let mut v = p.eval_jet(&x[0], y);
                    for xk in x.iter().skip(2) {
                        v = &v * &xk.cos();
                    }
                    Ok(v)
                })
            }
            PerturbationKind::RandomJetSeed => {
                let mut rng = stream_rng(self.seed, point_index, Stream::Perturbation);
                symmetric_from(n, |_, _| random_spatial_jet(&frame.space, self.spatial_order, &mut rng))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorFieldKind {
    NegGradF,
    ExplicitClosedForm,
    RandomPolynomial,
}

/// Generator for a time-dependent vector field `X^i`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorFieldSpec {
    pub kind: VectorFieldKind,
    pub seed: u64,
}

impl VectorFieldSpec {
    pub fn new(kind: VectorFieldKind, seed: u64) -> Self {
        Self { kind, seed }
    }

    /// `X` as a contravariant tensor; `f` is needed for `NegGradF`.
    pub fn evaluate(
        &self,
        pack: &CurvaturePack<Jet>,
        frame: &Frame,
        f: Option<&Jet>,
        point_index: u64,
    ) -> Result<Tensor<Jet>> {
        let n = pack.dim();
        let x = frame.coords()?;
        let t = frame.time_jet();
        match self.kind {
            VectorFieldKind::NegGradF => {
                let f = f.ok_or_else(|| Error::Config("-grad f needs a potential".into()))?;
                Ok(pack.gradient(f)?.scale(-1.0))
            }
            VectorFieldKind::ExplicitClosedForm => Tensor::try_from_fn(n, &[Up], |i| {
                let i = i[0];
                let next = &x[(i + 1) % n];
                Ok(next.sin() + &(&x[i] * &t).scale(0.5) - &(&t * &t).scale(0.25))
            }),
            VectorFieldKind::RandomPolynomial => {
                let mut rng = stream_rng(self.seed, point_index, Stream::VectorField);
                let local: Vec<Jet> = x.iter().zip(&frame.point).map(|(xi, p)| xi - *p).collect();
                let tau = &t - frame.time;
                Tensor::try_from_fn(n, &[Up], |_| {
                    let mut u = |r: f64| rng.gen_range(-r..r);
                    let mut acc = frame.constant(u(1.0));
                    for a in 0..n {
                        acc += &local[a].scale(u(1.0));
                        for b in a..n {
                            acc += &(&local[a] * &local[b]).scale(u(1.0));
                        }
                    }
                    let mut lin = frame.constant(u(1.0));
                    for xa in &local {
                        lin += &xa.scale(u(1.0));
                    }
                    acc += &(&tau * &lin);
                    let mut arg = tau.scale(u(2.0)) + u(std::f64::consts::PI);
                    for xa in &local {
                        arg += &xa.scale(u(2.0));
                    }
                    acc += &arg.sin().scale(u(1.0));
                    Ok(acc)
                })
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarFieldKind {
    /// `u = e^f`
    ExpF,
    /// Fixed positive closed form `2 + sin x cos y`.
    ClosedForm,
    /// Seeded spatial jet with positive value at the base point.
    RandomJetSeed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarFieldSpec {
    pub kind: ScalarFieldKind,
    pub seed: u64,
    pub positive: bool,
    pub spatial_order: usize,
}

impl ScalarFieldSpec {
    pub fn new(kind: ScalarFieldKind, seed: u64, positive: bool) -> Self {
        Self { kind, seed, positive, spatial_order: DEFAULT_SPATIAL_ORDER }
    }

    pub fn evaluate(&self, frame: &Frame, f: Option<&Jet>, point_index: u64) -> Result<Jet> {
        let u = match self.kind {
            ScalarFieldKind::ExpF => f.ok_or_else(|| Error::Config("e^f needs a potential".into()))?.exp(),
            ScalarFieldKind::ClosedForm => {
                let x = frame.coords()?;
                let y = x.get(1).unwrap_or(&x[0]);
                (&x[0].sin() * &y.cos()) + 2.0
            }
            ScalarFieldKind::RandomJetSeed => {
                let mut rng = stream_rng(self.seed, point_index, Stream::Scalar);
                let mut u = random_spatial_jet(&frame.space, self.spatial_order, &mut rng)?;
                if self.positive {
                    u.coeffs_mut()[0] = rng.gen_range(1.5..2.5);
                }
                u
            }
        };
        if self.positive && !(u.coeffs()[0] > 0.0) {
            return Err(Error::Positivity(format!("u = {} at the base point", u.coeffs()[0])));
        }
        Ok(u)
    }
}

/// Evolution equations available for propagation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Evolution {
    /// `∂h/∂t = Δ_L h`
    Lichnerowicz,
    /// `∂u/∂t = ε⁻¹Δu + Ru`
    ScalarHeat { eps: f64 },
    /// `∂f/∂t = −Δf + |∇f|² − R`
    ConjugatePotential,
    /// The catalog potential's own rule.
    PotentialRule(PotentialRule),
}

/// Fill time-degree `1..=time_order` coefficients of `comps` so they satisfy
/// `∂_t comps = rhs(comps)` through weighted order `spatial_order`.
pub fn propagate_components(
    mut comps: Vec<Jet>,
    spatial_order: usize,
    time_order: usize,
    rhs: impl Fn(&[Jet]) -> Result<Vec<Jet>>,
) -> Result<Vec<Jet>> {
    let Some(first) = comps.first() else { return Ok(comps) };
    let space = first.space().clone();
    let tvar = space
        .var_of(VarRole::Time)
        .ok_or_else(|| Error::Config("propagation needs a time variable in the jet space".into()))?;
    if spatial_order > space.order() || 2 * time_order > spatial_order {
        return Err(Error::InsufficientOrder(format!(
            "spatial order {spatial_order} and time order {time_order} do not fit jet order {}",
            space.order()
        )));
    }
    for r in 1..=time_order {
        let rate = rhs(&comps)?;
        for (c, d) in comps.iter_mut().zip(&rate) {
            for i in 0..space.len() {
                if space.time_degree(i) as usize != r || space.weighted_degree(i) as usize > spatial_order {
                    continue;
                }
                let mut alpha = space.multi_indices()[i];
                alpha[tvar] -= 1;
                let lower = space.index_of(&alpha[..space.num_vars()]).expect("lower index exists");
                if !d.precision().covers(space.weighted_degree(lower), space.time_degree(lower)) {
                    return Err(Error::InsufficientOrder(format!(
                        "evolution right-hand side has precision {:?}, need weighted degree {}",
                        d.precision(),
                        space.weighted_degree(lower)
                    )));
                }
                c.coeffs_mut()[i] = d.coeffs()[lower] / r as f64;
            }
            c.set_precision(Precision::new(spatial_order as i32, r as i32));
        }
    }
    Ok(comps)
}

/// Propagate a symmetric 2-tensor under `∂h/∂t = Δ_L h`.
pub fn propagate_lichnerowicz(
    h: Tensor<Jet>,
    pack: &CurvaturePack<Jet>,
    spatial_order: usize,
    time_order: usize,
) -> Result<Tensor<Jet>> {
    let (dim, slots) = (h.dim(), h.slots().to_vec());
    let comps = propagate_components(h.comps().to_vec(), spatial_order, time_order, |c| {
        let t = Tensor::from_components(dim, &slots, c.to_vec())?;
        Ok(pack.lichnerowicz(&t)?.comps().to_vec())
    })?;
    Tensor::from_components(dim, &slots, comps)
}

/// Right-hand side of a scalar evolution.
pub fn scalar_rate(evolution: Evolution, u: &Jet, pack: &CurvaturePack<Jet>) -> Result<Jet> {
    match evolution {
        Evolution::ScalarHeat { eps } => {
            if eps == 0.0 {
                return Err(Error::Config("epsilon must be nonzero".into()));
            }
            Ok(pack.laplacian(u)?.scale(1.0 / eps) + &(u * &pack.scalar))
        }
        Evolution::ConjugatePotential => {
            let grad2 = pack.norm_squared(&pack.differential(u)?)?;
            Ok(grad2 - pack.laplacian(u)? - &pack.scalar)
        }
        Evolution::PotentialRule(PotentialRule::Laplacian) => pack.laplacian(u),
        Evolution::PotentialRule(PotentialRule::GradientSquared) => pack.norm_squared(&pack.differential(u)?),
        Evolution::PotentialRule(PotentialRule::Static) => Ok(u.zero_like()),
        Evolution::Lichnerowicz => Err(Error::Config("Lichnerowicz flow acts on 2-tensors".into())),
    }
}

/// Propagate a scalar field under one of the scalar evolutions.
pub fn propagate_scalar(
    u: Jet,
    evolution: Evolution,
    pack: &CurvaturePack<Jet>,
    spatial_order: usize,
    time_order: usize,
) -> Result<Jet> {
    let out = propagate_components(vec![u], spatial_order, time_order, |c| Ok(vec![scalar_rate(evolution, &c[0], pack)?]))?;
    Ok(out.into_iter().next().expect("one component"))
}

/// Either kind of propagated field.
#[derive(Clone, Debug)]
pub enum FieldValue {
    Scalar(Jet),
    Tensor(Tensor<Jet>),
}

/// Dispatch on the evolution kind.
pub fn propagate_evolution_jet(
    field: FieldValue,
    evolution: Evolution,
    pack: &CurvaturePack<Jet>,
    spatial_order: usize,
    time_order: usize,
) -> Result<FieldValue> {
    match (field, evolution) {
        (FieldValue::Tensor(h), Evolution::Lichnerowicz) => {
            Ok(FieldValue::Tensor(propagate_lichnerowicz(h, pack, spatial_order, time_order)?))
        }
        (FieldValue::Scalar(u), ev) if ev != Evolution::Lichnerowicz => {
            Ok(FieldValue::Scalar(propagate_scalar(u, ev, pack, spatial_order, time_order)?))
        }
        _ => Err(Error::Config("field kind does not match the evolution".into())),
    }
}

/// `H = g^{ij} h_ij`.
pub fn trace_of(h: &Tensor<Jet>, pack: &CurvaturePack<Jet>) -> Jet {
    crate::geometry::trace(h, &pack.inverse)
}
