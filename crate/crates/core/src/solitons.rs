//! Catalog of explicit gradient Ricci solitons and flat flows.
//!
//! Every entry is a closed-form chart written in jet arithmetic, so space
//! and time derivatives of the metric and potential are exact.

use std::f64::consts::TAU;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::geometry::{validate_metric, CurvaturePack};
use crate::jet::{seed_variables, Jet, JetSpace, VarRole};
use crate::residual::Residual;
use crate::rng::{stream_rng, Stream};
use crate::tensor::{Down, Tensor};
use crate::trig::TrigPolynomial;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolitonClass {
    Steady,
    Shrinking,
    /// Not a soliton; only used by the grid and by purely algebraic checks.
    PlainFlow,
}

/// The evolution the potential obeys along the flow.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialRule {
    /// `∂f/∂t = Δf`
    Laplacian,
    /// `∂f/∂t = |∇f|²`
    GradientSquared,
    /// No time dependence is modelled.
    Static,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Chart {
    /// `4δ/(1 + r²)`
    CigarStatic,
    /// `4δ/(eᵗ + r²)`
    CigarFlow,
    Flat,
    /// `−2(n−1)t · 4δ/(1 + r²)²` (stereographic round sphere, n = 2)
    ShrinkingSphere,
    /// `δ + P` with `P_xx, P_xy, P_yy` trigonometric polynomials.
    PerturbedTorus(Box<[TrigPolynomial; 3]>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Potential {
    /// `−log(eᵗ + r²)`, plus `t` when `time_shift` is set.
    CigarLog { time_shift: bool, static_chart: bool },
    /// `a·x + |a|² t`
    Linear(Vec<f64>),
    /// `|x|²/(−4t) − n/2`
    Gaussian,
    Zero,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SamplingBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub time: (f64, f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolitonSpec {
    pub name: String,
    pub dim: usize,
    pub class: SolitonClass,
    pub rule: PotentialRule,
    pub chart: Chart,
    pub potential: Potential,
    /// The metric itself solves `∂g/∂t = −2Rc` in this chart.
    pub is_flow: bool,
    /// `R + |∇f|² = 1` and `R = −Δf` hold.
    pub normalized: bool,
    /// Open interval of admissible times.
    pub time_interval: (f64, f64),
    pub sampling: SamplingBox,
}

pub const CATALOG_NAMES: [&str; 8] = [
    "cigar_static",
    "cigar_flow",
    "cigar_flow_v2",
    "flat_steady_linear",
    "gaussian_shrinker",
    "sphere_shrinker",
    "flat_torus",
    "torus_generic",
];

/// Default amplitude and seed of the `torus_generic` metric perturbation.
pub const TORUS_PERTURBATION_AMPLITUDE: f64 = 0.05;
pub const TORUS_PERTURBATION_SEED: u64 = 2;

fn square_box(dim: usize, half: f64, time: (f64, f64)) -> SamplingBox {
    SamplingBox { lo: vec![-half; dim], hi: vec![half; dim], time }
}

/// Seeded metric perturbation `P_xx, P_xy, P_yy` (bandlimit 2).
pub fn torus_perturbation(amplitude: f64, seed: u64) -> [TrigPolynomial; 3] {
    let mut rng = stream_rng(seed, 0, Stream::Metric);
    [
        TrigPolynomial::random(&mut rng, 2, 3, amplitude),
        TrigPolynomial::random(&mut rng, 2, 3, amplitude * 0.5),
        TrigPolynomial::random(&mut rng, 2, 3, amplitude),
    ]
}

/// Look up a catalog entry by its exact name.
pub fn catalog_get(name: &str) -> Result<SolitonSpec> {
    let spec = match name {
        "cigar_static" => SolitonSpec {
            name: name.into(),
            dim: 2,
            class: SolitonClass::Steady,
            rule: PotentialRule::Static,
            chart: Chart::CigarStatic,
            potential: Potential::CigarLog { time_shift: false, static_chart: true },
            is_flow: false,
            normalized: true,
            time_interval: (f64::NEG_INFINITY, f64::INFINITY),
            sampling: square_box(2, 3.0, (0.0, 0.0)),
        },
        "cigar_flow" | "cigar_flow_v2" => {
            let v2 = name == "cigar_flow_v2";
            SolitonSpec {
                name: name.into(),
                dim: 2,
                class: SolitonClass::Steady,
                rule: if v2 { PotentialRule::GradientSquared } else { PotentialRule::Laplacian },
                chart: Chart::CigarFlow,
                potential: Potential::CigarLog { time_shift: v2, static_chart: false },
                is_flow: true,
                normalized: true,
                time_interval: (f64::NEG_INFINITY, f64::INFINITY),
                sampling: square_box(2, 3.0, (-0.5, 0.5)),
            }
        }
        "flat_steady_linear" => SolitonSpec::flat_steady_linear(vec![0.6, 0.8]),
        "gaussian_shrinker" => SolitonSpec::gaussian_shrinker(2),
        "sphere_shrinker" => SolitonSpec {
            name: name.into(),
            dim: 2,
            class: SolitonClass::Shrinking,
            rule: PotentialRule::GradientSquared,
            chart: Chart::ShrinkingSphere,
            potential: Potential::Zero,
            is_flow: true,
            normalized: false,
            time_interval: (f64::NEG_INFINITY, 0.0),
            sampling: square_box(2, 2.0, (-2.0, -0.5)),
        },
        "flat_torus" => SolitonSpec {
            name: name.into(),
            dim: 2,
            class: SolitonClass::Steady,
            rule: PotentialRule::GradientSquared,
            chart: Chart::Flat,
            potential: Potential::Zero,
            is_flow: true,
            normalized: false,
            time_interval: (f64::NEG_INFINITY, f64::INFINITY),
            sampling: SamplingBox { lo: vec![0.0; 2], hi: vec![TAU; 2], time: (0.0, 1.0) },
        },
        "torus_generic" => SolitonSpec {
            name: name.into(),
            dim: 2,
            class: SolitonClass::PlainFlow,
            rule: PotentialRule::Static,
            chart: Chart::PerturbedTorus(Box::new(torus_perturbation(
                TORUS_PERTURBATION_AMPLITUDE,
                TORUS_PERTURBATION_SEED,
            ))),
            potential: Potential::Zero,
            is_flow: false,
            normalized: false,
            time_interval: (f64::NEG_INFINITY, f64::INFINITY),
            sampling: SamplingBox { lo: vec![0.0; 2], hi: vec![TAU; 2], time: (0.0, 0.0) },
        },
        _ => {
            return Err(Error::UnknownSoliton {
                name: name.into(),
                valid: CATALOG_NAMES.iter().map(|s| s.to_string()).collect(),
            })
        }
    };
    Ok(spec)
}

/// Every catalog entry, in catalog order.
pub fn catalog() -> Vec<SolitonSpec> {
    CATALOG_NAMES.iter().map(|n| catalog_get(n).expect("catalog names resolve")).collect()
}

/// Jet space, base point and base time for one evaluation.
#[derive(Clone, Debug)]
pub struct Frame {
    pub space: Arc<JetSpace>,
    pub point: Vec<f64>,
    pub time: f64,
}

impl Frame {
    pub fn new(space: Arc<JetSpace>, point: Vec<f64>, time: f64) -> Self {
        Self { space, point, time }
    }

    pub fn coords(&self) -> Result<Vec<Jet>> {
        seed_variables(&self.point, &self.space)
    }

    /// `t` as a jet variable when the space has one, otherwise a constant.
    pub fn time_jet(&self) -> Jet {
        match self.space.var_of(VarRole::Time) {
            Some(v) => Jet::variable(&self.space, v, self.time).expect("variable exists"),
            None => Jet::constant(&self.space, self.time),
        }
    }

    /// The deformation parameter `s`, expanded at `s = 0`.
    pub fn deform_jet(&self) -> Result<Jet> {
        let v = self
            .space
            .var_of(VarRole::Deform)
            .ok_or_else(|| Error::Config("jet space has no deformation variable".into()))?;
        Jet::variable(&self.space, v, 0.0)
    }

    pub fn has_time(&self) -> bool {
        self.space.var_of(VarRole::Time).is_some()
    }

    pub fn constant(&self, c: f64) -> Jet {
        Jet::constant(&self.space, c)
    }
}

fn radius_squared(x: &[Jet]) -> Jet {
    let mut acc = Jet::zero(x[0].space());
    for xi in x {
        acc += &(xi * xi);
    }
    acc
}

fn diagonal(dim: usize, factor: &Jet) -> Tensor<Jet> {
    let zero = factor.zero_like();
    Tensor::from_fn(dim, &[Down, Down], |ij| if ij[0] == ij[1] { factor.clone() } else { zero.clone() })
}

impl SolitonSpec {
    pub fn flat_steady_linear(a: Vec<f64>) -> Self {
        let dim = a.len();
        let norm2: f64 = a.iter().map(|x| x * x).sum();
        SolitonSpec {
            name: "flat_steady_linear".into(),
            dim,
            class: SolitonClass::Steady,
            rule: PotentialRule::GradientSquared,
            chart: Chart::Flat,
            potential: Potential::Linear(a),
            is_flow: true,
            normalized: (norm2 - 1.0).abs() < 1e-12,
            time_interval: (f64::NEG_INFINITY, f64::INFINITY),
            sampling: square_box(dim, 2.0, (0.0, 1.0)),
        }
    }

    pub fn gaussian_shrinker(dim: usize) -> Self {
        SolitonSpec {
            name: "gaussian_shrinker".into(),
            dim,
            class: SolitonClass::Shrinking,
            rule: PotentialRule::GradientSquared,
            chart: Chart::Flat,
            potential: Potential::Gaussian,
            is_flow: true,
            normalized: false,
            time_interval: (f64::NEG_INFINITY, 0.0),
            sampling: square_box(dim, 2.0, (-2.0, -0.5)),
        }
    }

    pub fn is_soliton(&self) -> bool {
        self.class != SolitonClass::PlainFlow
    }

    /// Whether anything in the chart or potential depends on time.
    pub fn time_dependent(&self) -> bool {
        matches!(self.chart, Chart::CigarFlow | Chart::ShrinkingSphere)
            || matches!(
                self.potential,
                Potential::CigarLog { static_chart: false, .. } | Potential::Linear(_) | Potential::Gaussian
            )
    }

    /// `λ` in `Rc + ∇∇f = λ g`.
    pub fn soliton_constant(&self, t: f64) -> f64 {
        match self.class {
            SolitonClass::Shrinking => -1.0 / (2.0 * t),
            _ => 0.0,
        }
    }

    pub fn check_domain(&self, point: &[f64], t: f64) -> Result<()> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: point.len() });
        }
        let (lo, hi) = self.time_interval;
        if !(t > lo && t < hi) {
            return Err(Error::Domain(format!("t = {t} outside ({lo}, {hi}) for {}", self.name)));
        }
        if point.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("non-finite coordinate".into()));
        }
        Ok(())
    }

    /// Jet space with this chart's spatial dimension.
    pub fn jet_space(&self, time: bool, deform: bool, order: usize) -> Result<Arc<JetSpace>> {
        JetSpace::with_roles(self.dim, time, deform, order)
    }

    pub fn frame(&self, space: Arc<JetSpace>, point: &[f64], t: f64) -> Result<Frame> {
        self.check_domain(point, t)?;
        if space.space_dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: space.space_dim() });
        }
        Ok(Frame::new(space, point.to_vec(), t))
    }

    /// Metric components `g_ij`, validated at the base point.
    pub fn metric_at(&self, frame: &Frame) -> Result<Tensor<Jet>> {
        self.check_domain(&frame.point, frame.time)?;
        let x = frame.coords()?;
        let t = frame.time_jet();
        let n = self.dim;
        let g = match &self.chart {
            Chart::CigarStatic => diagonal(n, &frame.constant(4.0).div(&(radius_squared(&x) + 1.0))?),
            Chart::CigarFlow => diagonal(n, &frame.constant(4.0).div(&(radius_squared(&x) + t.exp()))?),
            Chart::Flat => diagonal(n, &frame.constant(1.0)),
            Chart::ShrinkingSphere => {
                let d = radius_squared(&x) + 1.0;
                let unit = frame.constant(4.0).div(&(&d * &d))?;
                diagonal(n, &(&unit * &t.scale(-2.0 * (n as f64 - 1.0))))
            }
            Chart::PerturbedTorus(p) => {
                let pxx = p[0].eval_jet(&x[0], &x[1]) + 1.0;
                let pxy = p[1].eval_jet(&x[0], &x[1]);
                let pyy = p[2].eval_jet(&x[0], &x[1]) + 1.0;
                Tensor::from_components(2, &[Down, Down], vec![pxx, pxy.clone(), pxy, pyy])?
            }
        };
        validate_metric(&g)?;
        Ok(g)
    }

    pub fn potential_at(&self, frame: &Frame) -> Result<Jet> {
        self.check_domain(&frame.point, frame.time)?;
        let x = frame.coords()?;
        let t = frame.time_jet();
        Ok(match &self.potential {
            Potential::CigarLog { time_shift, static_chart } => {
                let base = if *static_chart { frame.constant(1.0) } else { t.exp() };
                let f = -(radius_squared(&x) + base).ln()?;
                if *time_shift {
                    f + t
                } else {
                    f
                }
            }
            Potential::Linear(a) => {
                let norm2: f64 = a.iter().map(|v| v * v).sum();
                let mut f = t.scale(norm2);
                for (ai, xi) in a.iter().zip(&x) {
                    f += &xi.scale(*ai);
                }
                f
            }
            Potential::Gaussian => {
                let r2 = radius_squared(&x);
                r2.div(&t.scale(-4.0))? - self.dim as f64 / 2.0
            }
            Potential::Zero => frame.constant(0.0),
        })
    }

    /// A potential solving `∂f/∂t = −Δf + |∇f|² − R` on this flow, when the
    /// soliton has one in closed form.
    pub fn conjugate_potential_at(&self, frame: &Frame) -> Option<Result<Jet>> {
        if self.class != SolitonClass::Steady || !self.is_flow {
            return None;
        }
        match &self.potential {
            Potential::CigarLog { static_chart: false, .. } => {
                let shifted = SolitonSpec {
                    potential: Potential::CigarLog { time_shift: true, static_chart: false },
                    ..self.clone()
                };
                Some(shifted.potential_at(frame))
            }
            Potential::Linear(_) if self.normalized => Some(self.potential_at(frame)),
            Potential::Zero if matches!(self.chart, Chart::Flat) => Some(self.potential_at(frame)),
            _ => None,
        }
    }

    pub fn curvature_at(&self, frame: &Frame) -> Result<CurvaturePack<Jet>> {
        CurvaturePack::from_metric(self.metric_at(frame)?)
    }
}

/// Soliton equation residuals at `(p, t)`: `Rc + ∇∇f − λg`, and along a
/// flow chart also `∂g/∂t + 2Rc` and the potential's time rule.
pub fn soliton_residual(spec: &SolitonSpec, point: &[f64], t: f64, order: usize) -> Result<Vec<Residual>> {
    if !spec.is_soliton() {
        return Err(Error::NotApplicable(format!("{} is not a soliton", spec.name)));
    }
    let space = spec.jet_space(spec.is_flow, false, order)?;
    let frame = spec.frame(space, point, t)?;
    let pack = spec.curvature_at(&frame)?;
    let f = spec.potential_at(&frame)?;
    let hess = pack.hessian(&f)?;

    let mut out = Vec::new();
    let lambda_g = pack.metric.scale(-spec.soliton_constant(t));
    out.push(Residual::tensors("Rc + Hess f - lambda g", &[&pack.ricci, &hess, &lambda_g])?);

    if spec.is_flow {
        let dg = pack.metric.try_map(|c| c.partial_role(VarRole::Time))?;
        out.push(Residual::tensors("dg/dt + 2Rc", &[&dg, &pack.ricci.scale(2.0)])?);
        let ft = f.partial_role(VarRole::Time)?;
        match spec.rule {
            PotentialRule::Laplacian => {
                out.push(Residual::jets("df/dt - lap f", &[&ft, &-pack.laplacian(&f)?])?);
            }
            PotentialRule::GradientSquared => {
                let df = pack.differential(&f)?;
                let grad2 = pack.norm_squared(&df)?;
                out.push(Residual::jets("df/dt - |grad f|^2", &[&ft, &-grad2])?);
                if spec.class == SolitonClass::Shrinking {
                    let lap = pack.laplacian(&f)?;
                    let f_over_t = f.div(&frame.time_jet())?;
                    out.push(Residual::jets("df/dt - lap f + f/t", &[&ft, &-lap, &f_over_t])?);
                }
            }
            PotentialRule::Static => {}
        }
    }
    Ok(out)
}

/// `ΔR + 2|Rc|² = ⟨∇R,∇f⟩` (steady) or `½ΔR + |Rc|² = ½⟨∇R,∇f⟩ − R/(2t)`
/// (shrinking), and `2R_ij∇^j f = ∇_i R`.
pub fn steady_identities(spec: &SolitonSpec, frame: &Frame) -> Result<Vec<Residual>> {
    if !spec.is_soliton() {
        return Err(Error::NotApplicable(format!("{} is not a soliton", spec.name)));
    }
    let pack = spec.curvature_at(frame)?;
    let f = spec.potential_at(frame)?;
    let r = &pack.scalar;
    let lap_r = pack.laplacian(r)?;
    let ric2 = pack.norm_squared(&pack.ricci)?;
    let dr = pack.differential(r)?;
    let df = pack.differential(&f)?;
    let dr_df = pack.inner(&dr, &df)?;
    let first = match spec.class {
        SolitonClass::Steady => Residual::jets("lap R + 2|Rc|^2 - <grad R, grad f>", &[&lap_r, &ric2.scale(2.0), &-dr_df])?,
        _ => {
            let r_over_2t = r.div(&frame.time_jet().scale(2.0))?;
            Residual::jets(
                "lap R/2 + |Rc|^2 - <grad R, grad f>/2 + R/2t",
                &[&lap_r.scale(0.5), &ric2, &dr_df.scale(-0.5), &r_over_2t],
            )?
        }
    };
    let grad_f = pack.raise(&df, 0)?;
    let n = pack.dim();
    let ric_grad = Tensor::from_fn(n, &[Down], |i| {
        let mut acc = r.zero_like();
        for j in 0..n {
            acc.add_product(pack.ricci.get(&[i[0], j]), grad_f.get(&[j]));
        }
        acc.scale(2.0)
    });
    // ∇_i R = g^{jk}∇_i R_jk, split into its coordinate and connection pieces
    // so that a constant R is measured against nonzero terms
    let mut terms = vec![ric_grad];
    for part in pack.covariant_derivative_parts(&pack.ricci)? {
        terms.push(pack.contract(&part, 1, 2)?.scale(-1.0));
    }
    let refs: Vec<&Tensor<Jet>> = terms.iter().collect();
    let second = Residual::tensors("2 Rc(grad f) - grad R", &refs)?;
    Ok(vec![first, second])
}

/// `R + |∇f|² = 1` and `R = −Δf`.
pub fn normalization_identities(spec: &SolitonSpec, frame: &Frame) -> Result<Vec<Residual>> {
    if spec.class != SolitonClass::Steady || !spec.normalized {
        return Err(Error::NotApplicable(format!("{} is not a normalized steady soliton", spec.name)));
    }
    let pack = spec.curvature_at(frame)?;
    let f = spec.potential_at(frame)?;
    let grad2 = pack.norm_squared(&pack.differential(&f)?)?;
    let lap = pack.laplacian(&f)?;
    let r = &pack.scalar;
    Ok(vec![
        Residual::jets("R + |grad f|^2 - 1", &[r, &grad2, &frame.constant(-1.0)])?,
        Residual::jets("R + lap f", &[r, &lap])?,
    ])
}

/// All structural identities applicable to the soliton's class.
pub fn structural_identities(spec: &SolitonSpec, point: &[f64], t: f64, order: usize) -> Result<Vec<Residual>> {
    let space = spec.jet_space(false, false, order)?;
    let frame = spec.frame(space, point, t)?;
    let mut out = steady_identities(spec, &frame)?;
    match normalization_identities(spec, &frame) {
        Ok(r) => out.extend(r),
        Err(Error::NotApplicable(_)) => {}
        Err(e) => return Err(e),
    }
    Ok(out)
}
