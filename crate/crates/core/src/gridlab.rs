//! Finite-difference cross-check on the periodic torus `[0, 2π)²`.
//!
//! Fields live on an `N × N` grid. Spatial derivatives are fourth-order
//! central differences; time stepping is classical RK4. The geometry and
//! Harnack formulas are the same generic code used by the jet pathway,
//! instantiated with [`GridField`].
//!
//! The evolution uses the compact five-point second-derivative stencil for
//! the diagonal second derivatives, while identities are evaluated with
//! composed first-derivative stencils. Both are fourth order, so an exact
//! continuum identity leaves an `O(dx⁴)` residual whose decay rate can be
//! measured.

use std::collections::VecDeque;
use std::f64::consts::TAU;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::geometry::{validate_metric, CurvaturePack};
use crate::harnack;
use crate::rng::{stream_rng, Stream};
use crate::solitons::torus_perturbation;
use crate::tensor::{Down, Tensor, Up};
use crate::trig::TrigPolynomial;

pub const MIN_RESOLUTION: usize = 16;
pub const DEFAULT_CFL: f64 = 0.2;
pub const DEFAULT_T_STAR: f64 = 0.05;
pub const DEFAULT_RESOLUTIONS: [usize; 3] = [32, 64, 128];

/// A periodic scalar field sampled at `x_i = 2πi/N`, `y_j = 2πj/N`.
/// Stored row-major with `x` as the slow index.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    n: usize,
    data: Vec<f64>,
}

impl GridField {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: data.len() });
        }
        Ok(Self { n, data })
    }

    pub fn from_fn(n: usize, f: impl Fn(f64, f64) -> f64) -> Self {
        let h = TAU / n as f64;
        let data = (0..n * n).map(|k| f((k / n) as f64 * h, (k % n) as f64 * h)).collect();
        Self { n, data }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self { n, data: vec![c; n * n] }
    }

    pub fn resolution(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        TAU / self.n as f64
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Mean over the grid (the integral divided by `4π²`).
    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    fn zip(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.n, other.n, "grid resolution mismatch");
        Self { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect() }
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|a| f(*a)).collect() }
    }

    fn stencil(&self, axis: usize, weights: &[(isize, f64)], denom: f64) -> Result<Self> {
        if axis > 1 {
            return Err(Error::DimensionMismatch { expected: 2, got: axis + 1 });
        }
        let n = self.n;
        let mut out = vec![0.0; self.data.len()];
        for &(off, w) in weights {
            let wrap: Vec<usize> = (0..n).map(|k| (k as isize + off).rem_euclid(n as isize) as usize).collect();
            for (i, row) in out.chunks_mut(n).enumerate() {
                if axis == 0 {
                    let src = &self.data[wrap[i] * n..(wrap[i] + 1) * n];
                    row.iter_mut().zip(src).for_each(|(o, v)| *o += w * v);
                } else {
                    let src = &self.data[i * n..(i + 1) * n];
                    row.iter_mut().zip(&wrap).for_each(|(o, &j)| *o += w * src[j]);
                }
            }
        }
        let inv = 1.0 / denom;
        out.iter_mut().for_each(|o| *o *= inv);
        Ok(Self { n, data: out })
    }

    /// Compact fourth-order second derivative along one axis.
    pub fn second_partial(&self, axis: usize) -> Result<Self> {
        let h = self.spacing();
        self.stencil(axis, &[(-2, -1.0), (-1, 16.0), (0, -30.0), (1, 16.0), (2, -1.0)], 12.0 * h * h)
    }
}

impl Field for GridField {
    fn constant_like(&self, c: f64) -> Self {
        Self::constant(self.n, c)
    }

    fn add(&self, rhs: &Self) -> Self {
        self.zip(rhs, |a, b| a + b)
    }

    fn sub(&self, rhs: &Self) -> Self {
        self.zip(rhs, |a, b| a - b)
    }

    fn mul(&self, rhs: &Self) -> Self {
        self.zip(rhs, |a, b| a * b)
    }

    fn scale(&self, c: f64) -> Self {
        self.map(|a| a * c)
    }

    fn recip(&self) -> Result<Self> {
        if self.data.contains(&0.0) {
            return Err(Error::Singular("reciprocal of a grid field with a zero".into()));
        }
        Ok(self.map(|a| 1.0 / a))
    }

    fn sqrt(&self) -> Result<Self> {
        if self.data.iter().any(|&a| a < 0.0) {
            return Err(Error::Domain("square root of a negative grid value".into()));
        }
        Ok(self.map(f64::sqrt))
    }

    fn exp(&self) -> Self {
        self.map(f64::exp)
    }

    fn ln(&self) -> Result<Self> {
        if self.data.iter().any(|&a| a <= 0.0) {
            return Err(Error::Positivity("logarithm of a non-positive grid value".into()));
        }
        Ok(self.map(f64::ln))
    }

    /// Fourth-order central first derivative.
    fn partial(&self, axis: usize) -> Result<Self> {
        let h = self.spacing();
        self.stencil(axis, &[(-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0)], 12.0 * h)
    }

    fn magnitude(&self) -> f64 {
        self.max_abs()
    }

    fn min_value(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn add_product(&mut self, a: &Self, b: &Self) {
        for ((s, x), y) in self.data.iter_mut().zip(&a.data).zip(&b.data) {
            *s += x * y;
        }
    }
}

/// `Σ_i g^{ii}(D2_i φ − D1_i D1_i φ)`: turns the composed-stencil Laplacian
/// into one whose diagonal second derivatives use the compact stencil.
fn compact_correction(pack: &CurvaturePack<GridField>, phi: &GridField) -> Result<GridField> {
    let mut acc = phi.zero_like();
    for i in 0..pack.dim() {
        let diff = phi.second_partial(i)?.sub(&phi.partial(i)?.partial(i)?);
        acc.add_product(pack.inverse.get(&[i, i]), &diff);
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq)]
pub enum GridMetric {
    Flat,
    Perturbed { amplitude: f64, seed: u64 },
}

/// Evolving variables: `g`, `h` and `u`.
#[derive(Clone, Debug)]
pub struct GridVars {
    pub g: Tensor<GridField>,
    pub h: Tensor<GridField>,
    pub u: GridField,
}

impl GridVars {
    fn axpy(&self, c: f64, d: &GridVars) -> Result<GridVars> {
        Ok(GridVars {
            g: self.g.add(&d.g.scale(c))?,
            h: self.h.add(&d.h.scale(c))?,
            u: self.u.add_scaled(&d.u, c),
        })
    }
}

#[derive(Clone, Debug)]
pub struct GridState {
    pub n: usize,
    pub vars: GridVars,
    pub time: f64,
    pub dt: f64,
    /// `∂u/∂t = ε⁻¹Δu + Ru`.
    pub eps: f64,
    pub evolve_metric: bool,
    pub cfl: f64,
    frozen: Option<CurvaturePack<GridField>>,
}

fn symmetric_grid(n: usize, xx: &TrigPolynomial, xy: &TrigPolynomial, yy: &TrigPolynomial) -> Tensor<GridField> {
    let a = GridField::from_fn(n, |x, y| xx.eval(x, y));
    let b = GridField::from_fn(n, |x, y| xy.eval(x, y));
    let c = GridField::from_fn(n, |x, y| yy.eval(x, y));
    Tensor::from_components(2, &[Down, Down], vec![a, b.clone(), b, c]).expect("four components")
}

/// Seeded initial `h` components (bandlimit 2, unit total amplitude each).
pub fn initial_h_polynomials(seed: u64) -> [TrigPolynomial; 3] {
    let mut rng = stream_rng(seed, 0, Stream::Grid);
    [
        TrigPolynomial::random(&mut rng, 2, 4, 1.0),
        TrigPolynomial::random(&mut rng, 2, 4, 1.0),
        TrigPolynomial::random(&mut rng, 2, 4, 1.0),
    ]
}

/// Seeded positive initial `u = 2 + p` with `|p| ≤ 0.5`.
pub fn initial_u_polynomial(seed: u64) -> TrigPolynomial {
    let mut rng = stream_rng(seed, 1, Stream::Grid);
    TrigPolynomial::random(&mut rng, 2, 4, 0.5).with_offset(2.0)
}

/// Build the initial state. The time step is `t*/⌈t*/(cfl·dx²)⌉` so that
/// `t*` falls on a step.
pub fn init_torus(n: usize, metric: &GridMetric, fields_seed: u64) -> Result<GridState> {
    if n < MIN_RESOLUTION {
        return Err(Error::Config(format!("resolution {n} is below {MIN_RESOLUTION}")));
    }
    let g = match metric {
        GridMetric::Flat => symmetric_grid(n, &TrigPolynomial::constant(1.0), &TrigPolynomial::constant(0.0), &TrigPolynomial::constant(1.0)),
        GridMetric::Perturbed { amplitude, seed } => {
            let [pxx, pxy, pyy] = torus_perturbation(*amplitude, *seed);
            symmetric_grid(n, &pxx.with_offset(1.0), &pxy, &pyy.with_offset(1.0))
        }
    };
    validate_metric(&g)?;
    let [hxx, hxy, hyy] = initial_h_polynomials(fields_seed);
    let h = symmetric_grid(n, &hxx, &hxy, &hyy);
    let up = initial_u_polynomial(fields_seed);
    let u = GridField::from_fn(n, |x, y| up.eval(x, y));
    let dx = TAU / n as f64;
    let steps = (DEFAULT_T_STAR / (DEFAULT_CFL * dx * dx)).ceil();
    Ok(GridState {
        n,
        vars: GridVars { g, h, u },
        time: 0.0,
        dt: DEFAULT_T_STAR / steps,
        eps: 1.0,
        evolve_metric: !matches!(metric, GridMetric::Flat),
        cfl: DEFAULT_CFL,
        frozen: None,
    })
}

/// Discrete curvature is symmetric only up to truncation error.
fn symmetrized(t: &Tensor<GridField>) -> Result<Tensor<GridField>> {
    Ok(t.add(&t.transpose())?.scale(0.5))
}

/// Right-hand side: `∂g = −2Rc`, `∂h = Δ_L h`, `∂u = ε⁻¹Δu + Ru`. A
/// supplied `frozen` pack holds the metric fixed.
pub fn grid_rhs(vars: &GridVars, eps: f64, frozen: Option<&CurvaturePack<GridField>>) -> Result<GridVars> {
    let owned;
    let (pack, g) = match frozen {
        Some(p) => (p, vars.g.scale(0.0)),
        None => {
            owned = CurvaturePack::from_metric(vars.g.clone())?;
            (&owned, symmetrized(&owned.ricci)?.scale(-2.0))
        }
    };
    let h = symmetrized(&pack.lichnerowicz(&vars.h)?)?;
    let corrections = vars.h.try_map(|c| compact_correction(pack, c))?;
    let h = h.add(&corrections)?;
    let lap_u = pack.laplacian(&vars.u)?.add(&compact_correction(pack, &vars.u)?);
    let u = lap_u.scale(1.0 / eps).add(&pack.scalar.mul(&vars.u));
    Ok(GridVars { g, h, u })
}

impl GridState {
    /// RK4 stability bound for the diffusive part: the compact stencil has
    /// spectral radius `16/(3dx²)` per axis and RK4 is stable on the negative
    /// real axis up to about 2.78.
    pub fn dt_limit(&self) -> f64 {
        let dx = TAU / self.n as f64;
        let (a, b, c) = (self.vars.g.get(&[0, 0]), self.vars.g.get(&[0, 1]), self.vars.g.get(&[1, 1]));
        let mut trace_inv: f64 = 0.0;
        for k in 0..a.data.len() {
            let det = a.data[k] * c.data[k] - b.data[k] * b.data[k];
            trace_inv = trace_inv.max((a.data[k] + c.data[k]) / det);
        }
        let rate = self.eps.abs().recip().max(1.0);
        2.78 * 3.0 * dx * dx / (16.0 * trace_inv * rate)
    }

    /// One classical RK4 step.
    pub fn step(&mut self) -> Result<()> {
        let limit = self.dt_limit();
        if self.dt > limit {
            return Err(Error::Cfl { dt: self.dt, limit });
        }
        if !self.evolve_metric && self.frozen.is_none() {
            self.frozen = Some(CurvaturePack::from_metric(self.vars.g.clone())?);
        }
        let (e, m) = (self.eps, self.frozen.as_ref());
        let v = &self.vars;
        let k1 = grid_rhs(v, e, m)?;
        let k2 = grid_rhs(&v.axpy(0.5 * self.dt, &k1)?, e, m)?;
        let k3 = grid_rhs(&v.axpy(0.5 * self.dt, &k2)?, e, m)?;
        let k4 = grid_rhs(&v.axpy(self.dt, &k3)?, e, m)?;
        let sixth = self.dt / 6.0;
        let next = v.axpy(sixth, &k1)?.axpy(2.0 * sixth, &k2)?.axpy(2.0 * sixth, &k3)?.axpy(sixth, &k4)?;
        if !(next.u.min_value() > 0.0) {
            return Err(Error::Positivity(format!("u reached {} at t = {}", next.u.min_value(), self.time + self.dt)));
        }
        self.vars = next;
        self.time += self.dt;
        Ok(())
    }
}

/// Identities that have a grid evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GridCheck {
    /// `(∂_t − Δ)Z(h, −∇f) = 0` on the flat torus (`f = 0`).
    L1,
    /// `LQ = |∇∇v|² + ⟨Rc, ∇∇v⟩ + Rc(∇(v−f), ∇(v−f))` on the flat torus.
    B2,
    /// `(∂_t − Δ)Z(h, X)` against its curvature expression on a perturbed torus.
    Eq1,
}

impl GridCheck {
    pub fn id(self) -> &'static str {
        match self {
            GridCheck::L1 => "CHK-L1",
            GridCheck::B2 => "CHK-B2",
            GridCheck::Eq1 => "CHK-EQ1",
        }
    }

    pub fn parse(id: &str) -> Result<Self> {
        match id {
            "CHK-L1" => Ok(Self::L1),
            "CHK-B2" => Ok(Self::B2),
            "CHK-EQ1" => Ok(Self::Eq1),
            _ => Err(Error::UnknownCheck(format!("{id} has no grid evaluation"))),
        }
    }

    pub const ALL: [GridCheck; 3] = [GridCheck::L1, GridCheck::B2, GridCheck::Eq1];

    /// Accepted range for the observed order. The evolving metric in the
    /// perturbed case only guarantees a lower bound.
    pub fn order_band(self) -> (f64, f64) {
        match self {
            GridCheck::Eq1 => (1.8, f64::INFINITY),
            _ => (3.3, 4.7),
        }
    }

    fn metric(self) -> GridMetric {
        match self {
            GridCheck::Eq1 => GridMetric::Perturbed {
                amplitude: crate::solitons::TORUS_PERTURBATION_AMPLITUDE,
                seed: crate::solitons::TORUS_PERTURBATION_SEED,
            },
            _ => GridMetric::Flat,
        }
    }
}

/// Closed-form, periodic, time-dependent `X` and its time derivative.
#[derive(Clone, Debug)]
pub struct GridVectorField {
    base: [TrigPolynomial; 2],
    drift: [TrigPolynomial; 2],
}

impl GridVectorField {
    /// `X^i = p_i(x, y)(1 + t/2) + q_i(x, y) t²`.
    pub fn seeded(seed: u64) -> Self {
        let mut rng = stream_rng(seed, 2, Stream::Grid);
        let mut poly = || TrigPolynomial::random(&mut rng, 2, 3, 0.5);
        Self { base: [poly(), poly()], drift: [poly(), poly()] }
    }

    pub fn at(&self, n: usize, t: f64) -> (Tensor<GridField>, Tensor<GridField>) {
        let comp = |i: usize, a: f64, b: f64| {
            let (p, q) = (&self.base[i], &self.drift[i]);
            GridField::from_fn(n, |x, y| a * p.eval(x, y) + b * q.eval(x, y))
        };
        let x = Tensor::from_components(2, &[Up], vec![comp(0, 1.0 + 0.5 * t, t * t), comp(1, 1.0 + 0.5 * t, t * t)]);
        let dx = Tensor::from_components(2, &[Up], vec![comp(0, 0.5, 2.0 * t), comp(1, 0.5, 2.0 * t)]);
        (x.expect("two components"), dx.expect("two components"))
    }
}

/// Fourth-order centered first derivative from five equally spaced slices.
fn centered_dt(slices: &[GridField], dt: f64) -> GridField {
    let [a, b, _, d, e] = slices else { panic!("five slices") };
    a.sub(e).add(&d.sub(b).scale(8.0)).scale(1.0 / (12.0 * dt))
}

/// `max |Σ terms| / max Σ |terms|` over the grid.
fn grid_relative(terms: &[GridField]) -> f64 {
    let n2 = terms[0].data.len();
    let (mut num, mut den) = (0.0f64, 0.0f64);
    for k in 0..n2 {
        num = num.max(terms.iter().map(|t| t.data[k]).sum::<f64>().abs());
        den = den.max(terms.iter().map(|t| t.data[k].abs()).sum());
    }
    num / (den + crate::residual::RESIDUAL_FLOOR)
}

/// Evolve to `t*` and evaluate one identity there; returns the relative
/// max-norm residual.
pub fn residual_at(check: GridCheck, n: usize, seed: u64) -> Result<f64> {
    let mut state = init_torus(n, &check.metric(), seed)?;
    let steps = (DEFAULT_T_STAR / state.dt).round() as usize;
    let xfield = GridVectorField::seeded(seed);
    let mut window: VecDeque<(f64, GridVars)> = VecDeque::with_capacity(5);
    for k in 0..=steps + 2 {
        if k + 2 >= steps {
            window.push_back((state.time, state.vars.clone()));
        }
        if k < steps + 2 {
            state.step()?;
        }
    }
    let (t_mid, mid) = window[2].clone();
    let pack = CurvaturePack::from_metric(mid.g.clone())?;
    let dt = state.dt;
    match check {
        GridCheck::L1 => {
            let z = window
                .iter()
                .map(|(_, v)| {
                    let p = CurvaturePack::from_metric(v.g.clone())?;
                    p.div_div(&v.h)
                })
                .collect::<Result<Vec<_>>>()?;
            let zt = centered_dt(&z, dt);
            let lap = pack.laplacian(&z[2])?;
            Ok(grid_relative(&[zt, lap.neg()]))
        }
        GridCheck::B2 => {
            let q = window
                .iter()
                .map(|(_, v)| {
                    let p = CurvaturePack::from_metric(v.g.clone())?;
                    Ok(harnack::section2_quantities(&p, &v.u, state.eps)?.q)
                })
                .collect::<Result<Vec<_>>>()?;
            let qt = centered_dt(&q, dt);
            let s2 = harnack::section2_quantities(&pack, &mid.u, state.eps)?;
            let lq = harnack::l_eps(&pack, &s2.dv, &q[2], &qt, 1.0)?;
            let df = pack.differential(&mid.u.zero_like())?;
            let [a, b, c] = harnack::lq_rhs(&pack, &s2, &df)?;
            Ok(grid_relative(&[lq, a.neg(), b.neg(), c.neg()]))
        }
        GridCheck::Eq1 => {
            let z = window
                .iter()
                .map(|(t, v)| {
                    let p = CurvaturePack::from_metric(v.g.clone())?;
                    let (x, _) = xfield.at(n, *t);
                    Ok(harnack::linear_trace_z(&p, &v.h, &x)?.total())
                })
                .collect::<Result<Vec<_>>>()?;
            let zt = centered_dt(&z, dt);
            let lap = pack.laplacian(&z[2])?;
            let (x, xt) = xfield.at(n, t_mid);
            let rhs = harnack::z_evolution_rhs(&pack, &mid.h, &x, &xt)?;
            let mut terms = vec![zt, lap.neg()];
            terms.extend(rhs.terms().iter().map(|t| t.neg()));
            Ok(grid_relative(&terms))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub residual: f64,
    /// `log2(r_{N/2} / r_N)`, absent for the coarsest grid.
    pub observed_order: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConvergenceStatus {
    Converged,
    /// Residuals did not decrease monotonically under refinement.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub check_id: String,
    pub seed: u64,
    pub rows: Vec<ConvergenceRow>,
    pub status: ConvergenceStatus,
}

impl ConvergenceReport {
    pub fn orders(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.observed_order).collect()
    }

    /// Converged, with every observed order inside the band.
    pub fn passed(&self) -> bool {
        let Ok(check) = GridCheck::parse(&self.check_id) else { return false };
        let (lo, hi) = check.order_band();
        self.status == ConvergenceStatus::Converged && self.orders().iter().all(|p| (lo..=hi).contains(p))
    }

    pub fn min_order(&self) -> Option<f64> {
        self.orders().into_iter().reduce(f64::min)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,residual,observed_order\n");
        for r in &self.rows {
            let order = r.observed_order.map(|p| format!("{p:.4}")).unwrap_or_default();
            let _ = writeln!(out, "{},{:.6e},{}", r.n, r.residual, order);
        }
        out
    }
}

/// Refinement study over resolutions that double at every step.
pub fn dynamic_residual(check: GridCheck, resolutions: &[usize], seed: u64) -> Result<ConvergenceReport> {
    if resolutions.len() < 3 {
        return Err(Error::Config("a refinement study needs at least three resolutions".into()));
    }
    if resolutions.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(Error::Config("each resolution must double the previous one".into()));
    }
    let residuals = resolutions.iter().map(|&n| residual_at(check, n, seed)).collect::<Result<Vec<_>>>()?;
    let rows: Vec<ConvergenceRow> = resolutions
        .iter()
        .zip(&residuals)
        .enumerate()
        .map(|(k, (&n, &r))| ConvergenceRow {
            n,
            residual: r,
            observed_order: (k > 0).then(|| (residuals[k - 1] / r).log2()),
        })
        .collect();
    let monotone = residuals.windows(2).all(|w| w[1] < w[0]);
    let status = if monotone { ConvergenceStatus::Converged } else { ConvergenceStatus::Inconclusive };
    Ok(ConvergenceReport { check_id: check.id().into(), seed, rows, status })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_state(n: usize, h: Tensor<GridField>, u: GridField, dt: f64) -> GridState {
        let g = symmetric_grid(n, &TrigPolynomial::constant(1.0), &TrigPolynomial::constant(0.0), &TrigPolynomial::constant(1.0));
        GridState { n, vars: GridVars { g, h, u }, time: 0.0, dt, eps: 1.0, evolve_metric: false, cfl: DEFAULT_CFL, frozen: None }
    }

    fn diag(f: GridField) -> Tensor<GridField> {
        let z = f.zero_like();
        Tensor::from_components(2, &[Down, Down], vec![f.clone(), z.clone(), z, f]).unwrap()
    }

    #[test]
    fn stencils_are_fourth_order() {
        let errs: Vec<f64> = [32usize, 64]
            .iter()
            .map(|&n| {
                let f = GridField::from_fn(n, |x, y| (x + 2.0 * y).sin());
                let exact = GridField::from_fn(n, |x, y| 2.0 * (x + 2.0 * y).cos());
                let d2 = GridField::from_fn(n, |x, y| -(x + 2.0 * y).sin());
                f.partial(1).unwrap().sub(&exact).max_abs() + f.second_partial(0).unwrap().sub(&d2).max_abs()
            })
            .collect();
        let p = (errs[0] / errs[1]).log2();
        assert!((3.7..4.3).contains(&p), "{p}");
    }

    #[test]
    fn flat_grid_curvature_is_zero() {
        let s = init_torus(16, &GridMetric::Flat, 1).unwrap();
        let pack = CurvaturePack::from_metric(s.vars.g.clone()).unwrap();
        assert_eq!(pack.riemann.comps().iter().map(GridField::max_abs).fold(0.0, f64::max), 0.0);
        assert_eq!(pack.scalar.max_abs(), 0.0);
    }

    #[test]
    fn zero_amplitude_perturbation_is_flat_and_seeds_reproduce() {
        let a = init_torus(32, &GridMetric::Flat, 7).unwrap();
        let b = init_torus(32, &GridMetric::Perturbed { amplitude: 0.0, seed: 3 }, 7).unwrap();
        assert_eq!(a.vars.g.comps(), b.vars.g.comps());
        let c = init_torus(32, &GridMetric::Flat, 7).unwrap();
        assert_eq!(a.vars.h.comps(), c.vars.h.comps());
        assert_eq!(a.vars.u, c.vars.u);
        assert!(a.vars.u.min_value() >= 1.5);
    }

    #[test]
    fn bad_inputs() {
        assert!(matches!(init_torus(8, &GridMetric::Flat, 0), Err(Error::Config(_))));
        assert!(init_torus(32, &GridMetric::Perturbed { amplitude: 3.0, seed: 3 }, 0).is_err());
        let mut s = init_torus(32, &GridMetric::Flat, 0).unwrap();
        s.dt *= 10.0;
        assert!(matches!(s.step(), Err(Error::Cfl { .. })));
    }

    #[test]
    fn separable_heat_solutions() {
        let n = 64;
        let h0 = diag(GridField::from_fn(n, |x, _| x.cos()));
        let u0 = GridField::from_fn(n, |_, y| 2.0 + y.sin());
        let dx = TAU / n as f64;
        let steps = (0.1 / (DEFAULT_CFL * dx * dx)).ceil() as usize;
        let mut s = flat_state(n, h0, u0, 0.1 / steps as f64);
        let mass = s.vars.u.mean();
        for _ in 0..steps {
            s.step().unwrap();
        }
        let decay = (-0.1f64).exp();
        let exact_h = GridField::from_fn(n, |x, _| decay * x.cos());
        let err = s.vars.h.get(&[0, 0]).sub(&exact_h).max_abs() / exact_h.max_abs();
        assert!(err <= 1e-6, "{err}");
        assert_eq!(s.vars.h.get(&[0, 1]).max_abs(), 0.0);
        let exact_u = GridField::from_fn(n, |_, y| 2.0 + decay * y.sin());
        assert!(s.vars.u.sub(&exact_u).max_abs() <= 1e-6);
        assert!((s.vars.u.mean() - mass).abs() < 1e-12);
    }

    #[test]
    fn zero_h_stays_zero() {
        let n = 16;
        let h0 = diag(GridField::constant(n, 0.0));
        let mut s = flat_state(n, h0, GridField::constant(n, 1.0), 1e-3);
        for _ in 0..3 {
            s.step().unwrap();
        }
        assert!(s.vars.h.comps().iter().all(|c| c.max_abs() == 0.0));
    }

    #[test]
    fn positivity_loss_is_reported() {
        let n = 16;
        let h0 = diag(GridField::constant(n, 0.0));
        let mut s = flat_state(n, h0, GridField::from_fn(n, |x, _| 0.01 + x.cos().powi(2) - 0.0095), 1e-3);
        s.eps = -1.0;
        let mut failed = false;
        for _ in 0..200 {
            if let Err(e) = s.step() {
                assert!(matches!(e, Error::Positivity(_) | Error::Cfl { .. }), "{e:?}");
                failed = true;
                break;
            }
        }
        assert!(failed);
    }

    #[test]
    fn refinement_study_needs_doubling() {
        assert!(dynamic_residual(GridCheck::L1, &[32, 64], 1).is_err());
        assert!(dynamic_residual(GridCheck::L1, &[32, 48, 96], 1).is_err());
    }
}
