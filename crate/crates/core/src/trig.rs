//! Seeded trigonometric polynomials on the plane / periodic torus.

use rand::Rng;

use crate::jet::Jet;

#[derive(Clone, Debug, PartialEq)]
pub struct TrigTerm {
    pub kx: i32,
    pub ky: i32,
    pub amplitude: f64,
    pub phase: f64,
}

/// `Σ a cos(kx·x + ky·y + φ)`, 2π-periodic in both variables.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrigPolynomial {
    pub offset: f64,
    pub terms: Vec<TrigTerm>,
}

impl TrigPolynomial {
    pub fn constant(offset: f64) -> Self {
        Self { offset, terms: Vec::new() }
    }

    /// Random polynomial with wavenumbers `|k| ≤ bandlimit` per axis and
    /// total absolute amplitude `amplitude`.
    pub fn random(rng: &mut impl Rng, bandlimit: i32, n_terms: usize, amplitude: f64) -> Self {
        let mut terms: Vec<TrigTerm> = (0..n_terms)
            .map(|_| {
                let (mut kx, mut ky) = (0, 0);
                while kx == 0 && ky == 0 {
                    kx = rng.gen_range(-bandlimit..=bandlimit);
                    ky = rng.gen_range(0..=bandlimit);
                }
                TrigTerm {
                    kx,
                    ky,
                    amplitude: rng.gen_range(0.2..1.0),
                    phase: rng.gen_range(0.0..std::f64::consts::TAU),
                }
            })
            .collect();
        let total: f64 = terms.iter().map(|t| t.amplitude).sum();
        if total > 0.0 {
            for t in &mut terms {
                t.amplitude *= amplitude / total;
            }
        }
        Self { offset: 0.0, terms }
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }

    /// Upper bound on `|p − offset|`.
    pub fn amplitude_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.amplitude.abs()).sum()
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.offset
            + self
                .terms
                .iter()
                .map(|t| t.amplitude * (t.kx as f64 * x + t.ky as f64 * y + t.phase).cos())
                .sum::<f64>()
    }

    pub fn eval_jet(&self, x: &Jet, y: &Jet) -> Jet {
        let mut acc = Jet::constant(x.space(), self.offset);
        for t in &self.terms {
            let arg = (x * t.kx as f64 + y * t.ky as f64) + t.phase;
            acc += &arg.cos().scale(t.amplitude);
        }
        acc
    }
}
