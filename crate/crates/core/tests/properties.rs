use std::sync::Arc;

use harnack_core::checks::{run_suite, CheckStatus, RunConfig};
use harnack_core::gridlab::GridField;
use harnack_core::jet::MultiIndex;
use harnack_core::{catalog_get, Field, Jet, JetSpace, Precision};
use proptest::prelude::*;

const ORDER: usize = 5;

fn space() -> Arc<JetSpace> {
    JetSpace::with_roles(2, false, false, ORDER).unwrap()
}

fn jet(space: &Arc<JetSpace>, coeffs: Vec<f64>) -> Jet {
    Jet::from_coeffs(space, coeffs, Precision::new(ORDER as i32, 0)).unwrap()
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, space().len())
}

/// Largest difference over the coefficients both jets know exactly.
fn gap(a: &Jet, b: &Jet) -> f64 {
    let dims = a.space().num_vars();
    a.space()
        .multi_indices()
        .iter()
        .filter_map(|alpha: &MultiIndex| Some((a.coeff(&alpha[..dims]).ok()? - b.coeff(&alpha[..dims]).ok()?).abs()))
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn leibniz_rule(x in coeffs(), y in coeffs(), var in 0usize..2) {
        let s = space();
        let (a, b) = (jet(&s, x), jet(&s, y));
        let lhs = Field::mul(&a, &b).partial(var).unwrap();
        let rhs = Field::mul(&a.partial(var).unwrap(), &b).add(&Field::mul(&a, &b.partial(var).unwrap()));
        prop_assert!(gap(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn chain_rule_for_exp_and_sin(x in coeffs(), var in 0usize..2) {
        let s = space();
        let a = jet(&s, x);
        let da = a.partial(var).unwrap();
        let e = Field::exp(&a);
        prop_assert!(gap(&e.partial(var).unwrap(), &Field::mul(&e, &da)) < 1e-11);
        let sin_rule = Field::mul(&a.cos(), &da);
        prop_assert!(gap(&a.sin().partial(var).unwrap(), &sin_rule) < 1e-11);
    }

    #[test]
    fn log_inverts_exp(x in coeffs()) {
        let s = space();
        let a = jet(&s, x);
        prop_assert!(gap(&Field::ln(&Field::exp(&a)).unwrap(), &a) < 1e-11);
    }

    #[test]
    fn product_is_commutative_and_associative(x in coeffs(), y in coeffs(), z in coeffs()) {
        let s = space();
        let (a, b, c) = (jet(&s, x), jet(&s, y), jet(&s, z));
        prop_assert!(gap(&Field::mul(&a, &b), &Field::mul(&b, &a)) < 1e-13);
        let left = Field::mul(&Field::mul(&a, &b), &c);
        let right = Field::mul(&a, &Field::mul(&b, &c));
        prop_assert!(gap(&left, &right) < 1e-12);
    }

    #[test]
    fn reciprocal_times_self_is_one(mut x in coeffs()) {
        x[0] = 1.5;
        let s = space();
        let a = jet(&s, x);
        let one = Field::mul(&a, &Field::recip(&a).unwrap());
        prop_assert!(gap(&one, &a.constant_like(1.0)) < 1e-10);
    }

    /// Jet derivative of the cigar scalar curvature against a five-point
    /// central difference of its values.
    #[test]
    fn curvature_derivative_matches_finite_differences(px in 0.2f64..2.5, py in -2.5f64..-0.2, axis in 0usize..2) {
        let spec = catalog_get("cigar_static").unwrap();
        let scalar_at = |p: [f64; 2], order: usize| {
            let space = spec.jet_space(false, false, order).unwrap();
            spec.curvature_at(&spec.frame(space, &p, 0.0).unwrap()).unwrap().scalar
        };
        let p = [px, py];
        let jet_d = scalar_at(p, 4).partial(axis).unwrap().value().unwrap();
        let h = 1e-3;
        let shifted = |k: f64| {
            let mut q = p;
            q[axis] += k * h;
            scalar_at(q, 2).value().unwrap()
        };
        let fd = (shifted(-2.0) - 8.0 * shifted(-1.0) + 8.0 * shifted(1.0) - shifted(2.0)) / (12.0 * h);
        prop_assert!((jet_d - fd).abs() <= 1e-8 * jet_d.abs().max(1.0), "{} vs {}", jet_d, fd);
    }

    /// Grid and jet derivatives of the same trigonometric function agree to
    /// stencil accuracy.
    #[test]
    fn grid_partials_match_jet_partials(kx in 1i32..3, ky in 0i32..3, phase in 0.0f64..6.0) {
        let n = 64;
        let g = GridField::from_fn(n, |x, y| (kx as f64 * x + ky as f64 * y + phase).sin());
        let gx = g.partial(0).unwrap();
        let s = space();
        let dx = std::f64::consts::TAU / n as f64;
        for (i, j) in [(0usize, 0usize), (5, 17), (40, 63)] {
            let (x0, y0) = (i as f64 * dx, j as f64 * dx);
            let x = Jet::variable(&s, 0, x0).unwrap();
            let y = Jet::variable(&s, 1, y0).unwrap();
            let arg = x.scale(kx as f64).add(&y.scale(ky as f64)).add(&x.constant_like(phase));
            let jet_d = arg.sin().partial(0).unwrap().value().unwrap();
            prop_assert!((gx.data()[i * n + j] - jet_d).abs() < 1e-5 * (kx as f64).powi(5));
        }
    }
}

#[test]
fn full_suite_passes_for_other_seeds() {
    for seed in [1, 99, 123_456] {
        let config = RunConfig { seed, n_points: 16, ..RunConfig::default() };
        let report = run_suite("all", "all", &config).unwrap();
        let failed: Vec<_> = report
            .reports
            .iter()
            .filter(|r| r.status == CheckStatus::Fail)
            .map(|r| format!("{} {} {:.2e} {:?}", r.check_id, r.soliton, r.max_rel_residual, r.message))
            .collect();
        assert!(failed.is_empty(), "seed {seed}: {failed:?}");
        assert!(report.reports.iter().any(|r| r.status == CheckStatus::Pass));
    }
}
