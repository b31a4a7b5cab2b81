//! Shared fixtures for the benchmarks.

use std::sync::Arc;

use harnack_core::{catalog_get, Frame, Jet, JetSpace, Result, SolitonSpec};

/// A jet whose coefficients are all nonzero, so multiplication does full work.
pub fn dense_jet(space: &Arc<JetSpace>) -> Jet {
    let mut j = Jet::constant(space, 1.0);
    for (k, c) in j.coeffs_mut().iter_mut().enumerate() {
        *c = 1.0 / (k as f64 + 1.0);
    }
    j
}

/// Cigar flow chart at a fixed off-axis point.
pub fn cigar_frame(order: usize) -> Result<(SolitonSpec, Frame)> {
    let spec = catalog_get("cigar_flow")?;
    let space = spec.jet_space(true, false, order)?;
    let frame = spec.frame(space, &[0.7, -1.1], 0.1)?;
    Ok((spec, frame))
}
