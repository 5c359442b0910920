//! Discrete momentum-mode occupations from the real-space correlation
//! matrix.

use crate::{C64, Error, Result};
use nalgebra::DMatrix;
use std::f64::consts::PI;

/// Dimensionless wavevectors kappa_m = -pi + (2 pi / N) m, m = 0..N-1.
pub fn momentum_grid(n_sites: usize) -> Vec<f64> {
    (0..n_sites)
        .map(|m| -PI + 2.0 * PI * m as f64 / n_sites as f64)
        .collect()
}

/// Occupations <b_kappa^dag b_kappa> = (1/N) sum_{jl} e^{i kappa (j-l)}
/// <b_j^dag b_l> for each kappa on the discrete grid.
///
/// The input must be Hermitian within 1e-8; the output is real and
/// non-negative (tiny negative rounding is clamped), and its sum equals the
/// real-space occupation sum (Parseval).
pub fn momentum_occupations(correlations: &DMatrix<C64>) -> Result<Vec<f64>> {
    let n = correlations.nrows();
    if correlations.ncols() != n {
        return Err(Error::DimensionMismatch(
            "correlation matrix must be square".into(),
        ));
    }
    let defect = (correlations - correlations.adjoint()).camax();
    if defect > 1e-8 {
        return Err(Error::InvalidState(format!(
            "correlation matrix not Hermitian (defect {defect:.3e})"
        )));
    }
    let mut out = Vec::with_capacity(n);
    for kappa in momentum_grid(n) {
        // (1/N) v^dag C v with v_j = e^{-i kappa j}.
        let mut acc = C64::default();
        for j in 0..n {
            for l in 0..n {
                let phase = C64::from_polar(1.0, kappa * (j as f64 - l as f64));
                acc += phase * correlations[(j, l)];
            }
        }
        out.push((acc.re / n as f64).max(0.0));
    }
    Ok(out)
}
