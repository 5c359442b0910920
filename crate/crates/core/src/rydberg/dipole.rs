//! Angular structure of the dipole-dipole interaction.

use crate::{C64, Error, Result};
use std::f64::consts::PI;

/// Clebsch-Gordan coefficient <1 mu1; 1 mu2 | 2, mu1+mu2>.
fn cg_11_2(mu1: i8, mu2: i8) -> f64 {
    match (mu1, mu2) {
        (1, 1) | (-1, -1) => 1.0,
        (1, 0) | (0, 1) | (0, -1) | (-1, 0) => 1.0 / 2.0f64.sqrt(),
        (1, -1) | (-1, 1) => 1.0 / 6.0f64.sqrt(),
        (0, 0) => (2.0f64 / 3.0).sqrt(),
        _ => unreachable!("validated spherical components"),
    }
}

/// Spherical harmonic Y_{2, m}(theta, phi).
fn y2(m: i8, theta: f64, phi: f64) -> C64 {
    let (st, ct) = theta.sin_cos();
    match m {
        0 => C64::new(0.25 * (5.0 / PI).sqrt() * (3.0 * ct * ct - 1.0), 0.0),
        1 => C64::from_polar(-0.5 * (15.0 / (2.0 * PI)).sqrt() * st * ct, phi),
        -1 => C64::from_polar(0.5 * (15.0 / (2.0 * PI)).sqrt() * st * ct, -phi),
        2 => C64::from_polar(0.25 * (15.0 / (2.0 * PI)).sqrt() * st * st, 2.0 * phi),
        -2 => C64::from_polar(0.25 * (15.0 / (2.0 * PI)).sqrt() * st * st, -2.0 * phi),
        _ => unreachable!("m in -2..=2"),
    }
}

/// Angular factor of the dipole-dipole matrix element for spherical dipole
/// components (mu1, mu2):
/// -sqrt(24 pi / 5) r^{-3} <1 mu1; 1 mu2|2, mu1+mu2> Y*_{2, mu1+mu2}(theta, phi).
///
/// Radial matrix elements are folded into the caller's C3 coefficient.
pub fn dipole_dipole_element(mu1: i8, mu2: i8, r: f64, theta: f64, phi: f64) -> Result<C64> {
    if !(-1..=1).contains(&mu1) || !(-1..=1).contains(&mu2) {
        return Err(Error::InvalidModel(format!(
            "spherical components must be -1, 0 or 1 (got {mu1}, {mu2})"
        )));
    }
    let prefactor = -(24.0 * PI / 5.0).sqrt() / r.powi(3);
    Ok(prefactor * cg_11_2(mu1, mu2) * y2(mu1 + mu2, theta, phi).conj())
}
