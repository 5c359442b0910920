//! Spherical geometry of the system-bath bond with respect to the tilted
//! quantization axis.

use super::RydbergSpec;

/// Spherical coordinates of the vector from a system spin to its m-th bath
/// neighbor, relative to the quantization axis.
#[derive(Debug, Clone, Copy)]
pub struct GeometryAngles {
    /// Distance r_m (m).
    pub r: f64,
    /// In-plane angle chi_m = arctan[(m - 1/2) a / ell].
    pub chi: f64,
    /// Polar angle theta_m: cos(theta_m) = cos(chi_m) sin(Theta).
    pub theta: f64,
    /// Azimuthal angle phi_m: tan(phi_m) = tan(chi_m) sec(Theta),
    /// quadrant-correct.
    pub phi: f64,
}

/// Angles for the m-th right neighbor (m >= 1); the left neighbor has the
/// same r, chi, theta and opposite azimuth.
pub fn geometry(m: usize, spec: &RydbergSpec) -> GeometryAngles {
    debug_assert!(m >= 1);
    let dx = (m as f64 - 0.5) * spec.lattice_constant;
    geometry_at_offset(dx, spec.line_separation, spec.tilt)
}

/// Angles for an arbitrary along-chain offset dx > 0 (used for sink sites
/// off the regular grid).
pub fn geometry_at_offset(dx: f64, ell: f64, tilt: f64) -> GeometryAngles {
    let r = (ell * ell + dx * dx).sqrt();
    let chi = (dx / ell).atan();
    let cos_theta = chi.cos() * tilt.sin();
    let theta = cos_theta.clamp(-1.0, 1.0).acos();
    // tan(phi) = tan(chi) sec(Theta); multiply numerator and denominator by
    // cos(chi) > 0 for a quadrant-correct atan2.
    let phi = chi.sin().atan2(chi.cos() * tilt.cos());
    GeometryAngles { r, chi, theta, phi }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::C64;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn spec(a: f64, ell: f64, tilt: f64) -> RydbergSpec {
        RydbergSpec {
            lattice_constant: a,
            line_separation: ell,
            tilt,
            c3: 1.0,
            n_bath: 10,
            sys_anchors: vec![5.5],
            mirrored: vec![false],
            drive: C64::default(),
            detuning_sys: 0.0,
            detuning_bath: None,
            hopping_range: None,
            coupling_range: None,
            excitation_cap: 1,
            sink: None,
        }
    }

    #[test]
    fn defining_identities_hold() {
        // The two defining identities, checked directly for several
        // geometries including the Theta = pi/2 degenerate-looking case.
        for (a, ell, tilt) in [
            (1.0, 2.25, PI / 3.0),
            (1.0, 1.8, FRAC_PI_2),
            (2.0, 0.7, 0.3),
            (1.0, 3.0, 2.4),
        ] {
            let s = spec(a, ell, tilt);
            for m in 1..=4 {
                let g = geometry(m, &s);
                assert!(
                    (g.theta.cos() - g.chi.cos() * tilt.sin()).abs() < 1e-14,
                    "polar identity"
                );
                // tan(phi) = tan(chi) sec(Theta) whenever cos(Theta) != 0.
                if tilt.cos().abs() > 1e-12 {
                    assert!(
                        (g.phi.tan() - g.chi.tan() / tilt.cos()).abs()
                            < 1e-10 * (1.0 + g.phi.tan().abs()),
                        "azimuth identity"
                    );
                } else {
                    assert!((g.phi - FRAC_PI_2).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn first_neighbor_reference_values() {
        // ell = 2.25 a, m = 1: chi_1 = arctan(2/9), r_1 = sqrt(5.3125) a.
        let s = spec(1.0, 2.25, PI / 3.0);
        let g = geometry(1, &s);
        assert!((g.chi - (2.0f64 / 9.0).atan()).abs() < 1e-15);
        assert!((g.chi - 0.2186689).abs() < 1e-6);
        assert!((g.r - 5.3125f64.sqrt()).abs() < 1e-14);
        assert!((g.r - 2.3048862).abs() < 1e-6);
    }

    #[test]
    fn far_line_limit() {
        // ell -> infinity: chi -> 0, r -> ell.
        let s = spec(1.0, 1e9, 1.0);
        let g = geometry(3, &s);
        assert!(g.chi < 1e-8);
        assert!((g.r / 1e9 - 1.0).abs() < 1e-12);
    }
}
