//! Bloch-band dispersion and the chiral coupling function.

use crate::{C64, Error, Result};

/// Offset convention for the coupling function: on-site spins (`s = 0`,
/// ion chains) or bond-centered spins (`s = 1/2`, two-line Rydberg
/// geometry).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    OnSite,
    BondCentered,
}

impl Convention {
    pub fn s(&self) -> f64 {
        match self {
            Convention::OnSite => 0.0,
            Convention::BondCentered => 0.5,
        }
    }
}

/// Couplings to the m-th neighbor on one side.
#[derive(Debug, Clone, Copy)]
pub struct SideCoupling {
    /// Amplitude (rad/s), complex in general.
    pub strength: C64,
    /// Gauge phase (rad).
    pub phase: f64,
}

/// Homogeneous waveguide description for closed-form analysis.
///
/// `hoppings[m-1]` is J_m. The coupling lists run over m = 1, 2, ...; in the
/// symmetric case left and right coincide and the coupling function reduces
/// to g_k = sqrt(2a/pi) (J0/2 + sum_m Jt_m cos[k a (m - s) - phi_m]).
#[derive(Debug, Clone)]
pub struct DispersionModel {
    /// Lattice constant (m).
    pub lattice_constant: f64,
    /// J_m, m = 1..=m_max (rad/s).
    pub hoppings: Vec<f64>,
    /// Bath detuning Delta_B (rad/s).
    pub detuning_bath: f64,
    /// Local coupling J0 (rad/s).
    pub local_coupling: C64,
    /// Couplings to left neighbors.
    pub left: Vec<SideCoupling>,
    /// Couplings to right neighbors.
    pub right: Vec<SideCoupling>,
    pub convention: Convention,
}

impl DispersionModel {
    /// Symmetric-coupling constructor: identical left/right amplitudes and
    /// phases.
    pub fn symmetric(
        lattice_constant: f64,
        hoppings: Vec<f64>,
        detuning_bath: f64,
        local_coupling: C64,
        couplings: Vec<SideCoupling>,
        convention: Convention,
    ) -> Self {
        Self {
            lattice_constant,
            hoppings,
            detuning_bath,
            local_coupling,
            left: couplings.clone(),
            right: couplings,
            convention,
        }
    }

    /// Band dispersion omega_k = -Delta_B - 2 sum_m J_m cos(m k a).
    pub fn dispersion(&self, k: f64) -> f64 {
        let ka = k * self.lattice_constant;
        let mut w = -self.detuning_bath;
        for (m, j) in self.hoppings.iter().enumerate() {
            w -= 2.0 * j * ((m + 1) as f64 * ka).cos();
        }
        w
    }

    /// Group velocity v_k = d omega / d k (term-wise sine series).
    pub fn group_velocity(&self, k: f64) -> f64 {
        let ka = k * self.lattice_constant;
        let mut v = 0.0;
        for (m, j) in self.hoppings.iter().enumerate() {
            let mf = (m + 1) as f64;
            v += 2.0 * j * mf * self.lattice_constant * (mf * ka).sin();
        }
        v
    }

    /// Band range over |k a| <= pi, sampled densely (the extrema of a long-
    /// range cosine series need not sit at the zone edges).
    pub fn band_range(&self) -> (f64, f64) {
        let a = self.lattice_constant;
        let n = 4096;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..=n {
            let k = -std::f64::consts::PI / a + 2.0 * std::f64::consts::PI / a * i as f64 / n as f64;
            let w = self.dispersion(k);
            lo = lo.min(w);
            hi = hi.max(w);
        }
        (lo, hi)
    }

    /// Smallest positive root of omega(k) + Delta_S = 0 on (0, pi/a];
    /// bracketed bisection plus a Newton polish to 1e-12 relative.
    pub fn resonant_wavevector(&self, detuning_sys: f64) -> Result<f64> {
        let a = self.lattice_constant;
        let target = -detuning_sys;
        let f = |k: f64| self.dispersion(k) - target;
        let (band_min, band_max) = self.band_range();
        if target < band_min || target > band_max {
            return Err(Error::NoResonantMode {
                target,
                band_min,
                band_max,
            });
        }
        // Scan for the first sign change on (0, pi/a].
        let n = 4096;
        let mut k_prev = 1e-9 / a;
        let mut f_prev = f(k_prev);
        let mut bracket = None;
        for i in 1..=n {
            let k = std::f64::consts::PI / a * i as f64 / n as f64;
            let fi = f(k);
            if f_prev == 0.0 {
                bracket = Some((k_prev, k_prev));
                break;
            }
            if f_prev * fi <= 0.0 {
                bracket = Some((k_prev, k));
                break;
            }
            k_prev = k;
            f_prev = fi;
        }
        let (mut lo, mut hi) = bracket.ok_or(Error::NoResonantMode {
            target,
            band_min,
            band_max,
        })?;
        for _ in 0..200 {
            if hi - lo <= 1e-15 * hi.abs().max(1.0 / a) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if f(lo) * f(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let mut k = 0.5 * (lo + hi);
        // Newton polish.
        for _ in 0..60 {
            let v = self.group_velocity(k);
            if v == 0.0 {
                break;
            }
            let step = f(k) / v;
            let k_new = (k - step).clamp(lo, hi);
            if (k_new - k).abs() <= 1e-12 * k.abs().max(1e-12 / a) {
                k = k_new;
                break;
            }
            k = k_new;
        }
        Ok(k)
    }

    /// Momentum-dependent coupling g_k. In the symmetric case this is Eq.
    /// (sqrt(2a/pi)) (J0/2 + sum_m Jt_m cos[ka(m-s) - phi_m]); with
    /// side-resolved couplings the left/right sums carry opposite complex
    /// exponents.
    pub fn coupling_gk(&self, k: f64) -> C64 {
        let a = self.lattice_constant;
        let ka = k * a;
        let s = self.convention.s();
        let mut acc = self.local_coupling;
        for (m, sc) in self.left.iter().enumerate() {
            let arg = ka * ((m + 1) as f64 - s) - sc.phase;
            acc += sc.strength * C64::from_polar(1.0, arg);
        }
        for (m, sc) in self.right.iter().enumerate() {
            let arg = ka * ((m + 1) as f64 - s) - sc.phase;
            acc += sc.strength * C64::from_polar(1.0, -arg);
        }
        acc * (a / (2.0 * std::f64::consts::PI)).sqrt()
    }
}

/// Chiral emission rates at the resonant wavevector.
#[derive(Debug, Clone, Copy)]
pub struct ChiralRates {
    /// Rate into left-moving resonant modes (rad/s).
    pub gamma_left: f64,
    /// Rate into right-moving resonant modes (rad/s).
    pub gamma_right: f64,
    /// Resonant wavevector magnitude (1/m).
    pub k_res: f64,
    /// Group velocity at +k_res (m/s in the model units).
    pub v_res: f64,
    /// Lamb shift (rad/s) when it was evaluated.
    pub lamb_shift: Option<f64>,
}

impl ChiralRates {
    pub fn total(&self) -> f64 {
        self.gamma_left + self.gamma_right
    }

    /// Chirality gamma_L / gamma_R.
    pub fn chirality(&self) -> f64 {
        self.gamma_left / self.gamma_right
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::ZETA_3;
    use std::f64::consts::PI;

    /// Dipolar hopping list J_m = j1 / m^3.
    pub(crate) fn dipolar(j1: f64, m_max: usize) -> Vec<f64> {
        (1..=m_max).map(|m| j1 / (m as f64).powi(3)).collect()
    }

    #[test]
    fn half_pi_resonance_of_dipolar_band() {
        // J_m = -|J1|/m^3 with Delta_B = (3/16) zeta(3) J1 puts the band
        // zero exactly at ka = +-pi/2 (alternating even-m series).
        let j1 = -1.0;
        let a = 1.0;
        let model = DispersionModel::symmetric(
            a,
            dipolar(j1, 20_000),
            3.0 / 16.0 * ZETA_3 * j1,
            C64::default(),
            vec![],
            Convention::OnSite,
        );
        assert!(model.dispersion(PI / 2.0).abs() < 1e-10);
        assert!(model.dispersion(-PI / 2.0).abs() < 1e-10);
    }

    #[test]
    fn nearest_neighbor_band_edges() {
        let model = DispersionModel::symmetric(
            1.0,
            vec![0.7],
            0.3,
            C64::default(),
            vec![],
            Convention::OnSite,
        );
        // k = 0: omega = -Delta_B - 2 J1.
        assert!((model.dispersion(0.0) - (-0.3 - 1.4)).abs() < 1e-14);
        // Group velocity antisymmetric.
        for k in [0.3, 1.1, 2.9] {
            assert!((model.group_velocity(-k) + model.group_velocity(k)).abs() < 1e-14);
        }
    }

    #[test]
    fn group_velocity_matches_finite_difference() {
        let model = DispersionModel::symmetric(
            0.7,
            vec![1.0, -0.3, 0.05],
            0.1,
            C64::default(),
            vec![],
            Convention::OnSite,
        );
        let h = 1e-6;
        for k in [-3.0, -1.0, 0.4, 2.2] {
            let fd = (model.dispersion(k + h) - model.dispersion(k - h)) / (2.0 * h);
            assert!(
                (model.group_velocity(k) - fd).abs() < 1e-6,
                "k={k}: {} vs {}",
                model.group_velocity(k),
                fd
            );
        }
    }

    #[test]
    fn resonant_wavevector_roundtrip() {
        let model = DispersionModel::symmetric(
            1.0,
            dipolar(-1.0, 50),
            3.0 / 16.0 * ZETA_3 * -1.0,
            C64::default(),
            vec![],
            Convention::OnSite,
        );
        // Random in-band targets: plug-back |omega(k) + Delta_S| small.
        for delta_s in [-0.6, -0.2, 0.0, 0.35, 0.9] {
            let k = model.resonant_wavevector(delta_s).unwrap();
            assert!(
                (model.dispersion(k) + delta_s).abs() < 1e-9,
                "delta_s={delta_s}"
            );
        }
    }

    #[test]
    fn nearest_neighbor_band_edge_root() {
        // Delta_S = Delta_B + 2 J1 targets omega = -Delta_B - 2J1 at k=0;
        // the smallest positive root collapses to the band edge.
        let j1 = 0.8;
        let db = 0.2;
        let model = DispersionModel::symmetric(
            1.0,
            vec![j1],
            db,
            C64::default(),
            vec![],
            Convention::OnSite,
        );
        let k = model.resonant_wavevector(db + 2.0 * j1).unwrap();
        assert!(k < 2e-3, "k = {k}");
    }

    #[test]
    fn out_of_band_is_an_error() {
        let model = DispersionModel::symmetric(
            1.0,
            vec![1.0],
            0.0,
            C64::default(),
            vec![],
            Convention::OnSite,
        );
        assert!(matches!(
            model.resonant_wavevector(10.0),
            Err(Error::NoResonantMode { .. })
        ));
    }

    #[test]
    fn gk_parity_without_phases() {
        let model = DispersionModel::symmetric(
            1.0,
            vec![1.0],
            0.0,
            C64::new(0.3, 0.0),
            vec![
                SideCoupling {
                    strength: C64::new(-0.2, 0.0),
                    phase: 0.0,
                },
                SideCoupling {
                    strength: C64::new(0.05, 0.0),
                    phase: 0.0,
                },
            ],
            Convention::BondCentered,
        );
        for k in [0.2, 0.9, 2.0, 3.0] {
            let gp = model.coupling_gk(k).norm();
            let gm = model.coupling_gk(-k).norm();
            assert!((gp - gm).abs() < 1e-12 * gp.max(1e-30));
        }
    }

    #[test]
    fn ion_convention_cancels_left_movers() {
        // s = 0, J0 = 2 J1, phi_1 = -pi/2: g(+pi/2a) = 0 and
        // g(-pi/2a) = sqrt(a/2pi) * 4 J1 (the Eq. 16-style asymmetry).
        let jt1 = 0.35;
        let a = 1.0;
        let model = DispersionModel::symmetric(
            a,
            vec![-1.0],
            0.0,
            C64::new(2.0 * jt1, 0.0),
            vec![SideCoupling {
                strength: C64::new(jt1, 0.0),
                phase: -PI / 2.0,
            }],
            Convention::OnSite,
        );
        let gp = model.coupling_gk(PI / 2.0 / a);
        let gm = model.coupling_gk(-PI / 2.0 / a);
        assert!(gp.norm() < 1e-14);
        let want = (a / (2.0 * PI)).sqrt() * 4.0 * jt1;
        assert!((gm.norm() - want).abs() < 1e-12);
    }
}
