//! Compiles a trapped-ion chain into an abstract chiral-network model.
//!
//! The radial vibrations of the ions form the waveguide; two internal
//! levels of selected ions form the system spins. One global laser drives a
//! red-sideband local coupling, and a three-laser third-order process
//! couples each system spin to the vibrations of its two adjacent
//! "auxiliary" ions with geometric phases set by the axial wavevector of
//! the third laser. Localized cooling at the chain ends provides the sinks.

mod compile;
mod couplings;
mod equilibrium;
mod modes;
mod validity;

pub use compile::{compile, dispersion_for_ion, CompiledIonChain};
pub use couplings::{
    compensation_lasers, q_factor, q_factor_raw, second_order_shifts, third_order_couplings,
    CompensationSolution, LongRangeCoupling, SecondOrderShifts, Side, SpinCouplings,
    ThirdOrderCouplings,
};
pub use equilibrium::{equilibrium_dimensionless, equilibrium_positions, length_scale};
pub use modes::{normal_modes, normal_modes_with_local, radial_hoppings, rwa_ratio, NormalModes};
pub use validity::{validity_check, CheckStatus, ValidityCheck, ValidityReport};

use crate::{C64, Error, Result};

/// Chain geometry source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IonLayout {
    /// Equilibrium positions of a harmonic axial trap (inhomogeneous).
    PaulTrap,
    /// Equidistant ions (microtrap array), spacing in meters.
    Homogeneous { spacing: f64 },
}

/// One global laser: the Rabi frequency on the transition it addresses
/// (system transition for p = 0, 1, 4; auxiliary transition for p = 2, 3,
/// 5), its radial Lamb-Dicke parameter and its axial wavevector.
#[derive(Debug, Clone, Copy, Default)]
pub struct Laser {
    /// Rabi frequency (rad/s).
    pub rabi: f64,
    /// Radial Lamb-Dicke parameter eta_p.
    pub eta: f64,
    /// Axial wavevector k_p^z (1/m).
    pub kz: f64,
}

/// Shape of the boundary cooling profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SinkProfile {
    /// Rates grow quadratically towards the boundary.
    #[default]
    Quadratic,
    Linear,
    Constant,
}

/// Localized cooling at the chain ends.
#[derive(Debug, Clone, Copy)]
pub struct IonSinkConfig {
    pub count_left: usize,
    pub count_right: usize,
    /// Rate at the outermost left/right site (rad/s).
    pub max_rate_left: f64,
    pub max_rate_right: f64,
    pub profile: SinkProfile,
}

impl IonSinkConfig {
    /// Rates ordered n = 1 (boundary site) inwards.
    pub fn rates(&self, count: usize, max_rate: f64, profile: SinkProfile) -> Vec<f64> {
        (1..=count)
            .map(|n| {
                let frac = (count + 1 - n) as f64 / count as f64;
                match profile {
                    SinkProfile::Quadratic => max_rate * frac * frac,
                    SinkProfile::Linear => max_rate * frac,
                    SinkProfile::Constant => max_rate,
                }
            })
            .collect()
    }

    pub fn left_rates(&self) -> Vec<f64> {
        self.rates(self.count_left, self.max_rate_left, self.profile)
    }

    pub fn right_rates(&self) -> Vec<f64> {
        self.rates(self.count_right, self.max_rate_right, self.profile)
    }
}

/// Pinned coupling values overriding the laser-derived ones, for
/// configurations quoted directly in coupling units.
#[derive(Debug, Clone, Copy, Default)]
pub struct CouplingOverrides {
    /// Local coupling J0.
    pub local: Option<C64>,
    /// (Jt_1^{(alpha, L)}, phi_1^{(alpha, L)}) applied to every spin.
    pub left: Option<(C64, f64)>,
    pub right: Option<(C64, f64)>,
}

/// Trapped-ion chain parameter set.
#[derive(Debug, Clone)]
pub struct IonChainSpec {
    pub n_bath: usize,
    /// Ion mass (kg).
    pub mass: f64,
    /// Ion charge (C).
    pub charge: f64,
    /// Radial trap frequency (rad/s).
    pub omega_x: f64,
    /// Axial trap frequency (rad/s).
    pub omega_z: f64,
    pub layout: IonLayout,
    /// Working point omega_bar; None selects the median normal-mode
    /// frequency (Paul trap) or the quarter-zone band resonance
    /// (homogeneous layout).
    pub omega_bar: Option<f64>,
    /// System-spin sites c[alpha], 1-based; auxiliary ions sit at c +- 1.
    pub sys_sites: Vec<usize>,
    /// Lasers p = 0..=5 (4 and 5 are the optional compensation pair).
    pub lasers: [Laser; 6],
    /// Detunings delta_1..delta_4 (rad/s).
    pub detunings: [f64; 4],
    /// Carrier detuning Delta_S (rad/s).
    pub detuning_sys: f64,
    /// Carrier drive Omega_d (rad/s).
    pub drive: C64,
    pub sinks: IonSinkConfig,
    pub excitation_cap: u32,
    /// Per-site phonon cutoff for the truncated simulation basis.
    pub boson_cutoff: u32,
    pub coupling_overrides: CouplingOverrides,
    /// Long-range couplings below this fraction of the local Jt_1 are
    /// dropped from the compiled model (still reported).
    pub long_range_threshold: f64,
}

impl IonChainSpec {
    /// Ion positions along the trap axis (m).
    pub fn positions(&self) -> Result<Vec<f64>> {
        match self.layout {
            IonLayout::PaulTrap => {
                if self.n_bath < 2 {
                    return Err(Error::InvalidModel(
                        "Paul-trap layout needs at least two ions".into(),
                    ));
                }
                equilibrium_positions(self.n_bath, self.omega_z, self.mass, self.charge)
            }
            IonLayout::Homogeneous { spacing } => {
                if spacing <= 0.0 {
                    return Err(Error::InvalidModel("spacing must be positive".into()));
                }
                Ok((0..self.n_bath).map(|j| j as f64 * spacing).collect())
            }
        }
    }

    /// Average distance between neighboring ions.
    pub fn mean_spacing(&self) -> Result<f64> {
        let p = self.positions()?;
        Ok((p[p.len() - 1] - p[0]) / (p.len() - 1) as f64)
    }

    /// Resolve the working point: explicit value, or the layout default.
    pub fn resolved_omega_bar(&self, modes: &NormalModes) -> f64 {
        if let Some(w) = self.omega_bar {
            return w;
        }
        match self.layout {
            IonLayout::PaulTrap => modes.median_frequency(),
            IonLayout::Homogeneous { spacing } => {
                // Lab frequency of the kappa = pi/2 band mode:
                // omega_x + 2 sum_m J_m (1 - cos(m pi/2)).
                let prefactor = -self.charge * self.charge
                    / (8.0
                        * std::f64::consts::PI
                        * crate::constants::VACUUM_PERMITTIVITY
                        * self.mass
                        * self.omega_x);
                let mut w = self.omega_x;
                for m in 1..self.n_bath {
                    let jm = prefactor / (m as f64 * spacing).powi(3);
                    w += 2.0 * jm * (1.0 - (m as f64 * std::f64::consts::FRAC_PI_2).cos());
                }
                w
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_bath < 3 {
            return Err(Error::InvalidModel("need at least three ions".into()));
        }
        for &c in &self.sys_sites {
            if c < 2 || c > self.n_bath - 1 {
                return Err(Error::InvalidModel(format!(
                    "system site {c} needs auxiliary neighbors inside the chain"
                )));
            }
        }
        if self.detunings[0] <= 0.0 || self.detunings[1] <= 0.0 {
            return Err(Error::InvalidModel(
                "delta_1 and delta_2 must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Shared test fixtures.
#[cfg(test)]
pub(crate) mod tests_support {
    use super::*;
    use crate::constants::{ATOMIC_MASS_UNIT, ELEMENTARY_CHARGE};
    use std::f64::consts::TAU;

    /// The reference working point: 16 ions, omega_x = 2 pi x 3 MHz,
    /// omega_z = 0.05 omega_x, |Omega_1|, |Omega_2'|, |Omega_3'| =
    /// 0.15 omega_x, delta_1 = delta_2 = 0.015 omega_x, eta_p = 0.1.
    pub fn paper_point_spec() -> IonChainSpec {
        let omega_x = TAU * 3e6;
        let laser = |rabi: f64| Laser {
            rabi,
            eta: 0.1,
            kz: 0.0,
        };
        IonChainSpec {
            n_bath: 16,
            mass: 40.0 * ATOMIC_MASS_UNIT,
            charge: ELEMENTARY_CHARGE,
            omega_x,
            omega_z: 0.05 * omega_x,
            layout: IonLayout::PaulTrap,
            omega_bar: Some(0.964 * omega_x),
            sys_sites: vec![6],
            lasers: [
                laser(0.02 * omega_x),
                laser(0.15 * omega_x),
                laser(0.15 * omega_x),
                laser(0.15 * omega_x),
                Laser::default(),
                Laser::default(),
            ],
            detunings: [0.015 * omega_x, 0.015 * omega_x, 0.015 * omega_x, 0.015 * omega_x],
            detuning_sys: 0.0,
            drive: C64::default(),
            sinks: IonSinkConfig {
                count_left: 1,
                count_right: 7,
                max_rate_left: 0.027 * omega_x,
                max_rate_right: 0.27 * omega_x,
                profile: SinkProfile::Quadratic,
            },
            excitation_cap: 1,
            boson_cutoff: 1,
            coupling_overrides: CouplingOverrides::default(),
            long_range_threshold: 0.05,
        }
    }
}
