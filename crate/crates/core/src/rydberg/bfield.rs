//! Magnetic field that makes the angular-momentum-changing flip-flop
//! resonant.

use crate::constants::{BOHR_MAGNETON, HBAR};
use crate::{Error, Result};

/// Lande g-factors of the two Rydberg manifolds. The defaults are the
/// alkali S_1/2 and P_1/2 values.
#[derive(Debug, Clone, Copy)]
pub struct LandeFactors {
    pub g_s: f64,
    pub g_p: f64,
}

impl Default for LandeFactors {
    fn default() -> Self {
        Self {
            g_s: 2.0,
            g_p: 2.0 / 3.0,
        }
    }
}

/// Resonance mechanism.
#[derive(Debug, Clone, Copy)]
pub enum BFieldMode {
    /// Electric-field-gradient option: differential DC Stark shifts
    /// E_B - E_S (rad/s) between bath and system spins.
    Gradient { stark_difference: f64 },
    /// Foerster-resonance option: zero-field defect
    /// omega_B0 - omega_S0 (rad/s).
    Foerster { defect: f64 },
}

/// Field B = hbar * (energy difference) / [mu_B (g_S + g_P)] (tesla) that
/// equalizes the system and bath transition frequencies.
pub fn resonance_bfield(mode: BFieldMode, lande: LandeFactors) -> Result<f64> {
    let denom = lande.g_s + lande.g_p;
    if denom == 0.0 {
        return Err(Error::SingularConfiguration(
            "g_S + g_P must be nonzero".into(),
        ));
    }
    let energy = match mode {
        BFieldMode::Gradient { stark_difference } => stark_difference,
        BFieldMode::Foerster { defect } => defect,
    };
    Ok(HBAR * energy / (BOHR_MAGNETON * denom))
}
