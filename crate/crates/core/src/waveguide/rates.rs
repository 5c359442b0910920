//! Emission rates into resonant left/right movers and the principal-value
//! Lamb shift.

use super::dispersion::{ChiralRates, DispersionModel};
use crate::{C64, Error, Result};
use std::f64::consts::PI;

/// Relative band-edge guard on |v| (in units of |J_1| a).
const BAND_EDGE_GUARD: f64 = 1e-6;

/// Lamb-shift handling in `chiral_rates`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LambShiftMode {
    /// Rates at the bare resonance; no Lamb shift evaluated.
    #[default]
    Off,
    /// Evaluate the shift for diagnostics, keep the bare resonance.
    Evaluate,
    /// One fixed-point sweep: re-solve the resonance at
    /// Delta_S + omega_LS and take the rates there.
    SelfConsistent,
}

impl DispersionModel {
    /// Emission rates 2 pi |g|^2 / |v| into the resonant left- and
    /// right-moving modes. Left/right are assigned by the sign of the group
    /// velocity, so the result is independent of the hopping sign
    /// convention.
    pub fn chiral_rates(&self, detuning_sys: f64, mode: LambShiftMode) -> Result<ChiralRates> {
        let mut delta_eff = detuning_sys;
        let mut lamb = None;
        if mode != LambShiftMode::Off {
            let shift = self.lamb_shift(detuning_sys)?;
            lamb = Some(shift);
            if mode == LambShiftMode::SelfConsistent {
                delta_eff += shift;
            }
        }
        let k = self.resonant_wavevector(delta_eff)?;
        let v = self.group_velocity(k);
        let j1_scale = self
            .hoppings
            .first()
            .map(|j| j.abs())
            .unwrap_or(1.0)
            .max(f64::MIN_POSITIVE);
        let guard = BAND_EDGE_GUARD * j1_scale * self.lattice_constant;
        if v.abs() < guard {
            return Err(Error::BandEdge {
                vg: v.abs(),
                guard,
            });
        }
        let (k_right, k_left) = if v > 0.0 { (k, -k) } else { (-k, k) };
        let g_r = self.coupling_gk(k_right).norm_sqr();
        let g_l = self.coupling_gk(k_left).norm_sqr();
        Ok(ChiralRates {
            gamma_left: 2.0 * PI * g_l / v.abs(),
            gamma_right: 2.0 * PI * g_r / v.abs(),
            k_res: k,
            v_res: v,
            lamb_shift: lamb,
        })
    }

    /// Lamb shift omega_LS = P int_{-pi/a}^{pi/a} dk |g_k|^2 / (omega_k +
    /// Delta_S), by symmetric excision around the resonant poles with
    /// Richardson extrapolation of the excision radius.
    pub fn lamb_shift(&self, detuning_sys: f64) -> Result<f64> {
        let a = self.lattice_constant;
        let f = |k: f64| self.coupling_gk(k).norm_sqr() / (self.dispersion(k) + detuning_sys);
        let lim = PI / a;
        let poles = match self.resonant_wavevector(detuning_sys) {
            Ok(k) => vec![-k, k],
            Err(Error::NoResonantMode { .. }) => vec![],
            Err(e) => return Err(e),
        };
        Ok(principal_value_integral(&f, -lim, lim, &poles))
    }
}

/// Chirality ratio gamma_L / gamma_R = |1 - x|^2 / |1 + x|^2 with
/// x = J0 / (2 J1) for an on-site-coupled waveguide with phase -pi/2.
pub fn local_coupling_chirality(j0: C64, jt1: C64) -> f64 {
    let x = j0 / (jt1 * 2.0);
    let one = C64::new(1.0, 0.0);
    (one - x).norm_sqr() / (one + x).norm_sqr()
}

/// P int_a^b f(x) dx with simple poles listed in `poles`: symmetric
/// excision of radius eps around each pole, adaptive quadrature on the
/// remaining segments, and two-level Richardson extrapolation in eps.
pub fn principal_value_integral<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    poles: &[f64],
) -> f64 {
    let mut poles: Vec<f64> = poles.iter().copied().filter(|p| *p > a && *p < b).collect();
    poles.sort_by(|x, y| x.partial_cmp(y).unwrap());
    if poles.is_empty() {
        return adaptive_simpson(f, a, b, 1e-11);
    }
    // Largest excision radius that keeps the excised intervals inside the
    // domain and disjoint. Small enough that the residual eps^5 term after
    // extrapolation is negligible.
    let mut eps0 = (b - a) / 64.0;
    for (i, &p) in poles.iter().enumerate() {
        eps0 = eps0.min((p - a) / 4.0).min((b - p) / 4.0);
        if i + 1 < poles.len() {
            eps0 = eps0.min((poles[i + 1] - p) / 4.0);
        }
    }
    let excised = |eps: f64| -> f64 {
        let mut total = 0.0;
        let mut lo = a;
        for &p in &poles {
            total += adaptive_simpson(f, lo, p - eps, 1e-11);
            lo = p + eps;
        }
        total + adaptive_simpson(f, lo, b, 1e-11)
    };
    let i0 = excised(eps0);
    let i1 = excised(eps0 / 2.0);
    let i2 = excised(eps0 / 4.0);
    // Error model c1 eps + c3 eps^3: first level kills c1, second c3.
    let r0 = 2.0 * i1 - i0;
    let r1 = 2.0 * i2 - i1;
    (8.0 * r1 - r0) / 7.0
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_recurse(f, a, b, fa, fm, fb, whole, tol * (1.0 + whole.abs()), 40)
}

#[allow(clippy::too_many_arguments)]
fn simpson_recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_recurse(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1)
        + simpson_recurse(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1)
}
