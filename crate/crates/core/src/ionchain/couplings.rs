//! Laser-induced couplings: the third-order non-local system-bath coupling,
//! second-order shifts, and their compensation.

use super::modes::NormalModes;
use super::IonChainSpec;
use crate::{C64, Error, Result};
use nalgebra::DMatrix;

fn guard_denominator(name: &str, value: f64, scale: f64) -> Result<f64> {
    if value.abs() < 1e-9 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::SingularConfiguration(format!(
            "denominator {name} = {value:.3e} within 1e-9 of zero"
        )));
    }
    Ok(value)
}

/// The dimensionless third-order weight q_{n n'}, evaluated literally.
///
/// `n` and `n'` are 0-based mode indices; Delta-omega_n is measured from the
/// working point omega_bar and delta-omega_{n'} from the lowest mode.
pub fn q_factor(
    modes: &NormalModes,
    omega_bar: f64,
    n: usize,
    n_prime: usize,
    delta1: f64,
    delta2: f64,
    detuning_sys: f64,
) -> Result<f64> {
    let dw_n = modes.frequencies[n] - omega_bar;
    let dw_p = modes.frequencies[n_prime] - modes.reference_frequency();
    q_factor_raw(dw_n, dw_p, delta1, delta2, detuning_sys)
}

/// q_{n n'} from the raw frequency offsets (exposed for the algebraic
/// collapse checks).
pub fn q_factor_raw(
    dw_n: f64,
    dw_p: f64,
    delta1: f64,
    delta2: f64,
    detuning_sys: f64,
) -> Result<f64> {
    let scale = delta1.abs().max(delta2.abs());
    let d1a = guard_denominator("delta1 + dw' - dw", delta1 + dw_p - dw_n, scale)?;
    let d1b = guard_denominator("delta2 + dw", delta2 + dw_n, scale)?;
    let d1c = guard_denominator("delta1 + delta2 + dw'", delta1 + delta2 + dw_p, scale)?;
    let d1d = guard_denominator("delta1 + dw' + Delta_S", delta1 + dw_p + detuning_sys, scale)?;
    let d2c = guard_denominator("delta2 - Delta_S", delta2 - detuning_sys, scale)?;

    let term1 = delta1 * delta2 * (delta1 + 2.0 * delta2 + dw_p + dw_n)
        * (4.0 * delta1 + 4.0 * dw_p - dw_n + 3.0 * detuning_sys)
        / (12.0 * d1a * d1b * d1c * d1d);
    let term2 = delta1 * delta2 * (2.0 * delta1 + delta2 + 2.0 * dw_p + detuning_sys)
        * (4.0 * delta2 + 3.0 * dw_n - detuning_sys)
        / (12.0 * d1d * d1b * d2c * d1c);
    Ok(term1 + term2)
}

/// Side label for the auxiliary-ion couplings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Compiled couplings of one system spin to its two adjacent auxiliary-ion
/// vibrations.
#[derive(Debug, Clone, Copy)]
pub struct SpinCouplings {
    /// (Jt_1^{(alpha, L)}, phi_1^{(alpha, L)}).
    pub left: (C64, f64),
    /// (Jt_1^{(alpha, R)}, phi_1^{(alpha, R)}).
    pub right: (C64, f64),
}

/// Residual coupling of spin alpha to an auxiliary ion of another spin
/// alpha'.
#[derive(Debug, Clone)]
pub struct LongRangeCoupling {
    pub spin: usize,
    pub other_spin: usize,
    pub side: Side,
    /// 1-based site of the other spin's auxiliary ion.
    pub site: usize,
    /// Full complex weight (phase factors included).
    pub weight: C64,
    /// |weight| / |Jt_1| of the local pair on the same side.
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct ThirdOrderCouplings {
    pub per_spin: Vec<SpinCouplings>,
    pub long_range: Vec<LongRangeCoupling>,
    /// Worst-case |Jt M| / |delta-omega_n| over off-resonant modes, the
    /// rotating-wave budget of extending the mode sum (reported, not
    /// thresholded).
    pub rwa_worst_ratio: f64,
}

/// Eq.-(20)-style mode sum: sum_n M_c^n M_nu^n / (delta1 + dw_n).
fn mode_sum(
    modes: &NormalModes,
    site_a: usize,
    site_b: usize,
    delta1: f64,
) -> Result<f64> {
    let reference = modes.reference_frequency();
    let mut acc = 0.0;
    for n in 0..modes.len() {
        let dw = modes.frequencies[n] - reference;
        let den = guard_denominator("delta1 + dw_n", delta1 + dw, delta1.abs())?;
        acc += modes.amplitude(site_a, n) * modes.amplitude(site_b, n) / den;
    }
    Ok(acc)
}

/// Third-order non-local couplings for every system spin, plus the residual
/// long-range terms to other spins' auxiliary ions.
pub fn third_order_couplings(
    spec: &IonChainSpec,
    positions: &[f64],
    modes: &NormalModes,
) -> Result<ThirdOrderCouplings> {
    let [d1, d2, _, _] = spec.detunings;
    let l1 = &spec.lasers[1];
    let l2 = &spec.lasers[2];
    let l3 = &spec.lasers[3];
    let prefactor = C64::new(0.0, 1.0) * l1.eta * l2.eta * l3.eta * l1.rabi * l2.rabi * l3.rabi
        / (8.0 * d2);
    let k3 = l3.kz;

    let mut per_spin = Vec::new();
    for &c in &spec.sys_sites {
        let mut side_coupling = |aux: usize| -> Result<(C64, f64)> {
            let phase = -k3 * (positions[aux - 1] - positions[c - 1]).abs();
            let strength = prefactor * mode_sum(modes, c, aux, d1)?;
            Ok((strength, phase))
        };
        per_spin.push(SpinCouplings {
            left: side_coupling(c - 1)?,
            right: side_coupling(c + 1)?,
        });
    }

    // Long-range terms: spin alpha to the auxiliary ions of spin alpha'.
    let mut long_range = Vec::new();
    for (alpha, &c) in spec.sys_sites.iter().enumerate() {
        for (alpha_p, &cp) in spec.sys_sites.iter().enumerate() {
            if alpha_p == alpha {
                continue;
            }
            for (side, aux) in [(Side::Left, cp - 1), (Side::Right, cp + 1)] {
                let lattice_phase =
                    C64::from_polar(1.0, -k3 * (positions[cp - 1] - positions[c - 1]));
                let strength = prefactor * mode_sum(modes, c, aux, d1)? * lattice_phase;
                let local = per_spin[alpha];
                let local_mag = match side {
                    Side::Left => local.left.0.norm(),
                    Side::Right => local.right.0.norm(),
                };
                let aux_phase = match side {
                    Side::Left => per_spin[alpha_p].left.1,
                    Side::Right => per_spin[alpha_p].right.1,
                };
                let nu = match side {
                    Side::Left => -1.0,
                    Side::Right => 1.0,
                };
                long_range.push(LongRangeCoupling {
                    spin: alpha,
                    other_spin: alpha_p,
                    side,
                    site: aux,
                    weight: strength * C64::from_polar(1.0, nu * aux_phase),
                    ratio: strength.norm() / local_mag.max(f64::MIN_POSITIVE),
                });
            }
        }
    }

    // Rotating-wave budget: |Jt M_nu^n| / |omega_tilde_n - omega_bar| over
    // modes away from the working point.
    let omega_bar = spec.resolved_omega_bar(modes);
    let mut worst: f64 = 0.0;
    for sc in &per_spin {
        let jt = sc.left.0.norm().max(sc.right.0.norm());
        for n in 0..modes.len() {
            let dw = (modes.frequencies[n] - omega_bar).abs();
            if dw > 1e-6 * spec.omega_x {
                worst = worst.max(jt / dw);
            }
        }
    }

    Ok(ThirdOrderCouplings {
        per_spin,
        long_range,
        rwa_worst_ratio: worst,
    })
}

/// Second-order AC-Stark shifts and phonon-mediated spin-spin couplings.
#[derive(Debug, Clone)]
pub struct SecondOrderShifts {
    /// J_S^{alpha alpha'} flip-flop matrix (N_S x N_S).
    pub spin_spin: DMatrix<C64>,
    /// Localized phonon shift at auxiliary-ion sites (rad/s).
    pub bath_aux: f64,
    /// Localized phonon shift at system-ion sites (rad/s).
    pub bath_sys: f64,
}

pub fn second_order_shifts(
    spec: &IonChainSpec,
    positions: &[f64],
    modes: &NormalModes,
) -> Result<SecondOrderShifts> {
    let [d1, d2, _, _] = spec.detunings;
    let l1 = &spec.lasers[1];
    let l2 = &spec.lasers[2];
    let l3 = &spec.lasers[3];
    let k3 = l3.kz;
    let reference = modes.reference_frequency();
    let omega_bar = spec.resolved_omega_bar(modes);

    let ns = spec.sys_sites.len();
    let mut spin_spin = DMatrix::<C64>::zeros(ns, ns);
    for (a, &ca) in spec.sys_sites.iter().enumerate() {
        for (b, &cb) in spec.sys_sites.iter().enumerate() {
            let mut acc = 0.0;
            for n in 0..modes.len() {
                let dw = modes.frequencies[n] - reference;
                let den = guard_denominator(
                    "delta1 + dw_n + Delta_S",
                    d1 + dw + spec.detuning_sys,
                    d1.abs(),
                )?;
                acc += modes.amplitude(ca, n) * modes.amplitude(cb, n) / den;
            }
            let phase = C64::from_polar(1.0, -k3 * (positions[cb - 1] - positions[ca - 1]));
            spin_spin[(a, b)] =
                C64::new(-l1.eta * l1.eta * l1.rabi * l1.rabi / 4.0 * acc, 0.0) * phase;
        }
    }

    let gap = omega_bar - reference;
    let den_a2 = guard_denominator("delta1 + delta2 + gap", d1 + d2 + gap, d1.abs())?;
    let den_s = guard_denominator("delta1 + gap", d1 + gap, d1.abs())?;
    let bath_aux =
        l3.eta * l3.eta * l3.rabi * l3.rabi / (4.0 * d2) + l2.eta * l2.eta * l2.rabi * l2.rabi / (4.0 * den_a2);
    let bath_sys = l1.eta * l1.eta * l1.rabi * l1.rabi / (4.0 * den_s);
    Ok(SecondOrderShifts {
        spin_spin,
        bath_aux,
        bath_sys,
    })
}

/// Compensation intensities for lasers 4 and 5 at fixed delta3, delta4:
/// the counter-shifts -eta4^2 |Omega4|^2 / [4 (delta3 + omega_x - omega_bar)]
/// and -eta5^2 |Omega5|^2 / (4 delta4) cancel the second-order bath shifts.
#[derive(Debug, Clone, Copy)]
pub struct CompensationSolution {
    pub rabi4: f64,
    pub rabi5: f64,
    /// Residual shifts after compensation (plug-back check).
    pub residual_sys: f64,
    pub residual_aux: f64,
}

pub fn compensation_lasers(
    spec: &IonChainSpec,
    modes: &NormalModes,
    targets: &SecondOrderShifts,
) -> Result<CompensationSolution> {
    let [_, _, d3, d4] = spec.detunings;
    let l4 = &spec.lasers[4];
    let l5 = &spec.lasers[5];
    let omega_bar = spec.resolved_omega_bar(modes);

    if targets.bath_sys == 0.0 && targets.bath_aux == 0.0 {
        return Ok(CompensationSolution {
            rabi4: 0.0,
            rabi5: 0.0,
            residual_sys: 0.0,
            residual_aux: 0.0,
        });
    }

    let den4 = d3 + spec.omega_x - omega_bar;
    let sq4 = 4.0 * den4 * targets.bath_sys / (l4.eta * l4.eta);
    let sq5 = 4.0 * d4 * targets.bath_aux / (l5.eta * l5.eta);
    if sq4 < 0.0 || sq5 < 0.0 {
        return Err(Error::Compensation(format!(
            "negative intensity required (|Omega4|^2 ~ {sq4:.3e}, |Omega5|^2 ~ {sq5:.3e}); \
             choose detunings on the other side of the band"
        )));
    }
    let rabi4 = sq4.sqrt();
    let rabi5 = sq5.sqrt();
    let cor_sys = -l4.eta * l4.eta * rabi4 * rabi4 / (4.0 * den4);
    let cor_aux = -l5.eta * l5.eta * rabi5 * rabi5 / (4.0 * d4);
    Ok(CompensationSolution {
        rabi4,
        rabi5,
        residual_sys: targets.bath_sys + cor_sys,
        residual_aux: targets.bath_aux + cor_aux,
    })
}
