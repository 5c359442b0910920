//! Lowering the ion-chain spec onto the abstract network model.

use super::couplings::{second_order_shifts, third_order_couplings, ThirdOrderCouplings};
use super::modes::{normal_modes, radial_hoppings, rwa_ratio, NormalModes};
use super::validity::{validity_check, CheckStatus, ValidityReport};
use super::{IonChainSpec, IonLayout};
use crate::netmodel::{Hoppings, NeighborCoupling, NetworkModel, SystemSpin, WaveguideKind};
use crate::waveguide::{Convention, DispersionModel, SideCoupling};
use crate::{C64, Error, Result};

/// Compiled chain: the runnable network model plus the physics it was
/// derived from.
pub struct CompiledIonChain {
    pub model: NetworkModel,
    pub positions: Vec<f64>,
    pub modes: NormalModes,
    pub omega_bar: f64,
    pub couplings: ThirdOrderCouplings,
    pub validity: ValidityReport,
    /// Human-readable imperfection ledger (ratios of residual shifts and
    /// dropped long-range couplings).
    pub diagnostics: Vec<String>,
}

/// Compile the spec. Fails when the validity report carries a hard failure
/// or a denominator degenerates.
pub fn compile(spec: &IonChainSpec) -> Result<CompiledIonChain> {
    spec.validate()?;
    let positions = spec.positions()?;
    // The hopping matrix is omega_bar-independent; build it first with a
    // placeholder frame, resolve omega_bar from the modes, then assemble the
    // per-site detunings in the resolved frame.
    let (j_mat, _) = radial_hoppings(
        &positions,
        spec.omega_x,
        spec.mass,
        spec.charge,
        spec.omega_x,
    )?;
    // Local lab frequencies: physical Coulomb-softened values for a Paul
    // trap; ideal uniform bulk values for a microtrap (homogeneous) chain.
    let local_freqs: Vec<f64> = match spec.layout {
        IonLayout::PaulTrap => (0..spec.n_bath)
            .map(|site| spec.omega_x + j_mat.row(site).sum())
            .collect(),
        IonLayout::Homogeneous { .. } => {
            let bulk_sum: f64 = 2.0 * (1..spec.n_bath).map(|m| j_mat[(0, m)]).sum::<f64>();
            vec![spec.omega_x + bulk_sum; spec.n_bath]
        }
    };
    let modes = super::modes::normal_modes_with_local(&j_mat, &local_freqs)?;
    let omega_bar = spec.resolved_omega_bar(&modes);

    let validity = validity_check(spec, Some(&j_mat));
    if validity.overall() == CheckStatus::Fail {
        let names: Vec<String> = validity.failed().iter().map(|c| c.name.clone()).collect();
        return Err(Error::InvalidModel(format!(
            "validity check failed: {}",
            names.join("; ")
        )));
    }

    // Rotating-frame detunings: -Delta_B^(j) is the local frequency above
    // omega_bar.
    let detuning_bath: Vec<f64> = local_freqs.iter().map(|&f| omega_bar - f).collect();

    let couplings = third_order_couplings(spec, &positions, &modes)?;
    let shifts = second_order_shifts(spec, &positions, &modes)?;

    let local = spec
        .coupling_overrides
        .local
        .unwrap_or_else(|| C64::new(0.0, -0.5) * spec.lasers[0].eta * spec.lasers[0].rabi);

    let mut diagnostics = Vec::new();
    let max_j = j_mat.amax();
    diagnostics.push(format!(
        "rotating-wave guard max|J|/omega_x = {:.3e}",
        rwa_ratio(&j_mat, spec.omega_x)
    ));
    diagnostics.push(format!(
        "second-order bath shifts: |dDelta_B_sys|/max|J| = {:.3e}, |dDelta_B_aux|/max|J| = {:.3e}",
        shifts.bath_sys.abs() / max_j,
        shifts.bath_aux.abs() / max_j
    ));
    let mut off_diag: f64 = 0.0;
    for a in 0..shifts.spin_spin.nrows() {
        for b in 0..shifts.spin_spin.ncols() {
            if a != b {
                off_diag = off_diag.max(shifts.spin_spin[(a, b)].norm());
            }
        }
    }
    diagnostics.push(format!(
        "spin-spin flip-flop max|J_S| = {:.3e} rad/s",
        off_diag
    ));
    diagnostics.push(format!(
        "mode-sum rotating-wave worst |Jt M|/|dw| = {:.3e}",
        couplings.rwa_worst_ratio
    ));

    let mut spins = Vec::new();
    for (alpha, &c) in spec.sys_sites.iter().enumerate() {
        let sc = &couplings.per_spin[alpha];
        let (jl, pl) = spec.coupling_overrides.left.unwrap_or(sc.left);
        let (jr, pr) = spec.coupling_overrides.right.unwrap_or(sc.right);
        let mut left = vec![NeighborCoupling {
            site: c - 1,
            strength: jl,
            phase: pl,
        }];
        let mut right = vec![NeighborCoupling {
            site: c + 1,
            strength: jr,
            phase: pr,
        }];
        // Long-range couplings above the neglect threshold, with the full
        // phase folded into the weight.
        for lr in couplings.long_range.iter().filter(|lr| lr.spin == alpha) {
            if lr.ratio < spec.long_range_threshold {
                diagnostics.push(format!(
                    "dropped long-range coupling spin {} -> site {} ({:.2}% of local)",
                    alpha,
                    lr.site,
                    lr.ratio * 1e2
                ));
                continue;
            }
            diagnostics.push(format!(
                "kept long-range coupling spin {} -> site {} ({:.2}% of local)",
                alpha,
                lr.site,
                lr.ratio * 1e2
            ));
            let nc = NeighborCoupling {
                site: lr.site,
                strength: lr.weight,
                phase: 0.0,
            };
            if lr.site < c {
                left.push(nc);
            } else {
                right.push(nc);
            }
        }
        spins.push(SystemSpin {
            drive: spec.drive,
            anchor: c as f64,
            local: Some((c, local)),
            left,
            right,
        });
    }

    let model = NetworkModel {
        kind: WaveguideKind::Boson {
            n_max: spec.boson_cutoff,
        },
        n_bath: spec.n_bath,
        detuning_sys: spec.detuning_sys,
        detuning_bath,
        hoppings: Hoppings::Matrix(j_mat),
        spins,
        sinks_left: spec.sinks.left_rates(),
        sinks_right: spec.sinks.right_rates(),
        excitation_cap: spec.excitation_cap,
    };
    model.validate()?;
    Ok(CompiledIonChain {
        model,
        positions,
        modes,
        omega_bar,
        couplings,
        validity,
        diagnostics,
    })
}

/// Homogenized dispersion model for golden-rule analysis: mean spacing,
/// translation-invariant dipolar hoppings, side-averaged couplings (the
/// inhomogeneous-chain reduction).
pub fn dispersion_for_ion(spec: &IonChainSpec, compiled: &CompiledIonChain) -> Result<DispersionModel> {
    let a = spec.mean_spacing()?;
    let prefactor = -spec.charge * spec.charge
        / (8.0 * std::f64::consts::PI * crate::constants::VACUUM_PERMITTIVITY * spec.mass * spec.omega_x);
    let m_max = spec.n_bath - 1;
    let hoppings: Vec<f64> = (1..=m_max)
        .map(|m| prefactor / (m as f64 * a).powi(3))
        .collect();
    let bulk_detuning = compiled.omega_bar - spec.omega_x - 2.0 * hoppings.iter().sum::<f64>();

    let ns = spec.sys_sites.len() as f64;
    let mut jl = C64::default();
    let mut jr = C64::default();
    let mut pl = 0.0;
    let mut pr = 0.0;
    for (alpha, _) in spec.sys_sites.iter().enumerate() {
        let sc = &compiled.couplings.per_spin[alpha];
        let (l, lp) = spec.coupling_overrides.left.unwrap_or(sc.left);
        let (r, rp) = spec.coupling_overrides.right.unwrap_or(sc.right);
        jl += l;
        jr += r;
        pl += lp;
        pr += rp;
    }
    jl /= C64::new(ns, 0.0);
    jr /= C64::new(ns, 0.0);
    pl /= ns;
    pr /= ns;
    let local = spec
        .coupling_overrides
        .local
        .unwrap_or_else(|| C64::new(0.0, -0.5) * spec.lasers[0].eta * spec.lasers[0].rabi);

    Ok(DispersionModel {
        lattice_constant: a,
        hoppings,
        detuning_bath: bulk_detuning,
        local_coupling: local,
        left: vec![SideCoupling {
            strength: jl,
            phase: pl,
        }],
        right: vec![SideCoupling {
            strength: jr,
            phase: pr,
        }],
        convention: Convention::OnSite,
    })
}
