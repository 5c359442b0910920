//! Lowering the Rydberg-lattice spec onto the abstract network model.

use super::geometry::geometry_at_offset;
use super::sink::{dressed_hoppings, dressing_factor, sink_rate};
use super::RydbergSpec;
use crate::netmodel::{Hoppings, NeighborCoupling, NetworkModel, SystemSpin, WaveguideKind};
use crate::waveguide::{Convention, DispersionModel, SideCoupling};
use crate::{C64, Error, Result};
use nalgebra::DMatrix;

/// System-bath coupling to one neighbor on the regular grid.
#[derive(Debug, Clone, Copy)]
pub struct CompiledCoupling {
    /// Amplitude Jt_m = -C3 sin^2(theta_m) / (3 r_m^3) (rad/s).
    pub strength: f64,
    /// Phase phi_m = 2 phi_m^geo (rad).
    pub phase: f64,
}

/// Couplings to the first `m_max` neighbors for the regular (non-sink)
/// geometry.
pub fn coupling_table(spec: &RydbergSpec, m_max: usize) -> Vec<CompiledCoupling> {
    (1..=m_max)
        .map(|m| {
            let dx = (m as f64 - 0.5) * spec.lattice_constant;
            coupling_at_offset(spec, dx)
        })
        .collect()
}

fn coupling_at_offset(spec: &RydbergSpec, dx: f64) -> CompiledCoupling {
    let g = geometry_at_offset(dx, spec.line_separation, spec.tilt);
    let s = g.theta.sin();
    CompiledCoupling {
        strength: -spec.c3 * s * s / (3.0 * g.r.powi(3)),
        phase: 2.0 * g.phi,
    }
}

/// Site positions along the chain (m), with sink sites at the dressed
/// offset a' from their neighbors.
fn site_positions(spec: &RydbergSpec) -> Vec<f64> {
    let a = spec.lattice_constant;
    let (cl, cr, a_prime) = match &spec.sink {
        Some(s) => (s.count_left, s.count_right, s.offset),
        None => (0, 0, a),
    };
    let n = spec.n_bath;
    let mut x = vec![0.0; n];
    for (j, xj) in x.iter_mut().enumerate().take(n - cr).skip(cl) {
        *xj = (j + 1) as f64 * a;
    }
    for j in (0..cl).rev() {
        x[j] = x[j + 1] - a_prime;
    }
    for j in (n - cr)..n {
        x[j] = x[j - 1] + a_prime;
    }
    x
}

/// Build the full network model: dipolar hoppings (sink-dressed at the
/// boundaries), chiral system-bath couplings with geometric phases, and
/// boundary loss rates.
pub fn compile(spec: &RydbergSpec) -> Result<NetworkModel> {
    let a = spec.lattice_constant;
    if a <= 0.0 || spec.line_separation <= 0.0 {
        return Err(Error::InvalidModel(
            "lattice constant and line separation must be positive".into(),
        ));
    }
    if !(0.0..=std::f64::consts::PI).contains(&spec.tilt) {
        return Err(Error::InvalidModel("tilt must lie in [0, pi]".into()));
    }
    if spec.mirrored.len() != spec.sys_anchors.len() {
        return Err(Error::InvalidModel(
            "mirrored flags must match sys_anchors".into(),
        ));
    }
    let n = spec.n_bath;
    let (cl, cr) = spec
        .sink
        .as_ref()
        .map_or((0, 0), |s| (s.count_left, s.count_right));
    let positions = site_positions(spec);
    let is_sink = |j: usize| j < cl || j >= n - cr;
    let dress = spec.sink.as_ref().map(dressing_factor).unwrap_or(1.0);

    // Hopping matrix from positions; one dressing factor per sink endpoint.
    let m_max = spec.hopping_range.unwrap_or(n.saturating_sub(1));
    let mut j_mat = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            if j - i > m_max {
                continue;
            }
            let d = positions[j] - positions[i];
            let mut v = spec.c3 / (9.0 * d.powi(3));
            if is_sink(i) {
                v *= dress;
            }
            if is_sink(j) {
                v *= dress;
            }
            j_mat[(i, j)] = v;
            j_mat[(j, i)] = v;
        }
    }

    let delta_b = spec.resolved_detuning_bath();
    let mut spins = Vec::new();
    for (alpha, &anchor) in spec.sys_anchors.iter().enumerate() {
        if (anchor.fract() - 0.5).abs() > 1e-9 {
            return Err(Error::InvalidModel(format!(
                "anchor {anchor} must be bond-centered (half-integer site index)"
            )));
        }
        if anchor < 1.0 || anchor > n as f64 {
            return Err(Error::InvalidModel(format!("anchor {anchor} outside chain")));
        }
        let mirror = spec.mirrored[alpha];
        let anchor_x = anchor * a;
        let reach = spec.coupling_range.unwrap_or(n);
        let mut left = Vec::new();
        let mut right = Vec::new();
        for site in 1..=n {
            let dx = positions[site - 1] - anchor_x;
            let cc = coupling_at_offset(spec, dx.abs());
            let mut strength = cc.strength;
            if is_sink(site - 1) {
                strength *= dress;
            }
            let phase = if mirror { -cc.phase } else { cc.phase };
            let nc = NeighborCoupling {
                site,
                strength: C64::new(strength, 0.0),
                phase,
            };
            if dx < 0.0 {
                left.push(nc);
            } else {
                right.push(nc);
            }
        }
        // Nearest first, truncated to the coupling range.
        left.sort_by(|p, q| q.site.cmp(&p.site));
        left.truncate(reach);
        right.truncate(reach);
        spins.push(SystemSpin {
            drive: spec.drive,
            anchor,
            local: None,
            left,
            right,
        });
    }

    let gamma = spec.sink.as_ref().map(sink_rate).unwrap_or(0.0);
    let model = NetworkModel {
        kind: WaveguideKind::Spin,
        n_bath: n,
        detuning_sys: spec.detuning_sys,
        detuning_bath: vec![delta_b; n],
        hoppings: Hoppings::Matrix(j_mat),
        spins,
        sinks_left: vec![gamma; cl],
        sinks_right: vec![gamma; cr],
        excitation_cap: spec.excitation_cap,
    };
    model.validate()?;
    Ok(model)
}

/// Homogeneous-chain dispersion model seen by one system spin, with its
/// actual per-side coupling reach. Used for the golden-rule emission rates.
pub fn dispersion_for_spin(spec: &RydbergSpec, alpha: usize) -> Result<DispersionModel> {
    let anchor = *spec
        .sys_anchors
        .get(alpha)
        .ok_or_else(|| Error::InvalidModel(format!("no system spin {alpha}")))?;
    let mirror = spec.mirrored.get(alpha).copied().unwrap_or(false);
    let n = spec.n_bath;
    let reach_left = (anchor - 0.5) as usize;
    let reach_right = n - (anchor + 0.5) as usize + 1;
    let cap = spec.coupling_range.unwrap_or(n);
    let table = coupling_table(spec, cap.min(reach_left.max(reach_right)));
    let side = |reach: usize| -> Vec<SideCoupling> {
        table
            .iter()
            .take(reach.min(cap))
            .map(|cc| SideCoupling {
                strength: C64::new(cc.strength, 0.0),
                phase: if mirror { -cc.phase } else { cc.phase },
            })
            .collect()
    };
    Ok(DispersionModel {
        lattice_constant: spec.lattice_constant,
        hoppings: spec.hopping_list(),
        detuning_bath: spec.resolved_detuning_bath(),
        local_coupling: C64::default(),
        left: side(reach_left),
        right: side(reach_right),
        convention: Convention::BondCentered,
    })
}

/// Chirality gamma_L / gamma_R over a (tilt, separation) grid, re-solving
/// the bath detuning for band resonance at every point. Entries where the
/// golden-rule formula degenerates (band edge) are NaN.
pub fn chirality_map(
    spec: &RydbergSpec,
    tilts: &[f64],
    line_separations_over_a: &[f64],
    m_max: usize,
) -> Vec<Vec<f64>> {
    let mut grid = Vec::with_capacity(tilts.len());
    for &tilt in tilts {
        let mut row = Vec::with_capacity(line_separations_over_a.len());
        for &ell in line_separations_over_a {
            let mut point = spec.clone();
            point.tilt = tilt;
            point.line_separation = ell * spec.lattice_constant;
            point.detuning_bath = None;
            let table = coupling_table(&point, m_max);
            let model = DispersionModel::symmetric(
                point.lattice_constant,
                point.hopping_list(),
                point.resolved_detuning_bath(),
                C64::default(),
                table
                    .iter()
                    .map(|cc| SideCoupling {
                        strength: C64::new(cc.strength, 0.0),
                        phase: cc.phase,
                    })
                    .collect(),
                Convention::BondCentered,
            );
            let value = model
                .chiral_rates(point.detuning_sys, crate::waveguide::LambShiftMode::Off)
                .map(|r| r.chirality())
                .unwrap_or(f64::NAN);
            row.push(value);
        }
        grid.push(row);
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::ZETA_3;
    use crate::rydberg::{dipole_dipole_element, SinkSpec};
    use crate::waveguide::LambShiftMode;
    use std::f64::consts::{PI, TAU};

    pub(crate) fn base_spec() -> RydbergSpec {
        RydbergSpec {
            lattice_constant: 1.0,
            line_separation: 2.25,
            tilt: PI / 3.0,
            c3: 9.0, // J_1 = 1
            n_bath: 20,
            sys_anchors: vec![10.5],
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
    fn reference_coupling_ratio() {
        // Theta = pi/3, ell = 2.25 a: |Jt_1| / J_1 = 0.07 within 1%.
        let spec = base_spec();
        let table = coupling_table(&spec, 3);
        let ratio = table[0].strength.abs() / spec.j1();
        assert!((ratio / 0.07 - 1.0).abs() < 0.01, "ratio = {ratio}");
    }

    #[test]
    fn physical_hopping_scale() {
        // C3 = 2 pi x 65 GHz um^3 at a = 15 um: J_1 = 2 pi x 2.14 MHz.
        let c3 = TAU * 65e9 * 1e-18; // rad/s * m^3
        let a: f64 = 15e-6;
        let j1 = c3 / (9.0 * a.powi(3));
        let j1_mhz = j1 / TAU / 1e6;
        assert!((j1_mhz / 2.1 - 1.0).abs() < 0.03, "J1 = {j1_mhz} MHz");
    }

    #[test]
    fn couplings_decay_and_are_continuous_in_tilt() {
        let mut spec = base_spec();
        // |Jt(dx)| = C3 (1/r^3 - ell^2 sin^2(Theta)/r^5)/3 peaks at
        // dx* = ell sqrt((5/3) sin^2(Theta) - 1) and decays monotonically
        // beyond it. (For ell = 2.25 a, Theta = pi/3 the peak falls between
        // m = 1 and m = 2, so the decay starts at m = 2.)
        let dx_star = {
            let arg: f64 = 5.0 / 3.0 * spec.tilt.sin().powi(2) - 1.0;
            spec.line_separation * arg.max(0.0).sqrt()
        };
        let table = coupling_table(&spec, 8);
        for (m, w) in table.windows(2).enumerate() {
            let dx = (m as f64 + 0.5) * spec.lattice_constant;
            if dx >= dx_star {
                assert!(
                    w[1].strength.abs() < w[0].strength.abs(),
                    "m = {}: {} !< {}",
                    m + 1,
                    w[1].strength.abs(),
                    w[0].strength.abs()
                );
            }
        }
        // For sin^2(Theta) < 3/5 there is no interior peak and the decay is
        // monotone from the start.
        let mut far = base_spec();
        far.tilt = 0.6;
        let table = coupling_table(&far, 8);
        for w in table.windows(2) {
            assert!(w[1].strength.abs() < w[0].strength.abs());
        }
        // Finite-difference continuity scan in Theta: steps of pi/200 move
        // Jt_1 by at most a few times J_1 * pi/200.
        let n = 200;
        let step_bound = 3.0 * spec.j1() * PI / n as f64;
        let mut prev: Option<f64> = None;
        for i in 0..=n {
            spec.tilt = PI * i as f64 / n as f64;
            let jt = coupling_table(&spec, 1)[0].strength;
            if let Some(p) = prev {
                assert!((jt - p).abs() < step_bound);
            }
            prev = Some(jt);
        }
    }

    #[test]
    fn coupling_matches_dipole_element_reconstruction() {
        // Jt_m e^{i phi_m} = (2 C3 / 9) * element(-1,-1; r, theta, phi_geo)
        // for m <= 5 on three random-ish geometries.
        for (ell, tilt) in [(2.25, PI / 3.0), (1.3, 0.8), (0.9, 2.0)] {
            let mut spec = base_spec();
            spec.line_separation = ell;
            spec.tilt = tilt;
            let table = coupling_table(&spec, 5);
            for (m, cc) in table.iter().enumerate() {
                let g = geometry_at_offset(
                    (m as f64 + 0.5) * spec.lattice_constant,
                    ell,
                    tilt,
                );
                let elem = dipole_dipole_element(-1, -1, g.r, g.theta, g.phi).unwrap();
                let want = elem * (2.0 * spec.c3 / 9.0);
                let got = C64::new(cc.strength, 0.0) * C64::from_polar(1.0, cc.phase);
                assert!(
                    (got - want).norm() < 1e-12 * want.norm(),
                    "m={} ell={ell} tilt={tilt}: {got} vs {want}",
                    m + 1
                );
            }
        }
    }

    #[test]
    fn perpendicular_tilt_restores_parity() {
        // Theta = pi/2: all phases are pi, |g| is even in k and the
        // chirality is 1 within 1e-6.
        let mut spec = base_spec();
        spec.tilt = PI / 2.0;
        let model = dispersion_for_spin(&spec, 0).unwrap();
        let k = model.resonant_wavevector(0.0).unwrap();
        let gp = model.coupling_gk(k).norm();
        let gm = model.coupling_gk(-k).norm();
        assert!((gp - gm).abs() < 1e-10 * gp.max(1e-300));
        let rates = model.chiral_rates(0.0, LambShiftMode::Off).unwrap();
        assert!((rates.chirality() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn compiled_network_structure() {
        let mut spec = base_spec();
        spec.sink = Some(SinkSpec {
            offset: 0.5,
            dressing_rabi: (2.0f64).sqrt(), // Gamma_1 = 2 J_1 = 2
            decay_rate: 1.0,
            probe_rabi: super::super::sink::solve_probe_ratio(0.5, 1.0),
            probe_detuning: 1.0,
            local_shift: 0.0,
            count_left: 1,
            count_right: 1,
        });
        let model = compile(&spec).unwrap();
        model.validate().unwrap();
        assert_eq!(model.sinks_left.len(), 1);
        assert!((model.sinks_left[0] - 2.0).abs() < 1e-12);

        let j = match &model.hoppings {
            Hoppings::Matrix(m) => m.clone(),
            _ => unreachable!(),
        };
        // Regular nearest neighbors at J_1 = 1.
        assert!((j[(3, 4)] - 1.0).abs() < 1e-12);
        // Dressed sink bond tuned to J'_1 = J_1.
        assert!((j[(0, 1)] - 1.0).abs() < 1e-10);
        // Dipolar tail between regular sites.
        assert!((j[(3, 6)] - 1.0 / 27.0).abs() < 1e-12);

        // The band detuning solves the quarter-zone resonance for the
        // truncated dipolar series; with the full series it approaches
        // (3/16) zeta(3) J_1.
        let db = spec.resolved_detuning_bath();
        assert!((db - 3.0 / 16.0 * ZETA_3).abs() < 3e-4);
    }

    #[test]
    fn mirrored_spin_conjugates_phases() {
        let mut spec = base_spec();
        spec.sys_anchors = vec![5.5, 14.5];
        spec.mirrored = vec![false, true];
        let model = compile(&spec).unwrap();
        let a = &model.spins[0];
        let b = &model.spins[1];
        for (ca, cb) in a.right.iter().zip(b.right.iter()) {
            assert!((ca.phase + cb.phase).abs() < 1e-14);
            assert!((ca.strength - cb.strength).norm() < 1e-14);
        }
    }

    #[test]
    fn chirality_map_has_finite_positive_entries() {
        let spec = base_spec();
        let tilts: Vec<f64> = (1..6).map(|i| PI * i as f64 / 6.0).collect();
        let ells = [1.2, 1.8, 2.25];
        let map = chirality_map(&spec, &tilts, &ells, 8);
        let mut finite = 0;
        for row in &map {
            for &v in row {
                if v.is_finite() {
                    assert!(v >= 0.0);
                    finite += 1;
                }
            }
        }
        assert!(finite as f64 >= 0.9 * (tilts.len() * ells.len()) as f64);
        // Theta = pi/2 row sits at chirality 1.
        let mid_row = &map[2];
        for &v in mid_row {
            assert!((v - 1.0).abs() < 1e-6);
        }
    }
}
