//! Partial trace over the waveguide and purity of the reduced spin state.
//!
//! The reduced state lives on the full 2^{N_S} spin register; the basis
//! index of a spin configuration is `sum_alpha s_alpha << (N_S - 1 - alpha)`
//! (first spin most significant), so for two spins the order is
//! |gg>, |ge>, |eg>, |ee>.

use crate::netmodel::SpaceDescriptor;
use crate::{C64, Error, Result};
use nalgebra::{DMatrix, DVector};
use std::collections::HashMap;

fn spin_index(space: &SpaceDescriptor, ordinal: usize) -> usize {
    let cfg = space.config(ordinal);
    let n = space.n_sys();
    cfg[..n]
        .iter()
        .fold(0usize, |acc, &b| (acc << 1) | b as usize)
}

/// Group basis ordinals by their bath configuration.
fn bath_groups(space: &SpaceDescriptor) -> HashMap<Vec<u8>, Vec<(usize, usize)>> {
    let mut groups: HashMap<Vec<u8>, Vec<(usize, usize)>> = HashMap::new();
    let ns = space.n_sys();
    for ord in 0..space.dim() {
        let cfg = space.config(ord);
        groups
            .entry(cfg[ns..].to_vec())
            .or_default()
            .push((spin_index(space, ord), ord));
    }
    groups
}

/// Partial trace of a density matrix over all bath sites.
pub fn reduced_state(space: &SpaceDescriptor, rho: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    if rho.nrows() != space.dim() || rho.ncols() != space.dim() {
        return Err(Error::DimensionMismatch(
            "reduced_state: state does not match space".into(),
        ));
    }
    let d = 1usize << space.n_sys();
    let mut out = DMatrix::<C64>::zeros(d, d);
    for group in bath_groups(space).values() {
        for &(si, oi) in group {
            for &(sj, oj) in group {
                out[(si, sj)] += rho[(oi, oj)];
            }
        }
    }
    Ok(out)
}

/// Partial trace of |psi><psi| over all bath sites (psi need not be
/// normalized; the result then carries |psi|^2 as its trace).
pub fn reduced_state_vec(space: &SpaceDescriptor, psi: &DVector<C64>) -> Result<DMatrix<C64>> {
    if psi.nrows() != space.dim() {
        return Err(Error::DimensionMismatch(
            "reduced_state_vec: state does not match space".into(),
        ));
    }
    let d = 1usize << space.n_sys();
    let mut out = DMatrix::<C64>::zeros(d, d);
    for group in bath_groups(space).values() {
        for &(si, oi) in group {
            for &(sj, oj) in group {
                out[(si, sj)] += psi[oi] * psi[oj].conj();
            }
        }
    }
    Ok(out)
}

/// Purity Tr(rho^2) of a (small) density matrix.
pub fn purity(rho: &DMatrix<C64>) -> f64 {
    let mut acc = 0.0;
    for i in 0..rho.nrows() {
        for j in 0..rho.ncols() {
            acc += (rho[(i, j)] * rho[(j, i)]).re;
        }
    }
    acc
}
