//! Sparse Hamiltonian and jump-operator construction over an enumerated
//! basis.
//!
//! All operators are generated column by column; every directed term and its
//! Hermitian conjugate are produced from matching configurations with
//! bit-identical amplitudes, so the assembled Hamiltonian is exactly
//! Hermitian.

use super::{NetworkModel, SpaceDescriptor, SparseOperator};
use crate::{C64, Error, Result};
use nalgebra::{DMatrix, DVector};

/// A Lindblad jump channel: rate Gamma and the bare operator A in
/// Gamma * D[A].
#[derive(Debug, Clone)]
pub struct JumpOperator {
    pub rate: f64,
    /// 1-based bath site the loss acts on.
    pub site: usize,
    pub op: SparseOperator,
}

fn sqrt_int(n: u8) -> f64 {
    (n as f64).sqrt()
}

/// Build H = H_S + H_B + H_SB in the rotating frame.
///
/// Drive terms that would lift the total excitation number above the cap are
/// projected out: the cap acts as a hard wall.
pub fn build_hamiltonian(model: &NetworkModel, space: &SpaceDescriptor) -> Result<SparseOperator> {
    model.validate()?;
    if space.n_sys() != model.n_sys() || space.n_bath() != model.n_bath {
        return Err(Error::DimensionMismatch(
            "space was not built from this model".into(),
        ));
    }
    let dim = space.dim();
    let site_cap = space.site_cap();
    let mut triplets: Vec<(u32, u32, C64)> = Vec::new();

    // Precompute flattened system-bath coupling weights.
    let couplings: Vec<Vec<(usize, C64)>> = model
        .spins
        .iter()
        .map(|s| s.flattened_couplings())
        .collect();

    // Nonzero hopping pairs (l, j), l != j, directed.
    let hopping_targets: Vec<Vec<(usize, f64)>> = (1..=model.n_bath)
        .map(|j| {
            (1..=model.n_bath)
                .filter(|&l| l != j)
                .filter_map(|l| {
                    let amp = model.hoppings.element(l, j);
                    (amp != 0.0).then_some((l, amp))
                })
                .collect()
        })
        .collect();

    let mut scratch: Vec<u8> = Vec::new();
    for col in 0..dim {
        let cfg = space.config(col);
        let col_u = col as u32;

        // Diagonal: -Delta_S * sum_alpha n_alpha - sum_j Delta_B^(j) n_j.
        let mut diag = 0.0;
        for alpha in 0..model.n_sys() {
            diag -= model.detuning_sys * cfg[alpha] as f64;
        }
        for site in 1..=model.n_bath {
            diag -= model.detuning_bath[site - 1] * cfg[space.bath_mode(site)] as f64;
        }
        if diag != 0.0 {
            triplets.push((col_u, col_u, C64::new(diag, 0.0)));
        }

        // Bath hoppings: -J_{lj} xi_l^dag xi_j for every directed pair.
        for j in 1..=model.n_bath {
            let nj = cfg[space.bath_mode(j)];
            if nj == 0 {
                continue;
            }
            for &(l, amp) in &hopping_targets[j - 1] {
                let nl = cfg[space.bath_mode(l)];
                if nl >= site_cap {
                    continue;
                }
                scratch.clear();
                scratch.extend_from_slice(cfg);
                scratch[space.bath_mode(j)] -= 1;
                scratch[space.bath_mode(l)] += 1;
                if let Some(row) = space.ordinal(&scratch) {
                    let v = -amp * sqrt_int(nj) * sqrt_int(nl + 1);
                    triplets.push((row, col_u, C64::new(v, 0.0)));
                }
            }
        }

        for (alpha, spin) in model.spins.iter().enumerate() {
            let s_occ = cfg[alpha];

            // Drive: (Omega/2) sigma^- + (Omega*/2) sigma^+.
            if spin.drive != C64::default() {
                if s_occ == 1 {
                    scratch.clear();
                    scratch.extend_from_slice(cfg);
                    scratch[alpha] = 0;
                    if let Some(row) = space.ordinal(&scratch) {
                        triplets.push((row, col_u, spin.drive * 0.5));
                    }
                } else {
                    scratch.clear();
                    scratch.extend_from_slice(cfg);
                    scratch[alpha] = 1;
                    // The raised configuration is absent when the cap is hit.
                    if let Some(row) = space.ordinal(&scratch) {
                        triplets.push((row, col_u, spin.drive.conj() * 0.5));
                    }
                }
            }

            // System-bath flip-flop: w sigma^- xi_site^dag + conj(w) sigma^+ xi_site.
            for &(site, w) in &couplings[alpha] {
                let mode = space.bath_mode(site);
                if s_occ == 1 {
                    let n = cfg[mode];
                    if n < site_cap {
                        scratch.clear();
                        scratch.extend_from_slice(cfg);
                        scratch[alpha] = 0;
                        scratch[mode] += 1;
                        if let Some(row) = space.ordinal(&scratch) {
                            triplets.push((row, col_u, w * sqrt_int(n + 1)));
                        }
                    }
                } else {
                    let n = cfg[mode];
                    if n > 0 {
                        scratch.clear();
                        scratch.extend_from_slice(cfg);
                        scratch[alpha] = 1;
                        scratch[mode] -= 1;
                        if let Some(row) = space.ordinal(&scratch) {
                            triplets.push((row, col_u, w.conj() * sqrt_int(n)));
                        }
                    }
                }
            }
        }
    }

    SparseOperator::from_triplets(dim, triplets)
}

/// Build the sink jump operators: xi_n with rate Gamma_n^L for the left
/// sinks and xi_{N_B+1-n} with Gamma_n^R for the right ones.
pub fn build_jump_operators(
    model: &NetworkModel,
    space: &SpaceDescriptor,
) -> Result<Vec<JumpOperator>> {
    model.validate()?;
    let mut jumps = Vec::new();
    let sites_rates = model
        .sinks_left
        .iter()
        .enumerate()
        .map(|(i, &rate)| (i + 1, rate))
        .chain(
            model
                .sinks_right
                .iter()
                .enumerate()
                .map(|(i, &rate)| (model.n_bath - i, rate)),
        );
    for (site, rate) in sites_rates {
        jumps.push(JumpOperator {
            rate,
            site,
            op: lowering_operator(space, space.bath_mode(site))?,
        });
    }
    Ok(jumps)
}

/// Annihilation operator xi for a single mode (system spin or bath site).
pub fn lowering_operator(space: &SpaceDescriptor, mode: usize) -> Result<SparseOperator> {
    let dim = space.dim();
    let mut triplets = Vec::new();
    let mut scratch: Vec<u8> = Vec::new();
    for col in 0..dim {
        let cfg = space.config(col);
        let n = cfg[mode];
        if n == 0 {
            continue;
        }
        scratch.clear();
        scratch.extend_from_slice(cfg);
        scratch[mode] -= 1;
        if let Some(row) = space.ordinal(&scratch) {
            triplets.push((row, col as u32, C64::new(sqrt_int(n), 0.0)));
        }
    }
    SparseOperator::from_triplets(dim, triplets)
}

/// Number operator for a single mode.
pub fn number_operator(space: &SpaceDescriptor, mode: usize) -> Result<SparseOperator> {
    let dim = space.dim();
    let triplets = (0..dim)
        .filter_map(|i| {
            let n = space.config(i)[mode];
            (n > 0).then_some((i as u32, i as u32, C64::new(n as f64, 0.0)))
        })
        .collect();
    SparseOperator::from_triplets(dim, triplets)
}

/// Total excitation number operator.
pub fn total_number_operator(space: &SpaceDescriptor) -> Result<SparseOperator> {
    let dim = space.dim();
    let triplets = (0..dim)
        .filter_map(|i| {
            let n = space.total_occ(i);
            (n > 0).then_some((i as u32, i as u32, C64::new(n as f64, 0.0)))
        })
        .collect();
    SparseOperator::from_triplets(dim, triplets)
}

/// Expectation value Tr(rho A) for a density matrix.
pub fn expectation(rho: &DMatrix<C64>, op: &SparseOperator) -> Result<C64> {
    if rho.nrows() != op.dim() || rho.ncols() != op.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state {}x{} vs operator {}",
            rho.nrows(),
            rho.ncols(),
            op.dim()
        )));
    }
    Ok(op.trace_with(rho))
}

/// Bath correlation matrix C_{jl} = <xi_j^dag xi_l> for a density matrix.
/// Returns an N_B x N_B Hermitian matrix.
pub fn correlation_matrix(space: &SpaceDescriptor, rho: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    if rho.nrows() != space.dim() {
        return Err(Error::DimensionMismatch(
            "correlation_matrix: state does not match space".into(),
        ));
    }
    correlation_from(space, |row, col| rho[(row, col)])
}

/// Bath correlation matrix for a pure state (not normalized by the caller's
/// norm; pass a normalized vector).
pub fn correlation_matrix_vec(space: &SpaceDescriptor, psi: &DVector<C64>) -> Result<DMatrix<C64>> {
    if psi.nrows() != space.dim() {
        return Err(Error::DimensionMismatch(
            "correlation_matrix_vec: state does not match space".into(),
        ));
    }
    correlation_from(space, |row, col| psi[row] * psi[col].conj())
}

fn correlation_from<F: Fn(usize, usize) -> C64>(
    space: &SpaceDescriptor,
    rho_elem: F,
) -> Result<DMatrix<C64>> {
    let nb = space.n_bath();
    let site_cap = space.site_cap();
    let mut c = DMatrix::<C64>::zeros(nb, nb);
    let mut scratch: Vec<u8> = Vec::new();
    // Tr(rho xi_j^dag xi_l) = sum_col rho[col, target] * amp where
    // xi_j^dag xi_l |col> = amp |target>.
    for col in 0..space.dim() {
        let cfg = space.config(col);
        for l in 1..=nb {
            let nl = cfg[space.bath_mode(l)];
            if nl == 0 {
                continue;
            }
            for j in 1..=nb {
                if j == l {
                    let amp = nl as f64;
                    c[(j - 1, l - 1)] += rho_elem(col, col) * amp;
                    continue;
                }
                let nj = cfg[space.bath_mode(j)];
                if nj >= site_cap {
                    continue;
                }
                scratch.clear();
                scratch.extend_from_slice(cfg);
                scratch[space.bath_mode(l)] -= 1;
                scratch[space.bath_mode(j)] += 1;
                if let Some(row) = space.ordinal(&scratch) {
                    let amp = sqrt_int(nl) * sqrt_int(nj + 1);
                    c[(j - 1, l - 1)] += rho_elem(col, row as usize) * amp;
                }
            }
        }
    }
    Ok(c)
}
