//! Coulomb-mediated radial hoppings and the phonon normal modes.

use crate::constants::VACUUM_PERMITTIVITY;
use crate::{Error, Result};
use nalgebra::DMatrix;
use std::f64::consts::PI;

/// Radial hopping matrix J_{lj} = -q^2 / (8 pi eps0 M omega_x |z_l - z_j|^3)
/// plus the per-site detunings Delta_B^(j) = omega_bar - omega_x -
/// sum_{l != j} J_{lj} in the frame rotating at omega_bar.
///
/// (The Coulomb curvature softens the local radial confinement: the local
/// frequency is omega_x + sum_l J_{lj} with J < 0, so the detuning carries
/// the opposite sign on the hopping sum.)
pub fn radial_hoppings(
    positions: &[f64],
    omega_x: f64,
    mass: f64,
    charge: f64,
    omega_bar: f64,
) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let n = positions.len();
    let prefactor = -charge * charge / (8.0 * PI * VACUUM_PERMITTIVITY * mass * omega_x);
    let mut j = DMatrix::<f64>::zeros(n, n);
    for a in 0..n {
        for b in (a + 1)..n {
            let d = (positions[b] - positions[a]).abs();
            if d == 0.0 {
                return Err(Error::InvalidModel(format!(
                    "coincident ion positions at indices {a}, {b}"
                )));
            }
            let v = prefactor / d.powi(3);
            j[(a, b)] = v;
            j[(b, a)] = v;
        }
    }
    let detunings = (0..n)
        .map(|site| omega_bar - omega_x - j.row(site).sum())
        .collect();
    Ok((j, detunings))
}

/// Largest |J_{lj}| / omega_x, the rotating-wave-approximation guard.
pub fn rwa_ratio(j: &DMatrix<f64>, omega_x: f64) -> f64 {
    j.amax() / omega_x
}

/// Radial normal modes: frequencies ascending, mode amplitudes M_j^n in the
/// columns of an orthogonal matrix.
#[derive(Debug, Clone)]
pub struct NormalModes {
    /// Lab-frame mode frequencies omega_tilde_n, ascending (rad/s).
    pub frequencies: Vec<f64>,
    /// Column n holds the amplitudes M_j^n of mode n on sites j.
    pub matrix: DMatrix<f64>,
}

impl NormalModes {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// Lowest mode frequency, the reference of the sideband construction.
    pub fn reference_frequency(&self) -> f64 {
        self.frequencies[0]
    }

    /// Mode amplitude M_j^n for 1-based site j.
    pub fn amplitude(&self, site: usize, mode: usize) -> f64 {
        self.matrix[(site - 1, mode)]
    }

    /// Median mode frequency (mean of the middle pair for even counts).
    pub fn median_frequency(&self) -> f64 {
        let n = self.frequencies.len();
        if n % 2 == 1 {
            self.frequencies[n / 2]
        } else {
            0.5 * (self.frequencies[n / 2 - 1] + self.frequencies[n / 2])
        }
    }

    /// max_n ||(M^T M - I)_n||_inf, the orthogonality defect.
    pub fn orthogonality_defect(&self) -> f64 {
        let g = self.matrix.transpose() * &self.matrix;
        let n = g.nrows();
        let mut defect = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                defect = defect.max((g[(i, j)] - want).abs());
            }
        }
        defect
    }
}

/// Diagonalize the single-phonon problem: lab matrix
/// V_jj = omega_x + sum_{l != j} J_{lj}, V_jl = -J_{jl}.
pub fn normal_modes(j: &DMatrix<f64>, omega_x: f64) -> Result<NormalModes> {
    let n = j.nrows();
    let local: Vec<f64> = (0..n).map(|site| omega_x + j.row(site).sum()).collect();
    normal_modes_with_local(j, &local)
}

/// Same with explicit local frequencies (engineered uniform chains absorb
/// the edge corrections in the trap hardware).
pub fn normal_modes_with_local(j: &DMatrix<f64>, local: &[f64]) -> Result<NormalModes> {
    let n = j.nrows();
    if j.ncols() != n || local.len() != n {
        return Err(Error::DimensionMismatch("hopping matrix must be square".into()));
    }
    if (j - j.transpose()).amax() > 1e-12 * j.amax().max(1.0) {
        return Err(Error::InvalidModel("hopping matrix must be symmetric".into()));
    }
    let mut v = -j.clone();
    for site in 0..n {
        v[(site, site)] = local[site];
    }
    let eig = v.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let mut matrix = DMatrix::<f64>::zeros(n, n);
    let mut frequencies = Vec::with_capacity(n);
    for (col, &src) in order.iter().enumerate() {
        frequencies.push(eig.eigenvalues[src]);
        let mut vcol = eig.eigenvectors.column(src).clone_owned();
        // Deterministic sign: largest-magnitude component positive.
        let mut lead = 0;
        for i in 0..n {
            if vcol[i].abs() > vcol[lead].abs() {
                lead = i;
            }
        }
        if vcol[lead] < 0.0 {
            vcol = -vcol;
        }
        matrix.set_column(col, &vcol);
    }
    Ok(NormalModes {
        frequencies,
        matrix,
    })
}
