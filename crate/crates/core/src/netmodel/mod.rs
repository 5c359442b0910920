//! Abstract chiral-network data model and sparse operator construction.

mod operators;
mod space;
mod sparse;

pub use operators::{
    build_hamiltonian, build_jump_operators, correlation_matrix, correlation_matrix_vec,
    expectation, lowering_operator, number_operator, total_number_operator, JumpOperator,
};
pub use space::{Config, SpaceDescriptor, DEFAULT_DIMENSION_LIMIT};
pub use sparse::SparseOperator;

use crate::{C64, Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Nature of the waveguide degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WaveguideKind {
    /// Spin-1/2 sites (hard-core: at most one excitation per site).
    Spin,
    /// Localized bosonic modes truncated at `n_max` quanta per site.
    Boson { n_max: u32 },
}

impl WaveguideKind {
    /// Per-site occupation cap.
    pub fn site_cap(&self) -> u32 {
        match self {
            WaveguideKind::Spin => 1,
            WaveguideKind::Boson { n_max } => *n_max,
        }
    }
}

/// Waveguide hopping amplitudes.
#[derive(Debug, Clone)]
pub enum Hoppings {
    /// Translation-invariant J_m for m = 1..=m_max; the element between
    /// sites l and j is J_{|l-j|}.
    Range(Vec<f64>),
    /// Full real-symmetric matrix J_{lj} (diagonal ignored).
    Matrix(DMatrix<f64>),
}

impl Hoppings {
    /// Hopping amplitude between 1-based sites l and j.
    pub fn element(&self, l: usize, j: usize) -> f64 {
        if l == j {
            return 0.0;
        }
        match self {
            Hoppings::Range(js) => {
                let m = l.abs_diff(j);
                js.get(m - 1).copied().unwrap_or(0.0)
            }
            Hoppings::Matrix(m) => m[(l - 1, j - 1)],
        }
    }
}

/// One non-local flip-flop coupling from a system spin to a bath site.
///
/// The Hamiltonian term is `strength * exp(sign * i * phase) * sigma^- xi_site^dag + H.c.`
/// where `sign` is -1 for left neighbors and +1 for right neighbors.
#[derive(Debug, Clone, Copy)]
pub struct NeighborCoupling {
    /// 1-based bath site index.
    pub site: usize,
    /// Coupling amplitude (rad/s); may be complex.
    pub strength: C64,
    /// Gauge phase phi_m (rad).
    pub phase: f64,
}

/// One system spin: drive, an optional local coupling, and ordered lists of
/// couplings to its left and right bath neighbors (m = 1, 2, ...).
#[derive(Debug, Clone)]
pub struct SystemSpin {
    /// Complex Rabi drive amplitude Omega_alpha (rad/s).
    pub drive: C64,
    /// Position of the spin along the chain in units of the site index
    /// (integers for on-site spins, half-integers for bond-centered ones).
    /// Used for geometry validation and reporting only.
    pub anchor: f64,
    /// Local coupling (c_alpha, J0) if present.
    pub local: Option<(usize, C64)>,
    /// Couplings to left neighbors, m ascending.
    pub left: Vec<NeighborCoupling>,
    /// Couplings to right neighbors, m ascending.
    pub right: Vec<NeighborCoupling>,
}

impl SystemSpin {
    /// All couplings as flattened (site, complex weight) pairs with the
    /// left/right phase signs applied.
    pub fn flattened_couplings(&self) -> Vec<(usize, C64)> {
        let mut out = Vec::new();
        if let Some((site, j0)) = self.local {
            out.push((site, j0));
        }
        for nc in &self.left {
            out.push((nc.site, nc.strength * C64::from_polar(1.0, -nc.phase)));
        }
        for nc in &self.right {
            out.push((nc.site, nc.strength * C64::from_polar(1.0, nc.phase)));
        }
        out
    }
}

/// The abstract chiral-network instance.
#[derive(Debug, Clone)]
pub struct NetworkModel {
    pub kind: WaveguideKind,
    /// Number of bath sites N_B (boundary sink sites included).
    pub n_bath: usize,
    /// System-spin detuning Delta_S (rad/s).
    pub detuning_sys: f64,
    /// Per-site bath detuning Delta_B^(j) (rad/s), length N_B.
    pub detuning_bath: Vec<f64>,
    pub hoppings: Hoppings,
    pub spins: Vec<SystemSpin>,
    /// Left sink rates Gamma_n^L for n = 1..=M_L acting on site n.
    pub sinks_left: Vec<f64>,
    /// Right sink rates Gamma_n^R for n = 1..=M_R acting on site N_B+1-n.
    pub sinks_right: Vec<f64>,
    /// Global excitation cap E_max.
    pub excitation_cap: u32,
}

impl NetworkModel {
    pub fn n_sys(&self) -> usize {
        self.spins.len()
    }

    /// Validate the structural invariants.
    pub fn validate(&self) -> Result<()> {
        if self.n_bath == 0 {
            return Err(Error::InvalidModel("n_bath must be positive".into()));
        }
        if self.detuning_bath.len() != self.n_bath {
            return Err(Error::InvalidModel(format!(
                "detuning_bath has {} entries for {} sites",
                self.detuning_bath.len(),
                self.n_bath
            )));
        }
        if let WaveguideKind::Boson { n_max } = self.kind {
            if n_max < 1 {
                return Err(Error::InvalidModel("boson cutoff must be >= 1".into()));
            }
        }
        if let Hoppings::Matrix(m) = &self.hoppings {
            if m.nrows() != self.n_bath || m.ncols() != self.n_bath {
                return Err(Error::InvalidModel("hopping matrix shape mismatch".into()));
            }
            let asym = (m - m.transpose()).amax();
            if asym > 1e-12 * m.amax().max(1.0) {
                return Err(Error::InvalidModel(
                    "hopping matrix must be real-symmetric".into(),
                ));
            }
        }
        for rate in self.sinks_left.iter().chain(&self.sinks_right) {
            if *rate < 0.0 {
                return Err(Error::InvalidModel("sink rates must be >= 0".into()));
            }
        }
        if self.sinks_left.len() + self.sinks_right.len() > self.n_bath {
            return Err(Error::InvalidModel(format!(
                "{} + {} sinks exceed {} bath sites",
                self.sinks_left.len(),
                self.sinks_right.len(),
                self.n_bath
            )));
        }
        let mut anchors: Vec<f64> = Vec::new();
        for (alpha, spin) in self.spins.iter().enumerate() {
            if anchors.iter().any(|&a| a == spin.anchor) {
                return Err(Error::InvalidModel(format!(
                    "system spins share anchor {}",
                    spin.anchor
                )));
            }
            anchors.push(spin.anchor);
            let sites = spin
                .local
                .iter()
                .map(|&(s, _)| s)
                .chain(spin.left.iter().map(|nc| nc.site))
                .chain(spin.right.iter().map(|nc| nc.site));
            for site in sites {
                if site < 1 || site > self.n_bath {
                    return Err(Error::InvalidModel(format!(
                        "spin {alpha} couples to out-of-range site {site}"
                    )));
                }
            }
            for nc in &spin.left {
                if nc.site as f64 >= spin.anchor {
                    return Err(Error::InvalidModel(format!(
                        "spin {alpha}: left neighbor {} not left of anchor {}",
                        nc.site, spin.anchor
                    )));
                }
            }
            for nc in &spin.right {
                if (nc.site as f64) <= spin.anchor {
                    return Err(Error::InvalidModel(format!(
                        "spin {alpha}: right neighbor {} not right of anchor {}",
                        nc.site, spin.anchor
                    )));
                }
            }
        }
        Ok(())
    }

    /// Enumerate the truncated Hilbert space of this model.
    pub fn build_space(&self) -> Result<SpaceDescriptor> {
        self.build_space_with_limit(None)
    }

    pub fn build_space_with_limit(&self, limit: Option<usize>) -> Result<SpaceDescriptor> {
        self.validate()?;
        SpaceDescriptor::enumerate(
            self.n_sys(),
            self.n_bath,
            self.kind.site_cap() as u8,
            self.excitation_cap,
            limit,
        )
    }

    /// Copy of the model with a different excitation cap (for convergence
    /// reruns).
    pub fn with_cap(&self, cap: u32) -> Self {
        let mut m = self.clone();
        m.excitation_cap = cap;
        m
    }

    /// Copy with every coupling amplitude multiplied by a global phase
    /// factor. Occupation observables are invariant under this map.
    pub fn with_global_coupling_phase(&self, phase: f64) -> Self {
        let factor = C64::from_polar(1.0, phase);
        let mut m = self.clone();
        for spin in &mut m.spins {
            if let Some((_, j0)) = &mut spin.local {
                *j0 *= factor;
            }
            for nc in spin.left.iter_mut().chain(spin.right.iter_mut()) {
                nc.strength *= factor;
            }
        }
        m
    }
}
