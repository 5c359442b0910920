//! Simulation of 1D chiral quantum networks.
//!
//! A network couples driven two-level "system spins" to a discrete waveguide
//! of localized spin-1/2 or bosonic modes through flip-flop interactions with
//! engineered phases (a synthetic gauge field), so that emission into the
//! waveguide becomes directional. Local losses at the chain boundaries act as
//! excitation sinks and emulate the output ports of an infinite waveguide.
//!
//! The crate is organized around the abstract network model and two platform
//! compilers that produce instances of it:
//!
//! - [`netmodel`]: the network data model, truncated Hilbert-space enumeration
//!   and sparse Hamiltonian / jump-operator construction;
//! - [`dynamics`]: master-equation and Monte-Carlo-trajectory time evolution,
//!   reduced states, purity, exponential fits;
//! - [`waveguide`]: dispersion, group velocity, chiral coupling function,
//!   emission rates, Lamb shift, momentum-space diagnostics;
//! - [`rydberg`]: compiles a two-line Rydberg-lattice geometry with
//!   dipole-dipole interactions into a network model;
//! - [`ionchain`]: compiles a trapped-ion chain (radial phonons, laser-induced
//!   sideband couplings) into a network model;
//! - [`scenarios`]: end-to-end experiments (unidirectional decay, dissipative
//!   dimer formation, wavepacket collision) with machine-checkable metrics.

pub mod constants;
pub mod dynamics;
mod error;
pub mod ionchain;
pub mod netmodel;
pub mod rydberg;
pub mod scenarios;
pub mod waveguide;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
