//! Time evolution of the network master equation, stochastic unraveling,
//! reduced states and decay-rate extraction.

mod fit;
pub mod integrate;
pub mod krylov;
mod lindblad;
mod reduce;
mod series;
mod trajectory;

pub use fit::{fit_exponential, ExponentialFit};
pub use integrate::StepController;
pub use krylov::KrylovOptions;
pub use lindblad::{
    check_density, evolve_density, evolve_density_observed, LindbladSystem, NamedOp, Propagator,
};
pub use reduce::{purity, reduced_state, reduced_state_vec};
pub use series::{uniform_grid, ObservableSeries, Track};
pub use trajectory::{evolve_trajectories, TrajectoryOutput, TrajectoryPlan};
