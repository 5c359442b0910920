use thiserror::Error;

/// Errors produced by model construction, analysis and time evolution.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("basis dimension {dim} exceeds the hard limit {limit}")]
    DimensionOverflow { dim: usize, limit: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("no resonant mode: target frequency {target:.6e} lies outside the band [{band_min:.6e}, {band_max:.6e}]")]
    NoResonantMode {
        target: f64,
        band_min: f64,
        band_max: f64,
    },

    #[error("Markovian emission formula invalid: |group velocity| = {vg:.3e} at the resonant wavevector is below the band-edge guard {guard:.3e}")]
    BandEdge { vg: f64, guard: f64 },

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("singular configuration: {0}")]
    SingularConfiguration(String),

    #[error("equilibrium positions did not converge after {0} Newton iterations")]
    EquilibriumNonConvergence(usize),

    #[error("no positive-intensity compensation solution: {0}")]
    Compensation(String),

    #[error("scenario error: {0}")]
    Scenario(String),
}
