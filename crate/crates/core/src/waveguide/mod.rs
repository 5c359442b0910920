//! Closed-form and semi-analytic waveguide analysis: Bloch dispersion,
//! group velocity, chiral coupling function, emission rates with Lamb
//! shift, and momentum-space occupation diagnostics.

mod dispersion;
mod momentum;
mod rates;

pub use dispersion::{ChiralRates, Convention, DispersionModel, SideCoupling};
pub use momentum::momentum_occupations;
pub use rates::{local_coupling_chirality, principal_value_integral, LambShiftMode};
