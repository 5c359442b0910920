//! Physical constants (SI) and a few mathematical values.

/// Reduced Planck constant, J*s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Bohr magneton, J/T.
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;

/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Vacuum permittivity, F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;

/// Atomic mass unit, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Riemann zeta(3) (Apery's constant).
pub const ZETA_3: f64 = 1.202_056_903_159_594_3;

/// Tesla per gauss.
pub const TESLA_PER_GAUSS: f64 = 1e-4;
