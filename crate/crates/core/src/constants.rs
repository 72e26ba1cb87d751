//! Physical constants (CODATA 2018 exact or recommended values, SI units).

/// Speed of light in vacuum [m/s].
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Vacuum permittivity [F/m].
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;

/// Boltzmann constant [J/K].
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Elementary charge [C].
pub const ELECTRON_CHARGE: f64 = 1.602_176_634e-19;
