//! Physical constants (CODATA 2018, SI).

use std::f64::consts::PI;

/// Speed of light in vacuum, exact.
pub const C0: f64 = 299_792_458.0;
pub const MU0: f64 = 1.256_637_062_12e-6;
pub const EPS0: f64 = 8.854_187_812_8e-12;
/// Free-space wave impedance sqrt(mu0/eps0).
pub const ETA0: f64 = 376.730_313_668;
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const HBAR: f64 = 1.054_571_817e-34;

pub fn angular(frequency: f64) -> f64 {
    2.0 * PI * frequency
}

pub fn free_space_wavelength(frequency: f64) -> f64 {
    C0 / frequency
}
