//! Physical constants (CODATA 2018).

/// Vacuum permittivity, F/m.
pub const EPS0: f64 = 8.854_187_812_8e-12;
/// Vacuum permeability, H/m.
pub const MU0: f64 = 1.256_637_062_12e-6;
/// Speed of light in vacuum, m/s.
pub const C0: f64 = 299_792_458.0;
/// Free-space wave impedance, ohm.
pub const ETA0: f64 = MU0 * C0;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;
/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
