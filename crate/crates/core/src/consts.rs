//! Physical constants (CODATA 2018) and atomic defaults.

use core::f64::consts::PI;

/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Mass of ⁸⁷Rb, kg.
pub const RB87_MASS: f64 = 1.443_160_648e-25;
/// 2π, for readability in `2π × f` expressions.
pub const TWO_PI: f64 = 2.0 * PI;
