//! Physical constants (CODATA 2018). Every module takes its constants from
//! here so golden numbers cannot drift between subsystems.

use std::f64::consts::PI;

/// Elementary charge (C), exact.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Planck constant (J s), exact.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant (J s).
pub const HBAR: f64 = PLANCK / (2.0 * PI);
/// Boltzmann constant (J/K), exact.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Magnetic flux quantum h/2e (Wb).
pub const FLUX_QUANTUM: f64 = PLANCK / (2.0 * ELEMENTARY_CHARGE);
/// Vacuum permeability (N/A^2), CODATA 2018.
pub const MU_0: f64 = 1.256_637_062_12e-6;

/// BCS ratio Δ₀ / (k_B T_c) for a weak-coupling superconductor.
pub const BCS_GAP_RATIO: f64 = 1.764;
