//! Physical constants (CODATA 2018) and the ion species used throughout.
//!
//! Everything downstream pulls constants from here so that unit conventions
//! live in exactly one place. All frequencies in this crate are *angular*
//! (rad/s); configuration files may specify `*_over_2pi_hz` convenience keys
//! which are converted on ingestion.

use std::f64::consts::PI;

/// Reduced Planck constant [J s].
pub const HBAR: f64 = 1.054_571_817e-34;
/// Vacuum permittivity [F/m].
pub const EPSILON_0: f64 = 8.854_187_8128e-12;
/// Elementary charge [C].
pub const E_CHARGE: f64 = 1.602_176_634e-19;
/// Atomic mass unit [kg].
pub const AMU: f64 = 1.660_539_066_60e-27;
/// Electron mass [u] (subtracted from neutral-atom masses to get ion masses).
pub const ELECTRON_MASS_U: f64 = 5.485_799_090_65e-4;
/// Speed of light [m/s].
pub const C_LIGHT: f64 = 299_792_458.0;

/// ⁹Be neutral atomic mass [u].
pub const BE9_ATOMIC_MASS_U: f64 = 9.012_183_1;
/// ²⁴Mg neutral atomic mass [u].
pub const MG24_ATOMIC_MASS_U: f64 = 23.985_041_697;

/// ⁹Be⁺ ion mass [kg].
pub fn be9_ion_mass() -> f64 {
    (BE9_ATOMIC_MASS_U - ELECTRON_MASS_U) * AMU
}

/// ²⁴Mg⁺ ion mass [kg].
pub fn mg24_ion_mass() -> f64 {
    (MG24_ATOMIC_MASS_U - ELECTRON_MASS_U) * AMU
}

/// Convert an ordinary frequency in Hz to angular rad/s.
pub fn hz_to_angular(f_hz: f64) -> f64 {
    2.0 * PI * f_hz
}

/// Convert an angular frequency in rad/s back to ordinary Hz.
pub fn angular_to_hz(w: f64) -> f64 {
    w / (2.0 * PI)
}
