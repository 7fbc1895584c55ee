//! Unit conversions between spectroscopic wavenumbers and the internal
//! angular-frequency units (rad/ps, with hbar = 1).

use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Speed of light in cm/ps.
pub const SPEED_OF_LIGHT_CM_PER_PS: f64 = 2.997_924_58e-2;

/// Angular frequency in rad/ps corresponding to 1 cm⁻¹.
pub const CM1_TO_ANGULAR: f64 = TAU * SPEED_OF_LIGHT_CM_PER_PS;

const BOLTZMANN_J_PER_K: f64 = 1.380_649e-23;
const PLANCK_J_S: f64 = 6.626_070_15e-34;
const SPEED_OF_LIGHT_CM_PER_S: f64 = 2.997_924_58e10;

/// Boltzmann constant in cm⁻¹ per kelvin, k_B / (h c).
pub const KB_CM1_PER_K: f64 = BOLTZMANN_J_PER_K / (PLANCK_J_S * SPEED_OF_LIGHT_CM_PER_S);

/// Absolute energy of the site-1 reference, stored as dataset metadata only.
pub const SITE_ENERGY_OFFSET_CM1: f64 = 12_400.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    pub cm1_to_angular: f64,
    pub kb_cm1_per_k: f64,
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self {
            cm1_to_angular: CM1_TO_ANGULAR,
            kb_cm1_per_k: KB_CM1_PER_K,
        }
    }
}

#[inline]
pub fn cm1_to_angular(x: f64) -> f64 {
    x * CM1_TO_ANGULAR
}

#[inline]
pub fn angular_to_cm1(w: f64) -> f64 {
    w / CM1_TO_ANGULAR
}

/// k_B T in cm⁻¹.
pub fn thermal_energy(temperature: f64) -> Result<f64> {
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(Error::invalid(format!(
            "temperature must be positive and finite, got {temperature} K"
        )));
    }
    Ok(temperature * KB_CM1_PER_K)
}
