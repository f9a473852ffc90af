//! Conversion between spectroscopic units (cm⁻¹, kelvin) and the internal
//! rad·ps⁻¹ / ps working units.

use core::f64::consts::PI;

/// Speed of light in cm·ps⁻¹.
pub const SPEED_OF_LIGHT_CM_PER_PS: f64 = 0.029_979_245_8;

/// Boltzmann constant in cm⁻¹·K⁻¹.
pub const BOLTZMANN_CM1_PER_K: f64 = 0.695_034_800;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    /// rad·ps⁻¹ per cm⁻¹, equal to 2πc.
    pub cm1_to_radps: f64,
    pub kb_cm1_per_k: f64,
}

impl UnitSystem {
    pub const STANDARD: UnitSystem = UnitSystem {
        cm1_to_radps: 2.0 * PI * SPEED_OF_LIGHT_CM_PER_PS,
        kb_cm1_per_k: BOLTZMANN_CM1_PER_K,
    };

    /// Converts a wavenumber in cm⁻¹ to angular frequency in rad·ps⁻¹.
    #[inline]
    pub fn to_angular(&self, wavenumber: f64) -> f64 {
        wavenumber * self.cm1_to_radps
    }

    #[inline]
    pub fn to_wavenumber(&self, angular: f64) -> f64 {
        angular / self.cm1_to_radps
    }

    /// k_B T in cm⁻¹.
    #[inline]
    pub fn thermal_wavenumber(&self, temperature_k: f64) -> f64 {
        self.kb_cm1_per_k * temperature_k
    }

    /// k_B T in rad·ps⁻¹ (ħ = 1).
    #[inline]
    pub fn thermal_angular(&self, temperature_k: f64) -> f64 {
        self.to_angular(self.thermal_wavenumber(temperature_k))
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self::STANDARD
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversion_constant() {
        let u = UnitSystem::STANDARD;
        assert!((u.cm1_to_radps - 0.188_365_156_7).abs() < 1e-10);
        assert!((u.to_wavenumber(u.to_angular(53.0)) - 53.0).abs() < 1e-12);
    }
}
