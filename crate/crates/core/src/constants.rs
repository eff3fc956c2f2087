//! CODATA 2018 values in SI units.
//!
//! Compiled in rather than configurable so that reference numbers stay
//! reproducible.

/// Vacuum permittivity ε₀ (F/m).
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
/// Vacuum permeability μ₀ (T·m/A).
pub const VACUUM_PERMEABILITY: f64 = 1.256_637_062_12e-6;
/// Electron rest mass (kg).
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
/// Elementary charge (C).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Planck constant h (J·s).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant ħ (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant (J/K).
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Bohr magneton μ_B (J/T).
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;

/// The full constant set as a value, for code that wants to pass it around.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub vacuum_permittivity: f64,
    pub electron_mass: f64,
    pub elementary_charge: f64,
    pub speed_of_light: f64,
    pub hbar: f64,
    pub planck: f64,
    pub boltzmann: f64,
    pub bohr_magneton: f64,
    pub vacuum_permeability: f64,
}

impl PhysicalConstants {
    pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
        vacuum_permittivity: VACUUM_PERMITTIVITY,
        electron_mass: ELECTRON_MASS,
        elementary_charge: ELEMENTARY_CHARGE,
        speed_of_light: SPEED_OF_LIGHT,
        hbar: HBAR,
        planck: PLANCK,
        boltzmann: BOLTZMANN,
        bohr_magneton: BOHR_MAGNETON,
        vacuum_permeability: VACUUM_PERMEABILITY,
    };

    /// μ_B/h in Hz/T.
    pub fn bohr_magneton_over_planck(&self) -> f64 {
        self.bohr_magneton / self.planck
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA_2018
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bohr_magneton_over_planck_is_13_996_ghz_per_tesla() {
        let v = PhysicalConstants::default().bohr_magneton_over_planck();
        assert!((v / 1e9 - 13.996).abs() < 5e-4, "{v}");
    }

    #[test]
    fn hbar_is_h_over_two_pi() {
        let rel = (PLANCK / (2.0 * std::f64::consts::PI) - HBAR).abs() / HBAR;
        assert!(rel < 1e-9);
    }

    #[test]
    fn mu0_eps0_c2_is_unity() {
        let x = VACUUM_PERMEABILITY * VACUUM_PERMITTIVITY * SPEED_OF_LIGHT * SPEED_OF_LIGHT;
        assert!((x - 1.0).abs() < 1e-9);
    }
}
