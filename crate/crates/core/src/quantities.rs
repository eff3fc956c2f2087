//! Frequency conventions and thermal factors.
//!
//! Rates are carried internally as angular frequencies (rad/s). Anything a
//! human types or reads (config, CSV, reports) is in ordinary Hz and goes
//! through [`OrdinaryFrequency`] at the boundary.

use std::f64::consts::PI;
use std::fmt;

use crate::constants::{BOHR_MAGNETON, BOLTZMANN, PLANCK};
use crate::error::{Error, Result};

/// An angular rate in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct AngularRate(pub f64);

/// An ordinary frequency in Hz.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct OrdinaryFrequency(pub f64);

impl AngularRate {
    pub const ZERO: AngularRate = AngularRate(0.0);

    /// `2π × hz`, the way rates are usually quoted.
    pub fn two_pi_times(hz: f64) -> Self {
        AngularRate(2.0 * PI * hz)
    }

    pub fn rad_per_s(self) -> f64 {
        self.0
    }

    pub fn to_ordinary(self) -> OrdinaryFrequency {
        OrdinaryFrequency(self.0 / (2.0 * PI))
    }

    pub fn scale(self, factor: f64) -> Self {
        AngularRate(self.0 * factor)
    }
}

impl OrdinaryFrequency {
    pub const ZERO: OrdinaryFrequency = OrdinaryFrequency(0.0);

    pub fn hz(self) -> f64 {
        self.0
    }

    pub fn from_ghz(ghz: f64) -> Self {
        OrdinaryFrequency(ghz * 1e9)
    }

    pub fn from_mhz(mhz: f64) -> Self {
        OrdinaryFrequency(mhz * 1e6)
    }

    pub fn from_khz(khz: f64) -> Self {
        OrdinaryFrequency(khz * 1e3)
    }

    pub fn to_angular(self) -> AngularRate {
        AngularRate(2.0 * PI * self.0)
    }
}

impl From<OrdinaryFrequency> for AngularRate {
    fn from(f: OrdinaryFrequency) -> Self {
        f.to_angular()
    }
}

impl From<AngularRate> for OrdinaryFrequency {
    fn from(w: AngularRate) -> Self {
        w.to_ordinary()
    }
}

impl fmt::Display for AngularRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "2π×{} Hz", self.to_ordinary().0)
    }
}

impl fmt::Display for OrdinaryFrequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} Hz", self.0)
    }
}

pub fn angular_from_ordinary(f: OrdinaryFrequency) -> AngularRate {
    f.to_angular()
}

pub fn ordinary_from_angular(w: AngularRate) -> OrdinaryFrequency {
    w.to_ordinary()
}

fn check_temperature(temperature: f64) -> Result<()> {
    if temperature > 0.0 && temperature.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("temperature", format!("must be > 0 K, got {temperature}")))
    }
}

/// Population of the upper level relative to the lower one, `exp(−hν/kT)`.
pub fn boltzmann_population_ratio(splitting: OrdinaryFrequency, temperature: f64) -> Result<f64> {
    check_temperature(temperature)?;
    Ok((-PLANCK * splitting.0 / (BOLTZMANN * temperature)).exp())
}

/// Inverse of [`boltzmann_population_ratio`]: the temperature at which two
/// levels split by `splitting` have the given upper/lower population ratio.
pub fn temperature_from_population_ratio(ratio: f64, splitting: OrdinaryFrequency) -> Result<f64> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::domain("population ratio", format!("must lie in (0, 1), got {ratio}")));
    }
    if splitting.0 <= 0.0 {
        return Err(Error::domain("splitting", "must be > 0 to define a temperature"));
    }
    Ok(-PLANCK * splitting.0 / (BOLTZMANN * ratio.ln()))
}

/// `sech²(g μ_B B / 2kT)`: the thermal factor for the fraction of spin pairs
/// able to flip-flop.
pub fn sech_squared_thermal(g: f64, field_tesla: f64, temperature: f64) -> Result<f64> {
    check_temperature(temperature)?;
    let x = g * BOHR_MAGNETON * field_tesla / (2.0 * BOLTZMANN * temperature);
    let sech = 1.0 / x.cosh();
    Ok(sech * sech)
}
