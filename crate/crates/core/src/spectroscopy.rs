//! Transition parameters derived from bulk absorption data.
//!
//! The chain runs absorption area → oscillator strength → radiative lifetime
//! → branching ratio, with the dipole moment hanging off the oscillator
//! strength. Every step depends on the local-field model, so the model is
//! carried in the output record.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::constants::{
    BOHR_MAGNETON, ELECTRON_MASS, ELEMENTARY_CHARGE, HBAR, PLANCK, SPEED_OF_LIGHT,
    VACUUM_PERMITTIVITY,
};
use crate::error::{Error, Result};
use crate::quantities::{AngularRate, OrdinaryFrequency};

/// Measured lifetimes may exceed the derived radiative lifetime by this much
/// before the pair is declared inconsistent.
pub const LIFETIME_TOLERANCE: f64 = 1.05;

/// Converts an absorption area quoted in GHz·cm⁻¹ to SI (Hz·m⁻¹).
pub fn absorption_area_from_ghz_per_cm(ghz_per_cm: f64) -> f64 {
    ghz_per_cm * 1e9 * 1e2
}

/// Host and dopant inputs for one polarization of one optical transition.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialSpec {
    /// ∫α(ν)dν in Hz·m⁻¹.
    pub absorption_area: f64,
    /// Dopant number density (m⁻³) of the sample the absorption was measured on.
    pub ion_density: f64,
    pub refractive_index: f64,
    /// Vacuum wavelength (m).
    pub wavelength: f64,
    /// Fluorescence lifetime of the emitting level (s).
    pub bulk_lifetime: f64,
    pub g_ground: f64,
    /// Not stated in the source data; 0.9 is a consistency value chosen to
    /// reproduce the excited-level superhyperfine splittings.
    pub g_excited: f64,
}

impl MaterialSpec {
    /// Nd³⁺:YVO₄, ⁴I₉/₂(Z₁) ↔ ⁴F₃/₂(Y₁), E ∥ c.
    pub fn nd_yvo4() -> Self {
        MaterialSpec {
            absorption_area: absorption_area_from_ghz_per_cm(102.0),
            ion_density: 1.24e23,
            refractive_index: 2.1785,
            wavelength: 880e-9,
            bulk_lifetime: 90e-6,
            g_ground: 2.36,
            g_excited: 0.9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("absorption_area", self.absorption_area),
            ("ion_density", self.ion_density),
            ("wavelength", self.wavelength),
            ("bulk_lifetime", self.bulk_lifetime),
            ("g_ground", self.g_ground),
            ("g_excited", self.g_excited),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation(name, format!("must be > 0, got {v}")));
            }
        }
        if !(self.refractive_index > 1.0) {
            return Err(Error::validation(
                "refractive_index",
                format!("must be > 1, got {}", self.refractive_index),
            ));
        }
        Ok(())
    }

    /// Transition angular frequency 2πc/λ.
    pub fn transition_frequency(&self) -> AngularRate {
        AngularRate(2.0 * PI * SPEED_OF_LIGHT / self.wavelength)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LocalFieldModel {
    /// (n² + 2)/3, Lorentz virtual cavity.
    Virtual,
    /// 3n²/(2n² + 1), empty real cavity; appropriate for substitutional ions.
    #[default]
    Real,
    /// No correction.
    None,
}

impl LocalFieldModel {
    pub fn name(self) -> &'static str {
        match self {
            LocalFieldModel::Virtual => "virtual",
            LocalFieldModel::Real => "real",
            LocalFieldModel::None => "none",
        }
    }
}

impl fmt::Display for LocalFieldModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LocalFieldModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "virtual" | "virtual-cavity" => Ok(LocalFieldModel::Virtual),
            "real" | "real-cavity" => Ok(LocalFieldModel::Real),
            "none" => Ok(LocalFieldModel::None),
            other => Err(Error::validation(
                "local_field",
                format!("expected one of real, virtual, none; got {other:?}"),
            )),
        }
    }
}

/// Result of running the full derivation chain on a [`MaterialSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedTransition {
    pub oscillator_strength: f64,
    /// C·m
    pub dipole_moment: f64,
    /// s
    pub radiative_lifetime: f64,
    pub branching_ratio: f64,
    pub transition_frequency: AngularRate,
    pub local_field_model: LocalFieldModel,
    pub local_field_factor: f64,
}

pub fn local_field_correction(refractive_index: f64, model: LocalFieldModel) -> Result<f64> {
    let n = refractive_index;
    if !(n >= 1.0) {
        return Err(Error::domain("refractive index", format!("must be >= 1, got {n}")));
    }
    let n2 = n * n;
    Ok(match model {
        LocalFieldModel::Virtual => (n2 + 2.0) / 3.0,
        LocalFieldModel::Real => 3.0 * n2 / (2.0 * n2 + 1.0),
        LocalFieldModel::None => 1.0,
    })
}

/// f = 4πε₀ · m_e c/(π e²) · (1/N) · (n/χ_L²) · ∫α dν
pub fn oscillator_strength(material: &MaterialSpec, local_field: f64) -> f64 {
    let e2 = ELEMENTARY_CHARGE * ELEMENTARY_CHARGE;
    4.0 * PI * VACUUM_PERMITTIVITY * (ELECTRON_MASS * SPEED_OF_LIGHT / (PI * e2))
        / material.ion_density
        * (material.refractive_index / (local_field * local_field))
        * material.absorption_area
}

/// Radiative lifetime of a transition with oscillator strength `f`:
/// 1/T_rad = (2πe²/(ε₀ m_e c)) · χ_L² · (1/n) · (n²/λ²) · (f/3).
pub fn radiative_lifetime(
    oscillator_strength: f64,
    refractive_index: f64,
    wavelength: f64,
    model: LocalFieldModel,
) -> Result<f64> {
    if !(oscillator_strength > 0.0) {
        return Err(Error::domain(
            "oscillator strength",
            format!("must be > 0, got {oscillator_strength}"),
        ));
    }
    let chi = local_field_correction(refractive_index, model)?;
    let n = refractive_index;
    let e2 = ELEMENTARY_CHARGE * ELEMENTARY_CHARGE;
    let rate = 2.0 * PI * e2 / (VACUUM_PERMITTIVITY * ELECTRON_MASS * SPEED_OF_LIGHT)
        * chi
        * chi
        * (1.0 / n)
        * (n * n / (wavelength * wavelength))
        * (oscillator_strength / 3.0);
    Ok(1.0 / rate)
}

/// β = T₁/T_rad, clamped to 1 for lifetimes slightly over the radiative
/// value (measurement noise).
pub fn branching_ratio(level_lifetime: f64, radiative_lifetime: f64) -> Result<f64> {
    if !(level_lifetime > 0.0 && radiative_lifetime > 0.0) {
        return Err(Error::domain("lifetime", "lifetimes must be > 0"));
    }
    if level_lifetime > LIFETIME_TOLERANCE * radiative_lifetime {
        return Err(Error::Inconsistent(format!(
            "level lifetime {level_lifetime} s exceeds radiative lifetime {radiative_lifetime} s"
        )));
    }
    Ok((level_lifetime / radiative_lifetime).min(1.0))
}

/// μ = sqrt(ħ e² f / (2 m_e ω))
pub fn dipole_moment(oscillator_strength: f64, omega: AngularRate) -> Result<f64> {
    if !(oscillator_strength > 0.0) || !(omega.0 > 0.0) {
        return Err(Error::domain("dipole moment inputs", "f and ω must both be > 0"));
    }
    let e2 = ELEMENTARY_CHARGE * ELEMENTARY_CHARGE;
    Ok((HBAR * e2 * oscillator_strength / (2.0 * ELECTRON_MASS * omega.0)).sqrt())
}

/// Inverse of [`dipole_moment`].
pub fn oscillator_strength_from_dipole(dipole: f64, omega: AngularRate) -> f64 {
    2.0 * ELECTRON_MASS * omega.0 * dipole * dipole / (HBAR * ELEMENTARY_CHARGE * ELEMENTARY_CHARGE)
}

/// Zeeman splitting g μ_B B / h of a Kramers doublet.
pub fn zeeman_splitting(g: f64, field_tesla: f64) -> OrdinaryFrequency {
    OrdinaryFrequency((g * BOHR_MAGNETON * field_tesla / PLANCK).abs())
}

pub fn derive_transition(material: &MaterialSpec, model: LocalFieldModel) -> Result<DerivedTransition> {
    material.validate()?;
    let chi = local_field_correction(material.refractive_index, model)?;
    let f = oscillator_strength(material, chi);
    let t_rad = radiative_lifetime(f, material.refractive_index, material.wavelength, model)?;
    let beta = branching_ratio(material.bulk_lifetime, t_rad)?;
    let omega = material.transition_frequency();
    let mu = dipole_moment(f, omega)?;
    Ok(DerivedTransition {
        oscillator_strength: f,
        dipole_moment: mu,
        radiative_lifetime: t_rad,
        branching_ratio: beta,
        transition_frequency: omega,
        local_field_model: model,
        local_field_factor: chi,
    })
}
