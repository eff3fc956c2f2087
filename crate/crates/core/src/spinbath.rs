//! Ligand nuclear spins around the dopant and the dephasing they cause.
//!
//! The dopant's electronic moment is treated as a classical point dipole of
//! magnitude g·μ_B/2 pointing along the applied field (or against it,
//! depending on the Zeeman branch). Each ligand nucleus precesses in the sum
//! of the applied field and that dipole field, which gives its doublet
//! splitting. This is first-order perturbation theory, with no
//! diagonalization of the coupled electron-nuclear system.

use std::f64::consts::PI;

use crate::constants::{BOHR_MAGNETON, HBAR, VACUUM_PERMEABILITY};
use crate::error::{Error, Result};
use crate::quantities::{sech_squared_thermal, AngularRate, OrdinaryFrequency};
use crate::trace::{Axis, TimeTrace};

/// Nuclear spin gyromagnetic ratio of ⁸⁹Y (Hz/T).
pub const YTTRIUM_GYROMAGNETIC: f64 = 2.1e6;
/// Nuclear spin gyromagnetic ratio of ⁵¹V (Hz/T).
pub const VANADIUM_GYROMAGNETIC: f64 = 11.2e6;

/// A shell of equivalent ligand nuclei, represented by one site.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinBathSite {
    pub species: String,
    /// Nuclear spin quantum number I.
    pub nuclear_spin: f64,
    /// γ_n in Hz/T.
    pub gyromagnetic_ratio: f64,
    /// m
    pub distance: f64,
    /// Angle between the electronic moment axis and the ion-ligand vector (rad).
    pub angle: f64,
    pub multiplicity: u32,
}

impl SpinBathSite {
    /// The four nearest Y neighbours at 3.9 Å.
    pub fn yttrium() -> Self {
        SpinBathSite {
            species: "Y".into(),
            nuclear_spin: 0.5,
            gyromagnetic_ratio: YTTRIUM_GYROMAGNETIC,
            distance: 3.9e-10,
            angle: 0.0,
            multiplicity: 4,
        }
    }

    /// The nearest V neighbours at 3.14 Å.
    pub fn vanadium() -> Self {
        SpinBathSite {
            species: "V".into(),
            nuclear_spin: 3.5,
            gyromagnetic_ratio: VANADIUM_GYROMAGNETIC,
            distance: 3.14e-10,
            angle: 0.0,
            multiplicity: 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let twice = 2.0 * self.nuclear_spin;
        if !(self.nuclear_spin > 0.0 && (twice - twice.round()).abs() < 1e-12) {
            return Err(Error::validation("nuclear_spin", format!("must be a positive half-integer, got {}", self.nuclear_spin)));
        }
        if !(self.distance > 0.0) {
            return Err(Error::domain("ligand distance", "r must be > 0 (point dipole is singular at r = 0)"));
        }
        if self.multiplicity < 1 {
            return Err(Error::validation("multiplicity", "must be >= 1"));
        }
        Ok(())
    }

    /// 2I + 1
    pub fn level_count(&self) -> usize {
        (2.0 * self.nuclear_spin).round() as usize + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpticalLevel {
    Ground,
    Excited,
}

/// Whether the electronic moment points along the applied field or against it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MomentOrientation {
    Parallel,
    #[default]
    AntiParallel,
}

impl MomentOrientation {
    fn sign(self) -> f64 {
        match self {
            MomentOrientation::Parallel => 1.0,
            MomentOrientation::AntiParallel => -1.0,
        }
    }
}

impl std::str::FromStr for MomentOrientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "parallel" => Ok(MomentOrientation::Parallel),
            "antiparallel" | "anti-parallel" => Ok(MomentOrientation::AntiParallel),
            other => Err(Error::validation("moment_orientation", format!("expected parallel or antiparallel, got {other:?}"))),
        }
    }
}

/// Effective electronic moment of one Zeeman level of a Kramers doublet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElectronicMoment {
    pub level: OpticalLevel,
    /// Effective g-factor along the field.
    pub g: f64,
    pub orientation: MomentOrientation,
}

impl ElectronicMoment {
    pub fn new(level: OpticalLevel, g: f64) -> Self {
        ElectronicMoment { level, g, orientation: MomentOrientation::default() }
    }

    /// g·μ_B/2 in J/T.
    pub fn magnitude(&self) -> f64 {
        self.g * BOHR_MAGNETON / 2.0
    }

    pub fn scaled(self, factor: f64) -> Self {
        ElectronicMoment { g: self.g * factor, ..self }
    }
}

/// Component of the dopant's dipole field at the ligand along the moment
/// axis: (μ₀/4π)(μ/r³)(3cos²θ − 1). Tesla.
pub fn dipolar_field(moment: &ElectronicMoment, site: &SpinBathSite) -> Result<f64> {
    if !(site.distance > 0.0) {
        return Err(Error::domain("ligand distance", "r must be > 0"));
    }
    let c = site.angle.cos();
    Ok(VACUUM_PERMEABILITY / (4.0 * PI) * moment.magnitude() / site.distance.powi(3) * (3.0 * c * c - 1.0))
}

/// Full dipole field vector in a frame whose z axis is the applied field,
/// with the ligand in the x-z plane.
pub fn dipolar_field_vector(moment: &ElectronicMoment, site: &SpinBathSite) -> Result<[f64; 3]> {
    if !(site.distance > 0.0) {
        return Err(Error::domain("ligand distance", "r must be > 0"));
    }
    let m = moment.orientation.sign() * moment.magnitude();
    let (s, c) = site.angle.sin_cos();
    let r_hat = [s, 0.0, c];
    let m_dot_r = m * c;
    let pre = VACUUM_PERMEABILITY / (4.0 * PI) / site.distance.powi(3);
    Ok([
        pre * 3.0 * m_dot_r * r_hat[0],
        pre * 3.0 * m_dot_r * r_hat[1],
        pre * (3.0 * m_dot_r * r_hat[2] - m),
    ])
}

/// Doublet (adjacent-level) splitting of the ligand nucleus: γ_n·|B ẑ + B_dip|.
pub fn superhyperfine_splitting(site: &SpinBathSite, moment: &ElectronicMoment, field_tesla: f64) -> Result<OrdinaryFrequency> {
    site.validate()?;
    let b = dipolar_field_vector(moment, site)?;
    let total = [b[0], b[1], b[2] + field_tesla];
    let norm = (total[0] * total[0] + total[1] * total[1] + total[2] * total[2]).sqrt();
    Ok(OrdinaryFrequency(site.gyromagnetic_ratio * norm))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SublevelSummary {
    pub count: usize,
    /// Smallest splitting between any two sublevels (adjacent levels).
    pub min_splitting: OrdinaryFrequency,
    /// Largest splitting (between the outermost sublevels).
    pub max_splitting: OrdinaryFrequency,
}

/// The 2I+1 nuclear sublevels are equally spaced by the doublet splitting,
/// so pairwise splittings run from one to 2I spacings.
pub fn sublevel_count_and_range(site: &SpinBathSite, moment: &ElectronicMoment, field_tesla: f64) -> Result<SublevelSummary> {
    let spacing = superhyperfine_splitting(site, moment, field_tesla)?;
    let count = site.level_count();
    Ok(SublevelSummary {
        count,
        min_splitting: spacing,
        max_splitting: OrdinaryFrequency(spacing.0 * (count - 1) as f64),
    })
}

/// Two-pulse echo envelope modulation for a dopant coupled to one
/// spin-½ ligand with ground/excited doublet splittings `delta_g`, `delta_e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MimsModulation {
    pub delta_g: OrdinaryFrequency,
    pub delta_e: OrdinaryFrequency,
    /// Modulation depth k in [0, 1].
    pub depth: f64,
}

impl MimsModulation {
    pub fn new(delta_g: OrdinaryFrequency, delta_e: OrdinaryFrequency, depth: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&depth) {
            return Err(Error::validation("modulation depth", format!("must lie in [0, 1], got {depth}")));
        }
        Ok(MimsModulation { delta_g, delta_e, depth })
    }

    /// V(τ) = 1 − (k/4)[2 − 2cos ω_g τ − 2cos ω_e τ + cos(ω_g − ω_e)τ + cos(ω_g + ω_e)τ]
    pub fn value(&self, tau: f64) -> f64 {
        let wg = 2.0 * PI * self.delta_g.0;
        let we = 2.0 * PI * self.delta_e.0;
        let bracket = 2.0 - 2.0 * (wg * tau).cos() - 2.0 * (we * tau).cos()
            + ((wg - we) * tau).cos()
            + ((wg + we) * tau).cos();
        1.0 - self.depth / 4.0 * bracket
    }

    /// The four frequencies present in the envelope: Δ_g, Δ_e, |Δ_e − Δ_g|, Δ_e + Δ_g.
    pub fn frequencies(&self) -> [f64; 4] {
        let (g, e) = (self.delta_g.0, self.delta_e.0);
        [g, e, (e - g).abs(), e + g]
    }
}

pub fn eseem_envelope(
    delta_g: OrdinaryFrequency,
    delta_e: OrdinaryFrequency,
    depth: f64,
    delays: &[f64],
) -> Result<TimeTrace> {
    let m = MimsModulation::new(delta_g, delta_e, depth)?;
    let y = delays.iter().map(|&t| m.value(t)).collect();
    Ok(TimeTrace::new(Axis::new("delay", "s"), Axis::new("envelope", ""), delays.to_vec(), y)?
        .with_meta("delta_g_hz", delta_g.0)
        .with_meta("delta_e_hz", delta_e.0)
        .with_meta("depth", depth))
}

/// Inputs of the dopant flip-flop spectral diffusion model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlipFlopParams {
    /// Γ₀, linewidth without spectral diffusion (Hz). The source data leave
    /// it unstated; 1 kHz is a documented default.
    pub gamma0: f64,
    /// Dopant density n (m⁻³).
    pub dopant_density: f64,
    /// Spin flip rate R = 1/T₁_spin (Hz).
    pub spin_flip_rate: f64,
    /// K
    pub temperature: f64,
    /// T
    pub field: f64,
    pub g_ground: f64,
    pub g_excited: f64,
}

impl FlipFlopParams {
    /// 50 ppm Nd:YVO₄ at 0.39 T and 0.5 K with T₁_spin = 98 ms.
    pub fn nd_yvo4() -> Self {
        FlipFlopParams {
            gamma0: 1e3,
            dopant_density: 6.3e23,
            spin_flip_rate: 1.0 / 98e-3,
            temperature: 0.5,
            field: 0.39,
            g_ground: 2.36,
            g_excited: 0.9,
        }
    }
}

/// Spectral diffusion linewidth from dopant magnetic dipole interactions,
/// Γ_SD = π μ₀ |g_g − g_e| g_g μ_B² n /(9√3 ħ) · sech²(g_g μ_B B/2kT).
///
/// With ħ in the denominator the expression is an angular rate; it is
/// returned as an ordinary frequency.
pub fn flipflop_gamma_sd(p: &FlipFlopParams) -> Result<OrdinaryFrequency> {
    let thermal = sech_squared_thermal(p.g_ground, p.field, p.temperature)?;
    let angular = PI * VACUUM_PERMEABILITY * (p.g_ground - p.g_excited).abs() * p.g_ground * BOHR_MAGNETON * BOHR_MAGNETON
        * p.dopant_density
        / (9.0 * 3f64.sqrt() * HBAR)
        * thermal;
    Ok(AngularRate(angular).to_ordinary())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlipFlopDephasing {
    /// T_M (s)
    pub t_m: f64,
    /// 1/(πT_M) in Hz.
    pub effective_linewidth: f64,
    /// 1/(πT_M) − Γ₀ in Hz.
    pub added_dephasing: f64,
}

/// Phase memory time of the Lorentzian spectral diffusion model,
/// T_M = (2Γ₀/(Γ_SD R))(−1 + sqrt(1 + Γ_SD R/(πΓ₀²))).
///
/// Evaluated in the cancellation-free form T_M = 2/(πΓ₀(1 + sqrt(1+x))).
pub fn flipflop_tm(gamma0: f64, gamma_sd: f64, flip_rate: f64) -> Result<FlipFlopDephasing> {
    if !(gamma0 > 0.0) || gamma_sd < 0.0 || flip_rate < 0.0 {
        return Err(Error::domain("flip-flop parameters", "Γ₀ must be > 0; Γ_SD and R must be >= 0"));
    }
    let x = gamma_sd * flip_rate / (PI * gamma0 * gamma0);
    let root = (1.0 + x).sqrt();
    let t_m = 2.0 / (PI * gamma0 * (1.0 + root));
    Ok(FlipFlopDephasing {
        t_m,
        effective_linewidth: gamma0 * (1.0 + root) / 2.0,
        added_dephasing: gamma0 * x / (2.0 * (1.0 + root)),
    })
}

/// Excess homogeneous linewidth beyond the lifetime limit, 1/(πT₂) − 1/(2πT₁), in Hz.
pub fn superhyperfine_dephasing_bound(t1: f64, t2: f64) -> f64 {
    1.0 / (PI * t2) - 1.0 / (2.0 * PI * t1)
}
