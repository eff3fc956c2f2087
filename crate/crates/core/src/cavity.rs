//! Cavity-QED figures of merit for a single emitter in a nanophotonic
//! resonator.
//!
//! Two independent routes lead to the Purcell factor: the mode-volume
//! formula [`max_purcell`] and the coupling route 4g₀²T_rad/κ
//! ([`purcell_from_coupling`]). They agree exactly when κ = ω₀/Q.

use std::f64::consts::PI;

use crate::constants::{HBAR, VACUUM_PERMITTIVITY};
use crate::error::{Error, Result};
use crate::quantities::AngularRate;
use crate::regression::{mean_estimate, Estimate};

/// Relative mismatch allowed between a supplied κ and ω₀/Q.
pub const KAPPA_Q_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct CavityDevice {
    pub quality_factor: f64,
    /// m³
    pub mode_volume: f64,
    pub resonance: AngularRate,
    /// κ_in/κ, the fraction of the loss going out through the input mirror.
    pub kappa_in_fraction: f64,
    /// Total energy decay rate.
    pub kappa: AngularRate,
    /// Relative difference between the supplied κ and ω₀/Q, when κ was given.
    pub kappa_discrepancy: Option<f64>,
}

impl CavityDevice {
    /// Builds a device. An explicit `kappa` takes precedence over ω₀/Q; the
    /// mismatch is kept in `kappa_discrepancy` and must stay within
    /// [`KAPPA_Q_TOLERANCE`].
    pub fn new(
        quality_factor: f64,
        mode_volume: f64,
        resonance: AngularRate,
        kappa_in_fraction: f64,
        kappa: Option<AngularRate>,
    ) -> Result<Self> {
        if !(quality_factor > 0.0) {
            return Err(Error::validation("quality_factor", format!("must be > 0, got {quality_factor}")));
        }
        if !(mode_volume > 0.0) {
            return Err(Error::validation("mode_volume", format!("must be > 0, got {mode_volume}")));
        }
        if !(resonance.0 > 0.0) {
            return Err(Error::validation("resonance", "must be > 0"));
        }
        if !(kappa_in_fraction > 0.0 && kappa_in_fraction <= 1.0) {
            return Err(Error::validation(
                "kappa_in_fraction",
                format!("must lie in (0, 1], got {kappa_in_fraction}"),
            ));
        }
        let from_q = kappa_from_q(resonance, quality_factor);
        let (kappa, kappa_discrepancy) = match kappa {
            Some(k) => {
                if !(k.0 > 0.0) {
                    return Err(Error::validation("kappa", "must be > 0"));
                }
                let d = (k.0 - from_q.0) / from_q.0;
                if d.abs() > KAPPA_Q_TOLERANCE {
                    return Err(Error::Inconsistent(format!(
                        "kappa {} disagrees with resonance/Q {} by {:.1} %",
                        k,
                        from_q,
                        100.0 * d
                    )));
                }
                (k, Some(d))
            }
            None => (from_q, None),
        };
        Ok(CavityDevice { quality_factor, mode_volume, resonance, kappa_in_fraction, kappa, kappa_discrepancy })
    }

    /// The nanobeam resonator: Q = 3900, V = 0.056 μm³, κ = 2π×90 GHz,
    /// κ_in = 0.45κ, resonant with the 880 nm transition.
    pub fn nd_yvo4_nanobeam() -> Self {
        let resonance = AngularRate(2.0 * PI * crate::constants::SPEED_OF_LIGHT / 880e-9);
        CavityDevice::new(3900.0, 0.056e-18, resonance, 0.45, Some(AngularRate::two_pi_times(90e9)))
            .expect("reference device is valid")
    }

    pub fn kappa_in(&self) -> AngularRate {
        self.kappa.scale(self.kappa_in_fraction)
    }

    /// Same device with the quality factor multiplied by `factor`.
    pub fn with_q_scaled(&self, factor: f64) -> Self {
        CavityDevice {
            quality_factor: self.quality_factor * factor,
            kappa: self.kappa.scale(1.0 / factor),
            ..self.clone()
        }
    }
}

/// A named chain of efficiencies between the cavity and the detector.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionChain {
    pub stages: Vec<(String, f64)>,
    /// Hz
    pub dark_count_rate: f64,
}

impl DetectionChain {
    pub fn new(stages: Vec<(String, f64)>, dark_count_rate: f64) -> Self {
        DetectionChain { stages, dark_count_rate }
    }

    /// Cavity out-coupling, fiber coupling, fiber links, circulator, SNSPD.
    pub fn nd_yvo4_setup() -> Self {
        DetectionChain::new(
            vec![
                ("kappa_in".into(), 0.45),
                ("waveguide_fiber".into(), 0.19),
                ("fiber_links".into(), 0.80),
                ("circulator".into(), 0.65),
                ("snspd".into(), 0.82),
            ],
            2.0,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetRow {
    pub stage: String,
    pub efficiency: f64,
    pub cumulative: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetReport {
    pub rows: Vec<BudgetRow>,
    pub overall: f64,
}

/// Times and rates describing the optical coherence of one emitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceSummary {
    /// s
    pub t1: f64,
    /// Homogeneous coherence time (s).
    pub t2: f64,
    /// Ramsey dephasing time (s).
    pub t2_star: f64,
    /// γ* in Hz.
    pub pure_dephasing: f64,
}

impl CoherenceSummary {
    /// γ_h = 1/(πT₂) in Hz.
    pub fn homogeneous_linewidth(&self) -> f64 {
        1.0 / (PI * self.t2)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t1 > 0.0 && self.t2 > 0.0 && self.t2_star > 0.0 && self.pure_dephasing >= 0.0) {
            return Err(Error::validation("coherence", "times must be > 0 and γ* >= 0"));
        }
        if self.t2 > 2.0 * self.t1 * 1.05 {
            return Err(Error::Inconsistent(format!("T2 = {} s exceeds 2 T1 = {} s", self.t2, 2.0 * self.t1)));
        }
        if self.homogeneous_linewidth() < self.pure_dephasing {
            return Err(Error::Inconsistent("homogeneous linewidth below pure dephasing rate".into()));
        }
        Ok(())
    }
}

/// κ = ω₀/Q
pub fn kappa_from_q(resonance: AngularRate, quality_factor: f64) -> AngularRate {
    AngularRate(resonance.0 / quality_factor)
}

/// Upper bound on the Purcell factor for a perfectly placed, aligned dipole:
/// F = 3/(4π²χ_L²) · (λ/n)³ · Q/V.
pub fn max_purcell(wavelength: f64, refractive_index: f64, local_field: f64, quality_factor: f64, mode_volume: f64) -> f64 {
    let lam_n = wavelength / refractive_index;
    3.0 / (4.0 * PI * PI * local_field * local_field) * lam_n.powi(3) * quality_factor / mode_volume
}

/// Single-photon coupling at the field maximum: g₀ = (μ/n)·sqrt(ω₀/(2ħε₀V)).
pub fn max_coupling_g0(dipole: f64, refractive_index: f64, resonance: AngularRate, mode_volume: f64) -> AngularRate {
    AngularRate(dipole / refractive_index * (resonance.0 / (2.0 * HBAR * VACUUM_PERMITTIVITY * mode_volume)).sqrt())
}

/// Purcell factor from the coupling route, 4g₀²T_rad/κ.
pub fn purcell_from_coupling(g0: AngularRate, kappa: AngularRate, radiative_lifetime: f64) -> f64 {
    4.0 * g0.0 * g0.0 * radiative_lifetime / kappa.0
}

/// Intracavity photon number for a resonant drive of power `input_power` (W)
/// through the input mirror: n̄ = 4 P κ_in / (ħ ω₀ κ²).
pub fn mean_photon_number(input_power: f64, kappa_in: AngularRate, kappa: AngularRate, resonance: AngularRate) -> f64 {
    4.0 * input_power * kappa_in.0 / (HBAR * resonance.0 * kappa.0 * kappa.0)
}

/// Lifetime of the emitter in the cavity: (4g₀²/κ + (1−β)/T₁)⁻¹.
pub fn cavity_lifetime(g0: AngularRate, kappa: AngularRate, branching_ratio: f64, bulk_lifetime: f64) -> Result<f64> {
    if !(branching_ratio > 0.0 && branching_ratio <= 1.0) {
        return Err(Error::domain("branching ratio", format!("must lie in (0, 1], got {branching_ratio}")));
    }
    if !(kappa.0 > 0.0 && bulk_lifetime > 0.0) {
        return Err(Error::domain("cavity lifetime inputs", "κ and T1 must be > 0"));
    }
    let rate = 4.0 * g0.0 * g0.0 / kappa.0 + (1.0 - branching_ratio) / bulk_lifetime;
    if rate == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 / rate)
}

/// Purcell factor implied by a measured cavity lifetime, inverting
/// [`cavity_lifetime`] with 4g₀²/κ = F/T_rad.
pub fn measured_purcell(cavity_lifetime: f64, bulk_lifetime: f64, branching_ratio: f64, radiative_lifetime: f64) -> Result<f64> {
    if !(cavity_lifetime > 0.0) {
        return Err(Error::domain("cavity lifetime", "must be > 0"));
    }
    let other = (1.0 - branching_ratio) / bulk_lifetime;
    let excess = 1.0 / cavity_lifetime - other;
    if excess < -1e-12 * other {
        return Err(Error::NonPhysical(format!(
            "cavity lifetime {cavity_lifetime} s is longer than the no-cavity limit {} s",
            1.0 / other
        )));
    }
    Ok(excess.max(0.0) * radiative_lifetime)
}

/// Extracts g₀ from Rabi frequencies measured at several photon numbers,
/// Ω = 2g₀√n̄. Points are `(n̄, Ω)`. Errors are taken proportional to Ω, so
/// the weighted fit reduces to the mean of Ω/(2√n̄).
pub fn g0_from_rabi(points: &[(f64, AngularRate)]) -> Result<Estimate> {
    if points.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: points.len() });
    }
    if let Some((n, _)) = points.iter().find(|(n, _)| !(*n > 0.0)) {
        return Err(Error::domain("photon number", format!("must be > 0, got {n}")));
    }
    let ratios: Vec<f64> = points.iter().map(|(n, w)| w.0 / (2.0 * n.sqrt())).collect();
    mean_estimate(&ratios)
}

/// C = 4g₀²/(κγ_h) with γ_h taken in angular units, 2π/(πT₂) = 2/T₂.
pub fn cooperativity(g0: AngularRate, kappa: AngularRate, t2: f64) -> f64 {
    let gamma_h = 2.0 / t2;
    4.0 * g0.0 * g0.0 / (kappa.0 * gamma_h)
}

/// Fraction of Fourier-limited emission, T₂/(2T₁), clamped to [0, 1].
pub fn indistinguishability(t2: f64, t1: f64) -> Result<f64> {
    if !(t2 > 0.0 && t1 > 0.0) {
        return Err(Error::domain("coherence times", "must be > 0"));
    }
    if t2 > 2.1 * t1 {
        return Err(Error::Inconsistent(format!("T2 = {t2} s exceeds 2.1 T1 = {} s", 2.1 * t1)));
    }
    Ok((t2 / (2.0 * t1)).clamp(0.0, 1.0))
}

pub fn detection_budget(chain: &DetectionChain) -> Result<BudgetReport> {
    let mut cumulative = 1.0;
    let mut rows = Vec::with_capacity(chain.stages.len());
    for (name, eff) in &chain.stages {
        if !(*eff > 0.0 && *eff <= 1.0) {
            return Err(Error::validation(format!("stage {name}"), format!("efficiency must lie in (0, 1], got {eff}")));
        }
        cumulative *= eff;
        rows.push(BudgetRow { stage: name.clone(), efficiency: *eff, cumulative });
    }
    Ok(BudgetReport { rows, overall: cumulative })
}

/// Inputs for projecting figures of merit to a higher-Q cavity.
#[derive(Debug, Clone, PartialEq)]
pub struct QScalingBase {
    pub kappa: AngularRate,
    pub g0: AngularRate,
    pub branching_ratio: f64,
    pub bulk_lifetime: f64,
    /// Supplies T₂ for the cooperativity and γ* for the indistinguishability.
    pub coherence: CoherenceSummary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QScalingReport {
    pub factor: f64,
    pub kappa: AngularRate,
    pub cavity_lifetime: f64,
    pub cooperativity: f64,
    /// Γ_rad/(Γ_rad + γ*), Γ_rad = 1/(2πT_cav).
    pub indistinguishability: f64,
}

/// Recomputes T_cav, C and the indistinguishability with κ → κ/factor.
/// γ* is held fixed: it comes from the spin bath, not the cavity.
pub fn project_q_scaling(base: &QScalingBase, factor: f64) -> Result<QScalingReport> {
    if !(factor > 0.0) {
        return Err(Error::domain("Q scaling factor", format!("must be > 0, got {factor}")));
    }
    let kappa = base.kappa.scale(1.0 / factor);
    let t_cav = cavity_lifetime(base.g0, kappa, base.branching_ratio, base.bulk_lifetime)?;
    let c = cooperativity(base.g0, kappa, base.coherence.t2);
    let gamma_rad = 1.0 / (2.0 * PI * t_cav);
    let indist = gamma_rad / (gamma_rad + base.coherence.pure_dephasing);
    Ok(QScalingReport { factor, kappa, cavity_lifetime: t_cav, cooperativity: c, indistinguishability: indist })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::SPEED_OF_LIGHT;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn omega_880() -> AngularRate {
        AngularRate(2.0 * PI * SPEED_OF_LIGHT / 880e-9)
    }

    const CHI_REAL: f64 = 1.357_030_176_497_677;

    #[test]
    fn kappa_from_quality_factor() {
        let k = kappa_from_q(AngularRate::two_pi_times(340.703e12), 3900.0);
        assert!(rel(k.to_ordinary().hz(), 90e9) < 0.05);
        assert!(rel(k.to_ordinary().hz(), 87.36e9) < 1e-3);
        let k10 = kappa_from_q(AngularRate::two_pi_times(340.703e12), 39000.0);
        assert!(rel(k10.to_ordinary().hz(), 8.736e9) < 1e-3);
        assert!(kappa_from_q(AngularRate(1e15), 1e300).0 < 1e-280);
    }

    #[test]
    fn device_kappa_precedence() {
        let d = CavityDevice::nd_yvo4_nanobeam();
        assert_eq!(d.kappa, AngularRate::two_pi_times(90e9));
        let disc = d.kappa_discrepancy.unwrap();
        assert!(disc > 0.02 && disc < 0.04, "{disc}");
        let bad = CavityDevice::new(3900.0, 0.056e-18, omega_880(), 0.45, Some(AngularRate::two_pi_times(120e9)));
        assert!(matches!(bad, Err(Error::Inconsistent(_))));
        assert!(CavityDevice::new(-1.0, 0.056e-18, omega_880(), 0.45, None).is_err());
        assert!(CavityDevice::new(3900.0, 0.056e-18, omega_880(), 1.2, None).is_err());
    }

    #[test]
    fn purcell_mode_volume_route() {
        let f = max_purcell(880e-9, 2.1785, CHI_REAL, 3900.0, 0.056e-18);
        assert!(rel(f, 189.0) < 0.03, "{f}");
        let f2 = max_purcell(880e-9, 2.1785, CHI_REAL, 7800.0, 0.056e-18);
        assert!(rel(f2, 2.0 * f) < 1e-14);
    }

    #[test]
    fn coupling_values() {
        let g = max_coupling_g0(1.59e-31, 2.1785, omega_880(), 0.056e-18);
        assert!(rel(g.to_ordinary().hz(), 52.7e6) < 0.02, "{g}");
        let g4 = max_coupling_g0(1.59e-31, 2.1785, omega_880(), 4.0 * 0.056e-18);
        assert!(rel(g4.0, g.0 / 2.0) < 1e-14);
        assert_eq!(max_coupling_g0(0.0, 2.1785, omega_880(), 0.056e-18).0, 0.0);
    }

    #[test]
    fn photon_number_values() {
        let n = mean_photon_number(
            71.8e-9,
            AngularRate::two_pi_times(40e9),
            AngularRate::two_pi_times(90e9),
            omega_880(),
        );
        assert!(rel(n, 1.0) < 0.02, "{n}");
        assert_eq!(mean_photon_number(0.0, AngularRate(1.0), AngularRate(1.0), AngularRate(1.0)), 0.0);
        let n2 = mean_photon_number(
            2.0 * 71.8e-9,
            AngularRate::two_pi_times(40e9),
            AngularRate::two_pi_times(90e9),
            omega_880(),
        );
        assert!(rel(n2, 2.0 * n) < 1e-14);
    }

    #[test]
    fn cavity_lifetime_values() {
        let k = AngularRate::two_pi_times(90e9);
        let t = cavity_lifetime(AngularRate::two_pi_times(52.7e6), k, 0.38, 90e-6).unwrap();
        assert!(rel(t, 1.25e-6) < 0.05, "{t}");
        assert!(rel(t, 1.278e-6) < 1e-3, "{t}");
        let t0 = cavity_lifetime(AngularRate::ZERO, k, 0.38, 90e-6).unwrap();
        assert!(rel(t0, 90e-6 / 0.62) < 1e-14);
        assert!(rel(t0, 145e-6) < 0.005);
        let t28 = cavity_lifetime(AngularRate::two_pi_times(28.5e6), k, 0.38, 90e-6).unwrap();
        assert!(rel(t28, 4.28e-6) < 2e-3, "{t28}");
        assert!(cavity_lifetime(AngularRate::ZERO, k, 0.0, 90e-6).is_err());
    }

    #[test]
    fn measured_purcell_values() {
        let f = measured_purcell(2.1e-6, 90e-6, 0.38, 237e-6).unwrap();
        assert!(rel(f, 111.0) < 0.02, "{f}");
        let f0 = measured_purcell(90e-6 / 0.62, 90e-6, 0.38, 237e-6).unwrap();
        assert!(f0.abs() < 1e-9);
        let f_theory = measured_purcell(1.278e-6, 90e-6, 0.38, 237e-6).unwrap();
        assert!(rel(f_theory, 182.0) < 0.01, "{f_theory}");
        assert!(matches!(measured_purcell(200e-6, 90e-6, 0.38, 237e-6), Err(Error::NonPhysical(_))));
    }

    #[test]
    fn g0_from_exact_rabi_points() {
        let g0 = AngularRate::two_pi_times(28.5e6);
        let pts: Vec<_> = [0.1, 0.4, 0.9, 1.6, 2.5]
            .iter()
            .map(|&n: &f64| (n, AngularRate(2.0 * g0.0 * n.sqrt())))
            .collect();
        let est = g0_from_rabi(&pts).unwrap();
        assert!(rel(est.value, g0.0) < 1e-12);
        let doubled: Vec<_> = pts.iter().map(|(n, w)| (*n, w.scale(2.0))).collect();
        assert!(rel(g0_from_rabi(&doubled).unwrap().value, 2.0 * g0.0) < 1e-12);
        assert!(matches!(g0_from_rabi(&pts[..1]), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn cooperativity_values() {
        let g = AngularRate::two_pi_times(28.5e6);
        let k = AngularRate::two_pi_times(90e9);
        let c = cooperativity(g, k, 25.4e-6);
        assert!(rel(c, 2.9) < 0.03, "{c}");
        assert!(rel(cooperativity(g, k, 12.7e-6), c / 2.0) < 1e-14);
        let c10 = cooperativity(g, k.scale(0.1), 25.4e-6);
        assert!(rel(c10, 29.0) < 0.10, "{c10}");
    }

    #[test]
    fn cooperativity_is_convention_free() {
        // Same physics written with every rate in ordinary Hz: 4g²/(κ γ_h) with γ_h = 1/(πT₂).
        let (g_hz, k_hz, t2) = (28.5e6, 90e9, 25.4e-6);
        let ordinary = 4.0 * g_hz * g_hz / (k_hz * (1.0 / (PI * t2)));
        let angular = cooperativity(AngularRate::two_pi_times(g_hz), AngularRate::two_pi_times(k_hz), t2);
        assert!(rel(ordinary, angular) < 1e-12);
    }

    #[test]
    fn indistinguishability_values() {
        let i = indistinguishability(4.0e-6, 2.1e-6).unwrap();
        assert!((i - 0.952).abs() < 5e-4, "{i}");
        assert_eq!(indistinguishability(4.2e-6, 2.1e-6).unwrap(), 1.0);
        assert_eq!(indistinguishability(2.1e-6, 2.1e-6).unwrap(), 0.5);
        assert_eq!(indistinguishability(4.3e-6, 2.1e-6).unwrap(), 1.0);
        assert!(matches!(indistinguishability(5.0e-6, 2.1e-6), Err(Error::Inconsistent(_))));
    }

    #[test]
    fn budget_values() {
        let r = detection_budget(&DetectionChain::nd_yvo4_setup()).unwrap();
        assert!((r.overall - 0.036).abs() < 0.005);
        assert!((r.overall - 0.45 * 0.19 * 0.80 * 0.65 * 0.82).abs() < 1e-15);
        assert_eq!(r.rows.len(), 5);
        assert_eq!(r.rows.last().unwrap().cumulative, r.overall);
        assert_eq!(detection_budget(&DetectionChain::new(vec![], 0.0)).unwrap().overall, 1.0);
        let improved = DetectionChain::new(
            [0.80, 0.97, 0.90, 0.95, 0.95].iter().enumerate().map(|(i, e)| (format!("s{i}"), *e)).collect(),
            0.0,
        );
        assert!((detection_budget(&improved).unwrap().overall - 0.63).abs() < 0.005);
        let bad = DetectionChain::new(vec![("x".into(), 1.5)], 0.0);
        assert!(matches!(detection_budget(&bad), Err(Error::Validation { .. })));
        let zero = DetectionChain::new(vec![("x".into(), 0.0)], 0.0);
        assert!(detection_budget(&zero).is_err());
    }

    fn base(g0_mhz: f64) -> QScalingBase {
        QScalingBase {
            kappa: AngularRate::two_pi_times(90e9),
            g0: AngularRate::two_pi_times(g0_mhz * 1e6),
            branching_ratio: 0.38,
            bulk_lifetime: 90e-6,
            coherence: CoherenceSummary { t1: 2.1e-6, t2: 25.4e-6, t2_star: 4.0e-6, pure_dephasing: 9.7e3 },
        }
    }

    #[test]
    fn q_scaling_identity_and_projection() {
        let b = base(28.5);
        let one = project_q_scaling(&b, 1.0).unwrap();
        assert_eq!(one.kappa, b.kappa);
        assert_eq!(one.cavity_lifetime, cavity_lifetime(b.g0, b.kappa, 0.38, 90e-6).unwrap());
        assert_eq!(one.cooperativity, cooperativity(b.g0, b.kappa, 25.4e-6));
        let ten = project_q_scaling(&b, 10.0).unwrap();
        assert!(rel(ten.cooperativity, 29.0) < 0.02, "{}", ten.cooperativity);
        let strong = project_q_scaling(&base(52.7), 10.0).unwrap();
        assert!((strong.indistinguishability - 0.992).abs() < 1e-3, "{}", strong.indistinguishability);
        assert!(project_q_scaling(&b, 0.0).is_err());
    }

    #[test]
    fn coherence_summary_checks() {
        let c = CoherenceSummary { t1: 2.1e-6, t2: 4.0e-6, t2_star: 4.0e-6, pure_dephasing: 9.7e3 };
        assert!(c.validate().is_ok());
        assert!((c.homogeneous_linewidth() - 1.0 / (PI * 4.0e-6)).abs() < 1e-9);
        let bad = CoherenceSummary { t2: 5.0e-6, ..c };
        assert!(bad.validate().is_err());
    }

    proptest! {
        #[test]
        fn two_purcell_routes_agree(
            lam in 500e-9f64..2000e-9,
            n in 1.2f64..3.5,
            q in 100.0f64..1e6,
            v in 1e-20f64..1e-16,
            f in 1e-7f64..1e-4,
        ) {
            use crate::spectroscopy::{dipole_moment, local_field_correction, radiative_lifetime, LocalFieldModel};
            let chi = local_field_correction(n, LocalFieldModel::Real).unwrap();
            let w = AngularRate(2.0 * PI * SPEED_OF_LIGHT / lam);
            let mu = dipole_moment(f, w).unwrap();
            let t_rad = radiative_lifetime(f, n, lam, LocalFieldModel::Real).unwrap();
            let g = max_coupling_g0(mu, n, w, v);
            let a = max_purcell(lam, n, chi, q, v);
            let b = purcell_from_coupling(g, kappa_from_q(w, q), t_rad);
            prop_assert!(rel(a, b) < 0.03);
        }

        #[test]
        fn cavity_lifetime_monotone(g in 1e6f64..1e9, k in 1e10f64..1e13) {
            let t = cavity_lifetime(AngularRate(g), AngularRate(k), 0.38, 90e-6).unwrap();
            let t_g = cavity_lifetime(AngularRate(g * 1.01), AngularRate(k), 0.38, 90e-6).unwrap();
            let t_k = cavity_lifetime(AngularRate(g), AngularRate(k * 1.01), 0.38, 90e-6).unwrap();
            prop_assert!(t_g < t);
            prop_assert!(t_k > t);
        }

        #[test]
        fn budget_permutation_invariant(mut effs in proptest::collection::vec(0.01f64..1.0, 0..8), seed in 0u64..1000) {
            let chain = |e: &[f64]| DetectionChain::new(e.iter().map(|x| ("s".to_string(), *x)).collect(), 0.0);
            let a = detection_budget(&chain(&effs)).unwrap().overall;
            let len = effs.len();
            if len > 1 {
                effs.rotate_left((seed as usize) % len);
                effs.reverse();
            }
            let b = detection_budget(&chain(&effs)).unwrap().overall;
            prop_assert!((a - b).abs() <= 1e-14 * a.max(1e-300));
        }
    }
}
