//! Rabi nutation, Ramsey and two-pulse echo experiments.

use rayon::prelude::*;
use std::f64::consts::PI;

use super::bloch::{bloch_evolve, BlochState, TwoLevelParams};
use crate::error::{Error, Result};
use crate::quantities::{AngularRate, OrdinaryFrequency};
use crate::spinbath::MimsModulation;
use crate::trace::{Axis, TimeTrace};

fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::validation(name, "grid is empty"));
    }
    if let Some(v) = grid.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(Error::validation(name, format!("grid values must be ≥ 0 and finite, got {v}")));
    }
    Ok(())
}

/// Excited-state population after a square pulse of Rabi rate Ω = 2g₀√n̄,
/// for each mean photon number in `nbar`. The drive fields of `p` are
/// replaced; its detuning and relaxation times are kept.
pub fn rabi_nutation_scan(g0: AngularRate, nbar: &[f64], pulse: f64, p: &TwoLevelParams) -> Result<TimeTrace> {
    if !(pulse > 0.0) || !pulse.is_finite() {
        return Err(Error::validation("pulse", "duration must be > 0"));
    }
    check_grid("nbar", nbar)?;
    let y = nbar
        .par_iter()
        .map(|&n| {
            let drive = p.with_rabi(AngularRate(2.0 * g0.0 * n.sqrt()));
            bloch_evolve(BlochState::GROUND, &drive, pulse).map(|s| s.excited_population())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(TimeTrace::new(Axis::new("nbar", ""), Axis::new("excited_population", ""), nbar.to_vec(), y)?
        .with_meta("g0_hz", g0.to_ordinary().0)
        .with_meta("pulse_s", pulse)
        .with_meta("t1_s", p.t1)
        .with_meta("t2_s", p.t2)
        .with_meta("detuning_hz", p.detuning.to_ordinary().0))
}

/// Nutation extrema of a scan that starts below the first π area.
///
/// Maxima are read as pulse areas π, 3π, 5π, ... and the minima between them
/// as 2π, 4π, ...; each is located by a parabola through √n̄ and returned
/// as `(n̄, Ω)` with Ω = area/pulse.
pub fn rabi_extrema(trace: &TimeTrace, pulse: f64) -> Result<Vec<(f64, AngularRate)>> {
    if !(pulse > 0.0) {
        return Err(Error::validation("pulse", "duration must be > 0"));
    }
    let x: Vec<f64> = trace.x.iter().map(|n| n.max(0.0).sqrt()).collect();
    let y = &trace.y;
    let mut out = Vec::new();
    let mut order = 0u32;
    let mut want_max = true;
    for i in 1..y.len().saturating_sub(1) {
        let is_max = y[i] > y[i - 1] && y[i] >= y[i + 1];
        let is_min = y[i] < y[i - 1] && y[i] <= y[i + 1];
        if (want_max && is_max) || (!want_max && is_min) {
            order += 1;
            want_max = !want_max;
            let xv = parabola_vertex((x[i - 1], y[i - 1]), (x[i], y[i]), (x[i + 1], y[i + 1])).unwrap_or(x[i]);
            let area = order as f64 * PI;
            out.push((xv * xv, AngularRate(area / pulse)));
        }
    }
    if out.is_empty() {
        return Err(Error::FitFailure("no nutation extremum in scan".into()));
    }
    Ok(out)
}

fn parabola_vertex(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> Option<f64> {
    let d1 = (b.1 - a.1) / (b.0 - a.0);
    let d2 = (c.1 - b.1) / (c.0 - b.0);
    let curv = (d2 - d1) / (c.0 - a.0);
    if curv == 0.0 || !curv.is_finite() {
        return None;
    }
    let v = 0.5 * (a.0 + b.0) - d1 / (2.0 * curv);
    (v >= a.0 && v <= c.0).then_some(v)
}

/// Decay form of the Ramsey fringe envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnvelopeShape {
    #[default]
    Exponential,
    Gaussian,
}

impl EnvelopeShape {
    pub fn value(self, t: f64, t2_star: f64) -> f64 {
        match self {
            EnvelopeShape::Exponential => (-t / t2_star).exp(),
            EnvelopeShape::Gaussian => (-(t / t2_star).powi(2)).exp(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EnvelopeShape::Exponential => "exponential",
            EnvelopeShape::Gaussian => "gaussian",
        }
    }
}

impl std::str::FromStr for EnvelopeShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exponential" | "exp" => Ok(EnvelopeShape::Exponential),
            "gaussian" | "gauss" => Ok(EnvelopeShape::Gaussian),
            other => Err(Error::validation("envelope", format!("unknown shape {other:?}"))),
        }
    }
}

/// Background-free Ramsey signal
/// S(t) = ½[1 + cos(2πδt)·cos(πΔt)·env(t)] with δ the laser detuning of `p`.
pub fn simulate_ramsey(p: &TwoLevelParams, beat: OrdinaryFrequency, t2_star: f64, delays: &[f64]) -> Result<TimeTrace> {
    simulate_ramsey_with(p, beat, t2_star, delays, EnvelopeShape::Exponential)
}

pub fn simulate_ramsey_with(
    p: &TwoLevelParams,
    beat: OrdinaryFrequency,
    t2_star: f64,
    delays: &[f64],
    shape: EnvelopeShape,
) -> Result<TimeTrace> {
    if !(t2_star > 0.0) {
        return Err(Error::validation("t2_star", "must be > 0"));
    }
    check_grid("delays", delays)?;
    let delta = p.detuning.to_ordinary().0;
    let y = delays
        .iter()
        .map(|&t| 0.5 * (1.0 + (2.0 * PI * delta * t).cos() * (PI * beat.0 * t).cos() * shape.value(t, t2_star)))
        .collect();
    Ok(TimeTrace::new(Axis::new("delay", "s"), Axis::new("ramsey_signal", ""), delays.to_vec(), y)?
        .with_meta("beat_hz", beat.0)
        .with_meta("t2_star_s", t2_star)
        .with_meta("detuning_hz", delta)
        .with_meta("envelope", shape.name()))
}

/// Fringe contrast 2S − 1 of a Ramsey trace.
pub fn ramsey_contrast(trace: &TimeTrace) -> Vec<f64> {
    trace.y.iter().map(|s| 2.0 * s - 1.0).collect()
}

/// Ligand modulation applied to the echo amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum EchoModulation {
    #[default]
    None,
    Mims(MimsModulation),
    /// Oscillatory part decays as e^{−τ/decay} toward the mean 1 − k/2,
    /// as from a spread of ligand splittings.
    DampedMims { modulation: MimsModulation, decay: f64 },
}

impl EchoModulation {
    pub fn value(&self, tau: f64) -> f64 {
        match self {
            EchoModulation::None => 1.0,
            EchoModulation::Mims(m) => m.value(tau),
            EchoModulation::DampedMims { modulation, decay } => {
                let mean = 1.0 - modulation.depth / 2.0;
                mean + (modulation.value(tau) - mean) * (-tau / decay).exp()
            }
        }
    }
}

/// Echo intensity I(τ) = e^{−4τ/T₂}·V(τ)² at unit initial intensity.
pub fn simulate_echo_decay(t2: f64, eseem: &EchoModulation, delays: &[f64]) -> Result<TimeTrace> {
    if !(t2 > 0.0) {
        return Err(Error::validation("t2", "must be > 0"));
    }
    if let EchoModulation::DampedMims { decay, .. } = eseem {
        if !(*decay > 0.0) {
            return Err(Error::validation("modulation decay", "must be > 0"));
        }
    }
    check_grid("delays", delays)?;
    let y = delays
        .iter()
        .map(|&t| {
            let v = eseem.value(t);
            (-4.0 * t / t2).exp() * v * v
        })
        .collect();
    let mut tr = TimeTrace::new(Axis::new("delay", "s"), Axis::new("echo_intensity", ""), delays.to_vec(), y)?
        .with_meta("t2_s", t2);
    match eseem {
        EchoModulation::None => {}
        EchoModulation::Mims(m) | EchoModulation::DampedMims { modulation: m, .. } => {
            tr = tr
                .with_meta("delta_g_hz", m.delta_g.0)
                .with_meta("delta_e_hz", m.delta_e.0)
                .with_meta("depth", m.depth);
        }
    }
    if let EchoModulation::DampedMims { decay, .. } = eseem {
        tr = tr.with_meta("modulation_decay_s", decay);
    }
    Ok(tr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cavity::g0_from_rabi;
    use crate::spectrum::{amplitude_spectrum, Window};
    use crate::trace::linspace;

    fn weak_damping() -> TwoLevelParams {
        TwoLevelParams::new(AngularRate(0.0), AngularRate(0.0), 100e-6, 27e-6).unwrap()
    }

    #[test]
    fn no_drive_no_population() {
        let tr = rabi_nutation_scan(AngularRate::two_pi_times(52.7e6), &[0.0], 250e-9, &weak_damping()).unwrap();
        assert!(tr.y[0].abs() < 1e-12);
    }

    #[test]
    fn nutation_peaks_sit_at_odd_pi_areas() {
        let g0 = AngularRate::two_pi_times(52.7e6);
        let pulse = 250e-9;
        let nbar = linspace(0.0, 1e-2, 801);
        let tr = rabi_nutation_scan(g0, &nbar, pulse, &weak_damping()).unwrap();
        let ext = rabi_extrema(&tr, pulse).unwrap();
        assert!(ext.len() >= 4, "{ext:?}");
        for (k, (n, _)) in ext.iter().enumerate().filter(|(k, _)| k % 2 == 0) {
            let area = 2.0 * g0.0 * n.sqrt() * pulse;
            let odd = (k + 1) as f64 * PI;
            assert!((area - odd).abs() / odd < 0.02, "area {area} vs {odd}");
        }
        let est = g0_from_rabi(&ext).unwrap();
        assert!((est.value - g0.0).abs() / g0.0 < 0.02);
    }

    #[test]
    fn ramsey_nodes_follow_beat() {
        let p = weak_damping();
        let beat = OrdinaryFrequency::from_khz(740.0);
        let t = linspace(0.0, 10e-6, 2001);
        let tr = simulate_ramsey(&p, beat, 4e-6, &t).unwrap();
        let c = ramsey_contrast(&tr);
        let nodes: Vec<f64> = (1..c.len()).filter(|&i| c[i - 1] * c[i] < 0.0).map(|i| t[i]).collect();
        for w in nodes.windows(2) {
            assert!(((w[1] - w[0]) - 1.0 / 740e3).abs() < 2.0 * (t[1] - t[0]));
        }
        assert!((nodes[0] - 0.5 / 740e3).abs() < t[1] - t[0]);
    }

    #[test]
    fn ramsey_without_beat_is_monotone() {
        let t = linspace(0.0, 20e-6, 400);
        let tr = simulate_ramsey(&weak_damping(), OrdinaryFrequency::ZERO, 4e-6, &t).unwrap();
        assert!(tr.y.windows(2).all(|w| w[1] < w[0]));
        assert!((tr.y[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn echo_without_modulation_is_log_linear() {
        let t = linspace(0.0, 40e-6, 50);
        let tr = simulate_echo_decay(25.4e-6, &EchoModulation::None, &t).unwrap();
        for (x, y) in tr.points() {
            assert!((y.ln() + 4.0 * x / 25.4e-6).abs() < 1e-12);
        }
    }

    #[test]
    fn echo_modulation_spectrum_has_mims_lines() {
        let m = MimsModulation::new(OrdinaryFrequency::from_khz(740.0), OrdinaryFrequency::from_khz(1300.0), 0.3).unwrap();
        let t2 = 25.4e-6;
        let dt = 2e-8;
        let t: Vec<f64> = (0..5000).map(|i| i as f64 * dt).collect();
        let tr = simulate_echo_decay(t2, &EchoModulation::Mims(m), &t).unwrap();
        let ratio: Vec<f64> = tr.points().map(|(x, y)| y / (-4.0 * x / t2).exp()).collect();
        let s = amplitude_spectrum(&ratio, dt, Window::Hann, 0).unwrap();
        let peaks = s.peaks(0.05);
        for f in m.frequencies() {
            assert!(peaks.iter().any(|(pf, _)| (pf - f).abs() <= 2.0 * s.resolution), "{f} missing in {peaks:?}");
        }
    }

    #[test]
    fn echo_modulation_is_at_half_the_ramsey_period() {
        let dg = OrdinaryFrequency::from_khz(740.0);
        let dt = 2e-8;
        let t: Vec<f64> = (0..4000).map(|i| i as f64 * dt).collect();
        let ramsey = simulate_ramsey(&weak_damping(), dg, 1.0, &t).unwrap();
        let rs = amplitude_spectrum(&ramsey_contrast(&ramsey), dt, Window::Hann, 0).unwrap();
        let m = MimsModulation::new(dg, dg, 0.2).unwrap();
        let echo = simulate_echo_decay(1.0, &EchoModulation::Mims(m), &t).unwrap();
        let es = amplitude_spectrum(&echo.y, dt, Window::Hann, 0).unwrap();
        let (fr, _) = rs.dominant().unwrap();
        let (fe, _) = es.dominant().unwrap();
        assert!((fr - 370e3).abs() <= rs.resolution);
        assert!((fe - 740e3).abs() <= es.resolution);
    }
}
