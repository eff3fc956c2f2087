//! Extraction of T₂*, T₂, γ* and power-law exponents from traces.

use std::f64::consts::PI;

use super::experiments::EnvelopeShape;
use crate::error::{Error, Result};
use crate::regression::{fit_line, levenberg_marquardt, mean_estimate, Estimate};
use crate::spectrum::{amplitude_spectrum, Window};
use crate::trace::TimeTrace;

/// RMS log-intensity residual above which an echo fit is flagged.
pub const RESIDUAL_FLAG_THRESHOLD: f64 = 0.02;

#[derive(Debug, Clone, PartialEq)]
pub struct T2StarFit {
    pub t2_star: Estimate,
    pub amplitude: f64,
    /// Fringe frequencies of the fitted model (Hz); empty for a bare decay.
    pub frequencies: Vec<f64>,
    pub rms_residual: f64,
    pub shape: EnvelopeShape,
}

/// Fits the fringe contrast 2S − 1 of a Ramsey trace with
/// a·env(t)·½[cos 2πf₁t + cos 2πf₂t], where the two lines are δ ± Δ/2.
pub fn extract_t2star(trace: &TimeTrace) -> Result<T2StarFit> {
    extract_t2star_with(trace, EnvelopeShape::Exponential)
}

pub fn extract_t2star_with(trace: &TimeTrace, shape: EnvelopeShape) -> Result<T2StarFit> {
    let n = trace.len();
    if n < 8 {
        return Err(Error::InsufficientData { needed: 8, got: n });
    }
    let t = &trace.x;
    let c: Vec<f64> = trace.y.iter().map(|s| 2.0 * s - 1.0).collect();
    let span = t[n - 1] - t[0];
    let mut freqs = initial_frequencies(trace, &c, span);
    let head = (n / 20).max(1);
    let a0 = c[..head].iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-3);

    let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    loop {
        for &frac in &[0.1, 0.25, 0.6] {
            let mut p0 = vec![a0, span * frac];
            p0.extend(&freqs);
            let model = |p: &[f64]| residuals(p, t, &c, shape);
            if let Ok(fit) = levenberg_marquardt(model, &p0, 500) {
                if fit.params[1] > 0.0 && best.as_ref().is_none_or(|b| fit.rss < b.0) {
                    best = Some((fit.rss, fit.params, fit.std_errors));
                }
            }
        }
        if best.is_some() || freqs.is_empty() {
            break;
        }
        freqs.pop();
    }
    let (rss, params, errs) = best.ok_or_else(|| Error::FitFailure("Ramsey envelope fit did not converge".into()))?;
    let t2 = params[1];
    if !(t2 > 0.0) || t2 > span {
        return Err(Error::FitFailure(format!(
            "envelope does not decay within the record (T2* = {t2:e} s, span {span:e} s)"
        )));
    }
    Ok(T2StarFit {
        t2_star: Estimate::new(t2, errs[1]),
        amplitude: params[0],
        frequencies: params[2..].iter().map(|f| f.abs()).collect(),
        rms_residual: (rss / n as f64).sqrt(),
        shape,
    })
}

/// Up to two resolvable fringe frequencies from the contrast spectrum.
fn initial_frequencies(trace: &TimeTrace, c: &[f64], span: f64) -> Vec<f64> {
    let Some(dt) = trace.uniform_step() else {
        return Vec::new();
    };
    let pad = (8 * c.len()).next_power_of_two();
    let Ok(s) = amplitude_spectrum(c, dt, Window::Hann, pad) else {
        return Vec::new();
    };
    let mut peaks: Vec<(f64, f64)> = s.peaks(0.3).into_iter().filter(|(f, _)| *f > 1.5 / span).collect();
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
    peaks.truncate(2);
    peaks.into_iter().map(|(f, _)| f).collect()
}

fn residuals(p: &[f64], t: &[f64], c: &[f64], shape: EnvelopeShape) -> (Vec<f64>, Vec<Vec<f64>>) {
    let (a, tau) = (p[0], p[1]);
    let freqs = &p[2..];
    let nf = freqs.len().max(1) as f64;
    let mut r = Vec::with_capacity(t.len());
    let mut jac = Vec::with_capacity(t.len());
    for (&x, &y) in t.iter().zip(c) {
        let (env, denv) = match shape {
            EnvelopeShape::Exponential => {
                let e = (-x / tau).exp();
                (e, e * x / (tau * tau))
            }
            EnvelopeShape::Gaussian => {
                let e = (-(x / tau).powi(2)).exp();
                (e, e * 2.0 * x * x / tau.powi(3))
            }
        };
        let osc = if freqs.is_empty() {
            1.0
        } else {
            freqs.iter().map(|f| (2.0 * PI * f * x).cos()).sum::<f64>() / nf
        };
        r.push(a * env * osc - y);
        let mut row = vec![env * osc, a * denv * osc];
        for f in freqs {
            row.push(-a * env * (2.0 * PI * f * x).sin() * 2.0 * PI * x / nf);
        }
        jac.push(row);
    }
    (r, jac)
}

/// Ramsey beat read from the spectrum of the squared contrast.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeatEstimate {
    /// Hz
    pub frequency: f64,
    /// Unpadded FFT bin width 1/(N·dt) (Hz).
    pub bin_width: f64,
}

/// The contrast cos(2πδt)·cos(πΔt)·env has lines at δ ± Δ/2; squaring it
/// puts the node-to-node beat Δ on a line of its own. A nonzero δ adds a
/// line of equal weight at 2δ, so record at zero detuning or keep 2δ well
/// away from Δ.
pub fn ramsey_beat_frequency(trace: &TimeTrace) -> Result<BeatEstimate> {
    let dt = trace
        .uniform_step()
        .ok_or_else(|| Error::validation("trace", "beat spectrum needs a uniform delay grid"))?;
    let sq: Vec<f64> = trace.y.iter().map(|s| (2.0 * s - 1.0).powi(2)).collect();
    let pad = (8 * sq.len()).next_power_of_two();
    let spec = amplitude_spectrum(&sq, dt, Window::Hann, pad)?;
    let span = dt * (sq.len() - 1) as f64;
    let (f, _) = spec
        .peaks(0.0)
        .into_iter()
        .filter(|(f, _)| *f > 1.5 / span)
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::FitFailure("no beat line in the Ramsey record".into()))?;
    Ok(BeatEstimate { frequency: f, bin_width: 1.0 / (sq.len() as f64 * dt) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EchoFit {
    pub t2: Estimate,
    /// RMS residual of ln I about the fitted line.
    pub rms_residual: f64,
    /// Residuals exceed [`RESIDUAL_FLAG_THRESHOLD`]; the window likely
    /// includes envelope modulation.
    pub flagged: bool,
    pub points: usize,
}

/// Log-linear fit of echo intensity for delays ≥ `t_min`; T₂ = −4/slope.
pub fn fit_t2_from_echo(trace: &TimeTrace, t_min: f64) -> Result<EchoFit> {
    let (x, y): (Vec<f64>, Vec<f64>) = trace.points().filter(|(t, i)| *t >= t_min && *i > 0.0).map(|(t, i)| (t, i.ln())).unzip();
    if x.len() < 5 {
        return Err(Error::InsufficientData { needed: 5, got: x.len() });
    }
    let line = fit_line(&x, &y)?;
    let slope = line.slope.value;
    if !(slope < 0.0) {
        return Err(Error::FitFailure(format!("echo intensity does not decay (slope {slope:e} /s)")));
    }
    let t2 = -4.0 / slope;
    let se = 4.0 * line.slope.std_error / (slope * slope);
    Ok(EchoFit {
        t2: Estimate::new(t2, se),
        rms_residual: line.rms_residual,
        flagged: line.rms_residual > RESIDUAL_FLAG_THRESHOLD,
        points: line.points,
    })
}

/// γ* (Hz) from `(T₁, T₂)` pairs via 1/(πT₂) = 1/(2πT₁) + γ*.
pub fn fit_pure_dephasing(points: &[(f64, f64)]) -> Result<Estimate> {
    if points.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: points.len() });
    }
    if let Some((t1, t2)) = points.iter().find(|(a, b)| !(*a > 0.0 && *b > 0.0)) {
        return Err(Error::domain("lifetime", format!("T1 and T2 must be > 0, got ({t1}, {t2})")));
    }
    let d: Vec<f64> = points.iter().map(|(t1, t2)| 1.0 / (PI * t2) - 1.0 / (2.0 * PI * t1)).collect();
    mean_estimate(&d)
}

/// N(Δ) = A·Δ^{−p}, with A in the units of the supplied Δ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub exponent: Estimate,
    pub amplitude: f64,
    pub log_amplitude: Estimate,
    pub rms_residual: f64,
}

/// Log-log regression of `(Δ, N)` samples.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    if let Some((d, n)) = points.iter().find(|(d, n)| !(*d > 0.0 && *n > 0.0)) {
        return Err(Error::domain("power law sample", format!("Δ and N must be > 0, got ({d}, {n})")));
    }
    let x: Vec<f64> = points.iter().map(|(d, _)| d.ln()).collect();
    let y: Vec<f64> = points.iter().map(|(_, n)| n.ln()).collect();
    let line = fit_line(&x, &y)?;
    Ok(PowerLawFit {
        exponent: line.slope.scale(-1.0),
        amplitude: line.intercept.value.exp(),
        log_amplitude: line.intercept,
        rms_residual: line.rms_residual,
    })
}

/// Poisson maximum-likelihood fit of counts N_k ~ Poisson(A·Δ_k^{−p}·w) in
/// bins of common width `w` (in the units of Δ). Empty bins are kept, so the
/// sparse tail does not bias the exponent.
pub fn fit_power_law_poisson(points: &[(f64, f64)], width: f64) -> Result<PowerLawFit> {
    use nalgebra::{Matrix2, Vector2};

    if points.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, got: points.len() });
    }
    if !(width > 0.0) {
        return Err(Error::domain("bin width", format!("must be > 0, got {width}")));
    }
    if let Some((d, n)) = points.iter().find(|(d, n)| !(*d > 0.0 && *n >= 0.0)) {
        return Err(Error::domain("power law sample", format!("need Δ > 0 and N >= 0, got ({d}, {n})")));
    }
    let total: f64 = points.iter().map(|(_, n)| n).sum();
    if total <= 0.0 {
        return Err(Error::FitFailure("no counts".into()));
    }
    let x: Vec<f64> = points.iter().map(|(d, _)| d.ln()).collect();
    let loglik = |a: f64, p: f64| -> f64 {
        points.iter().zip(&x).map(|((_, n), xk)| {
            let eta = a - p * xk + width.ln();
            n * eta - eta.exp()
        }).sum()
    };
    // Start at p = 1 with the total matched.
    let mut p = 1.0;
    let mut a = (total / x.iter().map(|xk| (-p * xk).exp() * width).sum::<f64>()).ln();
    let mut ll = loglik(a, p);
    let mut info = Matrix2::zeros();
    for _ in 0..100 {
        let mut score = Vector2::zeros();
        info = Matrix2::zeros();
        for ((_, n), xk) in points.iter().zip(&x) {
            let lam = (a - p * xk + width.ln()).exp();
            score += Vector2::new(n - lam, -xk * (n - lam));
            info += lam * Matrix2::new(1.0, -xk, -xk, xk * xk);
        }
        let step = info.try_inverse().ok_or_else(|| Error::FitFailure("singular Fisher information".into()))? * score;
        let mut t = 1.0;
        let (mut na, mut np, mut nll) = (a, p, ll);
        while t > 1e-10 {
            na = a + t * step[0];
            np = p + t * step[1];
            nll = loglik(na, np);
            if nll >= ll {
                break;
            }
            t *= 0.5;
        }
        let done = (np - p).abs() < 1e-12 * p.abs().max(1.0) && (na - a).abs() < 1e-12 * a.abs().max(1.0);
        (a, p, ll) = (na, np, nll);
        if done {
            break;
        }
    }
    let cov = info.try_inverse().ok_or_else(|| Error::FitFailure("singular Fisher information".into()))?;
    // Pearson residual scale, for comparison with the log-log fit.
    let rms = (points
        .iter()
        .zip(&x)
        .map(|((_, n), xk)| {
            let lam = (a - p * xk + width.ln()).exp();
            (n - lam).powi(2) / lam
        })
        .sum::<f64>()
        / points.len() as f64)
        .sqrt();
    Ok(PowerLawFit {
        exponent: Estimate::new(p, cov[(1, 1)].sqrt()),
        amplitude: a.exp(),
        log_amplitude: Estimate::new(a, cov[(0, 0)].sqrt()),
        rms_residual: rms,
    })
}

/// Detuning where A·Δ^{−p} falls to one, Δ* = A^{1/p}, in the units of A.
pub fn single_ion_threshold(amplitude: f64, exponent: f64) -> Result<f64> {
    if !(amplitude > 0.0) {
        return Err(Error::domain("amplitude", format!("must be > 0, got {amplitude}")));
    }
    if !(exponent > 0.0) {
        return Err(Error::domain("exponent", format!("must be > 0, got {exponent}")));
    }
    Ok(amplitude.powf(1.0 / exponent))
}

#[cfg(test)]
mod poisson_tests {
    use super::*;
    use crate::photonstats::{sfs_generate, PowerLawDensity};

    #[test]
    fn exact_expectations_recover_the_law() {
        let pts: Vec<(f64, f64)> = (0..200).map(|k| {
            let d = 1.0 + 0.1 * k as f64;
            (d, 1.13e4 * d.powf(-2.9) * 0.1)
        }).collect();
        let f = fit_power_law_poisson(&pts, 0.1).unwrap();
        assert!((f.exponent.value - 2.9).abs() < 1e-9);
        assert!((f.amplitude - 1.13e4).abs() / 1.13e4 < 1e-9);
    }

    #[test]
    fn sparse_tail_is_unbiased() {
        let d = PowerLawDensity::nd_yvo4();
        let mut hits = 0;
        for seed in 0..40 {
            let s = sfs_generate(&d, 1e9, 30e9, 10e6, seed).unwrap();
            let pts: Vec<(f64, f64)> = s.trace.points().map(|(x, n)| (x / 1e9, n)).collect();
            let f = fit_power_law_poisson(&pts, 0.01).unwrap();
            if f.exponent.z_score(2.9) <= 2.0 {
                hits += 1;
            }
        }
        assert!(hits >= 34, "{hits}/40 within 2σ");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_power_law_poisson(&[(1.0, 0.0), (2.0, 0.0), (3.0, 0.0)], 1.0).is_err());
        assert!(fit_power_law_poisson(&[(1.0, 1.0), (-2.0, 1.0), (3.0, 1.0)], 1.0).is_err());
    }
}

#[cfg(test)]
mod beat_tests {
    use super::*;
    use crate::dynamics::{simulate_ramsey, TwoLevelParams};
    use crate::trace::linspace;
    use crate::{AngularRate, OrdinaryFrequency};

    #[test]
    fn beat_lands_on_the_splitting() {
        let p = TwoLevelParams::new(AngularRate::ZERO, AngularRate::ZERO, 2.1e-6, 4.0e-6).unwrap();
        let t = linspace(0.0, 16e-6, 400);
        let tr = simulate_ramsey(&p, OrdinaryFrequency::from_khz(741.5), 4e-6, &t).unwrap();
        let b = ramsey_beat_frequency(&tr).unwrap();
        assert!((b.frequency - 741.5e3).abs() <= b.bin_width, "{b:?}");
        assert!((b.frequency - 740e3).abs() <= b.bin_width);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{simulate_echo_decay, simulate_ramsey, simulate_ramsey_with, EchoModulation, TwoLevelParams};
    use crate::quantities::{AngularRate, OrdinaryFrequency};
    use crate::spinbath::MimsModulation;
    use crate::trace::{linspace, Axis};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn params(detuning_hz: f64) -> TwoLevelParams {
        TwoLevelParams::new(AngularRate(0.0), AngularRate::two_pi_times(detuning_hz), 100e-6, 27e-6).unwrap()
    }

    #[test]
    fn t2star_round_trip_with_beat() {
        let t = linspace(0.0, 16e-6, 400);
        let tr = simulate_ramsey(&params(0.0), OrdinaryFrequency::from_khz(740.0), 4e-6, &t).unwrap();
        let fit = extract_t2star(&tr).unwrap();
        assert!((fit.t2_star.value - 4e-6).abs() / 4e-6 < 0.01, "{fit:?}");
    }

    #[test]
    fn t2star_round_trip_detuned_gaussian() {
        let t = linspace(0.0, 12e-6, 400);
        let tr = simulate_ramsey_with(&params(1.2e6), OrdinaryFrequency::from_khz(740.0), 4e-6, &t, EnvelopeShape::Gaussian)
            .unwrap();
        let fit = extract_t2star_with(&tr, EnvelopeShape::Gaussian).unwrap();
        assert!((fit.t2_star.value - 4e-6).abs() / 4e-6 < 0.01, "{fit:?}");
        assert_eq!(fit.frequencies.len(), 2);
    }

    #[test]
    fn bare_decay_matches_log_linear_regression() {
        let t = linspace(0.0, 16e-6, 60);
        let tr = simulate_ramsey(&params(0.0), OrdinaryFrequency::ZERO, 4e-6, &t).unwrap();
        let fit = extract_t2star(&tr).unwrap();
        let ln: Vec<f64> = tr.y.iter().map(|s| (2.0 * s - 1.0).ln()).collect();
        let line = fit_line(&t, &ln).unwrap();
        assert!((fit.t2_star.value - (-1.0 / line.slope.value)).abs() < 1e-9 * 4e-6);
    }

    #[test]
    fn flat_envelope_is_a_fit_failure() {
        let t = linspace(0.0, 1e-6, 50);
        let tr = simulate_ramsey(&params(0.0), OrdinaryFrequency::ZERO, 1.0, &t).unwrap();
        assert!(matches!(extract_t2star(&tr), Err(Error::FitFailure(_))));
        let short = TimeTrace::new(Axis::new("t", "s"), Axis::new("s", ""), vec![0.0, 1.0], vec![1.0, 0.5]).unwrap();
        assert!(matches!(extract_t2star(&short), Err(Error::InsufficientData { .. })));
    }

    fn noisy_ramsey(seed: u64) -> TimeTrace {
        let t = linspace(0.0, 16e-6, 300);
        let mut tr = simulate_ramsey(&params(0.0), OrdinaryFrequency::from_khz(740.0), 4e-6, &t).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 0.05).unwrap();
        for y in &mut tr.y {
            *y += noise.sample(&mut rng);
        }
        tr
    }

    #[test]
    fn noisy_t2star_within_two_sigma() {
        let fit = extract_t2star(&noisy_ramsey(7)).unwrap();
        assert!(fit.t2_star.z_score(4e-6) <= 2.0, "{fit:?}");
        let covered = (0..200u64).filter(|&s| extract_t2star(&noisy_ramsey(s)).unwrap().t2_star.z_score(4e-6) <= 2.0).count();
        assert!(covered >= 180, "coverage {covered}/200");
    }

    #[test]
    fn echo_round_trips() {
        let t = linspace(0.0, 40e-6, 200);
        let tr = simulate_echo_decay(25.4e-6, &EchoModulation::None, &t).unwrap();
        let fit = fit_t2_from_echo(&tr, 4e-6).unwrap();
        assert!((fit.t2.value - 25.4e-6).abs() / 25.4e-6 < 0.02);
        assert!(!fit.flagged);
    }

    #[test]
    fn modulated_echo_tail_and_misuse() {
        let m = MimsModulation::new(OrdinaryFrequency::from_khz(741.5), OrdinaryFrequency::from_khz(789.4), 0.3).unwrap();
        let eseem = EchoModulation::DampedMims { modulation: m, decay: 1.5e-6 };
        let t = linspace(0.1e-6, 40e-6, 400);
        let tr = simulate_echo_decay(25.4e-6, &eseem, &t).unwrap();
        let tail = fit_t2_from_echo(&tr, 4e-6).unwrap();
        assert!((tail.t2.value - 25.4e-6).abs() / 25.4e-6 < 0.05);
        let all = fit_t2_from_echo(&tr, 0.0).unwrap();
        assert!(all.rms_residual > 5.0 * tail.rms_residual);
        assert!(all.flagged && !tail.flagged);
        assert!(fit_t2_from_echo(&tr, 39.7e-6).is_err());
    }

    #[test]
    fn pure_dephasing_recovery() {
        let g = 9.7e3;
        let pts: Vec<(f64, f64)> = [90e-6, 100e-6, 150e-6, 300e-6]
            .iter()
            .map(|&t1| (t1, 1.0 / (PI * (1.0 / (2.0 * PI * t1) + g))))
            .collect();
        let est = fit_pure_dephasing(&pts).unwrap();
        assert!((est.value - g).abs() / g < 0.02);
        let radiative = [(1e-6, 2e-6), (5e-6, 10e-6)];
        assert_eq!(fit_pure_dephasing(&radiative).unwrap().value, 0.0);
        assert!(fit_pure_dephasing(&pts[..1]).is_err());
    }

    #[test]
    fn noisy_pure_dephasing_within_two_sigma() {
        let g = 9.7e3;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let noise = Normal::new(0.0, 0.6e3 * 8f64.sqrt()).unwrap();
        let pts: Vec<(f64, f64)> = (0..8)
            .map(|i| {
                let t1 = 80e-6 + 20e-6 * i as f64;
                let y = 1.0 / (2.0 * PI * t1) + g + noise.sample(&mut rng);
                (t1, 1.0 / (PI * y))
            })
            .collect();
        let est = fit_pure_dephasing(&pts).unwrap();
        assert!(est.z_score(g) <= 2.0, "{est:?}");
    }

    #[test]
    fn power_law_round_trip_and_constant() {
        let pts: Vec<(f64, f64)> = (1..30).map(|i| (i as f64, 1.13e4 * (i as f64).powf(-2.9))).collect();
        let f = fit_power_law(&pts).unwrap();
        assert!((f.exponent.value - 2.9).abs() < 1e-12);
        assert!((f.amplitude - 1.13e4).abs() / 1.13e4 < 1e-10);
        let flat: Vec<(f64, f64)> = (1..10).map(|i| (i as f64, 5.0)).collect();
        assert!(fit_power_law(&flat).unwrap().exponent.value.abs() < 1e-12);
        assert!(fit_power_law(&[(1.0, 0.0), (2.0, 1.0)]).is_err());
    }

    #[test]
    fn threshold_values() {
        assert_eq!(single_ion_threshold(1.0, 2.9).unwrap(), 1.0);
        assert!((single_ion_threshold(1.13e4, 2.9).unwrap() - 25.0).abs() < 0.1);
        assert!((single_ion_threshold(50.0, 1e6).unwrap() - 1.0).abs() < 1e-5);
        assert!(single_ion_threshold(0.0, 2.9).is_err());
    }

    proptest! {
        #[test]
        fn echo_fit_exact_on_forward_model(t2 in 1e-6..200e-6f64) {
            let t = linspace(0.0, 2.0 * t2, 40);
            let tr = simulate_echo_decay(t2, &EchoModulation::None, &t).unwrap();
            let fit = fit_t2_from_echo(&tr, 0.0).unwrap();
            prop_assert!((fit.t2.value - t2).abs() / t2 < 1e-9);
        }

        #[test]
        fn threshold_inverts_power_law(a in 1.1..1e6f64, p in 0.5..5.0f64) {
            let d = single_ion_threshold(a, p).unwrap();
            prop_assert!((a * d.powf(-p) - 1.0).abs() < 1e-9);
        }
    }
}
