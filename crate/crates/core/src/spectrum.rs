//! Discrete amplitude spectra and peak picking for uniformly sampled traces.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::trace::TimeTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    Rectangular,
    #[default]
    Hann,
}

/// One-sided amplitude spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub frequencies: Vec<f64>,
    pub amplitudes: Vec<f64>,
    /// Bin width (Hz).
    pub resolution: f64,
}

impl Spectrum {
    /// Interior local maxima whose amplitude is at least `fraction` of the
    /// largest non-DC amplitude, as `(frequency, amplitude)`.
    pub fn peaks(&self, fraction: f64) -> Vec<(f64, f64)> {
        let a = &self.amplitudes;
        if a.len() < 3 {
            return Vec::new();
        }
        let max = a[1..].iter().copied().fold(0.0, f64::max);
        let threshold = fraction * max;
        (1..a.len() - 1)
            .filter(|&i| a[i] >= threshold && a[i] > a[i - 1] && a[i] >= a[i + 1])
            .map(|i| (self.frequencies[i], a[i]))
            .collect()
    }

    /// The largest non-DC bin.
    pub fn dominant(&self) -> Option<(f64, f64)> {
        (1..self.amplitudes.len())
            .max_by(|&i, &j| self.amplitudes[i].total_cmp(&self.amplitudes[j]))
            .map(|i| (self.frequencies[i], self.amplitudes[i]))
    }
}

/// Amplitude spectrum of `samples` taken every `dt` seconds, after removing
/// the mean and applying `window`. `pad_to` zero-pads to at least that many
/// points.
pub fn amplitude_spectrum(samples: &[f64], dt: f64, window: Window, pad_to: usize) -> Result<Spectrum> {
    let n = samples.len();
    if n < 4 {
        return Err(Error::InsufficientData { needed: 4, got: n });
    }
    if !(dt > 0.0) {
        return Err(Error::validation("dt", "sample spacing must be > 0"));
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let len = pad_to.max(n);
    let mut buf: Vec<Complex64> = samples
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let w = match window {
                Window::Rectangular => 1.0,
                Window::Hann => 0.5 - 0.5 * (2.0 * PI * i as f64 / (n - 1) as f64).cos(),
            };
            Complex64::new((v - mean) * w, 0.0)
        })
        .collect();
    buf.resize(len, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let half = len / 2 + 1;
    let resolution = 1.0 / (len as f64 * dt);
    Ok(Spectrum {
        frequencies: (0..half).map(|k| k as f64 * resolution).collect(),
        amplitudes: buf[..half].iter().map(|c| 2.0 * c.norm() / n as f64).collect(),
        resolution,
    })
}

/// Spectrum of a uniformly sampled trace's ordinate.
pub fn trace_spectrum(trace: &TimeTrace, window: Window) -> Result<Spectrum> {
    let dt = trace
        .uniform_step()
        .ok_or_else(|| Error::validation("trace", "spectrum needs a uniform abscissa"))?;
    amplitude_spectrum(&trace.y, dt, window, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_tone_lands_in_its_bin() {
        let dt = 1e-3;
        let x: Vec<f64> = (0..1000).map(|i| (2.0 * PI * 50.0 * i as f64 * dt).cos()).collect();
        let s = amplitude_spectrum(&x, dt, Window::Rectangular, 0).unwrap();
        let (f, a) = s.dominant().unwrap();
        assert!((f - 50.0).abs() < 1e-9);
        assert!((a - 1.0).abs() < 1e-9);
        assert_eq!(s.peaks(0.05).len(), 1);
    }

    #[test]
    fn hann_peaks_for_two_tones() {
        let dt = 1e-3;
        let x: Vec<f64> = (0..2000)
            .map(|i| {
                let t = i as f64 * dt;
                (2.0 * PI * 40.0 * t).cos() + 0.5 * (2.0 * PI * 130.0 * t).cos()
            })
            .collect();
        let s = amplitude_spectrum(&x, dt, Window::Hann, 0).unwrap();
        let p = s.peaks(0.05);
        assert_eq!(p.len(), 2, "{p:?}");
        assert!((p[0].0 - 40.0).abs() <= s.resolution);
        assert!((p[1].0 - 130.0).abs() <= s.resolution);
    }
}
