//! Statistical fine structure of a power-law inhomogeneous line.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::stream::indexed_rng;
use crate::error::{Error, Result};
use crate::trace::{Axis, TimeTrace};

/// Spectral density N(Δ) = A·(Δ/unit)^{−p} ions per `unit` of detuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawDensity {
    pub amplitude: f64,
    pub exponent: f64,
    /// Detuning unit (Hz) in which A is quoted.
    pub unit: f64,
}

impl PowerLawDensity {
    /// A = 1.13×10⁴ per GHz, p = 2.9: one ion per GHz at 25 GHz.
    pub fn nd_yvo4() -> Self {
        PowerLawDensity { amplitude: 1.13e4, exponent: 2.9, unit: 1e9 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude >= 0.0) || !self.amplitude.is_finite() {
            return Err(Error::validation("sfs amplitude", "must be ≥ 0"));
        }
        if !self.exponent.is_finite() {
            return Err(Error::validation("sfs exponent", "must be finite"));
        }
        if !(self.unit > 0.0) {
            return Err(Error::validation("sfs unit", "must be > 0"));
        }
        Ok(())
    }

    pub fn density(&self, detuning: f64) -> f64 {
        self.amplitude * (detuning / self.unit).powf(-self.exponent)
    }

    /// Expected ions in a bin of width `bin` centred at `detuning`.
    pub fn expected(&self, detuning: f64, bin: f64) -> f64 {
        self.density(detuning) * bin / self.unit
    }
}

/// Poisson-sampled ion counts per detuning bin with their expectation.
#[derive(Debug, Clone, PartialEq)]
pub struct SfsTrace {
    /// Counts against bin-centre detuning (Hz).
    pub trace: TimeTrace,
    pub expected: Vec<f64>,
    /// Expected ∓ √expected.
    pub envelope_low: Vec<f64>,
    pub envelope_high: Vec<f64>,
    pub bin: f64,
    pub density: PowerLawDensity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionTest {
    pub statistic: f64,
    pub dof: usize,
    /// Two-sided p-value of Σ(N − λ)²/λ against χ²(dof).
    pub p_value: f64,
}

impl SfsTrace {
    /// Sums of `group` adjacent bins converted back to density per unit,
    /// as `(Δ/unit, density)`; empty groups are dropped.
    pub fn binned_density(&self, group: usize) -> Vec<(f64, f64)> {
        let group = group.max(1);
        let x = &self.trace.x;
        let y = &self.trace.y;
        (0..x.len() / group)
            .filter_map(|k| {
                let r = k * group..(k + 1) * group;
                let sum: f64 = y[r.clone()].iter().sum();
                let centre = x[r].iter().sum::<f64>() / group as f64;
                (sum > 0.0).then(|| (centre / self.density.unit, sum / (group as f64 * self.bin / self.density.unit)))
            })
            .collect()
    }

    /// For windows of `window` bins: mean expectation and the standard
    /// deviation of the counts about their expectation.
    pub fn windowed_dispersion(&self, window: usize) -> Vec<(f64, f64)> {
        let window = window.max(2);
        (0..self.expected.len() / window)
            .map(|k| {
                let r = k * window..(k + 1) * window;
                let lam = &self.expected[r.clone()];
                let n = &self.trace.y[r];
                let mean = lam.iter().sum::<f64>() / window as f64;
                let var = n.iter().zip(lam).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / window as f64;
                (mean, var.sqrt())
            })
            .collect()
    }

    /// Poisson dispersion test over bins with expectation ≥ `min_expected`.
    pub fn dispersion_test(&self, min_expected: f64) -> Result<DispersionTest> {
        let (stat, dof) = self
            .expected
            .iter()
            .zip(&self.trace.y)
            .filter(|(l, _)| **l >= min_expected && **l > 0.0)
            .fold((0.0, 0usize), |(s, n), (l, c)| (s + (c - l).powi(2) / l, n + 1));
        if dof < 2 {
            return Err(Error::InsufficientData { needed: 2, got: dof });
        }
        let chi = ChiSquared::new(dof as f64).map_err(|e| Error::Numeric(e.to_string()))?;
        let cdf = chi.cdf(stat);
        Ok(DispersionTest { statistic: stat, dof, p_value: 2.0 * cdf.min(1.0 - cdf) })
    }
}

/// Draws Poisson ion counts in bins of width `bin` tiling [start, stop).
/// Bin k uses its own random stream (seed, k).
pub fn sfs_generate(density: &PowerLawDensity, start: f64, stop: f64, bin: f64, seed: u64) -> Result<SfsTrace> {
    density.validate()?;
    if !(start > 0.0 && stop > start && bin > 0.0) || !stop.is_finite() {
        return Err(Error::validation("sfs range", "need 0 < start < stop and bin > 0"));
    }
    let n = ((stop - start) / bin).floor() as usize;
    if n < 1 {
        return Err(Error::validation("sfs range", "range shorter than one bin"));
    }
    let base = ChaCha8Rng::seed_from_u64(seed);
    let centres: Vec<f64> = (0..n).map(|k| start + (k as f64 + 0.5) * bin).collect();
    let expected: Vec<f64> = centres.iter().map(|&d| density.expected(d, bin)).collect();
    let counts = expected
        .par_iter()
        .enumerate()
        .map(|(k, &lam)| {
            if lam <= 0.0 {
                return Ok(0.0);
            }
            let p = Poisson::new(lam).map_err(|e| Error::Numeric(format!("Poisson mean {lam}: {e}")))?;
            Ok(p.sample(&mut indexed_rng(&base, k as u64)))
        })
        .collect::<Result<Vec<f64>>>()?;
    let envelope_low = expected.iter().map(|l| l - l.sqrt()).collect();
    let envelope_high = expected.iter().map(|l| l + l.sqrt()).collect();
    let trace = TimeTrace::new(Axis::new("detuning", "hz"), Axis::new("ions", ""), centres, counts)?
        .with_meta("amplitude", density.amplitude)
        .with_meta("exponent", density.exponent)
        .with_meta("unit_hz", density.unit)
        .with_meta("bin_hz", bin)
        .with_meta("seed", seed);
    Ok(SfsTrace { trace, expected, envelope_low, envelope_high, bin, density: *density })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::fit_power_law;

    #[test]
    fn zero_amplitude_is_empty() {
        let d = PowerLawDensity { amplitude: 0.0, ..PowerLawDensity::nd_yvo4() };
        let s = sfs_generate(&d, 1e9, 30e9, 0.1e9, 1).unwrap();
        assert!(s.trace.y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn scatter_is_poissonian() {
        let d = PowerLawDensity::nd_yvo4();
        let s = sfs_generate(&d, 1e9, 3e9, 1e6, 21).unwrap();
        for (mean, sd) in s.windowed_dispersion(200).into_iter().filter(|(m, _)| *m >= 5.0) {
            assert!((sd / mean.sqrt() - 1.0).abs() < 0.15, "mean {mean} sd {sd}");
        }
        let t = s.dispersion_test(5.0).unwrap();
        assert!(t.p_value > 0.05, "{t:?}");
    }

    #[test]
    fn exponent_recovered_from_binned_means() {
        let d = PowerLawDensity::nd_yvo4();
        let s = sfs_generate(&d, 1e9, 10e9, 10e6, 3).unwrap();
        let fit = fit_power_law(&s.binned_density(20)).unwrap();
        assert!((fit.exponent.value - 2.9).abs() < 0.1, "{:?}", fit.exponent);
    }

    #[test]
    fn rejects_bad_range() {
        let d = PowerLawDensity::nd_yvo4();
        assert!(sfs_generate(&d, 0.0, 1e9, 1e6, 0).is_err());
        assert!(sfs_generate(&d, 2e9, 1e9, 1e6, 0).is_err());
    }
}
