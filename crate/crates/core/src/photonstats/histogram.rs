//! Distribution of emission enhancement over ion positions in the mode.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::stream::indexed_rng;
use crate::error::{Error, Result};
use crate::trace::{Axis, TimeTrace};

const CHUNK: usize = 4096;

/// Analytic standing-wave surrogate of the cavity mode:
/// g/g_max = |cos(2πx/λ_eff)|·exp(−(y² + z²)/w²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeModel {
    /// In-material standing-wave period scale λ/n (m).
    pub wavelength_eff: f64,
    /// 1/e field radius (m).
    pub waist: f64,
    /// Ions occupy |y|, |z| ≤ this half-width (m).
    pub half_width: f64,
    /// Ions occupy 0 ≤ x < this length (m).
    pub length: f64,
}

impl ModeModel {
    /// 880 nm light in YVO₄ (n = 2.1785) across a 300 nm wide beam.
    pub fn nd_yvo4_nanobeam() -> Self {
        ModeModel { wavelength_eff: 880e-9 / 2.1785, waist: 120e-9, half_width: 150e-9, length: 2e-6 }
    }

    pub fn validate(&self) -> Result<()> {
        for (k, v) in [
            ("wavelength_eff", self.wavelength_eff),
            ("waist", self.waist),
            ("half_width", self.half_width),
            ("length", self.length),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::validation(k, "must be > 0"));
            }
        }
        Ok(())
    }

    pub fn relative_coupling(&self, x: f64, y: f64, z: f64) -> f64 {
        (2.0 * PI * x / self.wavelength_eff).cos().abs() * (-(y * y + z * z) / (self.waist * self.waist)).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Placement {
    #[default]
    Uniform,
    /// Every ion at the field maximum.
    Antinode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingHistogram {
    /// Bin centres of relative PL (Purcell rate ∝ g²) on [0, 1].
    pub centres: Vec<f64>,
    pub fractions: Vec<f64>,
    pub samples: usize,
}

impl CouplingHistogram {
    pub fn trace(&self) -> Result<TimeTrace> {
        TimeTrace::new(Axis::new("relative_pl", ""), Axis::new("fraction", ""), self.centres.clone(), self.fractions.clone())
    }

    /// Moving average over `2·half + 1` bins, truncated at the edges.
    pub fn smoothed(&self, half: usize) -> Vec<f64> {
        let n = self.fractions.len();
        (0..n)
            .map(|i| {
                let lo = i.saturating_sub(half);
                let hi = (i + half + 1).min(n);
                self.fractions[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
            })
            .collect()
    }
}

/// Histogram of relative PL r² over `samples` ions placed per `placement`.
/// Chunk k of 4096 ions draws from stream (seed, k).
pub fn coupling_histogram(
    model: &ModeModel,
    placement: Placement,
    samples: usize,
    bins: usize,
    seed: u64,
) -> Result<CouplingHistogram> {
    model.validate()?;
    if samples < 1000 {
        return Err(Error::validation("samples", format!("need at least 1000, got {samples}")));
    }
    if bins == 0 {
        return Err(Error::validation("bins", "need at least one bin"));
    }
    let base = ChaCha8Rng::seed_from_u64(seed);
    let chunks = samples.div_ceil(CHUNK);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut h = vec![0u64; bins];
            let mut rng = indexed_rng(&base, k as u64);
            let n = CHUNK.min(samples - k * CHUNK);
            for _ in 0..n {
                let r = match placement {
                    Placement::Antinode => 1.0,
                    Placement::Uniform => {
                        let x = rng.random::<f64>() * model.length;
                        let y = (2.0 * rng.random::<f64>() - 1.0) * model.half_width;
                        let z = (2.0 * rng.random::<f64>() - 1.0) * model.half_width;
                        model.relative_coupling(x, y, z)
                    }
                };
                let pl = r * r;
                h[((pl * bins as f64) as usize).min(bins - 1)] += 1;
            }
            h
        })
        .reduce(
            || vec![0u64; bins],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let width = 1.0 / bins as f64;
    Ok(CouplingHistogram {
        centres: (0..bins).map(|i| (i as f64 + 0.5) * width).collect(),
        fractions: counts.iter().map(|&c| c as f64 / samples as f64).collect(),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn antinode_fills_top_bin() {
        let h = coupling_histogram(&ModeModel::nd_yvo4_nanobeam(), Placement::Antinode, 5000, 20, 1).unwrap();
        assert_eq!(h.fractions[19], 1.0);
        assert!(h.fractions[..19].iter().all(|&f| f == 0.0));
    }

    #[test]
    fn uniform_density_decreases_toward_bright_ions() {
        let h = coupling_histogram(&ModeModel::nd_yvo4_nanobeam(), Placement::Uniform, 400_000, 25, 2).unwrap();
        let s = h.smoothed(1);
        assert!(s.windows(2).all(|w| w[1] <= w[0]), "{s:?}");
        assert!((h.fractions.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn converges_with_samples() {
        let m = ModeModel::nd_yvo4_nanobeam();
        let a = coupling_histogram(&m, Placement::Uniform, 200_000, 20, 5).unwrap();
        let b = coupling_histogram(&m, Placement::Uniform, 400_000, 20, 6).unwrap();
        let worst = a.fractions.iter().zip(&b.fractions).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(worst < 0.02, "{worst}");
    }

    #[test]
    fn too_few_samples_rejected() {
        assert!(coupling_histogram(&ModeModel::nd_yvo4_nanobeam(), Placement::Uniform, 10, 10, 0).is_err());
    }
}
