//! Sampled observable series produced by the simulators.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Axis {
    pub name: String,
    pub unit: String,
}

impl Axis {
    pub fn new(name: impl Into<String>, unit: impl Into<String>) -> Self {
        Axis { name: name.into(), unit: unit.into() }
    }

    /// Column header, e.g. `delay_s`.
    pub fn header(&self) -> String {
        if self.unit.is_empty() {
            self.name.clone()
        } else {
            format!("{}_{}", self.name, self.unit)
        }
    }
}

/// A series of `(x, y)` samples with strictly increasing `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeTrace {
    pub abscissa: Axis,
    pub ordinate: Axis,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Parameters (and seed, for stochastic traces) that produced the data.
    pub metadata: Vec<(String, String)>,
}

impl TimeTrace {
    pub fn new(abscissa: Axis, ordinate: Axis, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::validation("trace", format!("{} abscissae but {} ordinates", x.len(), y.len())));
        }
        if let Some(i) = x.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::validation("trace", format!("abscissa not strictly increasing at index {}", i + 1)));
        }
        if let Some(i) = x.iter().chain(&y).position(|v| !v.is_finite()) {
            return Err(Error::validation("trace", format!("non-finite value at position {i}")));
        }
        Ok(TimeTrace { abscissa, ordinate, x, y, metadata: Vec::new() })
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.metadata.push((key.into(), value.to_string()));
        self
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.x.iter().copied().zip(self.y.iter().copied())
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Sample spacing, if the abscissa is uniform to 1e-9 relative.
    pub fn uniform_step(&self) -> Option<f64> {
        if self.x.len() < 2 {
            return None;
        }
        let dt = (self.x[self.x.len() - 1] - self.x[0]) / (self.x.len() - 1) as f64;
        let uniform = self.x.windows(2).all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt.abs());
        uniform.then_some(dt)
    }
}

impl TimeTrace {
    /// Adds independent N(0, σ²) noise to every ordinate.
    pub fn with_additive_noise(mut self, sigma: f64, seed: u64) -> Result<Self> {
        let d = noise(sigma)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for y in &mut self.y {
            *y += d.sample(&mut rng);
        }
        Ok(self.with_meta("noise_additive", sigma).with_meta("noise_seed", seed))
    }

    /// Multiplies every ordinate by 1 + N(0, σ²).
    pub fn with_relative_noise(mut self, sigma: f64, seed: u64) -> Result<Self> {
        let d = noise(sigma)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for y in &mut self.y {
            *y *= 1.0 + d.sample(&mut rng);
        }
        Ok(self.with_meta("noise_relative", sigma).with_meta("noise_seed", seed))
    }
}

fn noise(sigma: f64) -> Result<Normal<f64>> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::validation("noise", format!("σ must be finite and >= 0, got {sigma}")));
    }
    Normal::new(0.0, sigma).map_err(|e| Error::Numeric(e.to_string()))
}

/// `n` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (n - 1) as f64;
            (0..n).map(|i| start + step * i as f64).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_monotone_abscissa() {
        let a = Axis::new("t", "s");
        assert!(TimeTrace::new(a.clone(), a.clone(), vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(TimeTrace::new(a.clone(), a.clone(), vec![0.0, 1.0], vec![1.0, f64::NAN]).is_err());
        assert!(TimeTrace::new(a.clone(), a, vec![0.0, 1.0], vec![1.0]).is_err());
    }

    #[test]
    fn noise_is_seeded() {
        let t = TimeTrace::new(Axis::new("t", "s"), Axis::new("y", ""), linspace(0.0, 1.0, 100), vec![1.0; 100]).unwrap();
        let a = t.clone().with_additive_noise(0.1, 3).unwrap();
        assert_eq!(a, t.clone().with_additive_noise(0.1, 3).unwrap());
        assert_ne!(a.y, t.clone().with_additive_noise(0.1, 4).unwrap().y);
        assert_eq!(t.clone().with_relative_noise(0.0, 1).unwrap().y, t.y);
        assert!(t.with_additive_noise(-1.0, 0).is_err());
    }

    #[test]
    fn linspace_endpoints() {
        let v = linspace(1.0, 2.0, 5);
        assert_eq!(v, vec![1.0, 1.25, 1.5, 1.75, 2.0]);
        let t = TimeTrace::new(Axis::new("t", "s"), Axis::new("y", ""), v, vec![0.0; 5]).unwrap();
        assert_eq!(t.uniform_step(), Some(0.25));
    }
}
