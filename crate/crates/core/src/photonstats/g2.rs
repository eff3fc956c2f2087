//! Second-order correlation of pulsed count records.

use super::stream::{simulate_emitter_stream, BackgroundModel, CountRecord, EmitterLevelScheme};
use crate::error::{Error, Result};
use crate::regression::{levenberg_marquardt, Estimate};
use crate::trace::{Axis, TimeTrace};

/// Fitted excess decays to this fraction of its zero-lag height at the
/// reported shoulder extent (e⁻³ ≈ 5 %).
pub const SHOULDER_DECAYS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct G2Options {
    pub max_lag: u64,
    /// Inclusive lag range whose mean defines g² = 1.
    pub norm_window: (u64, u64),
    pub min_window_coincidences: u64,
}

impl Default for G2Options {
    fn default() -> Self {
        G2Options { max_lag: 200, norm_window: (100, 200), min_window_coincidences: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct G2Estimate {
    pub lags: Vec<u64>,
    pub g2: Vec<f64>,
    /// One-sigma Poisson error of each lag, including the normalisation.
    pub sigma: Vec<f64>,
    pub coincidences: Vec<u64>,
    pub window_coincidences: u64,
    pub period: f64,
}

impl G2Estimate {
    pub fn at(&self, lag: u64) -> Option<(f64, f64)> {
        self.lags.iter().position(|&l| l == lag).map(|i| (self.g2[i], self.sigma[i]))
    }

    /// g² against delay in seconds.
    pub fn trace(&self) -> Result<TimeTrace> {
        let x = self.lags.iter().map(|&m| m as f64 * self.period).collect();
        TimeTrace::new(Axis::new("delay", "s"), Axis::new("g2", ""), x, self.g2.clone())
    }
}

/// g²(m) = ⟨nᵢnᵢ₊ₘ⟩ (m ≠ 0) or ⟨nᵢ(nᵢ − 1)⟩ (m = 0), each per pulse pair and
/// divided by the mean of the same quantity over `opts.norm_window`.
pub fn g2_estimator(rec: &CountRecord, opts: &G2Options) -> Result<G2Estimate> {
    if rec.events.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let (w0, w1) = opts.norm_window;
    if !(w0 > 0 && w0 <= w1 && w1 <= opts.max_lag) {
        return Err(Error::validation("norm_window", "must satisfy 0 < start ≤ end ≤ max_lag"));
    }
    if opts.max_lag >= rec.pulses {
        return Err(Error::validation("max_lag", "must be shorter than the record"));
    }
    let nl = opts.max_lag as usize + 1;
    let mut g = vec![0u64; nl];
    let ev = &rec.events;
    for (i, &(p, c)) in ev.iter().enumerate() {
        let c = c as u64;
        g[0] += c * (c - 1);
        for &(q, d) in &ev[i + 1..] {
            let m = q - p;
            if m > opts.max_lag {
                break;
            }
            g[m as usize] += c * d as u64;
        }
    }
    let pairs = |m: u64| (rec.pulses - m) as f64;
    let window: u64 = (w0..=w1).map(|m| g[m as usize]).sum();
    if window < opts.min_window_coincidences {
        return Err(Error::InsufficientData { needed: opts.min_window_coincidences as usize, got: window as usize });
    }
    let norm = window as f64 / (w0..=w1).map(pairs).sum::<f64>();
    let mut g2 = Vec::with_capacity(nl);
    let mut sigma = Vec::with_capacity(nl);
    for (m, &gm) in g.iter().enumerate() {
        let per_pair = pairs(m as u64);
        let value = gm as f64 / per_pair / norm;
        let s = if gm == 0 {
            1.0 / per_pair / norm
        } else {
            value * (1.0 / gm as f64 + 1.0 / window as f64).sqrt()
        };
        g2.push(value);
        sigma.push(s);
    }
    Ok(G2Estimate {
        lags: (0..nl as u64).collect(),
        g2,
        sigma,
        coincidences: g,
        window_coincidences: window,
        period: rec.period,
    })
}

/// g²(0) = 1 − ρ² for a single emitter with signal fraction ρ.
pub fn g2_zero_analytic(rho: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::domain("signal fraction", format!("must lie in [0, 1], got {rho}")));
    }
    Ok(1.0 - rho * rho)
}

/// Monte Carlo g²(τ) of a shelving emitter.
pub fn bunching_curve(
    scheme: &EmitterLevelScheme,
    bg: &BackgroundModel,
    pulses: u64,
    period: f64,
    seed: u64,
    opts: &G2Options,
) -> Result<G2Estimate> {
    let rec = simulate_emitter_stream(scheme, bg, pulses, period, seed)?;
    g2_estimator(&rec, opts)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShoulderFit {
    /// g² − 1 extrapolated to zero delay.
    pub amplitude: Estimate,
    pub decay_time: Estimate,
    /// [`SHOULDER_DECAYS`] decay times.
    pub extent: f64,
}

/// Weighted fit of g²(τ) − 1 = a·e^{−τ/τ_b} over lags 1 up to the
/// normalisation window.
pub fn fit_bunching_shoulder(est: &G2Estimate, opts: &G2Options) -> Result<ShoulderFit> {
    let last = opts.norm_window.0 as usize;
    let idx: Vec<usize> = (1..last.min(est.g2.len())).collect();
    if idx.len() < 4 {
        return Err(Error::InsufficientData { needed: 4, got: idx.len() });
    }
    let t: Vec<f64> = idx.iter().map(|&i| est.lags[i] as f64 * est.period).collect();
    let y: Vec<f64> = idx.iter().map(|&i| est.g2[i] - 1.0).collect();
    let w: Vec<f64> = idx.iter().map(|&i| 1.0 / est.sigma[i]).collect();
    let a0 = y[..3].iter().sum::<f64>() / 3.0;
    if !(a0 > 0.0) {
        return Err(Error::FitFailure("no bunching excess at short delay".into()));
    }
    let model = |p: &[f64]| {
        let mut r = Vec::with_capacity(t.len());
        let mut j = Vec::with_capacity(t.len());
        for k in 0..t.len() {
            let e = (-t[k] / p[1]).exp();
            r.push(w[k] * (p[0] * e - y[k]));
            j.push(vec![w[k] * e, w[k] * p[0] * e * t[k] / (p[1] * p[1])]);
        }
        (r, j)
    };
    let half = y.iter().position(|v| *v < a0 / 2.0).unwrap_or(y.len() / 2).max(1);
    let fit = levenberg_marquardt(model, &[a0, t[half] / std::f64::consts::LN_2], 200)?;
    let (a, tau) = (fit.params[0], fit.params[1]);
    if !(a > 0.0 && tau > 0.0) {
        return Err(Error::FitFailure(format!("unphysical shoulder fit a = {a}, τ = {tau}")));
    }
    // Weighted residuals: rescale by reduced χ² only when it exceeds 1.
    let dof = (t.len() - 2) as f64;
    let inflate = (fit.rss / dof).max(1.0).sqrt();
    let scale = inflate / (fit.rss / dof).sqrt().max(1e-300);
    Ok(ShoulderFit {
        amplitude: Estimate::new(a, fit.std_errors[0] * scale),
        decay_time: Estimate::new(tau, fit.std_errors[1] * scale),
        extent: SHOULDER_DECAYS * tau,
    })
}


#[cfg(test)]
mod shelving_tests {
    use super::*;

    const PERIOD: f64 = 40e-6;

    #[test]
    fn default_emitter_bunches_and_antibunches() {
        let s = EmitterLevelScheme::nd_yvo4();
        let bg = BackgroundModel::nd_yvo4();
        let opts = G2Options::default();
        let est = bunching_curve(&s, &bg, 10_000_000, PERIOD, 1, &opts).unwrap();
        let sig = s.mean_signal_per_pulse(PERIOD);
        let rho = sig / (sig + bg.per_pulse(PERIOD));
        let (g0, e0) = est.at(0).unwrap();
        let fit = fit_bunching_shoulder(&est, &opts).unwrap();
        assert!((g0 - g2_zero_analytic(rho).unwrap()).abs() < 3.0 * e0);
        assert!(fit.decay_time.z_score(s.bunching_time(PERIOD)) < 3.0, "{fit:?}");
    }
}
