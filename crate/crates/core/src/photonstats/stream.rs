//! Pulsed-excitation Monte Carlo of a shelving emitter plus background.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::error::{Error, Result};

const BLOCK: u64 = 1 << 14;
const BATCH_BLOCKS: u64 = 64;

/// Random stream of item `index` under `seed`, independent of evaluation order.
pub(crate) fn indexed_rng(base: &ChaCha8Rng, index: u64) -> ChaCha8Rng {
    let mut rng = base.clone();
    rng.set_stream(index);
    rng
}

/// Single emitter with one effective shelf state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmitterLevelScheme {
    /// Excitation probability per pulse.
    pub p_exc: f64,
    /// Detection probability per emitted photon.
    pub eta: f64,
    /// Probability of landing in the shelf after an emission.
    pub p_shelve: f64,
    /// Shelf recovery rate (Hz).
    pub shelf_rate: f64,
    /// Cavity-shortened lifetime (s).
    pub cavity_lifetime: f64,
}

impl EmitterLevelScheme {
    /// Tuned to 0.019 signal photons per 40 μs pulse with a bunching shoulder
    /// decaying over ≈200 μs.
    pub fn nd_yvo4() -> Self {
        EmitterLevelScheme { p_exc: 0.66, eta: 0.0365, p_shelve: 0.065, shelf_rate: 3870.0, cavity_lifetime: 2.1e-6 }
    }

    /// Two-level emitter with no shelving.
    pub fn two_level(p_exc: f64, eta: f64) -> Self {
        EmitterLevelScheme { p_exc, eta, p_shelve: 0.0, shelf_rate: 1.0, cavity_lifetime: 1e-6 }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("p_exc", self.p_exc), ("eta", self.eta), ("p_shelve", self.p_shelve)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::validation(name, format!("probability must lie in [0, 1], got {v}")));
            }
        }
        if !(self.shelf_rate > 0.0) || !self.shelf_rate.is_finite() {
            return Err(Error::validation("shelf_rate", "must be > 0"));
        }
        if !(self.cavity_lifetime > 0.0) || !self.cavity_lifetime.is_finite() {
            return Err(Error::validation("cavity_lifetime", "must be > 0"));
        }
        Ok(())
    }

    /// Probability that a shelved emitter recovers during one period.
    pub fn recovery_probability(&self, period: f64) -> f64 {
        -(-self.shelf_rate * period).exp_m1()
    }

    /// Stationary probability of not being shelved at a pulse.
    pub fn unshelved_fraction(&self, period: f64) -> f64 {
        let q = self.recovery_probability(period);
        let s = self.p_exc * self.p_shelve;
        if s == 0.0 {
            1.0
        } else {
            q / (q + s * (1.0 - q))
        }
    }

    /// Mean detected signal photons per pulse in steady state.
    pub fn mean_signal_per_pulse(&self, period: f64) -> f64 {
        self.unshelved_fraction(period) * self.p_exc * self.eta
    }

    /// Correlation time of the shelf population, from the per-pulse
    /// relaxation factor e^{−R_s·T} − p_exc·p_s·e^{−R_s·T}.
    pub fn bunching_time(&self, period: f64) -> f64 {
        let keep = (-self.shelf_rate * period).exp();
        let lambda = keep * (1.0 - self.p_exc * self.p_shelve);
        -period / lambda.ln()
    }
}

/// Pulse-synchronous Poissonian background.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BackgroundModel {
    /// Mean uncorrelated counts per pulse.
    pub mean_per_pulse: f64,
    /// Detector dark counts (Hz), integrated over the pulse period.
    pub dark_count_rate: f64,
}

impl BackgroundModel {
    /// Weakly coupled ions plus 2 Hz dark counts, together 0.00092 counts per
    /// 40 μs pulse: signal fraction 0.954 against [`EmitterLevelScheme::nd_yvo4`].
    pub fn nd_yvo4() -> Self {
        BackgroundModel { mean_per_pulse: 0.00084, dark_count_rate: 2.0 }
    }

    pub fn new(mean_per_pulse: f64, dark_count_rate: f64) -> Result<Self> {
        let b = BackgroundModel { mean_per_pulse, dark_count_rate };
        b.validate()?;
        Ok(b)
    }

    /// Background giving signal fraction ρ = S/(S + B) for signal mean S.
    pub fn for_signal_fraction(signal_per_pulse: f64, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::validation("signal_fraction", format!("must lie in (0, 1], got {rho}")));
        }
        Self::new(signal_per_pulse * (1.0 - rho) / rho, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mean_per_pulse >= 0.0) || !self.mean_per_pulse.is_finite() {
            return Err(Error::validation("background", "mean counts per pulse must be ≥ 0"));
        }
        if !(self.dark_count_rate >= 0.0) || !self.dark_count_rate.is_finite() {
            return Err(Error::validation("dark_count_rate", "must be ≥ 0"));
        }
        Ok(())
    }

    pub fn per_pulse(&self, period: f64) -> f64 {
        self.mean_per_pulse + self.dark_count_rate * period
    }
}

/// Detected counts of a pulse train, stored sparsely as `(pulse, count)`
/// for the pulses with at least one count.
#[derive(Debug, Clone, PartialEq)]
pub struct CountRecord {
    pub events: Vec<(u64, u32)>,
    pub pulses: u64,
    pub period: f64,
    pub seed: u64,
}

impl CountRecord {
    pub fn new(mut events: Vec<(u64, u32)>, pulses: u64, period: f64, seed: u64) -> Result<Self> {
        if !(period > 0.0) {
            return Err(Error::validation("period", "must be > 0"));
        }
        events.retain(|e| e.1 > 0);
        if events.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::validation("count record", "pulse indices must be strictly increasing"));
        }
        if let Some(e) = events.last() {
            if e.0 >= pulses {
                return Err(Error::validation("count record", format!("pulse {} beyond record of {pulses}", e.0)));
            }
        }
        Ok(CountRecord { events, pulses, period, seed })
    }

    pub fn total_counts(&self) -> u64 {
        self.events.iter().map(|e| e.1 as u64).sum()
    }

    pub fn mean_per_pulse(&self) -> f64 {
        self.total_counts() as f64 / self.pulses as f64
    }

    pub fn count_rate(&self) -> f64 {
        self.mean_per_pulse() / self.period
    }

    /// Dense per-pulse counts.
    pub fn counts(&self) -> Vec<u32> {
        let mut out = vec![0; self.pulses as usize];
        for &(i, c) in &self.events {
            out[i as usize] = c;
        }
        out
    }

    /// Plain-text `pulse_index,count` columns (non-zero pulses only) after a
    /// `#` header carrying pulses, period and seed.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# pulses = {}", self.pulses)?;
        writeln!(w, "# period_s = {:?}", self.period)?;
        writeln!(w, "# seed = {}", self.seed)?;
        writeln!(w, "pulse_index,count")?;
        for (i, c) in &self.events {
            writeln!(w, "{i},{c}")?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut pulses = None;
        let mut period = None;
        let mut seed = 0;
        let mut events = Vec::new();
        let mut header_seen = false;
        for (n, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::validation("count record", e.to_string()))?;
            let line = line.trim();
            let bad = |what: &str| Error::validation("count record", format!("line {}: {what}", n + 1));
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                if let Some((k, v)) = meta.split_once('=') {
                    let v = v.trim();
                    match k.trim() {
                        "pulses" => pulses = Some(v.parse().map_err(|_| bad("bad pulse total"))?),
                        "period_s" => period = Some(v.parse().map_err(|_| bad("bad period"))?),
                        "seed" => seed = v.parse().map_err(|_| bad("bad seed"))?,
                        _ => {}
                    }
                }
                continue;
            }
            if !header_seen {
                if line != "pulse_index,count" {
                    return Err(bad("expected header `pulse_index,count`"));
                }
                header_seen = true;
                continue;
            }
            let (i, c) = line.split_once(',').ok_or_else(|| bad("expected two columns"))?;
            let i: u64 = i.trim().parse().map_err(|_| bad("pulse index is not a non-negative integer"))?;
            let c: u32 = c.trim().parse().map_err(|_| bad("count is not a non-negative integer"))?;
            events.push((i, c));
        }
        let pulses = pulses.ok_or_else(|| Error::validation("count record", "missing `# pulses` line"))?;
        let period = period.ok_or_else(|| Error::validation("count record", "missing `# period_s` line"))?;
        CountRecord::new(events, pulses, period, seed)
    }
}

#[derive(Clone, Copy, Default)]
struct Draw {
    flags: u8,
    background: u32,
}

const RECOVER: u8 = 1;
const EXCITE: u8 = 2;
const DETECT: u8 = 4;
const SHELVE: u8 = 8;

/// Runs `pulses` pulses spaced by `period`. Pulse i draws from its own
/// ChaCha stream (seed, i); the shelf state is then threaded sequentially, so
/// the record is identical for any worker count.
pub fn simulate_emitter_stream(
    scheme: &EmitterLevelScheme,
    bg: &BackgroundModel,
    pulses: u64,
    period: f64,
    seed: u64,
) -> Result<CountRecord> {
    scheme.validate()?;
    bg.validate()?;
    if pulses == 0 {
        return Err(Error::validation("pulses", "need at least one pulse"));
    }
    if !(period > 0.0) || !period.is_finite() {
        return Err(Error::validation("period", "must be > 0"));
    }
    if period <= scheme.cavity_lifetime {
        return Err(Error::validation("period", "pulse period must exceed the emitter lifetime"));
    }
    let base = ChaCha8Rng::seed_from_u64(seed);
    let q = scheme.recovery_probability(period);
    let b = bg.per_pulse(period);
    let poisson = if b > 0.0 {
        Some(Poisson::new(b).map_err(|e| Error::validation("background", e.to_string()))?)
    } else {
        None
    };
    let draw = |i: u64| {
        let mut rng = indexed_rng(&base, i);
        let mut flags = 0;
        if rng.random::<f64>() < q {
            flags |= RECOVER;
        }
        if rng.random::<f64>() < scheme.p_exc {
            flags |= EXCITE;
        }
        if rng.random::<f64>() < scheme.eta {
            flags |= DETECT;
        }
        if rng.random::<f64>() < scheme.p_shelve {
            flags |= SHELVE;
        }
        let background = poisson.as_ref().map_or(0, |p| p.sample(&mut rng) as u32);
        Draw { flags, background }
    };

    let mut events = Vec::new();
    let mut shelved = false;
    let mut start = 0u64;
    let mut buf: Vec<Draw> = Vec::new();
    while start < pulses {
        let end = (start + BLOCK * BATCH_BLOCKS).min(pulses);
        buf.clear();
        buf.resize((end - start) as usize, Draw::default());
        buf.par_chunks_mut(BLOCK as usize).enumerate().for_each(|(k, chunk)| {
            let first = start + k as u64 * BLOCK;
            for (j, d) in chunk.iter_mut().enumerate() {
                *d = draw(first + j as u64);
            }
        });
        for (j, d) in buf.iter().enumerate() {
            if shelved && d.flags & RECOVER != 0 {
                shelved = false;
            }
            let mut n = d.background;
            if !shelved && d.flags & EXCITE != 0 {
                if d.flags & DETECT != 0 {
                    n += 1;
                }
                if d.flags & SHELVE != 0 {
                    shelved = true;
                }
            }
            if n > 0 {
                events.push((start + j as u64, n));
            }
        }
        start = end;
    }
    CountRecord::new(events, pulses, period, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parallel::with_workers;

    #[test]
    fn deterministic_emitter_gives_one_count_per_pulse() {
        let s = EmitterLevelScheme::two_level(1.0, 1.0);
        let rec = simulate_emitter_stream(&s, &BackgroundModel::default(), 1000, 40e-6, 3).unwrap();
        assert_eq!(rec.counts(), vec![1; 1000]);
    }

    #[test]
    fn mean_matches_binomial() {
        let s = EmitterLevelScheme::two_level(0.3, 0.2);
        let n = 200_000;
        let rec = simulate_emitter_stream(&s, &BackgroundModel::default(), n, 40e-6, 5).unwrap();
        let p = 0.06;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((rec.mean_per_pulse() - p).abs() < 3.0 * sigma);
    }

    #[test]
    fn stationary_mean_with_shelving() {
        let s = EmitterLevelScheme::nd_yvo4();
        let period = 40e-6;
        let rec = simulate_emitter_stream(&s, &BackgroundModel::default(), 2_000_000, period, 9).unwrap();
        let expect = s.mean_signal_per_pulse(period);
        assert!((rec.mean_per_pulse() - expect).abs() / expect < 0.02, "{} vs {expect}", rec.mean_per_pulse());
    }

    #[test]
    fn identical_for_any_worker_count() {
        let s = EmitterLevelScheme::nd_yvo4();
        let bg = BackgroundModel::new(0.01, 2.0).unwrap();
        let run = |w| with_workers(w, || simulate_emitter_stream(&s, &bg, 300_000, 40e-6, 42).unwrap()).unwrap();
        let a = run(1);
        assert_eq!(a, run(3));
        assert_eq!(a, run(8));
    }

    #[test]
    fn text_round_trip() {
        let s = EmitterLevelScheme::two_level(0.5, 0.5);
        let rec = simulate_emitter_stream(&s, &BackgroundModel::new(0.1, 0.0).unwrap(), 500, 40e-6, 1).unwrap();
        let mut buf = Vec::new();
        rec.write_text(&mut buf).unwrap();
        assert_eq!(CountRecord::read_text(&buf[..]).unwrap(), rec);
        assert!(CountRecord::read_text(&b"# pulses = 3\n# period_s = 1\npulse_index,count\n1,-2\n"[..]).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut s = EmitterLevelScheme::nd_yvo4();
        s.p_exc = 1.5;
        assert!(simulate_emitter_stream(&s, &BackgroundModel::default(), 10, 40e-6, 0).is_err());
        assert!(BackgroundModel::new(-1.0, 0.0).is_err());
        assert!(simulate_emitter_stream(&EmitterLevelScheme::nd_yvo4(), &BackgroundModel::default(), 0, 40e-6, 0).is_err());
    }
}
