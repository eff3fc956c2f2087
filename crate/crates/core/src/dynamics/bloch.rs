//! Optical Bloch equations for a driven, damped two-level ion.

use crate::error::{Error, Result};
use crate::quantities::AngularRate;

/// Relative and absolute tolerances of the adaptive integrator.
pub const RELATIVE_TOLERANCE: f64 = 1e-8;
pub const ABSOLUTE_TOLERANCE: f64 = 1e-10;
const MAX_STEPS: usize = 20_000_000;
/// T₂ up to this multiple of 2T₁ is clamped to 2T₁ rather than rejected.
pub const COHERENCE_TOLERANCE: f64 = 1.05;

/// Bloch vector; `w = −1` is the ground state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState {
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

impl BlochState {
    pub const GROUND: BlochState = BlochState { u: 0.0, v: 0.0, w: -1.0 };
    pub const EXCITED: BlochState = BlochState { u: 0.0, v: 0.0, w: 1.0 };

    pub fn new(u: f64, v: f64, w: f64) -> Result<Self> {
        let s = BlochState { u, v, w };
        if !(s.norm() <= 1.0 + 1e-9) {
            return Err(Error::validation("bloch_state", format!("|r| = {} exceeds 1", s.norm())));
        }
        Ok(s)
    }

    pub fn norm(&self) -> f64 {
        (self.u * self.u + self.v * self.v + self.w * self.w).sqrt()
    }

    pub fn excited_population(&self) -> f64 {
        ((self.w + 1.0) / 2.0).clamp(0.0, 1.0)
    }

    fn to_array(self) -> [f64; 3] {
        [self.u, self.v, self.w]
    }

    fn from_array(a: [f64; 3]) -> Self {
        BlochState { u: a[0], v: a[1], w: a[2] }
    }
}

/// Drive and relaxation of a single ion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelParams {
    pub rabi: AngularRate,
    pub detuning: AngularRate,
    pub t1: f64,
    pub t2: f64,
}

impl TwoLevelParams {
    /// Validates times and clamps T₂ into [0, 2T₁] when it overshoots by at
    /// most [`COHERENCE_TOLERANCE`].
    pub fn new(rabi: AngularRate, detuning: AngularRate, t1: f64, t2: f64) -> Result<Self> {
        if !(t1 > 0.0) || !t1.is_finite() {
            return Err(Error::validation("t1", "must be positive and finite"));
        }
        if !(t2 > 0.0) || !t2.is_finite() {
            return Err(Error::validation("t2", "must be positive and finite"));
        }
        if !rabi.0.is_finite() || !detuning.0.is_finite() {
            return Err(Error::validation("rabi", "drive parameters must be finite"));
        }
        let t2 = if t2 > 2.0 * t1 {
            if t2 > COHERENCE_TOLERANCE * 2.0 * t1 {
                return Err(Error::Inconsistent(format!("T2 = {t2:e} s exceeds 2·T1 = {:e} s", 2.0 * t1)));
            }
            2.0 * t1
        } else {
            t2
        };
        Ok(TwoLevelParams { rabi, detuning, t1, t2 })
    }

    pub fn with_rabi(self, rabi: AngularRate) -> Self {
        TwoLevelParams { rabi, ..self }
    }

    /// Closed-form steady state of the driven, damped equations.
    pub fn steady_state(&self) -> BlochState {
        let (o, d) = (self.rabi.0, self.detuning.0);
        let den = 1.0 + d * d * self.t2 * self.t2 + o * o * self.t1 * self.t2;
        let v = -o * self.t2 / den;
        BlochState { u: d * self.t2 * v, v, w: -(1.0 + d * d * self.t2 * self.t2) / den }
    }
}

/// Constant-drive interval of a pulse sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSegment {
    pub duration: f64,
    pub rabi: AngularRate,
    /// Drive phase (rad); 0 rotates about u.
    pub phase: f64,
    pub detuning: AngularRate,
}

impl PulseSegment {
    pub fn pulse(duration: f64, rabi: AngularRate, phase: f64) -> Self {
        PulseSegment { duration, rabi, phase, detuning: AngularRate::ZERO }
    }

    pub fn free(duration: f64) -> Self {
        PulseSegment { duration, rabi: AngularRate::ZERO, phase: 0.0, detuning: AngularRate::ZERO }
    }

    pub fn detuned(self, detuning: AngularRate) -> Self {
        PulseSegment { detuning, ..self }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence {
    segments: Vec<PulseSegment>,
}

impl PulseSequence {
    pub fn new(segments: Vec<PulseSegment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::validation("pulse_sequence", "needs at least one segment"));
        }
        for (i, s) in segments.iter().enumerate() {
            if !(s.duration >= 0.0) || !s.duration.is_finite() {
                return Err(Error::validation("pulse_sequence", format!("segment {i} has duration {}", s.duration)));
            }
            if !s.rabi.0.is_finite() || !s.phase.is_finite() || !s.detuning.0.is_finite() {
                return Err(Error::validation("pulse_sequence", format!("segment {i} has a non-finite drive")));
            }
        }
        Ok(PulseSequence { segments })
    }

    /// π/2 – free(τ) – π/2 with resonant pulses of rate `rabi`.
    pub fn ramsey(rabi: AngularRate, delay: f64) -> Result<Self> {
        let half = std::f64::consts::FRAC_PI_2 / rabi.0;
        Self::new(vec![PulseSegment::pulse(half, rabi, 0.0), PulseSegment::free(delay), PulseSegment::pulse(half, rabi, 0.0)])
    }

    /// π/2 – free(τ) – π – free(τ).
    pub fn two_pulse_echo(rabi: AngularRate, delay: f64) -> Result<Self> {
        let half = std::f64::consts::FRAC_PI_2 / rabi.0;
        Self::new(vec![
            PulseSegment::pulse(half, rabi, 0.0),
            PulseSegment::free(delay),
            PulseSegment::pulse(2.0 * half, rabi, 0.0),
            PulseSegment::free(delay),
        ])
    }

    pub fn segments(&self) -> &[PulseSegment] {
        &self.segments
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }
}

#[derive(Clone, Copy)]
struct Rhs {
    ox: f64,
    oy: f64,
    d: f64,
    g1: f64,
    g2: f64,
}

impl Rhs {
    fn eval(&self, y: &[f64; 3]) -> [f64; 3] {
        let [u, v, w] = *y;
        [
            -self.g2 * u + self.d * v - self.oy * w,
            -self.g2 * v - self.d * u + self.ox * w,
            -self.ox * v + self.oy * u - self.g1 * (w + 1.0),
        ]
    }

    fn rate_scale(&self) -> f64 {
        (self.ox * self.ox + self.oy * self.oy + self.d * self.d).sqrt() + self.g1 + self.g2
    }
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn integrate(y0: [f64; 3], rhs: Rhs, t: f64) -> Result<[f64; 3]> {
    if t == 0.0 {
        return Ok(y0);
    }
    let mut y = y0;
    let mut elapsed = 0.0;
    let mut h = (0.05 / rhs.rate_scale().max(1e-300)).min(t);
    let mut k = [[0.0; 3]; 7];
    k[0] = rhs.eval(&y);
    let mut steps = 0usize;
    let mut rejected = 0usize;
    while elapsed < t {
        steps += 1;
        if steps > MAX_STEPS {
            return Err(Error::Numeric(format!(
                "Bloch integrator exceeded {MAX_STEPS} steps at t = {elapsed:e} of {t:e} s (h = {h:e}, rejected {rejected})"
            )));
        }
        let last = elapsed + h >= t;
        if last {
            h = t - elapsed;
        }
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..3 {
                        ys[i] += h * a * kj[i];
                    }
                }
            }
            k[s] = rhs.eval(&ys);
        }
        let mut y5 = y;
        let mut err = 0.0f64;
        for i in 0..3 {
            let mut d5 = 0.0;
            let mut d4 = 0.0;
            for s in 0..7 {
                d5 += B5[s] * k[s][i];
                d4 += B4[s] * k[s][i];
            }
            y5[i] += h * d5;
            let scale = ABSOLUTE_TOLERANCE + RELATIVE_TOLERANCE * y[i].abs().max(y5[i].abs());
            err = err.max((h * (d5 - d4)).abs() / scale);
        }
        if !err.is_finite() {
            return Err(Error::Numeric(format!("non-finite Bloch state at t = {elapsed:e} s")));
        }
        if err <= 1.0 {
            elapsed = if last { t } else { elapsed + h };
            // Discretisation error must not push a pure state outside the sphere.
            let n = (y5[0] * y5[0] + y5[1] * y5[1] + y5[2] * y5[2]).sqrt();
            if n > 1.0 {
                for v in &mut y5 {
                    *v /= n;
                }
                k[0] = rhs.eval(&y5);
            } else {
                k[0] = k[6];
            }
            y = y5;
        } else {
            rejected += 1;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h <= f64::EPSILON * t.max(elapsed) {
            return Err(Error::Numeric(format!("Bloch step size underflow at t = {elapsed:e} s")));
        }
    }
    Ok(y)
}

/// Integrates the optical Bloch equations for a time `t` under constant drive.
pub fn bloch_evolve(state: BlochState, p: &TwoLevelParams, t: f64) -> Result<BlochState> {
    evolve_segment(state, p.rabi, 0.0, p.detuning, p.t1, p.t2, t)
}

fn evolve_segment(
    state: BlochState,
    rabi: AngularRate,
    phase: f64,
    detuning: AngularRate,
    t1: f64,
    t2: f64,
    t: f64,
) -> Result<BlochState> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::validation("t", "evolution time must be ≥ 0 and finite"));
    }
    let rhs = Rhs { ox: rabi.0 * phase.cos(), oy: rabi.0 * phase.sin(), d: detuning.0, g1: 1.0 / t1, g2: 1.0 / t2 };
    integrate(state.to_array(), rhs, t).map(BlochState::from_array)
}

/// Runs a pulse sequence segment by segment with relaxation from `p`
/// (its drive fields are ignored).
pub fn evolve_sequence(state: BlochState, seq: &PulseSequence, p: &TwoLevelParams) -> Result<BlochState> {
    seq.segments()
        .iter()
        .try_fold(state, |s, seg| evolve_segment(s, seg.rabi, seg.phase, seg.detuning, p.t1, p.t2, seg.duration))
}

/// Samples the state at each of the increasing `times`, starting from `state` at t = 0.
pub fn bloch_trajectory(state: BlochState, p: &TwoLevelParams, times: &[f64]) -> Result<Vec<BlochState>> {
    let mut out = Vec::with_capacity(times.len());
    let mut s = state;
    let mut now = 0.0;
    for &t in times {
        if t < now {
            return Err(Error::validation("times", "sample times must be non-decreasing"));
        }
        s = bloch_evolve(s, p, t - now)?;
        now = t;
        out.push(s);
    }
    Ok(out)
}
