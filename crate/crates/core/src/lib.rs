//! Simulation toolkit for a single rare-earth ion coupled to a nanophotonic
//! cavity.
//!
//! Modules follow the measurement chain:
//!
//! * [`spectroscopy`]: oscillator strength, radiative lifetime, branching
//!   ratio and dipole moment from bulk absorption data.
//! * [`cavity`]: Purcell factors, coupling rate, photon number, cooperativity,
//!   indistinguishability and the detection budget.
//! * [`spinbath`]: superhyperfine splittings, echo envelope modulation and
//!   flip-flop spectral diffusion.
//! * [`dynamics`]: optical Bloch integration, Rabi/Ramsey/echo experiments and
//!   the fits that extract Ω, T₂*, T₂, γ* and power-law exponents.
//! * [`photonstats`]: pulsed photon-counting Monte Carlo, g²(τ), statistical
//!   fine structure and coupling histograms.
//! * [`config`], [`report`], [`csv`], [`cli`]: the `rexsim` front end.
//!
//! Runnable walkthroughs for each capability live in `examples/`.

pub mod constants;
pub mod error;
pub mod quantities;
pub mod regression;
pub mod spectrum;
pub mod trace;

pub mod cavity;
pub mod config;
pub mod csv;
pub mod cli;
pub mod golden;
pub mod report;
pub mod spectroscopy;
pub mod dynamics;
pub mod parallel;
pub mod photonstats;
pub mod spinbath;

pub use error::{Error, Result};
pub use quantities::{AngularRate, OrdinaryFrequency};
pub use trace::TimeTrace;
