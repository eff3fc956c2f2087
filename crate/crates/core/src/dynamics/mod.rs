//! Optical Bloch dynamics, time-domain experiments and parameter extraction.

mod bloch;
mod experiments;
mod fit;

pub use bloch::{
    bloch_evolve, bloch_trajectory, evolve_sequence, BlochState, PulseSegment, PulseSequence, TwoLevelParams,
    ABSOLUTE_TOLERANCE, COHERENCE_TOLERANCE, RELATIVE_TOLERANCE,
};
pub use experiments::{
    rabi_extrema, rabi_nutation_scan, ramsey_contrast, simulate_echo_decay, simulate_ramsey, simulate_ramsey_with,
    EchoModulation, EnvelopeShape,
};
pub use fit::{
    extract_t2star, extract_t2star_with, fit_power_law, fit_power_law_poisson, fit_pure_dephasing, fit_t2_from_echo, single_ion_threshold,
    ramsey_beat_frequency, BeatEstimate, EchoFit, PowerLawFit, T2StarFit, RESIDUAL_FLAG_THRESHOLD,
};
