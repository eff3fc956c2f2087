//! Photon-counting statistics: pulsed emitter Monte Carlo, g²(τ), statistical
//! fine structure and the coupling-strength histogram.

mod g2;
mod histogram;
mod sfs;
mod stream;

pub use g2::{
    bunching_curve, fit_bunching_shoulder, g2_estimator, g2_zero_analytic, G2Estimate, G2Options, ShoulderFit,
    SHOULDER_DECAYS,
};
pub use histogram::{coupling_histogram, CouplingHistogram, ModeModel, Placement};
pub use sfs::{sfs_generate, PowerLawDensity, SfsTrace};
pub use stream::{simulate_emitter_stream, BackgroundModel, CountRecord, EmitterLevelScheme};
