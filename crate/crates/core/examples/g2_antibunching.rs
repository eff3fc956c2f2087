// Pulsed photon counting from a single ion with a shelving level, and the
// resulting g2: antibunched at zero delay, bunched over the shelf lifetime.

use rexsim::photonstats::{
    fit_bunching_shoulder, g2_estimator, g2_zero_analytic, simulate_emitter_stream, BackgroundModel, EmitterLevelScheme,
    G2Options,
};

pub fn run_example() -> rexsim::Result<()> {
    let scheme = EmitterLevelScheme::nd_yvo4();
    let bg = BackgroundModel::nd_yvo4();
    // 25 kHz repetition.
    let period = 40e-6;
    let pulses = 2_000_000;
    let rec = simulate_emitter_stream(&scheme, &bg, pulses, period, 7)?;
    println!("{} detections in {} pulses ({:.0} counts/s)", rec.total_counts(), rec.pulses, rec.count_rate());

    let opts = G2Options { min_window_coincidences: 1000, ..G2Options::default() };
    let est = g2_estimator(&rec, &opts)?;
    let signal = scheme.mean_signal_per_pulse(period);
    let rho = signal / (signal + bg.per_pulse(period));
    let (g, s) = est.at(0).expect("zero lag present");
    println!("g2(0) = {g:.3} +- {s:.3}, 1 - rho^2 = {:.3}", g2_zero_analytic(rho)?);
    for lag in [1, 5, 10, 20, 40, 80] {
        if let Some((g, s)) = est.at(lag) {
            println!("  lag {lag:>3} ({:>5.0} us): {g:.3} +- {s:.3}", lag as f64 * period * 1e6);
        }
    }
    if let Ok(f) = fit_bunching_shoulder(&est, &opts) {
        println!(
            "shoulder: amplitude {:.3}, decay {:.0} us (model {:.0} us)",
            f.amplitude.value,
            f.decay_time.value * 1e6,
            scheme.bunching_time(period) * 1e6
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
