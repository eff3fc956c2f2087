// Two-pulse echo decay with superhyperfine envelope modulation, and a T2 fit
// restricted to delays where the modulation has washed out.

use rexsim::dynamics::{fit_t2_from_echo, simulate_echo_decay, EchoModulation};
use rexsim::spinbath::MimsModulation;
use rexsim::trace::linspace;
use rexsim::OrdinaryFrequency;

pub fn run_example() -> rexsim::Result<()> {
    let m = MimsModulation::new(OrdinaryFrequency::from_khz(741.5), OrdinaryFrequency::from_khz(789.5), 0.3)?;
    println!("modulation frequencies (kHz): {:?}", m.frequencies().map(|f| (f / 1e3).round()));
    let eseem = EchoModulation::DampedMims { modulation: m, decay: 3e-6 };
    let delays = linspace(0.0, 60e-6, 601);
    let trace = simulate_echo_decay(25.4e-6, &eseem, &delays)?;

    for t_min in [0.0, 15e-6] {
        let fit = fit_t2_from_echo(&trace, t_min)?;
        println!(
            "fit from {:>4.1} us: T2 = {:.2} +- {:.2} us{}",
            t_min * 1e6,
            fit.t2.value * 1e6,
            fit.t2.std_error * 1e6,
            if fit.flagged { "  (residuals flagged)" } else { "" }
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
