// Ramsey fringes beating at the yttrium ligand splitting, recorded on
// resonance. The beat is read off the spectrum and T2* comes from a fit to
// the whole trace.

use rexsim::dynamics::{extract_t2star, ramsey_beat_frequency, simulate_ramsey, TwoLevelParams};
use rexsim::spectrum::{trace_spectrum, Window};
use rexsim::trace::linspace;
use rexsim::{AngularRate, OrdinaryFrequency};

pub fn run_example() -> rexsim::Result<()> {
    let p = TwoLevelParams::new(AngularRate::ZERO, AngularRate::ZERO, 2.1e-6, 4.0e-6)?;
    let beat = OrdinaryFrequency::from_khz(741.5);
    let delays = linspace(0.0, 16e-6, 801);
    let trace = simulate_ramsey(&p, beat, 4.0e-6, &delays)?;

    let b = ramsey_beat_frequency(&trace)?;
    println!("beat {:.1} kHz (bin {:.1} kHz)", b.frequency / 1e3, b.bin_width / 1e3);

    let s = trace_spectrum(&trace, Window::Hann)?;
    for (f, a) in s.peaks(0.2).iter().take(4) {
        println!("fringe line {:.1} kHz  amplitude {a:.3}", f / 1e3);
    }

    let fit = extract_t2star(&trace)?;
    println!("T2* = {:.3} +- {:.3} us", fit.t2_star.value * 1e6, fit.t2_star.std_error * 1e6);

    let noisy = trace.with_additive_noise(0.05, 11)?;
    let fit = extract_t2star(&noisy)?;
    println!("with 5 % noise: T2* = {:.3} +- {:.3} us", fit.t2_star.value * 1e6, fit.t2_star.std_error * 1e6);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
