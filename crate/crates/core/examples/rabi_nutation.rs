// Rabi nutation against intracavity photon number, and g0 recovered from the
// positions of the population extrema.

use rexsim::cavity::g0_from_rabi;
use rexsim::dynamics::{rabi_extrema, rabi_nutation_scan, TwoLevelParams};
use rexsim::trace::linspace;
use rexsim::AngularRate;

pub fn run_example() -> rexsim::Result<()> {
    let g0 = AngularRate::two_pi_times(28.5e6);
    let pulse = 100e-9;
    // Lifetime-limited in the cavity, Ramsey-limited coherence.
    let p = TwoLevelParams::new(AngularRate::ZERO, AngularRate::ZERO, 2.1e-6, 4.0e-6)?;
    let nbar = linspace(0.0, 4.0, 400);
    let trace = rabi_nutation_scan(g0, &nbar, pulse, &p)?;

    for (n, pe) in trace.points().step_by(40) {
        println!("nbar {n:5.2}  P_e {pe:.3}");
    }
    let ext = rabi_extrema(&trace, pulse)?;
    println!("{} extrema", ext.len());
    let est = g0_from_rabi(&ext)?;
    println!(
        "g0/2pi = {:.2} +- {:.2} MHz (true 28.5)",
        est.value / (2.0 * std::f64::consts::PI) / 1e6,
        est.std_error / (2.0 * std::f64::consts::PI) / 1e6
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
