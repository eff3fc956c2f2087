// Ligand splittings of the nearest yttrium and vanadium nuclei as the field
// is swept, and the echo envelope spectrum they produce.

use rexsim::spectrum::{trace_spectrum, Window};
use rexsim::spinbath::{
    eseem_envelope, sublevel_count_and_range, superhyperfine_splitting, ElectronicMoment, OpticalLevel, SpinBathSite,
};
use rexsim::trace::linspace;

pub fn run_example() -> rexsim::Result<()> {
    let y = SpinBathSite::yttrium();
    let v = SpinBathSite::vanadium();
    let ground = ElectronicMoment::new(OpticalLevel::Ground, 2.36);
    let excited = ElectronicMoment::new(OpticalLevel::Excited, 0.9);

    println!("  B (mT)   Y ground (kHz)   Y excited (kHz)");
    for b in [0.0, 0.1, 0.2, 0.39, 0.5] {
        println!(
            "{:>8.0} {:>16.1} {:>17.1}",
            b * 1e3,
            superhyperfine_splitting(&y, &ground, b)?.0 / 1e3,
            superhyperfine_splitting(&y, &excited, b)?.0 / 1e3
        );
    }
    let s = sublevel_count_and_range(&v, &ground, 0.39)?;
    println!(
        "vanadium: {} sublevels, splittings {:.2} to {:.2} MHz",
        s.count,
        s.min_splitting.0 / 1e6,
        s.max_splitting.0 / 1e6
    );

    let dg = superhyperfine_splitting(&y, &ground, 0.39)?;
    let de = superhyperfine_splitting(&y, &excited, 0.39)?;
    let env = eseem_envelope(dg, de, 0.4, &linspace(0.0, 200e-6, 4000))?;
    let spec = trace_spectrum(&env, Window::Hann)?;
    for (f, a) in spec.peaks(0.1) {
        println!("envelope line {:>7.1} kHz  amplitude {a:.4}", f / 1e3);
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
