// Ion counts per frequency bin in the tail of the inhomogeneous line, their
// Poisson scatter, and the density power law fitted back.

use rexsim::dynamics::{fit_power_law_poisson, single_ion_threshold};
use rexsim::photonstats::{sfs_generate, PowerLawDensity};

pub fn run_example() -> rexsim::Result<()> {
    let d = PowerLawDensity::nd_yvo4();
    println!("one ion per GHz beyond {:.1} GHz", single_ion_threshold(d.amplitude, d.exponent)?);

    let s = sfs_generate(&d, 1e9, 30e9, 10e6, 3)?;
    println!("{} bins, {} ions", s.trace.len(), s.trace.y.iter().sum::<f64>());
    let t = s.dispersion_test(5.0)?;
    println!("dispersion chi2 = {:.1} on {} dof, p = {:.3}", t.statistic, t.dof, t.p_value);

    let pts: Vec<(f64, f64)> = s.trace.points().map(|(x, n)| (x / d.unit, n)).collect();
    let fit = fit_power_law_poisson(&pts, s.bin / d.unit)?;
    println!(
        "exponent {:.3} +- {:.3}, amplitude {:.0} per GHz",
        fit.exponent.value, fit.exponent.std_error, fit.amplitude
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
