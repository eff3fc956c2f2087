// Distribution of relative coupling strength for ions scattered through the
// mode, against ions placed at the field antinode.

use rexsim::photonstats::{coupling_histogram, ModeModel, Placement};

pub fn run_example() -> rexsim::Result<()> {
    let model = ModeModel::nd_yvo4_nanobeam();
    for placement in [Placement::Uniform, Placement::Antinode] {
        let h = coupling_histogram(&model, placement, 50_000, 20, 5)?;
        let top = h.fractions.iter().cloned().fold(0.0, f64::max);
        println!("{placement:?}");
        for (c, f) in h.centres.iter().zip(&h.fractions) {
            println!("  {c:.3} {:<50} {f:.3}", "#".repeat((50.0 * f / top).round() as usize));
        }
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
