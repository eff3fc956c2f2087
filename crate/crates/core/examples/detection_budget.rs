// Stage-by-stage photon detection efficiency.

use rexsim::cavity::{detection_budget, DetectionChain};

pub fn run_example() -> rexsim::Result<()> {
    let chain = DetectionChain::nd_yvo4_setup();
    let b = detection_budget(&chain)?;
    for row in &b.rows {
        println!("{:<16} {:>6.3}   cumulative {:.4}", row.stage, row.efficiency, row.cumulative);
    }
    println!("overall {:.2} %", 100.0 * b.overall);

    // A better fiber coupler.
    let mut improved = chain.clone();
    improved.stages[1].1 = 0.5;
    println!("with 50 % waveguide-fiber coupling: {:.2} %", 100.0 * detection_budget(&improved)?.overall);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
