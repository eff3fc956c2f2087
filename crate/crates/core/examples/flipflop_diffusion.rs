// Spectral diffusion from neighbouring Nd spin flip-flops.

use rexsim::spinbath::{flipflop_gamma_sd, flipflop_tm, FlipFlopParams};

pub fn run_example() -> rexsim::Result<()> {
    let p = FlipFlopParams::nd_yvo4();
    let sd = flipflop_gamma_sd(&p)?;
    let d = flipflop_tm(p.gamma0, sd.0, p.spin_flip_rate)?;
    println!("Gamma_SD = {:.3} kHz", sd.0 / 1e3);
    println!("T_M = {:.2} us, added dephasing {:.1} Hz", d.t_m * 1e6, d.added_dephasing);

    println!("  T (K)   added dephasing (Hz)");
    for t in [0.1, 0.25, 0.5, 1.0, 2.0, 4.0] {
        let q = FlipFlopParams { temperature: t, ..p.clone() };
        let sd = flipflop_gamma_sd(&q)?;
        println!("{t:>7.2} {:>22.2}", flipflop_tm(q.gamma0, sd.0, q.spin_flip_rate)?.added_dephasing);
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
