// Coupling rate, Purcell factors and cooperativity of the nanobeam cavity,
// then what a tenfold higher Q would buy.

use rexsim::cavity::{
    cavity_lifetime, cooperativity, indistinguishability, max_coupling_g0, max_purcell, measured_purcell,
    project_q_scaling, purcell_from_coupling, CavityDevice, QScalingBase,
};
use rexsim::config::ConfigDocument;
use rexsim::spectroscopy::{derive_transition, LocalFieldModel, MaterialSpec};
use rexsim::AngularRate;

pub fn run_example() -> rexsim::Result<()> {
    let m = MaterialSpec::nd_yvo4();
    let tr = derive_transition(&m, LocalFieldModel::Real)?;
    let dev = CavityDevice::nd_yvo4_nanobeam();

    let g0_max = max_coupling_g0(tr.dipole_moment, m.refractive_index, dev.resonance, dev.mode_volume);
    let f = max_purcell(m.wavelength, m.refractive_index, tr.local_field_factor, dev.quality_factor, dev.mode_volume);
    println!("Q = {}, V = {:.3} um^3, kappa/2pi = {:.0} GHz", dev.quality_factor, dev.mode_volume * 1e18, dev.kappa.to_ordinary().0 / 1e9);
    println!("g0_max/2pi = {:.2} MHz", g0_max.to_ordinary().0 / 1e6);
    println!("F (mode volume route) = {f:.1}");
    println!("F (coupling route)    = {:.1}", purcell_from_coupling(g0_max, dev.kappa, tr.radiative_lifetime));
    println!(
        "T_cav at g0_max = {:.3} us",
        cavity_lifetime(g0_max, dev.kappa, tr.branching_ratio, m.bulk_lifetime)? * 1e6
    );

    // Measured values from the default configuration.
    let coh = ConfigDocument::default().coherence();
    let g0 = AngularRate::two_pi_times(28.5e6);
    println!("F from measured T1 = {:.1}", measured_purcell(coh.t1, m.bulk_lifetime, tr.branching_ratio, tr.radiative_lifetime)?);
    println!("C = {:.3}", cooperativity(g0, dev.kappa, coh.t2));
    println!("T2/2T1 = {:.4}", indistinguishability(coh.t2_star, coh.t1)?);

    let base = QScalingBase { kappa: dev.kappa, g0, branching_ratio: tr.branching_ratio, bulk_lifetime: m.bulk_lifetime, coherence: coh };
    for factor in [1.0, 3.0, 10.0] {
        let s = project_q_scaling(&base, factor)?;
        println!(
            "Q x{factor:>4}: T_cav = {:.3} us  C = {:>6.2}  indistinguishability = {:.4}",
            s.cavity_lifetime * 1e6,
            s.cooperativity,
            s.indistinguishability
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
