// Transition parameters of Nd:YVO4 from the bulk absorption line.
//
// `cargo run --example spectroscopy`

use rexsim::spectroscopy::{derive_transition, zeeman_splitting, LocalFieldModel, MaterialSpec};

pub fn run_example() -> rexsim::Result<()> {
    let m = MaterialSpec::nd_yvo4();
    m.validate()?;

    for model in [LocalFieldModel::Real, LocalFieldModel::Virtual, LocalFieldModel::None] {
        let tr = derive_transition(&m, model)?;
        println!(
            "{:>8}: chi_L = {:.3}  f = {:.3e}  T_rad = {:.1} us  beta = {:.3}  mu = {:.3e} C m",
            model.name(),
            tr.local_field_factor,
            tr.oscillator_strength,
            tr.radiative_lifetime * 1e6,
            tr.branching_ratio,
            tr.dipole_moment,
        );
    }

    // Kramers doublet splittings at the working field.
    let b = 0.39;
    println!("ground Zeeman splitting at {b} T: {:.2} GHz", zeeman_splitting(m.g_ground, b).0 / 1e9);
    println!("excited Zeeman splitting at {b} T: {:.2} GHz", zeeman_splitting(m.g_excited, b).0 / 1e9);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
