//! Reference-number sweep behind the `golden` subcommand.
//!
//! Every row recomputes a headline figure from the configuration and compares
//! it with the published value at the band used by the acceptance suite.

use crate::cavity::{
    cavity_lifetime, cooperativity, detection_budget, indistinguishability, max_coupling_g0, max_purcell,
    measured_purcell, project_q_scaling, purcell_from_coupling, QScalingBase,
};
use crate::config::ConfigDocument;
use crate::dynamics::single_ion_threshold;
use crate::error::Result;
use crate::photonstats::g2_zero_analytic;
use crate::report::{RunReport, Tolerance::*};
use crate::spectroscopy::{derive_transition, zeeman_splitting};
use crate::spinbath::{flipflop_gamma_sd, flipflop_tm, sublevel_count_and_range, superhyperfine_splitting};
use crate::AngularRate;

/// Theoretical coupling the Purcell-shortened lifetime is quoted for (Hz, ordinary).
const G0_THEORY_HZ: f64 = 52.7e6;

pub fn golden_report(cfg: &ConfigDocument) -> Result<RunReport> {
    let mut r = RunReport::new("golden: recomputed reference figures");
    let material = cfg.material();
    let tr = derive_transition(&material, cfg.local_field_model())?;
    let device = cfg.cavity_device()?;
    let coh = cfg.coherence();
    let q = device.quality_factor;
    let v = device.mode_volume;

    r.compare("oscillator_strength", tr.oscillator_strength, "", 3.7e-5, Relative(0.02));
    r.compare("radiative_lifetime", tr.radiative_lifetime * 1e6, "us", 237.0, Relative(0.02));
    r.compare("branching_ratio", tr.branching_ratio, "", 0.38, Relative(0.02));
    r.compare("dipole_moment", tr.dipole_moment, "C m", 1.59e-31, Relative(0.02));

    let g0_max = max_coupling_g0(tr.dipole_moment, material.refractive_index, device.resonance, v);
    r.compare("g0_max/2pi", g0_max.to_ordinary().0 / 1e6, "MHz", 52.7, Relative(0.02));
    let f_max = max_purcell(material.wavelength, material.refractive_index, tr.local_field_factor, q, v);
    r.compare("purcell_max", f_max, "", 189.0, Relative(0.03));
    let f_cross = purcell_from_coupling(g0_max, device.kappa, tr.radiative_lifetime);
    r.compare("purcell_from_g0", f_cross, "", 189.0, Relative(0.03));

    let t_cav = cavity_lifetime(AngularRate::two_pi_times(G0_THEORY_HZ), device.kappa, tr.branching_ratio, material.bulk_lifetime)?;
    r.compare("cavity_lifetime_at_g0_max", t_cav * 1e6, "us", 1.25, Relative(0.05));
    let f_meas = measured_purcell(coh.t1, material.bulk_lifetime, tr.branching_ratio, tr.radiative_lifetime)?;
    r.compare("purcell_measured", f_meas, "", 111.0, Relative(0.02));

    let g0 = cfg.measured_g0();
    r.compare("cooperativity", cooperativity(g0, device.kappa, coh.t2), "", 2.9, Relative(0.03));
    let base = QScalingBase {
        kappa: device.kappa,
        g0,
        branching_ratio: tr.branching_ratio,
        bulk_lifetime: material.bulk_lifetime,
        coherence: coh,
    };
    let scaled = project_q_scaling(&base, cfg.number("cavity", "q_scale_factor"))?;
    r.compare("cooperativity_scaled_q", scaled.cooperativity, "", 29.0, Relative(0.10));
    r.value("indistinguishability_scaled_q", scaled.indistinguishability, "");

    r.compare("indistinguishability", indistinguishability(coh.t2_star, coh.t1)?, "", 0.952, Absolute(5e-4));
    let field = cfg.field_tesla();
    r.compare("zeeman_ground", zeeman_splitting(material.g_ground, field).0 / 1e9, "GHz", 12.88, Relative(0.005));
    r.compare("detection_efficiency", detection_budget(&cfg.detection_chain())?.overall, "", 0.036, Absolute(0.005));

    let y = cfg.yttrium_site();
    let (gm, em) = (cfg.ground_moment(), cfg.excited_moment());
    r.compare("y_splitting_zero_field", superhyperfine_splitting(&y, &gm, 0.0)?.0 / 1e3, "kHz", 80.0, Relative(0.15));
    r.compare("y_splitting_ground", superhyperfine_splitting(&y, &gm, field)?.0 / 1e3, "kHz", 740.0, Relative(0.10));
    r.compare("y_splitting_excited", superhyperfine_splitting(&y, &em, field)?.0 / 1e3, "kHz", 790.0, Relative(0.10));
    let vs = sublevel_count_and_range(&cfg.vanadium_site(), &gm, field)?;
    r.compare("v_sublevels", vs.count as f64, "", 8.0, Absolute(0.0));

    let ff = cfg.flipflop();
    let sd = flipflop_gamma_sd(&ff)?;
    let dephasing = flipflop_tm(ff.gamma0, sd.0, ff.spin_flip_rate)?.added_dephasing;
    r.compare("flipflop_dephasing", dephasing, "Hz", 30.0, Factor(2.0));

    let density = cfg.sfs_density();
    r.compare("single_ion_detuning", single_ion_threshold(density.amplitude, density.exponent)?, "GHz", 25.0, Relative(0.05));

    let scheme = cfg.emitter_scheme();
    let period = cfg.pulse_period();
    let signal = scheme.mean_signal_per_pulse(period);
    let rho = signal / (signal + cfg.background().per_pulse(period));
    r.compare("g2_zero", g2_zero_analytic(rho)?, "", 0.09, Absolute(0.013));
    r.value("photons_per_pulse", signal + cfg.background().per_pulse(period), "");

    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_meets_every_reference() {
        let r = golden_report(&ConfigDocument::default()).unwrap();
        assert!(r.compared().count() >= 12);
        for row in r.compared() {
            assert_eq!(row.passes(), Some(true), "{}\n{}", row.name, r.render());
        }
    }
}
