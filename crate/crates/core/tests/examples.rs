//! Every example under `examples/` runs to completion.

macro_rules! example {
    ($name:ident, $file:literal) => {
        mod $name {
            #![allow(dead_code)]
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));

            #[test]
            fn runs() {
                run_example().expect(concat!($file, " should run"));
            }
        }
    };
}

example!(spectroscopy, "spectroscopy.rs");
example!(cavity_qed, "cavity_qed.rs");
example!(detection_budget, "detection_budget.rs");
example!(rabi_nutation, "rabi_nutation.rs");
example!(ramsey_fringes, "ramsey_fringes.rs");
example!(photon_echo, "photon_echo.rs");
example!(superhyperfine, "superhyperfine.rs");
example!(flipflop_diffusion, "flipflop_diffusion.rs");
example!(g2_antibunching, "g2_antibunching.rs");
example!(statistical_fine_structure, "statistical_fine_structure.rs");
example!(coupling_histogram, "coupling_histogram.rs");
example!(config_and_golden, "config_and_golden.rs");
