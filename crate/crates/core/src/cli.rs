//! The `rexsim` command-line front end.
//!
//! ```text
//! rexsim <subcommand> [--config PATH] [--out PATH] [--seed N] [--workers N] [flags]
//! ```
//!
//! Exit status: 0 success, 1 file I/O failure, 2 usage error (unknown
//! subcommand or flag), 3 invalid configuration or inputs, 4 numerical
//! failure. The report goes to stdout; diagnostics go to stderr.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::cavity::{
    cavity_lifetime, cooperativity, detection_budget, g0_from_rabi, indistinguishability, max_coupling_g0, max_purcell,
    mean_photon_number, measured_purcell, project_q_scaling, purcell_from_coupling, QScalingBase,
};
use crate::config::{parse_config, ConfigDocument};
use crate::csv::{fmt_num, read_table, write_table, write_trace, CsvMeta};
use crate::dynamics::{
    extract_t2star_with, fit_power_law, fit_power_law_poisson, fit_pure_dephasing, fit_t2_from_echo, rabi_extrema, rabi_nutation_scan,
    ramsey_beat_frequency, simulate_echo_decay, simulate_ramsey_with, single_ion_threshold, EchoModulation,
    EnvelopeShape, TwoLevelParams,
};
use crate::error::{Error, Result};
use crate::golden::golden_report;
use crate::parallel::with_workers;
use crate::photonstats::{
    coupling_histogram, fit_bunching_shoulder, g2_estimator, g2_zero_analytic, sfs_generate, simulate_emitter_stream,
    CountRecord, G2Estimate, G2Options, Placement,
};
use crate::quantities::boltzmann_population_ratio;
use crate::report::{RunReport, Tolerance};
use crate::spectroscopy::{derive_transition, zeeman_splitting};
use crate::spinbath::{
    flipflop_gamma_sd, flipflop_tm, sublevel_count_and_range, superhyperfine_dephasing_bound, superhyperfine_splitting,
    MimsModulation,
};
use crate::trace::{linspace, TimeTrace};
use crate::AngularRate;

#[derive(Debug, Parser)]
#[command(name = "rexsim", version, about = "Single rare-earth ion / nanocavity simulator")]
pub struct Cli {
    /// INI configuration; built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// CSV output file.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Overrides simulation.seed.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Worker threads for parallel scans; 0 uses every core. Results do not depend on it.
    #[arg(long, global = true, value_name = "N", default_value_t = 0)]
    pub workers: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Oscillator strength, radiative lifetime, branching ratio, dipole moment, Zeeman splittings.
    Spectro {
        #[arg(long, value_name = "real|virtual|none")]
        local_field: Option<String>,
    },
    /// Coupling, Purcell factors, lifetimes, cooperativity, photon number and Q scaling.
    Cavity {
        #[arg(long, value_name = "X")]
        q_scale: Option<f64>,
    },
    /// Per-stage detection efficiency.
    Budget,
    /// Rabi nutation against cavity photon number.
    Rabi {
        #[arg(long, value_name = "N")]
        nbar_max: Option<f64>,
        #[arg(long, value_name = "N")]
        points: Option<u64>,
        #[arg(long, value_name = "NS")]
        pulse_ns: Option<f64>,
    },
    /// Ramsey fringes with the ligand beat, and the T2* fit.
    Ramsey {
        #[arg(long, value_name = "US")]
        max_us: Option<f64>,
        #[arg(long, value_name = "N")]
        points: Option<u64>,
        #[arg(long, value_name = "exponential|gaussian")]
        envelope: Option<String>,
        /// Additive Gaussian noise on the signal (full scale 1).
        #[arg(long, value_name = "SIGMA", default_value_t = 0.0)]
        noise: f64,
    },
    /// Two-pulse echo decay with envelope modulation, and the T2 fit.
    Echo {
        #[arg(long, value_name = "US")]
        max_us: Option<f64>,
        #[arg(long, value_name = "N")]
        points: Option<u64>,
        #[arg(long, value_name = "US")]
        fit_start_us: Option<f64>,
        /// Multiplicative Gaussian noise on the intensity.
        #[arg(long, value_name = "SIGMA", default_value_t = 0.0)]
        noise: f64,
    },
    /// Pulsed photon counting Monte Carlo and g2(tau).
    G2 {
        #[arg(long, value_name = "N")]
        pulses: Option<u64>,
        /// Disable the shelving level.
        #[arg(long)]
        no_shelving: bool,
        /// Also write the raw count record here.
        #[arg(long, value_name = "PATH")]
        counts: Option<PathBuf>,
    },
    /// Statistical fine structure of the inhomogeneous line tail.
    Sfs {
        #[arg(long, value_name = "GHZ")]
        start_ghz: Option<f64>,
        #[arg(long, value_name = "GHZ")]
        stop_ghz: Option<f64>,
        #[arg(long, value_name = "MHZ")]
        bin_mhz: Option<f64>,
    },
    /// Distribution of ion-cavity coupling over random positions.
    Histogram {
        #[arg(long, value_name = "N")]
        samples: Option<u64>,
        #[arg(long, value_name = "N")]
        bins: Option<u64>,
        #[arg(long, value_enum, default_value_t = PlacementArg::Uniform)]
        placement: PlacementArg,
    },
    /// Superhyperfine splittings against field, vanadium sublevels, echo modulation lines.
    Spinbath {
        #[arg(long, value_name = "MT", default_value_t = 500.0)]
        field_max_mt: f64,
        #[arg(long, value_name = "N", default_value_t = 51)]
        points: usize,
    },
    /// Flip-flop spectral diffusion against dopant density.
    Flipflop {
        #[arg(long, value_name = "N", default_value_t = 41)]
        points: usize,
    },
    /// Recompute the published reference figures and compare.
    Golden,
    /// Fit a previously written CSV (or count record for g2).
    Fit {
        #[arg(value_enum)]
        kind: FitKind,
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        /// Start of the echo fit window.
        #[arg(long, value_name = "US")]
        t_min_us: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlacementArg {
    Uniform,
    Antinode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitKind {
    /// T2* and beat from a ramsey CSV.
    Ramsey,
    /// T2 from an echo CSV.
    Echo,
    /// g0 from a rabi CSV.
    Rabi,
    /// gamma* from (T1_s, T2_s) columns.
    Dephasing,
    /// N = A Delta^-p from (Delta, N) columns.
    PowerLaw,
    /// g2 from a count record written by `g2 --counts`.
    G2,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit status.
pub fn run<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind::*;
            let text = e.render().to_string();
            return match e.kind() {
                DisplayHelp | DisplayVersion | DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = write!(stdout, "{text}");
                    if e.kind() == DisplayHelpOnMissingArgumentOrSubcommand {
                        2
                    } else {
                        0
                    }
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    2
                }
            };
        }
    };
    match execute(&cli) {
        Ok(report) => {
            let _ = write!(stdout, "{}", report.render());
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "rexsim: {e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed command and returns its report.
pub fn execute(cli: &Cli) -> Result<RunReport> {
    let mut cfg = match &cli.config {
        Some(p) => parse_config(p)?,
        None => ConfigDocument::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.set("simulation", "seed", &seed.to_string())?;
    }
    let mut ctx = Ctx { cfg, out: cli.out.clone(), flags: Vec::new(), name: subcommand_name(&cli.command) };
    with_workers(cli.workers, || dispatch(&mut ctx, &cli.command))?
}

fn subcommand_name(c: &Command) -> &'static str {
    match c {
        Command::Spectro { .. } => "spectro",
        Command::Cavity { .. } => "cavity",
        Command::Budget => "budget",
        Command::Rabi { .. } => "rabi",
        Command::Ramsey { .. } => "ramsey",
        Command::Echo { .. } => "echo",
        Command::G2 { .. } => "g2",
        Command::Sfs { .. } => "sfs",
        Command::Histogram { .. } => "histogram",
        Command::Spinbath { .. } => "spinbath",
        Command::Flipflop { .. } => "flipflop",
        Command::Golden => "golden",
        Command::Fit { .. } => "fit",
    }
}

struct Ctx {
    cfg: ConfigDocument,
    out: Option<PathBuf>,
    /// Flags that are not configuration keys, echoed as `flag.<name>`.
    flags: Vec<(String, String)>,
    name: &'static str,
}

impl Ctx {
    fn seed(&self) -> u64 {
        self.cfg.integer("simulation", "seed")
    }

    fn set(&mut self, section: &str, key: &str, v: Option<impl ToString>) -> Result<()> {
        match v {
            Some(v) => self.cfg.set(section, key, &v.to_string()),
            None => Ok(()),
        }
    }

    fn set_num(&mut self, section: &str, key: &str, v: Option<f64>) -> Result<()> {
        self.set(section, key, v.map(fmt_num))
    }

    fn flag(&mut self, name: &str, value: impl ToString) {
        self.flags.push((format!("flag.{name}"), value.to_string()));
    }

    fn meta(&self) -> CsvMeta {
        let mut params = self.cfg.entries();
        params.extend(self.flags.iter().cloned());
        CsvMeta::new(self.name).with_seed(self.seed()).with_params(params)
    }

    fn create(path: &Path) -> Result<BufWriter<File>> {
        File::create(path)
            .map(BufWriter::new)
            .map_err(|e| Error::Io(format!("cannot create {}: {e}", path.display())))
    }

    fn emit_trace(&self, trace: &TimeTrace, report: &mut RunReport) -> Result<()> {
        if let Some(p) = &self.out {
            write_trace(Self::create(p)?, &self.meta(), trace)?;
            report.note(format!("wrote {} rows to {}", trace.len(), p.display()));
        }
        Ok(())
    }

    fn emit_table(&self, header: &[&str], rows: &[Vec<String>], report: &mut RunReport) -> Result<()> {
        if let Some(p) = &self.out {
            write_table(Self::create(p)?, &self.meta(), header, rows)?;
            report.note(format!("wrote {} rows to {}", rows.len(), p.display()));
        }
        Ok(())
    }

    /// Writes the report rows themselves as CSV.
    fn emit_report(&self, report: &mut RunReport) -> Result<()> {
        let rows: Vec<Vec<String>> = report
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.name.clone(),
                    fmt_num(r.value),
                    r.unit.clone(),
                    r.reference.map(fmt_num).unwrap_or_default(),
                    r.deviation().map(fmt_num).unwrap_or_default(),
                    r.passes().map(|p| p.to_string()).unwrap_or_default(),
                ]
            })
            .collect();
        self.emit_table(&["quantity", "value", "unit", "reference", "deviation", "pass"], &rows, report)
    }
}

fn dispatch(ctx: &mut Ctx, cmd: &Command) -> Result<RunReport> {
    match cmd {
        Command::Spectro { local_field } => {
            ctx.set("material", "local_field", local_field.as_ref())?;
            spectro(ctx)
        }
        Command::Cavity { q_scale } => {
            ctx.set_num("cavity", "q_scale_factor", *q_scale)?;
            cavity(ctx)
        }
        Command::Budget => budget(ctx),
        Command::Rabi { nbar_max, points, pulse_ns } => {
            ctx.set_num("simulation", "rabi_nbar_max", *nbar_max)?;
            ctx.set("simulation", "rabi_points", *points)?;
            ctx.set_num("simulation", "rabi_pulse_ns", *pulse_ns)?;
            rabi(ctx)
        }
        Command::Ramsey { max_us, points, envelope, noise } => {
            ctx.set_num("simulation", "ramsey_max_us", *max_us)?;
            ctx.set("simulation", "ramsey_points", *points)?;
            ctx.set("simulation", "ramsey_envelope", envelope.as_ref())?;
            ctx.flag("noise", fmt_num(*noise));
            ramsey(ctx, *noise)
        }
        Command::Echo { max_us, points, fit_start_us, noise } => {
            ctx.set_num("simulation", "echo_max_us", *max_us)?;
            ctx.set("simulation", "echo_points", *points)?;
            ctx.set_num("simulation", "echo_fit_start_us", *fit_start_us)?;
            ctx.flag("noise", fmt_num(*noise));
            echo(ctx, *noise)
        }
        Command::G2 { pulses, no_shelving, counts } => {
            ctx.set("simulation", "pulses", *pulses)?;
            ctx.flag("no_shelving", no_shelving);
            g2(ctx, *no_shelving, counts.as_deref())
        }
        Command::Sfs { start_ghz, stop_ghz, bin_mhz } => {
            ctx.set_num("simulation", "sfs_start_ghz", *start_ghz)?;
            ctx.set_num("simulation", "sfs_stop_ghz", *stop_ghz)?;
            ctx.set_num("simulation", "sfs_bin_mhz", *bin_mhz)?;
            sfs(ctx)
        }
        Command::Histogram { samples, bins, placement } => {
            ctx.set("simulation", "histogram_samples", *samples)?;
            ctx.set("simulation", "histogram_bins", *bins)?;
            ctx.flag("placement", format!("{placement:?}").to_lowercase());
            let p = match placement {
                PlacementArg::Uniform => Placement::Uniform,
                PlacementArg::Antinode => Placement::Antinode,
            };
            histogram(ctx, p)
        }
        Command::Spinbath { field_max_mt, points } => {
            ctx.flag("field_max_mt", fmt_num(*field_max_mt));
            ctx.flag("points", points);
            spinbath(ctx, *field_max_mt, *points)
        }
        Command::Flipflop { points } => {
            ctx.flag("points", points);
            flipflop(ctx, *points)
        }
        Command::Golden => {
            let mut r = golden_report(&ctx.cfg)?;
            let failed = r.compared().filter(|row| row.passes() == Some(false)).count();
            r.note(format!("{} of {} reference figures within tolerance", r.compared().count() - failed, r.compared().count()));
            ctx.emit_report(&mut r)?;
            Ok(r)
        }
        Command::Fit { kind, input, t_min_us } => {
            ctx.flag("kind", format!("{kind:?}").to_lowercase());
            ctx.flag("input", input.display());
            fit(ctx, *kind, input, *t_min_us)
        }
    }
}

fn spectro(ctx: &mut Ctx) -> Result<RunReport> {
    let cfg = &ctx.cfg;
    let m = cfg.material();
    let tr = derive_transition(&m, cfg.local_field_model())?;
    let field = cfg.field_tesla();
    let zg = zeeman_splitting(m.g_ground, field);
    let ze = zeeman_splitting(m.g_excited, field);
    let mut r = RunReport::new(format!("spectro: {} local field", tr.local_field_model));
    r.value("local_field_factor", tr.local_field_factor, "")
        .compare("oscillator_strength", tr.oscillator_strength, "", 3.7e-5, Tolerance::Relative(0.02))
        .compare("radiative_lifetime", tr.radiative_lifetime * 1e6, "us", 237.0, Tolerance::Relative(0.02))
        .compare("branching_ratio", tr.branching_ratio, "", 0.38, Tolerance::Relative(0.02))
        .compare("dipole_moment", tr.dipole_moment, "C m", 1.59e-31, Tolerance::Relative(0.02))
        .value("transition_frequency", tr.transition_frequency.to_ordinary().0 / 1e12, "THz")
        .compare("zeeman_ground", zg.0 / 1e9, "GHz", 12.88, Tolerance::Relative(0.005))
        .value("zeeman_excited", ze.0 / 1e9, "GHz")
        .value(
            "ground_population_ratio",
            boltzmann_population_ratio(zg, cfg.number("field", "temperature_k"))?,
            "",
        );
    ctx.emit_report(&mut r)?;
    Ok(r)
}

fn cavity(ctx: &mut Ctx) -> Result<RunReport> {
    let cfg = &ctx.cfg;
    let m = cfg.material();
    let tr = derive_transition(&m, cfg.local_field_model())?;
    let dev = cfg.cavity_device()?;
    let coh = cfg.coherence();
    let g0_max = max_coupling_g0(tr.dipole_moment, m.refractive_index, dev.resonance, dev.mode_volume);
    let g0 = cfg.measured_g0();
    let mut r = RunReport::new("cavity");
    r.value("kappa/2pi", dev.kappa.to_ordinary().0 / 1e9, "GHz");
    if let Some(d) = dev.kappa_discrepancy {
        r.value("kappa_vs_resonance_over_q", d, "");
    }
    r.compare("g0_max/2pi", g0_max.to_ordinary().0 / 1e6, "MHz", 52.7, Tolerance::Relative(0.02))
        .compare(
            "purcell_max",
            max_purcell(m.wavelength, m.refractive_index, tr.local_field_factor, dev.quality_factor, dev.mode_volume),
            "",
            189.0,
            Tolerance::Relative(0.03),
        )
        .compare(
            "purcell_from_g0",
            purcell_from_coupling(g0_max, dev.kappa, tr.radiative_lifetime),
            "",
            189.0,
            Tolerance::Relative(0.03),
        )
        .compare(
            "cavity_lifetime_at_g0_max",
            cavity_lifetime(g0_max, dev.kappa, tr.branching_ratio, m.bulk_lifetime)? * 1e6,
            "us",
            1.25,
            Tolerance::Relative(0.05),
        )
        .compare(
            "purcell_measured",
            measured_purcell(coh.t1, m.bulk_lifetime, tr.branching_ratio, tr.radiative_lifetime)?,
            "",
            111.0,
            Tolerance::Relative(0.02),
        )
        .value("g0_measured/2pi", g0.to_ordinary().0 / 1e6, "MHz")
        .compare("cooperativity", cooperativity(g0, dev.kappa, coh.t2), "", 2.9, Tolerance::Relative(0.03))
        .compare("indistinguishability", indistinguishability(coh.t2_star, coh.t1)?, "", 0.952, Tolerance::Absolute(5e-4))
        .value("homogeneous_linewidth", coh.homogeneous_linewidth() / 1e3, "kHz")
        .value(
            "mean_photon_number",
            mean_photon_number(cfg.number("cavity", "input_power_nw") * 1e-9, dev.kappa_in(), dev.kappa, dev.resonance),
            "",
        );
    let factor = cfg.number("cavity", "q_scale_factor");
    let base =
        QScalingBase { kappa: dev.kappa, g0, branching_ratio: tr.branching_ratio, bulk_lifetime: m.bulk_lifetime, coherence: coh };
    let s = project_q_scaling(&base, factor)?;
    r.value("q_scaled_cavity_lifetime", s.cavity_lifetime * 1e6, "us");
    if factor == 10.0 {
        r.compare("q_scaled_cooperativity", s.cooperativity, "", 29.0, Tolerance::Relative(0.10));
    } else {
        r.value("q_scaled_cooperativity", s.cooperativity, "");
    }
    r.value("q_scaled_indistinguishability", s.indistinguishability, "");
    ctx.emit_report(&mut r)?;
    Ok(r)
}

fn budget(ctx: &mut Ctx) -> Result<RunReport> {
    let b = detection_budget(&ctx.cfg.detection_chain())?;
    let mut r = RunReport::new(format!("budget: {} stages", b.rows.len()));
    for row in &b.rows {
        r.value(format!("stage {}", row.stage), row.efficiency, "");
    }
    r.compare("overall", b.overall, "", 0.036, Tolerance::Absolute(0.005));
    let rows: Vec<Vec<String>> =
        b.rows.iter().map(|x| vec![x.stage.clone(), fmt_num(x.efficiency), fmt_num(x.cumulative)]).collect();
    ctx.emit_table(&["stage", "efficiency", "cumulative"], &rows, &mut r)?;
    Ok(r)
}

fn two_level(cfg: &ConfigDocument, detuning: AngularRate) -> Result<TwoLevelParams> {
    let c = cfg.coherence();
    TwoLevelParams::new(AngularRate::ZERO, detuning, c.t1, c.t2_star)
}

fn rabi(ctx: &mut Ctx) -> Result<RunReport> {
    let cfg = &ctx.cfg;
    let pulse = cfg.number("simulation", "rabi_pulse_ns") / 1e9;
    let nbar = linspace(0.0, cfg.number("simulation", "rabi_nbar_max"), cfg.integer("simulation", "rabi_points") as usize);
    let g0 = cfg.measured_g0();
    let trace = rabi_nutation_scan(g0, &nbar, pulse, &two_level(cfg, AngularRate::ZERO)?)?;
    let mut r = RunReport::new("rabi: excited population after a square pulse");
    r.value("g0/2pi", g0.to_ordinary().0 / 1e6, "MHz").value("pulse", pulse * 1e9, "ns");
    // Largest pulse-area step between neighbouring grid points.
    let step = nbar.windows(2).map(|w| 2.0 * g0.0 * pulse * (w[1].sqrt() - w[0].sqrt())).fold(0.0, f64::max);
    match rabi_extrema(&trace, pulse) {
        Ok(ext) if ext.len() >= 2 && step < std::f64::consts::FRAC_PI_4 => {
            let est = g0_from_rabi(&ext)?;
            r.value("extrema", ext.len() as f64, "")
                .compare("g0_fit/2pi", est.value / (2.0 * std::f64::consts::PI) / 1e6, "MHz", g0.to_ordinary().0 / 1e6, Tolerance::Relative(0.02))
                .value("g0_fit_std_error/2pi", est.std_error / (2.0 * std::f64::consts::PI) / 1e6, "MHz");
        }
        _ => {
            r.note(format!("grid too coarse or too short for a g0 fit (pulse-area step {step:.2} rad)"));
        }
    }
    ctx.emit_trace(&trace, &mut r)?;
    Ok(r)
}

fn ramsey(ctx: &mut Ctx, noise: f64) -> Result<RunReport> {
    let cfg = &ctx.cfg;
    let shape: EnvelopeShape = cfg.text("simulation", "ramsey_envelope").parse()?;
    let detuning = AngularRate::two_pi_times(cfg.number("simulation", "ramsey_detuning_mhz") * 1e6);
    let beat = superhyperfine_splitting(&cfg.yttrium_site(), &cfg.ground_moment(), cfg.field_tesla())?;
    let t2s = cfg.coherence().t2_star;
    let delays = linspace(0.0, cfg.number("simulation", "ramsey_max_us") / 1e6, cfg.integer("simulation", "ramsey_points") as usize);
    let mut trace = simulate_ramsey_with(&two_level(cfg, detuning)?, beat, t2s, &delays, shape)?;
    if noise > 0.0 {
        trace = trace.with_additive_noise(noise, ctx.seed())?;
    }
    let mut r = RunReport::new(format!("ramsey: {} envelope", shape.name()));
    r.value("ligand_splitting", beat.0 / 1e3, "kHz");
    let b = ramsey_beat_frequency(&trace)?;
    r.compare("beat_frequency", b.frequency / 1e3, "kHz", 740.0, Tolerance::Absolute(b.bin_width / 1e3))
        .value("fft_bin", b.bin_width / 1e3, "kHz");
    let fit = extract_t2star_with(&trace, shape)?;
    let tol = if noise > 0.0 { Tolerance::Absolute(2.0 * fit.t2_star.std_error * 1e6) } else { Tolerance::Relative(0.02) };
    r.compare("t2_star", fit.t2_star.value * 1e6, "us", t2s * 1e6, tol)
        .value("t2_star_std_error", fit.t2_star.std_error * 1e6, "us")
        .value("fit_rms_residual", fit.rms_residual, "");
    ctx.emit_trace(&trace, &mut r)?;
    Ok(r)
}

fn echo_modulation(cfg: &ConfigDocument) -> Result<EchoModulation> {
    let y = cfg.yttrium_site();
    let field = cfg.field_tesla();
    let dg = superhyperfine_splitting(&y, &cfg.ground_moment(), field)?;
    let de = superhyperfine_splitting(&y, &cfg.excited_moment(), field)?;
    let m = MimsModulation::new(dg, de, cfg.number("spinbath", "eseem_depth"))?;
    let damping = cfg.number("spinbath", "eseem_damping_us") / 1e6;
    Ok(if damping > 0.0 { EchoModulation::DampedMims { modulation: m, decay: damping } } else { EchoModulation::Mims(m) })
}

fn echo(ctx: &mut Ctx, noise: f64) -> Result<RunReport> {
    let cfg = &ctx.cfg;
    let t2 = cfg.coherence().t2;
    let delays = linspace(0.0, cfg.number("simulation", "echo_max_us") / 1e6, cfg.integer("simulation", "echo_points") as usize);
    let mut trace = simulate_echo_decay(t2, &echo_modulation(cfg)?, &delays)?;
    if noise > 0.0 {
        trace = trace.with_relative_noise(noise, ctx.seed())?;
    }
    let t_min = cfg.number("simulation", "echo_fit_start_us") / 1e6;
    let fit = fit_t2_from_echo(&trace, t_min)?;
    let mut r = RunReport::new("echo: two-pulse photon echo decay");
    let tol = if noise > 0.0 { Tolerance::Absolute(2.0 * fit.t2.std_error * 1e6) } else { Tolerance::Relative(0.02) };
    r.compare("t2", fit.t2.value * 1e6, "us", t2 * 1e6, tol)
        .value("t2_std_error", fit.t2.std_error * 1e6, "us")
        .value("fit_points", fit.points as f64, "")
        .value("log_rms_residual", fit.rms_residual, "");
    if fit.flagged {
        r.note(format!("residuals above threshold: fit window from {} us likely includes envelope modulation", t_min * 1e6));
    }
    ctx.emit_trace(&trace, &mut r)?;
    Ok(r)
}

fn g2_table(est: &G2Estimate) -> Vec<Vec<String>> {
    est.lags
        .iter()
        .zip(est.g2.iter().zip(&est.sigma))
        .zip(&est.coincidences)
        .map(|((&m, (g, s)), c)| vec![m.to_string(), fmt_num(m as f64 * est.period), fmt_num(*g), fmt_num(*s), c.to_string()])
        .collect()
}

const G2_HEADER: [&str; 5] = ["lag", "delay_s", "g2", "sigma", "coincidences"];

fn g2_rows(r: &mut RunReport, est: &G2Estimate, opts: &G2Options, analytic: Option<f64>) -> Result<()> {
    let (g0, s0) = est.at(0).ok_or_else(|| Error::Numeric("estimator returned no zero lag".into()))?;
    r.compare("g2_zero", g0, "", 0.09, Tolerance::Absolute(0.013)).value("g2_zero_sigma", s0, "");
    if let Some(a) = analytic {
        r.compare("g2_zero_vs_analytic", g0, "", a, Tolerance::Absolute(2.0 * s0));
    }
    match fit_bunching_shoulder(est, opts) {
        Ok(f) if f.amplitude.value > 2.0 * f.amplitude.std_error => {
            r.value("bunching_amplitude", f.amplitude.value, "")
                .value("bunching_time", f.decay_time.value * 1e6, "us")
                .value("bunching_time_std_error", f.decay_time.std_error * 1e6, "us")
                .value("bunching_extent", f.extent * 1e6, "us");
        }
        _ => {
            r.note("no bunching shoulder resolved");
        }
    }
    Ok(())
}

fn g2(ctx: &mut Ctx, no_shelving: bool, counts: Option<&Path>) -> Result<RunReport> {
    let cfg = &ctx.cfg;
    let mut scheme = cfg.emitter_scheme();
    if no_shelving {
        scheme.p_shelve = 0.0;
    }
    let bg = cfg.background();
    let period = cfg.pulse_period();
    let opts = cfg.g2_options();
    let rec = simulate_emitter_stream(&scheme, &bg, cfg.integer("simulation", "pulses"), period, ctx.seed())?;
    let est = g2_estimator(&rec, &opts)?;
    let signal = scheme.mean_signal_per_pulse(period);
    let rho = signal / (signal + bg.per_pulse(period));
    let mut r = RunReport::new(if no_shelving { "g2: two-level emitter" } else { "g2: emitter with shelving" });
    r.value("pulses", rec.pulses as f64, "")
        .value("detected_per_pulse", rec.mean_per_pulse(), "")
        .value("count_rate", rec.count_rate(), "Hz")
        .value("signal_fraction", rho, "");
    g2_rows(&mut r, &est, &opts, Some(g2_zero_analytic(rho)?))?;
    if !no_shelving {
        r.value("bunching_time_model", scheme.bunching_time(period) * 1e6, "us");
    }
    if let Some(p) = counts {
        rec.write_text(Ctx::create(p)?)?;
        r.note(format!("wrote {} nonzero pulses to {}", rec.events.len(), p.display()));
    }
    ctx.emit_table(&G2_HEADER, &g2_table(&est), &mut r)?;
    Ok(r)
}

fn sfs(ctx: &mut Ctx) -> Result<RunReport> {
    let cfg = &ctx.cfg;
    let density = cfg.sfs_density();
    let s = sfs_generate(
        &density,
        cfg.number("simulation", "sfs_start_ghz") * 1e9,
        cfg.number("simulation", "sfs_stop_ghz") * 1e9,
        cfg.number("simulation", "sfs_bin_mhz") * 1e6,
        ctx.seed(),
    )?;
    let mut r = RunReport::new("sfs: ion counts per excitation bin");
    r.value("bins", s.trace.len() as f64, "").value("ions", s.trace.y.iter().sum(), "");
    let test = s.dispersion_test(5.0)?;
    r.value("dispersion_statistic", test.statistic, "")
        .value("dispersion_dof", test.dof as f64, "")
        .value("dispersion_p_value", test.p_value, "");
    if test.p_value < 0.05 {
        r.note("scatter inconsistent with Poisson at the 5% level");
    } else {
        r.note("scatter consistent with Poisson at the 5% level");
    }
    let unit = density.unit;
    let pts: Vec<(f64, f64)> = s.trace.points().map(|(x, n)| (x / unit, n)).collect();
    if pts.len() >= 3 {
        let pl = fit_power_law_poisson(&pts, s.bin / unit)?;
        r.compare("exponent", pl.exponent.value, "", density.exponent, Tolerance::Absolute(3.0 * pl.exponent.std_error))
            .value("exponent_std_error", pl.exponent.std_error, "")
            .value("amplitude", pl.amplitude, "per GHz");
        if let Ok(d) = single_ion_threshold(pl.amplitude, pl.exponent.value) {
            r.value("single_ion_detuning", d, "GHz");
        }
    }
    let rows: Vec<Vec<String>> = s
        .trace
        .points()
        .zip(&s.expected)
        .map(|((x, y), e)| vec![fmt_num(x), fmt_num(y), fmt_num(*e)])
        .collect();
    ctx.emit_table(&["detuning_hz", "ions", "expected"], &rows, &mut r)?;
    Ok(r)
}

fn histogram(ctx: &mut Ctx, placement: Placement) -> Result<RunReport> {
    let cfg = &ctx.cfg;
    let h = coupling_histogram(
        &cfg.mode_model(),
        placement,
        cfg.integer("simulation", "histogram_samples") as usize,
        cfg.integer("simulation", "histogram_bins") as usize,
        ctx.seed(),
    )?;
    let mean: f64 = h.centres.iter().zip(&h.fractions).map(|(c, f)| c * f).sum();
    let mut r = RunReport::new("histogram: relative PL over ion positions");
    r.value("samples", h.samples as f64, "")
        .value("mean_relative_pl", mean, "")
        .value("top_bin_fraction", *h.fractions.last().unwrap_or(&0.0), "");
    ctx.emit_trace(&h.trace()?.with_meta("placement", format!("{placement:?}").to_lowercase()), &mut r)?;
    Ok(r)
}

fn spinbath(ctx: &mut Ctx, field_max_mt: f64, points: usize) -> Result<RunReport> {
    if !(field_max_mt >= 0.0) || points < 2 {
        return Err(Error::validation("field grid", "need --field-max-mt >= 0 and --points >= 2"));
    }
    let cfg = &ctx.cfg;
    let (y, v) = (cfg.yttrium_site(), cfg.vanadium_site());
    let (gm, em) = (cfg.ground_moment(), cfg.excited_moment());
    let field = cfg.field_tesla();
    let dg = superhyperfine_splitting(&y, &gm, field)?;
    let de = superhyperfine_splitting(&y, &em, field)?;
    let vs = sublevel_count_and_range(&v, &gm, field)?;
    let mut r = RunReport::new("spinbath: ligand splittings");
    r.compare("y_splitting_zero_field", superhyperfine_splitting(&y, &gm, 0.0)?.0 / 1e3, "kHz", 80.0, Tolerance::Relative(0.15))
        .value("y_splitting_zero_field_excited", superhyperfine_splitting(&y, &em, 0.0)?.0 / 1e3, "kHz")
        .compare("y_splitting_ground", dg.0 / 1e3, "kHz", 740.0, Tolerance::Relative(0.10))
        .compare("y_splitting_excited", de.0 / 1e3, "kHz", 790.0, Tolerance::Relative(0.10))
        .compare("v_sublevels", vs.count as f64, "", 8.0, Tolerance::Absolute(0.0))
        .value("v_splitting_min", vs.min_splitting.0 / 1e6, "MHz")
        .value("v_splitting_max", vs.max_splitting.0 / 1e6, "MHz");
    let m = MimsModulation::new(dg, de, cfg.number("spinbath", "eseem_depth"))?;
    for (name, f) in ["eseem_line_g", "eseem_line_e", "eseem_line_difference", "eseem_line_sum"].iter().zip(m.frequencies()) {
        r.value(*name, f / 1e3, "kHz");
    }
    // Bulk T1 with the bulk echo T2: the excess over the lifetime limit.
    let bound = superhyperfine_dephasing_bound(cfg.material().bulk_lifetime, cfg.coherence().t2);
    r.value("excess_linewidth_bound", bound / 1e3, "kHz");
    let mut rows = Vec::with_capacity(points);
    for b in linspace(0.0, field_max_mt / 1e3, points) {
        rows.push(vec![
            fmt_num(b),
            fmt_num(superhyperfine_splitting(&y, &gm, b)?.0),
            fmt_num(superhyperfine_splitting(&y, &em, b)?.0),
            fmt_num(superhyperfine_splitting(&v, &gm, b)?.0),
            fmt_num(superhyperfine_splitting(&v, &em, b)?.0),
        ]);
    }
    ctx.emit_table(&["field_t", "y_ground_hz", "y_excited_hz", "v_ground_hz", "v_excited_hz"], &rows, &mut r)?;
    Ok(r)
}

fn flipflop(ctx: &mut Ctx, points: usize) -> Result<RunReport> {
    if points < 2 {
        return Err(Error::validation("points", "need at least 2"));
    }
    let p = ctx.cfg.flipflop();
    let sd = flipflop_gamma_sd(&p)?;
    let d = flipflop_tm(p.gamma0, sd.0, p.spin_flip_rate)?;
    let mut r = RunReport::new("flipflop: dopant spectral diffusion");
    r.value("gamma_sd", sd.0 / 1e3, "kHz")
        .value("t_m", d.t_m * 1e6, "us")
        .value("effective_linewidth", d.effective_linewidth, "Hz")
        .compare("added_dephasing", d.added_dephasing, "Hz", 30.0, Tolerance::Factor(2.0));
    let mut rows = Vec::with_capacity(points);
    for k in 0..points {
        let n = 10f64.powf(21.0 + 4.0 * k as f64 / (points - 1) as f64);
        let q = crate::spinbath::FlipFlopParams { dopant_density: n, ..p };
        let sd = flipflop_gamma_sd(&q)?;
        let d = flipflop_tm(q.gamma0, sd.0, q.spin_flip_rate)?;
        rows.push(vec![fmt_num(n), fmt_num(sd.0), fmt_num(d.t_m), fmt_num(d.added_dephasing)]);
    }
    ctx.emit_table(&["dopant_density_per_m3", "gamma_sd_hz", "t_m_s", "added_dephasing_hz"], &rows, &mut r)?;
    Ok(r)
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::Io(format!("cannot open {}: {e}", path.display())))
}

fn fit(ctx: &mut Ctx, kind: FitKind, input: &Path, t_min_us: Option<f64>) -> Result<RunReport> {
    let mut r = RunReport::new(format!("fit {kind:?} from {}", input.display()).to_lowercase());
    if kind == FitKind::G2 {
        let rec = CountRecord::read_text(open(input)?)?;
        let opts = ctx.cfg.g2_options();
        let est = g2_estimator(&rec, &opts)?;
        r.value("pulses", rec.pulses as f64, "").value("detected_per_pulse", rec.mean_per_pulse(), "");
        g2_rows(&mut r, &est, &opts, None)?;
        ctx.emit_table(&G2_HEADER, &g2_table(&est), &mut r)?;
        return Ok(r);
    }
    let table = read_table(open(input)?)?;
    match kind {
        FitKind::Ramsey => {
            let trace = table.to_trace()?;
            let shape: EnvelopeShape = table.meta("envelope").unwrap_or("exponential").parse()?;
            let f = extract_t2star_with(&trace, shape)?;
            r.value("t2_star", f.t2_star.value * 1e6, "us").value("t2_star_std_error", f.t2_star.std_error * 1e6, "us");
            let b = ramsey_beat_frequency(&trace)?;
            r.value("beat_frequency", b.frequency / 1e3, "kHz").value("fft_bin", b.bin_width / 1e3, "kHz");
        }
        FitKind::Echo => {
            let t_min = t_min_us.unwrap_or(ctx.cfg.number("simulation", "echo_fit_start_us")) / 1e6;
            let f = fit_t2_from_echo(&table.to_trace()?, t_min)?;
            r.value("t2", f.t2.value * 1e6, "us")
                .value("t2_std_error", f.t2.std_error * 1e6, "us")
                .value("log_rms_residual", f.rms_residual, "");
            if f.flagged {
                r.note("residuals above threshold: the fit window likely includes envelope modulation");
            }
        }
        FitKind::Rabi => {
            let trace = table.to_trace()?;
            let pulse = match table.meta("pulse_s") {
                Some(v) => v.parse().map_err(|_| Error::validation("pulse_s", format!("`{v}` is not a number")))?,
                None => ctx.cfg.number("simulation", "rabi_pulse_ns") / 1e9,
            };
            let ext = rabi_extrema(&trace, pulse)?;
            let est = g0_from_rabi(&ext)?;
            let two_pi = 2.0 * std::f64::consts::PI;
            r.value("extrema", ext.len() as f64, "")
                .value("g0/2pi", est.value / two_pi / 1e6, "MHz")
                .value("g0_std_error/2pi", est.std_error / two_pi / 1e6, "MHz");
        }
        FitKind::Dephasing => {
            let (a, b) = (table.numeric_column(0)?, table.numeric_column(1)?);
            let g = fit_pure_dephasing(&a.into_iter().zip(b).collect::<Vec<_>>())?;
            r.value("pure_dephasing", g.value / 1e3, "kHz").value("pure_dephasing_std_error", g.std_error / 1e3, "kHz");
        }
        FitKind::PowerLaw => {
            let (a, b) = (table.numeric_column(0)?, table.numeric_column(1)?);
            // Count tables from `sfs` carry their bin width; fit those as Poisson counts.
            let bin = table.meta("param.simulation.sfs_bin_mhz").and_then(|v| v.parse::<f64>().ok());
            let f = match bin {
                Some(mhz) => {
                    let pts: Vec<(f64, f64)> = a.into_iter().zip(b).map(|(x, n)| (x / 1e9, n)).collect();
                    fit_power_law_poisson(&pts, mhz / 1e3)?
                }
                None => fit_power_law(&a.into_iter().zip(b).filter(|(_, n)| *n > 0.0).collect::<Vec<_>>())?,
            };
            r.value("exponent", f.exponent.value, "")
                .value("exponent_std_error", f.exponent.std_error, "")
                .value("amplitude", f.amplitude, "")
                .value("single_ion_detuning", single_ion_threshold(f.amplitude, f.exponent.value)?, "(input units)");
        }
        FitKind::G2 => unreachable!("handled above"),
    }
    ctx.emit_report(&mut r)?;
    Ok(r)
}
