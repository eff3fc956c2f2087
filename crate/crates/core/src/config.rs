//! INI-style run configuration.
//!
//! Sections `[material]`, `[cavity]`, `[field]`, `[spinbath]`, `[detection]`
//! and `[simulation]` hold `key = value` lines; `#` starts a comment. The unit
//! of every numeric key is the suffix of its name (`wavelength_nm`,
//! `b_field_mt`, ...). A value may repeat the unit (`880 nm`); any other unit
//! is rejected. `[detection]` also accepts any number of `stage_<name>`
//! efficiencies, which replace the default chain when present.

use std::fmt::{self, Write as _};
use std::path::Path;

use thiserror::Error;

use crate::cavity::{CavityDevice, CoherenceSummary, DetectionChain};
use crate::error::{Error, Result};
use crate::photonstats::{BackgroundModel, EmitterLevelScheme, G2Options, ModeModel, PowerLawDensity};
use crate::quantities::AngularRate;
use crate::spectroscopy::{absorption_area_from_ghz_per_cm, LocalFieldModel, MaterialSpec};
use crate::spinbath::{ElectronicMoment, FlipFlopParams, MomentOrientation, OpticalLevel, SpinBathSite};

pub const SECTIONS: [&str; 6] = ["material", "cavity", "field", "spinbath", "detection", "simulation"];

/// Problems found while reading a configuration. Positions are 1-based.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {detail}")]
    Io { path: String, detail: String },

    #[error("line {line}, column {column}: {detail}")]
    Syntax { line: usize, column: usize, detail: String },

    #[error("line {line}, column {column}: unknown section [{name}]")]
    UnknownSection { line: usize, column: usize, name: String },

    #[error("line {line}, column {column}: unknown key `{key}` in [{section}]")]
    UnknownKey { line: usize, column: usize, section: String, key: String },

    #[error("line {line}, column {column}: duplicate key `{key}`")]
    DuplicateKey { line: usize, column: usize, key: String },

    #[error("line {line}, column {column}: `{key}` is in {expected} but the value says `{found}`")]
    UnitMismatch { line: usize, column: usize, key: String, expected: String, found: String },

    #[error("line {line}, column {column}: `{key}` expects a number, got `{value}`")]
    NotNumeric { line: usize, column: usize, key: String, value: String },

    #[error("line {line}, column {column}: invalid `{key}`: {detail}")]
    InvalidValue { line: usize, column: usize, key: String, detail: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Check {
    Any,
    Positive,
    NonNegative,
    Probability,
    AboveOne,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Number { unit: &'static str, check: Check },
    Integer { min: u64 },
    Text { choices: &'static [&'static str] },
}

struct KeySpec {
    section: &'static str,
    key: &'static str,
    kind: Kind,
    default: &'static str,
}

const fn num(section: &'static str, key: &'static str, unit: &'static str, check: Check, default: &'static str) -> KeySpec {
    KeySpec { section, key, kind: Kind::Number { unit, check }, default }
}

const fn int(section: &'static str, key: &'static str, min: u64, default: &'static str) -> KeySpec {
    KeySpec { section, key, kind: Kind::Integer { min }, default }
}

const fn text(section: &'static str, key: &'static str, choices: &'static [&'static str], default: &'static str) -> KeySpec {
    KeySpec { section, key, kind: Kind::Text { choices }, default }
}

use Check::*;

#[rustfmt::skip]
const KEYS: &[KeySpec] = &[
    num("material", "absorption_area_ghz_per_cm", "ghz_per_cm", Positive, "102"),
    num("material", "ion_density_per_m3", "per_m3", Positive, "1.24e23"),
    num("material", "refractive_index", "", AboveOne, "2.1785"),
    num("material", "wavelength_nm", "nm", Positive, "880"),
    num("material", "bulk_lifetime_us", "us", Positive, "90"),
    num("material", "g_ground", "", Positive, "2.36"),
    num("material", "g_excited", "", Positive, "0.9"),
    text("material", "local_field", &["real", "virtual", "none"], "real"),
    num("material", "sfs_amplitude_per_ghz", "per_ghz", NonNegative, "1.13e4"),
    num("material", "sfs_exponent", "", Any, "2.9"),

    num("cavity", "q_factor", "", Positive, "3900"),
    num("cavity", "mode_volume_um3", "um3", Positive, "0.056"),
    num("cavity", "kappa_ghz", "ghz", NonNegative, "90"),
    num("cavity", "kappa_in_fraction", "", Probability, "0.45"),
    num("cavity", "input_power_nw", "nw", NonNegative, "1"),
    num("cavity", "g0_measured_mhz", "mhz", Positive, "28.5"),
    num("cavity", "cavity_lifetime_us", "us", Positive, "2.1"),
    num("cavity", "t2_us", "us", Positive, "25.4"),
    num("cavity", "t2_star_us", "us", Positive, "4.0"),
    num("cavity", "pure_dephasing_khz", "khz", NonNegative, "9.7"),
    num("cavity", "q_scale_factor", "", Positive, "10"),
    num("cavity", "mode_waist_nm", "nm", Positive, "120"),
    num("cavity", "mode_half_width_nm", "nm", Positive, "150"),
    num("cavity", "mode_length_um", "um", Positive, "2"),

    num("field", "b_field_mt", "mt", NonNegative, "390"),
    num("field", "temperature_k", "k", Positive, "0.5"),
    text("field", "moment_orientation", &["antiparallel", "parallel"], "antiparallel"),

    num("spinbath", "yttrium_distance_angstrom", "angstrom", Positive, "3.9"),
    num("spinbath", "yttrium_angle_deg", "deg", Any, "0"),
    num("spinbath", "vanadium_distance_angstrom", "angstrom", Positive, "3.14"),
    num("spinbath", "vanadium_angle_deg", "deg", Any, "0"),
    num("spinbath", "eseem_depth", "", Probability, "0.3"),
    num("spinbath", "eseem_damping_us", "us", NonNegative, "1.5"),
    num("spinbath", "gamma0_khz", "khz", Positive, "1"),
    num("spinbath", "dopant_density_per_m3", "per_m3", NonNegative, "6.3e23"),
    num("spinbath", "spin_lifetime_ms", "ms", Positive, "98"),

    num("detection", "dark_count_rate_hz", "hz", NonNegative, "2"),
    num("detection", "p_exc", "", Probability, "0.66"),
    num("detection", "p_shelve", "", Probability, "0.065"),
    num("detection", "shelf_rate_hz", "hz", Positive, "3870"),
    num("detection", "background_per_pulse", "", NonNegative, "0.00084"),
    num("detection", "repetition_rate_khz", "khz", Positive, "25"),

    int("simulation", "seed", 0, "1"),
    int("simulation", "pulses", 1, "10000000"),
    int("simulation", "g2_max_lag", 2, "200"),
    int("simulation", "g2_window_start", 1, "100"),
    int("simulation", "g2_window_end", 1, "200"),
    int("simulation", "histogram_samples", 1000, "1000000"),
    int("simulation", "histogram_bins", 1, "25"),
    num("simulation", "sfs_start_ghz", "ghz", Positive, "1"),
    num("simulation", "sfs_stop_ghz", "ghz", Positive, "30"),
    num("simulation", "sfs_bin_mhz", "mhz", Positive, "10"),
    num("simulation", "rabi_pulse_ns", "ns", Positive, "250"),
    num("simulation", "rabi_nbar_max", "", Positive, "0.01"),
    int("simulation", "rabi_points", 2, "200"),
    num("simulation", "ramsey_max_us", "us", Positive, "16"),
    int("simulation", "ramsey_points", 8, "400"),
    num("simulation", "ramsey_detuning_mhz", "mhz", Any, "0"),
    text("simulation", "ramsey_envelope", &["exponential", "gaussian"], "exponential"),
    num("simulation", "echo_max_us", "us", Positive, "40"),
    int("simulation", "echo_points", 5, "400"),
    num("simulation", "echo_fit_start_us", "us", NonNegative, "4"),
];

const DEFAULT_STAGES: [(&str, f64); 5] =
    [("kappa_in", 0.45), ("waveguide_fiber", 0.19), ("fiber_links", 0.80), ("circulator", 0.65), ("snspd", 0.82)];

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number(f64),
    Integer(u64),
    Text(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number(v) => write!(f, "{v:?}"),
            Value::Integer(v) => write!(f, "{v}"),
            Value::Text(s) => f.write_str(s),
        }
    }
}

/// A validated configuration with every key present.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigDocument {
    /// Table keys in table order.
    values: Vec<Value>,
    /// Detection stages in file order.
    stages: Vec<(String, f64)>,
}

impl Default for ConfigDocument {
    fn default() -> Self {
        ConfigDocument::parse_str("").expect("built-in defaults are valid")
    }
}

/// Reads and validates a configuration file.
pub fn parse_config(path: &Path) -> Result<ConfigDocument> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Io { path: path.display().to_string(), detail: e.to_string() })?;
    Ok(ConfigDocument::parse_str(&text)?)
}

fn split_unit(raw: &str) -> (&str, &str) {
    let s = raw.trim();
    if s.parse::<f64>().is_ok() {
        return (s, "");
    }
    if let Some((n, u)) = s.split_once(char::is_whitespace) {
        return (n.trim(), u.trim());
    }
    for (i, c) in s.char_indices().rev() {
        if c.is_ascii_alphabetic() && s[..i].parse::<f64>().is_ok() {
            return (&s[..i], &s[i..]);
        }
    }
    (s, "")
}

fn check_number(v: f64, check: Check) -> std::result::Result<(), String> {
    if !v.is_finite() {
        return Err("must be finite".into());
    }
    match check {
        Any => Ok(()),
        Positive if v > 0.0 => Ok(()),
        Positive => Err(format!("must be > 0, got {v}")),
        NonNegative if v >= 0.0 => Ok(()),
        NonNegative => Err(format!("must be >= 0, got {v}")),
        Probability if (0.0..=1.0).contains(&v) => Ok(()),
        Probability => Err(format!("must lie in [0, 1], got {v}")),
        AboveOne if v > 1.0 => Ok(()),
        AboveOne => Err(format!("must be > 1, got {v}")),
    }
}

fn parse_value(spec: &KeySpec, raw: &str, line: usize, column: usize) -> std::result::Result<Value, ConfigError> {
    parse_kind(spec.kind, spec.key, raw, line, column)
}

fn parse_kind(kind: Kind, key: &str, raw: &str, line: usize, column: usize) -> std::result::Result<Value, ConfigError> {
    let key = key.to_string();
    match kind {
        Kind::Number { unit, check } => {
            let (n, u) = split_unit(raw);
            let v: f64 = n
                .parse()
                .map_err(|_| ConfigError::NotNumeric { line, column, key: key.clone(), value: raw.trim().into() })?;
            if !u.is_empty() && !u.eq_ignore_ascii_case(unit) {
                let expected = if unit.is_empty() { "no unit".to_string() } else { unit.to_string() };
                return Err(ConfigError::UnitMismatch { line, column, key, expected, found: u.into() });
            }
            check_number(v, check).map_err(|detail| ConfigError::InvalidValue { line, column, key, detail })?;
            Ok(Value::Number(v))
        }
        Kind::Integer { min } => {
            let v: u64 = raw
                .trim()
                .parse()
                .map_err(|_| ConfigError::NotNumeric { line, column, key: key.clone(), value: raw.trim().into() })?;
            if v < min {
                return Err(ConfigError::InvalidValue { line, column, key, detail: format!("must be >= {min}, got {v}") });
            }
            Ok(Value::Integer(v))
        }
        Kind::Text { choices } => {
            let v = raw.trim().to_ascii_lowercase();
            if !choices.contains(&v.as_str()) {
                return Err(ConfigError::InvalidValue {
                    line,
                    column,
                    key,
                    detail: format!("expected one of {}, got `{}`", choices.join(", "), raw.trim()),
                });
            }
            Ok(Value::Text(v))
        }
    }
}

impl ConfigDocument {
    pub fn parse_str(text: &str) -> std::result::Result<Self, ConfigError> {
        let mut values: Vec<Option<Value>> = vec![None; KEYS.len()];
        let mut stages: Vec<(String, f64)> = Vec::new();
        let mut section: Option<&'static str> = None;
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw_line.split('#').next().unwrap_or("");
            let indent = content.len() - content.trim_start().len();
            let trimmed = content.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                    line,
                    column: indent + 1,
                    detail: "section header must end with `]`".into(),
                })?;
                let name = name.trim();
                section = Some(SECTIONS.iter().copied().find(|s| *s == name).ok_or_else(|| {
                    ConfigError::UnknownSection { line, column: indent + 2, name: name.into() }
                })?);
                continue;
            }
            let (key, value) = trimmed.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                column: indent + 1,
                detail: "expected `key = value`".into(),
            })?;
            let key = key.trim();
            let key_col = indent + 1;
            let value_col = content.find('=').map_or(key_col, |p| {
                let after = &content[p + 1..];
                p + 2 + (after.len() - after.trim_start().len())
            });
            let sec = section.ok_or_else(|| ConfigError::Syntax {
                line,
                column: key_col,
                detail: "key before any [section]".into(),
            })?;
            if sec == "detection" {
                if let Some(name) = key.strip_prefix("stage_") {
                    if name.is_empty() {
                        return Err(ConfigError::Syntax { line, column: key_col, detail: "empty stage name".into() });
                    }
                    if stages.iter().any(|(n, _)| n == name) {
                        return Err(ConfigError::DuplicateKey { line, column: key_col, key: key.into() });
                    }
                    let kind = Kind::Number { unit: "", check: Probability };
                    let Value::Number(v) = parse_kind(kind, key, value, line, value_col)? else {
                        unreachable!("numeric kind yields a number")
                    };
                    if v == 0.0 {
                        return Err(ConfigError::InvalidValue {
                            line,
                            column: value_col,
                            key: key.into(),
                            detail: "stage efficiency must be > 0".into(),
                        });
                    }
                    stages.push((name.to_string(), v));
                    continue;
                }
            }
            let i = KEYS.iter().position(|s| s.section == sec && s.key == key).ok_or_else(|| ConfigError::UnknownKey {
                line,
                column: key_col,
                section: sec.into(),
                key: key.into(),
            })?;
            if values[i].is_some() {
                return Err(ConfigError::DuplicateKey { line, column: key_col, key: key.into() });
            }
            values[i] = Some(parse_value(&KEYS[i], value, line, value_col)?);
        }
        let values: Vec<Value> = values
            .into_iter()
            .zip(KEYS)
            .map(|(v, spec)| v.unwrap_or_else(|| parse_value(spec, spec.default, 0, 0).expect("default value is valid")))
            .collect();
        if stages.is_empty() {
            stages = DEFAULT_STAGES.iter().map(|(n, v)| (n.to_string(), *v)).collect();
        }
        let doc = ConfigDocument { values, stages };
        let (w0, w1, lag) = (doc.integer("simulation", "g2_window_start"), doc.integer("simulation", "g2_window_end"), doc.integer("simulation", "g2_max_lag"));
        if !(w0 <= w1 && w1 <= lag) {
            return Err(ConfigError::InvalidValue {
                line: 0,
                column: 0,
                key: "g2_window_end".into(),
                detail: "need g2_window_start <= g2_window_end <= g2_max_lag".into(),
            });
        }
        if doc.number("simulation", "sfs_stop_ghz") <= doc.number("simulation", "sfs_start_ghz") {
            return Err(ConfigError::InvalidValue {
                line: 0,
                column: 0,
                key: "sfs_stop_ghz".into(),
                detail: "must exceed sfs_start_ghz".into(),
            });
        }
        Ok(doc)
    }

    /// Canonical text form with every key, parseable back to an equal document.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (n, sec) in SECTIONS.iter().enumerate() {
            if n > 0 {
                out.push('\n');
            }
            let _ = writeln!(out, "[{sec}]");
            for (spec, v) in KEYS.iter().zip(&self.values).filter(|(s, _)| s.section == *sec) {
                let _ = writeln!(out, "{} = {}", spec.key, v);
            }
            if *sec == "detection" {
                for (name, v) in &self.stages {
                    let _ = writeln!(out, "stage_{name} = {v:?}");
                }
            }
        }
        out
    }

    /// `(section.key, value)` for every entry, for parameter echoes.
    pub fn entries(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> =
            KEYS.iter().zip(&self.values).map(|(s, v)| (format!("{}.{}", s.section, s.key), v.to_string())).collect();
        out.extend(self.stages.iter().map(|(n, v)| (format!("detection.stage_{n}"), format!("{v:?}"))));
        out
    }

    fn get(&self, section: &str, key: &str) -> &Value {
        let i = KEYS
            .iter()
            .position(|s| s.section == section && s.key == key)
            .unwrap_or_else(|| panic!("no config key {section}.{key}"));
        &self.values[i]
    }

    /// Numeric value in the key's own unit. Panics on a key missing from the table.
    pub fn number(&self, section: &str, key: &str) -> f64 {
        match self.get(section, key) {
            Value::Number(v) => *v,
            Value::Integer(v) => *v as f64,
            Value::Text(_) => panic!("{section}.{key} is not numeric"),
        }
    }

    pub fn integer(&self, section: &str, key: &str) -> u64 {
        match self.get(section, key) {
            Value::Integer(v) => *v,
            _ => panic!("{section}.{key} is not an integer"),
        }
    }

    pub fn text(&self, section: &str, key: &str) -> &str {
        match self.get(section, key) {
            Value::Text(s) => s,
            _ => panic!("{section}.{key} is not text"),
        }
    }

    /// Overrides one entry, validating it as if read from a file.
    pub fn set(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        let i = KEYS
            .iter()
            .position(|s| s.section == section && s.key == key)
            .ok_or_else(|| Error::validation(format!("{section}.{key}"), "no such configuration key"))?;
        self.values[i] = parse_value(&KEYS[i], value, 0, 0).map_err(|e| match e {
            ConfigError::InvalidValue { key, detail, .. } => Error::validation(key, detail),
            ConfigError::NotNumeric { key, value, .. } => Error::validation(key, format!("`{value}` is not a number")),
            ConfigError::UnitMismatch { key, expected, found, .. } => {
                Error::validation(key, format!("expected {expected}, got `{found}`"))
            }
            other => Error::Config(other),
        })?;
        Ok(())
    }

    pub fn stages(&self) -> &[(String, f64)] {
        &self.stages
    }

    pub fn material(&self) -> MaterialSpec {
        let m = |k| self.number("material", k);
        MaterialSpec {
            absorption_area: absorption_area_from_ghz_per_cm(m("absorption_area_ghz_per_cm")),
            ion_density: m("ion_density_per_m3"),
            refractive_index: m("refractive_index"),
            wavelength: m("wavelength_nm") / 1e9,
            bulk_lifetime: m("bulk_lifetime_us") / 1e6,
            g_ground: m("g_ground"),
            g_excited: m("g_excited"),
        }
    }

    pub fn local_field_model(&self) -> LocalFieldModel {
        self.text("material", "local_field").parse().expect("validated choice")
    }

    /// The resonator; `kappa_ghz = 0` derives κ from ω₀/Q.
    pub fn cavity_device(&self) -> Result<CavityDevice> {
        let c = |k| self.number("cavity", k);
        let kappa = c("kappa_ghz");
        CavityDevice::new(
            c("q_factor"),
            c("mode_volume_um3") / 1e18,
            self.material().transition_frequency(),
            c("kappa_in_fraction"),
            (kappa > 0.0).then(|| AngularRate::two_pi_times(kappa * 1e9)),
        )
    }

    pub fn coherence(&self) -> CoherenceSummary {
        let c = |k| self.number("cavity", k);
        CoherenceSummary {
            t1: c("cavity_lifetime_us") / 1e6,
            t2: c("t2_us") / 1e6,
            t2_star: c("t2_star_us") / 1e6,
            pure_dephasing: c("pure_dephasing_khz") * 1e3,
        }
    }

    pub fn measured_g0(&self) -> AngularRate {
        AngularRate::two_pi_times(self.number("cavity", "g0_measured_mhz") * 1e6)
    }

    pub fn field_tesla(&self) -> f64 {
        self.number("field", "b_field_mt") / 1e3
    }

    pub fn moment_orientation(&self) -> MomentOrientation {
        self.text("field", "moment_orientation").parse().expect("validated choice")
    }

    pub fn ground_moment(&self) -> ElectronicMoment {
        ElectronicMoment {
            orientation: self.moment_orientation(),
            ..ElectronicMoment::new(OpticalLevel::Ground, self.number("material", "g_ground"))
        }
    }

    pub fn excited_moment(&self) -> ElectronicMoment {
        ElectronicMoment {
            orientation: self.moment_orientation(),
            ..ElectronicMoment::new(OpticalLevel::Excited, self.number("material", "g_excited"))
        }
    }

    pub fn yttrium_site(&self) -> SpinBathSite {
        SpinBathSite {
            distance: self.number("spinbath", "yttrium_distance_angstrom") / 1e10,
            angle: self.number("spinbath", "yttrium_angle_deg").to_radians(),
            ..SpinBathSite::yttrium()
        }
    }

    pub fn vanadium_site(&self) -> SpinBathSite {
        SpinBathSite {
            distance: self.number("spinbath", "vanadium_distance_angstrom") / 1e10,
            angle: self.number("spinbath", "vanadium_angle_deg").to_radians(),
            ..SpinBathSite::vanadium()
        }
    }

    pub fn flipflop(&self) -> FlipFlopParams {
        let m = self.material();
        FlipFlopParams {
            gamma0: self.number("spinbath", "gamma0_khz") * 1e3,
            dopant_density: self.number("spinbath", "dopant_density_per_m3"),
            spin_flip_rate: 1.0 / (self.number("spinbath", "spin_lifetime_ms") / 1e3),
            temperature: self.number("field", "temperature_k"),
            field: self.field_tesla(),
            g_ground: m.g_ground,
            g_excited: m.g_excited,
        }
    }

    pub fn detection_chain(&self) -> DetectionChain {
        DetectionChain::new(self.stages.clone(), self.number("detection", "dark_count_rate_hz"))
    }

    /// Pulse period from the repetition rate (s).
    pub fn pulse_period(&self) -> f64 {
        1.0 / (self.number("detection", "repetition_rate_khz") * 1e3)
    }

    /// Emitter with η set to the product of the detection stages.
    pub fn emitter_scheme(&self) -> EmitterLevelScheme {
        let d = |k| self.number("detection", k);
        EmitterLevelScheme {
            p_exc: d("p_exc"),
            eta: self.stages.iter().map(|(_, v)| v).product(),
            p_shelve: d("p_shelve"),
            shelf_rate: d("shelf_rate_hz"),
            cavity_lifetime: self.number("cavity", "cavity_lifetime_us") / 1e6,
        }
    }

    pub fn background(&self) -> BackgroundModel {
        BackgroundModel {
            mean_per_pulse: self.number("detection", "background_per_pulse"),
            dark_count_rate: self.number("detection", "dark_count_rate_hz"),
        }
    }

    pub fn g2_options(&self) -> G2Options {
        G2Options {
            max_lag: self.integer("simulation", "g2_max_lag"),
            norm_window: (self.integer("simulation", "g2_window_start"), self.integer("simulation", "g2_window_end")),
            ..G2Options::default()
        }
    }

    pub fn sfs_density(&self) -> PowerLawDensity {
        PowerLawDensity {
            amplitude: self.number("material", "sfs_amplitude_per_ghz"),
            exponent: self.number("material", "sfs_exponent"),
            unit: 1e9,
        }
    }

    pub fn mode_model(&self) -> ModeModel {
        let m = self.material();
        ModeModel {
            wavelength_eff: m.wavelength / m.refractive_index,
            waist: self.number("cavity", "mode_waist_nm") / 1e9,
            half_width: self.number("cavity", "mode_half_width_nm") / 1e9,
            length: self.number("cavity", "mode_length_um") / 1e6,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SHIPPED: &str = include_str!("../config/default.ini");

    #[test]
    fn shipped_config_equals_builtin_defaults() {
        let doc = ConfigDocument::parse_str(SHIPPED).unwrap();
        assert_eq!(doc, ConfigDocument::default());
        for sec in SECTIONS {
            assert!(SHIPPED.contains(&format!("[{sec}]")));
        }
        assert_eq!(doc.stages().len(), 5);
    }

    #[test]
    fn negative_q_names_the_key() {
        let err = ConfigDocument::parse_str("[cavity]\nq_factor = -1\n").unwrap_err();
        assert!(matches!(&err, ConfigError::InvalidValue { line: 2, column: 12, key, .. } if key == "q_factor"), "{err:?}");
        assert!(err.to_string().contains("q_factor"));
    }

    #[test]
    fn error_kinds_are_distinct() {
        let e = ConfigDocument::parse_str("[cavity]\n\nbogus = 1\n").unwrap_err();
        assert!(matches!(e, ConfigError::UnknownKey { line: 3, column: 1, .. }));
        let e = ConfigDocument::parse_str("[material]\nwavelength_nm = 880 um\n").unwrap_err();
        assert!(matches!(e, ConfigError::UnitMismatch { line: 2, .. }), "{e:?}");
        let e = ConfigDocument::parse_str("[material]\n  wavelength_nm = far\n").unwrap_err();
        assert!(matches!(e, ConfigError::NotNumeric { line: 2, column: 19, .. }), "{e:?}");
        let e = ConfigDocument::parse_str("[optics]\n").unwrap_err();
        assert!(matches!(e, ConfigError::UnknownSection { line: 1, .. }));
        let e = ConfigDocument::parse_str("[field]\nb_field_mt = 1\nb_field_mt = 2\n").unwrap_err();
        assert!(matches!(e, ConfigError::DuplicateKey { line: 3, .. }));
        let e = parse_config(Path::new("/nonexistent/rexsim.ini")).unwrap_err();
        assert!(matches!(e, crate::Error::Config(ConfigError::Io { .. })));
    }

    #[test]
    fn units_in_values_are_accepted_when_they_match() {
        let doc = ConfigDocument::parse_str("[material]\nwavelength_nm = 880nm\n[field]\nb_field_mt = 390 mT\n").unwrap();
        assert_eq!(doc.number("material", "wavelength_nm"), 880.0);
        assert_eq!(doc.field_tesla(), 0.39);
        assert!(ConfigDocument::parse_str("[material]\nrefractive_index = 2.1 nm\n").is_err());
    }

    #[test]
    fn stages_replace_the_default_chain() {
        let doc = ConfigDocument::parse_str("[detection]\nstage_a = 0.5\nstage_b = 0.2\n").unwrap();
        assert_eq!(doc.stages(), &[("a".to_string(), 0.5), ("b".to_string(), 0.2)]);
        assert!(ConfigDocument::parse_str("[detection]\nstage_a = 1.5\n").is_err());
    }

    #[test]
    fn builders_reproduce_library_defaults() {
        let doc = ConfigDocument::default();
        assert_eq!(doc.material(), MaterialSpec::nd_yvo4());
        assert_eq!(doc.detection_chain(), DetectionChain::nd_yvo4_setup());
        assert_eq!(doc.flipflop(), FlipFlopParams::nd_yvo4());
        assert!((doc.cavity_device().unwrap().kappa.0 - CavityDevice::nd_yvo4_nanobeam().kappa.0).abs() < 1e-3);
    }

    proptest! {
        #[test]
        fn serialize_parse_round_trip(
            q in 1.0..1e7f64,
            v in 1e-4..10.0f64,
            b in 0.0..2000.0f64,
            seed in 0u64..u64::MAX,
            stages in prop::collection::vec(0.01..1.0f64, 0..4),
            gaussian in any::<bool>(),
        ) {
            let mut text = format!(
                "[cavity]\nq_factor = {q:?}\nmode_volume_um3 = {v:?}\n[field]\nb_field_mt = {b:?}\n[simulation]\nseed = {seed}\nramsey_envelope = {}\n[detection]\n",
                if gaussian { "gaussian" } else { "exponential" }
            );
            for (i, s) in stages.iter().enumerate() {
                text.push_str(&format!("stage_s{i} = {s:?}\n"));
            }
            let doc = ConfigDocument::parse_str(&text).unwrap();
            let again = ConfigDocument::parse_str(&doc.serialize()).unwrap();
            prop_assert_eq!(&doc, &again);
            prop_assert_eq!(doc.serialize(), again.serialize());
        }
    }
}
