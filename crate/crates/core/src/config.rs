//! Run configuration files.
//!
//! INI-style sections with `key = value` lines; `#` starts a comment. Every
//! physical value carries a unit suffix:
//!
//! ```text
//! [species]
//! name = Rb87
//! scattering_length = 5.0 nm
//!
//! [trap]
//! omega_r = 2.7 kHz      # ordinary frequency, stored as 2π × 2700 rad/s
//! omega_x = 0.83 Hz
//! atom_number = 1e4
//!
//! [surface]
//! lambda_c = 9.75 um
//! amplitudes = 1 um
//! z_cm = 3 um
//! ```
//!
//! Frequencies in the file are ordinary frequencies. Keys that hold angular
//! frequencies are multiplied by 2π; keys that hold energies accept Hz
//! (`E = 2πħf`) or J. Unknown keys are rejected and every missing required key
//! is reported in one error.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::physics::{species_lookup, wavenumber, AtomSpecies, SpeciesOverrides, AMU, HBAR};
use crate::quasi1d::{TrapConfig, DEFAULT_DENSITY_POINTS};
use crate::surface::{Fundamental, Material, SurfaceConfig};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfigIssue {
    pub line: Option<usize>,
    pub message: String,
}

/// One or more problems found in a configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfigError {
    pub source: Option<String>,
    pub issues: Vec<ConfigIssue>,
}

impl ConfigError {
    pub fn single(message: impl Into<String>) -> Self {
        Self {
            source: None,
            issues: vec![ConfigIssue {
                line: None,
                message: message.into(),
            }],
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let src = self.source.as_deref().unwrap_or("configuration");
        if self.issues.len() == 1 {
            let i = &self.issues[0];
            return match i.line {
                Some(l) => write!(f, "{src}:{l}: {}", i.message),
                None => write!(f, "{src}: {}", i.message),
            };
        }
        write!(f, "{src}: {} problems", self.issues.len())?;
        for i in &self.issues {
            match i.line {
                Some(l) => write!(f, "\n  line {l}: {}", i.message)?,
                None => write!(f, "\n  {}", i.message)?,
            }
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Quantity {
    Length,
    /// Ordinary frequency in the file, angular internally.
    AngularFrequency,
    /// Hz (as 2πħf) or J.
    Energy,
    Temperature,
    Time,
    Mass,
    Volume,
    Wavenumber,
    Dimensionless,
    Count,
    Text,
    Flag,
}

impl Quantity {
    fn describe(self) -> &'static str {
        match self {
            Quantity::Length => "a length (m, mm, um, nm)",
            Quantity::AngularFrequency => "a frequency (Hz, kHz, MHz, mHz, rad/s)",
            Quantity::Energy => "an energy (J, or Hz/kHz/mHz as 2 pi hbar f)",
            Quantity::Temperature => "a temperature (K, mK, uK, nK)",
            Quantity::Time => "a time (s, ms, us)",
            Quantity::Mass => "a mass (kg, u)",
            Quantity::Volume => "a volume (m^3, A^3)",
            Quantity::Wavenumber => "a wavenumber (rad/m, rad/um)",
            Quantity::Dimensionless => "a plain number",
            Quantity::Count => "a non-negative integer",
            Quantity::Text => "a word",
            Quantity::Flag => "true or false",
        }
    }
}

fn unit_family(unit: &str) -> Option<(&'static str, f64)> {
    let hz = 2.0 * PI;
    Some(match unit {
        "m" => ("length", 1.0),
        "cm" => ("length", 1e-2),
        "mm" => ("length", 1e-3),
        "um" | "μm" | "µm" => ("length", 1e-6),
        "nm" => ("length", 1e-9),
        "Hz" => ("frequency", hz),
        "mHz" => ("frequency", hz * 1e-3),
        "kHz" => ("frequency", hz * 1e3),
        "MHz" => ("frequency", hz * 1e6),
        "rad/s" => ("angular", 1.0),
        "J" => ("energy", 1.0),
        "K" => ("temperature", 1.0),
        "mK" => ("temperature", 1e-3),
        "uK" | "μK" | "µK" => ("temperature", 1e-6),
        "nK" => ("temperature", 1e-9),
        "s" => ("time", 1.0),
        "ms" => ("time", 1e-3),
        "us" | "μs" | "µs" => ("time", 1e-6),
        "kg" => ("mass", 1.0),
        "u" | "amu" => ("mass", AMU),
        "m^3" | "m3" => ("volume", 1.0),
        "A^3" | "Å^3" => ("volume", 1e-30),
        "rad/m" | "1/m" => ("wavenumber", 1.0),
        "rad/um" | "1/um" => ("wavenumber", 1e6),
        _ => return None,
    })
}

/// Convert `number unit` to SI for the given quantity.
fn convert(q: Quantity, value: f64, unit: Option<&str>) -> std::result::Result<f64, String> {
    let Some(unit) = unit else {
        return match q {
            Quantity::Dimensionless | Quantity::Count => Ok(value),
            _ => Err(format!("missing unit: expected {}", q.describe())),
        };
    };
    let Some((family, factor)) = unit_family(unit) else {
        return Err(format!("unknown unit '{unit}': expected {}", q.describe()));
    };
    let ok = match q {
        Quantity::Length => family == "length",
        Quantity::AngularFrequency => family == "frequency" || family == "angular",
        Quantity::Energy => family == "frequency" || family == "energy",
        Quantity::Temperature => family == "temperature",
        Quantity::Time => family == "time",
        Quantity::Mass => family == "mass",
        Quantity::Volume => family == "volume",
        Quantity::Wavenumber => family == "wavenumber",
        _ => false,
    };
    if !ok {
        return Err(format!("expected {}, got '{unit}' (a {family})", q.describe()));
    }
    Ok(match (q, family) {
        (Quantity::Energy, "frequency") => value * factor * HBAR,
        _ => value * factor,
    })
}

struct KeySpec {
    name: &'static str,
    quantity: Quantity,
    required: bool,
    list: bool,
}

const fn key(name: &'static str, quantity: Quantity, required: bool) -> KeySpec {
    KeySpec { name, quantity, required, list: false }
}

const fn list(name: &'static str, quantity: Quantity, required: bool) -> KeySpec {
    KeySpec { name, quantity, required, list: true }
}

const SPECIES_KEYS: &[KeySpec] = &[
    key("name", Quantity::Text, true),
    key("mass", Quantity::Mass, false),
    key("scattering_length", Quantity::Length, false),
    key("polarizability", Quantity::Volume, false),
    key("transition_wavelength", Quantity::Length, false),
];

const TRAP_KEYS: &[KeySpec] = &[
    key("omega_r", Quantity::AngularFrequency, true),
    key("omega_x", Quantity::AngularFrequency, true),
    key("atom_number", Quantity::Dimensionless, true),
    key("normal_offset", Quantity::Energy, false),
    key("T_bec", Quantity::Temperature, false),
];

const SURFACE_KEYS: &[KeySpec] = &[
    key("lambda_c", Quantity::Length, true),
    list("amplitudes", Quantity::Length, true),
    key("lambda_c2", Quantity::Length, false),
    list("amplitudes2", Quantity::Length, false),
    key("z_cm", Quantity::Length, true),
    key("material", Quantity::Text, false),
    key("eta_F", Quantity::Dimensionless, false),
    key("response_file", Quantity::Text, false),
    key("T_env", Quantity::Temperature, false),
];

const BRAGG_KEYS: &[KeySpec] = &[
    key("harmonic", Quantity::Count, false),
    key("q", Quantity::Wavenumber, false),
    key("omega", Quantity::AngularFrequency, false),
    key("V_B", Quantity::Dimensionless, false),
    key("tau", Quantity::Time, false),
    key("tau_over_hbar_e_b", Quantity::Dimensionless, false),
    key("omega_min", Quantity::AngularFrequency, false),
    key("omega_max", Quantity::AngularFrequency, false),
    key("omega_points", Quantity::Count, false),
    key("sweep_points", Quantity::Count, false),
    key("time_points", Quantity::Count, false),
    key("closure", Quantity::Flag, false),
    key("displacement", Quantity::Length, false),
];

const NUMERICS_KEYS: &[KeySpec] = &[
    key("density_points", Quantity::Count, false),
    key("bdg_cutoff", Quantity::Count, false),
    key("bdg_q_points", Quantity::Count, false),
    key("branch_points", Quantity::Count, false),
];

/// `[bragg]` settings. Unset fields get defaults derived from the condensate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BraggConfig {
    /// Probe at `q = harmonic · k_c / 2` unless `q` is set.
    pub harmonic: usize,
    pub q: Option<f64>,
    /// Two-photon detuning for the time series, rad/s.
    pub omega: Option<f64>,
    pub v_b: f64,
    pub tau: Option<f64>,
    /// Pulse length in units of `ħ / E_B(q)` when `tau` is unset.
    pub tau_over_hbar_e_b: f64,
    pub omega_min: Option<f64>,
    pub omega_max: Option<f64>,
    pub omega_points: usize,
    pub sweep_points: usize,
    pub time_points: usize,
    pub closure: bool,
    /// Initial centre-of-mass offset, m.
    pub displacement: f64,
}

impl Default for BraggConfig {
    fn default() -> Self {
        Self {
            harmonic: 1,
            q: None,
            omega: None,
            v_b: 1.0,
            tau: None,
            tau_over_hbar_e_b: 100.0,
            omega_min: None,
            omega_max: None,
            omega_points: 4001,
            sweep_points: 201,
            time_points: 401,
            closure: false,
            displacement: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Numerics {
    pub density_points: usize,
    pub bdg_cutoff: usize,
    pub bdg_q_points: usize,
    pub branch_points: usize,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            density_points: DEFAULT_DENSITY_POINTS,
            bdg_cutoff: 16,
            bdg_q_points: 33,
            branch_points: 65,
        }
    }
}

pub const DEFAULT_T_ENV: f64 = 300.0;
pub const DEFAULT_T_BEC: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub species: AtomSpecies,
    pub trap: TrapConfig,
    /// K
    pub t_bec: f64,
    pub surface: SurfaceConfig,
    /// K
    pub t_env: f64,
    pub bragg: BraggConfig,
    pub numerics: Numerics,
}

#[derive(Debug, Clone)]
enum Raw {
    Number(Vec<f64>, Option<String>),
    Word(String),
}

#[derive(Debug, Clone)]
struct Entry {
    line: usize,
    raw: Raw,
}

type Section = BTreeMap<String, Entry>;

fn split_value(text: &str) -> Raw {
    let numbers = |s: &str| -> Option<Vec<f64>> { s.split(',').map(|p| p.trim().parse::<f64>().ok()).collect() };
    if let Some(v) = numbers(text) {
        return Raw::Number(v, None);
    }
    if let Some((nums, unit)) = text.rsplit_once(char::is_whitespace) {
        if let Some(v) = numbers(nums) {
            return Raw::Number(v, Some(unit.trim().to_string()));
        }
    }
    Raw::Word(text.to_string())
}

fn lex(text: &str, issues: &mut Vec<ConfigIssue>) -> BTreeMap<String, (usize, Section)> {
    let mut sections: BTreeMap<String, (usize, Section)> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (i, raw_line) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let Some(name) = name.strip_suffix(']') else {
                issues.push(ConfigIssue { line: Some(line), message: format!("malformed section header '{content}'") });
                continue;
            };
            let name = name.trim().to_string();
            if sections.contains_key(&name) {
                issues.push(ConfigIssue { line: Some(line), message: format!("section [{name}] repeated") });
            }
            sections.entry(name.clone()).or_insert((line, Section::new()));
            current = Some(name);
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            issues.push(ConfigIssue { line: Some(line), message: format!("expected 'key = value', got '{content}'") });
            continue;
        };
        let (k, v) = (k.trim(), v.trim());
        let Some(section) = current.as_ref() else {
            issues.push(ConfigIssue { line: Some(line), message: format!("key '{k}' outside any section") });
            continue;
        };
        if v.is_empty() {
            issues.push(ConfigIssue { line: Some(line), message: format!("key '{k}' has no value") });
            continue;
        }
        let entries = &mut sections.get_mut(section).expect("section exists").1;
        if entries.contains_key(k) {
            issues.push(ConfigIssue { line: Some(line), message: format!("[{section}] key '{k}' repeated") });
            continue;
        }
        entries.insert(k.to_string(), Entry { line, raw: split_value(v) });
    }
    sections
}

#[derive(Debug, Clone)]
enum Value {
    Numbers(Vec<f64>),
    Word(String),
    Flag(bool),
}

/// Typed values of one section, keyed by name.
struct Typed {
    values: BTreeMap<&'static str, (usize, Value)>,
}

impl Typed {
    fn num(&self, k: &str) -> Option<f64> {
        match self.values.get(k) {
            Some((_, Value::Numbers(v))) => v.first().copied(),
            _ => None,
        }
    }
    fn nums(&self, k: &str) -> Option<Vec<f64>> {
        match self.values.get(k) {
            Some((_, Value::Numbers(v))) => Some(v.clone()),
            _ => None,
        }
    }
    fn word(&self, k: &str) -> Option<&str> {
        match self.values.get(k) {
            Some((_, Value::Word(w))) => Some(w),
            _ => None,
        }
    }
    fn flag(&self, k: &str) -> Option<bool> {
        match self.values.get(k) {
            Some((_, Value::Flag(b))) => Some(*b),
            _ => None,
        }
    }
    fn count(&self, k: &str) -> Option<usize> {
        self.num(k).map(|v| v as usize)
    }
    fn line(&self, k: &str) -> Option<usize> {
        self.values.get(k).map(|(l, _)| *l)
    }
}

fn type_section(
    name: &str,
    header_line: Option<usize>,
    section: Option<&Section>,
    spec: &[KeySpec],
    issues: &mut Vec<ConfigIssue>,
) -> Typed {
    let mut values = BTreeMap::new();
    let empty = Section::new();
    let section = section.unwrap_or(&empty);
    for (k, entry) in section {
        let Some(ks) = spec.iter().find(|s| s.name == k) else {
            let known: Vec<&str> = spec.iter().map(|s| s.name).collect();
            issues.push(ConfigIssue {
                line: Some(entry.line),
                message: format!("[{name}] unknown key '{k}' (known: {})", known.join(", ")),
            });
            continue;
        };
        let bad = |msg: String| ConfigIssue { line: Some(entry.line), message: format!("[{name}] {k}: {msg}") };
        let value = match (&entry.raw, ks.quantity) {
            (Raw::Word(w), Quantity::Text) => Value::Word(w.clone()),
            (Raw::Word(w), Quantity::Flag) => match w.as_str() {
                "true" | "yes" | "on" => Value::Flag(true),
                "false" | "no" | "off" => Value::Flag(false),
                _ => {
                    issues.push(bad(format!("expected true or false, got '{w}'")));
                    continue;
                }
            },
            (Raw::Number(v, unit), Quantity::Text) if unit.is_none() && v.len() == 1 => Value::Word(format!("{}", v[0])),
            (Raw::Word(w), q) => {
                issues.push(bad(format!("expected {}, got '{w}'", q.describe())));
                continue;
            }
            (Raw::Number(..), Quantity::Text | Quantity::Flag) => {
                issues.push(bad(format!("expected {}", ks.quantity.describe())));
                continue;
            }
            (Raw::Number(v, unit), q) => {
                if v.len() > 1 && !ks.list {
                    issues.push(bad("expected a single value, got a list".into()));
                    continue;
                }
                let mut out = Vec::with_capacity(v.len());
                let mut failed = false;
                for &x in v {
                    if !x.is_finite() {
                        issues.push(bad(format!("value {x} is not finite")));
                        failed = true;
                        break;
                    }
                    if q == Quantity::Count && (x < 0.0 || x.fract() != 0.0) {
                        issues.push(bad(format!("expected {}, got {x}", q.describe())));
                        failed = true;
                        break;
                    }
                    match convert(q, x, unit.as_deref()) {
                        Ok(si) => out.push(si),
                        Err(m) => {
                            issues.push(bad(m));
                            failed = true;
                            break;
                        }
                    }
                }
                if failed {
                    continue;
                }
                Value::Numbers(out)
            }
        };
        values.insert(ks.name, (entry.line, value));
    }
    let missing: Vec<&str> = spec.iter().filter(|s| s.required && !values.contains_key(s.name)).map(|s| s.name).collect();
    if !missing.is_empty() && section.is_empty() && header_line.is_none() {
        issues.push(ConfigIssue {
            line: None,
            message: format!("missing section [{name}] (required keys: {})", missing.join(", ")),
        });
    } else {
        for m in missing {
            issues.push(ConfigIssue { line: header_line, message: format!("[{name}] missing required key '{m}'") });
        }
    }
    Typed { values }
}

/// Read and validate a configuration file.
pub fn parse_config(path: &Path) -> std::result::Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        source: Some(path.display().to_string()),
        issues: vec![ConfigIssue { line: None, message: format!("cannot read: {e}") }],
    })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_config_str(&text, &base).map_err(|mut e| {
        e.source = Some(path.display().to_string());
        e
    })
}

/// Parse configuration text; relative file references resolve against `base_dir`.
pub fn parse_config_str(text: &str, base_dir: &Path) -> std::result::Result<RunConfig, ConfigError> {
    let mut issues = Vec::new();
    let sections = lex(text, &mut issues);
    for name in sections.keys() {
        let known = ["species", "trap", "surface", "bragg", "numerics"];
        if !known.contains(&name.as_str()) && !name.starts_with("species.") {
            issues.push(ConfigIssue {
                line: sections[name].0.into(),
                message: format!("unknown section [{name}]"),
            });
        }
    }
    let get = |n: &str| sections.get(n).map(|(l, s)| (Some(*l), Some(s))).unwrap_or((None, None));

    let (l, s) = get("species");
    let species_t = type_section("species", l, s, SPECIES_KEYS, &mut issues);
    let (l, s) = get("trap");
    let trap_t = type_section("trap", l, s, TRAP_KEYS, &mut issues);
    let (l, s) = get("surface");
    let surface_t = type_section("surface", l, s, SURFACE_KEYS, &mut issues);
    let (l, s) = get("bragg");
    let bragg_t = type_section("bragg", l.or(Some(0)), s, BRAGG_KEYS, &mut issues);
    let (l, s) = get("numerics");
    let numerics_t = type_section("numerics", l.or(Some(0)), s, NUMERICS_KEYS, &mut issues);

    let registry: Vec<(String, Typed)> = sections
        .iter()
        .filter_map(|(n, (l, s))| {
            n.strip_prefix("species.")
                .map(|sp| (sp.to_string(), type_section(n, Some(*l), Some(s), &SPECIES_KEYS[1..], &mut issues)))
        })
        .collect();

    if !issues.is_empty() {
        return Err(ConfigError { source: None, issues });
    }

    let species = build_species(&species_t, &registry, &mut issues);
    let trap = TrapConfig {
        omega_r: trap_t.num("omega_r").unwrap_or_default(),
        omega_x: trap_t.num("omega_x").unwrap_or_default(),
        atom_number: trap_t.num("atom_number").unwrap_or_default(),
        normal_offset: trap_t.num("normal_offset").unwrap_or(0.0),
    };
    for (k, v) in [("omega_r", trap.omega_r), ("omega_x", trap.omega_x)] {
        if v <= 0.0 {
            issues.push(ConfigIssue { line: trap_t.line(k), message: format!("[trap] {k} must be positive") });
        }
    }
    if trap.atom_number < 1.0 {
        issues.push(ConfigIssue { line: trap_t.line("atom_number"), message: "[trap] atom_number must be >= 1".into() });
    }
    let t_bec = trap_t.num("T_bec").unwrap_or(DEFAULT_T_BEC);
    if t_bec <= 0.0 {
        issues.push(ConfigIssue { line: trap_t.line("T_bec"), message: "[trap] T_bec must be positive".into() });
    }

    let surface = build_surface(&surface_t, base_dir, &mut issues);
    let t_env = surface_t.num("T_env").unwrap_or(DEFAULT_T_ENV);
    if t_env <= 0.0 {
        issues.push(ConfigIssue { line: surface_t.line("T_env"), message: "[surface] T_env must be positive".into() });
    }

    let d = BraggConfig::default();
    let bragg = BraggConfig {
        harmonic: bragg_t.count("harmonic").unwrap_or(d.harmonic),
        q: bragg_t.num("q"),
        omega: bragg_t.num("omega"),
        v_b: bragg_t.num("V_B").unwrap_or(d.v_b),
        tau: bragg_t.num("tau"),
        tau_over_hbar_e_b: bragg_t.num("tau_over_hbar_e_b").unwrap_or(d.tau_over_hbar_e_b),
        omega_min: bragg_t.num("omega_min"),
        omega_max: bragg_t.num("omega_max"),
        omega_points: bragg_t.count("omega_points").unwrap_or(d.omega_points),
        sweep_points: bragg_t.count("sweep_points").unwrap_or(d.sweep_points),
        time_points: bragg_t.count("time_points").unwrap_or(d.time_points),
        closure: bragg_t.flag("closure").unwrap_or(d.closure),
        displacement: bragg_t.num("displacement").unwrap_or(d.displacement),
    };
    let positive = [
        ("harmonic", bragg.harmonic as f64),
        ("tau", bragg.tau.unwrap_or(1.0)),
        ("tau_over_hbar_e_b", bragg.tau_over_hbar_e_b),
        ("q", bragg.q.unwrap_or(1.0)),
    ];
    for (k, v) in positive {
        if v <= 0.0 {
            issues.push(ConfigIssue { line: bragg_t.line(k), message: format!("[bragg] {k} must be positive") });
        }
    }
    for (k, v, min) in [
        ("omega_points", bragg.omega_points, 16),
        ("sweep_points", bragg.sweep_points, 2),
        ("time_points", bragg.time_points, 2),
    ] {
        if v < min {
            issues.push(ConfigIssue { line: bragg_t.line(k), message: format!("[bragg] {k} must be >= {min}") });
        }
    }
    if let (Some(a), Some(b)) = (bragg.omega_min, bragg.omega_max) {
        if a >= b {
            issues.push(ConfigIssue { line: bragg_t.line("omega_max"), message: "[bragg] omega_max must exceed omega_min".into() });
        }
    }

    let dn = Numerics::default();
    let numerics = Numerics {
        density_points: numerics_t.count("density_points").unwrap_or(dn.density_points),
        bdg_cutoff: numerics_t.count("bdg_cutoff").unwrap_or(dn.bdg_cutoff),
        bdg_q_points: numerics_t.count("bdg_q_points").unwrap_or(dn.bdg_q_points),
        branch_points: numerics_t.count("branch_points").unwrap_or(dn.branch_points),
    };
    for (k, v, min) in [
        ("density_points", numerics.density_points, 2),
        ("bdg_cutoff", numerics.bdg_cutoff, crate::bdg::MIN_CUTOFF),
        ("bdg_q_points", numerics.bdg_q_points, 1),
        ("branch_points", numerics.branch_points, 1),
    ] {
        if v < min {
            issues.push(ConfigIssue { line: numerics_t.line(k), message: format!("[numerics] {k} must be >= {min}") });
        }
    }

    match (species, issues.is_empty()) {
        (Some(species), true) => Ok(RunConfig { species, trap, t_bec, surface, t_env, bragg, numerics }),
        _ => Err(ConfigError { source: None, issues }),
    }
}

fn overrides_from(t: &Typed) -> SpeciesOverrides {
    SpeciesOverrides {
        mass: t.num("mass"),
        scattering_length: t.num("scattering_length"),
        polarizability_over_eps0: t.num("polarizability"),
        transition_wavelength: t.num("transition_wavelength"),
    }
}

fn build_species(t: &Typed, registry: &[(String, Typed)], issues: &mut Vec<ConfigIssue>) -> Option<AtomSpecies> {
    let name = t.word("name")?;
    let mut ov = SpeciesOverrides::default();
    if let Some((_, reg)) = registry.iter().find(|(n, _)| n == name) {
        ov = overrides_from(reg);
    }
    let local = overrides_from(t);
    ov.mass = local.mass.or(ov.mass);
    ov.scattering_length = local.scattering_length.or(ov.scattering_length);
    ov.polarizability_over_eps0 = local.polarizability_over_eps0.or(ov.polarizability_over_eps0);
    ov.transition_wavelength = local.transition_wavelength.or(ov.transition_wavelength);
    match species_lookup(name, &ov) {
        Ok(s) => Some(s),
        Err(e) => {
            issues.push(ConfigIssue { line: t.line("name"), message: format!("[species] {e}") });
            None
        }
    }
}

fn build_surface(t: &Typed, base_dir: &Path, issues: &mut Vec<ConfigIssue>) -> SurfaceConfig {
    let mut fundamentals = Vec::new();
    for (lk, ak) in [("lambda_c", "amplitudes"), ("lambda_c2", "amplitudes2")] {
        match (t.num(lk), t.nums(ak)) {
            (Some(l), Some(h)) => {
                if l <= 0.0 {
                    issues.push(ConfigIssue { line: t.line(lk), message: format!("[surface] {lk} must be positive") });
                } else if h.iter().any(|v| *v < 0.0) {
                    issues.push(ConfigIssue { line: t.line(ak), message: format!("[surface] {ak} must be >= 0") });
                } else {
                    fundamentals.push(Fundamental { k_c: wavenumber(l), amplitudes: h });
                }
            }
            (None, None) => {}
            (Some(_), None) => issues.push(ConfigIssue { line: t.line(lk), message: format!("[surface] {lk} needs {ak}") }),
            (None, Some(_)) => issues.push(ConfigIssue { line: t.line(ak), message: format!("[surface] {ak} needs {lk}") }),
        }
    }
    let z_cm = t.num("z_cm").unwrap_or_default();
    if z_cm <= 0.0 {
        issues.push(ConfigIssue { line: t.line("z_cm"), message: "[surface] z_cm must be positive".into() });
    }
    let eta = t.num("eta_F");
    if let Some(e) = eta {
        if !(0.0..=1.0).contains(&e) {
            issues.push(ConfigIssue {
                line: t.line("eta_F"),
                message: format!("[surface] eta_F = {e} out of range [0, 1]"),
            });
        }
    }
    let material_name = t.word("material").unwrap_or(if eta.is_some() { "scalar_eta" } else { "perfect" });
    let material = match material_name {
        "perfect" => {
            if eta.is_some() {
                issues.push(ConfigIssue { line: t.line("eta_F"), message: "[surface] eta_F given with material = perfect".into() });
            }
            Material::Perfect
        }
        "scalar_eta" => match eta {
            Some(eta_f) => Material::ScalarEta { eta_f },
            None => {
                issues.push(ConfigIssue { line: t.line("material"), message: "[surface] material = scalar_eta needs eta_F".into() });
                Material::Perfect
            }
        },
        "tabulated" => match t.word("response_file") {
            Some(f) => {
                let p = PathBuf::from(f);
                Material::Tabulated { path: if p.is_absolute() { p } else { base_dir.join(p) } }
            }
            None => {
                issues.push(ConfigIssue { line: t.line("material"), message: "[surface] material = tabulated needs response_file".into() });
                Material::Perfect
            }
        },
        other => {
            issues.push(ConfigIssue {
                line: t.line("material"),
                message: format!("[surface] unknown material '{other}' (perfect, scalar_eta, tabulated)"),
            });
            Material::Perfect
        }
    };
    SurfaceConfig { fundamentals, z_cm, material }
}
