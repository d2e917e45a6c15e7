//! Physical constants, the atom-species registry and unit helpers.
//!
//! Everything internal is SI in `f64`. Human-facing output reports energies as
//! ordinary frequencies `E / (2πħ)` in Hz and lengths in μm.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

/// CODATA 2018 exact or recommended values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constants {
    /// Reduced Planck constant, J·s.
    pub hbar: f64,
    /// Speed of light in vacuum, m/s.
    pub c: f64,
    /// Boltzmann constant, J/K.
    pub k_b: f64,
    /// Vacuum permittivity, F/m.
    pub eps0: f64,
}

pub const HBAR: f64 = 1.054_571_817e-34;
pub const C_LIGHT: f64 = 299_792_458.0;
pub const K_B: f64 = 1.380_649e-23;
pub const EPS0: f64 = 8.854_187_812_8e-12;
/// Unified atomic mass unit, kg.
pub const AMU: f64 = 1.660_539_066_60e-27;

pub const CONSTANTS: Constants = Constants {
    hbar: HBAR,
    c: C_LIGHT,
    k_b: K_B,
    eps0: EPS0,
};

/// The condensed atom.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomSpecies {
    pub name: String,
    /// kg
    pub mass: f64,
    /// s-wave scattering length, m
    pub scattering_length: f64,
    /// Static polarizability divided by ε₀, m³.
    pub polarizability_over_eps0: f64,
    /// Dominant transition wavelength λ_A, m. Only used for the retarded-regime check.
    pub transition_wavelength: f64,
}

/// Partial species record from a run configuration. Present fields win over
/// the registry entry.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SpeciesOverrides {
    pub mass: Option<f64>,
    pub scattering_length: Option<f64>,
    pub polarizability_over_eps0: Option<f64>,
    pub transition_wavelength: Option<f64>,
}

impl SpeciesOverrides {
    fn is_complete(&self) -> bool {
        self.mass.is_some()
            && self.scattering_length.is_some()
            && self.polarizability_over_eps0.is_some()
            && self.transition_wavelength.is_some()
    }
}

/// Default scattering length for Rb-87.
///
/// Chosen so the derived quasi-1D chemical potential of the 10⁴-atom benchmark
/// trap lands at ≈ 2πħ × 495 Hz. The common literature value (≈ 5.3 nm) gives
/// ≈ 2πħ × 515 Hz.
pub const RB87_DEFAULT_SCATTERING_LENGTH: f64 = 5.0e-9;

/// Rb-87: mass 86.909180531 u (AME2016), α(0)/ε₀ = 47.3 × 10⁻³⁰ m³,
/// D2 line 780.241 nm.
pub fn rb87() -> AtomSpecies {
    AtomSpecies {
        name: "Rb87".to_string(),
        mass: 86.909_180_531 * AMU,
        scattering_length: RB87_DEFAULT_SCATTERING_LENGTH,
        polarizability_over_eps0: 47.3e-30,
        transition_wavelength: 780.241e-9,
    }
}

pub fn registered_species() -> &'static [&'static str] {
    &["Rb87"]
}

/// Resolve a species by name, applying config overrides.
///
/// An unregistered name is accepted only when the overrides carry the full
/// parameter set.
pub fn species_lookup(name: &str, overrides: &SpeciesOverrides) -> Result<AtomSpecies> {
    let base = match name.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
        "rb87" | "87rb" => Some(rb87()),
        _ => None,
    };
    let mut species = match base {
        Some(s) => s,
        None if overrides.is_complete() => AtomSpecies {
            name: name.to_string(),
            mass: 0.0,
            scattering_length: 0.0,
            polarizability_over_eps0: 0.0,
            transition_wavelength: 0.0,
        },
        None => {
            return Err(Error::Config(crate::config::ConfigError::single(format!(
                "unknown species '{name}': registered species are {:?}; \
                 otherwise supply mass, scattering_length, polarizability and transition_wavelength",
                registered_species()
            ))))
        }
    };
    if let Some(v) = overrides.mass {
        species.mass = v;
    }
    if let Some(v) = overrides.scattering_length {
        species.scattering_length = v;
    }
    if let Some(v) = overrides.polarizability_over_eps0 {
        species.polarizability_over_eps0 = v;
    }
    if let Some(v) = overrides.transition_wavelength {
        species.transition_wavelength = v;
    }
    species.validate()?;
    Ok(species)
}

impl AtomSpecies {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("mass", self.mass),
            ("scattering_length", self.scattering_length),
            ("polarizability", self.polarizability_over_eps0),
            ("transition_wavelength", self.transition_wavelength),
        ];
        for (key, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!(
                    "species {}: {key} must be finite and positive, got {v}",
                    self.name
                )));
            }
        }
        Ok(())
    }

    /// 3D contact coupling g = 4πħ²a/m, J·m³.
    pub fn contact_coupling(&self) -> f64 {
        4.0 * PI * HBAR * HBAR * self.scattering_length / self.mass
    }

    /// Free kinetic energy T_q = ħ²q²/2m.
    pub fn kinetic_energy(&self, q: f64) -> f64 {
        HBAR * HBAR * q * q / (2.0 * self.mass)
    }
}

/// E / (2πħ).
pub fn energy_to_frequency(energy: f64) -> f64 {
    energy / (2.0 * PI * HBAR)
}

/// 2πħ f.
pub fn frequency_to_energy(frequency: f64) -> f64 {
    2.0 * PI * HBAR * frequency
}

pub fn m_to_um(length: f64) -> f64 {
    length * 1e6
}

pub fn um_to_m(length: f64) -> f64 {
    length * 1e-6
}

/// Corrugation period to wavenumber, 2π/λ.
pub fn wavenumber(period: f64) -> f64 {
    2.0 * PI / period
}
