//! Quasi-1D reduction of a cigar-shaped condensate.
//!
//! With the radial motion frozen in the harmonic ground state the axial
//! wavefunction obeys a 1D GPE with `g_eff = g / 2πσ²`, `σ² = ħ/mω_r`. The axial
//! Thomas-Fermi profile fixes the effective chemical potential μ̃ and the
//! half-length `l/2` through `N = ∫ n₁ dx` and `μ̃ = ½ m ω_x² (l/2)²`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::physics::{AtomSpecies, C_LIGHT, HBAR, K_B};
use crate::surface::{lateral_eval, LateralPotential, SurfaceConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrapConfig {
    /// Radial trap frequency, rad/s.
    pub omega_r: f64,
    /// Axial trap frequency, rad/s.
    pub omega_x: f64,
    pub atom_number: f64,
    /// Normal Casimir-Polder energy U_N(z_cm), J. Enters only through μ̃.
    pub normal_offset: f64,
}

impl TrapConfig {
    pub fn validate(&self) -> Result<Vec<String>> {
        if !(self.omega_r > 0.0 && self.omega_x > 0.0) {
            return Err(Error::domain("trap frequencies must be positive"));
        }
        if !(self.atom_number >= 1.0 && self.atom_number.is_finite()) {
            return Err(Error::domain(format!("atom number must be >= 1, got {}", self.atom_number)));
        }
        if !self.normal_offset.is_finite() {
            return Err(Error::domain("normal offset must be finite"));
        }
        let mut warnings = Vec::new();
        let ratio = self.omega_r / self.omega_x;
        if ratio <= 10.0 {
            warnings.push(format!("omega_r/omega_x = {ratio:.2} is not elongated (<= 10)"));
        }
        Ok(warnings)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeFlags {
    /// μ − ħω_r well below 8ħω_r.
    pub radial_frozen: bool,
    pub elongated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quasi1DParams {
    /// Radial oscillator length, m.
    pub sigma: f64,
    /// Effective 1D coupling, J·m.
    pub g_eff: f64,
    /// μ̃ = μ − ħω_r − U_N, J.
    pub mu_tilde: f64,
    /// Full chemical potential μ, J.
    pub mu: f64,
    /// Thomas-Fermi axial half-length l/2, m.
    pub half_length: f64,
    /// k_μ̃ = (2mμ̃/ħ²)^{1/2}, rad/m.
    pub k_mu: f64,
    pub atom_number: f64,
    pub omega_r: f64,
    pub omega_x: f64,
    pub mass: f64,
    pub flags: RegimeFlags,
}

/// Ratio standing in for "≪" in regime checks.
pub const MUCH_LESS: f64 = 0.1;

fn radial_width(species: &AtomSpecies, omega_r: f64) -> f64 {
    (HBAR / (species.mass * omega_r)).sqrt()
}

fn effective_coupling(species: &AtomSpecies, sigma: f64) -> f64 {
    species.contact_coupling() / (2.0 * PI * sigma * sigma)
}

fn assemble(trap: &TrapConfig, species: &AtomSpecies, mu_tilde: f64, half_length: f64, n: f64) -> Result<Quasi1DParams> {
    if !(mu_tilde > 0.0 && mu_tilde.is_finite()) {
        return Err(Error::domain(format!(
            "effective chemical potential must be positive, got {mu_tilde:e} J"
        )));
    }
    let sigma = radial_width(species, trap.omega_r);
    let mu = mu_tilde + HBAR * trap.omega_r + trap.normal_offset;
    Ok(Quasi1DParams {
        sigma,
        g_eff: effective_coupling(species, sigma),
        mu_tilde,
        mu,
        half_length,
        k_mu: (2.0 * species.mass * mu_tilde).sqrt() / HBAR,
        atom_number: n,
        omega_r: trap.omega_r,
        omega_x: trap.omega_x,
        mass: species.mass,
        flags: RegimeFlags {
            radial_frozen: (mu - HBAR * trap.omega_r) < MUCH_LESS * 8.0 * HBAR * trap.omega_r,
            elongated: trap.omega_r / trap.omega_x > 10.0,
        },
    })
}

/// Derive the quasi-1D parameters from the atom number.
///
/// `l/2 = (3 g_eff N / 2mω_x²)^{1/3}`, `μ̃ = ½ m ω_x² (l/2)²`.
pub fn derive_quasi1d(trap: &TrapConfig, species: &AtomSpecies) -> Result<Quasi1DParams> {
    trap.validate()?;
    species.validate()?;
    let sigma = radial_width(species, trap.omega_r);
    let g_eff = effective_coupling(species, sigma);
    let m = species.mass;
    let half_length = (3.0 * g_eff * trap.atom_number / (2.0 * m * trap.omega_x.powi(2))).cbrt();
    let mu_tilde = 0.5 * m * trap.omega_x.powi(2) * half_length * half_length;
    assemble(trap, species, mu_tilde, half_length, trap.atom_number)
}

/// Derive the parameters at fixed full chemical potential μ instead of fixed N.
///
/// μ̃ = μ − ħω_r − U_N, and N follows from the integral constraint
/// `N = 4 μ̃ (l/2) / 3 g_eff`.
pub fn derive_at_chemical_potential(trap: &TrapConfig, species: &AtomSpecies, mu: f64) -> Result<Quasi1DParams> {
    species.validate()?;
    let mu_tilde = mu - HBAR * trap.omega_r - trap.normal_offset;
    if !(mu_tilde > 0.0) {
        return Err(Error::domain(format!(
            "mu = {mu:e} J leaves a non-positive effective chemical potential"
        )));
    }
    let half_length = (2.0 * mu_tilde / (species.mass * trap.omega_x.powi(2))).sqrt();
    let sigma = radial_width(species, trap.omega_r);
    let n = 4.0 * mu_tilde * half_length / (3.0 * effective_coupling(species, sigma));
    assemble(trap, species, mu_tilde, half_length, n)
}

impl Quasi1DParams {
    /// Peak axial density μ̃/g_eff, 1/m.
    pub fn peak_density(&self) -> f64 {
        self.mu_tilde / self.g_eff
    }

    /// Unmodulated parabolic profile used by the LDA.
    pub fn parabolic_density(&self, x: f64) -> f64 {
        let s = x / self.half_length;
        (self.peak_density() * (1.0 - s * s)).max(0.0)
    }

    pub fn sound_speed(&self) -> f64 {
        (self.mu_tilde / self.mass).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityProfile {
    /// m
    pub x: Vec<f64>,
    /// 1/m
    pub n1: Vec<f64>,
}

impl DensityProfile {
    /// Trapezoid integral of n₁.
    pub fn integral(&self) -> f64 {
        self.x
            .windows(2)
            .zip(self.n1.windows(2))
            .map(|(x, n)| 0.5 * (x[1] - x[0]) * (n[0] + n[1]))
            .sum()
    }
}

pub const DEFAULT_DENSITY_POINTS: usize = 1 << 14;

/// Axial TF density `n₁(x) = max(0, (μ̃[1 − (2x/l)²] − U_L(x)) / g_eff)`
/// sampled uniformly on `[−l/2, l/2]`.
///
/// With `include_lateral = false` the lateral potential is ignored and the
/// plain parabola is returned; that is the profile the LDA uses.
pub fn tf_axial_density(
    params: &Quasi1DParams,
    pot: &LateralPotential,
    points: usize,
    include_lateral: bool,
) -> Result<DensityProfile> {
    if points < 2 {
        return Err(Error::domain("density grid needs at least 2 points"));
    }
    if include_lateral {
        let bound = pot.abs_sum();
        if bound >= params.mu_tilde {
            let (k, n, u) = pot
                .series
                .iter()
                .flat_map(|s| s.coefficients.iter().enumerate().map(move |(i, u)| (s.k_c, i + 1, *u)))
                .max_by(|a, b| a.2.abs().total_cmp(&b.2.abs()))
                .unwrap_or((0.0, 0, 0.0));
            return Err(Error::domain(format!(
                "Thomas-Fermi positivity violated: Σ|U_n| = {bound:e} J >= μ̃ = {:e} J \
                 (largest term U_{n} = {u:e} J at k_c = {k:e} rad/m)",
                params.mu_tilde
            )));
        }
    }
    let half = params.half_length;
    let step = 2.0 * half / (points - 1) as f64;
    let x: Vec<f64> = (0..points).map(|i| -half + i as f64 * step).collect();
    let n1 = x
        .iter()
        .map(|&xi| {
            let s = xi / half;
            let local = params.mu_tilde * (1.0 - s * s);
            let u = if include_lateral { lateral_eval(pot, xi) } else { 0.0 };
            ((local - u) / params.g_eff).max(0.0)
        })
        .collect();
    Ok(DensityProfile { x, n1 })
}

/// `E_B(q) = √(T_q (T_q + 2μ̃))`.
pub fn bogoliubov_dispersion(q: f64, mu_tilde: f64, species: &AtomSpecies) -> f64 {
    let t = species.kinetic_energy(q);
    (t * (t + 2.0 * mu_tilde)).sqrt()
}

/// Phase-coherence decay length `L_φ = 2 n₁ ħ² / (k_B T m)`.
pub fn coherence_length(n1_peak: f64, t_bec: f64, species: &AtomSpecies) -> Result<f64> {
    if !(t_bec > 0.0) {
        return Err(Error::domain(format!("BEC temperature must be positive, got {t_bec}")));
    }
    if !(n1_peak > 0.0) {
        return Err(Error::domain(format!("peak density must be positive, got {n1_peak}")));
    }
    Ok(2.0 * n1_peak * HBAR * HBAR / (K_B * t_bec * species.mass))
}

/// Photon thermal wavelength `ħc / k_B T`.
pub fn thermal_wavelength(t_env: f64) -> f64 {
    HBAR * C_LIGHT / (K_B * t_env)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Warn,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeCheck {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub status: CheckStatus,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct RegimeReport {
    pub checks: Vec<RegimeCheck>,
    pub warnings: Vec<String>,
}

impl RegimeReport {
    fn push_below(&mut self, name: &str, value: f64, threshold: f64, note: &str) {
        self.checks.push(RegimeCheck {
            name: name.into(),
            value,
            threshold,
            status: if value < threshold { CheckStatus::Pass } else { CheckStatus::Warn },
            note: note.into(),
        });
    }

    fn push_above(&mut self, name: &str, value: f64, threshold: f64, note: &str) {
        self.checks.push(RegimeCheck {
            name: name.into(),
            value,
            threshold,
            status: if value > threshold { CheckStatus::Pass } else { CheckStatus::Warn },
            note: note.into(),
        });
    }

    pub fn get(&self, name: &str) -> Option<&RegimeCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status == CheckStatus::Pass)
    }
}

/// Validity diagnostics. Never fails on physics: every check is pass or warn.
pub fn regime_check(
    params: &Quasi1DParams,
    surface: &SurfaceConfig,
    pot: &LateralPotential,
    species: &AtomSpecies,
    t_env: f64,
    t_bec: f64,
) -> RegimeReport {
    let mut report = RegimeReport::default();
    let hw_r = HBAR * params.omega_r;
    report.push_below(
        "radial_frozen",
        (params.mu - hw_r) / (8.0 * hw_r),
        MUCH_LESS,
        "(mu - hbar omega_r) / (8 hbar omega_r)",
    );
    report.push_above("elongated_trap", params.omega_r / params.omega_x, 10.0, "omega_r / omega_x");
    for (i, s) in pot.series.iter().enumerate() {
        let tag = if pot.series.len() > 1 { format!("_{}", i + 1) } else { String::new() };
        let q1 = 0.5 * s.k_c;
        let t_q1 = species.kinetic_energy(q1);
        report.push_below(
            &format!("axial_tf{tag}"),
            t_q1 / params.mu_tilde,
            MUCH_LESS,
            "T(k_c/2) / mu_tilde",
        );
        report.push_above(
            &format!("large_separation{tag}"),
            s.k_c * surface.z_cm,
            1.0,
            "k_c z_cm (first harmonic dominates)",
        );
        let e_b = bogoliubov_dispersion(q1, params.mu_tilde, species);
        report.push_below(
            &format!("perturbative{tag}"),
            s.harmonic(1).abs() / e_b,
            MUCH_LESS,
            "|U_1| / E_B(k_c/2)",
        );
        report.push_above(
            &format!("axial_length_vs_period{tag}"),
            2.0 * params.half_length * s.k_c / (2.0 * PI),
            10.0,
            "l / lambda_c",
        );
    }
    report.push_below(
        "tf_stability",
        pot.abs_sum() / params.mu_tilde,
        1.0,
        "sum |U_n| / mu_tilde",
    );
    report.push_above(
        "retarded_limit",
        surface.z_cm / species.transition_wavelength,
        3.0,
        "z_cm / lambda_A",
    );
    if t_env > 0.0 {
        report.push_below(
            "thermal_casimir",
            surface.z_cm / thermal_wavelength(t_env),
            MUCH_LESS,
            "z_cm / lambda_T, lambda_T = hbar c / k_B T_env",
        );
    }
    if let Ok(l_phi) = coherence_length(params.peak_density(), t_bec, species) {
        report.push_above(
            "global_coherence",
            l_phi / (2.0 * params.half_length),
            1.0,
            "L_phi / l",
        );
        let longest_period = surface
            .fundamentals
            .iter()
            .map(|f| f.period())
            .fold(0.0, f64::max);
        report.push_above(
            "coherence_vs_corrugation",
            l_phi / longest_period,
            1.0,
            "L_phi / lambda_c",
        );
    }
    if let Ok(w) = surface.validate() {
        report.warnings.extend(w);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::{energy_to_frequency, frequency_to_energy, rb87, wavenumber};
    use crate::surface::Fundamental;
    use crate::surface::Material;
    use approx::assert_relative_eq;

    fn benchmark_trap() -> TrapConfig {
        TrapConfig {
            omega_r: 2.0 * PI * 2700.0,
            omega_x: 2.0 * PI * 0.83,
            atom_number: 1e4,
            normal_offset: 0.0,
        }
    }

    #[test]
    fn benchmark_parameters() {
        let p = derive_quasi1d(&benchmark_trap(), &rb87()).unwrap();
        assert!((p.sigma - 0.2e-6).abs() / 0.2e-6 < 0.05, "{}", p.sigma);
        let mu_hz = energy_to_frequency(p.mu_tilde);
        assert!((mu_hz - 493.0).abs() / 493.0 < 0.05, "{mu_hz}");
        assert!((p.half_length - 408e-6).abs() / 408e-6 < 0.05);
        assert!(p.flags.radial_frozen && p.flags.elongated);
        assert_relative_eq!(
            HBAR * HBAR * p.k_mu * p.k_mu / (2.0 * p.mass),
            p.mu_tilde,
            max_relative = 1e-12
        );
    }

    #[test]
    fn self_consistency() {
        let p = derive_quasi1d(&benchmark_trap(), &rb87()).unwrap();
        let mu = 0.5 * p.mass * p.omega_x.powi(2) * p.half_length.powi(2);
        assert_relative_eq!(mu, p.mu_tilde, max_relative = 1e-10);
    }

    #[test]
    fn eight_times_atoms_quadruples_mu() {
        let rb = rb87();
        let p1 = derive_quasi1d(&benchmark_trap(), &rb).unwrap();
        let mut trap = benchmark_trap();
        trap.atom_number *= 8.0;
        let p8 = derive_quasi1d(&trap, &rb).unwrap();
        assert_relative_eq!(p8.mu_tilde, 4.0 * p1.mu_tilde, max_relative = 1e-12);
    }

    #[test]
    fn scaling_laws() {
        let rb = rb87();
        let base = derive_quasi1d(&benchmark_trap(), &rb).unwrap();
        // a·N doubled: mu ∝ (aN)^{2/3}, l ∝ (aN)^{1/3}
        let mut rb2 = rb.clone();
        rb2.scattering_length *= 2.0;
        let p = derive_quasi1d(&benchmark_trap(), &rb2).unwrap();
        assert_relative_eq!(p.mu_tilde / base.mu_tilde, 2f64.powf(2.0 / 3.0), max_relative = 1e-12);
        assert_relative_eq!(p.half_length / base.half_length, 2f64.powf(1.0 / 3.0), max_relative = 1e-12);
        // omega_x tripled: mu ∝ ω^{2/3}, l ∝ ω^{-2/3}
        let mut trap = benchmark_trap();
        trap.omega_x *= 3.0;
        let p = derive_quasi1d(&trap, &rb).unwrap();
        assert_relative_eq!(p.mu_tilde / base.mu_tilde, 3f64.powf(2.0 / 3.0), max_relative = 1e-12);
        assert_relative_eq!(p.half_length / base.half_length, 3f64.powf(-2.0 / 3.0), max_relative = 1e-12);
    }

    #[test]
    fn normal_offset_at_fixed_mu() {
        let rb = rb87();
        let base = derive_quasi1d(&benchmark_trap(), &rb).unwrap();
        let mut trap = benchmark_trap();
        let shift = frequency_to_energy(10.0);
        trap.normal_offset = shift;
        let p = derive_at_chemical_potential(&trap, &rb, base.mu).unwrap();
        assert_relative_eq!(p.mu_tilde, base.mu_tilde - shift, max_relative = 1e-12);
        // the integral constraint reproduces the atom number implied by the new μ̃
        let prof = tf_axial_density(&p, &LateralPotential::zero(1.0), 20001, false).unwrap();
        assert!((prof.integral() - p.atom_number).abs() / p.atom_number < 1e-3);
        // fixed N: μ̃ is untouched, μ absorbs the offset
        let q = derive_quasi1d(&trap, &rb).unwrap();
        assert_relative_eq!(q.mu_tilde, base.mu_tilde, max_relative = 1e-14);
        assert_relative_eq!(q.mu - base.mu, shift, max_relative = 1e-9);
    }

    #[test]
    fn non_positive_mu_tilde_is_domain_error() {
        let mut trap = benchmark_trap();
        trap.normal_offset = frequency_to_energy(1e6);
        let err = derive_at_chemical_potential(&trap, &rb87(), HBAR * trap.omega_r).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn density_peak_and_normalization() {
        let p = derive_quasi1d(&benchmark_trap(), &rb87()).unwrap();
        let prof = tf_axial_density(&p, &LateralPotential::zero(1.0), DEFAULT_DENSITY_POINTS + 1, false).unwrap();
        let mid = DEFAULT_DENSITY_POINTS / 2;
        assert_relative_eq!(prof.n1[mid], p.mu_tilde / p.g_eff, max_relative = 1e-12);
        assert!((prof.integral() - 1e4).abs() / 1e4 < 1e-3);
    }

    #[test]
    fn density_anticorrelates_with_lateral_potential() {
        let p = derive_quasi1d(&benchmark_trap(), &rb87()).unwrap();
        let kc = wavenumber(9.75e-6);
        let pot = LateralPotential::single(kc, 0.05 * p.mu_tilde);
        let n = |x: f64| {
            let s = x / p.half_length;
            (p.mu_tilde * (1.0 - s * s) - lateral_eval(&pot, x)) / p.g_eff
        };
        // U maximal at x = 0, minimal at x = λ/2
        let lam = 9.75e-6;
        let prof = tf_axial_density(&p, &pot, 1 << 16, true).unwrap();
        assert!(prof.n1.iter().all(|v| *v >= 0.0));
        assert!(n(0.0) < n(lam / 2.0));
        assert!(n(lam) < n(lam / 2.0));
    }

    #[test]
    fn positivity_violation_names_amplitude() {
        let p = derive_quasi1d(&benchmark_trap(), &rb87()).unwrap();
        let pot = LateralPotential::single(1e6, -2.0 * p.mu_tilde);
        let err = tf_axial_density(&p, &pot, 100, true).unwrap_err().to_string();
        assert!(err.contains("U_1"), "{err}");
    }

    #[test]
    fn dispersion_values_and_limits() {
        let rb = rb87();
        let mu = frequency_to_energy(493.0);
        let q1 = 0.5 * wavenumber(9.75e-6);
        assert!((energy_to_frequency(rb.kinetic_energy(q1)) - 6.05).abs() / 6.05 < 0.01);
        let e = energy_to_frequency(bogoliubov_dispersion(q1, mu, &rb));
        assert!((e - 77.0).abs() / 77.0 < 0.02, "{e}");
        assert_eq!(bogoliubov_dispersion(0.0, mu, &rb), 0.0);
        assert_eq!(bogoliubov_dispersion(q1, 0.0, &rb), rb.kinetic_energy(q1));
        let k_mu = (2.0 * rb.mass * mu).sqrt() / HBAR;
        let q = k_mu / 100.0;
        let cs = (mu / rb.mass).sqrt();
        assert!((bogoliubov_dispersion(q, mu, &rb) / (HBAR * q) - cs).abs() / cs < 1e-3);
    }

    #[test]
    fn dispersion_identity_on_grid() {
        let rb = rb87();
        let mu = frequency_to_energy(493.0);
        for i in 1..200 {
            let q = i as f64 * 1e4;
            let e = bogoliubov_dispersion(q, mu, &rb);
            let t = rb.kinetic_energy(q);
            let resid = e * e - t * t - 2.0 * t * mu;
            assert!(resid.abs() <= 1e-10 * e * e);
        }
    }

    #[test]
    fn coherence_length_scaling_and_errors() {
        let rb = rb87();
        let a = coherence_length(1e7, 1e-9, &rb).unwrap();
        let b = coherence_length(1e7, 2e-9, &rb).unwrap();
        assert_relative_eq!(a, 2.0 * b, max_relative = 1e-15);
        assert!(coherence_length(1e7, 0.0, &rb).is_err());
        assert!(coherence_length(0.0, 1e-9, &rb).is_err());
    }

    #[test]
    fn benchmark_regime_report() {
        let rb = rb87();
        let p = derive_quasi1d(&benchmark_trap(), &rb).unwrap();
        let kc = wavenumber(9.75e-6);
        let surface = SurfaceConfig {
            fundamentals: vec![Fundamental::single(kc, 1e-6)],
            z_cm: 3e-6,
            material: Material::Perfect,
        };
        let pot = LateralPotential::single(kc, frequency_to_energy(-0.22));
        let r = regime_check(&p, &surface, &pot, &rb, 300.0, 1e-9);
        let radial = r.get("radial_frozen").unwrap();
        assert!((radial.value - 0.023).abs() < 0.002);
        assert_eq!(radial.status, CheckStatus::Pass);
        let tf = r.get("axial_tf").unwrap();
        assert!((tf.value - 0.012).abs() < 0.001);
        assert_eq!(tf.status, CheckStatus::Pass);
        let thermal = r.get("thermal_casimir").unwrap();
        assert_eq!(thermal.status, CheckStatus::Warn);
        assert!((thermal_wavelength(300.0) - 7.6e-6).abs() < 0.1e-6);
        assert_eq!(r.get("coherence_vs_corrugation").unwrap().status, CheckStatus::Pass);
        assert!(!r.warnings.is_empty());
    }

    #[test]
    fn nanokelvin_coherence_spans_the_cloud() {
        let rb = rb87();
        let p = derive_quasi1d(&benchmark_trap(), &rb).unwrap();
        let l = 2.0 * p.half_length;
        // solve L_phi = l for T; must land in the 0.1–10 nK window
        let t_star = 2.0 * p.peak_density() * HBAR * HBAR / (K_B * rb.mass * l);
        assert!(t_star > 1e-10 && t_star < 1e-8, "{t_star}");
        assert!(coherence_length(p.peak_density(), 0.5 * t_star, &rb).unwrap() >= l);
    }
}
