//! First-order band structure of the condensate in the lateral potential.
//!
//! A cosine component `U_n cos(n k_c x)` couples the Bogoliubov modes at
//! `±n k_c/2`. In the Bogoliubov basis the coupling matrix element between
//! modes `p` and `p'` is `−(U_n/2) (u_p + v_p)(u_p' + v_p')` with
//! `(u_p + v_p)² = T_p/E_p`, so the degenerate pair at the zone edge splits by
//! `ΔE_n = |U_n| F(q_n)`, `F(q) = T_q / E_B(q)`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::physics::{AtomSpecies, HBAR};
use crate::quasi1d::{bogoliubov_dispersion, Quasi1DParams};
use crate::surface::LateralPotential;

/// `F(q) = T_q / E_B(q)`; 0 at q = 0.
pub fn suppression_factor(q: f64, mu_tilde: f64, species: &AtomSpecies) -> f64 {
    if q == 0.0 {
        return 0.0;
    }
    let t = species.kinetic_energy(q);
    t / bogoliubov_dispersion(q, mu_tilde, species)
}

/// `(u_p + v_p)`, the density-coupling amplitude of a Bogoliubov mode.
fn density_amplitude(p: f64, mu_tilde: f64, species: &AtomSpecies) -> f64 {
    suppression_factor(p, mu_tilde, species).sqrt()
}

/// Above this `|U_n| / E_B(q_n)` first-order results get a warning.
pub const PERTURBATIVE_WARN_RATIO: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapEntry {
    /// Index of the corrugation family (0-based).
    pub family: usize,
    /// Harmonic index n ≥ 1.
    pub n: usize,
    /// Zone edge `n k_c / 2`, rad/m.
    pub q_n: f64,
    /// Signed Fourier coefficient, J.
    pub u_n: f64,
    pub suppression: f64,
    /// Unperturbed energy at the zone edge, J.
    pub e_b: f64,
    /// `|U_n| F(q_n)`, J.
    pub gap: f64,
    pub gap_over_e_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    pub mu_tilde: f64,
    pub entries: Vec<GapEntry>,
    pub warnings: Vec<String>,
}

impl GapReport {
    pub fn find(&self, family: usize, n: usize) -> Option<&GapEntry> {
        self.entries.iter().find(|e| e.family == family && e.n == n)
    }
}

/// One gap per nonzero `U_n`, `ΔE_n = |U_n| F(n k_c / 2)`.
pub fn perturbative_gaps(params: &Quasi1DParams, pot: &LateralPotential, species: &AtomSpecies) -> GapReport {
    let mu = params.mu_tilde;
    let mut entries = Vec::new();
    let mut warnings = Vec::new();
    for (family, series) in pot.series.iter().enumerate() {
        for (i, &u) in series.coefficients.iter().enumerate() {
            if u == 0.0 {
                continue;
            }
            let n = i + 1;
            let q_n = 0.5 * n as f64 * series.k_c;
            let f = suppression_factor(q_n, mu, species);
            let e_b = bogoliubov_dispersion(q_n, mu, species);
            let gap = u.abs() * f;
            if u.abs() / e_b > PERTURBATIVE_WARN_RATIO {
                warnings.push(format!(
                    "family {family}, n = {n}: |U_n|/E_B = {:.3} exceeds {PERTURBATIVE_WARN_RATIO}",
                    u.abs() / e_b
                ));
            }
            entries.push(GapEntry {
                family,
                n,
                q_n,
                u_n: u,
                suppression: f,
                e_b,
                gap,
                gap_over_e_b: gap / e_b,
            });
        }
    }
    GapReport {
        mu_tilde: mu,
        entries,
        warnings,
    }
}

/// Branches of one zone-edge neighbourhood.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandSlice {
    pub family: usize,
    pub n: usize,
    pub q_n: f64,
    /// Detuning ε from the zone edge, rad/m. The Bloch momentum is `q_n + ε`.
    pub detuning: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Unperturbed energies of the two coupled modes `E_B(q_n + ε)`, `E_B(−q_n + ε)`.
    pub bare_right: Vec<f64>,
    pub bare_left: Vec<f64>,
}

/// Diagonalize the 2×2 near-degenerate block of modes `q_n + ε` and `−q_n + ε`.
pub fn band_branches(
    params: &Quasi1DParams,
    pot: &LateralPotential,
    species: &AtomSpecies,
    family: usize,
    n: usize,
    detuning: &[f64],
) -> Result<BandSlice> {
    let series = pot
        .series
        .get(family)
        .ok_or_else(|| Error::domain(format!("no corrugation family {family}")))?;
    if n == 0 {
        return Err(Error::domain("harmonic index starts at 1"));
    }
    let q_n = 0.5 * n as f64 * series.k_c;
    let limit = 0.25 * series.k_c;
    if let Some(eps) = detuning.iter().find(|e| e.abs() > limit * (1.0 + 1e-12)) {
        return Err(Error::domain(format!(
            "detuning {eps:e} rad/m outside the zone-edge neighbourhood |ε| <= k_c/4"
        )));
    }
    let u = series.harmonic(n);
    let mu = params.mu_tilde;
    let mut slice = BandSlice {
        family,
        n,
        q_n,
        detuning: detuning.to_vec(),
        lower: Vec::with_capacity(detuning.len()),
        upper: Vec::with_capacity(detuning.len()),
        bare_right: Vec::with_capacity(detuning.len()),
        bare_left: Vec::with_capacity(detuning.len()),
    };
    for &eps in detuning {
        let (pr, pl) = (q_n + eps, -q_n + eps);
        let er = bogoliubov_dispersion(pr, mu, species);
        let el = bogoliubov_dispersion(pl, mu, species);
        let c = -0.5 * u * density_amplitude(pr, mu, species) * density_amplitude(pl, mu, species);
        let mean = 0.5 * (er + el);
        let half = (0.25 * (er - el).powi(2) + c * c).sqrt();
        slice.lower.push(mean - half);
        slice.upper.push(mean + half);
        slice.bare_right.push(er);
        slice.bare_left.push(el);
    }
    Ok(slice)
}

/// Gap in the high-density (radial TF) regime:
/// `ΔE = (3ħω_r / 4μ) (k_c R / 2) |U_n|`, `R = (2μ / mω_r²)^{1/2}`.
///
/// These gaps are too small to resolve by Bragg spectroscopy; low-density
/// condensates are the useful regime.
pub fn gap_high_density(mu: f64, omega_r: f64, k_c: f64, u_n: f64, species: &AtomSpecies) -> (f64, Vec<String>) {
    let mut warnings = Vec::new();
    let ratio = mu / (HBAR * omega_r);
    if ratio < 5.0 {
        warnings.push(format!("mu / hbar omega_r = {ratio:.2} < 5: high-density expansion is marginal"));
    }
    let r = radial_tf_radius(mu, omega_r, species);
    let gap = 3.0 * HBAR * omega_r / (4.0 * mu) * (0.5 * k_c * r) * u_n.abs();
    (gap, warnings)
}

/// Radial Thomas-Fermi radius `R = (2μ / mω_r²)^{1/2}`.
pub fn radial_tf_radius(mu: f64, omega_r: f64, species: &AtomSpecies) -> f64 {
    (2.0 * mu / (species.mass * omega_r * omega_r)).sqrt()
}

/// Low-q multibranch dispersion of the radially TF condensate, m = 0:
/// `E²_n = 2(ħω_r)² n(n+1) + (qR)² (ħω_r/2)²`.
pub fn multibranch_dispersion(n: u32, q: f64, mu: f64, omega_r: f64, species: &AtomSpecies) -> (f64, Vec<String>) {
    let r = radial_tf_radius(mu, omega_r, species);
    let hw = HBAR * omega_r;
    let nn = n as f64;
    let mut warnings = Vec::new();
    if q * r > 1.0 {
        warnings.push(format!("qR = {:.3} > 1: expansion truncated at O((qR)^4)", q * r));
    }
    let e2 = 2.0 * hw * hw * nn * (nn + 1.0) + (q * r).powi(2) * (0.5 * hw).powi(2);
    (e2.sqrt(), warnings)
}

/// `δk_min ≈ k_c U / E⁽⁰⁾`.
pub fn min_resolvable_separation(k_c: f64, u: f64, e0: f64) -> Result<f64> {
    if !(e0 > 0.0) {
        return Err(Error::domain(format!("reference energy must be positive, got {e0:e}")));
    }
    Ok(k_c * u.abs() / e0)
}

/// Separations below this multiple of δk_min count as mixing.
pub const MIXING_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoupledModeFamily {
    pub family: usize,
    pub k_c: f64,
    /// Zone edge `k_c/2`, rad/m.
    pub q0: f64,
    /// Momenta of the near-degenerate state set, rad/m.
    pub states: Vec<f64>,
    /// Sorted eigenvalues of the effective Hamiltonian, J.
    pub eigenvalues: Vec<f64>,
    /// Spacing of the two eigenvalues closest to `E_B(q0)`, J.
    pub splitting: f64,
    /// Independent two-state gap `|U| F(q0)`, J.
    pub independent_gap: f64,
    pub relative_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoupledModeReport {
    pub families: Vec<CoupledModeFamily>,
    /// `|k_c1 − k_c2|`, rad/m.
    pub separation: f64,
    /// Largest per-family `k_c |U| / E_B(k_c/2)`.
    pub delta_k_min: f64,
    /// `separation / delta_k_min < MIXING_FACTOR`.
    pub mixing: bool,
}

/// Spacing of the two values in `levels` nearest to `reference`.
pub fn nearest_pair_spacing(levels: &[f64], reference: f64) -> f64 {
    let mut sorted: Vec<f64> = levels.to_vec();
    sorted.sort_by(|a, b| (a - reference).abs().total_cmp(&(b - reference).abs()));
    match sorted.as_slice() {
        [a, b, ..] => (a - b).abs(),
        _ => 0.0,
    }
}

/// First-order problem for two corrugation families with wavenumbers that may
/// be close enough to mix.
///
/// For family `i` with partner `j`, the zone-edge pair `±k_i/2` is coupled by
/// `U_i`; `U_j` connects `k_i/2` to `−k_i/2 + δ` and `−k_i/2` to `k_i/2 − δ`
/// with `δ = k_i − k_j`, which `U_i` closes onto `k_i/2 + δ` and `−k_i/2 − δ`.
/// The six modes `{±k_i/2, ±k_i/2 ± δ}` with every first-order coupling among
/// them form the effective Hamiltonian. Coincident momenta are merged, so
/// `k_1 = k_2` reduces to the two-state problem with summed coefficients.
pub fn coupled_mode_gaps(params: &Quasi1DParams, pot: &LateralPotential, species: &AtomSpecies) -> Result<CoupledModeReport> {
    if pot.series.len() != 2 {
        return Err(Error::Unsupported(format!(
            "coupled-mode analysis needs exactly two fundamentals, got {}",
            pot.series.len()
        )));
    }
    for (i, s) in pot.series.iter().enumerate() {
        if s.coefficients.iter().skip(1).any(|u| *u != 0.0) {
            return Err(Error::Unsupported(format!(
                "coupled-mode analysis takes a single harmonic per fundamental; family {i} has higher harmonics"
            )));
        }
    }
    let mu = params.mu_tilde;
    let couplings: Vec<(f64, f64)> = pot.series.iter().map(|s| (s.k_c, s.harmonic(1))).collect();
    let mut families = Vec::with_capacity(2);
    let mut delta_k_min: f64 = 0.0;
    for i in 0..2 {
        let (k_i, u_i) = couplings[i];
        let (k_j, _) = couplings[1 - i];
        let q0 = 0.5 * k_i;
        let delta = k_i - k_j;
        let e0 = bogoliubov_dispersion(q0, mu, species);
        delta_k_min = delta_k_min.max(min_resolvable_separation(k_i, u_i, e0)?);

        let tol = 1e-9 * k_i.max(k_j);
        let mut states: Vec<f64> = Vec::with_capacity(6);
        for p in [q0, -q0, -q0 + delta, q0 + delta, q0 - delta, -q0 - delta] {
            if !states.iter().any(|s| (s - p).abs() <= tol) {
                states.push(p);
            }
        }
        let dim = states.len();
        let amp: Vec<f64> = states.iter().map(|&p| density_amplitude(p, mu, species)).collect();
        let h = DMatrix::from_fn(dim, dim, |a, b| {
            if a == b {
                return bogoliubov_dispersion(states[a], mu, species);
            }
            let d = (states[a] - states[b]).abs();
            couplings
                .iter()
                .filter(|(k, _)| (d - k).abs() <= tol)
                .map(|(_, u)| -0.5 * u * amp[a] * amp[b])
                .sum()
        });
        let mut eig: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        let splitting = nearest_pair_spacing(&eig, e0);
        let independent = u_i.abs() * suppression_factor(q0, mu, species);
        let relative_deviation = if independent > 0.0 {
            (splitting - independent) / independent
        } else {
            0.0
        };
        families.push(CoupledModeFamily {
            family: i,
            k_c: k_i,
            q0,
            states,
            eigenvalues: eig,
            splitting,
            independent_gap: independent,
            relative_deviation,
        });
    }
    let separation = (couplings[0].0 - couplings[1].0).abs();
    Ok(CoupledModeReport {
        families,
        separation,
        delta_k_min,
        mixing: separation < MIXING_FACTOR * delta_k_min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::{energy_to_frequency, frequency_to_energy, rb87, wavenumber};
    use crate::quasi1d::{derive_quasi1d, TrapConfig};
    use crate::surface::PotentialSeries;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn bench() -> (Quasi1DParams, AtomSpecies) {
        let rb = rb87();
        let trap = TrapConfig {
            omega_r: 2.0 * PI * 2700.0,
            omega_x: 2.0 * PI * 0.83,
            atom_number: 1e4,
            normal_offset: 0.0,
        };
        (derive_quasi1d(&trap, &rb).unwrap(), rb)
    }

    fn kc() -> f64 {
        wavenumber(9.75e-6)
    }

    #[test]
    fn suppression_factor_limits() {
        let (p, rb) = bench();
        let f = suppression_factor(0.5 * kc(), p.mu_tilde, &rb);
        assert!((f - 0.08).abs() < 0.005, "{f}");
        assert!(suppression_factor(1e3 * p.k_mu, p.mu_tilde, &rb) > 0.999);
        assert_eq!(suppression_factor(0.0, p.mu_tilde, &rb), 0.0);
        for i in 1..100 {
            let f = suppression_factor(i as f64 * 0.1 * p.k_mu, p.mu_tilde, &rb);
            assert!((0.0..1.0).contains(&f));
        }
    }

    #[test]
    fn gap_is_sign_invariant_and_skips_zeros() {
        let (p, rb) = bench();
        let u = frequency_to_energy(0.22);
        let a = perturbative_gaps(&p, &LateralPotential::single(kc(), u), &rb);
        let b = perturbative_gaps(&p, &LateralPotential::single(kc(), -u), &rb);
        assert_eq!(a.entries[0].gap, b.entries[0].gap);
        assert!(perturbative_gaps(&p, &LateralPotential::zero(kc()), &rb).entries.is_empty());
        let hz = energy_to_frequency(a.entries[0].gap);
        assert!((hz - 0.016).abs() / 0.016 < 0.15, "{hz}");
    }

    #[test]
    fn zone_edge_splitting_equals_gap() {
        let (p, rb) = bench();
        let pot = LateralPotential::single(kc(), frequency_to_energy(-0.22));
        let gaps = perturbative_gaps(&p, &pot, &rb);
        let eps: Vec<f64> = (-8..=8).map(|i| i as f64 * kc() / 32.0).collect();
        let s = band_branches(&p, &pot, &rb, 0, 1, &eps).unwrap();
        assert_relative_eq!(s.upper[8] - s.lower[8], gaps.entries[0].gap, max_relative = 1e-9);
        let e_b = gaps.entries[0].e_b;
        let mean = 0.5 * (s.upper[8] + s.lower[8]);
        let ratio = pot.primary().coefficients[0].abs() / e_b;
        assert!((mean - e_b).abs() / e_b <= ratio * ratio);
        assert!(s.lower.iter().zip(&s.upper).all(|(l, u)| l <= u));
    }

    #[test]
    fn flat_potential_restores_crossing() {
        let (p, rb) = bench();
        let pot = LateralPotential::zero(kc());
        let eps = [-kc() / 8.0, 0.0, kc() / 16.0];
        let s = band_branches(&p, &pot, &rb, 0, 1, &eps).unwrap();
        for i in 0..eps.len() {
            let (lo, hi) = if s.bare_left[i] < s.bare_right[i] {
                (s.bare_left[i], s.bare_right[i])
            } else {
                (s.bare_right[i], s.bare_left[i])
            };
            assert_relative_eq!(s.lower[i], lo, max_relative = 1e-14);
            assert_relative_eq!(s.upper[i], hi, max_relative = 1e-14);
        }
        assert!(band_branches(&p, &pot, &rb, 0, 1, &[kc() / 3.0]).is_err());
    }

    #[test]
    fn high_density_gap_substitution() {
        let rb = rb87();
        let omega_r = 2.0 * PI * 2700.0;
        let mu = 100.0 * HBAR * omega_r;
        let r = radial_tf_radius(mu, omega_r, &rb);
        let k_c = 2.0 / r;
        let u = frequency_to_energy(0.22);
        let (gap, w) = gap_high_density(mu, omega_r, k_c, u, &rb);
        assert!(w.is_empty());
        assert_relative_eq!(gap / u, 3.0 / 400.0, max_relative = 1e-12);
        let (gap2, _) = gap_high_density(mu, omega_r, k_c, 2.0 * u, &rb);
        assert_relative_eq!(gap2, 2.0 * gap, max_relative = 1e-15);
        let (_, w) = gap_high_density(2.0 * HBAR * omega_r, omega_r, k_c, u, &rb);
        assert_eq!(w.len(), 1);
    }

    #[test]
    fn multibranch_values() {
        let rb = rb87();
        let omega_r = 2.0 * PI * 2700.0;
        let mu = 20.0 * HBAR * omega_r;
        let (e, _) = multibranch_dispersion(1, 0.0, mu, omega_r, &rb);
        assert_relative_eq!(e, 2.0 * HBAR * omega_r, max_relative = 1e-15);
        assert_eq!(multibranch_dispersion(0, 0.0, mu, omega_r, &rb).0, 0.0);
        let r = radial_tf_radius(mu, omega_r, &rb);
        let q = 0.1 / r;
        let (e0, _) = multibranch_dispersion(0, q, mu, omega_r, &rb);
        let c_case_a = (mu / rb.mass).sqrt();
        assert_relative_eq!(e0 / (HBAR * q) * 2f64.sqrt(), c_case_a, max_relative = 1e-12);
        assert_eq!(multibranch_dispersion(0, 2.0 / r, mu, omega_r, &rb).1.len(), 1);
    }

    #[test]
    fn min_separation() {
        assert_relative_eq!(min_resolvable_separation(1e6, 0.1, 1.0).unwrap(), 1e5);
        assert_eq!(min_resolvable_separation(1e6, 0.0, 1.0).unwrap(), 0.0);
        assert!(min_resolvable_separation(1e6, 0.1, 0.0).is_err());
    }

    fn dual(k1: f64, u1: f64, k2: f64, u2: f64) -> LateralPotential {
        LateralPotential {
            series: vec![
                PotentialSeries { k_c: k1, coefficients: vec![u1] },
                PotentialSeries { k_c: k2, coefficients: vec![u2] },
            ],
            normal_offset: 0.0,
        }
    }

    #[test]
    fn coupled_modes_decouple_when_far_apart() {
        let (p, rb) = bench();
        let u = frequency_to_energy(0.22);
        let r = coupled_mode_gaps(&p, &dual(kc(), u, 3.0 * kc(), u), &rb).unwrap();
        assert!(!r.mixing);
        for f in &r.families {
            assert!(f.relative_deviation.abs() < 0.01, "{f:?}");
            assert_eq!(f.states.len(), 6);
        }
    }

    #[test]
    fn coupled_modes_with_one_empty_family() {
        let (p, rb) = bench();
        let u = frequency_to_energy(0.22);
        let r = coupled_mode_gaps(&p, &dual(kc(), u, 1.01 * kc(), 0.0), &rb).unwrap();
        let f = &r.families[0];
        let single = perturbative_gaps(&p, &LateralPotential::single(kc(), u), &rb);
        assert_relative_eq!(f.splitting, single.entries[0].gap, max_relative = 1e-6);
    }

    #[test]
    fn identical_fundamentals_superpose() {
        let (p, rb) = bench();
        let u = frequency_to_energy(0.22);
        let r = coupled_mode_gaps(&p, &dual(kc(), 0.5 * u, kc(), 0.5 * u), &rb).unwrap();
        let single = perturbative_gaps(&p, &LateralPotential::single(kc(), u), &rb);
        assert_eq!(r.families[0].states.len(), 2);
        assert_relative_eq!(r.families[0].splitting, single.entries[0].gap, max_relative = 1e-9);
    }

    #[test]
    fn coupled_mode_rejects_bad_shapes() {
        let (p, rb) = bench();
        let one = LateralPotential::single(kc(), 1e-34);
        assert!(matches!(coupled_mode_gaps(&p, &one, &rb), Err(Error::Unsupported(_))));
        let mut three = dual(kc(), 1e-34, 2.0 * kc(), 1e-34);
        three.series.push(PotentialSeries { k_c: 5.0 * kc(), coefficients: vec![1e-34] });
        assert!(matches!(coupled_mode_gaps(&p, &three, &rb), Err(Error::Unsupported(_))));
        let mut harmonics = dual(kc(), 1e-34, 2.0 * kc(), 1e-34);
        harmonics.series[0].coefficients.push(1e-35);
        assert!(matches!(coupled_mode_gaps(&p, &harmonics, &rb), Err(Error::Unsupported(_))));
    }

    #[test]
    fn nearest_pair() {
        assert_eq!(nearest_pair_spacing(&[1.0, 2.0, 2.5, 10.0], 2.2), 0.5);
        assert_eq!(nearest_pair_spacing(&[1.0], 2.2), 0.0);
    }
}
