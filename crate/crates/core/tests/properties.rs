use std::f64::consts::PI;

use proptest::prelude::*;

use casimir_bec::bdg::{bdg_gaps, solve_bdg, BdgProblem};
use casimir_bec::bragg::{
    bragg_signal, dsf_lda, invert_gap, BraggOptions, BraggPulse, DsfPair, OmegaGrid,
};
use casimir_bec::physics::{energy_to_frequency, frequency_to_energy, m_to_um, rb87, um_to_m, wavenumber, HBAR};
use casimir_bec::quasi1d::{bogoliubov_dispersion, derive_quasi1d, tf_axial_density, Quasi1DParams, TrapConfig};
use casimir_bec::spectrum::{band_branches, coupled_mode_gaps, perturbative_gaps};
use casimir_bec::surface::{
    lateral_coefficients, response_perfect, Fundamental, LateralPotential, Material, PotentialSeries,
    ResponseFunction, SurfaceConfig,
};

fn trap(n: f64, omega_x_hz: f64) -> TrapConfig {
    TrapConfig {
        omega_r: 2.0 * PI * 2700.0,
        omega_x: 2.0 * PI * omega_x_hz,
        atom_number: n,
        normal_offset: 0.0,
    }
}

fn bench() -> Quasi1DParams {
    derive_quasi1d(&trap(1e4, 0.83), &rb87()).unwrap()
}

fn kc() -> f64 {
    wavenumber(9.75e-6)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

proptest! {
    #[test]
    fn unit_round_trips(f in -1e6f64..1e6, x in 1e-9f64..1e-2) {
        prop_assert!((energy_to_frequency(frequency_to_energy(f)) - f).abs() <= 1e-12 * f.abs());
        prop_assert!(rel(um_to_m(m_to_um(x)), x) <= 1e-12);
    }

    #[test]
    fn response_is_negative_and_decreasing_in_k(z_um in 0.5f64..20.0, k1 in 0.0f64..5e6, dk in 1.0f64..5e6) {
        let rb = rb87();
        let z = um_to_m(z_um);
        let a = response_perfect(k1, z, &rb).unwrap();
        let b = response_perfect(k1 + dk, z, &rb).unwrap();
        prop_assert!(a < 0.0 && b < 0.0);
        prop_assert!(b.abs() < a.abs());
    }

    #[test]
    fn coefficients_linear_in_amplitude_and_eta(h in 1e-9f64..1e-6, s in 0.1f64..3.0, eta in 0.0f64..=1.0) {
        let rb = rb87();
        let resp = ResponseFunction::perfect(&rb);
        let surf = |h: f64, material: Material| SurfaceConfig {
            fundamentals: vec![Fundamental { k_c: kc(), amplitudes: vec![h, 0.5 * h] }],
            z_cm: 3e-6,
            material,
        };
        let base = lateral_coefficients(&surf(h, Material::Perfect), &resp).unwrap();
        let scaled = lateral_coefficients(&surf(s * h, Material::Perfect), &resp).unwrap();
        let damped = lateral_coefficients(&surf(h, Material::ScalarEta { eta_f: eta }), &resp).unwrap();
        for n in 1..=2 {
            let u = base.primary().harmonic(n);
            prop_assert!(rel(scaled.primary().harmonic(n), s * u) < 1e-12);
            prop_assert!((damped.primary().harmonic(n) - eta * u).abs() <= 1e-12 * u.abs());
        }
    }

    #[test]
    fn chemical_potential_and_length_are_consistent(n in 1e3f64..1e5, wx in 0.3f64..5.0) {
        let rb = rb87();
        let p = derive_quasi1d(&trap(n, wx), &rb).unwrap();
        let mu = 0.5 * rb.mass * p.omega_x.powi(2) * p.half_length.powi(2);
        prop_assert!(rel(mu, p.mu_tilde) < 1e-10);
    }

    #[test]
    fn bogoliubov_identity(q in 0.0f64..1e7) {
        let rb = rb87();
        let mu = bench().mu_tilde;
        let e = bogoliubov_dispersion(q, mu, &rb);
        let t = rb.kinetic_energy(q);
        prop_assert!((e * e - t * t - 2.0 * t * mu).abs() <= 1e-10 * (e * e).max(f64::MIN_POSITIVE));
    }

    #[test]
    fn gap_ignores_sign_of_coefficient(u_hz in 0.01f64..5.0, n in 1usize..4) {
        let p = bench();
        let rb = rb87();
        let mut coefficients = vec![0.0; n];
        coefficients[n - 1] = frequency_to_energy(u_hz);
        let pos = LateralPotential { series: vec![PotentialSeries { k_c: kc(), coefficients }], normal_offset: 0.0 };
        let neg = pos.scaled(-1.0);
        let a = perturbative_gaps(&p, &pos, &rb).entries[0].gap;
        let b = perturbative_gaps(&p, &neg, &rb).entries[0].gap;
        prop_assert_eq!(a, b);
    }

    #[test]
    fn branches_ordered_and_centred(u_hz in 0.01f64..5.0, frac in -0.25f64..=0.25) {
        let p = bench();
        let rb = rb87();
        let pot = LateralPotential::single(kc(), frequency_to_energy(u_hz));
        let s = band_branches(&p, &pot, &rb, 0, 1, &[frac * kc(), 0.0]).unwrap();
        prop_assert!(s.lower[0] <= s.upper[0]);
        let e_b = bogoliubov_dispersion(0.5 * kc(), p.mu_tilde, &rb);
        let mean = 0.5 * (s.lower[1] + s.upper[1]);
        let r = frequency_to_energy(u_hz) / e_b;
        prop_assert!(rel(mean, e_b) <= r * r);
    }

    #[test]
    fn identical_fundamentals_superpose(u_hz in 0.01f64..2.0, split in 0.0f64..=1.0) {
        let p = bench();
        let rb = rb87();
        let u = frequency_to_energy(u_hz);
        let dual = LateralPotential {
            series: vec![
                PotentialSeries { k_c: kc(), coefficients: vec![split * u] },
                PotentialSeries { k_c: kc(), coefficients: vec![(1.0 - split) * u] },
            ],
            normal_offset: 0.0,
        };
        let r = coupled_mode_gaps(&p, &dual, &rb).unwrap();
        let single = perturbative_gaps(&p, &LateralPotential::single(kc(), u), &rb).entries[0].gap;
        prop_assert!(rel(r.families[0].splitting, single) < 1e-9);
    }

    #[test]
    fn inversion_is_identity(u_hz in 0.001f64..10.0, n in 1usize..4) {
        let p = bench();
        let rb = rb87();
        let mut coefficients = vec![0.0; n];
        coefficients[n - 1] = -frequency_to_energy(u_hz);
        let pot = LateralPotential { series: vec![PotentialSeries { k_c: kc(), coefficients }], normal_offset: 0.0 };
        let e = &perturbative_gaps(&p, &pot, &rb).entries[0];
        let u = invert_gap(e.gap, e.q_n, p.mu_tilde, &rb).unwrap();
        prop_assert!(rel(u, e.u_n.abs()) < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn bdg_spectrum_is_symmetric(u_hz in 0.0f64..20.0, frac in -0.5f64..0.5) {
        let p = bench();
        let rb = rb87();
        let pot = LateralPotential::single(kc(), frequency_to_energy(u_hz));
        let eig = solve_bdg(&BdgProblem::new(p.mu_tilde, &rb, &pot, frac * kc(), 10)).unwrap();
        let n = eig.len();
        let scale = eig[n - 1].abs();
        for i in 0..n {
            prop_assert!((eig[i] + eig[n - 1 - i]).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn bdg_bloch_periodic(u_hz in 0.0f64..20.0, frac in -0.5f64..0.5) {
        let p = bench();
        let rb = rb87();
        let pot = LateralPotential::single(kc(), frequency_to_energy(u_hz));
        let positive = |q: f64| -> Vec<f64> {
            let e = solve_bdg(&BdgProblem::new(p.mu_tilde, &rb, &pot, q, 12)).unwrap();
            e.into_iter().filter(|v| *v > 0.0).collect()
        };
        let a = positive(frac * kc());
        let b = positive(frac * kc() + kc());
        for i in 0..8 {
            prop_assert!(rel(b[i], a[i]) < 1e-8, "band {}: {} vs {}", i, a[i], b[i]);
        }
    }

    #[test]
    fn bdg_gap_scales_linearly(u_hz in 0.05f64..2.0) {
        let p = bench();
        let rb = rb87();
        let pot = LateralPotential::single(kc(), frequency_to_energy(u_hz));
        let e_b = bogoliubov_dispersion(0.5 * kc(), p.mu_tilde, &rb);
        let g1 = bdg_gaps(p.mu_tilde, &rb, &pot, 16).unwrap()[0].gap;
        for s in [0.5, 0.25] {
            let gs = bdg_gaps(p.mu_tilde, &rb, &pot.scaled(s), 16).unwrap()[0].gap;
            let bound = 5.0 * s * frequency_to_energy(u_hz) / e_b;
            prop_assert!(rel(gs / s, g1) <= bound);
        }
    }

    #[test]
    fn lda_markers_split_by_gap(u_hz in 0.01f64..2.0) {
        let p = bench();
        let rb = rb87();
        let q = 0.5 * kc();
        let u = frequency_to_energy(u_hz);
        let grid = OmegaGrid::new(0.0, 1.25 * bogoliubov_dispersion(q, p.mu_tilde, &rb) / HBAR, 801).unwrap();
        let s = dsf_lda(q, grid, &p, u, &rb).unwrap();
        let f = perturbative_gaps(&p, &LateralPotential::single(kc(), u), &rb).entries[0].suppression;
        let sep = s.branches[1].resonance.energy - s.branches[0].resonance.energy;
        prop_assert!(rel(sep, f * u) < 0.01);
    }

    #[test]
    fn signal_scales_with_v_b_squared(v in 0.1f64..10.0, detune in 0.5f64..1.2) {
        let p = bench();
        let rb = rb87();
        let q = 0.5 * kc();
        let u = frequency_to_energy(0.22);
        let e_b = bogoliubov_dispersion(q, p.mu_tilde, &rb);
        let grid = OmegaGrid::new(0.0, 1.25 * e_b / HBAR, 801).unwrap();
        let plus = dsf_lda(q, grid, &p, u, &rb).unwrap();
        let minus = dsf_lda(-q, grid, &p, u, &rb).unwrap();
        let pair = DsfPair::new(Some(&plus), Some(&minus), q).unwrap();
        let pot = LateralPotential::single(kc(), u);
        let opts = BraggOptions { time_points: 41, ..BraggOptions::default() };
        let pulse = BraggPulse { q, omega: detune * e_b / HBAR, v_b: 1.0, tau: 30.0 * HBAR / e_b };
        let one = bragg_signal(&pulse, &pair, &p, &pot, &opts).unwrap();
        let many = bragg_signal(&BraggPulse { v_b: v, ..pulse }, &pair, &p, &pot, &opts).unwrap();
        for (a, b) in one.drive.iter().zip(&many.drive) {
            prop_assert!((b - v * v * a).abs() <= 1e-12 * (v * v * a).abs().max(1e-300));
        }
    }
}

#[test]
fn density_integrates_to_atom_number() {
    let p = bench();
    let d = tf_axial_density(&p, &LateralPotential::zero(kc()), 1 << 14, false).unwrap();
    assert!(rel(d.integral(), p.atom_number) < 1e-3);
}

#[test]
fn derived_scales_follow_power_laws() {
    let rb = rb87();
    let base = derive_quasi1d(&trap(1e4, 0.83), &rb).unwrap();
    for (sn, sw) in [(8.0, 1.0), (1.0, 8.0), (3.0, 0.5)] {
        let p = derive_quasi1d(&trap(1e4 * sn, 0.83 * sw), &rb).unwrap();
        let mu_expect = base.mu_tilde * sn.powf(2.0 / 3.0) * sw.powf(2.0 / 3.0);
        let l_expect = base.half_length * sn.powf(1.0 / 3.0) / sw.powf(2.0 / 3.0);
        assert!(rel(p.mu_tilde, mu_expect) < 1e-10);
        assert!(rel(p.half_length, l_expect) < 1e-10);
    }
}

#[test]
fn second_harmonic_is_weaker_at_benchmark_geometry() {
    let rb = rb87();
    let surf = SurfaceConfig {
        fundamentals: vec![Fundamental { k_c: kc(), amplitudes: vec![1e-6, 1e-6] }],
        z_cm: 3e-6,
        material: Material::Perfect,
    };
    let pot = lateral_coefficients(&surf, &ResponseFunction::perfect(&rb)).unwrap();
    assert!(pot.primary().harmonic(2).abs() < pot.primary().harmonic(1).abs());
}

#[test]
fn bdg_gap_is_cauchy_in_cutoff() {
    let p = bench();
    let rb = rb87();
    let pot = LateralPotential::single(kc(), frequency_to_energy(0.22));
    for m in [16, 24, 32] {
        let a = bdg_gaps(p.mu_tilde, &rb, &pot, m).unwrap()[0].gap;
        let b = bdg_gaps(p.mu_tilde, &rb, &pot, 2 * m).unwrap()[0].gap;
        assert!(rel(b, a) < 1e-3, "M = {m}");
    }
}

#[test]
fn lda_refinement_keeps_samples_and_weight() {
    let p = bench();
    let rb = rb87();
    let q = 0.5 * kc();
    let u = frequency_to_energy(0.22);
    let grid = OmegaGrid::new(0.0, 1.25 * bogoliubov_dispersion(q, p.mu_tilde, &rb) / HBAR, 1001).unwrap();
    let a = dsf_lda(q, grid, &p, u, &rb).unwrap();
    let b = dsf_lda(q, grid.refined(), &p, u, &rb).unwrap();
    let skip: Vec<usize> = a.resonance_bins();
    let skip_fine: Vec<usize> = b.resonance_bins();
    let (sa, sb) = (a.total_samples(), b.total_samples());
    for i in 0..grid.points {
        if skip.contains(&i) || skip_fine.contains(&(2 * i)) || sa[i] == 0.0 {
            continue;
        }
        assert!(rel(sb[2 * i], sa[i]) < 0.01, "bin {i}: {} vs {}", sa[i], sb[2 * i]);
    }
    for (x, y) in a.branches.iter().zip(&b.branches) {
        assert!(rel(y.total_weight(), x.total_weight()) < 0.02);
    }
}

#[test]
fn flat_lda_edge_is_homogeneous_energy() {
    let p = bench();
    let rb = rb87();
    let q = 0.5 * kc();
    let e_b = bogoliubov_dispersion(q, p.mu_tilde, &rb);
    let grid = OmegaGrid::new(0.0, 1.25 * e_b / HBAR, 1001).unwrap();
    let s = dsf_lda(q, grid, &p, 0.0, &rb).unwrap();
    assert_eq!(s.branches.len(), 1);
    assert!(rel(s.branches[0].resonance.energy, e_b) < 0.01);
}
