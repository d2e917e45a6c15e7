//! Reproduction of the published benchmark numbers and the internal
//! consistency checks, as a single pass/fail table.

use std::f64::consts::{PI, SQRT_2};
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::json;

use crate::bdg::{bdg_gaps, oracle_tolerance};
use crate::bragg::{
    bragg_signal, bragg_sweep, dsf_homogeneous, dsf_lda, pulse_resolution, BraggOptions, BraggPulse, DsfPair,
    DsfSpectrum, OmegaGrid,
};
use crate::config::{BraggConfig, Numerics, RunConfig, DEFAULT_T_BEC, DEFAULT_T_ENV};
use crate::error::{Error, Result};
use crate::output::{FileEntry, Table};
use crate::physics::{energy_to_frequency, m_to_um, rb87, wavenumber, AtomSpecies, HBAR};
use crate::quasi1d::{bogoliubov_dispersion, Quasi1DParams, TrapConfig};
use crate::scenario::{prepare, write_summary, Setup};
use crate::spectrum::{coupled_mode_gaps, multibranch_dispersion, perturbative_gaps, suppression_factor};
use crate::surface::{Fundamental, LateralPotential, Material, PotentialSeries, SurfaceConfig};

/// Wall-time budget for the full table, s.
pub const WALL_TIME_LIMIT: f64 = 60.0;

/// Plane-wave cutoff for the BdG cross-check of the mixing scenario.
pub const MIXING_BDG_CUTOFF: usize = 192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// `|computed − reference| / |reference| ≤ tolerance`
    Relative,
    /// `|computed − reference| ≤ tolerance`
    Absolute,
    /// `computed ≤ tolerance`
    AtMost,
    /// `computed > tolerance`
    Exceeds,
}

impl Check {
    pub fn name(self) -> &'static str {
        match self {
            Check::Relative => "relative",
            Check::Absolute => "absolute",
            Check::AtMost => "at_most",
            Check::Exceeds => "exceeds",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationRow {
    pub criterion: u32,
    pub quantity: String,
    pub unit: &'static str,
    pub reference: f64,
    pub computed: f64,
    pub deviation: f64,
    pub tolerance: f64,
    pub check: Check,
    pub pass: bool,
}

impl ValidationRow {
    fn new(criterion: u32, quantity: &str, unit: &'static str, reference: f64, computed: f64, tolerance: f64, check: Check) -> Self {
        let deviation = match check {
            Check::Relative => (computed - reference).abs() / reference.abs(),
            Check::Absolute => (computed - reference).abs(),
            Check::AtMost | Check::Exceeds => computed,
        };
        let pass = deviation.is_finite()
            && match check {
                Check::Relative | Check::Absolute | Check::AtMost => deviation <= tolerance,
                Check::Exceeds => deviation > tolerance,
            };
        Self {
            criterion,
            quantity: quantity.to_string(),
            unit,
            reference,
            computed,
            deviation,
            tolerance,
            check,
            pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub rows: Vec<ValidationRow>,
    pub wall_time_s: f64,
    pub pass: bool,
}

impl ValidationReport {
    pub fn failures(&self) -> impl Iterator<Item = &ValidationRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&[
            "criterion",
            "quantity",
            "unit",
            "reference",
            "computed",
            "deviation",
            "tolerance",
            "check",
            "pass",
        ]);
        t.comment("deviation is relative, absolute, or the bounded metric itself, as named by check");
        for r in &self.rows {
            t.push(vec![
                (r.criterion as usize).into(),
                r.quantity.as_str().into(),
                r.unit.into(),
                r.reference.into(),
                r.computed.into(),
                r.deviation.into(),
                r.tolerance.into(),
                r.check.name().into(),
                r.pass.into(),
            ]);
        }
        t
    }
}

fn surface(lambda_c: f64, h: f64, z_cm: f64, material: Material) -> SurfaceConfig {
    SurfaceConfig {
        fundamentals: vec![Fundamental::single(wavenumber(lambda_c), h)],
        z_cm,
        material,
    }
}

fn config(surface: SurfaceConfig) -> RunConfig {
    RunConfig {
        species: rb87(),
        trap: TrapConfig {
            omega_r: 2.0 * PI * 2.7e3,
            omega_x: 2.0 * PI * 0.83,
            atom_number: 1e4,
            normal_offset: 0.0,
        },
        t_bec: DEFAULT_T_BEC,
        surface,
        t_env: DEFAULT_T_ENV,
        bragg: BraggConfig::default(),
        numerics: Numerics::default(),
    }
}

/// 10⁴ Rb-87 atoms, ω_r = 2π × 2.7 kHz, ω_x = 2π × 0.83 Hz, 3 μm above a
/// perfectly reflecting corrugation of period 9.75 μm and amplitude 1 μm.
pub fn benchmark_config() -> RunConfig {
    config(surface(9.75e-6, 1e-6, 3e-6, Material::Perfect))
}

/// The benchmark trap 0.7 μm above a 4 μm period, 50 nm amplitude corrugation.
pub fn near_surface_config() -> RunConfig {
    config(surface(4e-6, 50e-9, 0.7e-6, Material::Perfect))
}

fn with_eta(eta_f: f64) -> RunConfig {
    let mut c = benchmark_config();
    c.surface.material = Material::ScalarEta { eta_f };
    c
}

fn hz(e: f64) -> f64 {
    energy_to_frequency(e)
}

fn u1(s: &Setup) -> f64 {
    s.potential.primary().harmonic(1)
}

fn benchmark_rows(rows: &mut Vec<ValidationRow>, s: &Setup) -> Result<()> {
    let p = &s.params;
    let rb = &s.config.species;
    let q1 = 0.5 * s.potential.primary().k_c;
    let gap = s.gaps.find(0, 1).ok_or_else(|| Error::Internal("no first gap".into()))?;
    rows.push(ValidationRow::new(1, "sigma", "um", 0.2, m_to_um(p.sigma), 0.05, Check::Relative));
    rows.push(ValidationRow::new(2, "mu_tilde", "Hz", 493.0, hz(p.mu_tilde), 0.05, Check::Relative));
    rows.push(ValidationRow::new(2, "l/2", "um", 408.0, m_to_um(p.half_length), 0.05, Check::Relative));
    rows.push(ValidationRow::new(3, "T(q1)", "Hz", 6.05, hz(rb.kinetic_energy(q1)), 0.01, Check::Relative));
    rows.push(ValidationRow::new(4, "E_B(q1)", "Hz", 77.0, hz(gap.e_b), 0.02, Check::Relative));
    rows.push(ValidationRow::new(5, "F(q1)", "1", 0.08, gap.suppression, 0.005, Check::Absolute));
    rows.push(ValidationRow::new(6, "|U1| perfect reflector", "Hz", 0.22, hz(u1(s).abs()), 0.10, Check::Relative));
    for (eta, expected) in [(0.9, 0.20), (0.7, 0.16)] {
        let se = prepare(&with_eta(eta))?;
        let name = format!("|U1| eta_F = {eta}");
        rows.push(ValidationRow::new(6, &name, "Hz", expected, hz(u1(&se).abs()), 0.10, Check::Relative));
    }
    rows.push(ValidationRow::new(7, "gap dE1", "Hz", 0.016, hz(gap.gap), 0.15, Check::Relative));
    Ok(())
}

fn near_surface_rows(rows: &mut Vec<ValidationRow>) -> Result<()> {
    let s = prepare(&near_surface_config())?;
    let gap = s.gaps.find(0, 1).ok_or_else(|| Error::Internal("no first gap".into()))?;
    rows.push(ValidationRow::new(8, "near-surface gap dE1", "Hz", 3.98, hz(gap.gap), 0.10, Check::Relative));
    rows.push(ValidationRow::new(8, "near-surface E_B(q1)", "Hz", 191.0, hz(gap.e_b), 0.02, Check::Relative));
    Ok(())
}

fn oracle_rows(rows: &mut Vec<ValidationRow>, s: &Setup) -> Result<()> {
    let rb = &s.config.species;
    let mu = s.params.mu_tilde;
    let cutoff = s.config.numerics.bdg_cutoff;
    let pert = &s.gaps.entries[0];
    let tol = oracle_tolerance(pert.u_n.abs() / pert.e_b);
    let full = bdg_gaps(mu, rb, &s.potential, cutoff)?;
    let g0 = full[0].gap;
    rows.push(ValidationRow::new(9, "BdG gap vs first order", "Hz", hz(pert.gap), hz(g0), tol, Check::Relative));
    for (scale, name) in [(0.5, "BdG gap ratio U/2"), (0.25, "BdG gap ratio U/4")] {
        let g = bdg_gaps(mu, rb, &s.potential.scaled(scale), cutoff)?[0].gap;
        rows.push(ValidationRow::new(9, name, "1", scale, g / g0, tol, Check::Relative));
    }
    Ok(())
}

fn dsf_grid(p: &Quasi1DParams, q: f64, points: usize, species: &AtomSpecies) -> Result<OmegaGrid> {
    OmegaGrid::new(0.0, 1.25 * bogoliubov_dispersion(q, p.mu_tilde, species) / HBAR, points)
}

fn dsf_rows(rows: &mut Vec<ValidationRow>, s: &Setup, lda: &DsfSpectrum) -> Result<()> {
    let p = &s.params;
    let rb = &s.config.species;
    let q = lda.q;
    let u = u1(s);
    let hom = dsf_homogeneous(q, lda.grid, p, rb)?;
    let closed = p.atom_number * rb.kinetic_energy(q) / bogoliubov_dispersion(q, p.mu_tilde, rb);
    rows.push(ValidationRow::new(10, "homogeneous DSF weight", "1", closed, hom.total_weight(), 0.005, Check::Relative));

    let [lo, hi] = lda.branches.as_slice() else {
        return Err(Error::Internal("LDA spectrum does not have two branches".into()));
    };
    let marker = hi.resonance.energy - lo.resonance.energy;
    let expect = suppression_factor(q, p.mu_tilde, rb) * u.abs();
    rows.push(ValidationRow::new(10, "LDA marker separation", "Hz", hz(expect), hz(marker), 0.01, Check::Relative));

    let fine = dsf_lda(q, lda.grid.refined(), p, u, rb)?;
    let change = lda
        .branches
        .iter()
        .zip(&fine.branches)
        .map(|(a, b)| (b.total_weight() - a.total_weight()).abs() / a.total_weight())
        .fold(0.0, f64::max);
    rows.push(ValidationRow::new(10, "branch weight change on grid refinement", "1", 0.0, change, 0.02, Check::AtMost));
    Ok(())
}

/// Total-variation distance `½ Σ |a/Σa − b/Σb|` between two non-negative curves.
pub fn shape_distance(a: &[f64], b: &[f64]) -> f64 {
    let sa: f64 = a.iter().sum();
    let sb: f64 = b.iter().sum();
    0.5 * a.iter().zip(b).map(|(x, y)| (x / sa - y / sb).abs()).sum::<f64>()
}

/// DSF bin weights collected onto the bins of a coarser grid.
pub fn rebin(spectrum: &DsfSpectrum, coarse: &OmegaGrid) -> Vec<f64> {
    let weights = spectrum.total_weights();
    let mut out = vec![0.0; coarse.points];
    for (i, w) in weights.iter().enumerate() {
        if let Some(j) = coarse.bin_of(spectrum.grid.value(i)) {
            out[j] += w;
        }
    }
    out
}

fn bragg_rows(rows: &mut Vec<ValidationRow>, s: &Setup, plus: &DsfSpectrum, minus: &DsfSpectrum) -> Result<()> {
    let p = &s.params;
    let rb = &s.config.species;
    let q = plus.q;
    let e_b = bogoliubov_dispersion(q, p.mu_tilde, rb);
    let tau = 100.0 * HBAR / e_b;
    let pair = DsfPair::new(Some(plus), Some(minus), q)?;
    let opts = BraggOptions::default();
    let pulse = BraggPulse { q, omega: e_b / HBAR, v_b: 1.0, tau };

    let sweep_grid = OmegaGrid::new(plus.grid.min, plus.grid.max, 401)?;
    let omegas = sweep_grid.values();
    let response = bragg_sweep(&pulse, &omegas, &pair, p, &s.potential, &opts)?;
    let target = rebin(plus, &sweep_grid);
    let tv = shape_distance(&response, &target);
    rows.push(ValidationRow::new(11, "long-pulse response vs S(q,w) shape", "1", 0.0, tv, 0.05, Check::AtMost));

    let silent = bragg_signal(&BraggPulse { v_b: 0.0, ..pulse }, &pair, p, &s.potential, &opts)?;
    let loudest = silent.dpdt.iter().chain(&silent.p).map(|v| v.abs()).fold(0.0, f64::max);
    rows.push(ValidationRow::new(11, "signal at V_B = 0", "N", 0.0, loudest, 0.0, Check::AtMost));

    let peak = response.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let edge = plus.branches.iter().map(|b| b.support.1).fold(0.0, f64::max) / HBAR;
    let off = [edge + 10.0 * pulse_resolution(tau), 2.0 * edge];
    let off_response = bragg_sweep(&pulse, &off, &pair, p, &s.potential, &opts)?;
    let ratio = off_response.iter().map(|v| v.abs()).fold(0.0, f64::max) / peak;
    rows.push(ValidationRow::new(11, "off-resonant response / peak", "1", 0.0, ratio, 0.01, Check::AtMost));
    Ok(())
}

fn multibranch_rows(rows: &mut Vec<ValidationRow>, s: &Setup) {
    let rb = &s.config.species;
    let omega_r = s.config.trap.omega_r;
    let mu = s.params.mu;
    let (e10, _) = multibranch_dispersion(1, 0.0, mu, omega_r, rb);
    rows.push(ValidationRow::new(12, "E_10(0) / hbar omega_r", "1", 2.0, e10 / (HBAR * omega_r), 1e-12, Check::Relative));
    let r = crate::spectrum::radial_tf_radius(mu, omega_r, rb);
    let q = 1e-4 / r;
    let (e00, _) = multibranch_dispersion(0, q, mu, omega_r, rb);
    let c_radial = e00 / (HBAR * q);
    let c_case_a = (mu / rb.mass).sqrt();
    rows.push(ValidationRow::new(12, "n = 0 sound speed / sqrt(mu/m)", "1", 1.0 / SQRT_2, c_radial / c_case_a, 1e-3, Check::Relative));
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

fn coupled_mode_rows(rows: &mut Vec<ValidationRow>, s: &Setup) -> Result<()> {
    let p = &s.params;
    let rb = &s.config.species;
    let k = s.potential.primary().k_c;
    let u = u1(s);
    let apart = coupled_mode_gaps(p, &dual(k, u, 3.0 * k, u), rb)?;
    let worst = apart.families.iter().map(|f| f.relative_deviation.abs()).fold(0.0, f64::max);
    rows.push(ValidationRow::new(13, "separated fundamentals vs independent gaps", "1", 0.0, worst, 0.01, Check::AtMost));

    // Two 2 μm families 1/64 apart; U is set so that |k1 − k2| = 0.1 δk_min.
    let k1 = wavenumber(2e-6);
    let k2 = k1 * 63.0 / 64.0;
    let e0 = bogoliubov_dispersion(0.5 * k1, p.mu_tilde, rb);
    let um = e0 * 10.0 / 64.0;
    let pot = dual(k1, um, k2, um);
    let mixed = coupled_mode_gaps(p, &pot, rb)?;
    rows.push(ValidationRow::new(
        13,
        "mixing scenario |dk| / dk_min",
        "1",
        0.1,
        mixed.separation / mixed.delta_k_min,
        0.01,
        Check::Relative,
    ));
    let least = mixed.families.iter().map(|f| f.relative_deviation.abs()).fold(f64::INFINITY, f64::min);
    rows.push(ValidationRow::new(13, "mixing deviation, coupled modes", "1", 0.0, least, 0.10, Check::Exceeds));

    let pert = perturbative_gaps(p, &pot, rb);
    let numeric = bdg_gaps(p.mu_tilde, rb, &pot, MIXING_BDG_CUTOFF)?;
    let least_bdg = pert
        .entries
        .iter()
        .filter_map(|e| {
            let g = numeric.iter().find(|g| g.family == e.family && g.n == e.n)?;
            Some((g.gap - e.gap).abs() / e.gap)
        })
        .fold(f64::INFINITY, f64::min);
    rows.push(ValidationRow::new(13, "mixing deviation, BdG", "1", 0.0, least_bdg, 0.10, Check::Exceeds));
    Ok(())
}

/// Every benchmark and consistency row, timed.
pub fn validate_benchmarks() -> Result<ValidationReport> {
    let start = Instant::now();
    let mut rows = Vec::new();
    let s = prepare(&benchmark_config())?;
    benchmark_rows(&mut rows, &s)?;
    near_surface_rows(&mut rows)?;
    oracle_rows(&mut rows, &s)?;

    let rb = &s.config.species;
    let q = 0.5 * s.potential.primary().k_c;
    let u = u1(&s);
    let grid = dsf_grid(&s.params, q, s.config.bragg.omega_points, rb)?;
    let plus = dsf_lda(q, grid, &s.params, u, rb)?;
    let minus = dsf_lda(-q, grid, &s.params, u, rb)?;
    dsf_rows(&mut rows, &s, &plus)?;
    bragg_rows(&mut rows, &s, &plus, &minus)?;
    multibranch_rows(&mut rows, &s);
    coupled_mode_rows(&mut rows, &s)?;

    let wall_time_s = start.elapsed().as_secs_f64();
    rows.push(ValidationRow::new(14, "wall time", "s", 0.0, wall_time_s, WALL_TIME_LIMIT, Check::AtMost));
    let pass = rows.iter().all(|r| r.pass);
    Ok(ValidationReport { rows, wall_time_s, pass })
}

/// Run [`validate_benchmarks`] and write `validation.csv` and
/// `validate_summary.json` into `out`.
pub fn run_validate(out: &Path) -> Result<ValidationReport> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let report = validate_benchmarks()?;
    let file: FileEntry = report.table().write(&out.join("validation.csv"))?;
    let summary = json!({
        "command": "validate",
        "version": env!("CARGO_PKG_VERSION"),
        "pass": report.pass,
        "wall_time_s": report.wall_time_s,
        "failures": report.failures().map(|r| &r.quantity).collect::<Vec<_>>(),
        "rows": report.rows,
        "files": [file],
    });
    write_summary(&summary, &out.join("validate_summary.json"))?;
    Ok(report)
}
