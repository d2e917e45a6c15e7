//! Command pipelines behind the `casimir-bec` binary.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use crate::bdg::{bdg_gaps, oracle_compare, solve_bdg_bands, BdgGap, BlochLattice, OracleComparison};
use crate::bragg::{
    bragg_signal, bragg_sweep, dsf_homogeneous, dsf_lda, BraggOptions, BraggPulse, DsfPair, DsfSpectrum, OmegaGrid,
};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::output::{read_table, Cell, FileEntry, Table};
use crate::physics::{energy_to_frequency, m_to_um, AtomSpecies, HBAR};
use crate::quasi1d::{bogoliubov_dispersion, derive_quasi1d, regime_check, tf_axial_density, Quasi1DParams, RegimeReport};
use crate::spectrum::{band_branches, coupled_mode_gaps, perturbative_gaps, CoupledModeReport, GapReport};
use crate::surface::{lateral_coefficients, LateralPotential, ResponseFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Potential,
    Spectrum,
    Bdg,
    Dsf,
    Bragg,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Potential => "potential",
            Command::Spectrum => "spectrum",
            Command::Bdg => "bdg",
            Command::Dsf => "dsf",
            Command::Bragg => "bragg",
        }
    }
}

/// Quantities every command derives from the configuration.
#[derive(Debug, Clone)]
pub struct Setup {
    pub config: RunConfig,
    pub params: Quasi1DParams,
    pub potential: LateralPotential,
    pub response: &'static str,
    pub gaps: GapReport,
    pub regime: RegimeReport,
    pub warnings: Vec<String>,
}

pub fn prepare(config: &RunConfig) -> Result<Setup> {
    let species = &config.species;
    let mut warnings = config.trap.validate()?;
    warnings.extend(config.surface.validate()?);
    let params = derive_quasi1d(&config.trap, species)?;
    let response = ResponseFunction::for_surface(&config.surface, species)?;
    let mut potential = lateral_coefficients(&config.surface, &response)?;
    potential.normal_offset = config.trap.normal_offset;
    let gaps = perturbative_gaps(&params, &potential, species);
    warnings.extend(gaps.warnings.iter().cloned());
    let regime = regime_check(&params, &config.surface, &potential, species, config.t_env, config.t_bec);
    Ok(Setup {
        config: config.clone(),
        params,
        potential,
        response: response.provenance(),
        gaps,
        regime,
        warnings,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub command: String,
    pub version: String,
    pub config: RunConfig,
    pub response: String,
    pub quasi1d: Quasi1DParams,
    pub quasi1d_display: Value,
    pub lateral_potential: LateralPotential,
    pub lateral_potential_hz: Vec<Value>,
    pub gaps: GapReport,
    pub regime: RegimeReport,
    pub warnings: Vec<String>,
    pub results: Value,
    pub files: Vec<FileEntry>,
}

fn display_params(p: &Quasi1DParams) -> Value {
    json!({
        "sigma_um": m_to_um(p.sigma),
        "mu_tilde_Hz": energy_to_frequency(p.mu_tilde),
        "mu_Hz": energy_to_frequency(p.mu),
        "half_length_um": m_to_um(p.half_length),
        "k_mu_rad_per_um": p.k_mu * 1e-6,
        "peak_density_per_um": p.peak_density() * 1e-6,
    })
}

fn coefficient_rows(pot: &LateralPotential) -> Vec<Value> {
    pot.series
        .iter()
        .enumerate()
        .flat_map(|(f, s)| {
            s.coefficients.iter().enumerate().map(move |(i, u)| {
                json!({"family": f, "n": i + 1, "k_radpm": (i + 1) as f64 * s.k_c, "U_J": u, "U_Hz": energy_to_frequency(*u)})
            })
        })
        .collect()
}

/// Run `command` and write its tables plus `<command>_summary.json` into `out`.
pub fn run_scenario(config: &RunConfig, command: Command, out: &Path) -> Result<RunSummary> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let setup = prepare(config)?;
    let mut files = Vec::new();
    let results = with_context(
        command,
        match command {
            Command::Potential => run_potential(&setup, out, &mut files),
            Command::Spectrum => run_spectrum(&setup, out, &mut files),
            Command::Bdg => run_bdg(&setup, out, &mut files),
            Command::Dsf => run_dsf(&setup, out, &mut files),
            Command::Bragg => run_bragg(&setup, out, &mut files),
        },
    )?;
    let mut warnings = setup.warnings.clone();
    if let Some(w) = results.get("warnings").and_then(Value::as_array) {
        warnings.extend(w.iter().filter_map(|v| v.as_str().map(String::from)));
    }
    let summary = RunSummary {
        command: command.name().into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: setup.config.clone(),
        response: setup.response.into(),
        quasi1d: setup.params.clone(),
        quasi1d_display: display_params(&setup.params),
        lateral_potential: setup.potential.clone(),
        lateral_potential_hz: coefficient_rows(&setup.potential),
        gaps: setup.gaps.clone(),
        regime: setup.regime.clone(),
        warnings,
        results,
        files,
    };
    write_summary(&summary, &out.join(format!("{}_summary.json", command.name())))?;
    Ok(summary)
}

fn with_context<T>(command: Command, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Domain(m) => Error::Domain(format!("{}: {m}", command.name())),
        Error::Internal(m) => Error::Internal(format!("{}: {m}", command.name())),
        other => other,
    })
}

pub fn write_summary<T: Serialize>(summary: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(summary).map_err(|e| Error::Internal(format!("summary serialization: {e}")))?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn hz(e: f64) -> Cell {
    Cell::Num(energy_to_frequency(e))
}

fn metadata(table: &mut Table, s: &Setup) {
    table.comment(format!("species = {}", s.config.species.name));
    table.comment(format!("mu_tilde_Hz = {}", crate::output::format_number(energy_to_frequency(s.params.mu_tilde))));
    table.comment(format!("response = {}", s.response));
    table.comment("energies in Hz are E / (2 pi hbar)");
}

fn run_potential(s: &Setup, out: &Path, files: &mut Vec<FileEntry>) -> Result<Value> {
    let mut coeffs = Table::new(&["family", "n", "k_radpm", "h_m", "U_J", "U_Hz"]);
    metadata(&mut coeffs, s);
    for (f, (series, fund)) in s.potential.series.iter().zip(&s.config.surface.fundamentals).enumerate() {
        for (i, u) in series.coefficients.iter().enumerate() {
            coeffs.push(vec![
                f.into(),
                (i + 1).into(),
                ((i + 1) as f64 * series.k_c).into(),
                fund.amplitudes[i].into(),
                (*u).into(),
                hz(*u),
            ]);
        }
    }
    files.push(coeffs.write(&out.join("lateral_coefficients.csv"))?);

    let with = tf_axial_density(&s.params, &s.potential, s.config.numerics.density_points, true)?;
    let without = tf_axial_density(&s.params, &s.potential, s.config.numerics.density_points, false)?;
    let mut profile = Table::new(&["x_um", "U_L_Hz", "n1_per_m", "n1_parabola_per_m"]);
    metadata(&mut profile, s);
    for i in 0..with.x.len() {
        let x = with.x[i];
        profile.push(vec![
            m_to_um(x).into(),
            hz(crate::surface::lateral_eval(&s.potential, x)),
            with.n1[i].into(),
            without.n1[i].into(),
        ]);
    }
    files.push(profile.write(&out.join("lateral_potential.csv"))?);
    Ok(json!({ "atom_number_from_profile": with.integral() }))
}

fn run_spectrum(s: &Setup, out: &Path, files: &mut Vec<FileEntry>) -> Result<Value> {
    let species = &s.config.species;
    let mut gaps = Table::new(&["family", "n", "q_n_radpm", "U_Hz", "F", "E_B_Hz", "gap_Hz", "gap_over_E_B"]);
    metadata(&mut gaps, s);
    for e in &s.gaps.entries {
        gaps.push(vec![
            e.family.into(),
            e.n.into(),
            e.q_n.into(),
            hz(e.u_n),
            e.suppression.into(),
            hz(e.e_b),
            hz(e.gap),
            e.gap_over_e_b.into(),
        ]);
    }
    files.push(gaps.write(&out.join("gaps.csv"))?);

    let mut bands = Table::new(&[
        "family", "n", "epsilon_radpm", "q_radpm", "E_lower_Hz", "E_upper_Hz", "E_bare_right_Hz", "E_bare_left_Hz",
    ]);
    metadata(&mut bands, s);
    let points = s.config.numerics.branch_points;
    for e in &s.gaps.entries {
        let k_c = s.potential.series[e.family].k_c;
        let eps: Vec<f64> = if points == 1 {
            vec![0.0]
        } else {
            (0..points).map(|i| -0.25 * k_c + 0.5 * k_c * i as f64 / (points - 1) as f64).collect()
        };
        let slice = band_branches(&s.params, &s.potential, species, e.family, e.n, &eps)?;
        for i in 0..eps.len() {
            bands.push(vec![
                e.family.into(),
                e.n.into(),
                eps[i].into(),
                (slice.q_n + eps[i]).into(),
                hz(slice.lower[i]),
                hz(slice.upper[i]),
                hz(slice.bare_right[i]),
                hz(slice.bare_left[i]),
            ]);
        }
    }
    files.push(bands.write(&out.join("bands.csv"))?);

    let mut results = serde_json::Map::new();
    if s.potential.series.len() == 2 {
        match coupled_mode_gaps(&s.params, &s.potential, species) {
            Ok(report) => {
                files.push(coupled_table(&report, s).write(&out.join("coupled_modes.csv"))?);
                results.insert("coupled_modes".into(), serde_json::to_value(&report).unwrap_or(Value::Null));
            }
            Err(Error::Unsupported(m)) => {
                results.insert("coupled_modes_skipped".into(), Value::String(m));
            }
            Err(e) => return Err(e),
        }
    }
    let bdg_file = out.join("bdg_gaps.csv");
    if bdg_file.exists() {
        let numeric = read_bdg_gaps(&bdg_file)?;
        let cmp = oracle_compare(&s.gaps, &numeric)?;
        results.insert("oracle_compare".into(), serde_json::to_value(&cmp).unwrap_or(Value::Null));
    }
    Ok(Value::Object(results))
}

fn coupled_table(r: &CoupledModeReport, s: &Setup) -> Table {
    let mut t = Table::new(&["family", "index", "state_q_radpm", "eigenvalue_Hz"]);
    metadata(&mut t, s);
    t.comment(format!("separation_radpm = {}", crate::output::format_number(r.separation)));
    t.comment(format!("delta_k_min_radpm = {}", crate::output::format_number(r.delta_k_min)));
    t.comment(format!("mixing = {}", r.mixing));
    for f in &r.families {
        t.comment(format!(
            "family {}: splitting_Hz = {}, independent_gap_Hz = {}",
            f.family,
            crate::output::format_number(energy_to_frequency(f.splitting)),
            crate::output::format_number(energy_to_frequency(f.independent_gap))
        ));
        for (i, (q, e)) in f.states.iter().zip(&f.eigenvalues).enumerate() {
            t.push(vec![f.family.into(), i.into(), (*q).into(), hz(*e)]);
        }
    }
    t
}

const BDG_GAP_HEADER: [&str; 13] = [
    "family",
    "n",
    "q_n_radpm",
    "U_J",
    "mu_tilde_J",
    "q_b_radpm",
    "gap_J",
    "gap_Hz",
    "cutoff",
    "gap_half_cutoff_J",
    "gap_cutoff_minus_two_J",
    "drift",
    "converged",
];

fn bdg_gap_table(gaps: &[BdgGap], s: &Setup) -> Table {
    let mut t = Table::new(&BDG_GAP_HEADER);
    metadata(&mut t, s);
    for g in gaps {
        t.push(vec![
            g.family.into(),
            g.n.into(),
            g.q_n.into(),
            g.u_n.into(),
            g.mu_tilde.into(),
            g.q_b.into(),
            g.gap.into(),
            hz(g.gap),
            g.cutoff.into(),
            g.gap_half_cutoff.into(),
            g.gap_cutoff_minus_two.into(),
            g.drift.into(),
            g.converged.into(),
        ]);
    }
    t
}

/// Read a `bdg_gaps.csv` written by the `bdg` command.
pub fn read_bdg_gaps(path: &Path) -> Result<Vec<BdgGap>> {
    let t = read_table(path)?;
    let col = |name: &str| t.numbers(name);
    let family = col("family")?;
    let n = col("n")?;
    let q_n = col("q_n_radpm")?;
    let u = col("U_J")?;
    let mu = col("mu_tilde_J")?;
    let q_b = col("q_b_radpm")?;
    let gap = col("gap_J")?;
    let cutoff = col("cutoff")?;
    let half = col("gap_half_cutoff_J")?;
    let m2 = col("gap_cutoff_minus_two_J")?;
    let drift = col("drift")?;
    let conv = col("converged")?;
    Ok((0..t.rows.len())
        .map(|i| BdgGap {
            family: family[i] as usize,
            n: n[i] as usize,
            q_n: q_n[i],
            u_n: u[i],
            mu_tilde: mu[i],
            q_b: q_b[i],
            gap: gap[i],
            cutoff: cutoff[i] as usize,
            gap_half_cutoff: half[i],
            gap_cutoff_minus_two: m2[i],
            drift: drift[i],
            converged: conv[i] != 0.0,
        })
        .collect())
}

fn run_bdg(s: &Setup, out: &Path, files: &mut Vec<FileEntry>) -> Result<Value> {
    let species = &s.config.species;
    let lattice = BlochLattice::for_potential(&s.potential)?;
    let points = s.config.numerics.bdg_q_points;
    let kb = lattice.k_base;
    let q_grid: Vec<f64> = if points == 1 {
        vec![0.0]
    } else {
        (0..points).map(|i| -0.5 * kb + kb * i as f64 / (points - 1) as f64).collect()
    };
    let cutoff = s.config.numerics.bdg_cutoff;
    let mut warnings = Vec::new();
    let widest = *lattice.multiples.iter().max().unwrap_or(&1) as usize;
    if cutoff < 2 * widest {
        warnings.push(format!(
            "bdg_cutoff = {cutoff} is below twice the largest fundamental ({widest} base wavenumbers); gaps may be unconverged"
        ));
    }
    let bands = solve_bdg_bands(s.params.mu_tilde, species, &s.potential, &q_grid, cutoff)?;
    let mut t = Table::new(&["q_b_radpm", "band", "E_Hz"]);
    metadata(&mut t, s);
    t.comment(format!("cutoff_M = {cutoff}"));
    t.comment(format!("k_base_radpm = {}", crate::output::format_number(kb)));
    for (q, levels) in bands.q_b.iter().zip(&bands.bands) {
        for (i, e) in levels.iter().enumerate() {
            t.push(vec![(*q).into(), i.into(), hz(*e)]);
        }
    }
    files.push(t.write(&out.join("bdg_bands.csv"))?);
    files.push(bdg_gap_table(&bands.gaps, s).write(&out.join("bdg_gaps.csv"))?);
    for g in bands.gaps.iter().filter(|g| !g.converged) {
        warnings.push(format!(
            "BdG gap family {}, n = {} drifts by {:.2e} between M/2 and M",
            g.family, g.n, g.drift
        ));
    }
    let cmp: OracleComparison = oracle_compare(&s.gaps, &bands.gaps)?;
    Ok(json!({
        "cutoff": cutoff,
        "lattice": bands.lattice,
        "gaps": bands.gaps,
        "oracle_compare": cmp,
        "warnings": warnings,
    }))
}

/// Probe wavevector and the Fourier coefficient of the nearest zone edge.
pub fn probe(s: &Setup) -> (f64, f64) {
    let primary = s.potential.primary();
    match s.config.bragg.q {
        Some(q) => {
            let n = (2.0 * q / primary.k_c).round() as usize;
            (q, primary.harmonic(n))
        }
        None => {
            let n = s.config.bragg.harmonic;
            (0.5 * n as f64 * primary.k_c, primary.harmonic(n))
        }
    }
}

fn omega_grid(s: &Setup, q: f64) -> Result<OmegaGrid> {
    let e_b = bogoliubov_dispersion(q, s.params.mu_tilde, &s.config.species);
    let b = &s.config.bragg;
    OmegaGrid::new(b.omega_min.unwrap_or(0.0), b.omega_max.unwrap_or(1.25 * e_b / HBAR), b.omega_points)
}

fn dsf_table(lda: &DsfSpectrum, hom: Option<&DsfSpectrum>, s: &Setup) -> Table {
    let mut header = vec!["omega_radps".to_string(), "f_Hz".to_string()];
    for b in &lda.branches {
        header.push(format!("S_{}_perJ", b.label));
        header.push(format!("W_{}", b.label));
    }
    header.push("S_homogeneous_perJ".into());
    header.push("resonance".into());
    let mut t = Table::new(&header);
    metadata(&mut t, s);
    t.comment("S is a density per unit energy in arbitrary units; W is its integral over the bin");
    for b in &lda.branches {
        t.comment(format!(
            "marker {} E_Hz = {} bin = {}",
            b.label,
            crate::output::format_number(energy_to_frequency(b.resonance.energy)),
            b.resonance.bin.map(|i| i.to_string()).unwrap_or_else(|| "none".into())
        ));
    }
    let res = lda.resonance_bins();
    let hom_samples = hom.map(DsfSpectrum::total_samples);
    for i in 0..lda.grid.points {
        let w = lda.grid.value(i);
        let mut row: Vec<Cell> = vec![w.into(), (w / (2.0 * std::f64::consts::PI)).into()];
        for b in &lda.branches {
            row.push(b.samples[i].into());
            row.push(b.weights[i].into());
        }
        row.push(hom_samples.as_ref().map(|h| h[i]).unwrap_or(0.0).into());
        row.push(res.contains(&i).into());
        t.push(row);
    }
    t
}

fn dsf_summary(lda: &DsfSpectrum, u: f64, s: &Setup) -> Value {
    let markers: Vec<Value> = lda
        .branches
        .iter()
        .map(|b| {
            json!({
                "branch": b.label,
                "E_Hz": energy_to_frequency(b.resonance.energy),
                "omega_radps": b.resonance.omega,
                "bin": b.resonance.bin,
                "support_Hz": [energy_to_frequency(b.support.0), energy_to_frequency(b.support.1)],
                "weight": b.total_weight(),
            })
        })
        .collect();
    let separation = match lda.branches.as_slice() {
        [lo, hi] => Some(energy_to_frequency(hi.resonance.energy - lo.resonance.energy)),
        _ => None,
    };
    let f = crate::spectrum::suppression_factor(lda.q, s.params.mu_tilde, &s.config.species);
    json!({
        "q_radpm": lda.q,
        "U_Hz": energy_to_frequency(u),
        "expected_marker_separation_Hz": energy_to_frequency(f * u.abs()),
        "marker_separation_Hz": separation,
        "markers": markers,
        "total_weight": lda.total_weight(),
        "warnings": lda.warnings,
    })
}

fn spectra(s: &Setup) -> Result<(f64, f64, DsfSpectrum, DsfSpectrum, Option<DsfSpectrum>)> {
    let (q, u) = probe(s);
    let grid = omega_grid(s, q)?;
    let species = &s.config.species;
    let plus = dsf_lda(q, grid, &s.params, u, species)?;
    let minus = dsf_lda(-q, grid, &s.params, u, species)?;
    let hom = dsf_homogeneous(q, grid, &s.params, species).ok();
    Ok((q, u, plus, minus, hom))
}

fn run_dsf(s: &Setup, out: &Path, files: &mut Vec<FileEntry>) -> Result<Value> {
    let (_, u, plus, _, hom) = spectra(s)?;
    files.push(dsf_table(&plus, hom.as_ref(), s).write(&out.join("dsf.csv"))?);
    Ok(dsf_summary(&plus, u, s))
}

fn run_bragg(s: &Setup, out: &Path, files: &mut Vec<FileEntry>) -> Result<Value> {
    let (q, u, plus, minus, _) = spectra(s)?;
    let species: &AtomSpecies = &s.config.species;
    let b = &s.config.bragg;
    let e_b = bogoliubov_dispersion(q, s.params.mu_tilde, species);
    let tau = b.tau.unwrap_or(b.tau_over_hbar_e_b * HBAR / e_b);
    let omega = b.omega.unwrap_or(plus.branches[0].resonance.omega);
    let pulse = BraggPulse { q, omega, v_b: b.v_b, tau };
    let opts = BraggOptions { time_points: b.time_points, closure: b.closure, displacement: b.displacement };
    let pair = DsfPair::new(Some(&plus), Some(&minus), q)?;
    let signal = bragg_signal(&pulse, &pair, &s.params, &s.potential, &opts)?;

    let mut t = Table::new(&["t_s", "dPdt_N", "P_kgmps", "x_cm_m", "trap_N", "casimir_N", "drive_N"]);
    metadata(&mut t, s);
    t.comment(format!("omega_radps = {}", crate::output::format_number(omega)));
    t.comment(format!("tau_s = {}", crate::output::format_number(tau)));
    t.comment("drive term in arbitrary units set by V_B");
    for i in 0..signal.t.len() {
        t.push(vec![
            signal.t[i].into(),
            signal.dpdt[i].into(),
            signal.p[i].into(),
            signal.x_cm[i].into(),
            signal.trap[i].into(),
            signal.casimir[i].into(),
            signal.drive[i].into(),
        ]);
    }
    files.push(t.write(&out.join("bragg_signal.csv"))?);

    let grid = plus.grid;
    let sweep_grid = OmegaGrid::new(grid.min, grid.max, b.sweep_points)?;
    let omegas = sweep_grid.values();
    let response = bragg_sweep(&pulse, &omegas, &pair, &s.params, &s.potential, &opts)?;
    let mut sw = Table::new(&["omega_radps", "f_Hz", "time_averaged_dPdt_N"]);
    metadata(&mut sw, s);
    sw.comment(format!("tau_s = {}", crate::output::format_number(tau)));
    for (w, r) in omegas.iter().zip(&response) {
        sw.push(vec![(*w).into(), (w / (2.0 * std::f64::consts::PI)).into(), (*r).into()]);
    }
    files.push(sw.write(&out.join("bragg_sweep.csv"))?);

    Ok(json!({
        "pulse": pulse,
        "tau_times_E_B_over_hbar": tau * e_b / HBAR,
        "final_momentum": signal.p.last(),
        "dsf": dsf_summary(&plus, u, s),
        "warnings": signal.warnings,
    }))
}

/// Ensure that BdG gaps were computed for the same system as `s`.
pub fn bdg_for(s: &Setup) -> Result<Vec<BdgGap>> {
    bdg_gaps(s.params.mu_tilde, &s.config.species, &s.potential, s.config.numerics.bdg_cutoff)
}
