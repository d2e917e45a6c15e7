//! Plane-wave Bloch diagonalization of the 1D Bogoliubov-de Gennes equations.
//!
//! With `A(x) = μ̃ − U_L(x)` the pair `(u, v*)` obeys
//! `E u = T u + A (u + v*)`, `−E v* = T v* + A (u + v*)`. In the basis
//! `e^{i(q_b + n k_b)x}`, `n = −M..M`, T is diagonal and A carries μ̃ on the
//! diagonal and `−U_m/2` on the m-th off-diagonals, giving the block matrix
//! `[[T+A, A], [−A, −(T+A)]]`. The matrix is assembled in units of μ̃.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::physics::AtomSpecies;
use crate::quasi1d::bogoliubov_dispersion;
use crate::spectrum::{nearest_pair_spacing, GapReport, PERTURBATIVE_WARN_RATIO};
use crate::surface::LateralPotential;

pub const MIN_CUTOFF: usize = 4;
/// Largest numerator/denominator accepted for `k_c1 / k_c2`.
pub const MAX_COMMENSURATE: u32 = 64;
/// Imaginary parts below this fraction of μ̃ are solver noise.
pub const IMAG_TOLERANCE: f64 = 1e-8;
/// Eigenvalues this close to zero belong to the Goldstone pair and are exempt
/// from the reality check; the pair forms a Jordan block at q_b = 0.
pub const ZERO_MODE_TOLERANCE: f64 = 1e-6;
/// Relative gap drift from M/2 to M below which a gap counts as converged.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-3;

/// Common reciprocal lattice of the corrugation families.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlochLattice {
    /// rad/m
    pub k_base: f64,
    /// `k_c,i = multiples[i] · k_base`.
    pub multiples: Vec<u32>,
}

impl BlochLattice {
    pub fn for_potential(pot: &LateralPotential) -> Result<Self> {
        match pot.series.as_slice() {
            [] => Err(Error::domain("potential has no corrugation family")),
            [s] => Ok(Self { k_base: s.k_c, multiples: vec![1] }),
            [a, b] => {
                let (p, r) = commensurate_ratio(a.k_c, b.k_c)?;
                Ok(Self { k_base: a.k_c / p as f64, multiples: vec![p, r] })
            }
            more => Err(Error::Unsupported(format!(
                "BdG solver handles at most two fundamentals, got {}",
                more.len()
            ))),
        }
    }

    /// Fold `q` into the first zone `[−k_b/2, k_b/2)`.
    pub fn fold(&self, q: f64) -> f64 {
        let kb = self.k_base;
        q - kb * (q / kb + 0.5).floor()
    }
}

/// `k1/k2 = p/r` with the smallest `r ≤ 64`; relative tolerance 1e-9.
pub fn commensurate_ratio(k1: f64, k2: f64) -> Result<(u32, u32)> {
    if !(k1 > 0.0 && k2 > 0.0) {
        return Err(Error::domain("fundamental wavenumbers must be positive"));
    }
    let ratio = k1 / k2;
    for r in 1..=MAX_COMMENSURATE {
        let p = (ratio * r as f64).round();
        if p >= 1.0 && p <= MAX_COMMENSURATE as f64 && (p / r as f64 - ratio).abs() <= 1e-9 * ratio {
            return Ok((p as u32, r));
        }
    }
    Err(Error::Unsupported(format!(
        "k_c1/k_c2 = {ratio} is not p/r with p, r <= {MAX_COMMENSURATE}; no common Bloch period"
    )))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BdgProblem {
    pub mu_tilde: f64,
    pub mass: f64,
    pub potential: LateralPotential,
    /// Bloch momentum, rad/m.
    pub q_b: f64,
    /// Plane-wave half-width M.
    pub cutoff: usize,
}

impl BdgProblem {
    pub fn new(mu_tilde: f64, species: &AtomSpecies, potential: &LateralPotential, q_b: f64, cutoff: usize) -> Self {
        Self {
            mu_tilde,
            mass: species.mass,
            potential: potential.clone(),
            q_b,
            cutoff,
        }
    }

    pub fn dimension(&self) -> usize {
        2 * (2 * self.cutoff + 1)
    }

    fn check(&self) -> Result<()> {
        if self.cutoff < MIN_CUTOFF {
            return Err(Error::domain(format!("plane-wave cutoff M = {} < {MIN_CUTOFF}", self.cutoff)));
        }
        if !(self.mu_tilde > 0.0) {
            return Err(Error::domain("BdG background needs mu_tilde > 0"));
        }
        let sum = self.potential.abs_sum();
        if sum >= self.mu_tilde {
            return Err(Error::Instability(format!(
                "Σ|U_n| = {sum:e} J >= mu_tilde = {:e} J: Thomas-Fermi background not positive",
                self.mu_tilde
            )));
        }
        Ok(())
    }
}

/// The assembled eigenproblem, entries in units of μ̃.
#[derive(Debug, Clone)]
pub struct BdgMatrix {
    pub matrix: DMatrix<f64>,
    /// Energy unit of the entries, J.
    pub scale: f64,
    pub lattice: BlochLattice,
    /// Plane-wave momenta `q_b + n k_b`, rad/m.
    pub momenta: Vec<f64>,
}

pub fn build_bdg(problem: &BdgProblem) -> Result<BdgMatrix> {
    problem.check()?;
    let lattice = BlochLattice::for_potential(&problem.potential)?;
    let m = problem.cutoff as i64;
    let size = (2 * m + 1) as usize;
    let mu = problem.mu_tilde;
    let hbar = crate::physics::HBAR;
    let momenta: Vec<f64> = (-m..=m).map(|n| problem.q_b + n as f64 * lattice.k_base).collect();

    let mut a = DMatrix::<f64>::identity(size, size);
    for (series, &mult) in problem.potential.series.iter().zip(&lattice.multiples) {
        for (i, &u) in series.coefficients.iter().enumerate() {
            let offset = (i + 1) * mult as usize;
            if u == 0.0 || offset >= size {
                continue;
            }
            for r in 0..size - offset {
                a[(r, r + offset)] -= 0.5 * u / mu;
                a[(r + offset, r)] -= 0.5 * u / mu;
            }
        }
    }
    let mut h = a.clone();
    for (i, q) in momenta.iter().enumerate() {
        h[(i, i)] += hbar * hbar * q * q / (2.0 * problem.mass) / mu;
    }
    let mut full = DMatrix::<f64>::zeros(2 * size, 2 * size);
    full.view_mut((0, 0), (size, size)).copy_from(&h);
    full.view_mut((0, size), (size, size)).copy_from(&a);
    full.view_mut((size, 0), (size, size)).copy_from(&(-&a));
    full.view_mut((size, size), (size, size)).copy_from(&(-&h));
    Ok(BdgMatrix {
        matrix: full,
        scale: mu,
        lattice,
        momenta,
    })
}

/// All eigenvalues of one Bloch problem, J, sorted ascending.
pub fn solve_bdg(problem: &BdgProblem) -> Result<Vec<f64>> {
    let built = build_bdg(problem)?;
    let eig = built.matrix.complex_eigenvalues();
    let mut out = Vec::with_capacity(eig.len());
    for z in eig.iter() {
        let near_zero = z.norm() <= ZERO_MODE_TOLERANCE;
        if z.im.abs() > IMAG_TOLERANCE && !near_zero {
            return Err(Error::Instability(format!(
                "eigenvalue {:e} + {:e}i (units of mu_tilde) at q_b = {:e} rad/m",
                z.re, z.im, problem.q_b
            )));
        }
        out.push(if near_zero { 0.0 } else { z.re * built.scale });
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Positive branch of `solve_bdg`.
pub fn positive_eigenvalues(all: &[f64]) -> Vec<f64> {
    all.iter().copied().filter(|e| *e > 0.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BdgGap {
    pub family: usize,
    pub n: usize,
    pub q_n: f64,
    pub u_n: f64,
    pub mu_tilde: f64,
    /// Folded Bloch momentum at which the gap was measured, rad/m.
    pub q_b: f64,
    /// Spacing of the two eigenvalues nearest `E_B(q_n)`, J.
    pub gap: f64,
    pub cutoff: usize,
    /// Same gap at cutoff M/2.
    pub gap_half_cutoff: f64,
    /// Same gap at cutoff M − 2.
    pub gap_cutoff_minus_two: f64,
    pub drift: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BdgBands {
    pub q_b: Vec<f64>,
    /// Positive eigenvalues per Bloch momentum, J.
    pub bands: Vec<Vec<f64>>,
    pub cutoff: usize,
    pub lattice: BlochLattice,
    pub gaps: Vec<BdgGap>,
}

fn gap_at(mu_tilde: f64, species: &AtomSpecies, pot: &LateralPotential, q_b: f64, e_ref: f64, cutoff: usize) -> Result<f64> {
    let all = solve_bdg(&BdgProblem::new(mu_tilde, species, pot, q_b, cutoff))?;
    Ok(nearest_pair_spacing(&positive_eigenvalues(&all), e_ref))
}

/// BdG zone-edge gaps for every nonzero `U_n`, with a cutoff convergence study.
pub fn bdg_gaps(mu_tilde: f64, species: &AtomSpecies, pot: &LateralPotential, cutoff: usize) -> Result<Vec<BdgGap>> {
    let lattice = BlochLattice::for_potential(pot)?;
    let mut jobs = Vec::new();
    for (family, series) in pot.series.iter().enumerate() {
        for (i, &u) in series.coefficients.iter().enumerate() {
            if u != 0.0 {
                jobs.push((family, i + 1, series.k_c, u));
            }
        }
    }
    let half = (cutoff / 2).max(MIN_CUTOFF);
    let minus_two = cutoff.saturating_sub(2).max(MIN_CUTOFF);
    jobs.into_par_iter()
        .map(|(family, n, k_c, u)| {
            let q_n = 0.5 * n as f64 * k_c;
            let q_b = lattice.fold(q_n);
            let e_ref = bogoliubov_dispersion(q_n, mu_tilde, species);
            let gap = gap_at(mu_tilde, species, pot, q_b, e_ref, cutoff)?;
            let gap_half_cutoff = gap_at(mu_tilde, species, pot, q_b, e_ref, half)?;
            let gap_cutoff_minus_two = gap_at(mu_tilde, species, pot, q_b, e_ref, minus_two)?;
            let drift = if gap > 0.0 { (gap - gap_half_cutoff).abs() / gap } else { 0.0 };
            Ok(BdgGap {
                family,
                n,
                q_n,
                u_n: u,
                mu_tilde,
                q_b,
                gap,
                cutoff,
                gap_half_cutoff,
                gap_cutoff_minus_two,
                drift,
                converged: drift < CONVERGENCE_TOLERANCE || gap < 1e-10 * e_ref,
            })
        })
        .collect()
}

/// Bands on a Bloch-momentum grid plus the zone-edge gaps.
pub fn solve_bdg_bands(
    mu_tilde: f64,
    species: &AtomSpecies,
    pot: &LateralPotential,
    q_grid: &[f64],
    cutoff: usize,
) -> Result<BdgBands> {
    let lattice = BlochLattice::for_potential(pot)?;
    let bands = q_grid
        .par_iter()
        .map(|&q| solve_bdg(&BdgProblem::new(mu_tilde, species, pot, q, cutoff)).map(|v| positive_eigenvalues(&v)))
        .collect::<Result<Vec<_>>>()?;
    let gaps = bdg_gaps(mu_tilde, species, pot, cutoff)?;
    Ok(BdgBands {
        q_b: q_grid.to_vec(),
        bands,
        cutoff,
        lattice,
        gaps,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRow {
    pub family: usize,
    pub n: usize,
    pub gap_perturbative: f64,
    pub gap_numeric: f64,
    pub relative_deviation: f64,
    pub u_over_e_b: f64,
    pub tolerance: f64,
    /// `U/E_B` at or below the perturbative threshold.
    pub within_regime: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleComparison {
    pub rows: Vec<OracleRow>,
    pub pass: bool,
}

/// `max(0.5%, 5 |U| / E_B)`.
pub fn oracle_tolerance(u_over_e_b: f64) -> f64 {
    (5.0 * u_over_e_b).max(0.005)
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

/// Compare first-order gaps with BdG gaps computed for the same system.
pub fn oracle_compare(pert: &GapReport, numeric: &[BdgGap]) -> Result<OracleComparison> {
    let mut rows = Vec::with_capacity(pert.entries.len());
    for e in &pert.entries {
        let num = numeric
            .iter()
            .find(|g| g.family == e.family && g.n == e.n)
            .ok_or_else(|| Error::Contract(format!("no BdG gap for family {}, n = {}", e.family, e.n)))?;
        if !same(num.mu_tilde, pert.mu_tilde) || !same(num.q_n, e.q_n) || !same(num.u_n, e.u_n) {
            return Err(Error::Contract(format!(
                "family {}, n = {}: perturbative (mu={:e}, q={:e}, U={:e}) and BdG (mu={:e}, q={:e}, U={:e}) \
                 describe different systems",
                e.family, e.n, pert.mu_tilde, e.q_n, e.u_n, num.mu_tilde, num.q_n, num.u_n
            )));
        }
        let u_over_e_b = e.u_n.abs() / e.e_b;
        let tolerance = oracle_tolerance(u_over_e_b);
        let relative_deviation = if e.gap > 0.0 { (num.gap - e.gap).abs() / e.gap } else { 0.0 };
        let within_regime = u_over_e_b <= PERTURBATIVE_WARN_RATIO;
        rows.push(OracleRow {
            family: e.family,
            n: e.n,
            gap_perturbative: e.gap,
            gap_numeric: num.gap,
            relative_deviation,
            u_over_e_b,
            tolerance,
            within_regime,
            pass: within_regime && relative_deviation <= tolerance,
        });
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(OracleComparison { rows, pass })
}
