//! Bragg-spectroscopy observables.
//!
//! Spectra are stored as densities per unit energy (1/J, arbitrary overall
//! scale) together with the weight `∫ S dE` of every frequency bin. Bin
//! weights are integrated exactly in position space, so the integrable
//! inverse-square-root divergence at the trap centre never enters a quadrature.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::physics::{AtomSpecies, HBAR};
use crate::quasi1d::{bogoliubov_dispersion, Quasi1DParams};
use crate::spectrum::suppression_factor;
use crate::surface::LateralPotential;

/// Uniform grid of bin centres, rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OmegaGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl OmegaGrid {
    pub fn new(min: f64, max: f64, points: usize) -> Result<Self> {
        if points < 2 || !(max > min) || !min.is_finite() || !max.is_finite() {
            return Err(Error::domain(format!("bad omega grid [{min}, {max}] with {points} points")));
        }
        Ok(Self { min, max, points })
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.points - 1) as f64
    }

    pub fn value(&self, i: usize) -> f64 {
        self.min + i as f64 * self.step()
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.value(i)).collect()
    }

    /// Index of the bin containing ω, if any.
    pub fn bin_of(&self, omega: f64) -> Option<usize> {
        let i = ((omega - self.min) / self.step() + 0.5).floor();
        (i >= 0.0 && (i as usize) < self.points).then_some(i as usize)
    }

    /// The grid with twice the resolution and the same end points.
    pub fn refined(&self) -> Self {
        Self { points: 2 * self.points - 1, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Resonance {
    /// `E(x = 0, q)`, J.
    pub energy: f64,
    /// rad/s
    pub omega: f64,
    /// Bin holding the divergence; its sample is capped.
    pub bin: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DsfBranch {
    pub label: String,
    /// S per unit energy at the bin centres, 1/J.
    pub samples: Vec<f64>,
    /// `∫ S dE` over each bin.
    pub weights: Vec<f64>,
    /// Energy range `[E(l/2), E(0)]`, J.
    pub support: (f64, f64),
    pub resonance: Resonance,
}

impl DsfBranch {
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DsfKind {
    Homogeneous,
    Lda,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DsfSpectrum {
    /// rad/m
    pub q: f64,
    pub grid: OmegaGrid,
    pub kind: DsfKind,
    pub branches: Vec<DsfBranch>,
    pub warnings: Vec<String>,
}

impl DsfSpectrum {
    /// Sum of the branch densities at each bin, 1/J.
    pub fn total_samples(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.points];
        for b in &self.branches {
            for (o, s) in out.iter_mut().zip(&b.samples) {
                *o += s;
            }
        }
        out
    }

    pub fn total_weights(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.points];
        for b in &self.branches {
            for (o, w) in out.iter_mut().zip(&b.weights) {
                *o += w;
            }
        }
        out
    }

    pub fn total_weight(&self) -> f64 {
        self.branches.iter().map(DsfBranch::total_weight).sum()
    }

    /// Bins flagged as resonances.
    pub fn resonance_bins(&self) -> Vec<usize> {
        self.branches.iter().filter_map(|b| b.resonance.bin).collect()
    }
}

/// Homogeneous condensate: `S = (N T_q / E_B) δ(ħω − E_B)`, one bin.
pub fn dsf_homogeneous(q: f64, grid: OmegaGrid, params: &Quasi1DParams, species: &AtomSpecies) -> Result<DsfSpectrum> {
    let e_b = bogoliubov_dispersion(q, params.mu_tilde, species);
    let omega = e_b / HBAR;
    let bin = grid.bin_of(omega).ok_or_else(|| {
        Error::domain(format!(
            "omega grid [{:e}, {:e}] rad/s misses the resonance at {omega:e} rad/s",
            grid.min, grid.max
        ))
    })?;
    let weight = params.atom_number * species.kinetic_energy(q) / e_b;
    let mut samples = vec![0.0; grid.points];
    let mut weights = vec![0.0; grid.points];
    weights[bin] = weight;
    samples[bin] = weight / (HBAR * grid.step());
    Ok(DsfSpectrum {
        q,
        grid,
        kind: DsfKind::Homogeneous,
        branches: vec![DsfBranch {
            label: "single".into(),
            samples,
            weights,
            support: (e_b, e_b),
            resonance: Resonance { energy: e_b, omega, bin: Some(bin) },
        }],
        warnings: Vec::new(),
    })
}

/// `E⁽⁰⁾(x, q) = √(T² + 2Tμ̃[1 − (2x/l)²])`.
fn local_unperturbed(s: f64, t: f64, mu: f64) -> f64 {
    (t * t + 2.0 * t * mu * (1.0 - s * s)).sqrt()
}

/// Branch sign: +1 upper, −1 lower, 0 for the unperturbed spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    Lower,
    Upper,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Lower => -1.0,
            Branch::Upper => 1.0,
        }
    }
}

/// `E±(x, q) = E⁽⁰⁾(x, q) ± T_q |U| / 2E⁽⁰⁾(x, q)`.
pub fn local_spectrum(x: f64, q: f64, params: &Quasi1DParams, u: f64, branch: Branch, species: &AtomSpecies) -> Result<f64> {
    let half = params.half_length;
    if x.abs() > half * (1.0 + 1e-12) {
        return Err(Error::domain(format!("|x| = {:e} m outside the condensate half-length {half:e} m", x.abs())));
    }
    let t = species.kinetic_energy(q);
    let e0 = local_unperturbed((x / half).min(1.0).max(-1.0), t, params.mu_tilde);
    Ok(e0 + branch.sign() * t * u.abs() / (2.0 * e0))
}

/// Precomputed pieces of one LDA branch in the scaled coordinate `s = 2x/l ∈ [0, 1]`.
struct LdaBranch {
    t: f64,
    mu: f64,
    c: f64,
    half: f64,
    n_peak: f64,
    /// Fraction of the local weight carried by this branch.
    share: f64,
}

impl LdaBranch {
    fn energy(&self, s: f64) -> f64 {
        let e0 = local_unperturbed(s, self.t, self.mu);
        e0 + self.c / e0
    }

    /// |dE/dx|, J/m.
    fn slope(&self, s: f64) -> f64 {
        let e0 = local_unperturbed(s, self.t, self.mu);
        let de0 = -2.0 * self.t * self.mu * s / (e0 * self.half);
        (de0 * (1.0 - self.c / (e0 * e0))).abs()
    }

    /// Local weight `n₁ T / E⁽⁰⁾` times the branch share, 1/m.
    fn weight(&self, s: f64) -> f64 {
        let e0 = local_unperturbed(s, self.t, self.mu);
        self.share * self.n_peak * (1.0 - s * s).max(0.0) * self.t / e0
    }

    /// Solve `E(s) = e` on `[0, 1]`; E decreases in s.
    fn root(&self, e: f64) -> Result<f64> {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let (e_top, e_bottom) = (self.energy(0.0), self.energy(1.0));
        if e >= e_top {
            return Ok(0.0);
        }
        if e <= e_bottom {
            return Ok(1.0);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.energy(mid) > e {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 {
                return Ok(0.5 * (lo + hi));
            }
        }
        Err(Error::Internal(format!(
            "LDA root for E = {e:e} J not bracketed to 1e-15 after 200 bisections: [{lo}, {hi}], \
             E(0) = {e_top:e}, E(1) = {e_bottom:e}"
        )))
    }

    /// `S = 2 w / |dE/dx|` at energy e, 1/J; 0 outside the support.
    fn density(&self, e: f64) -> Result<f64> {
        if e >= self.energy(0.0) || e <= self.energy(1.0) {
            return Ok(0.0);
        }
        let s = self.root(e)?;
        Ok(2.0 * self.weight(s) / self.slope(s))
    }

    /// `2 ∫ w dx` over `s ∈ [a, b]`, 16-panel Simpson.
    fn integrate(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let n = 16;
        let h = (b - a) / n as f64;
        let mut sum = self.weight(a) + self.weight(b);
        for i in 1..n {
            let f = if i % 2 == 1 { 4.0 } else { 2.0 };
            sum += f * self.weight(a + i as f64 * h);
        }
        2.0 * self.half * sum * h / 3.0
    }
}

/// LDA spectrum of the trapped condensate at wavevector q.
///
/// `u` is the Fourier coefficient for the zone edge nearest q. Each axial
/// slice contributes `n₁(x) T_q / E⁽⁰⁾(x, q)` at its local energy; with u ≠ 0 the
/// two branches carry half the local weight each. A mirror factor 2 accounts
/// for the root at −x*.
pub fn dsf_lda(q: f64, grid: OmegaGrid, params: &Quasi1DParams, u: f64, species: &AtomSpecies) -> Result<DsfSpectrum> {
    let t = species.kinetic_energy(q);
    if !(t > 0.0) {
        return Err(Error::domain("LDA spectrum needs q != 0"));
    }
    let mu = params.mu_tilde;
    let mut warnings = Vec::new();
    let branches: Vec<(String, f64, f64)> = if u == 0.0 {
        vec![("single".into(), 0.0, 1.0)]
    } else {
        let c = 0.5 * t * u.abs();
        if c >= t * t {
            warnings.push(format!(
                "T|U|/2 = {c:e} J exceeds T^2: upper branch not monotone at the cloud edge"
            ));
        }
        vec![("lower".into(), -c, 0.5), ("upper".into(), c, 0.5)]
    };
    let step_e = HBAR * grid.step();
    let mut out = Vec::with_capacity(branches.len());
    for (label, c, share) in branches {
        let b = LdaBranch {
            t,
            mu,
            c,
            half: params.half_length,
            n_peak: params.peak_density(),
            share,
        };
        let (e_lo, e_hi) = (b.energy(1.0), b.energy(0.0));
        if e_hi < HBAR * (grid.min - 0.5 * grid.step()) || e_lo > HBAR * (grid.max + 0.5 * grid.step()) {
            return Err(Error::domain(format!("{label} branch lies outside the omega grid")));
        }
        if e_lo < HBAR * (grid.min - 0.5 * grid.step()) || e_hi > HBAR * (grid.max + 0.5 * grid.step()) {
            warnings.push(format!("{label} branch support extends beyond the omega grid; weight truncated"));
        }
        let res_bin = grid.bin_of(e_hi / HBAR);
        // Edge positions of every bin boundary.
        let edges: Vec<f64> = (0..=grid.points)
            .map(|i| HBAR * (grid.min + (i as f64 - 0.5) * grid.step()))
            .map(|e| b.root(e.clamp(e_lo, e_hi)))
            .collect::<Result<_>>()?;
        let mut samples = Vec::with_capacity(grid.points);
        let mut weights = Vec::with_capacity(grid.points);
        for i in 0..grid.points {
            // s decreases as energy increases.
            weights.push(b.integrate(edges[i + 1], edges[i]));
            let e = HBAR * grid.value(i);
            let sample = if Some(i) == res_bin {
                let capped = e_hi - 0.5 * step_e;
                if capped > e_lo {
                    b.density(capped)?
                } else {
                    weights[i] / step_e
                }
            } else {
                b.density(e)?
            };
            samples.push(sample);
        }
        out.push(DsfBranch {
            label,
            samples,
            weights,
            support: (e_lo, e_hi),
            resonance: Resonance { energy: e_hi, omega: e_hi / HBAR, bin: res_bin },
        });
    }
    Ok(DsfSpectrum { q, grid, kind: DsfKind::Lda, branches: out, warnings })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BraggPulse {
    /// rad/m
    pub q: f64,
    /// Detuning ω₁ − ω₂, rad/s.
    pub omega: f64,
    /// Overall response scale; enters squared.
    pub v_b: f64,
    /// s
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BraggOptions {
    pub time_points: usize,
    /// Integrate `dX/dt = P_X / (N m)` for the trap term.
    pub closure: bool,
    /// Initial centre-of-mass offset, m.
    pub displacement: f64,
}

impl Default for BraggOptions {
    fn default() -> Self {
        Self { time_points: 401, closure: false, displacement: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BraggSignal {
    pub t: Vec<f64>,
    pub dpdt: Vec<f64>,
    pub p: Vec<f64>,
    pub x_cm: Vec<f64>,
    pub trap: Vec<f64>,
    pub casimir: Vec<f64>,
    pub drive: Vec<f64>,
    pub warnings: Vec<String>,
}

/// The spectra at +q and −q that drive the momentum transfer.
#[derive(Debug, Clone, Copy)]
pub struct DsfPair<'a> {
    pub plus_q: &'a DsfSpectrum,
    pub minus_q: &'a DsfSpectrum,
}

impl<'a> DsfPair<'a> {
    pub fn new(plus_q: Option<&'a DsfSpectrum>, minus_q: Option<&'a DsfSpectrum>, q: f64) -> Result<Self> {
        let (Some(p), Some(m)) = (plus_q, minus_q) else {
            return Err(Error::Contract("momentum transfer needs the spectra at both +q and -q".into()));
        };
        let tol = 1e-12 * q.abs();
        if (p.q - q).abs() > tol || (m.q + q).abs() > tol {
            return Err(Error::Contract(format!(
                "spectra at q = {:e}, {:e} rad/m do not match the pulse at ±{q:e} rad/m",
                p.q, m.q
            )));
        }
        Ok(Self { plus_q: p, minus_q: m })
    }

    /// `(ω_i, W_i)` Stokes lines and `(ω_i, W_i)` anti-Stokes lines.
    fn lines(&self) -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
        let collect = |s: &DsfSpectrum| {
            let w = s.total_weights();
            (0..s.grid.points)
                .filter(|i| w[*i] != 0.0)
                .map(|i| (s.grid.value(i), w[i]))
                .collect::<Vec<_>>()
        };
        (collect(self.plus_q), collect(self.minus_q))
    }
}

/// `sin(Δt)/Δ`.
fn sinc_kernel(delta: f64, t: f64) -> f64 {
    let x = delta * t;
    if x.abs() < 1e-6 {
        t * (1.0 - x * x / 6.0)
    } else {
        (x).sin() / delta
    }
}

/// `∫₀ᵗ sin(Δs)/Δ ds = (1 − cos Δt)/Δ² = 2 sin²(Δt/2)/Δ²`.
fn sinc_kernel_integral(delta: f64, t: f64) -> f64 {
    let x = delta * t;
    if x.abs() < 1e-6 {
        0.5 * t * t * (1.0 - x * x / 12.0)
    } else {
        let s = (0.5 * x).sin();
        2.0 * s * s / (delta * delta)
    }
}

struct Drive {
    scale: f64,
    stokes: Vec<(f64, f64)>,
    anti: Vec<(f64, f64)>,
    omega: f64,
}

impl Drive {
    fn new(pulse: &BraggPulse, pair: &DsfPair) -> Self {
        let (stokes, anti) = pair.lines();
        // S is per unit energy and ∫ dω' = ∫ dE / ħ, which cancels the ħ of ħq.
        Self { scale: 0.5 * pulse.q * pulse.v_b * pulse.v_b, stokes, anti, omega: pulse.omega }
    }

    /// Force at time t. Anti-Stokes lines enter at `ω' = −ω_i`.
    fn force(&self, t: f64) -> f64 {
        let s: f64 = self.stokes.iter().map(|(w, a)| a * sinc_kernel(self.omega - w, t)).sum();
        let a: f64 = self.anti.iter().map(|(w, a)| a * sinc_kernel(self.omega + w, t)).sum();
        self.scale * (s - a)
    }

    /// `∫₀ᵗ force`.
    fn momentum(&self, t: f64) -> f64 {
        let s: f64 = self.stokes.iter().map(|(w, a)| a * sinc_kernel_integral(self.omega - w, t)).sum();
        let a: f64 = self.anti.iter().map(|(w, a)| a * sinc_kernel_integral(self.omega + w, t)).sum();
        self.scale * (s - a)
    }
}

/// `∫_{−h}^{h} (1 − y²/h²) cos(κy) dy`.
fn parabola_cosine_transform(kappa: f64, h: f64) -> f64 {
    let u = kappa * h;
    if u.abs() < 1e-3 {
        return 4.0 * h / 3.0 * (1.0 - u * u / 10.0);
    }
    4.0 * (u.sin() - u * u.cos()) / (kappa.powi(3) * h * h)
}

/// `Σ U_n n k_c ∫ n₁(x − x_cm) sin(n k_c x) dx` over the rigidly shifted TF parabola.
pub fn casimir_force(x_cm: f64, params: &Quasi1DParams, pot: &LateralPotential) -> f64 {
    let n_peak = params.peak_density();
    let h = params.half_length;
    pot.series
        .iter()
        .flat_map(|s| {
            s.coefficients.iter().enumerate().map(move |(i, u)| {
                let kappa = (i + 1) as f64 * s.k_c;
                u * kappa * n_peak * (kappa * x_cm).sin() * parabola_cosine_transform(kappa, h)
            })
        })
        .sum()
}

fn trap_force(x_cm: f64, params: &Quasi1DParams) -> f64 {
    -params.atom_number * params.mass * params.omega_x * params.omega_x * x_cm
}

fn validate_pulse(pulse: &BraggPulse, opts: &BraggOptions) -> Result<()> {
    if !(pulse.tau > 0.0 && pulse.tau.is_finite()) {
        return Err(Error::domain(format!("pulse duration must be positive, got {}", pulse.tau)));
    }
    if opts.time_points < 2 {
        return Err(Error::domain("time grid needs at least 2 points"));
    }
    Ok(())
}

/// Momentum transferred by a square Bragg pulse.
///
/// `dP_X/dt = −N m ω_x² X + Σ U_n n k_c ∫ n₁ sin(n k_c x) dx
///            + (ħ q V_B²/2) ∫ dω' [S(q, ω') − S(−q, −ω')] sin((ω − ω')t)/(ω − ω')`
///
/// with X the centre of mass. Without closure X stays at its initial value and
/// P_X is integrated in closed form; with closure `(P_X, X)` is advanced by RK4.
pub fn bragg_signal(
    pulse: &BraggPulse,
    pair: &DsfPair,
    params: &Quasi1DParams,
    pot: &LateralPotential,
    opts: &BraggOptions,
) -> Result<BraggSignal> {
    validate_pulse(pulse, opts)?;
    let drive = Drive::new(pulse, pair);
    let mut warnings: Vec<String> = pair.plus_q.warnings.iter().chain(&pair.minus_q.warnings).cloned().collect();
    if pulse.omega_x_product(params) >= 1.0 {
        warnings.push(format!("tau * omega_x = {:.3} >= 1: LDA picture of the pulse is marginal", pulse.omega_x_product(params)));
    }
    let n = opts.time_points;
    let t: Vec<f64> = (0..n).map(|i| pulse.tau * i as f64 / (n - 1) as f64).collect();
    let nm = params.atom_number * params.mass;
    let x0 = opts.displacement;

    let mut p = Vec::with_capacity(n);
    let mut x = Vec::with_capacity(n);
    if opts.closure {
        let rhs = |ti: f64, pi: f64, xi: f64| {
            let f = trap_force(xi, params) + casimir_force(xi, params, pot) + drive.force(ti);
            (f, pi / nm)
        };
        let (mut pc, mut xc) = (0.0, x0);
        p.push(pc);
        x.push(xc);
        let sub = 16;
        for i in 1..n {
            let h = (t[i] - t[i - 1]) / sub as f64;
            for k in 0..sub {
                let ti = t[i - 1] + k as f64 * h;
                let (k1p, k1x) = rhs(ti, pc, xc);
                let (k2p, k2x) = rhs(ti + 0.5 * h, pc + 0.5 * h * k1p, xc + 0.5 * h * k1x);
                let (k3p, k3x) = rhs(ti + 0.5 * h, pc + 0.5 * h * k2p, xc + 0.5 * h * k2x);
                let (k4p, k4x) = rhs(ti + h, pc + h * k3p, xc + h * k3x);
                pc += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
                xc += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
            }
            p.push(pc);
            x.push(xc);
        }
    } else {
        let static_force = trap_force(x0, params) + casimir_force(x0, params, pot);
        for &ti in &t {
            p.push(static_force * ti + drive.momentum(ti));
            x.push(x0);
        }
    }
    let trap: Vec<f64> = x.iter().map(|&xi| trap_force(xi, params)).collect();
    let casimir: Vec<f64> = x.iter().map(|&xi| casimir_force(xi, params, pot)).collect();
    let drive_f: Vec<f64> = t.iter().map(|&ti| drive.force(ti)).collect();
    let dpdt = (0..n).map(|i| trap[i] + casimir[i] + drive_f[i]).collect();
    Ok(BraggSignal { t, dpdt, p, x_cm: x, trap, casimir, drive: drive_f, warnings })
}

impl BraggPulse {
    fn omega_x_product(&self, params: &Quasi1DParams) -> f64 {
        self.tau * params.omega_x
    }
}

/// Time-averaged force `P_X(τ)/τ` for each detuning in `omegas`.
pub fn bragg_sweep(
    pulse: &BraggPulse,
    omegas: &[f64],
    pair: &DsfPair,
    params: &Quasi1DParams,
    pot: &LateralPotential,
    opts: &BraggOptions,
) -> Result<Vec<f64>> {
    validate_pulse(pulse, opts)?;
    if !opts.closure {
        let x0 = opts.displacement;
        let static_force = trap_force(x0, params) + casimir_force(x0, params, pot);
        return Ok(omegas
            .par_iter()
            .map(|&w| {
                let d = Drive::new(&BraggPulse { omega: w, ..*pulse }, pair);
                static_force + d.momentum(pulse.tau) / pulse.tau
            })
            .collect());
    }
    omegas
        .par_iter()
        .map(|&w| {
            let s = bragg_signal(&BraggPulse { omega: w, ..*pulse }, pair, params, pot, opts)?;
            Ok(s.p[s.p.len() - 1] / pulse.tau)
        })
        .collect()
}

/// `|U_n| = ΔE / F(q_n)`.
pub fn invert_gap(measured_gap: f64, q_n: f64, mu_tilde: f64, species: &AtomSpecies) -> Result<f64> {
    let f = suppression_factor(q_n, mu_tilde, species);
    if !(f > 0.0) {
        return Err(Error::domain(format!("suppression factor vanishes at q = {q_n:e}; gap not invertible")));
    }
    Ok(measured_gap.abs() / f)
}

/// Time-averaged response kernel `(1 − cos Δτ)/(Δ² τ)`; tends to `π δ(Δ)`.
pub fn averaged_kernel(delta: f64, tau: f64) -> f64 {
    sinc_kernel_integral(delta, tau) / tau
}

/// Pulse-limited frequency resolution `2π/τ`, rad/s.
pub fn pulse_resolution(tau: f64) -> f64 {
    2.0 * PI / tau
}
