//! Lateral Casimir-Polder potential above a uniaxially corrugated surface.
//!
//! To first order in the corrugation amplitude, a profile
//! `h(x) = Σ_j h_j cos(j k_c x)` produces a lateral potential
//! `U_L(x) = Σ_j h_j g(j k_c, z) cos(j k_c x)` where `g(k, z)` is the surface
//! response function. Real materials enter either as a scalar conductivity
//! factor η_F on the perfect-reflector response or as an externally computed
//! grid of `g(k, z)` values.
//!
//! Sign convention: `U_n` carries the sign of `g`. The retarded perfect
//! reflector response is negative (attractive), so the coefficient of
//! `cos(n k_c x)` is negative for positive `h_n`. Gap formulas only use `|U_n|`.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::physics::{AtomSpecies, C_LIGHT, HBAR};

/// One corrugation family `Σ_j h_j cos(j k_c x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fundamental {
    /// rad/m
    pub k_c: f64,
    /// `h_1..h_J`, m.
    pub amplitudes: Vec<f64>,
}

impl Fundamental {
    pub fn single(k_c: f64, h: f64) -> Self {
        Self {
            k_c,
            amplitudes: vec![h],
        }
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.k_c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Material {
    Perfect,
    /// Perfect-reflector response scaled by η_F ∈ [0, 1].
    ScalarEta { eta_f: f64 },
    Tabulated { path: PathBuf },
}

impl Material {
    pub fn eta(&self) -> f64 {
        match self {
            Material::Perfect | Material::Tabulated { .. } => 1.0,
            Material::ScalarEta { eta_f } => *eta_f,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceConfig {
    pub fundamentals: Vec<Fundamental>,
    /// Condensate centre-of-mass distance from the mean surface plane, m.
    pub z_cm: f64,
    pub material: Material,
}

impl SurfaceConfig {
    /// Checks hard invariants and returns warnings for soft ones.
    pub fn validate(&self) -> Result<Vec<String>> {
        if !(self.z_cm.is_finite() && self.z_cm > 0.0) {
            return Err(Error::domain(format!("z_cm must be positive, got {}", self.z_cm)));
        }
        if self.fundamentals.is_empty() {
            return Err(Error::domain("surface needs at least one fundamental wavenumber"));
        }
        if let Material::ScalarEta { eta_f } = self.material {
            if !(0.0..=1.0).contains(&eta_f) {
                return Err(Error::domain(format!("eta_F must lie in [0, 1], got {eta_f}")));
            }
        }
        let mut warnings = Vec::new();
        for (i, f) in self.fundamentals.iter().enumerate() {
            if !(f.k_c.is_finite() && f.k_c > 0.0) {
                return Err(Error::domain(format!("fundamental {}: k_c must be positive", i + 1)));
            }
            if let Some(h) = f.amplitudes.iter().find(|h| !(h.is_finite() && **h >= 0.0)) {
                return Err(Error::domain(format!(
                    "fundamental {}: amplitudes must be non-negative, got {h}",
                    i + 1
                )));
            }
            let h_max = f.amplitudes.iter().cloned().fold(0.0, f64::max);
            let smallest_scale = self.z_cm.min(f.period());
            let ratio = h_max / smallest_scale;
            if ratio > FIRST_ORDER_WARN_RATIO {
                warnings.push(format!(
                    "fundamental {}: max h / min(z_cm, λ_c) = {ratio:.3}; first-order expansion in h is marginal",
                    i + 1
                ));
            }
        }
        Ok(warnings)
    }
}

/// Above this `h/min(z, λ_c)` the first-order expansion gets a warning.
pub const FIRST_ORDER_WARN_RATIO: f64 = 0.25;

/// Fourier series of one corrugation family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialSeries {
    pub k_c: f64,
    /// `U_1..U_J` in J, coefficient of `cos(n k_c x)`.
    pub coefficients: Vec<f64>,
}

impl PotentialSeries {
    pub fn harmonic(&self, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        self.coefficients.get(n - 1).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LateralPotential {
    pub series: Vec<PotentialSeries>,
    /// x-independent normal potential at z_cm, J. Only shifts μ̃.
    pub normal_offset: f64,
}

impl LateralPotential {
    pub fn single(k_c: f64, u1: f64) -> Self {
        Self {
            series: vec![PotentialSeries {
                k_c,
                coefficients: vec![u1],
            }],
            normal_offset: 0.0,
        }
    }

    pub fn zero(k_c: f64) -> Self {
        Self::single(k_c, 0.0)
    }

    /// Scale every coefficient by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        for series in &mut out.series {
            for u in &mut series.coefficients {
                *u *= s;
            }
        }
        out
    }

    pub fn primary(&self) -> &PotentialSeries {
        &self.series[0]
    }

    /// Sum of |U_n| over every family; bounds `max_x |U_L(x)|`.
    pub fn abs_sum(&self) -> f64 {
        self.series
            .iter()
            .flat_map(|s| s.coefficients.iter())
            .map(|u| u.abs())
            .sum()
    }

    pub fn is_flat(&self) -> bool {
        self.series
            .iter()
            .all(|s| s.coefficients.iter().all(|u| *u == 0.0))
    }
}

/// `U_L(x) = Σ Σ_n U_n cos(n k_c x)`.
pub fn lateral_eval(pot: &LateralPotential, x: f64) -> f64 {
    pot.series
        .iter()
        .map(|s| {
            s.coefficients
                .iter()
                .enumerate()
                .map(|(i, u)| u * ((i + 1) as f64 * s.k_c * x).cos())
                .sum::<f64>()
        })
        .sum()
}

/// Retarded perfect-reflector response, J/m:
///
/// `g(k, z) = −(3ħc α(0) / 8π² ε₀ z⁵) e^{−Z} (1 + Z + 16Z²/45 + Z³/45)`, `Z = kz`.
///
/// Valid for `z ≫ λ_A`; the caller checks that (see `quasi1d::regime_check`).
pub fn response_perfect(k: f64, z: f64, species: &AtomSpecies) -> Result<f64> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::domain(format!("response needs z > 0, got {z}")));
    }
    if !(k >= 0.0 && k.is_finite()) {
        return Err(Error::domain(format!("response needs k >= 0, got {k}")));
    }
    Ok(perfect_reflector_g(k, z, species.polarizability_over_eps0))
}

fn perfect_reflector_g(k: f64, z: f64, alpha_over_eps0: f64) -> f64 {
    let zz = k * z;
    let prefactor = 3.0 * HBAR * C_LIGHT * alpha_over_eps0 / (8.0 * PI * PI * z.powi(5));
    let poly = 1.0 + zz + 16.0 * zz * zz / 45.0 + zz.powi(3) / 45.0;
    -prefactor * (-zz).exp() * poly
}

#[derive(Debug, Clone, PartialEq)]
pub enum ResponseFunction {
    PerfectReflector { polarizability_over_eps0: f64 },
    Tabulated(TabulatedResponse),
}

impl ResponseFunction {
    pub fn perfect(species: &AtomSpecies) -> Self {
        ResponseFunction::PerfectReflector {
            polarizability_over_eps0: species.polarizability_over_eps0,
        }
    }

    /// The response matching the surface's material, loading a grid if needed.
    pub fn for_surface(surface: &SurfaceConfig, species: &AtomSpecies) -> Result<Self> {
        match &surface.material {
            Material::Tabulated { path } => load_tabulated_response(path).map(ResponseFunction::Tabulated),
            _ => Ok(Self::perfect(species)),
        }
    }

    pub fn provenance(&self) -> &'static str {
        match self {
            ResponseFunction::PerfectReflector { .. } => "perfect-reflector",
            ResponseFunction::Tabulated(_) => "tabulated",
        }
    }

    pub fn eval(&self, k: f64, z: f64) -> Result<f64> {
        match self {
            ResponseFunction::PerfectReflector {
                polarizability_over_eps0,
            } => {
                if !(z > 0.0) || !(k >= 0.0) {
                    return Err(Error::domain(format!("response undefined at k={k}, z={z}")));
                }
                Ok(perfect_reflector_g(k, z, *polarizability_over_eps0))
            }
            ResponseFunction::Tabulated(t) => t.eval(k, z),
        }
    }
}

/// `U_n = η_F h_n g(n k_c, z_cm)` for every supplied `h_n`.
pub fn lateral_coefficients(
    surface: &SurfaceConfig,
    response: &ResponseFunction,
) -> Result<LateralPotential> {
    surface.validate()?;
    let eta = match (&surface.material, response) {
        (Material::Tabulated { .. }, ResponseFunction::PerfectReflector { .. }) => {
            return Err(Error::Contract(
                "tabulated material requires a tabulated response function".into(),
            ))
        }
        (_, ResponseFunction::Tabulated(_)) => 1.0,
        (m, _) => m.eta(),
    };
    let mut series = Vec::with_capacity(surface.fundamentals.len());
    for f in &surface.fundamentals {
        let coefficients = f
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, h)| {
                let k = (i + 1) as f64 * f.k_c;
                Ok(eta * h * response.eval(k, surface.z_cm)?)
            })
            .collect::<Result<Vec<_>>>()?;
        series.push(PotentialSeries {
            k_c: f.k_c,
            coefficients,
        });
    }
    Ok(LateralPotential {
        series,
        normal_offset: 0.0,
    })
}

/// `g(k, z)` sampled on a rectangular grid, bilinearly interpolated.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedResponse {
    pub k: Vec<f64>,
    pub z: Vec<f64>,
    /// Row-major, `values[ik * z.len() + iz]`.
    pub values: Vec<f64>,
    pub source: String,
}

pub const TABULATED_HEADER: [&str; 3] = ["k_radpm", "z_m", "g_Jpm"];

impl TabulatedResponse {
    /// Build from `(k, z, g)` rows ordered k-major (z varies fastest).
    pub fn from_rows(rows: &[(f64, f64, f64)], source: &str) -> Result<Self> {
        let bad = |msg: String| Error::domain(format!("{source}: {msg}"));
        if rows.is_empty() {
            return Err(bad("empty response grid".into()));
        }
        let k0 = rows[0].0;
        let nz = rows.iter().take_while(|r| r.0 == k0).count();
        if nz < 2 || rows.len() % nz != 0 || rows.len() / nz < 2 {
            return Err(bad(format!(
                "{} rows do not form a rectangular grid with at least 2 points per axis",
                rows.len()
            )));
        }
        let z: Vec<f64> = rows[..nz].iter().map(|r| r.1).collect();
        let nk = rows.len() / nz;
        let mut k = Vec::with_capacity(nk);
        for (ik, block) in rows.chunks(nz).enumerate() {
            let kk = block[0].0;
            if block.iter().any(|r| r.0 != kk) {
                return Err(bad(format!("k block {ik} mixes k values; rows must be k-major")));
            }
            for (iz, r) in block.iter().enumerate() {
                if r.1 != z[iz] {
                    return Err(bad(format!("k block {ik} has a different z axis at index {iz}")));
                }
            }
            k.push(kk);
        }
        let strictly_increasing = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]);
        if !strictly_increasing(&k) {
            return Err(bad("k axis is not strictly increasing".into()));
        }
        if !strictly_increasing(&z) {
            return Err(bad("z axis is not strictly increasing".into()));
        }
        if rows.iter().any(|r| !(r.0.is_finite() && r.1.is_finite() && r.2.is_finite())) {
            return Err(bad("non-finite value in grid".into()));
        }
        Ok(Self {
            k,
            z,
            values: rows.iter().map(|r| r.2).collect(),
            source: source.to_string(),
        })
    }

    pub fn eval(&self, k: f64, z: f64) -> Result<f64> {
        let (ik, tk) = locate(&self.k, k).ok_or_else(|| {
            Error::Extrapolation(format!(
                "k = {k:e} rad/m outside [{:e}, {:e}] in {}",
                self.k[0],
                self.k[self.k.len() - 1],
                self.source
            ))
        })?;
        let (iz, tz) = locate(&self.z, z).ok_or_else(|| {
            Error::Extrapolation(format!(
                "z = {z:e} m outside [{:e}, {:e}] in {}",
                self.z[0],
                self.z[self.z.len() - 1],
                self.source
            ))
        })?;
        let nz = self.z.len();
        let at = |i: usize, j: usize| self.values[i * nz + j];
        let lower = at(ik, iz) * (1.0 - tz) + at(ik, iz + 1) * tz;
        let upper = at(ik + 1, iz) * (1.0 - tz) + at(ik + 1, iz + 1) * tz;
        Ok(lower * (1.0 - tk) + upper * tk)
    }
}

/// Cell index and fractional offset of `x` on a strictly increasing axis.
fn locate(axis: &[f64], x: f64) -> Option<(usize, f64)> {
    let n = axis.len();
    if !(x >= axis[0] && x <= axis[n - 1]) {
        return None;
    }
    let i = axis.partition_point(|a| *a <= x).saturating_sub(1).min(n - 2);
    Some((i, (x - axis[i]) / (axis[i + 1] - axis[i])))
}

/// Read a `k_radpm,z_m,g_Jpm` CSV. Lines starting with `#` are comments.
pub fn load_tabulated_response(path: &Path) -> Result<TabulatedResponse> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_tabulated_response(&text, &path.display().to_string())
}

pub fn parse_tabulated_response(text: &str, source: &str) -> Result<TabulatedResponse> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::domain(format!("{source}: missing header")))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols != TABULATED_HEADER {
        return Err(Error::domain(format!(
            "{source}: header must be '{}', got '{header}'",
            TABULATED_HEADER.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::domain(format!(
                "{source}:{}: expected 3 columns, got {}",
                lineno + 1,
                fields.len()
            )));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::domain(format!("{source}:{}: '{s}' is not a number", lineno + 1)))
        };
        rows.push((parse(fields[0])?, parse(fields[1])?, parse(fields[2])?));
    }
    TabulatedResponse::from_rows(&rows, source)
}
