//! C interface to `casimir-bec`.
//!
//! A `CasimirSystem` handle holds one prepared scenario (condensate, lateral
//! potential, first-order gaps). Every fallible call returns a
//! `CasimirStatus`; on failure `casimir_last_error_message` describes the
//! cause. Energies cross the boundary as frequencies `E / 2πħ` in Hz.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use casimir_bec::bdg::bdg_gaps;
use casimir_bec::config::parse_config;
use casimir_bec::physics::energy_to_frequency;
use casimir_bec::quasi1d::bogoliubov_dispersion;
use casimir_bec::scenario::{prepare, run_scenario, Command, Setup};
use casimir_bec::spectrum::suppression_factor;
use casimir_bec::validate::{benchmark_config, run_validate};
use casimir_bec::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CasimirStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidString = 2,
    Config = 3,
    Domain = 4,
    Extrapolation = 5,
    Unsupported = 6,
    Instability = 7,
    Contract = 8,
    Io = 9,
    NotFound = 10,
    ValidationFailed = 11,
    Internal = 12,
}

/// Opaque prepared scenario.
pub struct CasimirSystem {
    setup: Setup,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).unwrap_or_default());
}

fn status_of(err: &Error) -> CasimirStatus {
    match err {
        Error::Config(_) => CasimirStatus::Config,
        Error::Domain(_) => CasimirStatus::Domain,
        Error::Extrapolation(_) => CasimirStatus::Extrapolation,
        Error::Unsupported(_) => CasimirStatus::Unsupported,
        Error::Instability(_) => CasimirStatus::Instability,
        Error::Contract(_) => CasimirStatus::Contract,
        Error::Io { .. } => CasimirStatus::Io,
        Error::Internal(_) => CasimirStatus::Internal,
    }
}

type Outcome<T> = Result<T, (CasimirStatus, String)>;

fn lift<T>(r: casimir_bec::Result<T>) -> Outcome<T> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

/// Run `f`, record any error, and translate panics into `Internal`.
fn guard(f: impl FnOnce() -> Outcome<()>) -> CasimirStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            CasimirStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside casimir-bec");
            CasimirStatus::Internal
        }
    }
}

unsafe fn text<'a>(s: *const c_char, what: &str) -> Outcome<&'a str> {
    if s.is_null() {
        return Err((CasimirStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| (CasimirStatus::InvalidString, format!("{what} is not valid UTF-8")))
}

unsafe fn system<'a>(sys: *const CasimirSystem) -> Outcome<&'a Setup> {
    sys.as_ref()
        .map(|s| &s.setup)
        .ok_or((CasimirStatus::NullPointer, "system handle is null".into()))
}

unsafe fn store<T>(out: *mut T, value: T) -> Outcome<()> {
    if out.is_null() {
        return Err((CasimirStatus::NullPointer, "output pointer is null".into()));
    }
    *out = value;
    Ok(())
}

fn boxed(setup: Setup) -> *mut CasimirSystem {
    Box::into_raw(Box::new(CasimirSystem { setup }))
}

/// Prepare the scenario described by the configuration file at `path`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn casimir_system_from_config(path: *const c_char, out: *mut *mut CasimirSystem) -> CasimirStatus {
    guard(|| {
        if out.is_null() {
            return Err((CasimirStatus::NullPointer, "output pointer is null".into()));
        }
        let path = text(path, "config path")?;
        let config = parse_config(Path::new(path)).map_err(|e| (CasimirStatus::Config, e.to_string()))?;
        let setup = lift(prepare(&config))?;
        *out = boxed(setup);
        Ok(())
    })
}

/// Prepare the built-in 10⁴-atom benchmark scenario.
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn casimir_system_benchmark(out: *mut *mut CasimirSystem) -> CasimirStatus {
    guard(|| {
        if out.is_null() {
            return Err((CasimirStatus::NullPointer, "output pointer is null".into()));
        }
        *out = boxed(lift(prepare(&benchmark_config()))?);
        Ok(())
    })
}

/// Release a handle. Null is ignored.
///
/// # Safety
/// `sys` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn casimir_system_free(sys: *mut CasimirSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Effective chemical potential μ̃ in Hz.
///
/// # Safety
/// `sys` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn casimir_mu_tilde_hz(sys: *const CasimirSystem, out: *mut f64) -> CasimirStatus {
    guard(|| {
        let s = system(sys)?;
        store(out, energy_to_frequency(s.params.mu_tilde))
    })
}

/// First-order gap at zone edge `n` of corrugation family `family`, Hz.
///
/// # Safety
/// `sys` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn casimir_gap_hz(sys: *const CasimirSystem, family: usize, n: usize, out: *mut f64) -> CasimirStatus {
    guard(|| {
        let s = system(sys)?;
        let e = s
            .gaps
            .find(family, n)
            .ok_or_else(|| (CasimirStatus::NotFound, format!("no gap for family {family}, n = {n}")))?;
        store(out, energy_to_frequency(e.gap))
    })
}

/// Gap from direct BdG diagonalization with `cutoff` plane waves per side, Hz.
///
/// # Safety
/// `sys` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn casimir_bdg_gap_hz(
    sys: *const CasimirSystem,
    family: usize,
    n: usize,
    cutoff: usize,
    out: *mut f64,
) -> CasimirStatus {
    guard(|| {
        let s = system(sys)?;
        let gaps = lift(bdg_gaps(s.params.mu_tilde, &s.config.species, &s.potential, cutoff))?;
        let g = gaps
            .iter()
            .find(|g| g.family == family && g.n == n)
            .ok_or_else(|| (CasimirStatus::NotFound, format!("no BdG gap for family {family}, n = {n}")))?;
        store(out, energy_to_frequency(g.gap))
    })
}

/// Signed lateral potential coefficient `U_n` of family `family`, Hz.
///
/// # Safety
/// `sys` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn casimir_lateral_coefficient_hz(
    sys: *const CasimirSystem,
    family: usize,
    n: usize,
    out: *mut f64,
) -> CasimirStatus {
    guard(|| {
        let s = system(sys)?;
        let u = s
            .potential
            .series
            .get(family)
            .and_then(|f| if n >= 1 { f.coefficients.get(n - 1) } else { None })
            .ok_or_else(|| (CasimirStatus::NotFound, format!("no coefficient for family {family}, n = {n}")))?;
        store(out, energy_to_frequency(*u))
    })
}

/// Homogeneous Bogoliubov energy at `q` rad/m, Hz.
///
/// # Safety
/// `sys` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn casimir_bogoliubov_energy_hz(sys: *const CasimirSystem, q: f64, out: *mut f64) -> CasimirStatus {
    guard(|| {
        let s = system(sys)?;
        store(out, energy_to_frequency(bogoliubov_dispersion(q, s.params.mu_tilde, &s.config.species)))
    })
}

/// `T_q / E_B(q)` at `q` rad/m.
///
/// # Safety
/// `sys` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn casimir_suppression_factor(sys: *const CasimirSystem, q: f64, out: *mut f64) -> CasimirStatus {
    guard(|| {
        let s = system(sys)?;
        store(out, suppression_factor(q, s.params.mu_tilde, &s.config.species))
    })
}

/// Run a command-line command (`potential`, `spectrum`, `bdg`, `dsf`,
/// `bragg` or `validate`) writing its files into `out_dir`. `config_path`
/// may be null for `validate`.
///
/// # Safety
/// String arguments must be NUL-terminated or, where allowed, null.
#[no_mangle]
pub unsafe extern "C" fn casimir_run_command(
    command: *const c_char,
    config_path: *const c_char,
    out_dir: *const c_char,
) -> CasimirStatus {
    guard(|| {
        let name = text(command, "command")?;
        let out = Path::new(text(out_dir, "output directory")?);
        if name == "validate" {
            let report = lift(run_validate(out))?;
            if !report.pass {
                let failed: Vec<&str> = report.failures().map(|r| r.quantity.as_str()).collect();
                return Err((CasimirStatus::ValidationFailed, format!("failed rows: {}", failed.join("; "))));
            }
            return Ok(());
        }
        let command = match name {
            "potential" => Command::Potential,
            "spectrum" => Command::Spectrum,
            "bdg" => Command::Bdg,
            "dsf" => Command::Dsf,
            "bragg" => Command::Bragg,
            other => return Err((CasimirStatus::Unsupported, format!("unknown command '{other}'"))),
        };
        let path = text(config_path, "config path")?;
        let config = parse_config(Path::new(path)).map_err(|e| (CasimirStatus::Config, e.to_string()))?;
        lift(run_scenario(&config, command, out)).map(|_| ())
    })
}

/// Message for the most recent failure on this thread, empty after success.
/// The pointer stays valid until the next call into this library.
#[no_mangle]
pub extern "C" fn casimir_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn casimir_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    #[test]
    fn null_arguments_are_reported() {
        unsafe {
            let mut v = 0.0;
            assert_eq!(casimir_mu_tilde_hz(ptr::null(), &mut v), CasimirStatus::NullPointer);
            assert_eq!(casimir_system_benchmark(ptr::null_mut()), CasimirStatus::NullPointer);
            let msg = CStr::from_ptr(casimir_last_error_message()).to_str().unwrap();
            assert!(msg.contains("null"));
        }
    }

    #[test]
    fn status_codes_are_stable() {
        assert_eq!(CasimirStatus::Ok as i32, 0);
        assert_eq!(CasimirStatus::Config as i32, 3);
        assert_eq!(CasimirStatus::ValidationFailed as i32, 11);
    }
}
