//! Band gaps opened in the Bogoliubov spectrum of an elongated condensate by the
//! lateral Casimir-Polder potential of a corrugated surface, and the Bragg
//! spectroscopy signals that reveal them.
//!
//! The pipeline runs `surface` (Fourier coefficients of the lateral potential)
//! → `quasi1d` (condensate parameters) → `spectrum` (first-order gaps) with
//! `bdg` as the exact numerical check, and `bragg` for the observables.
//! `scenario` wires the pieces to the `casimir-bec` command line.

pub mod bdg;
pub mod bragg;
pub mod config;
pub mod error;
pub mod output;
pub mod physics;
pub mod quasi1d;
pub mod scenario;
pub mod spectrum;
pub mod surface;
pub mod validate;

pub use error::{Error, Result};
