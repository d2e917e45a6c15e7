#ifndef CASIMIR_BEC_H
#define CASIMIR_BEC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CasimirStatus {
  CASIMIR_STATUS_OK = 0,
  CASIMIR_STATUS_NULL_POINTER = 1,
  CASIMIR_STATUS_INVALID_STRING = 2,
  CASIMIR_STATUS_CONFIG = 3,
  CASIMIR_STATUS_DOMAIN = 4,
  CASIMIR_STATUS_EXTRAPOLATION = 5,
  CASIMIR_STATUS_UNSUPPORTED = 6,
  CASIMIR_STATUS_INSTABILITY = 7,
  CASIMIR_STATUS_CONTRACT = 8,
  CASIMIR_STATUS_IO = 9,
  CASIMIR_STATUS_NOT_FOUND = 10,
  CASIMIR_STATUS_VALIDATION_FAILED = 11,
  CASIMIR_STATUS_INTERNAL = 12,
} CasimirStatus;

// Opaque prepared scenario.
typedef struct CasimirSystem CasimirSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Prepare the scenario described by the configuration file at `path`.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a writable pointer.
enum CasimirStatus casimir_system_from_config(const char *path, struct CasimirSystem **out);

// Prepare the built-in 10⁴-atom benchmark scenario.
//
// # Safety
// `out` must be a writable pointer.
enum CasimirStatus casimir_system_benchmark(struct CasimirSystem **out);

// Release a handle. Null is ignored.
//
// # Safety
// `sys` must come from this library and not have been freed.
void casimir_system_free(struct CasimirSystem *sys);

// Effective chemical potential μ̃ in Hz.
//
// # Safety
// `sys` must be a live handle and `out` writable.
enum CasimirStatus casimir_mu_tilde_hz(const struct CasimirSystem *sys, double *out);

// First-order gap at zone edge `n` of corrugation family `family`, Hz.
//
// # Safety
// `sys` must be a live handle and `out` writable.
enum CasimirStatus casimir_gap_hz(const struct CasimirSystem *sys,
                                  uintptr_t family,
                                  uintptr_t n,
                                  double *out);

// Gap from direct BdG diagonalization with `cutoff` plane waves per side, Hz.
//
// # Safety
// `sys` must be a live handle and `out` writable.
enum CasimirStatus casimir_bdg_gap_hz(const struct CasimirSystem *sys,
                                      uintptr_t family,
                                      uintptr_t n,
                                      uintptr_t cutoff,
                                      double *out);

// Signed lateral potential coefficient `U_n` of family `family`, Hz.
//
// # Safety
// `sys` must be a live handle and `out` writable.
enum CasimirStatus casimir_lateral_coefficient_hz(const struct CasimirSystem *sys,
                                                  uintptr_t family,
                                                  uintptr_t n,
                                                  double *out);

// Homogeneous Bogoliubov energy at `q` rad/m, Hz.
//
// # Safety
// `sys` must be a live handle and `out` writable.
enum CasimirStatus casimir_bogoliubov_energy_hz(const struct CasimirSystem *sys,
                                                double q,
                                                double *out);

// `T_q / E_B(q)` at `q` rad/m.
//
// # Safety
// `sys` must be a live handle and `out` writable.
enum CasimirStatus casimir_suppression_factor(const struct CasimirSystem *sys,
                                              double q,
                                              double *out);

// Run a command-line command (`potential`, `spectrum`, `bdg`, `dsf`,
// `bragg` or `validate`) writing its files into `out_dir`. `config_path`
// may be null for `validate`.
//
// # Safety
// String arguments must be NUL-terminated or, where allowed, null.
enum CasimirStatus casimir_run_command(const char *command,
                                       const char *config_path,
                                       const char *out_dir);

// Message for the most recent failure on this thread, empty after success.
// The pointer stays valid until the next call into this library.
const char *casimir_last_error_message(void);

// Library version, static storage.
const char *casimir_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CASIMIR_BEC_H */
