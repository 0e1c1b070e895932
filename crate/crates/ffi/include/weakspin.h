#ifndef WEAKSPIN_H
#define WEAKSPIN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible call.
typedef enum WsStatus {
  WS_STATUS_OK = 0,
  WS_STATUS_NULL_POINTER = 1,
  WS_STATUS_INVALID_ARGUMENT = 2,
  WS_STATUS_CONFIG = 3,
  WS_STATUS_ORTHOGONAL = 4,
  WS_STATUS_POSTSELECTION_IMPOSSIBLE = 5,
  WS_STATUS_SINGULAR = 6,
  WS_STATUS_BUFFER_TOO_SMALL = 7,
  WS_STATUS_NOT_FOUND = 8,
  WS_STATUS_INTERNAL = 9,
} WsStatus;

typedef enum WsScenarioKind {
  WS_SCENARIO_KIND_THREE_BOX = 0,
  WS_SCENARIO_KIND_CHESHIRE = 1,
} WsScenarioKind;

// Opaque report handle.
typedef struct WsReport WsReport;

// Opaque scenario handle.
typedef struct WsScenario WsScenario;

typedef struct WsComplex {
  double re;
  double im;
} WsComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread ("" after a success).
// The pointer stays valid until the next call into the library on the same
// thread.
const char *ws_last_error(void);

// Library version as a static NUL-terminated string.
const char *ws_version(void);

// Built-in scenario at the joint angle solution; `kind` is a
// `WsScenarioKind` value.
//
// # Safety
// `out` must be a valid pointer to writable storage for a handle.
enum WsStatus ws_scenario_default(int kind, struct WsScenario **out);

// Parses a scenario file (TOML text, same format as the command-line tool).
//
// # Safety
// `toml` must be a NUL-terminated string; `out` a valid handle pointer.
enum WsStatus ws_scenario_from_toml(const char *toml, struct WsScenario **out);

// Releases a scenario handle; null is ignored.
//
// # Safety
// `scenario` must come from this library and not be used afterwards.
void ws_scenario_free(struct WsScenario *scenario);

// Resolved angles in radians; `gamma` receives NaN when the scenario has none.
// Any out-pointer may be null.
//
// # Safety
// `scenario` must be a live handle.
enum WsStatus ws_scenario_angles(const struct WsScenario *scenario,
                                 double *alpha,
                                 double *phi,
                                 double *gamma);

// Evaluates every probe, derived quantity and residual of the scenario.
//
// # Safety
// `scenario` must be a live handle; `out` a valid handle pointer.
enum WsStatus ws_scenario_run(const struct WsScenario *scenario, struct WsReport **out);

// Post-selection probability after a rotation `exp(-i eps J_gamma)` at
// `location` ("C0", "C2", "C3" or "C5"); Cheshire scenarios only.
//
// # Safety
// `scenario` must be a live handle, `location` a NUL-terminated string.
enum WsStatus ws_epsilon_rotation_probability(const struct WsScenario *scenario,
                                              const char *location,
                                              double eps,
                                              double *out);

// # Safety
// `report` must come from this library and not be used afterwards.
void ws_report_free(struct WsReport *report);

// # Safety
// `report` must be a live handle.
enum WsStatus ws_report_postselection_probability(const struct WsReport *report, double *out);

// Largest residual modulus among the scenario's active conditions.
//
// # Safety
// `report` must be a live handle.
enum WsStatus ws_report_max_residual(const struct WsReport *report, double *out);

// Number of probe rows.
//
// # Safety
// `report` must be a live handle.
enum WsStatus ws_report_probe_count(const struct WsReport *report, size_t *out);

// Probe `index`: weak value and spatial overlap factor (either may be null).
//
// # Safety
// `report` must be a live handle.
enum WsStatus ws_report_probe(const struct WsReport *report,
                              size_t index,
                              struct WsComplex *value,
                              double *overlap);

// Copies the label of probe `index` (e.g. "Pi_A") into `buf` as a
// NUL-terminated string. `needed` (optional) receives the buffer size
// required, terminator included; a short buffer yields `BufferTooSmall`.
//
// # Safety
// `buf` must point to `len` writable bytes (or be null when `len` is 0).
enum WsStatus ws_report_probe_label(const struct WsReport *report,
                                    size_t index,
                                    char *buf,
                                    size_t len,
                                    size_t *needed);

// Weak value by label, searching probes first and then derived quantities
// ("Pi_Bbar", "Pi_C").
//
// # Safety
// `report` must be a live handle, `label` a NUL-terminated string.
enum WsStatus ws_report_lookup(const struct WsReport *report,
                               const char *label,
                               struct WsComplex *out);

// Joint solution of both path conditions, in radians.
//
// # Safety
// Out-pointers must be valid.
enum WsStatus ws_joint_solution(double *alpha, double *phi);

// All φ in [0, 2π) solving condition 1 at `alpha`. `count` receives the
// number of roots; if it exceeds `capacity` nothing is copied and
// `BufferTooSmall` is returned.
//
// # Safety
// `roots` must point to `capacity` writable doubles (may be null if 0).
enum WsStatus ws_solve_phi(double alpha, double *roots, size_t capacity, size_t *count);

// `<post|O|pre> / <post|pre>` for raw amplitudes in the (+1, 0, -1) basis
// and a row-major Hermitian 3x3 `observable`. States are normalized first.
//
// # Safety
// `pre` and `post` must point to 3 values, `observable` to 9.
enum WsStatus ws_weak_value(const struct WsComplex *pre,
                            const struct WsComplex *post,
                            const struct WsComplex *observable,
                            struct WsComplex *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WEAKSPIN_H */
