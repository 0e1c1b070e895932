//! C ABI for the weakspin simulator.
//!
//! Conventions:
//! * every fallible function returns a [`WsStatus`]; results come back
//!   through out-pointers, which are left untouched on failure;
//! * [`ws_last_error`] gives a message for the most recent failure on the
//!   calling thread;
//! * handles (`WsScenario`, `WsReport`) are opaque, created by the library
//!   and released with the matching `*_free` function;
//! * angles are radians.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use weakspin::cli::config::RunConfig;
use weakspin::conditions::{joint_solution, solve_phi};
use weakspin::interferometer::{run_scenario, Location, Report, ScenarioConfig};
use weakspin::meter::epsilon_rotation_probability;
use weakspin::spin_algebra::CMatrix3;
use weakspin::weak_values::weak_value;
use weakspin::{Angle, Complex64, Error, Observable, SpinState};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Orthogonal = 4,
    PostselectionImpossible = 5,
    Singular = 6,
    BufferTooSmall = 7,
    NotFound = 8,
    Internal = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WsScenarioKind {
    ThreeBox = 0,
    Cheshire = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct WsComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for WsComplex {
    fn from(z: Complex64) -> Self {
        WsComplex { re: z.re, im: z.im }
    }
}

impl From<WsComplex> for Complex64 {
    fn from(z: WsComplex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

/// Opaque scenario handle.
pub struct WsScenario {
    config: ScenarioConfig,
}

/// Opaque report handle.
pub struct WsReport {
    report: Report,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> WsStatus {
    match err {
        Error::OrthogonalPrePost { .. } => WsStatus::Orthogonal,
        Error::PostselectionImpossible { .. } => WsStatus::PostselectionImpossible,
        Error::SingularAlpha { .. } => WsStatus::Singular,
        Error::Config(_) | Error::GridTooSmall { .. } => WsStatus::Config,
        Error::Probe { source, .. } => status_of(source),
        Error::InvalidProjection(_) | Error::NotHermitian { .. } | Error::ZeroNorm => WsStatus::InvalidArgument,
        Error::Stage { .. } => WsStatus::Internal,
    }
}

struct Fail(WsStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(WsStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> WsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            WsStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            WsStatus::Internal
        }
    }
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn in_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn in_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(WsStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

/// Message for the last failed call on this thread ("" after a success).
/// The pointer stays valid until the next call into the library on the same
/// thread.
#[no_mangle]
pub extern "C" fn ws_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ws_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Built-in scenario at the joint angle solution; `kind` is a
/// `WsScenarioKind` value.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn ws_scenario_default(kind: c_int, out: *mut *mut WsScenario) -> WsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let config = match kind {
            k if k == WsScenarioKind::ThreeBox as c_int => ScenarioConfig::three_box_default(),
            k if k == WsScenarioKind::Cheshire as c_int => ScenarioConfig::cheshire_default(),
            other => return Err(Fail(WsStatus::InvalidArgument, format!("unknown scenario kind {other}"))),
        };
        *out = Box::into_raw(Box::new(WsScenario { config }));
        Ok(())
    })
}

/// Parses a scenario file (TOML text, same format as the command-line tool).
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` a valid handle pointer.
#[no_mangle]
pub unsafe extern "C" fn ws_scenario_from_toml(toml: *const c_char, out: *mut *mut WsScenario) -> WsStatus {
    guard(|| {
        let text = in_str(toml, "toml")?;
        let out = out_ref(out, "out")?;
        let cfg = RunConfig::from_toml(text)?;
        *out = Box::into_raw(Box::new(WsScenario { config: cfg.scenario }));
        Ok(())
    })
}

/// Releases a scenario handle; null is ignored.
///
/// # Safety
/// `scenario` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ws_scenario_free(scenario: *mut WsScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Resolved angles in radians; `gamma` receives NaN when the scenario has none.
/// Any out-pointer may be null.
///
/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ws_scenario_angles(
    scenario: *const WsScenario,
    alpha: *mut f64,
    phi: *mut f64,
    gamma: *mut f64,
) -> WsStatus {
    guard(|| {
        let s = &in_ref(scenario, "scenario")?.config;
        if let Some(a) = alpha.as_mut() {
            *a = s.alpha.radians();
        }
        if let Some(p) = phi.as_mut() {
            *p = s.phi.radians();
        }
        if let Some(g) = gamma.as_mut() {
            *g = s.gamma.map_or(f64::NAN, |g| g.radians());
        }
        Ok(())
    })
}

/// Evaluates every probe, derived quantity and residual of the scenario.
///
/// # Safety
/// `scenario` must be a live handle; `out` a valid handle pointer.
#[no_mangle]
pub unsafe extern "C" fn ws_scenario_run(scenario: *const WsScenario, out: *mut *mut WsReport) -> WsStatus {
    guard(|| {
        let s = in_ref(scenario, "scenario")?;
        let out = out_ref(out, "out")?;
        let report = run_scenario(&s.config)?;
        *out = Box::into_raw(Box::new(WsReport { report }));
        Ok(())
    })
}

/// Post-selection probability after a rotation `exp(-i eps J_gamma)` at
/// `location` ("C0", "C2", "C3" or "C5"); Cheshire scenarios only.
///
/// # Safety
/// `scenario` must be a live handle, `location` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ws_epsilon_rotation_probability(
    scenario: *const WsScenario,
    location: *const c_char,
    eps: f64,
    out: *mut f64,
) -> WsStatus {
    guard(|| {
        let s = in_ref(scenario, "scenario")?;
        let loc: Location = in_str(location, "location")?.parse()?;
        let out = out_ref(out, "out")?;
        *out = epsilon_rotation_probability(&s.config, loc, eps)?;
        Ok(())
    })
}

/// # Safety
/// `report` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ws_report_free(report: *mut WsReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ws_report_postselection_probability(report: *const WsReport, out: *mut f64) -> WsStatus {
    guard(|| {
        let r = &in_ref(report, "report")?.report;
        *out_ref(out, "out")? = r.postselection_probability;
        Ok(())
    })
}

/// Largest residual modulus among the scenario's active conditions.
///
/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ws_report_max_residual(report: *const WsReport, out: *mut f64) -> WsStatus {
    guard(|| {
        let r = &in_ref(report, "report")?.report;
        *out_ref(out, "out")? = r.max_residual();
        Ok(())
    })
}

/// Number of probe rows.
///
/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ws_report_probe_count(report: *const WsReport, out: *mut usize) -> WsStatus {
    guard(|| {
        let r = &in_ref(report, "report")?.report;
        *out_ref(out, "out")? = r.probes.len();
        Ok(())
    })
}

/// Probe `index`: weak value and spatial overlap factor (either may be null).
///
/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ws_report_probe(
    report: *const WsReport,
    index: usize,
    value: *mut WsComplex,
    overlap: *mut f64,
) -> WsStatus {
    guard(|| {
        let r = &in_ref(report, "report")?.report;
        let p = r
            .probes
            .get(index)
            .ok_or_else(|| Fail(WsStatus::InvalidArgument, format!("probe index {index} out of range")))?;
        if let Some(v) = value.as_mut() {
            *v = p.weak_value.value.into();
        }
        if let Some(o) = overlap.as_mut() {
            *o = p.overlap_factor;
        }
        Ok(())
    })
}

/// Copies the label of probe `index` (e.g. "Pi_A") into `buf` as a
/// NUL-terminated string. `needed` (optional) receives the buffer size
/// required, terminator included; a short buffer yields `BufferTooSmall`.
///
/// # Safety
/// `buf` must point to `len` writable bytes (or be null when `len` is 0).
#[no_mangle]
pub unsafe extern "C" fn ws_report_probe_label(
    report: *const WsReport,
    index: usize,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> WsStatus {
    guard(|| {
        let r = &in_ref(report, "report")?.report;
        let p = r
            .probes
            .get(index)
            .ok_or_else(|| Fail(WsStatus::InvalidArgument, format!("probe index {index} out of range")))?;
        let bytes = p.label.as_bytes();
        if let Some(n) = needed.as_mut() {
            *n = bytes.len() + 1;
        }
        if len < bytes.len() + 1 || buf.is_null() {
            return Err(Fail(WsStatus::BufferTooSmall, format!("label needs {} bytes", bytes.len() + 1)));
        }
        ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, bytes.len());
        *buf.add(bytes.len()) = 0;
        Ok(())
    })
}

/// Weak value by label, searching probes first and then derived quantities
/// ("Pi_Bbar", "Pi_C").
///
/// # Safety
/// `report` must be a live handle, `label` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ws_report_lookup(report: *const WsReport, label: *const c_char, out: *mut WsComplex) -> WsStatus {
    guard(|| {
        let r = &in_ref(report, "report")?.report;
        let label = in_str(label, "label")?;
        let out = out_ref(out, "out")?;
        let value = r
            .probe(label)
            .map(|p| p.weak_value.value)
            .or_else(|| r.derived(label).map(|d| d.weak_value.value))
            .ok_or_else(|| Fail(WsStatus::NotFound, format!("no quantity labelled '{label}'")))?;
        *out = value.into();
        Ok(())
    })
}

/// Joint solution of both path conditions, in radians.
///
/// # Safety
/// Out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ws_joint_solution(alpha: *mut f64, phi: *mut f64) -> WsStatus {
    guard(|| {
        let sol = joint_solution();
        let a = out_ref(alpha, "alpha")?;
        let p = out_ref(phi, "phi")?;
        *a = sol.alpha.radians();
        *p = sol.phi.radians();
        Ok(())
    })
}

/// All φ in [0, 2π) solving condition 1 at `alpha`. `count` receives the
/// number of roots; if it exceeds `capacity` nothing is copied and
/// `BufferTooSmall` is returned.
///
/// # Safety
/// `roots` must point to `capacity` writable doubles (may be null if 0).
#[no_mangle]
pub unsafe extern "C" fn ws_solve_phi(alpha: f64, roots: *mut f64, capacity: usize, count: *mut usize) -> WsStatus {
    guard(|| {
        if !alpha.is_finite() {
            return Err(Fail(WsStatus::InvalidArgument, "alpha must be finite".into()));
        }
        let count = out_ref(count, "count")?;
        let found = solve_phi(Angle::from_radians(alpha));
        *count = found.len();
        if found.len() > capacity || (roots.is_null() && !found.is_empty()) {
            return Err(Fail(WsStatus::BufferTooSmall, format!("{} roots found", found.len())));
        }
        for (i, r) in found.iter().enumerate() {
            *roots.add(i) = r.radians();
        }
        Ok(())
    })
}

/// `<post|O|pre> / <post|pre>` for raw amplitudes in the (+1, 0, -1) basis
/// and a row-major Hermitian 3x3 `observable`. States are normalized first.
///
/// # Safety
/// `pre` and `post` must point to 3 values, `observable` to 9.
#[no_mangle]
pub unsafe extern "C" fn ws_weak_value(
    pre: *const WsComplex,
    post: *const WsComplex,
    observable: *const WsComplex,
    out: *mut WsComplex,
) -> WsStatus {
    guard(|| {
        if pre.is_null() || post.is_null() || observable.is_null() {
            return Err(null("input array"));
        }
        let out = out_ref(out, "out")?;
        let vec3 = |p: *const WsComplex| -> [Complex64; 3] {
            let s = std::slice::from_raw_parts(p, 3);
            [s[0].into(), s[1].into(), s[2].into()]
        };
        let pre = SpinState::new(vec3(pre))?;
        let post = SpinState::new(vec3(post))?;
        let entries: Vec<Complex64> = std::slice::from_raw_parts(observable, 9).iter().map(|&z| z.into()).collect();
        let obs = Observable::new(CMatrix3::from_row_slice(&entries))?;
        *out = weak_value(&pre, &post, &obs)?.value.into();
        Ok(())
    })
}
