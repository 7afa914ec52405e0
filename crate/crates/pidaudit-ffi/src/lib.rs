//! C ABI for the disparity-auditing engine: opaque handles, status codes,
//! and a thread-local last-error message. The generated header lives at
//! `include/pidaudit.h`.
//!
//! Conventions: every function returns a [`PaudStatus`]; outputs go
//! through out-pointers; strings are NUL-terminated UTF-8. Strings
//! returned by the library are freed with `paud_string_free`, handles
//! with `paud_dist_free`. On any non-OK status, `paud_last_error_message`
//! describes the failure until the next call on the same thread.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Duration;

use pidaudit::attribution::{
    interventional_contributions, potential_contributions, AuditConfig,
};
use pidaudit::cli::parse_oracle_spec;
use pidaudit::data::synth::{generate, GeneratedData, SampleMode, SyntheticSpec};
use pidaudit::data::{estimate_joint, load_csv, AuditSchema};
use pidaudit::dist::JointDistribution;
use pidaudit::pid::{decompose, SolverConfig};
use pidaudit::report::ReportEnvelope;

/// Status codes returned by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PaudStatus {
    Ok = 0,
    /// A pointer argument was null or a string was not valid UTF-8.
    NullArgument = 1,
    /// The inputs were rejected (unknown name, bad schema, bad value).
    InvalidArgument = 2,
    /// The computation failed; see paud_last_error_message().
    Failed = 3,
}

/// Opaque joint-distribution handle.
pub struct PaudDist(JointDistribution);

/// Four-way decomposition of I(Z;(A,B)), in bits.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PaudPidResult {
    pub uni_a_given_b: f64,
    pub uni_b_given_a: f64,
    pub red: f64,
    pub syn: f64,
    pub total: f64,
    pub solver_iterations: u64,
    pub objective_gap_estimate: f64,
    /// 1 when the solver met its convergence criterion.
    pub converged: u8,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let message = message.into();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(message).ok();
    });
}

fn clear_error() {
    LAST_ERROR.with(|slot| slot.borrow_mut().take());
}

fn utf8_arg<'a>(ptr: *const c_char) -> Result<&'a str, PaudStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(PaudStatus::NullArgument);
    }
    unsafe { CStr::from_ptr(ptr) }.to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        PaudStatus::NullArgument
    })
}

fn split_csv_names(s: &str) -> Vec<String> {
    s.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

fn guarded(body: impl FnOnce() -> PaudStatus) -> PaudStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            PaudStatus::Failed
        }
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn paud_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message for the most recent error on this thread, or null.
/// Valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn paud_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |s| s.as_ptr())
    })
}

/// Builds a joint distribution from a built-in generator
/// (canonical1|canonical2|canonical3|case_study|pid_example).
/// `samples = 0` yields the exact analytic pmf; otherwise the empirical
/// pmf of that many seeded samples.
///
/// # Safety
/// `name` must be a valid NUL-terminated string and `out` a valid
/// pointer; the returned handle must be freed with `paud_dist_free`.
#[no_mangle]
pub unsafe extern "C" fn paud_dist_generate(
    name: *const c_char,
    samples: u64,
    seed: u64,
    out: *mut *mut PaudDist,
) -> PaudStatus {
    guarded(|| {
        clear_error();
        if out.is_null() {
            set_error("null out pointer");
            return PaudStatus::NullArgument;
        }
        let name = match utf8_arg(name) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let spec = SyntheticSpec {
            name: match name.parse() {
                Ok(n) => n,
                Err(e) => {
                    set_error(e.to_string());
                    return PaudStatus::InvalidArgument;
                }
            },
            mode: if samples == 0 {
                SampleMode::Analytic
            } else {
                SampleMode::Samples(samples)
            },
            seed,
        };
        let generated = match generate(&spec) {
            Ok(g) => g,
            Err(e) => {
                set_error(e.to_string());
                return PaudStatus::Failed;
            }
        };
        let dist = match generated.data {
            GeneratedData::Analytic(d) => d,
            GeneratedData::Rows(table) => {
                let schema = generated.schema.unwrap_or_else(|| {
                    AuditSchema::new("z", "a", vec!["b".into()]).expect("triple schema")
                });
                match estimate_joint(&table, &schema, 0.0) {
                    Ok(d) => d,
                    Err(e) => {
                        set_error(e.to_string());
                        return PaudStatus::Failed;
                    }
                }
            }
        };
        unsafe { *out = Box::into_raw(Box::new(PaudDist(dist))) };
        PaudStatus::Ok
    })
}

/// Loads a CSV (header row required) and estimates the joint over the
/// given columns: protected, comma-separated features, decision.
///
/// # Safety
/// All strings must be valid NUL-terminated UTF-8; `out` must be a valid
/// pointer; the returned handle must be freed with `paud_dist_free`.
#[no_mangle]
pub unsafe extern "C" fn paud_dist_from_csv(
    path: *const c_char,
    protected: *const c_char,
    decision: *const c_char,
    features_csv: *const c_char,
    out: *mut *mut PaudDist,
) -> PaudStatus {
    guarded(|| {
        clear_error();
        if out.is_null() {
            set_error("null out pointer");
            return PaudStatus::NullArgument;
        }
        let (path, protected, decision, features) = match (
            utf8_arg(path),
            utf8_arg(protected),
            utf8_arg(decision),
            utf8_arg(features_csv),
        ) {
            (Ok(p), Ok(z), Ok(y), Ok(f)) => (p, z, y, split_csv_names(f)),
            _ => return PaudStatus::NullArgument,
        };
        let schema = match AuditSchema::new(protected, decision, features) {
            Ok(s) => s,
            Err(e) => {
                set_error(e.to_string());
                return PaudStatus::InvalidArgument;
            }
        };
        let dist = load_csv(std::path::Path::new(path), &schema)
            .and_then(|(table, _)| estimate_joint(&table, &schema, 0.0));
        match dist {
            Ok(d) => {
                unsafe { *out = Box::into_raw(Box::new(PaudDist(d))) };
                PaudStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                PaudStatus::Failed
            }
        }
    })
}

/// Frees a distribution handle (null is a no-op).
///
/// # Safety
/// `dist` must be a handle returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn paud_dist_free(dist: *mut PaudDist) {
    if !dist.is_null() {
        drop(unsafe { Box::from_raw(dist) });
    }
}

/// Mutual information I(a;b) in bits.
///
/// # Safety
/// `dist` must be a live handle; strings valid; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn paud_mutual_info(
    dist: *const PaudDist,
    a: *const c_char,
    b: *const c_char,
    out: *mut f64,
) -> PaudStatus {
    guarded(|| {
        clear_error();
        if dist.is_null() || out.is_null() {
            set_error("null argument");
            return PaudStatus::NullArgument;
        }
        let (a, b) = match (utf8_arg(a), utf8_arg(b)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => return PaudStatus::NullArgument,
        };
        match unsafe { &(*dist).0 }.mutual_info(a, b) {
            Ok(v) => {
                unsafe { *out = v.bits() };
                PaudStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                PaudStatus::InvalidArgument
            }
        }
    })
}

/// Partial information decomposition of I(z;(a,b)). `b_csv` may name
/// several columns, which are grouped into one composite source.
///
/// # Safety
/// `dist` must be a live handle; strings valid; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn paud_pid_decompose(
    dist: *const PaudDist,
    z: *const c_char,
    a: *const c_char,
    b_csv: *const c_char,
    out: *mut PaudPidResult,
) -> PaudStatus {
    guarded(|| {
        clear_error();
        if dist.is_null() || out.is_null() {
            set_error("null argument");
            return PaudStatus::NullArgument;
        }
        let (z, a, b_names) = match (utf8_arg(z), utf8_arg(a), utf8_arg(b_csv)) {
            (Ok(z), Ok(a), Ok(b)) => (z, a, split_csv_names(b)),
            _ => return PaudStatus::NullArgument,
        };
        if b_names.is_empty() {
            set_error("b_csv names no columns");
            return PaudStatus::InvalidArgument;
        }
        let d = unsafe { &(*dist).0 };
        let result = (|| {
            let (scoped, b_name) = if b_names.len() == 1 {
                (d.clone(), b_names[0].clone())
            } else {
                let refs: Vec<&str> = b_names.iter().map(String::as_str).collect();
                (d.group(&refs, "__b")?, "__b".to_string())
            };
            decompose(&scoped, z, a, &b_name, &SolverConfig::default())
        })();
        match result {
            Ok(r) => {
                unsafe {
                    *out = PaudPidResult {
                        uni_a_given_b: r.uni_a_given_b.bits(),
                        uni_b_given_a: r.uni_b_given_a.bits(),
                        red: r.red.bits(),
                        syn: r.syn.bits(),
                        total: r.total.bits(),
                        solver_iterations: r.solver_iterations as u64,
                        objective_gap_estimate: r.objective_gap_estimate,
                        converged: r.converged as u8,
                    };
                }
                PaudStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                PaudStatus::Failed
            }
        }
    })
}

/// Runs a full audit and returns the JSON report (schema_version 1).
/// `mode` is "distributional" or "interventional"; the latter requires an
/// oracle spec (builtin:<name> | table:<csv> | exec:<command>); pass null
/// otherwise. `epsilon` is the early-truncation threshold in bits.
///
/// # Safety
/// `dist` must be a live handle; strings valid (oracle_spec may be
/// null); `out_json` a valid pointer. The returned string must be freed
/// with `paud_string_free`.
#[no_mangle]
pub unsafe extern "C" fn paud_audit_json(
    dist: *const PaudDist,
    protected: *const c_char,
    decision: *const c_char,
    features_csv: *const c_char,
    mode: *const c_char,
    oracle_spec: *const c_char,
    epsilon: f64,
    out_json: *mut *mut c_char,
) -> PaudStatus {
    guarded(|| {
        clear_error();
        if dist.is_null() || out_json.is_null() {
            set_error("null argument");
            return PaudStatus::NullArgument;
        }
        let (protected, decision, features, mode) = match (
            utf8_arg(protected),
            utf8_arg(decision),
            utf8_arg(features_csv),
            utf8_arg(mode),
        ) {
            (Ok(z), Ok(y), Ok(f), Ok(m)) => (z, y, split_csv_names(f), m),
            _ => return PaudStatus::NullArgument,
        };
        let schema = match AuditSchema::new(protected, decision, features) {
            Ok(s) => s,
            Err(e) => {
                set_error(e.to_string());
                return PaudStatus::InvalidArgument;
            }
        };
        let cfg = AuditConfig {
            epsilon,
            ..AuditConfig::default()
        };
        let d = unsafe { &(*dist).0 };
        let report = match mode {
            "distributional" => potential_contributions(d, &schema, &cfg),
            "interventional" => {
                let spec = if oracle_spec.is_null() {
                    None
                } else {
                    match utf8_arg(oracle_spec) {
                        Ok(s) => Some(s),
                        Err(status) => return status,
                    }
                };
                let Some(spec) = spec else {
                    set_error("interventional mode requires an oracle spec");
                    return PaudStatus::InvalidArgument;
                };
                parse_oracle_spec(
                    spec,
                    schema.features.clone(),
                    &schema.decision,
                    Duration::from_secs(30),
                )
                .and_then(|oracle| interventional_contributions(d, &oracle, &schema, &cfg))
            }
            other => {
                set_error(format!("unknown mode {other:?}"));
                return PaudStatus::InvalidArgument;
            }
        };
        match report {
            Ok(r) => {
                let mut config = BTreeMap::new();
                config.insert("source".to_string(), "ffi".to_string());
                config.insert("mode".to_string(), mode.to_string());
                config.insert("epsilon".to_string(), epsilon.to_string());
                let envelope = ReportEnvelope::from_attribution(&r, config, BTreeMap::new());
                let json = envelope.to_json().expect("report serializes");
                let cstring = CString::new(json).expect("no interior NUL in JSON");
                unsafe { *out_json = cstring.into_raw() };
                PaudStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                PaudStatus::Failed
            }
        }
    })
}

/// Frees a string returned by this library (null is a no-op).
///
/// # Safety
/// `s` must originate from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn paud_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}
