//! C ABI for the samplan planners.
//!
//! Scenarios and planner results are opaque handles created and freed by this
//! library. Fallible functions return a [`SamplanStatus`] and write their
//! result through an out-pointer; on failure a message is available from
//! [`samplan_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use samplan::graph::shortest_path;
use samplan::planners::{plan, PlannerSpec, Schedule};
use samplan::rgg::connectivity_threshold_radius;
use samplan::{PlanOutput, RngStream, Scenario};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplanStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidJson = 3,
    InvalidScenario = 4,
    InvalidSpec = 5,
    PlanningFailed = 6,
    OutOfRange = 7,
    Internal = 8,
}

/// A validated planning problem.
pub struct SamplanScenario {
    inner: Scenario,
}

/// Output of one planner run: the graph, its trace, and the best path cost.
pub struct SamplanResult {
    output: PlanOutput,
    best_cost: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn fail(status: SamplanStatus, msg: impl Into<String>) -> SamplanStatus {
    set_error(msg);
    status
}

fn guarded(f: impl FnOnce() -> SamplanStatus) -> SamplanStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(SamplanStatus::Internal, "internal panic"))
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, SamplanStatus> {
    if s.is_null() {
        return Err(fail(SamplanStatus::NullPointer, "string argument is null"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| fail(SamplanStatus::InvalidUtf8, e.to_string()))
}

/// Message describing the most recent failure on the calling thread. The
/// pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn samplan_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn samplan_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a scenario from JSON.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn samplan_scenario_from_json(
    json: *const c_char,
    out: *mut *mut SamplanScenario,
) -> SamplanStatus {
    guarded(|| {
        if out.is_null() {
            return fail(SamplanStatus::NullPointer, "out is null");
        }
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match serde_json::from_str::<Scenario>(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(SamplanScenario { inner }));
                SamplanStatus::Ok
            }
            Err(e) if e.is_data() => fail(SamplanStatus::InvalidScenario, e.to_string()),
            Err(e) => fail(SamplanStatus::InvalidJson, e.to_string()),
        }
    })
}

/// # Safety
/// `scenario` must be null or a handle from [`samplan_scenario_from_json`]
/// that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn samplan_scenario_free(scenario: *mut SamplanScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Dimension of the scenario, or 0 for a null handle.
///
/// # Safety
/// `scenario` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn samplan_scenario_dimension(scenario: *const SamplanScenario) -> usize {
    scenario.as_ref().map_or(0, |s| s.inner.dim())
}

/// Lebesgue measure of the free space.
///
/// # Safety
/// `scenario` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn samplan_free_space_measure(scenario: *const SamplanScenario, out: *mut f64) -> SamplanStatus {
    guarded(|| {
        let (Some(s), false) = (scenario.as_ref(), out.is_null()) else {
            return fail(SamplanStatus::NullPointer, "null argument");
        };
        match s.inner.free_space_measure() {
            Ok(m) => {
                *out = m;
                SamplanStatus::Ok
            }
            Err(e) => fail(SamplanStatus::InvalidScenario, e.to_string()),
        }
    })
}

/// Whether the segment from `a` to `b` (each `dim` coordinates) avoids every
/// obstacle interior.
///
/// # Safety
/// `a` and `b` must point to `dim` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn samplan_segment_collision_free(
    scenario: *const SamplanScenario,
    a: *const f64,
    b: *const f64,
    dim: usize,
    out: *mut bool,
) -> SamplanStatus {
    guarded(|| {
        let Some(s) = scenario.as_ref() else {
            return fail(SamplanStatus::NullPointer, "scenario is null");
        };
        if a.is_null() || b.is_null() || out.is_null() {
            return fail(SamplanStatus::NullPointer, "null argument");
        }
        if dim != s.inner.dim() {
            return fail(
                SamplanStatus::OutOfRange,
                format!("dim {dim} does not match scenario dimension {}", s.inner.dim()),
            );
        }
        let a = std::slice::from_raw_parts(a, dim);
        let b = std::slice::from_raw_parts(b, dim);
        *out = s.inner.segment_collision_free(a, b);
        SamplanStatus::Ok
    })
}

/// Runs the planner described by `spec_json` (a planner spec object, e.g.
/// `{"algorithm": "RRTstar", "n": 1000, "seed": 7}`) on the scenario.
///
/// # Safety
/// `scenario` must be a live handle, `spec_json` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn samplan_plan(
    scenario: *const SamplanScenario,
    spec_json: *const c_char,
    out: *mut *mut SamplanResult,
) -> SamplanStatus {
    guarded(|| {
        let Some(s) = scenario.as_ref() else {
            return fail(SamplanStatus::NullPointer, "scenario is null");
        };
        if out.is_null() {
            return fail(SamplanStatus::NullPointer, "out is null");
        }
        let text = match read_str(spec_json) {
            Ok(t) => t,
            Err(st) => return st,
        };
        let spec: PlannerSpec = match serde_json::from_str(text) {
            Ok(spec) => spec,
            Err(e) if e.is_data() => return fail(SamplanStatus::InvalidSpec, e.to_string()),
            Err(e) => return fail(SamplanStatus::InvalidJson, e.to_string()),
        };
        if let Err(e) = spec.validate() {
            return fail(SamplanStatus::InvalidSpec, e.to_string());
        }
        let schedule = Schedule::log_spaced(spec.n, 20);
        let output = match plan(&s.inner, &spec, &mut RngStream::new(spec.seed), &schedule) {
            Ok(o) => o,
            Err(e) => return fail(SamplanStatus::PlanningFailed, e.to_string()),
        };
        let best_cost = if output.graph.vertex_count() == 0 {
            f64::INFINITY
        } else {
            match shortest_path(&output.graph, 0, |p| s.inner.in_goal(p.coords())) {
                Ok(q) => q.cost,
                Err(e) => return fail(SamplanStatus::Internal, e.to_string()),
            }
        };
        *out = Box::into_raw(Box::new(SamplanResult { output, best_cost }));
        SamplanStatus::Ok
    })
}

/// # Safety
/// `result` must be null or a live handle from [`samplan_plan`].
#[no_mangle]
pub unsafe extern "C" fn samplan_result_free(result: *mut SamplanResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Cost of the best goal-reaching path, `INFINITY` when none was found.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn samplan_result_best_cost(result: *const SamplanResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.best_cost)
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn samplan_result_vertex_count(result: *const SamplanResult) -> usize {
    result.as_ref().map_or(0, |r| r.output.graph.vertex_count())
}

/// Number of directed edges (an undirected roadmap edge counts twice).
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn samplan_result_edge_count(result: *const SamplanResult) -> usize {
    result.as_ref().map_or(0, |r| r.output.graph.edge_count())
}

/// Number of recorded trace rows.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn samplan_result_trace_len(result: *const SamplanResult) -> usize {
    result.as_ref().map_or(0, |r| r.output.trace.points.len())
}

/// Trace row `index`: iteration and best cost at that iteration.
///
/// # Safety
/// `result` must be a live handle; the out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn samplan_result_trace_at(
    result: *const SamplanResult,
    index: usize,
    iteration: *mut usize,
    best_cost: *mut f64,
) -> SamplanStatus {
    guarded(|| {
        let Some(r) = result.as_ref() else {
            return fail(SamplanStatus::NullPointer, "result is null");
        };
        if iteration.is_null() || best_cost.is_null() {
            return fail(SamplanStatus::NullPointer, "null argument");
        }
        let Some(p) = r.output.trace.points.get(index) else {
            return fail(
                SamplanStatus::OutOfRange,
                format!("trace index {index} out of range (len {})", r.output.trace.points.len()),
            );
        };
        *iteration = p.iteration;
        *best_cost = p.best_cost;
        SamplanStatus::Ok
    })
}

/// The graph as JSON `{"vertices": [...], "edges": [[u, v, cost], ...],
/// "parent": [...]}`. Free the string with [`samplan_string_free`].
///
/// # Safety
/// `result` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn samplan_result_graph_json(
    result: *const SamplanResult,
    out: *mut *mut c_char,
) -> SamplanStatus {
    guarded(|| {
        let Some(r) = result.as_ref() else {
            return fail(SamplanStatus::NullPointer, "result is null");
        };
        if out.is_null() {
            return fail(SamplanStatus::NullPointer, "out is null");
        }
        let json = match serde_json::to_string(&r.output.graph.to_dump()) {
            Ok(j) => j,
            Err(e) => return fail(SamplanStatus::Internal, e.to_string()),
        };
        match CString::new(json) {
            Ok(c) => {
                *out = c.into_raw();
                SamplanStatus::Ok
            }
            Err(e) => fail(SamplanStatus::Internal, e.to_string()),
        }
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn samplan_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Connectivity threshold radius of the r-disc graph on `n` points in `d`
/// dimensions.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn samplan_connectivity_threshold_radius(n: usize, d: usize, out: *mut f64) -> SamplanStatus {
    guarded(|| {
        if out.is_null() {
            return fail(SamplanStatus::NullPointer, "out is null");
        }
        if n < 2 || d < 1 {
            return fail(
                SamplanStatus::OutOfRange,
                format!("need n >= 2 and d >= 1, got n={n}, d={d}"),
            );
        }
        *out = connectivity_threshold_radius(n, d);
        SamplanStatus::Ok
    })
}
