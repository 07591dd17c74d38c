//! C ABI for the localflow solver.
//!
//! Objects are opaque heap handles created by `lf_*_new` / `lf_*_parse` and
//! released by the matching `lf_*_free`. Every fallible call returns an
//! [`LfStatus`]; on failure a description is available from
//! [`lf_last_error_message`] on the same thread. Panics never cross the
//! boundary and surface as [`LfStatus::Panic`].
//!
//! Commodities are 0-based throughout this interface.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use localflow::io::{parse_demand, parse_graph, verify_artifact, Artifact};
use localflow::{
    solve_multi_with, solve_single_with, Graph, KSource, RunStats, SolveConfig, SolveError,
};

/// Outcome of an interface call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidGraph = 2,
    InvalidDemand = 3,
    InvalidParameter = 4,
    /// The solver hit an internal consistency failure.
    Internal = 5,
    Panic = 6,
}

/// What a solve produced.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LfResultKind {
    Flow = 0,
    CutCertificate = 1,
    PotentialCertificate = 2,
}

/// Use the k-commodity solver even for one commodity.
pub const LF_SOLVE_MULTI: u32 = 1;
/// Check the locality invariants every round.
pub const LF_SOLVE_AUDIT: u32 = 2;

/// An undirected unit-capacity graph.
pub struct LfGraph(Graph);

/// A k-commodity demand.
pub struct LfDemand(KSource);

/// A flow or an infeasibility certificate, with run statistics.
pub struct LfResult {
    artifact: Artifact,
    stats: RunStats,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn fail(status: LfStatus, message: impl Into<String>) -> LfStatus {
    set_error(message);
    status
}

/// Runs `body`, turning a panic into [`LfStatus::Panic`].
fn guard(body: impl FnOnce() -> LfStatus) -> LfStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(LfStatus::Panic, format!("panic: {message}"))
        }
    }
}

/// Like [`guard`] for infallible getters; a panic yields `fallback`.
fn guard_value<T>(fallback: T, body: impl FnOnce() -> T) -> T {
    catch_unwind(AssertUnwindSafe(body)).unwrap_or(fallback)
}

fn put<T>(out: *mut *mut T, value: T) {
    // SAFETY: callers check `out` for null before building `value`.
    unsafe { *out = Box::into_raw(Box::new(value)) };
}

unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, LfStatus> {
    if s.is_null() {
        return Err(fail(LfStatus::NullPointer, "null string"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(LfStatus::InvalidParameter, "string is not UTF-8"))
}

fn solve_status(e: &SolveError) -> LfStatus {
    match e {
        SolveError::EpsOutOfRange(_) => LfStatus::InvalidParameter,
        SolveError::NoCommodities | SolveError::Demand(_) => LfStatus::InvalidDemand,
        SolveError::Mwu(_) | SolveError::SweepFailed(_) | SolveError::CertificateRejected(_) => {
            LfStatus::Internal
        }
    }
}

/// Builds a graph on `n` vertices from `m` edges stored as `2m` endpoints.
///
/// # Safety
/// `edges` must point to `2 * m` readable `uint32_t` values (or be null when
/// `m` is 0); `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lf_graph_new(
    n: usize,
    edges: *const u32,
    m: usize,
    out: *mut *mut LfGraph,
) -> LfStatus {
    guard(|| {
        if out.is_null() || (edges.is_null() && m > 0) {
            return fail(LfStatus::NullPointer, "null argument to lf_graph_new");
        }
        let flat: &[u32] = if m == 0 {
            &[]
        } else {
            std::slice::from_raw_parts(edges, 2 * m)
        };
        let pairs: Vec<(u32, u32)> = flat.chunks_exact(2).map(|c| (c[0], c[1])).collect();
        match Graph::new(n, &pairs) {
            Ok(g) => {
                put(out, LfGraph(g));
                LfStatus::Ok
            }
            Err(e) => fail(LfStatus::InvalidGraph, e.to_string()),
        }
    })
}

/// Parses a graph in the text format (`n m` header, then `u v` lines).
///
/// # Safety
/// `source` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lf_graph_parse(source: *const c_char, out: *mut *mut LfGraph) -> LfStatus {
    guard(|| {
        if out.is_null() {
            return fail(LfStatus::NullPointer, "null argument to lf_graph_parse");
        }
        let s = match text(source) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match parse_graph(s, "<graph>") {
            Ok(g) => {
                put(out, LfGraph(g));
                LfStatus::Ok
            }
            Err(e) => fail(LfStatus::InvalidGraph, e.to_string()),
        }
    })
}

/// # Safety
/// `graph` must be null or a handle from this library that was not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lf_graph_free(graph: *mut LfGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Vertex count, or 0 for a null handle.
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lf_graph_vertex_count(graph: *const LfGraph) -> usize {
    guard_value(0, || graph.as_ref().map_or(0, |g| g.0.vertex_count()))
}

/// Edge count, or 0 for a null handle.
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lf_graph_edge_count(graph: *const LfGraph) -> usize {
    guard_value(0, || graph.as_ref().map_or(0, |g| g.0.edge_count()))
}

/// An all-zero demand with `k ≥ 1` commodities.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lf_demand_new(k: usize, out: *mut *mut LfDemand) -> LfStatus {
    guard(|| {
        if out.is_null() {
            return fail(LfStatus::NullPointer, "null argument to lf_demand_new");
        }
        if k == 0 {
            return fail(LfStatus::InvalidParameter, "k must be at least 1");
        }
        put(out, LfDemand(KSource::new(k)));
        LfStatus::Ok
    })
}

/// Parses a demand file (`k` header, then 1-based `j v value` lines) against `graph`.
///
/// # Safety
/// `source` must be a NUL-terminated string, `graph` a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lf_demand_parse(
    source: *const c_char,
    graph: *const LfGraph,
    out: *mut *mut LfDemand,
) -> LfStatus {
    guard(|| {
        let Some(g) = graph.as_ref() else {
            return fail(LfStatus::NullPointer, "null graph");
        };
        if out.is_null() {
            return fail(LfStatus::NullPointer, "null argument to lf_demand_parse");
        }
        let s = match text(source) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match parse_demand(s, "<demand>", g.0.vertex_count()) {
            Ok(b) => {
                put(out, LfDemand(b));
                LfStatus::Ok
            }
            Err(e) => fail(LfStatus::InvalidDemand, e.to_string()),
        }
    })
}

/// Sets `b_commodity(vertex) = value`. Vertex range is checked at solve time.
///
/// # Safety
/// `demand` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn lf_demand_set(
    demand: *mut LfDemand,
    commodity: usize,
    vertex: u32,
    value: f64,
) -> LfStatus {
    guard(|| {
        let Some(d) = demand.as_mut() else {
            return fail(LfStatus::NullPointer, "null demand");
        };
        if commodity >= d.0.k() {
            return fail(
                LfStatus::InvalidParameter,
                format!("commodity {commodity} outside 0..{}", d.0.k()),
            );
        }
        if !value.is_finite() {
            return fail(LfStatus::InvalidDemand, format!("non-finite value {value}"));
        }
        d.0.commodity_mut(commodity).set(vertex, value);
        LfStatus::Ok
    })
}

/// Number of commodities, or 0 for a null handle.
///
/// # Safety
/// `demand` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lf_demand_commodities(demand: *const LfDemand) -> usize {
    guard_value(0, || demand.as_ref().map_or(0, |d| d.0.k()))
}

/// # Safety
/// `demand` must be null or a handle from this library that was not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lf_demand_free(demand: *mut LfDemand) {
    if !demand.is_null() {
        drop(Box::from_raw(demand));
    }
}

/// Routes `demand` on `graph` up to residual `eps·deg(v)` or certifies that it
/// cannot be routed. `flags` combines `LF_SOLVE_MULTI` and `LF_SOLVE_AUDIT`.
///
/// # Safety
/// `graph` and `demand` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lf_solve(
    graph: *const LfGraph,
    demand: *const LfDemand,
    eps: f64,
    flags: u32,
    out: *mut *mut LfResult,
) -> LfStatus {
    guard(|| {
        let (Some(g), Some(d)) = (graph.as_ref(), demand.as_ref()) else {
            return fail(LfStatus::NullPointer, "null graph or demand");
        };
        if out.is_null() {
            return fail(LfStatus::NullPointer, "null result slot");
        }
        let (g, b) = (&g.0, &d.0);
        let mut config = SolveConfig::new(eps);
        config.audit = flags & LF_SOLVE_AUDIT != 0;
        let solved = if b.k() == 1 && flags & LF_SOLVE_MULTI == 0 {
            solve_single_with(g, b.commodity(0), &config)
                .map(|(r, s)| (Artifact::from_single(g, &r, eps), s))
        } else {
            solve_multi_with(g, b, &config).map(|(r, s)| (Artifact::from_multi(g, &r, eps), s))
        };
        match solved {
            Ok((artifact, stats)) => {
                put(out, LfResult { artifact, stats });
                LfStatus::Ok
            }
            Err(e) => fail(solve_status(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `result` must be null or a handle from this library that was not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lf_result_free(result: *mut LfResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn lf_result_kind(
    result: *const LfResult,
    out: *mut LfResultKind,
) -> LfStatus {
    guard(|| {
        let (Some(r), false) = (result.as_ref(), out.is_null()) else {
            return fail(LfStatus::NullPointer, "null argument to lf_result_kind");
        };
        *out = match r.artifact {
            Artifact::Flow { .. } => LfResultKind::Flow,
            Artifact::CutCertificate { .. } => LfResultKind::CutCertificate,
            Artifact::PotentialCertificate { .. } => LfResultKind::PotentialCertificate,
        };
        LfStatus::Ok
    })
}

/// Rounds run before the result was produced; 0 for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lf_result_iterations(result: *const LfResult) -> usize {
    guard_value(0, || result.as_ref().map_or(0, |r| r.stats.iterations_run))
}

/// Work units spent; 0 for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lf_result_total_work(result: *const LfResult) -> u64 {
    guard_value(0, || result.as_ref().map_or(0, |r| r.stats.total_work))
}

/// Locality-audit violations recorded (only nonzero under `LF_SOLVE_AUDIT`).
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lf_result_audit_violations(result: *const LfResult) -> usize {
    guard_value(0, || {
        result.as_ref().map_or(0, |r| r.stats.violations.len())
    })
}

/// `f̄_commodity(edge)`; zero for edges the flow does not use.
///
/// # Safety
/// `result` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lf_result_flow_value(
    result: *const LfResult,
    commodity: usize,
    edge: u32,
    out: *mut f64,
) -> LfStatus {
    guard(|| {
        let (Some(r), false) = (result.as_ref(), out.is_null()) else {
            return fail(
                LfStatus::NullPointer,
                "null argument to lf_result_flow_value",
            );
        };
        let Artifact::Flow { flows, .. } = &r.artifact else {
            return fail(LfStatus::InvalidParameter, "result is not a flow");
        };
        let Some(entries) = flows.get(commodity) else {
            return fail(
                LfStatus::InvalidParameter,
                format!("commodity {commodity} outside 0..{}", flows.len()),
            );
        };
        *out = entries
            .binary_search_by_key(&edge, |e| e.edge)
            .map_or(0.0, |i| entries[i].value);
        LfStatus::Ok
    })
}

/// Copies the vertex set of a cut certificate into `buffer`.
///
/// `*len` receives the set size even when `capacity` is too small, in which
/// case nothing is copied and `InvalidParameter` is returned. Pass a null
/// buffer with capacity 0 to query the size.
///
/// # Safety
/// `result` must be a live handle, `len` writable, and `buffer` valid for
/// `capacity` writes when non-null.
#[no_mangle]
pub unsafe extern "C" fn lf_result_cut_vertices(
    result: *const LfResult,
    buffer: *mut u32,
    capacity: usize,
    len: *mut usize,
) -> LfStatus {
    guard(|| {
        let (Some(r), false) = (result.as_ref(), len.is_null()) else {
            return fail(
                LfStatus::NullPointer,
                "null argument to lf_result_cut_vertices",
            );
        };
        let Artifact::CutCertificate { set, .. } = &r.artifact else {
            return fail(
                LfStatus::InvalidParameter,
                "result is not a cut certificate",
            );
        };
        *len = set.len();
        if buffer.is_null() && capacity == 0 {
            return LfStatus::Ok;
        }
        if buffer.is_null() {
            return fail(LfStatus::NullPointer, "null buffer");
        }
        if capacity < set.len() {
            return fail(
                LfStatus::InvalidParameter,
                format!("buffer holds {capacity}, need {}", set.len()),
            );
        }
        ptr::copy_nonoverlapping(set.as_ptr(), buffer, set.len());
        LfStatus::Ok
    })
}

/// The result as a JSON artifact, as written by the command-line tool.
/// Release the string with [`lf_string_free`].
///
/// # Safety
/// `result` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lf_result_to_json(
    result: *const LfResult,
    out: *mut *mut c_char,
) -> LfStatus {
    guard(|| {
        let (Some(r), false) = (result.as_ref(), out.is_null()) else {
            return fail(LfStatus::NullPointer, "null argument to lf_result_to_json");
        };
        match CString::new(r.artifact.to_json()) {
            Ok(s) => {
                *out = s.into_raw();
                LfStatus::Ok
            }
            Err(e) => fail(LfStatus::Internal, e.to_string()),
        }
    })
}

/// Checks a JSON artifact against `graph` and `demand`. `eps ≤ 0` uses the
/// artifact's own tolerance. `*ok` is set only when the call succeeds.
///
/// # Safety
/// `graph`, `demand` must be live handles, `json` NUL-terminated, `ok` writable.
#[no_mangle]
pub unsafe extern "C" fn lf_verify_json(
    graph: *const LfGraph,
    demand: *const LfDemand,
    json: *const c_char,
    eps: f64,
    ok: *mut bool,
) -> LfStatus {
    guard(|| {
        let (Some(g), Some(d), false) = (graph.as_ref(), demand.as_ref(), ok.is_null()) else {
            return fail(LfStatus::NullPointer, "null argument to lf_verify_json");
        };
        let s = match text(json) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let artifact = match Artifact::from_json(s) {
            Ok(a) => a,
            Err(e) => return fail(LfStatus::InvalidParameter, e.to_string()),
        };
        let report = verify_artifact(&g.0, &d.0, &artifact, (eps > 0.0).then_some(eps));
        *ok = report.ok;
        LfStatus::Ok
    })
}

/// # Safety
/// `s` must be null or a string returned by this library that was not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Description of the last failure on this thread, or null if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn lf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Static name of a status code; "unknown" for values outside the enum.
#[no_mangle]
pub extern "C" fn lf_status_name(status: c_int) -> *const c_char {
    let name: &'static CStr = match status {
        0 => c"ok",
        1 => c"null pointer",
        2 => c"invalid graph",
        3 => c"invalid demand",
        4 => c"invalid parameter",
        5 => c"internal error",
        6 => c"panic",
        _ => c"unknown",
    };
    name.as_ptr()
}
