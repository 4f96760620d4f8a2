//! C ABI over the chantopo pipeline.
//!
//! Every fallible call returns a [`ChantopoStatus`]; on failure the message
//! is available from [`chantopo_last_error`] on the same thread. Handles
//! are opaque and released with their `_free` function. Strings returned
//! through out-parameters are owned by the caller and released with
//! [`chantopo_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use chantopo::export::{render_svg, to_graphml, to_json};
use chantopo::ingest::{load_projects, ProjectTable, Schema};
use chantopo::knowledge::{registry_default, ChannelRegistry};
use chantopo::pipeline::{build_topology, PipelineParams, Topology};
use chantopo::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChantopoStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Io = 4,
    Parse = 5,
    Numerical = 6,
    InvalidRegistry = 7,
    OutOfRange = 8,
    Panic = 9,
}

/// Loaded project table plus the registry used to read it.
pub struct ChantopoTable {
    table: ProjectTable,
    registry: ChannelRegistry,
}

/// Result of a full pipeline run.
pub struct ChantopoTopology {
    topology: Topology,
    params: PipelineParams,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("NUL bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ChantopoStatus {
    match e {
        Error::Stage { source, .. } => status_of(source),
        Error::Io { .. } => ChantopoStatus::Io,
        Error::Csv { .. } | Error::Schema(_) | Error::Parse(_) => ChantopoStatus::Parse,
        Error::InvalidArgument(_) => ChantopoStatus::InvalidArgument,
        Error::Registry(_) => ChantopoStatus::InvalidRegistry,
        Error::PerplexityNotConverged { .. } | Error::NonFiniteGradient { .. } | Error::Numerical(_) => {
            ChantopoStatus::Numerical
        }
    }
}

struct Fail(ChantopoStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> ChantopoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            ChantopoStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            ChantopoStatus::Panic
        }
    }
}

fn non_null<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    // SAFETY: callers pass either null or a pointer obtained from this library
    unsafe { p.as_ref() }.ok_or_else(|| Fail(ChantopoStatus::NullArgument, format!("{what} is null")))
}

fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(ChantopoStatus::NullArgument, format!("{what} is null")));
    }
    // SAFETY: non-null and documented as NUL-terminated
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| Fail(ChantopoStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn opt_str_arg<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, Fail> {
    if p.is_null() {
        Ok(None)
    } else {
        str_arg(p, what).map(Some)
    }
}

fn put<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(ChantopoStatus::NullArgument, "output pointer is null".into()));
    }
    // SAFETY: checked non-null; caller provides writable storage
    unsafe { out.write(value) };
    Ok(())
}

fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    let c = CString::new(s).map_err(|_| Fail(ChantopoStatus::InvalidArgument, "string holds NUL".into()))?;
    put(out, c.into_raw())
}

/// Message of the last failed call on this thread, or null. Valid until
/// the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn chantopo_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static version string.
#[no_mangle]
pub extern "C" fn chantopo_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn chantopo_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Reads a project CSV. `schema_path` and `registry_path` may be null for
/// the built-in libraries.io mapping and channel registry.
///
/// # Safety
/// String arguments must be null or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chantopo_table_load(
    path: *const c_char,
    schema_path: *const c_char,
    registry_path: *const c_char,
    out: *mut *mut ChantopoTable,
) -> ChantopoStatus {
    guard(|| {
        let path = PathBuf::from(str_arg(path, "path")?);
        let schema = match opt_str_arg(schema_path, "schema_path")? {
            Some(p) => Schema::load(p.as_ref())?,
            None => Schema::libraries_io(),
        };
        let registry = match opt_str_arg(registry_path, "registry_path")? {
            Some(p) => ChannelRegistry::load(p.as_ref())?,
            None => registry_default(),
        };
        let (table, _) = load_projects(&path, &schema, &registry)?;
        put(out, Box::into_raw(Box::new(ChantopoTable { table, registry })))
    })
}

/// Number of projects, or 0 for a null handle.
///
/// # Safety
/// `table` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn chantopo_table_len(table: *const ChantopoTable) -> usize {
    table.as_ref().map_or(0, |t| t.table.len())
}

/// # Safety
/// `table` must be null or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn chantopo_table_free(table: *mut ChantopoTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Default pipeline parameters as TOML, for editing and passing back.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chantopo_params_default(out: *mut *mut c_char) -> ChantopoStatus {
    guard(|| put_string(out, PipelineParams::default().to_toml()))
}

/// Runs the pipeline. `params_toml` may be null for defaults; unset keys
/// keep their defaults.
///
/// # Safety
/// `table` must be a live handle, `params_toml` null or NUL-terminated,
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn chantopo_topology_build(
    table: *const ChantopoTable,
    params_toml: *const c_char,
    out: *mut *mut ChantopoTopology,
) -> ChantopoStatus {
    guard(|| {
        let t = non_null(table, "table")?;
        let params = match opt_str_arg(params_toml, "params_toml")? {
            Some(text) => PipelineParams::from_toml(text)?,
            None => PipelineParams::default(),
        };
        let topology = build_topology(&t.table, &t.registry, &params)?;
        put(out, Box::into_raw(Box::new(ChantopoTopology { topology, params })))
    })
}

/// # Safety
/// `topo` must be null or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn chantopo_topology_free(topo: *mut ChantopoTopology) {
    if !topo.is_null() {
        drop(Box::from_raw(topo));
    }
}

/// Node, edge and component counts; any out pointer may be null.
///
/// # Safety
/// `topo` must be a live handle; non-null outs must be writable.
#[no_mangle]
pub unsafe extern "C" fn chantopo_topology_counts(
    topo: *const ChantopoTopology,
    nodes: *mut usize,
    edges: *mut usize,
    components: *mut usize,
) -> ChantopoStatus {
    guard(|| {
        let t = &non_null(topo, "topo")?.topology;
        for (out, v) in [
            (nodes, t.mapper.graph.nodes.len()),
            (edges, t.mapper.graph.edges.len()),
            (components, t.components.len()),
        ] {
            if !out.is_null() {
                put(out, v)?;
            }
        }
        Ok(())
    })
}

/// Distinct points of the component of `rank` (1 = largest).
///
/// # Safety
/// `topo` must be a live handle; `points` writable.
#[no_mangle]
pub unsafe extern "C" fn chantopo_topology_component_points(
    topo: *const ChantopoTopology,
    rank: usize,
    points: *mut usize,
) -> ChantopoStatus {
    guard(|| {
        let t = &non_null(topo, "topo")?.topology;
        let c = rank
            .checked_sub(1)
            .and_then(|i| t.components.get(i))
            .ok_or_else(|| Fail(ChantopoStatus::OutOfRange, format!("no component of rank {rank}")))?;
        put(points, c.total_points)
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChantopoFormat {
    Json = 0,
    GraphMl = 1,
    Svg = 2,
}

/// Serializes the nerve graph. Release the string with
/// [`chantopo_string_free`].
///
/// # Safety
/// `topo` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn chantopo_topology_export(
    topo: *const ChantopoTopology,
    format: ChantopoFormat,
    out: *mut *mut c_char,
) -> ChantopoStatus {
    guard(|| {
        let t = non_null(topo, "topo")?;
        let g = &t.topology.mapper.graph;
        let text = match format {
            ChantopoFormat::Json => to_json(g),
            ChantopoFormat::GraphMl => to_graphml(g),
            ChantopoFormat::Svg => render_svg(g, &t.params.render)?,
        };
        put_string(out, text)
    })
}
