//! C ABI over `netsync`.
//!
//! Every entry point returns an [`NsStatus`]; on failure the message is
//! available from [`ns_last_error_message`] on the same thread. Handles are
//! opaque and must be released with their `_free` function. Panics never
//! cross the boundary; they are reported as [`NsStatus::Panic`].
//!
//! Pointer arguments must be null or valid for the documented length; null is
//! always detected and reported as [`NsStatus::NullPointer`].

// The entry points are called from C, where an `unsafe` qualifier carries no
// meaning; the pointer contract is stated above and on each function.
#![allow(clippy::not_unsafe_ptr_arg_deref)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use netsync::certify::{certify_network, critical_gains, CertifyOptions};
use netsync::cli::{run_experiment, ExperimentConfig};
use netsync::dynamics::total_error;
use netsync::simulate::{NetworkSystem, SyncReport};
use netsync::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Rejected input (config, dimensions, arguments).
    Validation = 3,
    /// Blow-up or non-finite values during integration or sampling.
    Numerical = 4,
    /// A hypothesis of the gain formulas does not hold.
    Hypothesis = 5,
    Io = 6,
    Panic = 7,
    /// Caller buffer too small.
    BufferTooSmall = 8,
}

/// Network built from an experiment config.
pub struct NsNetwork {
    config: ExperimentConfig,
    net: NetworkSystem,
}

/// Result of [`ns_simulate`].
pub struct NsTrajectory {
    times: Vec<f64>,
    states: Vec<f64>,
    node_count: usize,
    dim: usize,
    sync: SyncReport,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NsCriticalGains {
    pub c_star: f64,
    pub c_d_star: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NsSyncReport {
    pub terminal_e_tot: f64,
    pub tail_min_e_tot: f64,
    pub tail_max_e_tot: f64,
    pub threshold: f64,
    pub tail_fraction: f64,
    pub synchronized: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', "\u{FFFD}");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> NsStatus {
    match err {
        Error::Hypothesis(_) => NsStatus::Hypothesis,
        Error::Io(_) | Error::Csv(_) => NsStatus::Io,
        e if e.is_numerical() => NsStatus::Numerical,
        _ => NsStatus::Validation,
    }
}

struct Failure(NsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

/// Runs `f`, converting errors and panics into a status plus last-error message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> NsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            NsStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            NsStatus::Panic
        }
    }
}

fn non_null<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    // SAFETY: callers pass either null or a pointer obtained from this library.
    unsafe { p.as_ref() }.ok_or_else(|| Failure(NsStatus::NullPointer, format!("{name} is null")))
}

fn out_ptr<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    // SAFETY: the caller guarantees `p` is null or valid for writes.
    unsafe { p.as_mut() }.ok_or_else(|| Failure(NsStatus::NullPointer, format!("{name} is null")))
}

fn c_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(NsStatus::NullPointer, format!("{name} is null")));
    }
    // SAFETY: non-null, and the caller guarantees NUL termination.
    unsafe { CStr::from_ptr(p) }.to_str().map_err(|e| Failure(NsStatus::InvalidUtf8, format!("{name}: {e}")))
}

fn slice<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(Failure(NsStatus::NullPointer, format!("{name} is null")));
    }
    // SAFETY: non-null, and the caller guarantees `len` readable elements.
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

fn copy_out(src: &[f64], dst: *mut f64, capacity: usize) -> Result<(), Failure> {
    if dst.is_null() {
        return Err(Failure(NsStatus::NullPointer, "output buffer is null".into()));
    }
    if capacity < src.len() {
        return Err(Failure(NsStatus::BufferTooSmall, format!("buffer holds {capacity} values, {} needed", src.len())));
    }
    // SAFETY: `dst` is valid for `capacity ≥ src.len()` writes.
    unsafe { ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len()) };
    Ok(())
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn ns_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ns_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses and validates an experiment config (JSON text) into a network handle.
#[no_mangle]
pub extern "C" fn ns_network_from_json(json: *const c_char, out: *mut *mut NsNetwork) -> NsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let config = ExperimentConfig::from_json(c_str(json, "json")?)?;
        let net = config.build_network()?;
        *out = Box::into_raw(Box::new(NsNetwork { config, net }));
        Ok(())
    })
}

/// Releases a network handle. Null is ignored.
#[no_mangle]
pub extern "C" fn ns_network_free(net: *mut NsNetwork) {
    if !net.is_null() {
        // SAFETY: `net` came from `ns_network_from_json` and is freed once.
        drop(unsafe { Box::from_raw(net) });
    }
}

/// Writes the node count `N` and node dimension `n`.
#[no_mangle]
pub extern "C" fn ns_network_shape(net: *const NsNetwork, node_count: *mut usize, dim: *mut usize) -> NsStatus {
    guard(|| {
        let net = non_null(net, "net")?;
        *out_ptr(node_count, "node_count")? = net.net.node_count();
        *out_ptr(dim, "dim")? = net.net.dim();
        Ok(())
    })
}

/// Integrates the configured experiment, keeping every `stride`-th sample
/// (`stride = 0` uses the config's output stride).
#[no_mangle]
pub extern "C" fn ns_simulate(net: *const NsNetwork, stride: usize, out: *mut *mut NsTrajectory) -> NsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let net = non_null(net, "net")?;
        let stride = if stride == 0 { net.config.outputs.stride } else { stride };
        let run = run_experiment(&net.net, &net.config, stride)?;
        *out = Box::into_raw(Box::new(NsTrajectory {
            times: run.times,
            states: run.states.concat(),
            node_count: net.net.node_count(),
            dim: net.net.dim(),
            sync: run.sync,
        }));
        Ok(())
    })
}

/// Releases a trajectory handle. Null is ignored.
#[no_mangle]
pub extern "C" fn ns_trajectory_free(traj: *mut NsTrajectory) {
    if !traj.is_null() {
        // SAFETY: `traj` came from `ns_simulate` and is freed once.
        drop(unsafe { Box::from_raw(traj) });
    }
}

/// Number of stored samples, or 0 for a null handle.
#[no_mangle]
pub extern "C" fn ns_trajectory_len(traj: *const NsTrajectory) -> usize {
    // SAFETY: null or a live handle.
    unsafe { traj.as_ref() }.map_or(0, |t| t.times.len())
}

/// Length `N·n` of one stacked state, or 0 for a null handle.
#[no_mangle]
pub extern "C" fn ns_trajectory_state_len(traj: *const NsTrajectory) -> usize {
    // SAFETY: null or a live handle.
    unsafe { traj.as_ref() }.map_or(0, |t| t.node_count * t.dim)
}

/// Copies the sample times (`len` values).
#[no_mangle]
pub extern "C" fn ns_trajectory_copy_times(traj: *const NsTrajectory, buf: *mut f64, capacity: usize) -> NsStatus {
    guard(|| copy_out(&non_null(traj, "traj")?.times, buf, capacity))
}

/// Copies the stacked states, row-major (`len · state_len` values).
#[no_mangle]
pub extern "C" fn ns_trajectory_copy_states(traj: *const NsTrajectory, buf: *mut f64, capacity: usize) -> NsStatus {
    guard(|| copy_out(&non_null(traj, "traj")?.states, buf, capacity))
}

/// Copies `e_tot` at every stored sample (`len` values).
#[no_mangle]
pub extern "C" fn ns_trajectory_copy_e_tot(traj: *const NsTrajectory, buf: *mut f64, capacity: usize) -> NsStatus {
    guard(|| {
        let t = non_null(traj, "traj")?;
        let len = t.node_count * t.dim;
        let e: Vec<f64> = t.states.chunks_exact(len).map(|x| total_error(x, t.node_count, t.dim)).collect();
        copy_out(&e, buf, capacity)
    })
}

/// Synchronization verdict of the run (monitored at every integration step).
#[no_mangle]
pub extern "C" fn ns_trajectory_sync_report(traj: *const NsTrajectory, out: *mut NsSyncReport) -> NsStatus {
    guard(|| {
        let s = non_null(traj, "traj")?.sync;
        *out_ptr(out, "out")? = NsSyncReport {
            terminal_e_tot: s.terminal_e_tot,
            tail_min_e_tot: s.tail_min_e_tot,
            tail_max_e_tot: s.tail_max_e_tot,
            threshold: s.threshold,
            tail_fraction: s.tail_fraction,
            synchronized: s.synchronized,
        };
        Ok(())
    })
}

/// Evaluates the critical-gain formulas. `p`, `gamma` and `gamma_d` are
/// row-major `dim × dim`; `m` has `dim` entries.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub extern "C" fn ns_critical_gains(
    max_q_norm: f64,
    lambda2: f64,
    p: *const f64,
    gamma: *const f64,
    m: *const f64,
    delta: f64,
    gamma_d: *const f64,
    dim: usize,
    out: *mut NsCriticalGains,
) -> NsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let mat = |ptr, name| -> Result<_, Failure> {
            Ok(nalgebra::DMatrix::from_row_slice(dim, dim, slice(ptr, dim * dim, name)?))
        };
        let g = critical_gains(
            max_q_norm,
            lambda2,
            &mat(p, "p")?,
            &mat(gamma, "gamma")?,
            slice(m, dim, "m")?,
            delta,
            &mat(gamma_d, "gamma_d")?,
        )?;
        *out = NsCriticalGains { c_star: g.c_star, c_d_star: g.c_d_star };
        Ok(())
    })
}

/// Certifies the network over the ball of radius `radius` using the config's
/// `certify` section, and returns the certificate as JSON. Free the string
/// with [`ns_string_free`].
#[no_mangle]
pub extern "C" fn ns_certify_json(net: *const NsNetwork, radius: f64, seed: u64, out: *mut *mut c_char) -> NsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let net = non_null(net, "net")?;
        let options = CertifyOptions { quad_mode: net.config.quad_mode()?, samples: net.config.certify.samples, seed };
        let cert = certify_network(&net.net, radius, &options)?;
        let json = serde_json::to_string(&cert).map_err(|e| Failure(NsStatus::Validation, e.to_string()))?;
        *out = CString::new(json).expect("JSON has no interior NUL").into_raw();
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
#[no_mangle]
pub extern "C" fn ns_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: `s` came from `CString::into_raw` in this library.
        drop(unsafe { CString::from_raw(s) });
    }
}
