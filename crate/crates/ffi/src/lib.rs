//! C ABI over `deficit-lab`.
//!
//! States and measurements are opaque handles created by `dl_*` constructors
//! and released with the matching `*_free` function. Every fallible call
//! returns a [`DlStatus`]; on failure a description is available from
//! [`dl_last_error_message`] on the same thread. Complex arrays are
//! interleaved `re, im` doubles in row-major order.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use deficit_lab::optimize::{optimize, Objective, OptimizerConfig};
use deficit_lab::scenarios::{build_knr01_state, build_sw99_state};
use deficit_lab::state::{entropy, mutual_information, partial_trace};
use deficit_lab::{
    basis_measurement, dephase, eigenbasis_measurement, measure_report, ComplexMatrix, DensityMatrix, Error,
    ProjectiveMeasurement, PureState, Subsystem, C64,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DlStatus {
    DlOk = 0,
    DlNullPointer = 1,
    DlInvalidArgument = 2,
    DlDimensionMismatch = 3,
    DlInvalidState = 4,
    DlNumerical = 5,
    DlPanic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DlSubsystem {
    /// The whole bipartite state.
    DlJoint = 0,
    DlAlice = 1,
    DlBob = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DlObjective {
    DlChv = 0,
    DlDeltaCl = 1,
    DlDeficit = 2,
}

fn objective_from(code: i32) -> Result<Objective, Error> {
    match code {
        c if c == DlObjective::DlChv as i32 => Ok(Objective::CHv),
        c if c == DlObjective::DlDeltaCl as i32 => Ok(Objective::DeltaCl),
        c if c == DlObjective::DlDeficit as i32 => Ok(Objective::Deficit),
        other => Err(Error::InvalidArgument(format!("unknown objective code {other}"))),
    }
}

/// Opaque bipartite density matrix.
pub struct DlState(DensityMatrix);

/// Opaque projective measurement on Alice.
pub struct DlMeasurement(ProjectiveMeasurement);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DlMeasureReport {
    pub c_hv: f64,
    pub delta_cl: f64,
    pub deficit_q: f64,
    pub alice_entropy_cost: f64,
    pub mutual_information: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DlOptimizerConfig {
    pub grid_points_per_angle: u32,
    pub restarts: u32,
    pub seed: u64,
    pub refine_tolerance: f64,
    pub max_refine_iterations: u32,
    pub support_restricted: bool,
}

impl From<&DlOptimizerConfig> for OptimizerConfig {
    fn from(c: &DlOptimizerConfig) -> Self {
        OptimizerConfig {
            grid_points_per_angle: c.grid_points_per_angle as usize,
            restarts: c.restarts as usize,
            seed: c.seed,
            refine_tolerance: c.refine_tolerance,
            max_refine_iterations: c.max_refine_iterations as usize,
            support_restricted: c.support_restricted,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> DlStatus {
    match e {
        Error::DimensionMismatch { .. } => DlStatus::DlDimensionMismatch,
        Error::InvalidState(_) | Error::NotHermitian { .. } => DlStatus::DlInvalidState,
        Error::NoConvergence { .. } => DlStatus::DlNumerical,
        Error::InvalidMeasurement(_)
        | Error::InvalidChannel(_)
        | Error::InvalidEnsemble(_)
        | Error::InvalidArgument(_) => DlStatus::DlInvalidArgument,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Runs `f`, recording the error message and mapping panics to `DlPanic`.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DlStatus::DlOk,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            DlStatus::DlNullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            DlStatus::DlPanic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn complex_slice(data: *const f64, count: usize, what: &'static str) -> Result<Vec<C64>, Failure> {
    if data.is_null() {
        return Err(Failure::Null(what));
    }
    let raw = std::slice::from_raw_parts(data, 2 * count);
    Ok(raw.chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect())
}

fn checked_square(d_a: usize, d_b: usize) -> Result<(usize, usize), Failure> {
    let d = d_a
        .checked_mul(d_b)
        .filter(|&d| d > 0)
        .ok_or_else(|| Error::InvalidArgument("dimensions must be positive".into()))?;
    let n = d
        .checked_mul(d)
        .ok_or_else(|| Error::InvalidArgument("dimensions too large".into()))?;
    Ok((d, n))
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Creates a state from a `(d_a d_b) x (d_a d_b)` row-major complex matrix.
///
/// # Safety
/// `re_im` must point to `2 (d_a d_b)^2` readable doubles and `out` to a
/// writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn dl_state_from_matrix(d_a: usize, d_b: usize, re_im: *const f64, out: *mut *mut DlState) -> DlStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let (d, n) = checked_square(d_a, d_b)?;
        let m = ComplexMatrix::from_vec(d, d, complex_slice(re_im, n, "re_im")?)?;
        *out = boxed(DlState(DensityMatrix::new((d_a, d_b), m)?));
        Ok(())
    })
}

/// Creates the projector onto a unit vector of `d_a d_b` amplitudes.
///
/// # Safety
/// `re_im` must point to `2 d_a d_b` readable doubles and `out` to a
/// writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn dl_state_from_pure(d_a: usize, d_b: usize, re_im: *const f64, out: *mut *mut DlState) -> DlStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let (d, _) = checked_square(d_a, d_b)?;
        let psi = PureState::new((d_a, d_b), complex_slice(re_im, d, "re_im")?)?;
        *out = boxed(DlState(psi.density()));
        Ok(())
    })
}

/// The two-qubit amplitude-damping example state.
///
/// # Safety
/// `out` must point to a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn dl_state_sw99(out: *mut *mut DlState) -> DlStatus {
    guard(|| {
        *out_ref(out, "out")? = boxed(DlState(build_sw99_state()));
        Ok(())
    })
}

/// The qutrit-qubit Bloch-affine example state.
///
/// # Safety
/// `out` must point to a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn dl_state_knr01(out: *mut *mut DlState) -> DlStatus {
    guard(|| {
        *out_ref(out, "out")? = boxed(DlState(build_knr01_state()));
        Ok(())
    })
}

/// Releases a state. Null is ignored.
///
/// # Safety
/// `state` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dl_state_free(state: *mut DlState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// # Safety
/// `state` must be a live handle; `d_a` and `d_b` writable.
#[no_mangle]
pub unsafe extern "C" fn dl_state_dims(state: *const DlState, d_a: *mut usize, d_b: *mut usize) -> DlStatus {
    guard(|| {
        let (a, b) = deref(state, "state")?.0.dims();
        *out_ref(d_a, "d_a")? = a;
        *out_ref(d_b, "d_b")? = b;
        Ok(())
    })
}

/// Copies the density matrix into `re_im` (`2 (d_a d_b)^2` doubles).
///
/// # Safety
/// `state` must be a live handle and `re_im` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dl_state_matrix(state: *const DlState, re_im: *mut f64, len: usize) -> DlStatus {
    guard(|| {
        let rho = &deref(state, "state")?.0;
        let entries = rho.matrix().entries();
        if re_im.is_null() {
            return Err(Failure::Null("re_im"));
        }
        if len != 2 * entries.len() {
            return Err(Error::DimensionMismatch {
                context: "dl_state_matrix",
                expected: (2 * entries.len()).to_string(),
                found: len.to_string(),
            }
            .into());
        }
        let dst = std::slice::from_raw_parts_mut(re_im, len);
        for (pair, z) in dst.chunks_exact_mut(2).zip(entries) {
            pair[0] = z.re;
            pair[1] = z.im;
        }
        Ok(())
    })
}

/// Von Neumann entropy in bits of the state or one of its marginals;
/// `which` is a [`DlSubsystem`] value.
///
/// # Safety
/// `state` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dl_entropy(state: *const DlState, which: i32, out: *mut f64) -> DlStatus {
    guard(|| {
        let rho = &deref(state, "state")?.0;
        let out = out_ref(out, "out")?;
        *out = match which {
            w if w == DlSubsystem::DlJoint as i32 => entropy(rho)?,
            w if w == DlSubsystem::DlAlice as i32 => entropy(&partial_trace(rho, Subsystem::A))?,
            w if w == DlSubsystem::DlBob as i32 => entropy(&partial_trace(rho, Subsystem::B))?,
            other => return Err(Error::InvalidArgument(format!("unknown subsystem code {other}")).into()),
        };
        Ok(())
    })
}

/// # Safety
/// `state` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dl_mutual_information(state: *const DlState, out: *mut f64) -> DlStatus {
    guard(|| {
        *out_ref(out, "out")? = mutual_information(&deref(state, "state")?.0)?;
        Ok(())
    })
}

/// Rank-1 measurement from `dim` basis vectors of `dim` amplitudes each,
/// stored one vector after another.
///
/// # Safety
/// `re_im` must point to `2 dim^2` readable doubles and `out` to a writable
/// handle slot.
#[no_mangle]
pub unsafe extern "C" fn dl_measurement_from_basis(dim: usize, re_im: *const f64, out: *mut *mut DlMeasurement) -> DlStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()).into());
        }
        let flat = complex_slice(re_im, dim * dim, "re_im")?;
        let vectors: Vec<Vec<C64>> = flat.chunks_exact(dim).map(<[C64]>::to_vec).collect();
        *out = boxed(DlMeasurement(basis_measurement(&vectors)?));
        Ok(())
    })
}

/// # Safety
/// `out` must point to a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn dl_measurement_computational(dim: usize, out: *mut *mut DlMeasurement) -> DlStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()).into());
        }
        *out = boxed(DlMeasurement(ProjectiveMeasurement::computational(dim)));
        Ok(())
    })
}

/// Measurement in the eigenbasis of Alice's reduced state.
///
/// # Safety
/// `state` must be a live handle and `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn dl_measurement_eigenbasis(state: *const DlState, out: *mut *mut DlMeasurement) -> DlStatus {
    guard(|| {
        let rho = &deref(state, "state")?.0;
        let out = out_ref(out, "out")?;
        *out = boxed(DlMeasurement(eigenbasis_measurement(&partial_trace(rho, Subsystem::A))?));
        Ok(())
    })
}

/// Releases a measurement. Null is ignored.
///
/// # Safety
/// `m` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dl_measurement_free(m: *mut DlMeasurement) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `state` and `m` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dl_measure_report(
    state: *const DlState,
    m: *const DlMeasurement,
    out: *mut DlMeasureReport,
) -> DlStatus {
    guard(|| {
        let r = measure_report(&deref(state, "state")?.0, &deref(m, "measurement")?.0)?;
        *out_ref(out, "out")? = DlMeasureReport {
            c_hv: r.c_hv,
            delta_cl: r.delta_cl,
            deficit_q: r.deficit_q,
            alice_entropy_cost: r.alice_entropy_cost,
            mutual_information: r.mutual_information,
        };
        Ok(())
    })
}

/// Dephases Alice in `m`, returning a new state.
///
/// # Safety
/// `state` and `m` must be live handles and `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn dl_dephase(state: *const DlState, m: *const DlMeasurement, out: *mut *mut DlState) -> DlStatus {
    guard(|| {
        let rho = dephase(&deref(state, "state")?.0, &deref(m, "measurement")?.0)?;
        *out_ref(out, "out")? = boxed(DlState(rho));
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn dl_optimizer_config_default() -> DlOptimizerConfig {
    let c = OptimizerConfig::default();
    DlOptimizerConfig {
        grid_points_per_angle: c.grid_points_per_angle as u32,
        restarts: c.restarts as u32,
        seed: c.seed,
        refine_tolerance: c.refine_tolerance,
        max_refine_iterations: c.max_refine_iterations as u32,
        support_restricted: c.support_restricted,
    }
}

/// Optimizes `objective` (a [`DlObjective`] value) over rank-1 measurements
/// on Alice. `config` may be
/// null for the defaults; `best` may be null when the optimal measurement is
/// not needed.
///
/// # Safety
/// `state` must be a live handle, `config` null or readable, `value`
/// writable and `best` null or a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn dl_optimize(
    state: *const DlState,
    objective: i32,
    config: *const DlOptimizerConfig,
    value: *mut f64,
    best: *mut *mut DlMeasurement,
) -> DlStatus {
    guard(|| {
        let rho = &deref(state, "state")?.0;
        let value = out_ref(value, "value")?;
        let cfg = config.as_ref().map(OptimizerConfig::from).unwrap_or_default();
        let result = optimize(rho, objective_from(objective)?, &cfg)?;
        *value = result.value;
        if let Some(slot) = best.as_mut() {
            *slot = boxed(DlMeasurement(result.measurement().clone()));
        }
        Ok(())
    })
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
