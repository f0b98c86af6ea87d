//! C ABI for `qjacobi`.
//!
//! Every function returns a [`QjStatus`]. On failure a message is kept per
//! thread and can be read with [`qj_last_error`]. Objects are opaque handles
//! created by `*_new`-style functions and released with the matching `*_free`.
//!
//! Grid functions cross the boundary as arrays of `2 n` [`QjComplex`] values
//! with `n = k_max - k_min + 1`: first the `z₋` branch for `k = k_min..=k_max`,
//! then the `z₊` branch in the same order.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qjacobi::harness::{emit_report, run_suites, RunConfig, Summary};
use qjacobi::transform::{SpectralFunction, Transform, TransformOptions};
use qjacobi::{Error, Grid, GridFunction, Params, C64};

/// Result code of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QjStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    ParameterDomain = 4,
    NonGeneric = 5,
    GridMismatch = 6,
    Numerical = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QjComplex {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for QjComplex {
    fn from(z: C64) -> Self {
        QjComplex { re: z.re, im: z.im }
    }
}

impl From<QjComplex> for C64 {
    fn from(z: QjComplex) -> Self {
        C64::new(z.re, z.im)
    }
}

/// Plain values of a parameter set.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QjParamValues {
    pub q: f64,
    pub z_minus: f64,
    pub z_plus: f64,
    pub a: QjComplex,
    pub b: QjComplex,
    pub c: QjComplex,
    pub d: QjComplex,
}

/// Validated parameters.
pub struct QjParams(Params);

/// Transform tables on a window.
pub struct QjTransform(Transform);

/// A spectral function belonging to a transform.
pub struct QjSpectral(SpectralFunction);

/// Counts from [`qj_verify`].
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QjRunCounts {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(QjStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Config(_) | Error::Parse(_) | Error::Io(_) => QjStatus::Config,
            Error::ParameterDomain(_) => QjStatus::ParameterDomain,
            Error::NonGenericParameters(_) => QjStatus::NonGeneric,
            Error::GridMismatch => QjStatus::GridMismatch,
            Error::DomainError(_) => QjStatus::InvalidArgument,
            _ => QjStatus::Numerical,
        };
        Failure(status, e.to_string())
    }
}

fn fail<T>(status: QjStatus, msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, msg.into()))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> QjStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            QjStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            QjStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure(QjStatus::NullPointer, format!("{name} is null")))
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return fail(QjStatus::NullPointer, format!("{name} is null"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(QjStatus::InvalidArgument, format!("{name} is not UTF-8")))
}

unsafe fn slice_in<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return fail(QjStatus::NullPointer, format!("{name} is null"));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_out<'a, T>(p: *mut T, len: usize, need: usize, name: &str) -> Result<&'a mut [T], Failure> {
    if len < need {
        return fail(QjStatus::BufferTooSmall, format!("{name} holds {len} values, {need} needed"));
    }
    if need == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return fail(QjStatus::NullPointer, format!("{name} is null"));
    }
    Ok(std::slice::from_raw_parts_mut(p, need))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return fail(QjStatus::NullPointer, "output handle pointer is null");
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qj_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn qj_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parameters of a named preset (`"ps1"` to `"ps4"`).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qj_params_preset(name: *const c_char, out: *mut *mut QjParams) -> QjStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        let p = Params::preset(name).ok_or_else(|| Failure(QjStatus::Config, format!("unknown preset {name:?}")))?;
        put(out, QjParams(p))
    })
}

/// Validated parameters from plain values.
///
/// # Safety
/// `values` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn qj_params_new(values: *const QjParamValues, out: *mut *mut QjParams) -> QjStatus {
    guard(|| {
        let v = deref(values, "values")?;
        let p = Params::new(v.q, v.z_minus, v.z_plus, v.a.into(), v.b.into(), v.c.into(), v.d.into())?;
        put(out, QjParams(p))
    })
}

/// Copies the values of `params` into `out`.
///
/// # Safety
/// Both pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qj_params_values(params: *const QjParams, out: *mut QjParamValues) -> QjStatus {
    guard(|| {
        let p = &deref(params, "params")?.0;
        if out.is_null() {
            return fail(QjStatus::NullPointer, "out is null");
        }
        *out = QjParamValues {
            q: p.q,
            z_minus: p.z_minus,
            z_plus: p.z_plus,
            a: p.a.into(),
            b: p.b.into(),
            c: p.c.into(),
            d: p.d.into(),
        };
        Ok(())
    })
}

/// # Safety
/// `params` must come from this library and not be used afterwards. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn qj_params_free(params: *mut QjParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Builds transform tables on `[k_min, k_max]` with `nodes` circle nodes;
/// `nodes = 0` selects the default.
///
/// # Safety
/// `params` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn qj_transform_new(
    params: *const QjParams,
    k_min: i64,
    k_max: i64,
    nodes: usize,
    out: *mut *mut QjTransform,
) -> QjStatus {
    guard(|| {
        let p = &deref(params, "params")?.0;
        p.require_generic()?;
        if !(k_min < 0 && k_max > 0) {
            return fail(QjStatus::InvalidArgument, format!("window [{k_min}, {k_max}] must satisfy k_min < 0 < k_max"));
        }
        let mut options = TransformOptions::default();
        if nodes > 0 {
            options.nodes = nodes;
        }
        let t = Transform::new(p, Grid::new(k_min, k_max)?, options)?;
        put(out, QjTransform(t))
    })
}

/// # Safety
/// `transform` must come from this library and not be used afterwards. Null
/// is ignored.
#[no_mangle]
pub unsafe extern "C" fn qj_transform_free(transform: *mut QjTransform) {
    if !transform.is_null() {
        drop(Box::from_raw(transform));
    }
}

/// Sizes of `transform`: window bounds, number of circle nodes and number of
/// discrete spectral points. Any output pointer may be null.
///
/// # Safety
/// `transform` must be valid; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn qj_transform_shape(
    transform: *const QjTransform,
    k_min: *mut i64,
    k_max: *mut i64,
    nodes: *mut usize,
    points: *mut usize,
) -> QjStatus {
    guard(|| {
        let t = &deref(transform, "transform")?.0;
        if let Some(x) = k_min.as_mut() {
            *x = t.grid.k_min;
        }
        if let Some(x) = k_max.as_mut() {
            *x = t.grid.k_max;
        }
        if let Some(x) = nodes.as_mut() {
            *x = t.quad.len();
        }
        if let Some(x) = points.as_mut() {
            *x = t.gammas.len();
        }
        Ok(())
    })
}

/// Circle nodes `ψ` into `psi` and discrete spectral parameters `γ` into
/// `gamma`. Either output may be null with length 0.
///
/// # Safety
/// Each buffer must hold at least its stated length.
#[no_mangle]
pub unsafe extern "C" fn qj_transform_spectrum(
    transform: *const QjTransform,
    psi: *mut f64,
    psi_len: usize,
    gamma: *mut f64,
    gamma_len: usize,
) -> QjStatus {
    guard(|| {
        let t = &deref(transform, "transform")?.0;
        if psi_len > 0 || !psi.is_null() {
            slice_out(psi, psi_len, t.quad.len(), "psi")?.copy_from_slice(&t.quad.nodes);
        }
        if gamma_len > 0 || !gamma.is_null() {
            let out = slice_out(gamma, gamma_len, t.gammas.len(), "gamma")?;
            for (o, g) in out.iter_mut().zip(&t.gammas) {
                *o = g.gamma;
            }
        }
        Ok(())
    })
}

fn grid_function(t: &Transform, values: &[QjComplex]) -> Result<GridFunction, Failure> {
    let n = t.grid.len();
    if values.len() != 2 * n {
        return fail(QjStatus::GridMismatch, format!("expected {} values for window [{}, {}], got {}", 2 * n, t.grid.k_min, t.grid.k_max, values.len()));
    }
    let mut f = GridFunction::zeros(t.grid);
    for (dst, src) in f.minus.iter_mut().chain(f.plus.iter_mut()).zip(values) {
        *dst = (*src).into();
    }
    Ok(f)
}

/// Forward transform of a grid function given as `2 n` values.
///
/// # Safety
/// `values` must hold `len` elements; `transform` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qj_transform_forward(
    transform: *const QjTransform,
    values: *const QjComplex,
    len: usize,
    out: *mut *mut QjSpectral,
) -> QjStatus {
    guard(|| {
        let t = &deref(transform, "transform")?.0;
        let f = grid_function(t, slice_in(values, len, "values")?)?;
        put(out, QjSpectral(t.forward(&f)?))
    })
}

/// Inverse transform into `2 n` values.
///
/// # Safety
/// `out` must hold `len` elements; the handles must be valid.
#[no_mangle]
pub unsafe extern "C" fn qj_transform_inverse(
    transform: *const QjTransform,
    spectral: *const QjSpectral,
    out: *mut QjComplex,
    len: usize,
) -> QjStatus {
    guard(|| {
        let t = &deref(transform, "transform")?.0;
        let g = &deref(spectral, "spectral")?.0;
        let f = t.inverse(g)?;
        let out = slice_out(out, len, 2 * t.grid.len(), "out")?;
        for (o, v) in out.iter_mut().zip(f.minus.iter().chain(&f.plus)) {
            *o = (*v).into();
        }
        Ok(())
    })
}

/// Inner product `⟨g₁, g₂⟩` in the spectral space of `transform`.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qj_transform_inner(
    transform: *const QjTransform,
    g1: *const QjSpectral,
    g2: *const QjSpectral,
    out: *mut QjComplex,
) -> QjStatus {
    guard(|| {
        let t = &deref(transform, "transform")?.0;
        let v = t.inner_h(&deref(g1, "g1")?.0, &deref(g2, "g2")?.0)?;
        if out.is_null() {
            return fail(QjStatus::NullPointer, "out is null");
        }
        *out = v.into();
        Ok(())
    })
}

/// A spectral function from its values: `2 × nodes` circle values (node by
/// node, first then second component) and one value per discrete point.
///
/// # Safety
/// Each buffer must hold its stated length; `transform` and `out` must be
/// valid.
#[no_mangle]
pub unsafe extern "C" fn qj_spectral_new(
    transform: *const QjTransform,
    circle: *const QjComplex,
    circle_len: usize,
    points: *const QjComplex,
    points_len: usize,
    out: *mut *mut QjSpectral,
) -> QjStatus {
    guard(|| {
        let t = &deref(transform, "transform")?.0;
        let (nodes, npoints) = (t.quad.len(), t.gammas.len());
        if circle_len != 2 * nodes || points_len != npoints {
            return fail(
                QjStatus::GridMismatch,
                format!("expected {} circle and {npoints} point values, got {circle_len} and {points_len}", 2 * nodes),
            );
        }
        let circle = slice_in(circle, circle_len, "circle")?.chunks_exact(2).map(|c| [c[0].into(), c[1].into()]).collect();
        let points = slice_in(points, points_len, "points")?.iter().map(|&z| z.into()).collect();
        put(out, QjSpectral(SpectralFunction::new(circle, points)))
    })
}

/// Copies the values of `spectral` in the layout of [`qj_spectral_new`].
///
/// # Safety
/// Each buffer must hold its stated length.
#[no_mangle]
pub unsafe extern "C" fn qj_spectral_values(
    spectral: *const QjSpectral,
    circle: *mut QjComplex,
    circle_len: usize,
    points: *mut QjComplex,
    points_len: usize,
) -> QjStatus {
    guard(|| {
        let g = &deref(spectral, "spectral")?.0;
        let c = slice_out(circle, circle_len, 2 * g.circle.len(), "circle")?;
        for (o, v) in c.chunks_exact_mut(2).zip(&g.circle) {
            o[0] = v[0].into();
            o[1] = v[1].into();
        }
        let p = slice_out(points, points_len, g.points.len(), "points")?;
        for (o, v) in p.iter_mut().zip(&g.points) {
            *o = (*v).into();
        }
        Ok(())
    })
}

/// # Safety
/// `spectral` must come from this library and not be used afterwards. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn qj_spectral_free(spectral: *mut QjSpectral) {
    if !spectral.is_null() {
        drop(Box::from_raw(spectral));
    }
}

/// Runs the verification suites of a JSON run configuration. Check failures
/// are reported through `counts`, not the status. When the configuration
/// names a `report_path` the report is written there.
///
/// # Safety
/// `config_json` must be a NUL-terminated string and `counts` valid.
#[no_mangle]
pub unsafe extern "C" fn qj_verify(config_json: *const c_char, counts: *mut QjRunCounts) -> QjStatus {
    guard(|| {
        let cfg = RunConfig::from_json(str_arg(config_json, "config_json")?)?;
        if counts.is_null() {
            return fail(QjStatus::NullPointer, "counts is null");
        }
        let report = run_suites(&cfg)?;
        if let Some(path) = &cfg.report_path {
            emit_report(path, &report, cfg.seed)?;
        }
        let s = Summary::new(&report, cfg.seed);
        *counts = QjRunCounts { total: s.total, passed: s.passed, failed: s.failed, skipped: s.skipped.len() };
        Ok(())
    })
}
