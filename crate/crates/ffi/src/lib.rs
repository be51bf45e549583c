//! C ABI over the `brinkmann` crate.
//!
//! Every fallible function returns a [`BrkStatus`]; on failure a message is
//! available from [`brk_last_error`] on the same thread. Objects are opaque
//! handles released with their `_free` function. Arrays are row-major `double`
//! buffers whose lengths are given in the comments.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use brinkmann::causality::{violation_certificate, CausalityParams, Profile, ViolationCertificate};
use brinkmann::cli::{render, to_value, MetricConfig};
use brinkmann::geodesics::{classify_h, integrate_geodesic, ClassKind, ExitReason, GeodesicState, IntegratorOptions};
use brinkmann::normalize::{to_pp_wave, PpWaveForm};
use brinkmann::tensor::{is_ricci_flat, BrinkmannMetric, Connection, DomainBox, GridSpec};
use brinkmann::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BrkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidInput = 4,
    OutsideDomain = 5,
    NotRicciFlat = 6,
    NotHarmonic = 7,
    NoWitness = 8,
    SearchExhausted = 9,
    NonAutonomous = 10,
    BufferTooSmall = 11,
    Internal = 12,
    Panic = 13,
}

impl From<&Error> for BrkStatus {
    fn from(e: &Error) -> Self {
        if e.is_internal() {
            return BrkStatus::Internal;
        }
        match e {
            Error::Expr(_) => BrkStatus::Parse,
            Error::OutsideDomain(_) => BrkStatus::OutsideDomain,
            Error::NotRicciFlat { .. } => BrkStatus::NotRicciFlat,
            Error::NotHarmonic { .. } => BrkStatus::NotHarmonic,
            Error::NoWitness { .. } => BrkStatus::NoWitness,
            Error::WitnessTooWeak { .. } | Error::KMaxExhausted { .. } => BrkStatus::SearchExhausted,
            Error::NonAutonomous(_) | Error::AlphaNotConstant => BrkStatus::NonAutonomous,
            _ => BrkStatus::InvalidInput,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BrkClassKind {
    PlaneWave = 0,
    CahenWallach = 1,
    GeneralPpWave = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BrkExitReason {
    Completed = 0,
    LeftDomain = 1,
    Blowup = 2,
    StepUnderflow = 3,
}

/// Headline numbers of a causality certificate.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct BrkCertificateSummary {
    pub k0: u32,
    pub radius: f64,
    pub e0: f64,
    pub excursion_norm: f64,
    pub max_timelike_residual: f64,
    pub bound_slack: f64,
    pub sample_count: usize,
}

/// Metric `2du(dv + H du + Ω_i dx^i) + dx² + dy²` with its check grid.
pub struct BrkMetric {
    metric: BrinkmannMetric,
    grid: GridSpec,
}

/// Result of the pp-wave normalization.
pub struct BrkPpWave {
    form: PpWaveForm,
}

pub struct BrkCertificate {
    cert: ViolationCertificate,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(e: Error) -> BrkStatus {
    set_error(format!("{}: {e}", e.kind()));
    BrkStatus::from(&e)
}

fn guard<F: FnOnce() -> Result<(), BrkStatus>>(f: F) -> BrkStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BrkStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside brinkmann".into());
            BrkStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, BrkStatus> {
    if p.is_null() {
        set_error("null string argument".into());
        return Err(BrkStatus::NullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("string argument is not UTF-8".into());
        BrkStatus::InvalidUtf8
    })
}

unsafe fn array<const N: usize>(p: *const f64) -> Result<[f64; N], BrkStatus> {
    if p.is_null() {
        set_error("null array argument".into());
        return Err(BrkStatus::NullPointer);
    }
    Ok(std::array::from_fn(|i| *p.add(i)))
}

unsafe fn write<const N: usize>(p: *mut f64, v: &[f64; N]) -> Result<(), BrkStatus> {
    if p.is_null() {
        set_error("null output buffer".into());
        return Err(BrkStatus::NullPointer);
    }
    ptr::copy_nonoverlapping(v.as_ptr(), p, N);
    Ok(())
}

unsafe fn out<T>(p: *mut T, v: T) -> Result<(), BrkStatus> {
    if p.is_null() {
        set_error("null output pointer".into());
        return Err(BrkStatus::NullPointer);
    }
    p.write(v);
    Ok(())
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, BrkStatus> {
    p.as_ref().ok_or_else(|| {
        set_error("null handle".into());
        BrkStatus::NullPointer
    })
}

fn domain(d: [f64; 6]) -> DomainBox {
    DomainBox::new([d[0], d[1]], [d[2], d[3]], [d[4], d[5]])
}

fn flatten<const N: usize, const M: usize>(m: &[[f64; N]; M]) -> Vec<f64> {
    m.iter().flatten().copied().collect()
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn brk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into the library on this thread.
#[no_mangle]
pub extern "C" fn brk_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a metric with `γ = δ` on the box `domain[6] = {u0,u1,x0,x1,y0,y1}`.
///
/// # Safety
/// Strings must be NUL-terminated; `domain` must point to 6 doubles.
#[no_mangle]
pub unsafe extern "C" fn brk_metric_new(
    h: *const c_char,
    omega1: *const c_char,
    omega2: *const c_char,
    domain6: *const f64,
    out_metric: *mut *mut BrkMetric,
) -> BrkStatus {
    guard(|| {
        let (h, o1, o2) = (text(h)?, text(omega1)?, text(omega2)?);
        let d = domain(array::<6>(domain6)?);
        let metric = BrinkmannMetric::from_strs(h, o1, o2, d).map_err(fail)?;
        let m = Box::new(BrkMetric { metric, grid: GridSpec::default() });
        out(out_metric, Box::into_raw(m))
    })
}

/// Builds a metric from the JSON config format of the command-line tool.
///
/// # Safety
/// `json` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn brk_metric_from_json(json: *const c_char, out_metric: *mut *mut BrkMetric) -> BrkStatus {
    guard(|| {
        let cfg = MetricConfig::from_json(text(json)?).map_err(fail)?;
        let metric = cfg.metric().map_err(fail)?;
        out(out_metric, Box::into_raw(Box::new(BrkMetric { metric, grid: cfg.grid })))
    })
}

/// # Safety
/// `m` must come from a `brk_metric_*` constructor, or be NULL.
#[no_mangle]
pub unsafe extern "C" fn brk_metric_free(m: *mut BrkMetric) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// `g_ab` at `point[4] = {u,v,x,y}` into `out[16]`.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn brk_metric_components(m: *const BrkMetric, point: *const f64, out16: *mut f64) -> BrkStatus {
    guard(|| {
        let m = handle(m)?;
        let g = m.metric.metric_components(&array::<4>(point)?).map_err(fail)?;
        write::<16>(out16, &flatten(&g).try_into().unwrap())
    })
}

/// `Γ^a_{bc}` at `point[4]` into `out[64]`, index `16a + 4b + c`.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn brk_christoffel(m: *const BrkMetric, point: *const f64, out64: *mut f64) -> BrkStatus {
    guard(|| {
        let m = handle(m)?;
        let t = Connection::new(&m.metric).table(&array::<4>(point)?).map_err(fail)?;
        let v: Vec<f64> = t.gamma.iter().flatten().flatten().copied().collect();
        write::<64>(out64, &v.try_into().unwrap())
    })
}

/// `Ric_ab` at `point[4]` into `out[16]`.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn brk_ricci(m: *const BrkMetric, point: *const f64, out16: *mut f64) -> BrkStatus {
    guard(|| {
        let m = handle(m)?;
        let r = Connection::new(&m.metric).ricci(&array::<4>(point)?).map_err(fail)?;
        write::<16>(out16, &flatten(&r).try_into().unwrap())
    })
}

/// Ricci-flatness over the metric's check grid.
///
/// # Safety
/// Output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn brk_is_ricci_flat(m: *const BrkMetric, out_flat: *mut bool, out_violation: *mut f64) -> BrkStatus {
    guard(|| {
        let m = handle(m)?;
        let r = is_ricci_flat(&m.metric, &m.grid).map_err(fail)?;
        out(out_flat, r.flat)?;
        out(out_violation, r.max_violation)
    })
}

/// Reduces a Ricci-flat metric with `γ = δ` to pp-wave form.
///
/// # Safety
/// `m` must be a valid handle and `out_pp` writable.
#[no_mangle]
pub unsafe extern "C" fn brk_normalize(m: *const BrkMetric, out_pp: *mut *mut BrkPpWave) -> BrkStatus {
    guard(|| {
        let m = handle(m)?;
        let form = to_pp_wave(&m.metric, &m.grid).map_err(fail)?;
        out(out_pp, Box::into_raw(Box::new(BrkPpWave { form })))
    })
}

/// # Safety
/// `pp` must come from `brk_normalize`, or be NULL.
#[no_mangle]
pub unsafe extern "C" fn brk_pp_wave_free(pp: *mut BrkPpWave) {
    if !pp.is_null() {
        drop(Box::from_raw(pp));
    }
}

/// `α(u)`.
///
/// # Safety
/// `pp` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn brk_pp_wave_alpha(pp: *const BrkPpWave, u: f64, out_alpha: *mut f64) -> BrkStatus {
    guard(|| {
        let a = handle(pp)?.form.alpha.at(u).map_err(fail)?;
        out(out_alpha, a)
    })
}

/// `(U, X, Y)` of the source point `(u, x, y)` into `out[3]`.
///
/// # Safety
/// `pp` must be a valid handle and `out3` hold 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn brk_pp_wave_forward(pp: *const BrkPpWave, u: f64, x: f64, y: f64, out3: *mut f64) -> BrkStatus {
    guard(|| {
        let p = handle(pp)?.form.rotation.forward(u, x, y).map_err(fail)?;
        write::<3>(out3, &p)
    })
}

/// pp-wave profile `H̃(U, X, Y)`.
///
/// # Safety
/// `pp` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn brk_pp_wave_h_tilde(pp: *const BrkPpWave, uu: f64, xx: f64, yy: f64, out_h: *mut f64) -> BrkStatus {
    guard(|| {
        let h = handle(pp)?.form.h_tilde(uu, xx, yy).map_err(fail)?;
        out(out_h, h)
    })
}

/// Classifies the pp-wave profile `h` on `domain[6]`. `out_eigen[2]` receives
/// the eigenvalues for Cahen–Wallach spaces and NaN otherwise.
///
/// # Safety
/// `h` must be NUL-terminated and the pointers valid.
#[no_mangle]
pub unsafe extern "C" fn brk_classify(
    h: *const c_char,
    domain6: *const f64,
    tol: f64,
    out_kind: *mut BrkClassKind,
    out_eigen2: *mut f64,
) -> BrkStatus {
    guard(|| {
        let e = brinkmann::parse(text(h)?).map_err(|e| fail(e.into()))?;
        let c = classify_h(&e, &domain(array::<6>(domain6)?), tol).map_err(fail)?;
        let kind = match c.kind {
            ClassKind::PlaneWave => BrkClassKind::PlaneWave,
            ClassKind::CahenWallach => BrkClassKind::CahenWallach,
            ClassKind::GeneralPpWave => BrkClassKind::GeneralPpWave,
        };
        out(out_kind, kind)?;
        write::<2>(out_eigen2, &c.eigenvalues.unwrap_or([f64::NAN; 2]))
    })
}

/// Integrates a geodesic to `s_max`. `out_state[9] = {s, u,v,x,y, u',v',x',y'}`
/// is the last accepted state; `out_drift` the max change of `g(ẋ,ẋ)`.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn brk_geodesic(
    m: *const BrkMetric,
    x0: *const f64,
    dx0: *const f64,
    s_max: f64,
    out_state9: *mut f64,
    out_exit: *mut BrkExitReason,
    out_drift: *mut f64,
) -> BrkStatus {
    guard(|| {
        let m = handle(m)?;
        if !(s_max > 0.0) {
            return Err(fail(Error::Invalid("s_max must be positive".into())));
        }
        let init = GeodesicState::new(array::<4>(x0)?, array::<4>(dx0)?);
        let t = integrate_geodesic(&m.metric, init, s_max, &IntegratorOptions::default()).map_err(fail)?;
        let l = t.last();
        let st = [l.s, l.x[0], l.x[1], l.x[2], l.x[3], l.dx[0], l.dx[1], l.dx[2], l.dx[3]];
        write::<9>(out_state9, &st)?;
        let exit = match t.exit {
            ExitReason::Completed => BrkExitReason::Completed,
            ExitReason::LeftDomain => BrkExitReason::LeftDomain,
            ExitReason::Blowup => BrkExitReason::Blowup,
            ExitReason::StepUnderflow => BrkExitReason::StepUnderflow,
        };
        out(out_exit, exit)?;
        out(out_drift, t.max_drift)
    })
}

/// Builds a strong-causality violation certificate for the harmonic profile
/// `hhat(x, y)`. Returns `BRK_STATUS_NO_WITNESS` when `-hhat` has no
/// superquadratic witness in the search box (default half-width `4 r0`).
///
/// # Safety
/// `hhat` must be NUL-terminated and `out_cert` writable.
#[no_mangle]
pub unsafe extern "C" fn brk_certificate_new(
    hhat: *const c_char,
    alpha: f64,
    r0: f64,
    delta: f64,
    k_max: u32,
    out_cert: *mut *mut BrkCertificate,
) -> BrkStatus {
    guard(|| {
        let p = Profile::parse(text(hhat)?).map_err(fail)?;
        let cert = violation_certificate(&p, &CausalityParams::new(alpha, r0, delta, k_max)).map_err(fail)?;
        out(out_cert, Box::into_raw(Box::new(BrkCertificate { cert })))
    })
}

/// # Safety
/// `c` must come from `brk_certificate_new`, or be NULL.
#[no_mangle]
pub unsafe extern "C" fn brk_certificate_free(c: *mut BrkCertificate) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// # Safety
/// `c` must be a valid handle and `out_summary` writable.
#[no_mangle]
pub unsafe extern "C" fn brk_certificate_summary(c: *const BrkCertificate, out_summary: *mut BrkCertificateSummary) -> BrkStatus {
    guard(|| {
        let c = &handle(c)?.cert;
        out(
            out_summary,
            BrkCertificateSummary {
                k0: c.k0,
                radius: c.radius,
                e0: c.energy.e0,
                excursion_norm: c.excursion_norm,
                max_timelike_residual: c.max_timelike_residual,
                bound_slack: c.ledger.bound_slack,
                sample_count: c.samples.len(),
            },
        )
    })
}

/// Copies the curve samples as rows `{t, U, V, X, Y, g}` into `buf`, which
/// must hold `6 * sample_count` doubles.
///
/// # Safety
/// `buf` must be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn brk_certificate_samples(c: *const BrkCertificate, buf: *mut f64, len: usize) -> BrkStatus {
    guard(|| {
        let s = &handle(c)?.cert.samples;
        if buf.is_null() {
            set_error("null output buffer".into());
            return Err(BrkStatus::NullPointer);
        }
        if len < 6 * s.len() {
            set_error(format!("buffer holds {len} doubles, need {}", 6 * s.len()));
            return Err(BrkStatus::BufferTooSmall);
        }
        for (i, q) in s.iter().enumerate() {
            let row = [q.t, q.u, q.v, q.x, q.y, q.g_dot_dot];
            ptr::copy_nonoverlapping(row.as_ptr(), buf.add(6 * i), 6);
        }
        Ok(())
    })
}

/// The certificate as JSON, in the format of the command-line tool. Release
/// with `brk_string_free`.
///
/// # Safety
/// `c` must be a valid handle and `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn brk_certificate_json(c: *const BrkCertificate, out_json: *mut *mut c_char) -> BrkStatus {
    guard(|| {
        let c = &handle(c)?.cert;
        let s = render(&to_value(c));
        out(out_json, CString::new(s).expect("json has no nul").into_raw())
    })
}

/// # Safety
/// `s` must come from this library, or be NULL.
#[no_mangle]
pub unsafe extern "C" fn brk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
