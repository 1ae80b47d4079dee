//! C ABI over the capres library.
//!
//! Objects cross the boundary as opaque handles that the caller frees with the
//! matching `*_free` function. Every fallible call returns a [`CapresStatus`];
//! on failure the message is available from [`capres_last_error`] on the same
//! thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use capres::cli::config::{parse_config_str, RunConfig};
use capres::contour::{build_contour, ScalingContour};
use capres::discretize::assemble_scaled_operator;
use capres::dtn::{self, Circle, ExteriorDiscretization, Interface, Region};
use capres::eigen::{eig_dense, projection_rank};
use capres::linalg::C64;
use capres::oracle::{find_resonances, EnergyWindow};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapresStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// Text was not UTF-8 or the configuration was rejected.
    InvalidConfig = 2,
    /// Argument outside its documented range.
    InvalidArgument = 3,
    /// A numerical stage failed.
    ComputeError = 4,
    /// An index past the end of a list.
    OutOfRange = 5,
    /// Internal panic caught at the boundary.
    Panic = 6,
}

/// Parsed and validated run configuration.
pub struct CapresConfig {
    config: RunConfig,
    digest: CString,
}

/// Complex scaling contour.
pub struct CapresContour(ScalingContour);

/// List of complex numbers, e.g. resonances or eigenvalues.
pub struct CapresComplexList(Vec<C64>);

/// Outcome of a DtN count.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapresDtnCount {
    pub winding: i64,
    pub projection_rank: u64,
    pub interface: f64,
    pub samples: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn fail(status: CapresStatus, message: impl Into<String>) -> CapresStatus {
    set_error(message);
    status
}

/// Runs `f`, turning a panic into [`CapresStatus::Panic`].
fn guard(f: impl FnOnce() -> CapresStatus) -> CapresStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(CapresStatus::Panic, "internal panic"),
    }
}

fn boxed<T>(out: *mut *mut T, value: T) -> CapresStatus {
    // SAFETY: callers check `out` for null before computing `value`.
    unsafe { *out = Box::into_raw(Box::new(value)) };
    CapresStatus::Ok
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn capres_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses configuration text in the `section.key = value` format.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn capres_config_parse(text: *const c_char, out: *mut *mut CapresConfig) -> CapresStatus {
    guard(|| {
        if text.is_null() || out.is_null() {
            return fail(CapresStatus::NullArgument, "null argument");
        }
        // SAFETY: checked non-null; the caller guarantees NUL termination.
        let Ok(s) = (unsafe { CStr::from_ptr(text) }).to_str() else {
            return fail(CapresStatus::InvalidConfig, "configuration is not UTF-8");
        };
        match parse_config_str(s) {
            Ok(config) => {
                let digest = CString::new(config.digest.clone()).expect("hex digest has no NUL");
                boxed(out, CapresConfig { config, digest })
            }
            Err(e) => fail(CapresStatus::InvalidConfig, format!("{}: {e}", e.kind())),
        }
    })
}

/// Hex digest of the configuration's canonical form. Valid while `config` lives.
///
/// # Safety
/// `config` must come from [`capres_config_parse`] or be null.
#[no_mangle]
pub unsafe extern "C" fn capres_config_digest(config: *const CapresConfig) -> *const c_char {
    // SAFETY: caller passes a live handle or null.
    match unsafe { config.as_ref() } {
        Some(c) => c.digest.as_ptr(),
        None => ptr::null(),
    }
}

/// # Safety
/// `config` must come from [`capres_config_parse`] or be null; it is freed once.
#[no_mangle]
pub unsafe extern "C" fn capres_config_free(config: *mut CapresConfig) {
    if !config.is_null() {
        // SAFETY: the handle was produced by `Box::into_raw`.
        drop(unsafe { Box::from_raw(config) });
    }
}

/// Builds the scaling contour for angle `theta`, start `r1` and bound `alpha0`.
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn capres_contour_new(
    theta: f64,
    r1: f64,
    alpha0: f64,
    out: *mut *mut CapresContour,
) -> CapresStatus {
    guard(|| {
        if out.is_null() {
            return fail(CapresStatus::NullArgument, "null argument");
        }
        match build_contour(theta, r1, alpha0) {
            Ok(c) => boxed(out, CapresContour(c)),
            Err(e) => fail(CapresStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Writes `g(t)` and `g'(t)` as real/imaginary pairs.
///
/// # Safety
/// `contour` must be a live handle; `g` and `dg` must each point to two doubles.
#[no_mangle]
pub unsafe extern "C" fn capres_contour_eval(
    contour: *const CapresContour,
    t: f64,
    g: *mut f64,
    dg: *mut f64,
) -> CapresStatus {
    guard(|| {
        // SAFETY: caller passes a live handle or null.
        let Some(c) = (unsafe { contour.as_ref() }) else {
            return fail(CapresStatus::NullArgument, "null contour");
        };
        if g.is_null() || dg.is_null() {
            return fail(CapresStatus::NullArgument, "null output");
        }
        if t.is_nan() || t < 0.0 {
            return fail(CapresStatus::InvalidArgument, format!("t = {t} must be non-negative"));
        }
        let (gv, dv) = c.0.point(t);
        // SAFETY: both outputs hold two doubles.
        unsafe {
            *g = gv.re;
            *g.add(1) = gv.im;
            *dg = dv.re;
            *dg.add(1) = dv.im;
        }
        CapresStatus::Ok
    })
}

/// # Safety
/// `contour` must be a live handle or null; it is freed once.
#[no_mangle]
pub unsafe extern "C" fn capres_contour_free(contour: *mut CapresContour) {
    if !contour.is_null() {
        // SAFETY: the handle was produced by `Box::into_raw`.
        drop(unsafe { Box::from_raw(contour) });
    }
}

fn config_ref<'a>(config: *const CapresConfig) -> Result<&'a RunConfig, CapresStatus> {
    // SAFETY: callers pass a live handle or null.
    unsafe { config.as_ref() }
        .map(|c| &c.config)
        .ok_or_else(|| fail(CapresStatus::NullArgument, "null config"))
}

/// Oracle resonance energies in the rectangle, sorted by real part.
///
/// # Safety
/// `config` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn capres_oracle_find(
    config: *const CapresConfig,
    re_min: f64,
    re_max: f64,
    im_min: f64,
    im_max: f64,
    out: *mut *mut CapresComplexList,
) -> CapresStatus {
    guard(|| {
        let cfg = match config_ref(config) {
            Ok(c) => c,
            Err(s) => return s,
        };
        if out.is_null() {
            return fail(CapresStatus::NullArgument, "null output");
        }
        let window = EnergyWindow::new(re_min, re_max, im_min, im_max);
        match find_resonances(&cfg.problem, &window) {
            Ok(found) => {
                let mut zs: Vec<C64> = found.iter().map(|r| r.energy()).collect();
                zs.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
                boxed(out, CapresComplexList(zs))
            }
            Err(e) => fail(CapresStatus::ComputeError, e.to_string()),
        }
    })
}

/// All eigenvalues of the scaled operator at `contour.theta` and
/// `scaling.epsilon`, sorted by real part.
///
/// # Safety
/// `config` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn capres_scaling_eigenvalues(
    config: *const CapresConfig,
    out: *mut *mut CapresComplexList,
) -> CapresStatus {
    guard(|| {
        let cfg = match config_ref(config) {
            Ok(c) => c,
            Err(s) => return s,
        };
        if out.is_null() {
            return fail(CapresStatus::NullArgument, "null output");
        }
        let run = || -> Result<Vec<C64>, String> {
            let c = build_contour(cfg.contour.theta, cfg.problem.r1, cfg.contour.alpha0).map_err(|e| e.to_string())?;
            let op = assemble_scaled_operator(
                &cfg.problem,
                &c,
                cfg.scaling_epsilon,
                &cfg.discretization.cutoff,
                &cfg.discretization.grid(),
            )
            .map_err(|e| e.to_string())?;
            let mut zs = eig_dense(&op.entries).map_err(|e| e.to_string())?.eigenvalues;
            zs.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
            Ok(zs)
        };
        match run() {
            Ok(zs) => boxed(out, CapresComplexList(zs)),
            Err(m) => fail(CapresStatus::ComputeError, m),
        }
    })
}

/// DtN winding number around the configured `dtn` circle, with the
/// projection rank of the scaled operator for comparison.
///
/// # Safety
/// `config` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn capres_dtn_count(config: *const CapresConfig, out: *mut CapresDtnCount) -> CapresStatus {
    guard(|| {
        let cfg = match config_ref(config) {
            Ok(c) => c,
            Err(s) => return s,
        };
        if out.is_null() {
            return fail(CapresStatus::NullArgument, "null output");
        }
        let Some(center) = cfg.dtn.center else {
            return fail(CapresStatus::InvalidConfig, "dtn.center is not set");
        };
        let run = || -> Result<CapresDtnCount, String> {
            let circle = Circle::new(center, cfg.dtn.radius);
            let c = build_contour(cfg.contour.theta, cfg.problem.r1, cfg.contour.alpha0).map_err(|e| e.to_string())?;
            let disc = ExteriorDiscretization {
                length: cfg.discretization.length,
                spacing: cfg.discretization.spacing(),
                cutoff: cfg.discretization.cutoff,
            };
            let eps = cfg.dtn.epsilon;
            let iface = match cfg.dtn.candidates[..] {
                [a] => Interface::new(&cfg.problem, a).map_err(|e| e.to_string())?,
                _ => {
                    dtn::choose_interface(&cfg.problem, &c, eps, &Region::Disk(circle), &cfg.dtn.candidates, &disc)
                        .map_err(|e| e.to_string())?
                        .interface
                }
            };
            let count = dtn::count_resonances_dtn(&cfg.problem, &c, eps, &iface, &disc, &circle, cfg.dtn.samples)
                .map_err(|e| format!("{}: {e}", e.kind()))?;
            let op = assemble_scaled_operator(&cfg.problem, &c, eps, &cfg.discretization.cutoff, &cfg.discretization.grid())
                .map_err(|e| e.to_string())?;
            let proj = projection_rank(&op.entries, center, cfg.dtn.radius, cfg.quadrature_points)
                .map_err(|e| e.to_string())?;
            Ok(CapresDtnCount {
                winding: count.winding,
                projection_rank: proj.rank as u64,
                interface: iface.a,
                samples: count.samples as u64,
            })
        };
        match run() {
            Ok(r) => {
                // SAFETY: checked non-null.
                unsafe { *out = r };
                CapresStatus::Ok
            }
            Err(m) => fail(CapresStatus::ComputeError, m),
        }
    })
}

/// Number of entries; zero for a null list.
///
/// # Safety
/// `list` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn capres_list_len(list: *const CapresComplexList) -> usize {
    // SAFETY: caller passes a live handle or null.
    unsafe { list.as_ref() }.map_or(0, |l| l.0.len())
}

/// Writes entry `index` to `re` and `im`.
///
/// # Safety
/// `list` must be a live handle; `re` and `im` writable pointers.
#[no_mangle]
pub unsafe extern "C" fn capres_list_get(
    list: *const CapresComplexList,
    index: usize,
    re: *mut f64,
    im: *mut f64,
) -> CapresStatus {
    // SAFETY: caller passes a live handle or null.
    let Some(l) = (unsafe { list.as_ref() }) else {
        return fail(CapresStatus::NullArgument, "null list");
    };
    if re.is_null() || im.is_null() {
        return fail(CapresStatus::NullArgument, "null output");
    }
    let Some(z) = l.0.get(index) else {
        return fail(CapresStatus::OutOfRange, format!("index {index} >= length {}", l.0.len()));
    };
    // SAFETY: checked non-null.
    unsafe {
        *re = z.re;
        *im = z.im;
    }
    CapresStatus::Ok
}

/// # Safety
/// `list` must be a live handle or null; it is freed once.
#[no_mangle]
pub unsafe extern "C" fn capres_list_free(list: *mut CapresComplexList) {
    if !list.is_null() {
        // SAFETY: the handle was produced by `Box::into_raw`.
        drop(unsafe { Box::from_raw(list) });
    }
}
