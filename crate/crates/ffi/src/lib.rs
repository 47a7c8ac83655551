//! C ABI over `relent`.
//!
//! Every function returns a [`RelentStatus`]. On failure the message is kept per
//! thread and read with [`relent_last_error_message`]. Objects are opaque handles
//! released with their `_free` function; strings returned through `char **` are
//! released with [`relent_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_double, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use relent::channels::{BipartiteDims, ChannelJson, QuantumChannel};
use relent::harness::{run_campaign, Campaign};
use relent::linalg::{CMatrix, ExtendedReal};
use relent::petz::{self, Figure};
use relent::states::{self, DensityOperator, EpsSchedule, StateJson};
use relent::uhlmann::{self, TSchedule};
use relent::{entropy, rng, Error};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelentStatus {
    Ok = 0,
    /// A certified inequality failed; outputs are still written.
    Violation = 1,
    NullPointer = 2,
    InvalidArgument = 3,
    Parse = 4,
    Dimension = 5,
    InvalidState = 6,
    Numerical = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelentMethod {
    Support = 0,
    Regularized = 1,
    Modular = 2,
    Form = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelentProof {
    Petz = 0,
    Uhlmann = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelentFigure {
    JensenInverse = 0,
    JensenLog = 1,
}

/// Density operator handle.
pub struct RelentState(DensityOperator);

/// Quantum channel handle.
pub struct RelentChannel(QuantumChannel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RelentStatus {
    match e {
        Error::Dimension(_) => RelentStatus::Dimension,
        Error::InvalidState(_) | Error::InvalidChannel(_) | Error::NotHermitian { .. } => RelentStatus::InvalidState,
        Error::Parse(_) | Error::Json(_) | Error::Schema(_) => RelentStatus::Parse,
        Error::NoConvergence { .. } | Error::Singular(_) | Error::Degenerate(_) => RelentStatus::Numerical,
        _ => RelentStatus::InvalidArgument,
    }
}

struct Fail(RelentStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

type FfiResult = Result<RelentStatus, Fail>;

fn guard(f: impl FnOnce() -> FfiResult) -> RelentStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err(Fail(s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            RelentStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(RelentStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| Fail(RelentStatus::Parse, format!("`{what}` is not UTF-8: {e}")))
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s).expect("no interior nul").into_raw()
}

fn ext_to_f64(v: ExtendedReal) -> f64 {
    match v {
        ExtendedReal::Finite(x) => x,
        ExtendedReal::PosInfinity => f64::INFINITY,
        ExtendedReal::NegInfinity => f64::NEG_INFINITY,
    }
}

/// Message of the last failed call on this thread, or null. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn relent_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must come from this library, or be null.
#[no_mangle]
pub unsafe extern "C" fn relent_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn relent_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parse a state from its JSON wire format.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn relent_state_from_json(json: *const c_char, out: *mut *mut RelentState) -> RelentStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let rho = states::state_from_json(read_str(json, "json")?)?;
        *out = Box::into_raw(Box::new(RelentState(rho)));
        Ok(RelentStatus::Ok)
    })
}

/// Build a state from row-major real and imaginary parts of a `dim × dim` matrix.
/// `im` may be null for a real matrix.
///
/// # Safety
/// `re` (and `im` when non-null) must point to `dim * dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn relent_state_from_parts(
    dim: usize,
    re: *const c_double,
    im: *const c_double,
    out: *mut *mut RelentState,
) -> RelentStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if re.is_null() {
            return Err(null("re"));
        }
        if dim == 0 {
            return Err(Fail(RelentStatus::InvalidArgument, "dim must be positive".into()));
        }
        let re = std::slice::from_raw_parts(re, dim * dim);
        let im = (!im.is_null()).then(|| std::slice::from_raw_parts(im, dim * dim));
        let m = CMatrix::from_fn(dim, dim, |i, j| {
            let k = i * dim + j;
            relent::linalg::matrix::c64(re[k], im.map_or(0.0, |v| v[k]))
        });
        *out = Box::into_raw(Box::new(RelentState(DensityOperator::from_matrix(m)?)));
        Ok(RelentStatus::Ok)
    })
}

/// Random state of the given rank from a seeded stream.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn relent_state_random(
    dim: usize,
    rank: usize,
    seed: u64,
    out: *mut *mut RelentState,
) -> RelentStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let rho = states::random_density(&mut rng::stream(seed, 0), dim, rank)?;
        *out = Box::into_raw(Box::new(RelentState(rho)));
        Ok(RelentStatus::Ok)
    })
}

/// # Safety
/// `state` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn relent_state_dim(state: *const RelentState, out: *mut usize) -> RelentStatus {
    guard(|| {
        *out_ptr(out, "out")? = as_ref(state, "state")?.0.dim();
        Ok(RelentStatus::Ok)
    })
}

/// # Safety
/// `state` must be a live handle; free the result with [`relent_string_free`].
#[no_mangle]
pub unsafe extern "C" fn relent_state_to_json(state: *const RelentState, out: *mut *mut c_char) -> RelentStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let s = &as_ref(state, "state")?.0;
        let text = serde_json::to_string(&StateJson::from_state(s, None, None)).map_err(Error::from)?;
        *out = to_c_string(text);
        Ok(RelentStatus::Ok)
    })
}

/// # Safety
/// `state` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn relent_state_free(state: *mut RelentState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Parse a channel from `{"kraus": [...], "d_in": n, "d_out": m}`.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn relent_channel_from_json(json: *const c_char, out: *mut *mut RelentChannel) -> RelentStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let cj: ChannelJson = serde_json::from_str(read_str(json, "json")?).map_err(Error::from)?;
        *out = Box::into_raw(Box::new(RelentChannel(cj.to_channel()?)));
        Ok(RelentStatus::Ok)
    })
}

/// Random channel `ℂ^dim → ℂ^dim` with `kraus_count` Kraus operators.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn relent_channel_random(
    dim: usize,
    kraus_count: usize,
    seed: u64,
    out: *mut *mut RelentChannel,
) -> RelentStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let ch = QuantumChannel::random(&mut rng::stream(seed, 1), dim, dim, kraus_count)?;
        *out = Box::into_raw(Box::new(RelentChannel(ch)));
        Ok(RelentStatus::Ok)
    })
}

/// # Safety
/// `channel` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn relent_channel_free(channel: *mut RelentChannel) {
    if !channel.is_null() {
        drop(Box::from_raw(channel));
    }
}

/// `S(ρ‖σ)` in nats; `+INFINITY` on the support-violation branch.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn relent_relative_entropy(
    rho: *const RelentState,
    sigma: *const RelentState,
    method: RelentMethod,
    out: *mut c_double,
) -> RelentStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let (r, s) = (&as_ref(rho, "rho")?.0, &as_ref(sigma, "sigma")?.0);
        let v = match method {
            RelentMethod::Support => entropy::relative_entropy_support(r, s)?.value,
            RelentMethod::Regularized => entropy::relative_entropy_regularized(r, s, &EpsSchedule::default())?.value,
            RelentMethod::Modular if r.is_full_rank() && s.is_full_rank() => {
                ExtendedReal::Finite(petz::entropy_via_modular(r.op(), s.op())?)
            }
            RelentMethod::Modular => petz::entropy_via_modular_regularized(r.op(), s.op(), &EpsSchedule::default())?,
            RelentMethod::Form => uhlmann::relative_entropy_form(r, s)?.value,
        };
        *out = ext_to_f64(v);
        Ok(RelentStatus::Ok)
    })
}

/// Certify `S(𝒞ρ‖𝒞σ) ≤ S(ρ‖σ)`. Returns `Violation` when the certificate fails.
///
/// # Safety
/// Handles must be live; output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn relent_dpi(
    rho: *const RelentState,
    sigma: *const RelentState,
    channel: *const RelentChannel,
    lhs: *mut c_double,
    rhs: *mut c_double,
) -> RelentStatus {
    guard(|| {
        let (lhs, rhs) = (out_ptr(lhs, "lhs")?, out_ptr(rhs, "rhs")?);
        let ch = &as_ref(channel, "channel")?.0;
        let cert = entropy::dpi_via_stinespring(&as_ref(rho, "rho")?.0, &as_ref(sigma, "sigma")?.0, ch)?;
        *lhs = ext_to_f64(cert.lhs);
        *rhs = ext_to_f64(cert.rhs);
        Ok(if cert.holds { RelentStatus::Ok } else { RelentStatus::Violation })
    })
}

/// Certify monotonicity under `Tr_b` on `ℂ^{d_a} ⊗ ℂ^{d_b}` and report
/// `S(ρ‖σ) − S(Tr_b ρ‖Tr_b σ)` (`+INFINITY` when the full side diverges).
/// When `certificate_json` is non-null it receives the full certificate.
///
/// # Safety
/// Handles must be live; `gap` must be writable.
#[no_mangle]
pub unsafe extern "C" fn relent_chain(
    rho: *const RelentState,
    sigma: *const RelentState,
    d_a: usize,
    d_b: usize,
    proof: RelentProof,
    gap: *mut c_double,
    certificate_json: *mut *mut c_char,
) -> RelentStatus {
    guard(|| {
        let gap = out_ptr(gap, "gap")?;
        let (r, s) = (&as_ref(rho, "rho")?.0, &as_ref(sigma, "sigma")?.0);
        let dims = BipartiteDims::new(d_a, d_b)?;
        let (g, holds, text) = match proof {
            RelentProof::Petz => {
                let c = petz::corrected_monotonicity(r, s, dims, &EpsSchedule::default())?;
                (c.final_gap.unwrap_or(f64::INFINITY), c.holds, serde_json::to_string(&c).map_err(Error::from)?)
            }
            RelentProof::Uhlmann => {
                let c = uhlmann::uhlmann_monotonicity(r, s, dims, &TSchedule::default())?;
                (ext_to_f64(c.final_gap), c.holds, serde_json::to_string(&c).map_err(Error::from)?)
            }
        };
        *gap = g;
        if !certificate_json.is_null() {
            *certificate_json = to_c_string(text);
        }
        Ok(if holds { RelentStatus::Ok } else { RelentStatus::Violation })
    })
}

/// CSV (`x,lhs,rhs,violation`) of a scalar counterexample over `grid`.
///
/// # Safety
/// `grid` must point to `n` doubles; free the result with [`relent_string_free`].
#[no_mangle]
pub unsafe extern "C" fn relent_figure_csv(
    which: RelentFigure,
    alpha: c_double,
    xi: c_double,
    grid: *const c_double,
    n: usize,
    out: *mut *mut c_char,
) -> RelentStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let grid = if n == 0 {
            return Err(Fail(RelentStatus::InvalidArgument, "grid is empty".into()));
        } else if grid.is_null() {
            return Err(null("grid"));
        } else {
            std::slice::from_raw_parts(grid, n)
        };
        let fig = match which {
            RelentFigure::JensenInverse => Figure::JensenInverse,
            RelentFigure::JensenLog => Figure::JensenLog,
        };
        *out = to_c_string(petz::rows_to_csv(&petz::flawed_step_counterexample(fig, alpha, xi, grid)?));
        Ok(RelentStatus::Ok)
    })
}

/// Run a campaign given as TOML or JSON text. `jobs = 0` uses the default pool.
/// Returns `Violation` when any instance failed.
///
/// # Safety
/// `config` must be a nul-terminated string; free `report_json` with [`relent_string_free`].
#[no_mangle]
pub unsafe extern "C" fn relent_campaign_run(
    config: *const c_char,
    jobs: usize,
    report_json: *mut *mut c_char,
    fail_count: *mut usize,
) -> RelentStatus {
    guard(|| {
        let out = out_ptr(report_json, "report_json")?;
        let c: Campaign = read_str(config, "config")?.parse()?;
        let report = run_campaign(&c, (jobs > 0).then_some(jobs))?;
        if let Some(f) = fail_count.as_mut() {
            *f = report.total_fail;
        }
        let ok = report.total_fail == 0;
        *out = to_c_string(report.to_json());
        Ok(if ok { RelentStatus::Ok } else { RelentStatus::Violation })
    })
}
