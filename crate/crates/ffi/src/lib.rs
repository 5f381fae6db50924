//! C ABI for the `randstop` library.
//!
//! Objects cross the boundary as opaque handles created by `rs_*_new` or
//! `rs_fit` and released with the matching `rs_*_free`. Every fallible call
//! returns an [`RsStatus`]; on failure a description is available from
//! [`rs_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use randstop::config::{Method, RunConfig};
use randstop::oracle::european_reference;
use randstop::{lower_bound_estimate, EstimateReport, EvaluationMode, LinkFunction, MarketModel, Policy};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Invalid model, policy document or option value.
    Config = 2,
    /// Non-finite values during fitting or estimation.
    Numeric = 3,
    /// Arguments inconsistent with each other (dimensions, dates).
    Argument = 4,
    Io = 5,
    /// A Rust panic was caught at the boundary.
    Panic = 6,
}

pub const RS_METHOD_BACKWARD: u32 = 0;
pub const RS_METHOD_FORWARD: u32 = 1;

pub const RS_LINK_LOGISTIC: u32 = 0;
pub const RS_LINK_GUMBEL: u32 = 1;

pub const RS_MODE_EXPECTATION: u32 = 0;
pub const RS_MODE_SAMPLED: u32 = 1;
pub const RS_MODE_HARD: u32 = 2;

/// Scalar market parameters. Initial prices are passed separately.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RsMarketParams {
    pub strike: f64,
    pub rate: f64,
    pub dividend: f64,
    pub vol: f64,
    pub maturity: f64,
    /// Number of exercise intervals; dates are `j * maturity / num_dates`.
    pub num_dates: usize,
}

/// Fitting options. Zero (or non-positive) optimizer entries select the
/// method's defaults.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RsFitOptions {
    /// `RS_METHOD_BACKWARD` or `RS_METHOD_FORWARD`.
    pub method: u32,
    /// `RS_LINK_LOGISTIC` or `RS_LINK_GUMBEL`.
    pub link: u32,
    pub degree: u32,
    pub train_paths: usize,
    pub train_seed: u64,
    pub optimizer_seed: u64,
    pub step_size: f64,
    pub max_iters: usize,
    pub restarts: usize,
}

/// A Monte Carlo price with its standard error and 95% interval.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RsEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub num_paths: usize,
}

/// Opaque market handle.
pub struct RsMarket(MarketModel);

/// Opaque policy handle.
pub struct RsPolicy(Policy);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &randstop::Error) -> RsStatus {
    use randstop::Error as E;
    match err {
        E::Config { .. } | E::Json(_) => RsStatus::Config,
        E::Numeric { .. } => RsStatus::Numeric,
        E::Argument(_) => RsStatus::Argument,
        E::Io(_) | E::Csv(_) => RsStatus::Io,
    }
}

enum Failure {
    Null(&'static str),
    Lib(randstop::Error),
}

impl From<randstop::Error> for Failure {
    fn from(e: randstop::Error) -> Self {
        Failure::Lib(e)
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            RsStatus::Ok
        }
        Ok(Err(Failure::Null(name))) => {
            set_last_error(format!("null pointer passed as `{name}`"));
            RsStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            RsStatus::Panic
        }
    }
}

unsafe fn non_null<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(name))
}

fn write_out<T>(out: *mut T, value: T, name: &'static str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null(name));
    }
    // SAFETY: checked non-null; the caller guarantees it is writable.
    unsafe { out.write(value) };
    Ok(())
}

fn link_from(code: u32) -> Result<LinkFunction, Failure> {
    match code {
        RS_LINK_LOGISTIC => Ok(LinkFunction::Logistic),
        RS_LINK_GUMBEL => Ok(LinkFunction::Gumbel),
        other => Err(randstop::Error::config("link", format!("unknown link code {other}")).into()),
    }
}

fn mode_from(code: u32) -> Result<EvaluationMode, Failure> {
    match code {
        RS_MODE_EXPECTATION => Ok(EvaluationMode::Expectation),
        RS_MODE_SAMPLED => Ok(EvaluationMode::Sampled),
        RS_MODE_HARD => Ok(EvaluationMode::HardThreshold),
        other => Err(randstop::Error::config("eval_mode", format!("unknown mode code {other}")).into()),
    }
}

fn to_estimate(r: &EstimateReport) -> RsEstimate {
    RsEstimate {
        estimate: r.estimate,
        std_error: r.std_error,
        ci_low: r.ci_low,
        ci_high: r.ci_high,
        num_paths: r.num_paths,
    }
}

/// Description of the last error on this thread, or null after a
/// successful call. The string stays valid until the next `rs_*` call on
/// the same thread.
#[no_mangle]
pub extern "C" fn rs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a market with `dim` assets.
///
/// # Safety
/// `params` must point to a valid `RsMarketParams`, `spot` to `dim`
/// readable doubles and `out` to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn rs_market_new(
    params: *const RsMarketParams,
    spot: *const f64,
    dim: usize,
    out: *mut *mut RsMarket,
) -> RsStatus {
    guard(|| {
        let p = non_null(params, "params")?;
        if spot.is_null() {
            return Err(Failure::Null("spot"));
        }
        // SAFETY: the caller guarantees `dim` readable values.
        let spot = std::slice::from_raw_parts(spot, dim).to_vec();
        let model = MarketModel::new(spot, p.strike, p.rate, p.dividend, p.vol, p.maturity, p.num_dates)?;
        write_out(out, Box::into_raw(Box::new(RsMarket(model))), "out")
    })
}

/// Releases a market. Null is ignored.
///
/// # Safety
/// `market` must be null or a handle from `rs_market_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rs_market_free(market: *mut RsMarket) {
    if !market.is_null() {
        drop(Box::from_raw(market));
    }
}

/// Simulates training paths and fits a policy.
///
/// # Safety
/// `market` must be a live market handle, `options` a valid pointer and
/// `out` writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn rs_fit(
    market: *const RsMarket,
    options: *const RsFitOptions,
    out: *mut *mut RsPolicy,
) -> RsStatus {
    guard(|| {
        let model = &non_null(market, "market")?.0;
        let o = non_null(options, "options")?;
        let mut config = RunConfig {
            method: match o.method {
                RS_METHOD_BACKWARD => Method::Backward,
                RS_METHOD_FORWARD => Method::Forward,
                other => {
                    return Err(randstop::Error::config("method", format!("unknown method code {other}")).into())
                }
            },
            link: link_from(o.link)?,
            degree: o.degree,
            train_paths: o.train_paths,
            ..RunConfig::default()
        };
        config.seeds.train = o.train_seed;
        config.seeds.optimizer = o.optimizer_seed;
        if o.step_size > 0.0 {
            config.optimizer.step_size = Some(o.step_size);
        }
        if o.max_iters > 0 {
            config.optimizer.max_iters = Some(o.max_iters);
        }
        if o.restarts > 0 {
            config.optimizer.restarts = Some(o.restarts);
        }
        config.optimizer_config().validate()?;
        let (policy, _) = randstop::cli::fit_policy(&config, model, o.train_paths, o.train_seed)?;
        write_out(out, Box::into_raw(Box::new(RsPolicy(policy))), "out")
    })
}

/// Releases a policy. Null is ignored.
///
/// # Safety
/// `policy` must be null or a handle from `rs_fit` or
/// `rs_policy_from_json` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rs_policy_free(policy: *mut RsPolicy) {
    if !policy.is_null() {
        drop(Box::from_raw(policy));
    }
}

/// Serializes a policy to JSON. Free the string with `rs_string_free`.
///
/// # Safety
/// `policy` must be a live policy handle and `out` writable storage for
/// one pointer.
#[no_mangle]
pub unsafe extern "C" fn rs_policy_to_json(policy: *const RsPolicy, out: *mut *mut c_char) -> RsStatus {
    guard(|| {
        let p = &non_null(policy, "policy")?.0;
        let json = CString::new(p.to_json()?)
            .map_err(|e| randstop::Error::argument(format!("policy JSON contains NUL: {e}")))?;
        write_out(out, json.into_raw(), "out")
    })
}

/// Parses a policy JSON document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable storage for
/// one handle.
#[no_mangle]
pub unsafe extern "C" fn rs_policy_from_json(json: *const c_char, out: *mut *mut RsPolicy) -> RsStatus {
    guard(|| {
        if json.is_null() {
            return Err(Failure::Null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| randstop::Error::config("policy", format!("not UTF-8: {e}")))?;
        let policy = Policy::from_json(text)?;
        write_out(out, Box::into_raw(Box::new(RsPolicy(policy))), "out")
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from `rs_policy_to_json` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Exercise probability of `policy` at date index `date` for a state of
/// `len` log-prices observed at time `t`.
///
/// # Safety
/// `policy` must be a live policy handle, `state` must point to `len`
/// readable doubles and `out` to one writable double.
#[no_mangle]
pub unsafe extern "C" fn rs_policy_eval_h(
    policy: *const RsPolicy,
    date: usize,
    state: *const f64,
    len: usize,
    t: f64,
    out: *mut f64,
) -> RsStatus {
    guard(|| {
        let p = &non_null(policy, "policy")?.0;
        if state.is_null() {
            return Err(Failure::Null("state"));
        }
        if len != p.state_dim() {
            return Err(randstop::Error::argument(format!(
                "state has {len} entries, policy expects {}",
                p.state_dim()
            ))
            .into());
        }
        if date > p.num_dates() {
            return Err(randstop::Error::argument(format!(
                "date {date} is past the last date {}",
                p.num_dates()
            ))
            .into());
        }
        let state = std::slice::from_raw_parts(state, len);
        write_out(out, p.eval_h(date, state, t), "out")
    })
}

/// Low-biased price of `policy` on `num_paths` fresh paths.
///
/// # Safety
/// `market` and `policy` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rs_estimate(
    market: *const RsMarket,
    policy: *const RsPolicy,
    num_paths: usize,
    seed: u64,
    mode: u32,
    out: *mut RsEstimate,
) -> RsStatus {
    guard(|| {
        let model = &non_null(market, "market")?.0;
        let p = &non_null(policy, "policy")?.0;
        let report = lower_bound_estimate(model, p, num_paths, seed, mode_from(mode)?)?;
        write_out(out, to_estimate(&report), "out")
    })
}

/// Price of exercising only at maturity.
///
/// # Safety
/// `market` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rs_european_reference(
    market: *const RsMarket,
    num_paths: usize,
    seed: u64,
    out: *mut RsEstimate,
) -> RsStatus {
    guard(|| {
        let model = &non_null(market, "market")?.0;
        let report = european_reference(model, num_paths, seed)?;
        write_out(out, to_estimate(&report), "out")
    })
}
