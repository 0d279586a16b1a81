//! C interface to `approvalmap`.
//!
//! Elections are opaque `AmElection` handles owned by the caller and released
//! with `am_election_free`. Every fallible function returns an `AmStatus`; on
//! failure `am_last_error` describes the problem until the next call on the
//! same thread. Strings returned by the library are freed with `am_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Duration;

use approvalmap::committees::{pav_committee, PavScore};
use approvalmap::cultures::CultureSpec;
use approvalmap::experiments::election_statistics;
use approvalmap::metrics::{approvalwise_distance, isomorphic_hamming};
use approvalmap::{Election, Error, RngSeed};

/// Opaque election handle.
pub struct AmElection(Election);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Parse = 4,
    SizeMismatch = 5,
    ResourceCap = 6,
    Io = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmMetric {
    Approvalwise = 0,
    IsomorphicHamming = 1,
}

/// Per-election statistics. `pav_optimal` is 1 when the PAV committee was
/// proved optimal within the budget, 0 otherwise.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AmStatistics {
    pub max_score: f64,
    pub cohesiveness_level: usize,
    pub cohesive_fraction: f64,
    pub pav_runtime_seconds: f64,
    pub pav_score: f64,
    pub pav_optimal: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let clean = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = clean);
}

fn status_of(err: &Error) -> AmStatus {
    match err.root() {
        Error::Parse { .. } | Error::Json(_) | Error::Csv(_) | Error::InvalidElection(_) => {
            AmStatus::Parse
        }
        Error::SizeMismatch(_) => AmStatus::SizeMismatch,
        Error::ResourceCap(_) => AmStatus::ResourceCap,
        Error::Io(_) => AmStatus::Io,
        _ => AmStatus::InvalidArgument,
    }
}

struct Failure(AmStatus, String);

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Failure(status_of(&err), err.to_string())
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> AmStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            AmStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(&message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            AmStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(AmStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(AmStatus::InvalidUtf8, format!("`{what}`: {e}")))
}

unsafe fn election<'a>(p: *const AmElection, what: &str) -> Result<&'a Election, Failure> {
    p.as_ref().map(|h| &h.0).ok_or_else(|| null(what))
}

unsafe fn emit(out: *mut *mut AmElection, e: Election) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(AmElection(e)));
    Ok(())
}

fn budget(seconds: f64) -> Result<Duration, Failure> {
    Duration::try_from_secs_f64(seconds).map_err(|_| {
        Failure(
            AmStatus::InvalidArgument,
            format!("bad PAV budget {seconds}"),
        )
    })
}

fn to_f64(score: PavScore) -> f64 {
    *score.numer() as f64 / *score.denom() as f64
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next library call on this thread.
#[no_mangle]
pub extern "C" fn am_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn am_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses the text format: a header line `m n`, then one line per voter.
///
/// # Safety
/// `text` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn am_election_from_text(
    text: *const c_char,
    out: *mut *mut AmElection,
) -> AmStatus {
    guard(|| emit(out, Election::from_text(self::text(text, "text")?)?))
}

/// # Safety
/// `json` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn am_election_from_json(
    json: *const c_char,
    out: *mut *mut AmElection,
) -> AmStatus {
    guard(|| emit(out, Election::from_json(text(json, "json")?)?))
}

/// Builds an election from ballots in compressed form: voter `v` approves
/// `candidates[offsets[v] .. offsets[v + 1]]`. `offsets` has `n + 1` entries.
///
/// # Safety
/// `offsets` must hold `n + 1` values and `candidates` at least `offsets[n]`.
#[no_mangle]
pub unsafe extern "C" fn am_election_from_ballots(
    m: usize,
    n: usize,
    offsets: *const usize,
    candidates: *const usize,
    out: *mut *mut AmElection,
) -> AmStatus {
    guard(|| {
        if offsets.is_null() {
            return Err(null("offsets"));
        }
        let offsets = std::slice::from_raw_parts(offsets, n + 1);
        let total = offsets[n];
        if offsets.windows(2).any(|w| w[0] > w[1]) || offsets[0] != 0 {
            return Err(Failure(
                AmStatus::InvalidArgument,
                "offsets must start at 0 and not decrease".into(),
            ));
        }
        let candidates = if total == 0 {
            &[][..]
        } else if candidates.is_null() {
            return Err(null("candidates"));
        } else {
            std::slice::from_raw_parts(candidates, total)
        };
        let votes = offsets
            .windows(2)
            .map(|w| candidates[w[0]..w[1]].to_vec())
            .collect();
        emit(out, Election::new(m, votes)?)
    })
}

/// Samples an election from a culture given as JSON, e.g.
/// `{"kind": "resampling", "p": 0.5, "phi": 0.25}`.
///
/// # Safety
/// `spec_json` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn am_election_sample(
    spec_json: *const c_char,
    m: usize,
    n: usize,
    seed: u64,
    out: *mut *mut AmElection,
) -> AmStatus {
    guard(|| {
        let spec: CultureSpec =
            serde_json::from_str(text(spec_json, "spec_json")?).map_err(|e| {
                let status = if e.is_data() {
                    AmStatus::InvalidArgument
                } else {
                    AmStatus::Parse
                };
                Failure(status, e.to_string())
            })?;
        emit(out, spec.sample(m, n, RngSeed(seed))?)
    })
}

/// Releases an election. Null is ignored.
///
/// # Safety
/// `e` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn am_election_free(e: *mut AmElection) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// # Safety
/// `e` must be a live handle; `m` and `n` must be writable.
#[no_mangle]
pub unsafe extern "C" fn am_election_size(
    e: *const AmElection,
    m: *mut usize,
    n: *mut usize,
) -> AmStatus {
    guard(|| {
        let e = election(e, "e")?;
        if m.is_null() || n.is_null() {
            return Err(null("m or n"));
        }
        *m = e.m();
        *n = e.n();
        Ok(())
    })
}

/// Serializes to the text format. Free the result with `am_string_free`.
///
/// # Safety
/// `e` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn am_election_to_text(
    e: *const AmElection,
    out: *mut *mut c_char,
) -> AmStatus {
    guard(|| {
        let e = election(e, "e")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s = CString::new(e.to_text()).expect("election text has no NUL");
        *out = s.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library, or be null.
#[no_mangle]
pub unsafe extern "C" fn am_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Writes the approvalwise vector into `out`, which must hold `len == m` values.
///
/// # Safety
/// `out` must be writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn am_approvalwise_vector(
    e: *const AmElection,
    out: *mut f64,
    len: usize,
) -> AmStatus {
    guard(|| {
        let e = election(e, "e")?;
        if out.is_null() {
            return Err(null("out"));
        }
        if len != e.m() {
            return Err(Failure(
                AmStatus::SizeMismatch,
                format!("buffer holds {len} values, need {}", e.m()),
            ));
        }
        let av = e.approvalwise_vector();
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(av.values());
        Ok(())
    })
}

/// Distance between two elections. Isomorphic Hamming returns
/// `AM_STATUS_RESOURCE_CAP` above 10 candidates.
///
/// # Safety
/// Both handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn am_distance(
    a: *const AmElection,
    b: *const AmElection,
    metric: AmMetric,
    out: *mut f64,
) -> AmStatus {
    guard(|| {
        let (a, b) = (election(a, "a")?, election(b, "b")?);
        if out.is_null() {
            return Err(null("out"));
        }
        *out = match metric {
            AmMetric::Approvalwise => approvalwise_distance(a, b)?,
            AmMetric::IsomorphicHamming => isomorphic_hamming(a, b)? as f64,
        };
        Ok(())
    })
}

/// Statistics for committee size `k`, with at most `pav_budget_seconds` for PAV.
///
/// # Safety
/// `e` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn am_statistics(
    e: *const AmElection,
    k: usize,
    pav_budget_seconds: f64,
    out: *mut AmStatistics,
) -> AmStatus {
    guard(|| {
        let e = election(e, "e")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let row = election_statistics("", "", e, k, budget(pav_budget_seconds)?);
        if let Some(message) = row.error {
            return Err(Failure(AmStatus::InvalidArgument, message));
        }
        *out = AmStatistics {
            max_score: row.max_score.unwrap_or(0.0),
            cohesiveness_level: row.cohesiveness_level.unwrap_or(0),
            cohesive_fraction: row.cohesive_fraction.unwrap_or(0.0),
            pav_runtime_seconds: row.pav_runtime_seconds.unwrap_or(0.0),
            pav_score: row.pav_score.unwrap_or(0.0),
            pav_optimal: i32::from(row.pav_optimal.unwrap_or(false)),
        };
        Ok(())
    })
}

/// Exact PAV committee. Writes `k` ascending candidate indices to `members`.
/// `optimal` (may be null) is set to 0 if the budget ran out first.
///
/// # Safety
/// `members` must be writable for `k` values; `score` must be writable.
#[no_mangle]
pub unsafe extern "C" fn am_pav_committee(
    e: *const AmElection,
    k: usize,
    budget_seconds: f64,
    members: *mut usize,
    score: *mut f64,
    optimal: *mut i32,
) -> AmStatus {
    guard(|| {
        let e = election(e, "e")?;
        if members.is_null() || score.is_null() {
            return Err(null("members or score"));
        }
        let outcome = pav_committee(e, k, budget(budget_seconds)?)?;
        std::slice::from_raw_parts_mut(members, k).copy_from_slice(outcome.committee.members());
        *score = to_f64(outcome.score);
        if !optimal.is_null() {
            *optimal = i32::from(outcome.is_optimal());
        }
        Ok(())
    })
}
