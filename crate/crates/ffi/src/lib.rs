//! C ABI over the `medsimp` library.
//!
//! Models are exposed as opaque handles created by `*_load` functions and
//! released with the matching `*_free`. Every fallible call returns a
//! [`MedsimpStatus`]; on failure a description is available from
//! [`medsimp_last_error`] on the same thread. Strings returned to the caller
//! must be released with [`medsimp_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::BufReader;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use medsimp::eval::{self, EvalCounts, EvalError};
use medsimp::lm::{self, LmError, LmScorer};
use medsimp::ontology::{self, AlignOptions, OntologyError, PhraseTable};
use medsimp::simplifier::{self, SimplifierConfig};
use medsimp::textproc;
use medsimp::wordfreq::{FreqError, FrequencyTable};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MedsimpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    InvalidArgument = 5,
    Panic = 6,
}

/// Phrase table handle.
pub struct MedsimpTable {
    inner: PhraseTable,
}

/// Language model handle (ARPA model or score table).
pub struct MedsimpLm {
    inner: Box<dyn LmScorer>,
}

/// Word frequency table handle.
pub struct MedsimpFreq {
    inner: FrequencyTable,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(MedsimpStatus, String);

impl Failure {
    fn invalid(msg: impl Into<String>) -> Self {
        Failure(MedsimpStatus::InvalidArgument, msg.into())
    }
}

impl From<OntologyError> for Failure {
    fn from(e: OntologyError) -> Self {
        let status = match e {
            OntologyError::Io(_) => MedsimpStatus::Io,
            _ => MedsimpStatus::Parse,
        };
        Failure(status, e.to_string())
    }
}

impl From<LmError> for Failure {
    fn from(e: LmError) -> Self {
        let status = match e {
            LmError::Io(_) => MedsimpStatus::Io,
            LmError::Parse { .. } => MedsimpStatus::Parse,
            _ => MedsimpStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<FreqError> for Failure {
    fn from(e: FreqError) -> Self {
        let status = match e {
            FreqError::Io(_) => MedsimpStatus::Io,
            FreqError::Parse { .. } => MedsimpStatus::Parse,
            _ => MedsimpStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        let status = match e {
            EvalError::Io(_) => MedsimpStatus::Io,
            EvalError::Parse { .. } | EvalError::Csv(_) => MedsimpStatus::Parse,
            _ => MedsimpStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure(MedsimpStatus::Io, e.to_string())
    }
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MedsimpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            MedsimpStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {msg}"));
            MedsimpStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(
            MedsimpStatus::NullPointer,
            format!("{what} is null"),
        ));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        Failure(
            MedsimpStatus::InvalidUtf8,
            format!("{what} is not valid UTF-8"),
        )
    })
}

unsafe fn texts<'a>(
    p: *const *const c_char,
    n: usize,
    what: &str,
) -> Result<Vec<&'a str>, Failure> {
    if n == 0 {
        return Ok(Vec::new());
    }
    if p.is_null() {
        return Err(Failure(
            MedsimpStatus::NullPointer,
            format!("{what} is null"),
        ));
    }
    std::slice::from_raw_parts(p, n)
        .iter()
        .enumerate()
        .map(|(i, &s)| text(s, &format!("{what}[{i}]")))
        .collect()
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(MedsimpStatus::NullPointer, format!("{what} is null")))
}

fn out_ptr<T>(p: *mut T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure(
            MedsimpStatus::NullPointer,
            format!("{what} is null"),
        ))
    } else {
        Ok(())
    }
}

fn open(path: &str) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure(MedsimpStatus::Io, format!("{path}: {e}")))
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn medsimp_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn medsimp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Load a phrase table written by `medsimp build-table`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn medsimp_table_load(
    path: *const c_char,
    out: *mut *mut MedsimpTable,
) -> MedsimpStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let path = text(path, "path")?;
        let inner = PhraseTable::read_tsv(open(path)?)?;
        *out = Box::into_raw(Box::new(MedsimpTable { inner }));
        Ok(())
    })
}

/// Align ontology TSV files (`concept_id, label, source, P|A`) into a table.
///
/// # Safety
/// `paths` must point to `n` NUL-terminated strings and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn medsimp_table_from_ontologies(
    paths: *const *const c_char,
    n: usize,
    pluralize: bool,
    out: *mut *mut MedsimpTable,
) -> MedsimpStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let paths = texts(paths, n, "paths")?;
        if paths.is_empty() {
            return Err(Failure::invalid("no ontology files given"));
        }
        let mut records = Vec::new();
        for path in paths {
            records.extend(ontology::parse_records(open(path)?)?);
        }
        let inner = ontology::align(&records, &AlignOptions { pluralize });
        *out = Box::into_raw(Box::new(MedsimpTable { inner }));
        Ok(())
    })
}

/// Number of alternative groups in the table; 0 for null.
///
/// # Safety
/// `table` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn medsimp_table_len(table: *const MedsimpTable) -> usize {
    table.as_ref().map_or(0, |t| t.inner.len())
}

/// # Safety
/// `table` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn medsimp_table_free(table: *mut MedsimpTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Load an ARPA model or a `sentence<TAB>score` table.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn medsimp_lm_load(
    path: *const c_char,
    out: *mut *mut MedsimpLm,
) -> MedsimpStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let path = text(path, "path")?;
        let body = std::fs::read_to_string(path)
            .map_err(|e| Failure(MedsimpStatus::Io, format!("{path}: {e}")))?;
        let inner = lm::load_scorer(&body)?;
        *out = Box::into_raw(Box::new(MedsimpLm { inner }));
        Ok(())
    })
}

/// Mean natural-log probability per token of `sentence`.
///
/// # Safety
/// `model` must be a live handle, `sentence` NUL-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn medsimp_lm_score(
    model: *const MedsimpLm,
    sentence: *const c_char,
    out: *mut f64,
) -> MedsimpStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let model = handle(model, "model")?;
        let tokens = textproc::normalize(text(sentence, "sentence")?);
        let refs: Vec<&str> = tokens.iter().map(String::as_str).collect();
        *out = model.inner.score(&refs)?;
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn medsimp_lm_free(model: *mut MedsimpLm) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Load `word<TAB>probability` rows.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn medsimp_freq_load(
    path: *const c_char,
    out: *mut *mut MedsimpFreq,
) -> MedsimpStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let path = text(path, "path")?;
        let inner = FrequencyTable::load(open(path)?)?;
        *out = Box::into_raw(Box::new(MedsimpFreq { inner }));
        Ok(())
    })
}

/// Minimum over the words of `term` of ln(P(word) + 1e-10).
///
/// # Safety
/// `freq` must be a live handle, `term` NUL-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn medsimp_freq_wf(
    freq: *const MedsimpFreq,
    term: *const c_char,
    out: *mut f64,
) -> MedsimpStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let freq = handle(freq, "freq")?;
        let words = textproc::normalize(text(term, "term")?);
        *out = freq.inner.wf(&words)?;
        Ok(())
    })
}

/// # Safety
/// `freq` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn medsimp_freq_free(freq: *mut MedsimpFreq) {
    if !freq.is_null() {
        drop(Box::from_raw(freq));
    }
}

/// Simplify one sentence. On success `*out` holds a new string (release it
/// with `medsimp_string_free`) and `*iterations` the number of passes that
/// changed the sentence.
///
/// # Safety
/// Handles must be live, `sentence` NUL-terminated, `out` and `iterations` valid.
#[no_mangle]
pub unsafe extern "C" fn medsimp_simplify(
    table: *const MedsimpTable,
    model: *const MedsimpLm,
    freq: *const MedsimpFreq,
    sentence: *const c_char,
    alpha: f64,
    max_iterations: u32,
    out: *mut *mut c_char,
    iterations: *mut u32,
) -> MedsimpStatus {
    guard(|| {
        out_ptr(out, "out")?;
        out_ptr(iterations, "iterations")?;
        let (table, model, freq) = (
            handle(table, "table")?,
            handle(model, "model")?,
            handle(freq, "freq")?,
        );
        let sentence = text(sentence, "sentence")?;
        let config = SimplifierConfig {
            alpha,
            max_iterations: max_iterations as usize,
            ..SimplifierConfig::default()
        }
        .validated()
        .map_err(|e| Failure::invalid(e.to_string()))?;
        let result =
            simplifier::simplify(sentence, &table.inner, &model.inner, &freq.inner, &config);
        let c = CString::new(result.final_sentence)
            .map_err(|_| Failure::invalid("sentence contains NUL"))?;
        *iterations = result.iterations as u32;
        *out = c.into_raw();
        Ok(())
    })
}

/// `(S - F) / (S + F + E + N + U)`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn medsimp_simplification_gain(
    s: u64,
    f: u64,
    e: u64,
    n: u64,
    u: u64,
    out: *mut f64,
) -> MedsimpStatus {
    guard(|| {
        out_ptr(out, "out")?;
        *out = eval::simplification_gain(&EvalCounts::new(s, f, e, n, u))?;
        Ok(())
    })
}

/// Sentence SARI (0 to 100) against `n_refs` references.
///
/// # Safety
/// Strings must be NUL-terminated; `refs` must point to `n_refs` strings.
#[no_mangle]
pub unsafe extern "C" fn medsimp_sari(
    source: *const c_char,
    output: *const c_char,
    refs: *const *const c_char,
    n_refs: usize,
    out: *mut f64,
) -> MedsimpStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let refs = texts(refs, n_refs, "refs")?;
        *out = eval::sari(text(source, "source")?, text(output, "output")?, &refs)?;
        Ok(())
    })
}

/// Corpus BLEU (0 to 100) over `n` output/reference pairs.
///
/// # Safety
/// `outputs` and `refs` must each point to `n` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn medsimp_bleu(
    outputs: *const *const c_char,
    refs: *const *const c_char,
    n: usize,
    out: *mut f64,
) -> MedsimpStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let outputs = texts(outputs, n, "outputs")?;
        let refs = texts(refs, n, "refs")?;
        *out = eval::bleu(&outputs, &refs)?;
        Ok(())
    })
}
