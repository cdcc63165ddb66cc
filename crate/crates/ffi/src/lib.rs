//! C ABI over the privacy controller.
//!
//! Every fallible call returns a [`PcStatus`]; on failure the message is
//! available from [`pc_last_error_message`] on the same thread. Strings
//! handed out by the library must be released with [`pc_string_free`],
//! engines with [`pc_engine_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use privacy_controller::corpus::parse_corpus;
use privacy_controller::prelude::*;

/// Status codes. `PC_STATUS_OK` is zero; everything else is an error.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcStatus {
    Ok = 0,
    NullPointer,
    InvalidUtf8,
    ParseError,
    InvalidInput,
    EmptyTranscript,
    EmptyCorpus,
    MissingLabels,
    UnknownConversation,
    IoError,
    Panic,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcLevel {
    Low = 0,
    Moderate = 1,
    High = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcAction {
    Full = 0,
    Summary = 1,
    Refuse = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcMatchMode {
    Full = 0,
    Partial = 1,
}

/// Loaded rule set plus extraction resources and trust groups.
pub struct PcEngine {
    ruleset: RuleSet,
    resources: Resources,
    groups: TrustGroupConfig,
    mode: MatchMode,
}

impl PcEngine {
    fn new(ruleset: RuleSet) -> Self {
        PcEngine {
            ruleset,
            resources: Resources::builtin(),
            groups: TrustGroupConfig::default(),
            mode: MatchMode::Full,
        }
    }

    fn extract(&self, record_json: &str) -> Result<(ConversationRecord, MetadataTuple)> {
        let record = ConversationRecord::from_json(record_json)?;
        let tuple = extract_metadata(&record, &self.resources, RelationshipClass::Stranger)?;
        Ok((record, tuple))
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

enum Failure {
    Null(&'static str),
    Utf8(&'static str),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn status_of(e: &Error) -> PcStatus {
    match e {
        Error::Parse { .. } | Error::Json(_) => PcStatus::ParseError,
        Error::EmptyTranscript => PcStatus::EmptyTranscript,
        Error::EmptyCorpus => PcStatus::EmptyCorpus,
        Error::MissingLabels { .. } | Error::UnlabeledScenario(_) => PcStatus::MissingLabels,
        Error::UnknownConversation(_) => PcStatus::UnknownConversation,
        Error::Io { .. } => PcStatus::IoError,
        _ => PcStatus::InvalidInput,
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> std::result::Result<(), Failure>) -> PcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PcStatus::Ok,
        Ok(Err(Failure::Null(arg))) => {
            set_last_error(format!("`{arg}` is null"));
            PcStatus::NullPointer
        }
        Ok(Err(Failure::Utf8(arg))) => {
            set_last_error(format!("`{arg}` is not valid UTF-8"));
            PcStatus::InvalidUtf8
        }
        Ok(Err(Failure::Core(e))) => {
            set_last_error(format!("{}: {e}", e.kind()));
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic".into());
            PcStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &'static str) -> std::result::Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::Utf8(name))
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &'static str) -> std::result::Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(name))
}

unsafe fn engine_ref<'a>(p: *const PcEngine) -> std::result::Result<&'a PcEngine, Failure> {
    p.as_ref().ok_or(Failure::Null("engine"))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

fn level_to_c(l: ControlLevel) -> PcLevel {
    match l {
        ControlLevel::Low => PcLevel::Low,
        ControlLevel::Moderate => PcLevel::Moderate,
        ControlLevel::High => PcLevel::High,
    }
}

fn level_from_c(l: PcLevel) -> ControlLevel {
    match l {
        PcLevel::Low => ControlLevel::Low,
        PcLevel::Moderate => ControlLevel::Moderate,
        PcLevel::High => ControlLevel::High,
    }
}

/// Creates an engine from rule-set JSON. A null `ruleset_json` gives an
/// engine with no rules, which answers high for everything.
///
/// # Safety
/// `ruleset_json` must be null or a NUL-terminated string; `out` must be
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pc_engine_new(ruleset_json: *const c_char, out: *mut *mut PcEngine) -> PcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let ruleset = if ruleset_json.is_null() {
            RuleSet::empty()
        } else {
            RuleSet::from_json(str_arg(ruleset_json, "ruleset_json")?)?
        };
        *out = Box::into_raw(Box::new(PcEngine::new(ruleset)));
        Ok(())
    })
}

/// Creates an engine from a rule-set file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pc_engine_load(path: *const c_char, out: *mut *mut PcEngine) -> PcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let path = Path::new(str_arg(path, "path")?);
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        *out = Box::into_raw(Box::new(PcEngine::new(RuleSet::from_json(&text)?)));
        Ok(())
    })
}

/// # Safety
/// `engine` must be null or come from `pc_engine_new`/`pc_engine_load`,
/// and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pc_engine_free(engine: *mut PcEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// # Safety
/// `engine` must be a live engine.
#[no_mangle]
pub unsafe extern "C" fn pc_engine_set_match_mode(engine: *mut PcEngine, mode: PcMatchMode) -> PcStatus {
    guard(|| {
        let engine = out_arg(engine, "engine")?;
        engine.mode = match mode {
            PcMatchMode::Full => MatchMode::Full,
            PcMatchMode::Partial => MatchMode::Partial,
        };
        Ok(())
    })
}

/// Replaces the trust groups used by `pc_engine_gate`. The JSON maps
/// group names to arrays of member ids.
///
/// # Safety
/// `engine` must be a live engine; `groups_json` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn pc_engine_set_groups(engine: *mut PcEngine, groups_json: *const c_char) -> PcStatus {
    guard(|| {
        let engine = out_arg(engine, "engine")?;
        engine.groups = TrustGroupConfig::parse(str_arg(groups_json, "groups_json")?)?;
        Ok(())
    })
}

/// # Safety
/// `engine` must be a live engine; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pc_engine_ruleset_version(engine: *const PcEngine, out: *mut u64) -> PcStatus {
    guard(|| {
        *out_arg(out, "out")? = engine_ref(engine)?.ruleset.version;
        Ok(())
    })
}

/// Predicts the control level of a conversation record given as JSON
/// (`{id, transcript, context}`).
///
/// # Safety
/// `engine` must be a live engine, `record_json` a NUL-terminated string
/// and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pc_engine_predict(
    engine: *const PcEngine,
    record_json: *const c_char,
    out: *mut PcLevel,
) -> PcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let engine = engine_ref(engine)?;
        let (_, tuple) = engine.extract(str_arg(record_json, "record_json")?)?;
        *out = level_to_c(predict(&tuple, &engine.ruleset, engine.mode));
        Ok(())
    })
}

/// Writes the extracted metadata tuple as JSON to `*out_json`.
///
/// # Safety
/// As for `pc_engine_predict`; free the result with `pc_string_free`.
#[no_mangle]
pub unsafe extern "C" fn pc_engine_extract(
    engine: *const PcEngine,
    record_json: *const c_char,
    out_json: *mut *mut c_char,
) -> PcStatus {
    guard(|| {
        let out = out_arg(out_json, "out_json")?;
        *out = ptr::null_mut();
        let engine = engine_ref(engine)?;
        let (_, tuple) = engine.extract(str_arg(record_json, "record_json")?)?;
        *out = into_c_string(serde_json::to_string(&tuple).map_err(Error::from)?);
        Ok(())
    })
}

/// Writes the vote breakdown (predicted level, tally, fired rules) as JSON.
///
/// # Safety
/// As for `pc_engine_predict`; free the result with `pc_string_free`.
#[no_mangle]
pub unsafe extern "C" fn pc_engine_explain(
    engine: *const PcEngine,
    record_json: *const c_char,
    out_json: *mut *mut c_char,
) -> PcStatus {
    guard(|| {
        let out = out_arg(out_json, "out_json")?;
        *out = ptr::null_mut();
        let engine = engine_ref(engine)?;
        let (_, tuple) = engine.extract(str_arg(record_json, "record_json")?)?;
        let explanation = explain(&tuple, &engine.ruleset, engine.mode);
        *out = into_c_string(serde_json::to_string(&explanation).map_err(Error::from)?);
        Ok(())
    })
}

/// Decides how much of the conversation `querier` may see. The level is
/// predicted from the record unless `level` is non-null, in which case it
/// is used as given.
///
/// # Safety
/// `engine` must be a live engine, the strings NUL-terminated, `level`
/// null or valid, and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pc_engine_gate(
    engine: *const PcEngine,
    record_json: *const c_char,
    querier: *const c_char,
    level: *const PcLevel,
    out: *mut PcAction,
) -> PcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let engine = engine_ref(engine)?;
        let querier = str_arg(querier, "querier")?;
        if querier.trim().is_empty() {
            return Err(Error::InvalidResource {
                what: "querier",
                reason: "id is empty".into(),
            }
            .into());
        }
        let (record, tuple) = engine.extract(str_arg(record_json, "record_json")?)?;
        let level = match level.as_ref() {
            Some(l) => level_from_c(*l),
            None => predict(&tuple, &engine.ruleset, engine.mode),
        };
        *out = match decide_disclosure(&record, level, querier, &engine.groups).action {
            DisclosureAction::Full => PcAction::Full,
            DisclosureAction::Summary => PcAction::Summary,
            DisclosureAction::Refuse => PcAction::Refuse,
        };
        Ok(())
    })
}

/// Token-set cosine similarity of two texts.
///
/// # Safety
/// `a` and `b` must be NUL-terminated strings; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pc_similarity(a: *const c_char, b: *const c_char, out: *mut f64) -> PcStatus {
    guard(|| {
        *out_arg(out, "out")? = similarity(str_arg(a, "a")?, str_arg(b, "b")?);
        Ok(())
    })
}

/// Mines a rule set from a labelled JSONL corpus held in memory and
/// writes it as JSON to `*out_json`.
///
/// # Safety
/// `corpus_jsonl` must be a NUL-terminated string and `out_json` a valid
/// pointer; free the result with `pc_string_free`.
#[no_mangle]
pub unsafe extern "C" fn pc_train(
    corpus_jsonl: *const c_char,
    n_supports: u32,
    min_confidence: f64,
    out_json: *mut *mut c_char,
) -> PcStatus {
    guard(|| {
        let out = out_arg(out_json, "out_json")?;
        *out = ptr::null_mut();
        let corpus = parse_corpus(str_arg(corpus_jsonl, "corpus_jsonl")?)?;
        let resources = Resources::builtin();
        let transactions = to_transactions(&corpus, &resources, &LabelThresholds::default())?;
        let config = MinerConfig {
            n_supports,
            min_confidence,
            ..MinerConfig::default()
        };
        let set = generate_rules(&transactions, &config, WeightVector::default())?;
        *out = into_c_string(set.to_json());
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn pc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}
