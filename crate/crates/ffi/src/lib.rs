//! C ABI over `sgg-core`.
//!
//! Objects cross the boundary as opaque handles that the caller releases with
//! the matching `*_free`. Every fallible call returns an [`SggStatus`]; on
//! failure [`sgg_last_error`] describes the error for the calling thread.
//! Strings returned through out-parameters are owned by the caller and must
//! be released with [`sgg_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use sgg_core::data::{load_checkpoint, load_scenes, CooccurrenceStats};
use sgg_core::eval::{evaluate, score_wtd, DEFAULT_KS};
use sgg_core::inference::{infer, Mode};
use sgg_core::model::Model;
use sgg_core::ontology::Ontology;
use sgg_core::scene::{Scene, ScenePrediction};
use sgg_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SggStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Json = 4,
    Schema = 5,
    Config = 6,
    Domain = 7,
    Usage = 8,
    Format = 9,
    OntologyMismatch = 10,
    Diverged = 11,
    Panic = 12,
}

impl From<&Error> for SggStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Io { .. } => SggStatus::Io,
            Error::Json(_) => SggStatus::Json,
            Error::Schema(_) => SggStatus::Schema,
            Error::Config(_) => SggStatus::Config,
            Error::Domain(_) => SggStatus::Domain,
            Error::Usage(_) => SggStatus::Usage,
            Error::Format(_) => SggStatus::Format,
            Error::OntologyMismatch { .. } => SggStatus::OntologyMismatch,
            Error::Diverged { .. } => SggStatus::Diverged,
        }
    }
}

/// Object and relation vocabulary.
pub struct SggOntology(Ontology);

/// A list of scenes validated against an ontology.
pub struct SggScenes(Vec<Scene>);

/// A trained model with the co-occurrence statistics it runs on.
pub struct SggModel {
    model: Model,
    stats: CooccurrenceStats,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

struct Failure(SggStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(SggStatus::from(&e), e.to_string())
    }
}

/// Runs `f`, recording any error or panic for [`sgg_last_error`].
fn guarded(f: impl FnOnce() -> Result<(), Failure>) -> SggStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SggStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SggStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(SggStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(SggStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure(SggStatus::NullPointer, format!("{what} is null")))
}

fn out_arg<T>(p: *mut T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(Failure(SggStatus::NullPointer, format!("{what} is null")));
    }
    Ok(())
}

fn to_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(SggStatus::InvalidUtf8, "output contains a NUL byte".into()))
}

/// Message of the last failed call on this thread; empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sgg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn sgg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Composite Open-Images score from R@50 and the two weighted mAPs.
#[no_mangle]
pub extern "C" fn sgg_score_wtd(r50: f64, wmap_rel: f64, wmap_phr: f64) -> f64 {
    score_wtd(r50, wmap_rel, wmap_phr)
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sgg_ontology_load(path: *const c_char, out: *mut *mut SggOntology) -> SggStatus {
    guarded(|| {
        out_arg(out, "out")?;
        let ont = Ontology::load(PathBuf::from(str_arg(path, "path")?))?;
        *out = Box::into_raw(Box::new(SggOntology(ont)));
        Ok(())
    })
}

/// # Safety
/// `ontology` must come from [`sgg_ontology_load`] or be null.
#[no_mangle]
pub unsafe extern "C" fn sgg_ontology_free(ontology: *mut SggOntology) {
    if !ontology.is_null() {
        drop(Box::from_raw(ontology));
    }
}

/// Loads a JSON Lines scene file.
///
/// # Safety
/// Pointers must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sgg_scenes_load(
    ontology: *const SggOntology,
    path: *const c_char,
    out: *mut *mut SggScenes,
) -> SggStatus {
    guarded(|| {
        out_arg(out, "out")?;
        let ont = ref_arg(ontology, "ontology")?;
        let scenes = load_scenes(PathBuf::from(str_arg(path, "path")?), &ont.0)?;
        *out = Box::into_raw(Box::new(SggScenes(scenes)));
        Ok(())
    })
}

/// Number of scenes, 0 for null.
///
/// # Safety
/// `scenes` must come from [`sgg_scenes_load`] or be null.
#[no_mangle]
pub unsafe extern "C" fn sgg_scenes_len(scenes: *const SggScenes) -> usize {
    scenes.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `scenes` must come from [`sgg_scenes_load`] or be null.
#[no_mangle]
pub unsafe extern "C" fn sgg_scenes_free(scenes: *mut SggScenes) {
    if !scenes.is_null() {
        drop(Box::from_raw(scenes));
    }
}

/// Loads a checkpoint and the statistics file it is used with.
///
/// # Safety
/// Pointers must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sgg_model_load(
    ontology: *const SggOntology,
    checkpoint_path: *const c_char,
    stats_path: *const c_char,
    out: *mut *mut SggModel,
) -> SggStatus {
    guarded(|| {
        out_arg(out, "out")?;
        let ont = &ref_arg(ontology, "ontology")?.0;
        let ckpt = load_checkpoint(PathBuf::from(str_arg(checkpoint_path, "checkpoint_path")?), ont)?;
        let model = Model::from_checkpoint(&ckpt, ont)?;
        let stats = CooccurrenceStats::load(PathBuf::from(str_arg(stats_path, "stats_path")?))?;
        stats.check_dims(ont)?;
        *out = Box::into_raw(Box::new(SggModel { model, stats }));
        Ok(())
    })
}

/// # Safety
/// `model` must come from [`sgg_model_load`] or be null.
#[no_mangle]
pub unsafe extern "C" fn sgg_model_free(model: *mut SggModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Ranked triplets for every scene as a JSON array of scene predictions.
/// `mode` is "predcls", "sgcls" or "sgdet".
///
/// # Safety
/// Pointers must be valid; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sgg_infer_json(
    model: *const SggModel,
    scenes: *const SggScenes,
    mode: *const c_char,
    out_json: *mut *mut c_char,
) -> SggStatus {
    guarded(|| {
        out_arg(out_json, "out_json")?;
        let m = ref_arg(model, "model")?;
        let scenes = ref_arg(scenes, "scenes")?;
        let mode: Mode = str_arg(mode, "mode")?.parse()?;
        let preds = infer(&m.model, &scenes.0, &m.stats, mode)?;
        let json = serde_json::to_string(&preds).map_err(Error::from)?;
        *out_json = to_c_string(json)?;
        Ok(())
    })
}

/// Metric report (fractions) for a JSON array of scene predictions against
/// the GT of `scenes`, at K = 20, 50, 100.
///
/// # Safety
/// Pointers must be valid; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sgg_eval_json(
    ontology: *const SggOntology,
    scenes: *const SggScenes,
    predictions_json: *const c_char,
    out_json: *mut *mut c_char,
) -> SggStatus {
    guarded(|| {
        out_arg(out_json, "out_json")?;
        let ont = &ref_arg(ontology, "ontology")?.0;
        let scenes = ref_arg(scenes, "scenes")?;
        let preds: Vec<ScenePrediction> = serde_json::from_str(str_arg(predictions_json, "predictions_json")?)
            .map_err(|e| Error::Schema(format!("predictions: {e}")))?;
        let report = evaluate(&preds, &scenes.0, ont, &DEFAULT_KS)?;
        *out_json = to_c_string(report.to_json())?;
        Ok(())
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sgg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
