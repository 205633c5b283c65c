use std::ffi::{CStr, CString};
use std::ptr;

use sgg_core::data::{build_cooccurrence_stats, generate_synthetic_dataset, save_scenes, synthetic_ontology, SyntheticConfig};
use sgg_core::model::{Model, ModelConfig};
use sgg_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(sgg_last_error()) }.to_string_lossy().into_owned()
}

struct Fixture {
    _dir: tempfile::TempDir,
    ontology: CString,
    scenes: CString,
    stats: CString,
    checkpoint: CString,
}

fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let ont = synthetic_ontology(4, 3, 2.0);
    let cfg = SyntheticConfig { n_scenes: 4, feature_dim: 4, seed: 3, ..Default::default() };
    let scenes = generate_synthetic_dataset(&cfg, &ont).unwrap();
    let stats = build_cooccurrence_stats(&scenes, &ont);
    let mc = ModelConfig { visual_dim: 4, visual_proj_dim: 4, box_dim: 4, class_dim: 4, hidden_dim: 8, ..Default::default() };
    let model = Model::new(mc, &ont, 1).unwrap();
    let p = |n: &str| dir.path().join(n);
    ont.save(p("ontology.json")).unwrap();
    save_scenes(p("scenes.jsonl"), &scenes).unwrap();
    stats.save(p("stats.json")).unwrap();
    let ckpt = model.to_checkpoint(Default::default(), &serde_json::json!({})).unwrap();
    sgg_core::data::save_checkpoint(&ckpt, p("model.ckpt")).unwrap();
    let s = |n: &str| c(p(n).to_str().unwrap());
    Fixture {
        ontology: s("ontology.json"),
        scenes: s("scenes.jsonl"),
        stats: s("stats.json"),
        checkpoint: s("model.ckpt"),
        _dir: dir,
    }
}

#[test]
fn infer_then_eval_round_trip() {
    let f = fixture();
    unsafe {
        let mut ont = ptr::null_mut();
        assert_eq!(sgg_ontology_load(f.ontology.as_ptr(), &mut ont), SggStatus::Ok);
        let mut scenes = ptr::null_mut();
        assert_eq!(sgg_scenes_load(ont, f.scenes.as_ptr(), &mut scenes), SggStatus::Ok);
        assert_eq!(sgg_scenes_len(scenes), 4);
        let mut model = ptr::null_mut();
        assert_eq!(sgg_model_load(ont, f.checkpoint.as_ptr(), f.stats.as_ptr(), &mut model), SggStatus::Ok);

        let mut preds = ptr::null_mut();
        assert_eq!(sgg_infer_json(model, scenes, c("predcls").as_ptr(), &mut preds), SggStatus::Ok);
        let preds_text = CStr::from_ptr(preds).to_str().unwrap().to_owned();
        assert!(preds_text.starts_with('['));

        let mut report = ptr::null_mut();
        assert_eq!(sgg_eval_json(ont, scenes, preds, &mut report), SggStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(CStr::from_ptr(report).to_str().unwrap()).unwrap();
        let r50 = v["r_at"]["50"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&r50));

        sgg_string_free(preds);
        sgg_string_free(report);
        sgg_model_free(model);
        sgg_scenes_free(scenes);
        sgg_ontology_free(ont);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let f = fixture();
    unsafe {
        let mut ont = ptr::null_mut();
        assert_eq!(sgg_ontology_load(ptr::null(), &mut ont), SggStatus::NullPointer);
        assert!(last_error().contains("null"));
        assert_eq!(sgg_ontology_load(c("/nonexistent/o.json").as_ptr(), &mut ont), SggStatus::Io);
        assert!(ont.is_null());

        assert_eq!(sgg_ontology_load(f.ontology.as_ptr(), &mut ont), SggStatus::Ok);
        let mut scenes = ptr::null_mut();
        assert_eq!(sgg_scenes_load(ont, f.scenes.as_ptr(), &mut scenes), SggStatus::Ok);
        let mut model = ptr::null_mut();
        assert_eq!(sgg_model_load(ont, f.checkpoint.as_ptr(), f.stats.as_ptr(), &mut model), SggStatus::Ok);
        let mut out = ptr::null_mut();
        assert_eq!(sgg_infer_json(model, scenes, c("bogus").as_ptr(), &mut out), SggStatus::Usage);
        assert!(last_error().contains("bogus"));
        assert_eq!(sgg_eval_json(ont, scenes, c("{").as_ptr(), &mut out), SggStatus::Schema);
        assert!(out.is_null());

        sgg_model_free(model);
        sgg_scenes_free(scenes);
        sgg_ontology_free(ont);
        sgg_ontology_free(ptr::null_mut());
        sgg_string_free(ptr::null_mut());
    }
}

#[test]
fn score_and_version() {
    assert!((sgg_score_wtd(81.71, 35.67, 36.46) - 45.194).abs() < 1e-9);
    let v = unsafe { CStr::from_ptr(sgg_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/sgg.h")).unwrap();
    for name in [
        "sgg_last_error",
        "sgg_string_free",
        "sgg_ontology_load",
        "sgg_scenes_load",
        "sgg_model_load",
        "sgg_infer_json",
        "sgg_eval_json",
        "sgg_score_wtd",
        "SGG_STATUS_OK",
        "typedef struct SggModel SggModel",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}
