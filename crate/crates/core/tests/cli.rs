use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sgg_core::data::{load_scenes, save_predictions, save_scenes};
use sgg_core::model::ModelConfig;
use sgg_core::ontology::Ontology;
use sgg_core::scene::ScenePrediction;

fn sgg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sgg")).args(args).env("RUST_LOG", "warn").output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = sgg(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn s(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

struct Data {
    _dir: tempfile::TempDir,
    root: PathBuf,
}

impl Data {
    fn new(n_scenes: usize) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_path_buf();
        let n = n_scenes.to_string();
        ok(&["generate", "--out", &s(&root.join("data")), "--n-scenes", &n, "--feature-dim", "4", "--seed", "3"]);
        Data { _dir: dir, root }
    }

    fn path(&self, rel: &str) -> String {
        s(&self.root.join(rel))
    }

    fn ontology(&self) -> String {
        self.path("data/ontology.json")
    }

    fn scenes(&self) -> String {
        self.path("data/scenes.jsonl")
    }

    fn tiny_model(&self) -> String {
        let cfg = ModelConfig { visual_dim: 4, visual_proj_dim: 3, box_dim: 3, class_dim: 3, hidden_dim: 4, ..Default::default() };
        let p = self.root.join("model.json");
        std::fs::write(&p, serde_json::to_string(&cfg).unwrap()).unwrap();
        s(&p)
    }
}

#[test]
fn predcls_without_ground_truth_is_a_usage_error() {
    let d = Data::new(3);
    let ont = Ontology::load(d.ontology()).unwrap();
    let mut scenes = load_scenes(d.scenes(), &ont).unwrap();
    for sc in &mut scenes {
        sc.gt_triplets = None;
    }
    let bare = d.path("bare.jsonl");
    save_scenes(&bare, &scenes).unwrap();
    let model = d.tiny_model();
    ok(&["train", "--ontology", &d.ontology(), "--scenes", &d.scenes(), "--out", &d.path("train"), "--epochs", "1", "--model-config", &model]);
    let args = ["infer", "--ontology", &d.ontology(), "--scenes", &bare, "--stats", &d.path("train/stats.json"), "--checkpoint", &d.path("train/model.ckpt"), "--out", &d.path("infer")];
    let out = sgg(&args);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ground-truth"));

    let mut sgdet = args.to_vec();
    sgdet.extend(["--mode", "sgdet"]);
    ok(&sgdet);
}

#[test]
fn missing_input_exits_one_and_bad_flag_exits_two() {
    let d = Data::new(1);
    let out = sgg(&["prepare-stats", "--ontology", &d.ontology(), "--scenes", &d.path("nope.jsonl"), "--out", &d.path("st")]);
    assert_eq!(out.status.code(), Some(1));
    let out = sgg(&["prepare-stats", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn outputs_are_not_overwritten_without_force() {
    let d = Data::new(4);
    let args = ["prepare-stats", "--ontology", &d.ontology(), "--scenes", &d.scenes(), "--out", &d.path("st")];
    ok(&args);
    let out = sgg(&args);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--force"));
    let mut forced = args.to_vec();
    forced.push("--force");
    ok(&forced);
    assert!(d.root.join("st/config.json").exists());
}

#[test]
fn ground_truth_as_prediction_scores_full_recall() {
    let d = Data::new(6);
    let ont = Ontology::load(d.ontology()).unwrap();
    let scenes = load_scenes(d.scenes(), &ont).unwrap();
    let preds: Vec<ScenePrediction> = scenes.iter().map(ScenePrediction::from_gt).collect();
    let pred_path = d.path("gt_preds.jsonl");
    save_predictions(&pred_path, &preds).unwrap();
    ok(&["eval", "--ontology", &d.ontology(), "--scenes", &d.scenes(), "--predictions", &pred_path, "--out", &d.path("ev"), "--ks", "20,50"]);
    let csv = std::fs::read_to_string(d.root.join("ev/report.csv")).unwrap();
    assert!(csv.lines().any(|l| l == "R,50,all,100.00"), "{csv}");
    assert!(csv.lines().any(|l| l == "pR,20,all,100.00"), "{csv}");
    let txt = std::fs::read_to_string(d.root.join("ev/report.txt")).unwrap();
    assert!(txt.starts_with("# "));
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(d.root.join("ev/report.json")).unwrap()).unwrap();
    assert_eq!(json["r_at"]["50"], 1.0);
}

#[test]
fn pair_selection_bench_lists_every_strategy() {
    let d = Data::new(8);
    ok(&["pairsel-bench", "--ontology", &d.ontology(), "--scenes", &d.scenes(), "--out", &d.path("ps"), "--topk", "6"]);
    let csv = std::fs::read_to_string(d.root.join("ps/pairsel.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(csv.lines().next().unwrap(), "strategy,pR@50,pR@100,mean_edges");
    assert_eq!(rows.len(), 10);
    let edges = |name: &str| -> f64 { rows.iter().find(|r| r[0] == name).unwrap()[3].parse().unwrap() };
    assert!(edges("full") <= edges("con"));
    assert!(edges("dis_lin") <= edges("dis"));
}

#[test]
fn distribution_report_has_one_row_per_relation() {
    let d = Data::new(20);
    ok(&["distrib-report", "--ontology", &d.ontology(), "--scenes", &d.scenes(), "--out", &d.path("dr")]);
    let csv = std::fs::read_to_string(d.root.join("dr/distribution.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "relation,type,global_ratio,within_type_ratio");
    let ont = Ontology::load(d.ontology()).unwrap();
    assert_eq!(lines.count(), ont.num_relation_classes() - 1);
}

#[test]
fn ablation_writes_eight_rows() {
    let d = Data::new(6);
    ok(&["generate", "--out", &d.path("test"), "--n-scenes", "3", "--feature-dim", "4", "--seed", "4"]);
    let model = d.tiny_model();
    ok(&[
        "ablate", "--ontology", &d.ontology(), "--scenes", &d.scenes(), "--test-scenes", &d.path("test/scenes.jsonl"),
        "--out", &d.path("ab"), "--epochs", "1", "--model-config", &model,
    ]);
    let csv = std::fs::read_to_string(d.root.join("ab/ablation.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "no,A_pair_selection,B_typed_inter,C_dual_intra,R@50,R@100,mR@50,mR@100,pR@50");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 8);
    assert!(rows[7].starts_with("8,"));
    assert!(d.root.join("ab/ablation.txt").exists());
}
