//! Evaluation modes, training targets and triplet ranking.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::CooccurrenceStats;
use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::model::{Model, Prediction};
use crate::ontology::BACKGROUND;
use crate::scene::{DetectedObject, Scene, ScenePrediction, Triplet};

const MATCH_IOU: f64 = 0.5;

/// How much ground truth the model is given.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// GT boxes and labels.
    PredCls,
    /// GT boxes, detected class distributions.
    SgCls,
    /// Detections as ingested.
    SgDet,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::PredCls => "predcls",
            Mode::SgCls => "sgcls",
            Mode::SgDet => "sgdet",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "predcls" => Ok(Mode::PredCls),
            "sgcls" => Ok(Mode::SgCls),
            "sgdet" => Ok(Mode::SgDet),
            _ => Err(Error::Usage(format!("unknown mode: {s} (expected predcls, sgcls or sgdet)"))),
        }
    }
}

/// A scene with mode substitutions applied plus its training targets.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedScene {
    pub scene: Scene,
    pub mode: Mode,
    /// Class target of each object: its matched GT label, else its own label.
    pub object_targets: Vec<usize>,
    /// Index into `scene.gt_objects()` of each object's best GT match.
    pub gt_match: Vec<Option<usize>>,
}

fn best_gt_match(b: &BBox, gt_objects: &[(BBox, usize)]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (g, (gb, _)) in gt_objects.iter().enumerate() {
        let iou = b.iou(gb);
        if iou >= MATCH_IOU && best.map_or(true, |(_, v)| iou > v) {
            best = Some((g, iou));
        }
    }
    best.map(|(g, _)| g)
}

/// Applies the substitutions of `mode`. In predcls and sgcls, detections
/// without a GT object at IoU >= 0.5 are dropped.
pub fn prepare_scene(scene: &Scene, mode: Mode) -> Result<PreparedScene> {
    if mode != Mode::SgDet && !scene.has_gt() {
        return Err(Error::Usage(format!("scene {}: mode {mode} needs ground-truth triplets", scene.scene_id)));
    }
    let gt_objects = scene.gt_objects();
    let mut out = scene.clone();
    out.objects.clear();
    let mut object_targets = Vec::new();
    let mut gt_match = Vec::new();
    for obj in &scene.objects {
        let m = best_gt_match(&obj.bbox, &gt_objects);
        let target = m.map_or(obj.label, |g| gt_objects[g].1);
        let substituted = match (mode, m) {
            (Mode::SgDet, _) => obj.clone(),
            (_, None) => continue,
            (Mode::SgCls, Some(g)) => DetectedObject { bbox: gt_objects[g].0, ..obj.clone() },
            (Mode::PredCls, Some(g)) => {
                let (bbox, label) = gt_objects[g];
                let mut distribution = vec![0.0; obj.distribution.len()];
                distribution[label] = 1.0;
                DetectedObject { bbox, visual_feature: obj.visual_feature.clone(), label, distribution }
            }
        };
        out.objects.push(substituted);
        object_targets.push(target);
        gt_match.push(m);
    }
    Ok(PreparedScene { scene: out, mode, object_targets, gt_match })
}

/// Relation target of each edge: the first GT triplet it matches, else background.
///
/// predcls matches by GT object identity; the other modes need IoU >= 0.5 on
/// both boxes and equal labels.
pub fn edge_targets(prepared: &PreparedScene, edges: &[(usize, usize)]) -> Vec<usize> {
    let scene = &prepared.scene;
    let gt = scene.gt();
    let gt_objects = scene.gt_objects();
    let gt_index = |b: &BBox, l: usize| gt_objects.iter().position(|&(gb, gl)| gb == *b && gl == l);
    edges
        .iter()
        .map(|&(i, j)| {
            let (si, oj) = (&scene.objects[i], &scene.objects[j]);
            let hit = gt.iter().find(|t| match prepared.mode {
                Mode::PredCls => {
                    prepared.gt_match[i].is_some()
                        && prepared.gt_match[i] == gt_index(&t.s_box, t.s_label)
                        && prepared.gt_match[j] == gt_index(&t.o_box, t.o_label)
                }
                _ => {
                    si.label == t.s_label
                        && oj.label == t.o_label
                        && si.bbox.iou(&t.s_box) >= MATCH_IOU
                        && oj.bbox.iou(&t.o_box) >= MATCH_IOU
                }
            });
            hit.map_or(BACKGROUND, |t| t.rel)
        })
        .collect()
}

fn argmax(p: &[f64]) -> (usize, f64) {
    p.iter().enumerate().fold((0, f64::NEG_INFINITY), |b, (i, &v)| if v > b.1 { (i, v) } else { b })
}

/// Scores every non-background relation of every edge as
/// `s_subject * p(rel) * s_object` and keeps the best `max_triplets`.
///
/// Object scores are the classifier's top probability, or 1 with the given
/// label when `fixed_labels` (predcls). Ties break by edge index, then relation.
pub fn rank_triplets(scene: &Scene, pred: &Prediction, fixed_labels: bool, max_triplets: usize) -> Vec<Triplet> {
    let objects: Vec<(usize, f64)> = scene
        .objects
        .iter()
        .zip(&pred.object_probs)
        .map(|(o, p)| if fixed_labels { (o.label, 1.0) } else { argmax(p) })
        .collect();
    let mut cand: Vec<(f64, usize, usize)> = Vec::new();
    for (e, &(i, j)) in pred.edges.iter().enumerate() {
        for (rel, &p) in pred.relation_probs[e].iter().enumerate().skip(1) {
            cand.push((objects[i].1 * p * objects[j].1, e, rel));
        }
    }
    cand.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    cand.truncate(max_triplets);
    cand.into_iter()
        .map(|(score, e, rel)| {
            let (i, j) = pred.edges[e];
            Triplet {
                subject_idx: i,
                object_idx: j,
                relation: rel,
                score,
                s_box: scene.objects[i].bbox,
                o_box: scene.objects[j].bbox,
                s_label: objects[i].0,
                o_label: objects[j].0,
            }
        })
        .collect()
}

pub fn infer_scene(model: &Model, scene: &Scene, stats: &CooccurrenceStats, mode: Mode) -> Result<ScenePrediction> {
    let prepared = prepare_scene(scene, mode)?;
    let pred = model.predict(&prepared.scene, stats)?;
    Ok(ScenePrediction {
        scene_id: scene.scene_id.clone(),
        triplets: rank_triplets(&prepared.scene, &pred, mode == Mode::PredCls, model.config.max_triplets),
    })
}

/// Predictions for every scene, in input order.
pub fn infer(model: &Model, scenes: &[Scene], stats: &CooccurrenceStats, mode: Mode) -> Result<Vec<ScenePrediction>> {
    model.check_inputs(scenes, stats)?;
    scenes.par_iter().map(|s| infer_scene(model, s, stats, mode)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::GtTriplet;

    fn obj(b: BBox, label: usize) -> DetectedObject {
        DetectedObject { bbox: b, visual_feature: vec![0.0], label, distribution: vec![0.2, 0.8] }
    }

    fn scene() -> Scene {
        let a = BBox::new(0.0, 0.0, 10.0, 10.0);
        let b = BBox::new(50.0, 50.0, 60.0, 60.0);
        Scene {
            scene_id: "s".into(),
            width: 100.0,
            height: 100.0,
            objects: vec![
                obj(BBox::new(0.5, 0.0, 10.0, 10.0), 1),
                obj(BBox::new(80.0, 80.0, 90.0, 90.0), 1),
                obj(BBox::new(50.0, 50.5, 60.0, 60.0), 1),
            ],
            gt_triplets: Some(vec![GtTriplet { s_box: a, s_label: 0, rel: 2, o_box: b, o_label: 1 }]),
        }
    }

    #[test]
    fn predcls_substitutes_and_drops_unmatched() {
        let p = prepare_scene(&scene(), Mode::PredCls).unwrap();
        assert_eq!(p.scene.objects.len(), 2);
        assert_eq!(p.scene.objects[0].label, 0);
        assert_eq!(p.scene.objects[0].distribution, vec![1.0, 0.0]);
        assert_eq!(p.scene.objects[0].bbox, BBox::new(0.0, 0.0, 10.0, 10.0));
        assert_eq!(p.object_targets, vec![0, 1]);
        assert_eq!(edge_targets(&p, &[(0, 1), (1, 0)]), vec![2, 0]);
    }

    #[test]
    fn sgcls_keeps_detected_labels() {
        let p = prepare_scene(&scene(), Mode::SgCls).unwrap();
        assert_eq!(p.scene.objects[0].label, 1);
        assert_eq!(p.object_targets, vec![0, 1]);
        // detector label disagrees with the GT subject label
        assert_eq!(edge_targets(&p, &[(0, 1)]), vec![0]);
    }

    #[test]
    fn sgdet_keeps_everything() {
        let p = prepare_scene(&scene(), Mode::SgDet).unwrap();
        assert_eq!(p.scene, scene());
        assert_eq!(p.gt_match, vec![Some(0), None, Some(1)]);
    }

    #[test]
    fn gt_modes_require_gt() {
        let mut s = scene();
        s.gt_triplets = None;
        assert!(prepare_scene(&s, Mode::PredCls).unwrap_err().is_usage());
        assert!(prepare_scene(&s, Mode::SgDet).is_ok());
    }

    #[test]
    fn ranking_is_total_and_capped() {
        let s = scene();
        let pred = Prediction {
            edges: vec![(0, 1), (1, 2)],
            edge_types: vec![],
            object_probs: vec![vec![0.5, 0.5]; 3],
            relation_probs: vec![vec![0.2, 0.4, 0.4], vec![0.2, 0.4, 0.4]],
        };
        let t = rank_triplets(&s, &pred, false, 3);
        let keys: Vec<(usize, usize)> = t.iter().map(|t| (t.subject_idx, t.relation)).collect();
        assert_eq!(keys, vec![(0, 1), (0, 2), (1, 1)]);
        assert!((t[0].score - 0.1).abs() < 1e-15);
    }
}
