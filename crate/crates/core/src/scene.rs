//! Per-image records: detections, ground-truth triplets and predicted triplets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::ontology::{Ontology, BACKGROUND};

const DISTRIBUTION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectedObject {
    #[serde(rename = "box")]
    pub bbox: BBox,
    #[serde(rename = "feature")]
    pub visual_feature: Vec<f64>,
    pub label: usize,
    pub distribution: Vec<f64>,
}

impl DetectedObject {
    /// Highest class probability, the detector's confidence in `label`.
    pub fn confidence(&self) -> f64 {
        self.distribution.iter().copied().fold(0.0, f64::max)
    }
}

/// A ground-truth relation, addressed by box and label rather than by detection index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GtTriplet {
    pub s_box: BBox,
    pub s_label: usize,
    pub rel: usize,
    pub o_box: BBox,
    pub o_label: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub scene_id: String,
    pub width: f64,
    pub height: f64,
    pub objects: Vec<DetectedObject>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gt_triplets: Option<Vec<GtTriplet>>,
}

impl Scene {
    pub fn has_gt(&self) -> bool {
        self.gt_triplets.is_some()
    }

    pub fn gt(&self) -> &[GtTriplet] {
        self.gt_triplets.as_deref().unwrap_or(&[])
    }

    /// Distinct ground-truth objects `(box, label)` in first-appearance order.
    pub fn gt_objects(&self) -> Vec<(BBox, usize)> {
        let mut out: Vec<(BBox, usize)> = Vec::new();
        for t in self.gt() {
            for cand in [(t.s_box, t.s_label), (t.o_box, t.o_label)] {
                if !out.contains(&cand) {
                    out.push(cand);
                }
            }
        }
        out
    }

    /// Checks every invariant of the scene against the ontology dimensions.
    pub fn validate(&self, ontology: &Ontology) -> Result<()> {
        let n_obj = ontology.num_object_classes();
        let n_rel = ontology.num_relation_classes();
        let ctx = |msg: String| Error::Schema(format!("scene {}: {msg}", self.scene_id));
        if !(self.width > 0.0 && self.height > 0.0) {
            return Err(ctx("non-positive image size".into()));
        }
        let check_box = |b: &BBox, what: &str| -> Result<()> {
            if !b.is_valid() {
                return Err(ctx(format!("degenerate box {what}: {:?}", b.to_array())));
            }
            if !b.within(self.width, self.height) {
                return Err(ctx(format!("box {what} outside image: {:?}", b.to_array())));
            }
            Ok(())
        };
        let check_class = |c: usize| -> Result<()> {
            if c >= n_obj {
                return Err(ctx(format!("class index out of range: {c}")));
            }
            Ok(())
        };
        let feature_dim = self.objects.first().map(|o| o.visual_feature.len());
        for (i, o) in self.objects.iter().enumerate() {
            check_box(&o.bbox, &format!("of object {i}"))?;
            check_class(o.label)?;
            if o.distribution.len() != n_obj {
                return Err(ctx(format!(
                    "object {i}: distribution length {} != {n_obj} classes",
                    o.distribution.len()
                )));
            }
            if o.distribution.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                return Err(ctx(format!("object {i}: negative or non-finite probability")));
            }
            let sum: f64 = o.distribution.iter().sum();
            if (sum - 1.0).abs() > DISTRIBUTION_TOLERANCE {
                return Err(ctx(format!("object {i}: distribution sums to {sum}")));
            }
            if Some(o.visual_feature.len()) != feature_dim
                || o.visual_feature.iter().any(|v| !v.is_finite())
            {
                return Err(ctx(format!("object {i}: inconsistent visual feature")));
            }
        }
        for (k, t) in self.gt().iter().enumerate() {
            check_box(&t.s_box, &format!("of gt triplet {k} subject"))?;
            check_box(&t.o_box, &format!("of gt triplet {k} object"))?;
            check_class(t.s_label)?;
            check_class(t.o_label)?;
            if t.rel == BACKGROUND || t.rel >= n_rel {
                return Err(ctx(format!("relation index out of range: {}", t.rel)));
            }
        }
        Ok(())
    }
}

/// A scored relation between two objects of a scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Triplet {
    #[serde(rename = "s")]
    pub subject_idx: usize,
    #[serde(rename = "o")]
    pub object_idx: usize,
    #[serde(rename = "rel")]
    pub relation: usize,
    pub score: f64,
    pub s_box: BBox,
    pub o_box: BBox,
    pub s_label: usize,
    pub o_label: usize,
}

/// One line of a prediction file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenePrediction {
    pub scene_id: String,
    pub triplets: Vec<Triplet>,
}

impl ScenePrediction {
    /// The scene's own GT as a prediction with unit scores; object indices
    /// refer to [`Scene::gt_objects`].
    pub fn from_gt(scene: &Scene) -> Self {
        let objects = scene.gt_objects();
        let idx = |b: BBox, l: usize| objects.iter().position(|&o| o == (b, l)).expect("listed by gt_objects");
        let triplets = scene
            .gt()
            .iter()
            .map(|t| Triplet {
                subject_idx: idx(t.s_box, t.s_label),
                object_idx: idx(t.o_box, t.o_label),
                relation: t.rel,
                score: 1.0,
                s_box: t.s_box,
                o_box: t.o_box,
                s_label: t.s_label,
                o_label: t.o_label,
            })
            .collect();
        ScenePrediction { scene_id: scene.scene_id.clone(), triplets }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ontology() -> Ontology {
        Ontology::from_json(
            r#"{"object_classes":["a","b","c"],"relation_classes":["__background__","r"],"type_map":{"r":"interactive"}}"#,
        )
        .unwrap()
    }

    fn object(label: usize, dist: Vec<f64>) -> DetectedObject {
        DetectedObject {
            bbox: BBox::new(1.0, 1.0, 5.0, 5.0),
            visual_feature: vec![0.0; 2],
            label,
            distribution: dist,
        }
    }

    fn scene(objects: Vec<DetectedObject>) -> Scene {
        Scene { scene_id: "s".into(), width: 10.0, height: 10.0, objects, gt_triplets: None }
    }

    #[test]
    fn accepts_valid() {
        scene(vec![object(0, vec![0.5, 0.25, 0.25])]).validate(&ontology()).unwrap();
    }

    #[test]
    fn rejects_bad_distribution_sum() {
        let err = scene(vec![object(0, vec![0.4, 0.2, 0.2])]).validate(&ontology()).unwrap_err();
        assert!(err.to_string().contains("sums to"), "{err}");
    }

    #[test]
    fn rejects_class_out_of_range() {
        let err = scene(vec![object(3, vec![0.5, 0.25, 0.25])]).validate(&ontology()).unwrap_err();
        assert!(err.to_string().contains("class index out of range"), "{err}");
    }

    #[test]
    fn rejects_degenerate_box() {
        let mut o = object(0, vec![1.0, 0.0, 0.0]);
        o.bbox = BBox::new(4.0, 1.0, 4.0, 5.0);
        let err = scene(vec![o]).validate(&ontology()).unwrap_err();
        assert!(err.to_string().contains("degenerate"), "{err}");
    }

    #[test]
    fn rejects_background_gt() {
        let mut s = scene(vec![object(0, vec![1.0, 0.0, 0.0])]);
        let b = BBox::new(1.0, 1.0, 2.0, 2.0);
        s.gt_triplets = Some(vec![GtTriplet { s_box: b, s_label: 0, rel: 0, o_box: b, o_label: 1 }]);
        assert!(s.validate(&ontology()).is_err());
    }

    #[test]
    fn object_json_field_names() {
        let json = serde_json::to_value(object(1, vec![0.0, 1.0, 0.0])).unwrap();
        let keys: Vec<_> = json.as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys, vec!["box", "distribution", "feature", "label"]);
    }
}
