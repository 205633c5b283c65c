//! Rule-governed synthetic scenes with a long-tailed relation distribution.
//!
//! Each scene is grown as a tree: every new object is attached to an already
//! placed anchor by a relation drawn from the rule row of the anchor/new-object
//! class pair, and placed at a relation-specific direction from the anchor.
//! Relation identity is therefore recoverable from class pair plus geometry.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::ontology::{partition_from_counts, Ontology, RelationType, BACKGROUND};
use crate::scene::{DetectedObject, GtTriplet, Scene};

const MAX_PLACEMENT_ATTEMPTS: usize = 30;

/// Relation distribution for one ordered (subject class, object class) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleRow {
    pub subject: usize,
    pub object: usize,
    /// Probabilities over all relation classes; the background entry must be 0.
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub n_scenes: usize,
    pub min_objects: usize,
    pub max_objects: usize,
    /// `None` uses a full table whose rows all follow the long-tail law.
    pub rule_table: Option<Vec<RuleRow>>,
    /// Relation `r` (1-based rank) is drawn with weight `r^-exponent`.
    pub longtail_exponent: f64,
    /// Standard deviation in pixels added to detection box coordinates.
    pub box_noise: f64,
    /// Standard deviation of the visual feature around its class mean.
    pub feature_noise: f64,
    pub feature_dim: usize,
    pub image_size: f64,
    /// Center-to-center distance between related objects, in pixels.
    pub relation_distance: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n_scenes: 200,
            min_objects: 3,
            max_objects: 6,
            rule_table: None,
            longtail_exponent: 2.0,
            box_noise: 2.0,
            feature_noise: 0.5,
            feature_dim: 16,
            image_size: 400.0,
            relation_distance: 100.0,
            seed: 0,
        }
    }
}

/// Long-tail weights over relation classes (background weight 0).
pub fn longtail_weights(n_relation_classes: usize, exponent: f64) -> Vec<f64> {
    let mut w = vec![0.0; n_relation_classes];
    let mut z = 0.0;
    for (r, wr) in w.iter_mut().enumerate().skip(1) {
        *wr = (r as f64).powf(-exponent);
        z += *wr;
    }
    if z > 0.0 {
        w.iter_mut().for_each(|v| *v /= z);
    }
    w
}

/// Unit direction `(dx, dy)` at which relation `rel` places its object.
pub fn relation_direction(rel: usize, n_relation_classes: usize) -> (f64, f64) {
    let k = (n_relation_classes - 1).max(1) as f64;
    let theta = 2.0 * PI * (rel as f64 - 1.0) / k;
    (theta.cos(), theta.sin())
}

/// Vocabulary for synthetic data: relation types alternate between
/// interactive and non-interactive, and the long-tail split follows the
/// expected frequencies under `exponent`.
pub fn synthetic_ontology(n_object_classes: usize, n_relations: usize, exponent: f64) -> Ontology {
    let objects: Vec<String> = (0..n_object_classes).map(|i| format!("obj{i}")).collect();
    let relations: Vec<String> = (1..=n_relations).map(|r| format!("rel{r}")).collect();
    let mut types = BTreeMap::new();
    for (i, name) in relations.iter().enumerate() {
        let ty = if i % 2 == 0 { RelationType::NonInteractive } else { RelationType::Interactive };
        types.insert(name.clone(), ty);
    }
    let weights = longtail_weights(n_relations + 1, exponent);
    let expected: Vec<u64> = weights[1..].iter().map(|w| (w * 1e6).round() as u64).collect();
    let partition = relations
        .iter()
        .cloned()
        .zip(partition_from_counts(&expected))
        .collect();
    Ontology::new(objects, relations, &types, &partition).expect("synthetic ontology is valid")
}

fn validate(cfg: &SyntheticConfig, ontology: &Ontology) -> Result<Vec<RuleRow>> {
    let n_obj = ontology.num_object_classes();
    let n_rel = ontology.num_relation_classes();
    if cfg.min_objects < 1 || cfg.min_objects > cfg.max_objects {
        return Err(Error::Config("objects_per_scene range is empty".into()));
    }
    if n_rel < 2 {
        return Err(Error::Config("ontology has no relation classes".into()));
    }
    if !(cfg.image_size > 0.0 && cfg.relation_distance >= 0.0 && cfg.box_noise >= 0.0) {
        return Err(Error::Config("image size, distance and noise must be non-negative".into()));
    }
    let rows = match &cfg.rule_table {
        Some(rows) => rows.clone(),
        None => {
            let probs = longtail_weights(n_rel, cfg.longtail_exponent);
            (0..n_obj)
                .flat_map(|s| (0..n_obj).map(move |o| (s, o)))
                .map(|(subject, object)| RuleRow { subject, object, probs: probs.clone() })
                .collect()
        }
    };
    if rows.is_empty() {
        return Err(Error::Config("rule table is empty".into()));
    }
    for row in &rows {
        if row.subject >= n_obj || row.object >= n_obj {
            return Err(Error::Config(format!(
                "rule ({}, {}) references an unknown object class",
                row.subject, row.object
            )));
        }
        if row.probs.len() != n_rel {
            return Err(Error::Config(format!(
                "rule ({}, {}) has {} probabilities, expected {n_rel}",
                row.subject,
                row.object,
                row.probs.len()
            )));
        }
        let sum: f64 = row.probs.iter().sum();
        if row.probs.iter().any(|p| !(p.is_finite() && *p >= 0.0))
            || row.probs[BACKGROUND] != 0.0
            || (sum - 1.0).abs() > 1e-9
        {
            return Err(Error::Config(format!(
                "rule ({}, {}) is not a distribution over foreground relations",
                row.subject, row.object
            )));
        }
    }
    Ok(rows)
}

/// Generates `cfg.n_scenes` scenes. Output is a pure function of `(cfg, ontology)`.
pub fn generate_synthetic_dataset(cfg: &SyntheticConfig, ontology: &Ontology) -> Result<Vec<Scene>> {
    let rows = validate(cfg, ontology)?;
    let n_obj = ontology.num_object_classes();
    let n_rel = ontology.num_relation_classes();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let class_means: Vec<Vec<f64>> = (0..n_obj)
        .map(|_| (0..cfg.feature_dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();
    let mut rows_by_subject: Vec<Vec<usize>> = vec![Vec::new(); n_obj];
    for (k, row) in rows.iter().enumerate() {
        rows_by_subject[row.subject].push(k);
    }
    let row_samplers: Vec<WeightedIndex<f64>> = rows
        .iter()
        .map(|r| WeightedIndex::new(&r.probs).expect("validated distribution"))
        .collect();
    let subjects: Vec<usize> = (0..n_obj).filter(|&c| !rows_by_subject[c].is_empty()).collect();

    let size = cfg.image_size;
    let mut scenes = Vec::with_capacity(cfg.n_scenes);
    for scene_no in 0..cfg.n_scenes {
        let n_target = rng.gen_range(cfg.min_objects..=cfg.max_objects);
        let mut placed: Vec<(BBox, usize)> = Vec::with_capacity(n_target);
        let mut gt = Vec::new();

        let first_class = subjects[rng.gen_range(0..subjects.len())];
        let jitter = 0.1 * size;
        let center = (size / 2.0 + rng.gen_range(-jitter..jitter), size / 2.0 + rng.gen_range(-jitter..jitter));
        placed.push((random_box(&mut rng, center, size), first_class));

        while placed.len() < n_target {
            let mut attached = false;
            for _ in 0..MAX_PLACEMENT_ATTEMPTS {
                let anchor = rng.gen_range(0..placed.len());
                let (anchor_box, anchor_class) = placed[anchor];
                let candidates = &rows_by_subject[anchor_class];
                if candidates.is_empty() {
                    continue;
                }
                let row_idx = candidates[rng.gen_range(0..candidates.len())];
                let rel = row_samplers[row_idx].sample(&mut rng);
                let (dx, dy) = relation_direction(rel, n_rel);
                let dist = cfg.relation_distance * rng.gen_range(0.9..1.1);
                let (ax, ay) = anchor_box.center();
                let b = random_box(&mut rng, (ax + dist * dx, ay + dist * dy), size);
                if !b.within(size, size) {
                    continue;
                }
                let class = rows[row_idx].object;
                gt.push(GtTriplet { s_box: anchor_box, s_label: anchor_class, rel, o_box: b, o_label: class });
                placed.push((b, class));
                attached = true;
                break;
            }
            if !attached {
                break;
            }
        }

        let objects = placed
            .iter()
            .map(|&(gt_box, class)| detect(&mut rng, cfg, gt_box, class, &class_means[class], n_obj))
            .collect();
        scenes.push(Scene {
            scene_id: format!("syn-{}-{scene_no:05}", cfg.seed),
            width: size,
            height: size,
            objects,
            gt_triplets: Some(gt),
        });
    }
    Ok(scenes)
}

fn random_box(rng: &mut ChaCha8Rng, center: (f64, f64), image: f64) -> BBox {
    let w = rng.gen_range(0.08..0.15) * image;
    let h = rng.gen_range(0.08..0.15) * image;
    BBox::new(center.0 - w / 2.0, center.1 - h / 2.0, center.0 + w / 2.0, center.1 + h / 2.0)
}

fn detect(
    rng: &mut ChaCha8Rng,
    cfg: &SyntheticConfig,
    gt_box: BBox,
    class: usize,
    mean: &[f64],
    n_obj: usize,
) -> DetectedObject {
    let mut noisy = gt_box.to_array();
    for v in &mut noisy {
        *v += cfg.box_noise * rng.sample::<f64, _>(StandardNormal);
        *v = v.clamp(0.0, cfg.image_size);
    }
    let mut bbox = BBox::from(noisy);
    if !bbox.is_valid() {
        bbox = gt_box;
    }
    let visual_feature =
        mean.iter().map(|m| m + cfg.feature_noise * rng.sample::<f64, _>(StandardNormal)).collect();
    let distribution = if n_obj == 1 {
        vec![1.0]
    } else {
        let conf = rng.gen_range(0.6..0.95);
        let rest = (1.0 - conf) / (n_obj - 1) as f64;
        (0..n_obj).map(|c| if c == class { conf } else { rest }).collect()
    };
    DetectedObject { bbox, visual_feature, label: class, distribution }
}
