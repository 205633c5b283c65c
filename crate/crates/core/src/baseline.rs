//! Frequency prior: ranks relations of a pair by how often its class pair
//! carried each relation in the training GT.

use crate::data::CooccurrenceStats;
use crate::error::Result;
use crate::graph::select_pairs_variant;
use crate::graph::PairSelectionConfig;
use crate::inference::{prepare_scene, rank_triplets, Mode};
use crate::model::Prediction;
use crate::ontology::Ontology;
use crate::scene::{Scene, ScenePrediction};

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyBaseline {
    /// `counts[s][o][r]`
    counts: Vec<Vec<Vec<u64>>>,
    /// Relation counts over all pairs, used for unseen class pairs.
    global: Vec<u64>,
}

impl FrequencyBaseline {
    pub fn fit(scenes: &[Scene], ontology: &Ontology) -> Self {
        let (nc, nr) = (ontology.num_object_classes(), ontology.num_relation_classes());
        let mut counts = vec![vec![vec![0u64; nr]; nc]; nc];
        let mut global = vec![0u64; nr];
        for t in scenes.iter().flat_map(|s| s.gt()) {
            counts[t.s_label][t.o_label][t.rel] += 1;
            global[t.rel] += 1;
        }
        FrequencyBaseline { counts, global }
    }

    /// `p(rel | subject class, object class)` over non-background relations; background gets 0.
    pub fn distribution(&self, subject: usize, object: usize) -> Vec<f64> {
        let row = &self.counts[subject][object];
        let src = if row.iter().sum::<u64>() > 0 { row } else { &self.global };
        let total: u64 = src.iter().skip(1).sum();
        let n = src.len();
        src.iter()
            .enumerate()
            .map(|(r, &c)| match (r, total) {
                (0, _) => 0.0,
                (_, 0) => 1.0 / (n - 1) as f64,
                _ => c as f64 / total as f64,
            })
            .collect()
    }

    /// Predicted triplets on the pairs chosen by `pairs`, labels fixed as in predcls.
    pub fn predict(
        &self,
        scene: &Scene,
        stats: &CooccurrenceStats,
        pairs: &PairSelectionConfig,
        mode: Mode,
        max_triplets: usize,
    ) -> Result<ScenePrediction> {
        self.predict_with(scene, stats, pairs, None, mode, max_triplets)
    }

    /// [`FrequencyBaseline::predict`] with label embeddings for the similarity strategies.
    pub fn predict_with(
        &self,
        scene: &Scene,
        stats: &CooccurrenceStats,
        pairs: &PairSelectionConfig,
        label_embeddings: Option<&[Vec<f64>]>,
        mode: Mode,
        max_triplets: usize,
    ) -> Result<ScenePrediction> {
        let prepared = prepare_scene(scene, mode)?;
        let s = &prepared.scene;
        let edges = select_pairs_variant(pairs, s, stats, label_embeddings)?;
        let relation_probs = edges.iter().map(|&(i, j)| self.distribution(s.objects[i].label, s.objects[j].label)).collect();
        let pred = Prediction {
            edge_types: Vec::new(),
            object_probs: s.objects.iter().map(|o| o.distribution.clone()).collect(),
            relation_probs,
            edges,
        };
        Ok(ScenePrediction {
            scene_id: scene.scene_id.clone(),
            triplets: rank_triplets(s, &pred, mode == Mode::PredCls, max_triplets),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synthetic::synthetic_ontology;
    use crate::geometry::BBox;
    use crate::scene::GtTriplet;

    #[test]
    fn distribution_follows_counts_with_global_fallback() {
        let ont = synthetic_ontology(3, 3, 1.0);
        let b = BBox::new(0.0, 0.0, 1.0, 1.0);
        let t = |rel| GtTriplet { s_box: b, s_label: 0, rel, o_box: b, o_label: 1 };
        let scene = Scene {
            scene_id: "s".into(),
            width: 10.0,
            height: 10.0,
            objects: vec![],
            gt_triplets: Some(vec![t(1), t(1), t(2), t(3)]),
        };
        let f = FrequencyBaseline::fit(&[scene], &ont);
        assert_eq!(f.distribution(0, 1), vec![0.0, 0.5, 0.25, 0.25]);
        assert_eq!(f.distribution(2, 2), vec![0.0, 0.5, 0.25, 0.25]);
    }
}
