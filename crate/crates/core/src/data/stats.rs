use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::scenes::write_atomic;
use crate::error::{Error, Result};
use crate::ontology::Ontology;
use crate::scene::Scene;

/// Ground-truth subject/object class co-occurrence with add-one smoothed,
/// row-conditional existence probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CooccurrenceStats {
    pub counts: Vec<Vec<u64>>,
    pub pair_prob: Vec<Vec<f64>>,
}

impl CooccurrenceStats {
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Self {
        let n = counts.len();
        let pair_prob = counts
            .iter()
            .map(|row| {
                let total: u64 = row.iter().sum();
                row.iter().map(|&c| (c + 1) as f64 / (total + n as u64) as f64).collect()
            })
            .collect();
        CooccurrenceStats { counts, pair_prob }
    }

    pub fn num_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn prob(&self, subject: usize, object: usize) -> f64 {
        self.pair_prob[subject][object]
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let stats: Self =
            serde_json::from_str(&text).map_err(|e| Error::Schema(format!("stats file: {e}")))?;
        let n = stats.counts.len();
        if stats.pair_prob.len() != n
            || stats.counts.iter().any(|r| r.len() != n)
            || stats.pair_prob.iter().any(|r| r.len() != n)
        {
            return Err(Error::Schema("stats matrices are not square or disagree".into()));
        }
        Ok(stats)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string(self)?;
        write_atomic(path.as_ref(), text.as_bytes())
    }

    pub fn check_dims(&self, ontology: &Ontology) -> Result<()> {
        if self.num_classes() != ontology.num_object_classes() {
            return Err(Error::Config(format!(
                "stats cover {} object classes, ontology has {}",
                self.num_classes(),
                ontology.num_object_classes()
            )));
        }
        Ok(())
    }
}

/// Counts GT triplets per (subject class, object class). Scenes without GT
/// contribute nothing; an empty corpus yields uniform probabilities.
pub fn build_cooccurrence_stats(scenes: &[Scene], ontology: &Ontology) -> CooccurrenceStats {
    let n = ontology.num_object_classes();
    let mut counts = vec![vec![0u64; n]; n];
    let mut seen = 0usize;
    let mut missing = 0usize;
    for s in scenes {
        match &s.gt_triplets {
            Some(gt) => {
                for t in gt {
                    counts[t.s_label][t.o_label] += 1;
                    seen += 1;
                }
            }
            None => missing += 1,
        }
    }
    if missing > 0 {
        log::warn!("{missing} scenes carry no ground truth and were skipped");
    }
    if seen == 0 {
        log::warn!("empty ground-truth corpus, existence probabilities are uniform");
    }
    CooccurrenceStats::from_counts(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BBox;
    use crate::scene::GtTriplet;

    fn ontology() -> Ontology {
        Ontology::from_json(
            r#"{"object_classes":["man","horse","hat"],"relation_classes":["__background__","riding"],"type_map":{"riding":"interactive"}}"#,
        )
        .unwrap()
    }

    fn scene_with(triplets: Vec<GtTriplet>) -> Scene {
        Scene {
            scene_id: "s".into(),
            width: 10.0,
            height: 10.0,
            objects: vec![],
            gt_triplets: Some(triplets),
        }
    }

    fn man_riding_horse() -> GtTriplet {
        let b = BBox::new(0.0, 0.0, 1.0, 1.0);
        GtTriplet { s_box: b, s_label: 0, rel: 1, o_box: b, o_label: 1 }
    }

    #[test]
    fn single_triplet_smoothing() {
        let stats = build_cooccurrence_stats(&[scene_with(vec![man_riding_horse()])], &ontology());
        assert_eq!(stats.counts[0][1], 1);
        assert_eq!(stats.prob(0, 1), 0.5);
        assert_eq!(stats.prob(0, 0), 0.25);
        assert_eq!(stats.prob(1, 0), 1.0 / 3.0);
    }

    #[test]
    fn empty_corpus_is_uniform() {
        let o = Ontology::from_json(
            r#"{"object_classes":["a","b"],"relation_classes":["__background__","r"],"type_map":{"r":"interactive"}}"#,
        )
        .unwrap();
        let stats = build_cooccurrence_stats(&[], &o);
        assert!(stats.pair_prob.iter().flatten().all(|&p| p == 0.5));
    }

    #[test]
    fn repeated_triplet_counts() {
        let t = man_riding_horse();
        let stats = build_cooccurrence_stats(&[scene_with(vec![t.clone(), t.clone(), t])], &ontology());
        assert_eq!(stats.counts[0][1], 3);
        assert!(stats.pair_prob.iter().flatten().all(|&p| p > 0.0 && p <= 1.0));
    }
}
