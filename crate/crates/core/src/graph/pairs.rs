//! Subject-object pair scoring and selection.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::CooccurrenceStats;
use crate::error::{Error, Result};
use crate::scene::Scene;

/// Dense `n x n` matrix, row-major. Diagonal entries are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct PairMatrix {
    n: usize,
    data: Vec<f64>,
}

impl PairMatrix {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(if i == j { f64::NAN } else { f(i, j) });
            }
        }
        PairMatrix { n, data }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }
}

/// Distance (`M_b`), confidence (`M_p`) and existence (`M_l`) matrices of a scene.
#[derive(Debug, Clone, PartialEq)]
pub struct PairScores {
    pub distance: PairMatrix,
    pub confidence: PairMatrix,
    pub existence: PairMatrix,
}

impl PairScores {
    pub fn size(&self) -> usize {
        self.distance.size()
    }
}

/// Center distance in pixels (or as a fraction of the image diagonal when
/// `normalize_distance`), product of max class probabilities, and the
/// co-occurrence existence probability of the label pair.
pub fn compute_pair_matrices(scene: &Scene, stats: &CooccurrenceStats, normalize_distance: bool) -> PairScores {
    let objs = &scene.objects;
    let n = objs.len();
    let diag = if normalize_distance { scene.width.hypot(scene.height) } else { 1.0 };
    let conf: Vec<f64> = objs.iter().map(|o| o.confidence()).collect();
    PairScores {
        distance: PairMatrix::from_fn(n, |i, j| objs[i].bbox.center_distance(&objs[j].bbox) / diag),
        confidence: PairMatrix::from_fn(n, |i, j| conf[i] * conf[j]),
        existence: PairMatrix::from_fn(n, |i, j| stats.prob(objs[i].label, objs[j].label)),
    }
}

/// Ordered pairs kept by the top-`k` confidence clause: ranked by descending
/// score with ascending `(i, j)` breaking ties, so exactly `min(k, n(n-1))` survive.
pub fn top_k_pairs(scores: &PairMatrix, k: usize) -> Vec<bool> {
    let n = scores.size();
    let mut cands: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).collect();
    cands.sort_by(|&(a, b), &(c, d)| scores.get(c, d).total_cmp(&scores.get(a, b)).then((a, b).cmp(&(c, d))));
    let mut keep = vec![false; n * n];
    for &(i, j) in cands.iter().take(k) {
        keep[i * n + j] = true;
    }
    keep
}

/// `(M_b < s_b) ∧ (M_l > s_l) ∧ (M_p in top-k)`, as ordered pairs in ascending order.
pub fn select_pairs(scores: &PairScores, s_b: f64, s_l: f64, k: usize) -> Vec<(usize, usize)> {
    let n = scores.size();
    if n < 2 {
        return Vec::new();
    }
    let top = top_k_pairs(&scores.confidence, k);
    off_diagonal(n)
        .filter(|&(i, j)| {
            scores.distance.get(i, j) < s_b && scores.existence.get(i, j) > s_l && top[i * n + j]
        })
        .collect()
}

fn off_diagonal(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
}

/// Pair-selection rules compared in the pair-selection benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Top-k by pair confidence only.
    Con,
    /// IoU above a threshold.
    Iou,
    /// Overlap over the smaller box area above a threshold.
    IouPlus,
    /// Cosine similarity of label embeddings above a threshold.
    Sim,
    /// Center distance below `s_b`.
    Dis,
    /// Existence probability above `s_l`.
    Lin,
    DisSim,
    ConLin,
    DisLin,
    /// Distance, existence and confidence together.
    Full,
}

impl Strategy {
    pub const ALL: [Strategy; 10] = [
        Strategy::Con,
        Strategy::Iou,
        Strategy::IouPlus,
        Strategy::Sim,
        Strategy::Dis,
        Strategy::Lin,
        Strategy::DisSim,
        Strategy::ConLin,
        Strategy::DisLin,
        Strategy::Full,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Con => "con",
            Strategy::Iou => "iou",
            Strategy::IouPlus => "iou_plus",
            Strategy::Sim => "sim",
            Strategy::Dis => "dis",
            Strategy::Lin => "lin",
            Strategy::DisSim => "dis_sim",
            Strategy::ConLin => "con_lin",
            Strategy::DisLin => "dis_lin",
            Strategy::Full => "full",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown pair-selection strategy: {s}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSelectionConfig {
    pub strategy: Strategy,
    /// Distance threshold, pixels unless `normalize_distance`.
    pub s_b: f64,
    /// Existence-probability threshold.
    pub s_l: f64,
    /// Confidence clause size.
    pub top_k: usize,
    pub iou_min: f64,
    pub sim_min: f64,
    pub normalize_distance: bool,
}

impl Default for PairSelectionConfig {
    fn default() -> Self {
        PairSelectionConfig {
            strategy: Strategy::Full,
            s_b: 600.0,
            s_l: 0.00001,
            top_k: 4096,
            iou_min: 0.0,
            sim_min: 0.0,
            normalize_distance: false,
        }
    }
}

/// Selects pairs under `cfg.strategy`. `label_embeddings` (one row per object
/// class) is required by the similarity-based strategies.
pub fn select_pairs_variant(
    cfg: &PairSelectionConfig,
    scene: &Scene,
    stats: &CooccurrenceStats,
    label_embeddings: Option<&[Vec<f64>]>,
) -> Result<Vec<(usize, usize)>> {
    let n = scene.objects.len();
    if n < 2 {
        return Ok(Vec::new());
    }
    let scores = compute_pair_matrices(scene, stats, cfg.normalize_distance);
    if cfg.strategy == Strategy::Full {
        return Ok(select_pairs(&scores, cfg.s_b, cfg.s_l, cfg.top_k));
    }
    let objs = &scene.objects;
    let top = top_k_pairs(&scores.confidence, cfg.top_k);
    let con = |i: usize, j: usize| top[i * n + j];
    let dis = |i: usize, j: usize| scores.distance.get(i, j) < cfg.s_b;
    let lin = |i: usize, j: usize| scores.existence.get(i, j) > cfg.s_l;
    let iou = |i: usize, j: usize| objs[i].bbox.iou(&objs[j].bbox) > cfg.iou_min;
    let iou_plus = |i: usize, j: usize| objs[i].bbox.overlap_over_min(&objs[j].bbox) > cfg.iou_min;
    let needs_sim = matches!(cfg.strategy, Strategy::Sim | Strategy::DisSim);
    let emb = match (needs_sim, label_embeddings) {
        (true, None) => {
            return Err(Error::Config(format!("strategy {} needs label embeddings", cfg.strategy)))
        }
        (_, e) => e,
    };
    let sim = |i: usize, j: usize| {
        let e = emb.expect("checked above");
        cosine(&e[objs[i].label], &e[objs[j].label]) > cfg.sim_min
    };
    let keep = |i: usize, j: usize| match cfg.strategy {
        Strategy::Con => con(i, j),
        Strategy::Iou => iou(i, j),
        Strategy::IouPlus => iou_plus(i, j),
        Strategy::Sim => sim(i, j),
        Strategy::Dis => dis(i, j),
        Strategy::Lin => lin(i, j),
        Strategy::DisSim => dis(i, j) && sim(i, j),
        Strategy::ConLin => con(i, j) && lin(i, j),
        Strategy::DisLin => dis(i, j) && lin(i, j),
        Strategy::Full => unreachable!(),
    };
    Ok(off_diagonal(n).filter(|&(i, j)| keep(i, j)).collect())
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BBox;
    use crate::scene::DetectedObject;

    fn obj(b: BBox, label: usize, dist: Vec<f64>) -> DetectedObject {
        DetectedObject { bbox: b, visual_feature: vec![], label, distribution: dist }
    }

    fn scene(objects: Vec<DetectedObject>) -> Scene {
        Scene { scene_id: "t".into(), width: 100.0, height: 100.0, objects, gt_triplets: None }
    }

    #[test]
    fn matrices_examples() {
        let mut counts = vec![vec![0u64; 3]; 3];
        counts[0][1] = 1;
        let stats = CooccurrenceStats::from_counts(counts);
        let s = scene(vec![
            obj(BBox::new(0.0, 0.0, 10.0, 10.0), 0, vec![1.0, 0.0, 0.0]),
            obj(BBox::new(30.0, 40.0, 40.0, 50.0), 1, vec![0.0, 1.0, 0.0]),
        ]);
        let m = compute_pair_matrices(&s, &stats, false);
        assert_eq!(m.distance.get(0, 1), 50.0);
        assert_eq!(m.confidence.get(0, 1), 1.0);
        assert_eq!(m.existence.get(0, 1), 0.5);
        assert!(m.distance.get(0, 0).is_nan());
        let norm = compute_pair_matrices(&s, &stats, true);
        assert!((norm.distance.get(1, 0) - 50.0 / 100f64.hypot(100.0)).abs() < 1e-15);
    }

    #[test]
    fn permissive_filters_keep_everything() {
        let scores = PairScores {
            distance: PairMatrix::from_fn(3, |i, j| (i + j) as f64),
            confidence: PairMatrix::from_fn(3, |_, _| 0.5),
            existence: PairMatrix::from_fn(3, |_, _| 0.1),
        };
        let e = select_pairs(&scores, 100.0, 0.0, 6);
        assert_eq!(e, vec![(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)]);
    }

    #[test]
    fn top_k_ties_break_lexicographically() {
        let conf = PairMatrix::from_fn(3, |_, _| 0.5);
        let keep = top_k_pairs(&conf, 2);
        let kept: Vec<usize> = keep.iter().enumerate().filter(|(_, &k)| k).map(|(i, _)| i).collect();
        assert_eq!(kept, vec![1, 2]); // (0,1) and (0,2)
    }

    #[test]
    fn fewer_than_two_objects_is_empty() {
        let stats = CooccurrenceStats::from_counts(vec![vec![0]]);
        let s = scene(vec![obj(BBox::new(0.0, 0.0, 1.0, 1.0), 0, vec![1.0])]);
        let cfg = PairSelectionConfig::default();
        assert!(select_pairs_variant(&cfg, &s, &stats, None).unwrap().is_empty());
    }

    #[test]
    fn overlap_variants() {
        let stats = CooccurrenceStats::from_counts(vec![vec![0; 2]; 2]);
        let s = scene(vec![
            obj(BBox::new(0.0, 0.0, 10.0, 10.0), 0, vec![1.0, 0.0]),
            obj(BBox::new(0.0, 0.0, 20.0, 20.0), 1, vec![0.0, 1.0]),
            obj(BBox::new(50.0, 50.0, 60.0, 60.0), 1, vec![0.0, 1.0]),
        ]);
        let iou = PairSelectionConfig { strategy: Strategy::Iou, iou_min: 0.1, ..Default::default() };
        assert_eq!(select_pairs_variant(&iou, &s, &stats, None).unwrap(), vec![(0, 1), (1, 0)]);
        let plus = PairSelectionConfig { strategy: Strategy::IouPlus, iou_min: 0.99, ..Default::default() };
        assert_eq!(select_pairs_variant(&plus, &s, &stats, None).unwrap(), vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn similarity_variant() {
        let stats = CooccurrenceStats::from_counts(vec![vec![0; 2]; 2]);
        let b = BBox::new(0.0, 0.0, 10.0, 10.0);
        let s = scene(vec![obj(b, 0, vec![1.0, 0.0]), obj(b, 0, vec![1.0, 0.0]), obj(b, 1, vec![0.0, 1.0])]);
        let emb = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let cfg = PairSelectionConfig { strategy: Strategy::Sim, sim_min: 0.5, ..Default::default() };
        assert_eq!(select_pairs_variant(&cfg, &s, &stats, Some(&emb)).unwrap(), vec![(0, 1), (1, 0)]);
        assert!(select_pairs_variant(&cfg, &s, &stats, None).is_err());
        assert_eq!(cosine(&[0.3, 0.4], &[0.3, 0.4]), 1.0);
    }

    #[test]
    fn strategy_names_parse() {
        for s in Strategy::ALL {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
        }
        assert!(matches!("bogus".parse::<Strategy>(), Err(Error::Usage(_))));
    }
}
