use serde::{Deserialize, Serialize};

use crate::scene::{GtTriplet, Triplet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchCriterion {
    pub iou_threshold: f64,
    /// Match the subject-object union box instead of both boxes.
    pub phrase: bool,
    /// Pair recall: the relation label is not compared.
    pub ignore_relation: bool,
}

impl MatchCriterion {
    pub const RELATION: MatchCriterion = MatchCriterion { iou_threshold: 0.5, phrase: false, ignore_relation: false };
    pub const PHRASE: MatchCriterion = MatchCriterion { iou_threshold: 0.5, phrase: true, ignore_relation: false };
    pub const PAIR: MatchCriterion = MatchCriterion { iou_threshold: 0.5, phrase: false, ignore_relation: true };
}

impl Default for MatchCriterion {
    fn default() -> Self {
        MatchCriterion::RELATION
    }
}

pub fn triplet_matches(pred: &Triplet, gt: &GtTriplet, c: &MatchCriterion) -> bool {
    if pred.s_label != gt.s_label || pred.o_label != gt.o_label {
        return false;
    }
    if !c.ignore_relation && pred.relation != gt.rel {
        return false;
    }
    if c.phrase {
        pred.s_box.union(&pred.o_box).iou(&gt.s_box.union(&gt.o_box)) >= c.iou_threshold
    } else {
        pred.s_box.iou(&gt.s_box) >= c.iou_threshold && pred.o_box.iou(&gt.o_box) >= c.iou_threshold
    }
}

/// Indices of `preds` in rank order: descending score, ties by list position.
pub fn rank_order(preds: &[Triplet]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&a, &b| preds[b].score.total_cmp(&preds[a].score).then(a.cmp(&b)));
    order
}

/// Greedy one-to-one matching by prediction rank.
///
/// Returns, for each GT triplet, the rank (0-based position in rank order) of
/// the prediction that claimed it. Each prediction takes the lowest-index
/// unclaimed GT it matches; with `ignore_relation`, GTs whose relation also
/// agrees are preferred. Because claims never depend on later ranks, the hits
/// of the top-K prefix are exactly the GTs whose rank is below K.
pub fn match_triplets(preds: &[Triplet], gt: &[GtTriplet], c: &MatchCriterion) -> Vec<Option<usize>> {
    let mut hit: Vec<Option<usize>> = vec![None; gt.len()];
    for (rank, &p) in rank_order(preds).iter().enumerate() {
        let pred = &preds[p];
        let mut chosen: Option<usize> = None;
        for (g, t) in gt.iter().enumerate() {
            if hit[g].is_some() || !triplet_matches(pred, t, c) {
                continue;
            }
            if !c.ignore_relation || t.rel == pred.relation {
                chosen = Some(g);
                break;
            }
            chosen.get_or_insert(g);
        }
        if let Some(g) = chosen {
            hit[g] = Some(rank);
        }
    }
    hit
}

/// Number of GTs claimed within the top `k` ranks.
pub fn hits_at(hits: &[Option<usize>], k: usize) -> usize {
    hits.iter().filter(|h| matches!(h, Some(r) if *r < k)).count()
}

/// For each prediction (by list position), whether it claimed a GT.
pub fn prediction_hits(preds: &[Triplet], gt_hits: &[Option<usize>]) -> Vec<bool> {
    let order = rank_order(preds);
    let mut out = vec![false; preds.len()];
    for r in gt_hits.iter().flatten() {
        out[order[*r]] = true;
    }
    out
}
