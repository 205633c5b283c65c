use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::matching::{hits_at, match_triplets, prediction_hits, rank_order, MatchCriterion};
use crate::ontology::{LongTailSplit, Ontology, RelationType, BACKGROUND};
use crate::scene::{Scene, ScenePrediction, Triplet};

/// Recall cut-offs reported by [`evaluate`].
pub const DEFAULT_KS: [usize; 3] = [20, 50, 100];

/// Label written into every report describing the ranking convention.
pub const PROTOCOL: &str =
    "no graph constraint: every relation of every pair is ranked; top-K per scene; IoU >= 0.5";

pub fn recall(hits: usize, total: usize) -> Option<f64> {
    (total > 0).then(|| hits as f64 / total as f64)
}

/// Mean of the defined values, or `None` when there are none.
pub fn mean_defined(values: impl IntoIterator<Item = Option<f64>>) -> Option<f64> {
    let (sum, n) = values.into_iter().flatten().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Exact area under the precision-recall step curve of one ranked list.
///
/// `tp` is in rank order. Returns 0 when `n_gt` is 0.
pub fn average_precision(tp: &[bool], n_gt: usize) -> f64 {
    if n_gt == 0 {
        return 0.0;
    }
    let mut found = 0usize;
    let mut area = 0.0;
    for (i, &hit) in tp.iter().enumerate() {
        if hit {
            found += 1;
            area += found as f64 / (i + 1) as f64;
        }
    }
    area / n_gt as f64
}

/// `0.2 R@50 + 0.4 wmAP_rel + 0.4 wmAP_phr`, on whatever common scale the inputs use.
pub fn score_wtd(r50: f64, wmap_rel: f64, wmap_phr: f64) -> f64 {
    0.2 * r50 + 0.4 * wmap_rel + 0.4 * wmap_phr
}

/// Matching results of one scene.
#[derive(Debug, Clone)]
pub struct SceneMatches {
    pub gt_relations: Vec<usize>,
    pub relation_hits: Vec<Option<usize>>,
    pub pair_hits: Vec<Option<usize>>,
    /// Per prediction (list order): relation, score, matched under both boxes, matched under union box.
    pub predictions: Vec<(usize, f64, bool, bool)>,
    /// Rank of each prediction in list order.
    pub ranks: Vec<usize>,
}

pub fn match_scene(preds: &[Triplet], scene: &Scene) -> SceneMatches {
    let gt = scene.gt();
    let relation_hits = match_triplets(preds, gt, &MatchCriterion::RELATION);
    let pair_hits = match_triplets(preds, gt, &MatchCriterion::PAIR);
    let phrase_hits = match_triplets(preds, gt, &MatchCriterion::PHRASE);
    let rel_tp = prediction_hits(preds, &relation_hits);
    let phr_tp = prediction_hits(preds, &phrase_hits);
    let order = rank_order(preds);
    let mut ranks = vec![0; preds.len()];
    for (r, &p) in order.iter().enumerate() {
        ranks[p] = r;
    }
    SceneMatches {
        gt_relations: gt.iter().map(|t| t.rel).collect(),
        relation_hits,
        pair_hits,
        predictions: preds
            .iter()
            .enumerate()
            .map(|(i, p)| (p.relation, p.score, rel_tp[i], phr_tp[i]))
            .collect(),
        ranks,
    }
}

/// Per-scene recall averaged over scenes with at least one GT triplet.
pub fn recall_at_k(matches: &[SceneMatches], k: usize) -> f64 {
    mean_defined(matches.iter().map(|m| recall(hits_at(&m.relation_hits, k), m.gt_relations.len()))).unwrap_or(0.0)
}

pub fn pair_recall_at_k(matches: &[SceneMatches], k: usize) -> f64 {
    mean_defined(matches.iter().map(|m| recall(hits_at(&m.pair_hits, k), m.gt_relations.len()))).unwrap_or(0.0)
}

/// Recall of each relation class present in the GT: per scene, then averaged over
/// the scenes that contain the class.
pub fn per_class_recall_at_k(matches: &[SceneMatches], k: usize) -> BTreeMap<usize, f64> {
    let mut acc: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for m in matches {
        let mut per: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
        for (g, &rel) in m.gt_relations.iter().enumerate() {
            let e = per.entry(rel).or_default();
            e.1 += 1;
            if matches!(m.relation_hits[g], Some(r) if r < k) {
                e.0 += 1;
            }
        }
        for (rel, (hit, total)) in per {
            let e = acc.entry(rel).or_default();
            e.0 += hit as f64 / total as f64;
            e.1 += 1;
        }
    }
    acc.into_iter().map(|(rel, (s, n))| (rel, s / n as f64)).collect()
}

/// Unweighted mean of per-class recalls.
pub fn mean_recall(per_class: &BTreeMap<usize, f64>) -> f64 {
    mean_defined(per_class.values().map(|&v| Some(v))).unwrap_or(0.0)
}

/// GT-count-weighted mean of per-class AP; `phrase` selects union-box matching.
pub fn weighted_map(matches: &[SceneMatches], phrase: bool) -> f64 {
    let mut gt_count: BTreeMap<usize, usize> = BTreeMap::new();
    for m in matches {
        for &r in &m.gt_relations {
            *gt_count.entry(r).or_default() += 1;
        }
    }
    let total: usize = gt_count.values().sum();
    if total == 0 {
        return 0.0;
    }
    // (score, scene, rank, tp) per class
    let mut ranked: BTreeMap<usize, Vec<(f64, usize, usize, bool)>> = BTreeMap::new();
    for (s, m) in matches.iter().enumerate() {
        for (p, &(rel, score, rel_tp, phr_tp)) in m.predictions.iter().enumerate() {
            if gt_count.contains_key(&rel) {
                ranked.entry(rel).or_default().push((score, s, m.ranks[p], if phrase { phr_tp } else { rel_tp }));
            }
        }
    }
    let mut weighted = 0.0;
    for (rel, n_gt) in &gt_count {
        let mut list = ranked.remove(rel).unwrap_or_default();
        list.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let tp: Vec<bool> = list.iter().map(|x| x.3).collect();
        weighted += *n_gt as f64 * average_precision(&tp, *n_gt);
    }
    weighted / total as f64
}

/// Mean recall restricted to each long-tail split; splits with no scored class are omitted.
pub fn longtail_report(per_class: &BTreeMap<usize, f64>, ontology: &Ontology) -> BTreeMap<LongTailSplit, f64> {
    let mut out = BTreeMap::new();
    for split in LongTailSplit::ALL {
        let vals: Vec<Option<f64>> = per_class
            .iter()
            .filter(|(&rel, _)| ontology.split_of(rel) == Some(split))
            .map(|(_, &v)| Some(v))
            .collect();
        match mean_defined(vals) {
            Some(v) => {
                out.insert(split, v);
            }
            None => log::info!("long-tail split {split} has no evaluated class; omitted"),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanRecall {
    pub mean: f64,
    pub per_class: BTreeMap<String, f64>,
}

/// All metrics as fractions in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub protocol: String,
    pub r_at: BTreeMap<usize, f64>,
    pub mr_at: BTreeMap<usize, MeanRecall>,
    pub pr_at: BTreeMap<usize, f64>,
    pub wmap_rel: f64,
    pub wmap_phr: f64,
    pub score_wtd: f64,
    /// Mean recall at the largest K within each long-tail split.
    pub longtail: BTreeMap<LongTailSplit, f64>,
}

fn pct(v: f64) -> String {
    format!("{:.2}", 100.0 * v)
}

impl MetricReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per (metric, K, split), values in percent.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("metric,k,split,value\n");
        for (k, v) in &self.r_at {
            let _ = writeln!(s, "R,{k},all,{}", pct(*v));
        }
        for (k, v) in &self.mr_at {
            let _ = writeln!(s, "mR,{k},all,{}", pct(v.mean));
        }
        for (k, v) in &self.pr_at {
            let _ = writeln!(s, "pR,{k},all,{}", pct(*v));
        }
        let k_max = self.mr_at.keys().next_back().copied().unwrap_or(0);
        for (split, v) in &self.longtail {
            let _ = writeln!(s, "mR,{k_max},{split},{}", pct(*v));
        }
        let _ = writeln!(s, "wmAP_rel,,all,{}", pct(self.wmap_rel));
        let _ = writeln!(s, "wmAP_phr,,all,{}", pct(self.wmap_phr));
        let _ = writeln!(s, "score_wtd,,all,{}", pct(self.score_wtd));
        s
    }

    /// Aligned plain-text rendering of [`MetricReport::to_csv`].
    pub fn to_text(&self) -> String {
        let mut s = format!("# {}\n", self.protocol);
        s.push_str(&align_csv(&self.to_csv()));
        s
    }
}

/// Pads every CSV column to its widest cell.
pub fn align_csv(csv: &str) -> String {
    let rows: Vec<Vec<&str>> = csv.lines().map(|l| l.split(',').collect()).collect();
    let ncol = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> =
        (0..ncol).map(|c| rows.iter().filter_map(|r| r.get(c)).map(|x| x.len()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for r in rows {
        let line: Vec<String> = r.iter().enumerate().map(|(c, x)| format!("{x:<w$}", w = widths[c])).collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// Pairs predictions with GT scenes by id; scenes without predictions get an empty list.
pub fn match_corpus(preds: &[ScenePrediction], scenes: &[Scene]) -> Result<Vec<SceneMatches>> {
    let mut by_id: HashMap<&str, &ScenePrediction> = HashMap::new();
    for p in preds {
        if by_id.insert(p.scene_id.as_str(), p).is_some() {
            return Err(Error::Schema(format!("duplicate prediction for scene {}", p.scene_id)));
        }
    }
    let known: std::collections::HashSet<&str> = scenes.iter().map(|s| s.scene_id.as_str()).collect();
    if let Some(p) = preds.iter().find(|p| !known.contains(p.scene_id.as_str())) {
        return Err(Error::Schema(format!("prediction for unknown scene {}", p.scene_id)));
    }
    Ok(scenes
        .iter()
        .map(|s| {
            let triplets = by_id.get(s.scene_id.as_str()).map(|p| p.triplets.as_slice()).unwrap_or(&[]);
            match_scene(triplets, s)
        })
        .collect())
}

pub fn evaluate(preds: &[ScenePrediction], scenes: &[Scene], ontology: &Ontology, ks: &[usize]) -> Result<MetricReport> {
    let matches = match_corpus(preds, scenes)?;
    Ok(report_from_matches(&matches, ontology, ks))
}

pub fn report_from_matches(matches: &[SceneMatches], ontology: &Ontology, ks: &[usize]) -> MetricReport {
    let name = |r: usize| ontology.relation_classes().get(r).cloned().unwrap_or_else(|| r.to_string());
    let mut r_at = BTreeMap::new();
    let mut pr_at = BTreeMap::new();
    let mut mr_at = BTreeMap::new();
    let mut per_class_last = BTreeMap::new();
    for &k in ks {
        r_at.insert(k, recall_at_k(matches, k));
        pr_at.insert(k, pair_recall_at_k(matches, k));
        let pc = per_class_recall_at_k(matches, k);
        mr_at.insert(
            k,
            MeanRecall { mean: mean_recall(&pc), per_class: pc.iter().map(|(&r, &v)| (name(r), v)).collect() },
        );
        per_class_last = pc;
    }
    let wmap_rel = weighted_map(matches, false);
    let wmap_phr = weighted_map(matches, true);
    let r50 = r_at.get(&50).copied().unwrap_or_else(|| recall_at_k(matches, 50));
    MetricReport {
        protocol: PROTOCOL.to_string(),
        r_at,
        mr_at,
        pr_at,
        wmap_rel,
        wmap_phr,
        score_wtd: score_wtd(r50, wmap_rel, wmap_phr),
        longtail: longtail_report(&per_class_last, ontology),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub relation: String,
    pub relation_type: RelationType,
    pub count: u64,
    pub global_ratio: f64,
    pub within_type_ratio: f64,
}

/// Share of each relation class in the whole corpus and within its relation type.
/// `counts` is indexed by relation class; the background entry is ignored.
pub fn distribution_ratios(counts: &[u64], ontology: &Ontology) -> Result<Vec<RatioRow>> {
    if counts.len() != ontology.num_relation_classes() {
        return Err(Error::Config("relation count vector does not match the ontology".into()));
    }
    let mut per_type = [0u64; 2];
    let mut total = 0u64;
    for rel in 1..counts.len() {
        let t = ontology.relation_type_of(rel)?;
        per_type[t.index()] += counts[rel];
        total += counts[rel];
    }
    if total == 0 {
        return Err(Error::Domain("distribution report needs at least one GT triplet".into()));
    }
    (1..counts.len())
        .map(|rel| {
            let t = ontology.relation_type_of(rel)?;
            let tt = per_type[t.index()];
            Ok(RatioRow {
                relation: ontology.relation_classes()[rel].clone(),
                relation_type: t,
                count: counts[rel],
                global_ratio: counts[rel] as f64 / total as f64,
                within_type_ratio: if tt == 0 { 0.0 } else { counts[rel] as f64 / tt as f64 },
            })
        })
        .collect()
}

pub fn distribution_ratio_report(scenes: &[Scene], ontology: &Ontology) -> Result<Vec<RatioRow>> {
    let mut counts = vec![0u64; ontology.num_relation_classes()];
    for s in scenes {
        for t in s.gt() {
            if t.rel == BACKGROUND || t.rel >= counts.len() {
                return Err(Error::Schema(format!("scene {}: relation index out of range: {}", s.scene_id, t.rel)));
            }
            counts[t.rel] += 1;
        }
    }
    distribution_ratios(&counts, ontology)
}

pub fn ratio_rows_csv(rows: &[RatioRow]) -> String {
    let mut s = String::from("relation,type,global_ratio,within_type_ratio\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{}", r.relation, r.relation_type, pct(r.global_ratio), pct(r.within_type_ratio));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BBox;
    use crate::scene::GtTriplet;
    use std::collections::BTreeMap as Map;

    #[test]
    fn score_wtd_reference_row() {
        let v = score_wtd(81.71, 35.67, 36.46);
        assert!((v - 45.194).abs() < 1e-9);
        assert_eq!(score_wtd(0.0, 0.0, 0.0), 0.0);
        assert!((score_wtd(100.0, 100.0, 100.0) - 100.0).abs() < 1e-12);
    }

    #[test]
    fn ap_edge_cases() {
        assert_eq!(average_precision(&[true, true, false, false], 2), 1.0);
        assert_eq!(average_precision(&[false], 1), 0.0);
        // hits at ranks 2 and 3 of 2 GT: (1/2 + 2/3) / 2
        assert!((average_precision(&[false, true, true], 2) - (0.5 + 2.0 / 3.0) / 2.0).abs() < 1e-15);
    }

    fn scene_with(gt: Vec<GtTriplet>) -> Scene {
        Scene { scene_id: "s".into(), width: 100.0, height: 100.0, objects: vec![], gt_triplets: Some(gt) }
    }

    fn g(rel: usize, x: f64) -> GtTriplet {
        GtTriplet {
            s_box: BBox::new(x, 0.0, x + 5.0, 5.0),
            s_label: 0,
            rel,
            o_box: BBox::new(x, 10.0, x + 5.0, 15.0),
            o_label: 1,
        }
    }

    fn p(t: &GtTriplet, rel: usize, score: f64) -> Triplet {
        Triplet {
            subject_idx: 0,
            object_idx: 1,
            relation: rel,
            score,
            s_box: t.s_box,
            o_box: t.o_box,
            s_label: t.s_label,
            o_label: t.o_label,
        }
    }

    #[test]
    fn weighted_map_by_gt_count() {
        // class 1: three GTs all found first; class 2: one GT never found
        let gts = vec![g(1, 0.0), g(1, 20.0), g(1, 40.0), g(2, 60.0)];
        let preds: Vec<Triplet> = vec![p(&gts[0], 1, 0.9), p(&gts[1], 1, 0.8), p(&gts[2], 1, 0.7), p(&gts[0], 2, 0.6)];
        let m = vec![match_scene(&preds, &scene_with(gts))];
        assert!((weighted_map(&m, false) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn mean_recall_of_two_classes() {
        let gts = vec![g(1, 0.0), g(2, 20.0)];
        let preds = vec![p(&gts[0], 1, 0.9)];
        let m = vec![match_scene(&preds, &scene_with(gts))];
        let pc = per_class_recall_at_k(&m, 50);
        assert_eq!(pc, Map::from([(1, 1.0), (2, 0.0)]));
        assert_eq!(mean_recall(&pc), 0.5);
        assert_eq!(recall_at_k(&m, 50), 0.5);
    }

    #[test]
    fn scenes_without_gt_do_not_count() {
        let gts = vec![g(1, 0.0)];
        let preds = vec![p(&gts[0], 1, 0.9)];
        let mut empty = scene_with(vec![]);
        empty.scene_id = "e".into();
        let m = vec![match_scene(&preds, &scene_with(gts)), match_scene(&[], &empty)];
        assert_eq!(recall_at_k(&m, 50), 1.0);
    }

    #[test]
    fn align_pads_columns() {
        assert_eq!(align_csv("a,bb\nccc,d\n"), "a    bb\nccc  d\n");
    }
}
