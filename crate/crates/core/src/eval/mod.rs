//! Recall, mean recall, pair recall, weighted mAP and report generation.

pub mod matching;
pub mod metrics;

pub use matching::{hits_at, match_triplets, rank_order, triplet_matches, MatchCriterion};
pub use metrics::{
    align_csv, average_precision, distribution_ratio_report, distribution_ratios, evaluate, longtail_report,
    match_corpus, match_scene, mean_recall, pair_recall_at_k, per_class_recall_at_k, ratio_rows_csv,
    recall_at_k, report_from_matches, score_wtd, weighted_map, MeanRecall, MetricReport, RatioRow, SceneMatches,
    DEFAULT_KS, PROTOCOL,
};
