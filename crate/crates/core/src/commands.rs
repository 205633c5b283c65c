//! Batch subcommands behind the `sgg` binary. Every subcommand writes its
//! outputs into `--out` together with a `config.json` snapshot of the
//! resolved arguments.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::baseline::FrequencyBaseline;
use crate::data::scenes::{write_atomic, write_jsonl};
use crate::data::{
    build_cooccurrence_stats, generate_synthetic_dataset, load_checkpoint, load_predictions, load_scenes,
    save_checkpoint, save_predictions, save_scenes, synthetic_ontology, CooccurrenceStats, SyntheticConfig,
};
use crate::encoding::label_embeddings;
use crate::error::{Error, Result};
use crate::eval::{
    align_csv, distribution_ratio_report, evaluate, match_corpus, pair_recall_at_k, ratio_rows_csv, MetricReport,
    DEFAULT_KS,
};
use crate::graph::{select_pairs_variant, PairSelectionConfig, Strategy};
use crate::inference::{infer, Mode};
use crate::model::{Model, ModelConfig};
use crate::ontology::Ontology;
use crate::scene::{Scene, ScenePrediction};
use crate::training::{train, LossMode, TrainConfig};

#[derive(Debug, Parser, Serialize)]
#[command(name = "sgg", version, about = "Scene graph generation: train, infer, evaluate, ablate")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Generate a synthetic rule-governed corpus (and its ontology).
    Generate(GenerateArgs),
    /// Count GT class-pair co-occurrences for the existence matrix.
    PrepareStats(PrepareStatsArgs),
    Train(TrainArgs),
    /// Write ranked triplets for every scene.
    Infer(InferArgs),
    /// Score a prediction file against GT.
    Eval(EvalArgs),
    /// Train and evaluate the eight module-toggle combinations.
    Ablate(AblateArgs),
    /// Compare pair-selection strategies by pair recall and edge count.
    PairselBench(PairselArgs),
    /// Relation frequencies globally and within each relation type.
    DistribReport(DistribArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct OutArgs {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Overwrite existing outputs.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct PairArgs {
    #[arg(long, default_value = "full")]
    pub strategy: Strategy,
    /// Distance threshold in pixels.
    #[arg(long, default_value_t = 600.0)]
    pub sb: f64,
    /// Existence-probability threshold.
    #[arg(long, default_value_t = 0.00001)]
    pub sl: f64,
    /// Size of the confidence top-K clause.
    #[arg(long, default_value_t = 4096)]
    pub topk: usize,
}

impl PairArgs {
    pub fn config(&self) -> PairSelectionConfig {
        PairSelectionConfig { strategy: self.strategy, s_b: self.sb, s_l: self.sl, top_k: self.topk, ..Default::default() }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct TrainFlags {
    #[arg(long, default_value = "predcls")]
    pub mode: Mode,
    #[arg(long, default_value_t = 0.008)]
    pub lr: f64,
    #[arg(long, default_value_t = 5)]
    pub batch: usize,
    #[arg(long, default_value_t = 1e-5)]
    pub wd: f64,
    #[arg(long, default_value_t = 30)]
    pub epochs: usize,
    #[arg(long, default_value_t = 2)]
    pub layers_intra: usize,
    #[arg(long, default_value_t = 2)]
    pub layers_inter: usize,
    /// Use softmax cross entropy instead of per-class BCE on softmax outputs.
    #[arg(long)]
    pub cross_entropy: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON file with model dimensions; the visual dimension defaults to the data's.
    #[arg(long)]
    pub model_config: Option<PathBuf>,
}

impl TrainFlags {
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.lr,
            batch_size: self.batch,
            weight_decay: self.wd,
            epochs: self.epochs,
            seed: self.seed,
            loss_mode: if self.cross_entropy { LossMode::CrossEntropy } else { LossMode::BceOnSoftmax },
            mode: self.mode,
            ..Default::default()
        }
    }

    /// Model configuration from `--model-config` (or defaults) with the CLI overrides applied.
    pub fn model_config(&self, pairs: PairSelectionConfig, scenes: &[Scene]) -> Result<ModelConfig> {
        let mut cfg = match &self.model_config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                serde_json::from_str(&text)?
            }
            None => {
                let visual = scenes.iter().flat_map(|s| s.objects.first()).map(|o| o.visual_feature.len()).next();
                ModelConfig { visual_dim: visual.unwrap_or(ModelConfig::default().visual_dim), ..Default::default() }
            }
        };
        cfg.pair_selection = pairs;
        cfg.message_passing.layers_intra = self.layers_intra;
        cfg.message_passing.layers_inter = self.layers_inter;
        Ok(cfg)
    }
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub out: OutArgs,
    /// Existing ontology; a synthetic one is written when absent.
    #[arg(long)]
    pub ontology: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    pub n_scenes: usize,
    #[arg(long, default_value_t = 6)]
    pub object_classes: usize,
    #[arg(long, default_value_t = 5)]
    pub relations: usize,
    #[arg(long, default_value_t = 2.0)]
    pub exponent: f64,
    #[arg(long, default_value_t = 3)]
    pub min_objects: usize,
    #[arg(long, default_value_t = 6)]
    pub max_objects: usize,
    #[arg(long, default_value_t = 128)]
    pub feature_dim: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct PrepareStatsArgs {
    #[command(flatten)]
    pub out: OutArgs,
    #[arg(long)]
    pub ontology: PathBuf,
    #[arg(long)]
    pub scenes: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[command(flatten)]
    pub out: OutArgs,
    #[arg(long)]
    pub ontology: PathBuf,
    #[arg(long)]
    pub scenes: PathBuf,
    /// Validation scenes evaluated after every epoch.
    #[arg(long)]
    pub val_scenes: Option<PathBuf>,
    /// Co-occurrence statistics; built from the training scenes when absent.
    #[arg(long)]
    pub stats: Option<PathBuf>,
    #[command(flatten)]
    pub train: TrainFlags,
    #[command(flatten)]
    pub pairs: PairArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct InferArgs {
    #[command(flatten)]
    pub out: OutArgs,
    #[arg(long)]
    pub ontology: PathBuf,
    #[arg(long)]
    pub scenes: PathBuf,
    #[arg(long)]
    pub stats: PathBuf,
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long, default_value = "predcls")]
    pub mode: Mode,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    #[command(flatten)]
    pub out: OutArgs,
    #[arg(long)]
    pub ontology: PathBuf,
    /// Scenes carrying the GT triplets.
    #[arg(long)]
    pub scenes: PathBuf,
    #[arg(long)]
    pub predictions: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_KS.to_vec())]
    pub ks: Vec<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct AblateArgs {
    #[command(flatten)]
    pub out: OutArgs,
    #[arg(long)]
    pub ontology: PathBuf,
    #[arg(long)]
    pub scenes: PathBuf,
    #[arg(long)]
    pub test_scenes: PathBuf,
    #[arg(long)]
    pub stats: Option<PathBuf>,
    #[command(flatten)]
    pub train: TrainFlags,
    #[command(flatten)]
    pub pairs: PairArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct PairselArgs {
    #[command(flatten)]
    pub out: OutArgs,
    #[arg(long)]
    pub ontology: PathBuf,
    #[arg(long)]
    pub scenes: PathBuf,
    #[arg(long)]
    pub stats: Option<PathBuf>,
    /// Source of label embeddings for the similarity strategies; a freshly
    /// initialized model drawn from `--seed` is used when absent.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long, default_value = "predcls")]
    pub mode: Mode,
    #[arg(long, default_value_t = 0.0)]
    pub iou_min: f64,
    #[arg(long, default_value_t = 0.0)]
    pub sim_min: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub pairs: PairArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct DistribArgs {
    #[command(flatten)]
    pub out: OutArgs,
    #[arg(long)]
    pub ontology: PathBuf,
    #[arg(long)]
    pub scenes: PathBuf,
}

/// Module toggles of the ablation table: A pair selection, B typed
/// heterogeneous inter-type passing, C dual-graph intra-type passing.
pub const ABLATION_ROWS: [(bool, bool, bool); 8] = [
    (false, false, false),
    (false, false, true),
    (false, true, false),
    (false, true, true),
    (true, false, false),
    (true, false, true),
    (true, true, false),
    (true, true, true),
];

/// `base` with the three module toggles applied. A off selects pairs by
/// confidence alone, B off shares one weight set across relation types,
/// C off skips the intra-type stage.
pub fn ablation_variant(base: &ModelConfig, a: bool, b: bool, c: bool) -> ModelConfig {
    let mut cfg = *base;
    if !a {
        cfg.pair_selection.strategy = Strategy::Con;
    }
    cfg.message_passing.typed = b;
    if !c {
        cfg.message_passing.layers_intra = 0;
    }
    cfg
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    /// 1-based row number in [`ABLATION_ROWS`] order.
    pub no: usize,
    pub toggles: (bool, bool, bool),
    pub report: MetricReport,
}

/// Trains and evaluates every toggle combination from the same seed.
pub fn run_ablation(
    base: &ModelConfig,
    ontology: &Ontology,
    train_scenes: &[Scene],
    test_scenes: &[Scene],
    stats: &CooccurrenceStats,
    cfg: &TrainConfig,
) -> Result<Vec<AblationRow>> {
    ABLATION_ROWS
        .iter()
        .enumerate()
        .map(|(i, &(a, b, c))| {
            let report = train_and_evaluate(&ablation_variant(base, a, b, c), ontology, train_scenes, test_scenes, stats, cfg)?;
            log::info!("ablation No.{} done", i + 1);
            Ok(AblationRow { no: i + 1, toggles: (a, b, c), report })
        })
        .collect()
}

/// Trains a fresh model seeded by `cfg.seed`, then scores it on `test_scenes`.
pub fn train_and_evaluate(
    model_cfg: &ModelConfig,
    ontology: &Ontology,
    train_scenes: &[Scene],
    test_scenes: &[Scene],
    stats: &CooccurrenceStats,
    cfg: &TrainConfig,
) -> Result<MetricReport> {
    let model = Model::new(*model_cfg, ontology, cfg.seed)?;
    let out = train(&model, train_scenes, &[], stats, cfg, |_| {})?;
    if let Some(reason) = out.aborted {
        return Err(Error::Diverged { epoch: out.optimizer.epoch as usize, reason });
    }
    let preds = infer(&out.model, test_scenes, stats, cfg.mode)?;
    evaluate(&preds, test_scenes, ontology, &DEFAULT_KS)
}

fn flag(v: bool) -> u8 {
    v as u8
}

fn pct(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| format!("{:.2}", 100.0 * v))
}

pub fn ablation_csv(rows: &[AblationRow]) -> String {
    let mut s = String::from("no,A_pair_selection,B_typed_inter,C_dual_intra,R@50,R@100,mR@50,mR@100,pR@50\n");
    for r in rows {
        let (a, b, c) = r.toggles;
        let rep = &r.report;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.no,
            flag(a),
            flag(b),
            flag(c),
            pct(rep.r_at.get(&50).copied()),
            pct(rep.r_at.get(&100).copied()),
            pct(rep.mr_at.get(&50).map(|m| m.mean)),
            pct(rep.mr_at.get(&100).map(|m| m.mean)),
            pct(rep.pr_at.get(&50).copied()),
        );
    }
    s
}

const ABLATION_LEGEND: &str = "# A: 1 = distance/confidence/existence pair filter, 0 = confidence top-K only\n\
# B: 1 = per-type inter-type weights, 0 = one shared weight set\n\
# C: 1 = intra-type passing on the dual graph, 0 = intra stage skipped\n";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairselRow {
    pub strategy: Strategy,
    pub pr50: f64,
    pub pr100: f64,
    pub mean_edges: f64,
}

/// Pair recall of the frequency prior restricted to each strategy's pairs.
pub fn pairsel_bench(
    scenes: &[Scene],
    stats: &CooccurrenceStats,
    ontology: &Ontology,
    base: &PairSelectionConfig,
    embeddings: &[Vec<f64>],
    mode: Mode,
) -> Result<Vec<PairselRow>> {
    let prior = FrequencyBaseline::fit(scenes, ontology);
    Strategy::ALL
        .iter()
        .map(|&strategy| {
            let cfg = PairSelectionConfig { strategy, ..*base };
            let mut preds = Vec::with_capacity(scenes.len());
            let mut edges = 0usize;
            for s in scenes {
                let prepared = crate::inference::prepare_scene(s, mode)?;
                edges += select_pairs_variant(&cfg, &prepared.scene, stats, Some(embeddings))?.len();
                preds.push(prior.predict_with(s, stats, &cfg, Some(embeddings), mode, 100)?);
            }
            let matches = match_corpus(&preds, scenes)?;
            Ok(PairselRow {
                strategy,
                pr50: pair_recall_at_k(&matches, 50),
                pr100: pair_recall_at_k(&matches, 100),
                mean_edges: if scenes.is_empty() { 0.0 } else { edges as f64 / scenes.len() as f64 },
            })
        })
        .collect()
}

pub fn pairsel_csv(rows: &[PairselRow]) -> String {
    let mut s = String::from("strategy,pR@50,pR@100,mean_edges\n");
    for r in rows {
        let _ = writeln!(s, "{},{:.2},{:.2},{:.2}", r.strategy, 100.0 * r.pr50, 100.0 * r.pr100, r.mean_edges);
    }
    s
}

/// Refuses to replace an existing output unless `force`.
fn guard(out: &OutArgs, name: &str) -> Result<PathBuf> {
    let path = out.out.join(name);
    if path.exists() && !out.force {
        return Err(Error::Usage(format!("{} exists; pass --force to overwrite", path.display())));
    }
    Ok(path)
}

fn create_dir(out: &OutArgs) -> Result<()> {
    std::fs::create_dir_all(&out.out).map_err(|e| Error::io(&out.out, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    write_atomic(path, text.as_bytes())
}

#[derive(Serialize)]
struct Snapshot<'a, T: Serialize> {
    version: &'static str,
    command: &'a Command,
    #[serde(flatten)]
    resolved: T,
}

fn snapshot<T: Serialize>(out: &OutArgs, command: &Command, resolved: T) -> Result<()> {
    let path = guard(out, "config.json")?;
    let snap = Snapshot { version: env!("CARGO_PKG_VERSION"), command, resolved };
    write_text(&path, &(serde_json::to_string_pretty(&snap)? + "\n"))
}

fn load_stats_or_build(path: Option<&PathBuf>, scenes: &[Scene], ontology: &Ontology) -> Result<CooccurrenceStats> {
    let stats = match path {
        Some(p) => CooccurrenceStats::load(p)?,
        None => build_cooccurrence_stats(scenes, ontology),
    };
    stats.check_dims(ontology)?;
    Ok(stats)
}

/// Runs one parsed command line.
pub fn run(cli: &Cli) -> Result<()> {
    let cmd = &cli.command;
    match cmd {
        Command::Generate(a) => {
            let (ontology, write_ontology) = match &a.ontology {
                Some(p) => (Ontology::load(p)?, false),
                None => (synthetic_ontology(a.object_classes, a.relations, a.exponent), true),
            };
            let cfg = SyntheticConfig {
                n_scenes: a.n_scenes,
                min_objects: a.min_objects,
                max_objects: a.max_objects,
                longtail_exponent: a.exponent,
                feature_dim: a.feature_dim,
                seed: a.seed,
                ..Default::default()
            };
            let scenes = generate_synthetic_dataset(&cfg, &ontology)?;
            create_dir(&a.out)?;
            let scenes_path = guard(&a.out, "scenes.jsonl")?;
            if write_ontology {
                ontology.save(guard(&a.out, "ontology.json")?)?;
            }
            save_scenes(&scenes_path, &scenes)?;
            snapshot(&a.out, cmd, serde_json::json!({ "synthetic": cfg }))?;
            log::info!("wrote {} scenes to {}", scenes.len(), scenes_path.display());
        }
        Command::PrepareStats(a) => {
            let ontology = Ontology::load(&a.ontology)?;
            let scenes = load_scenes(&a.scenes, &ontology)?;
            create_dir(&a.out)?;
            let path = guard(&a.out, "stats.json")?;
            let stats = build_cooccurrence_stats(&scenes, &ontology);
            for (s, row) in stats.counts.iter().enumerate() {
                log::info!("{}: {} triplets as subject", ontology.object_classes()[s], row.iter().sum::<u64>());
            }
            stats.save(&path)?;
            snapshot(&a.out, cmd, serde_json::json!({}))?;
        }
        Command::Train(a) => {
            let ontology = Ontology::load(&a.ontology)?;
            let scenes = load_scenes(&a.scenes, &ontology)?;
            let val = match &a.val_scenes {
                Some(p) => load_scenes(p, &ontology)?,
                None => Vec::new(),
            };
            let stats = load_stats_or_build(a.stats.as_ref(), &scenes, &ontology)?;
            let model_cfg = a.train.model_config(a.pairs.config(), &scenes)?;
            let train_cfg = a.train.train_config();
            create_dir(&a.out)?;
            let ckpt_path = guard(&a.out, "model.ckpt")?;
            let log_path = guard(&a.out, "epochs.jsonl")?;
            let stats_path = a.stats.is_none().then(|| guard(&a.out, "stats.json")).transpose()?;
            let model = Model::new(model_cfg, &ontology, train_cfg.seed)?;
            let out = train(&model, &scenes, &val, &stats, &train_cfg, |r| {
                log::info!("epoch {} train_loss {:.6} val R@50 {}", r.epoch, r.train_loss, pct(r.r50));
            })?;
            let ckpt = out.model.to_checkpoint(out.optimizer, &serde_json::json!({ "train": train_cfg }))?;
            save_checkpoint(&ckpt, &ckpt_path)?;
            write_jsonl(&log_path, &out.log)?;
            if let Some(p) = stats_path {
                stats.save(p)?;
            }
            snapshot(&a.out, cmd, serde_json::json!({ "model": model_cfg, "train": train_cfg }))?;
            if let Some(reason) = out.aborted {
                return Err(Error::Diverged { epoch: out.optimizer.epoch as usize, reason });
            }
        }
        Command::Infer(a) => {
            let ontology = Ontology::load(&a.ontology)?;
            let scenes = load_scenes(&a.scenes, &ontology)?;
            let stats = load_stats_or_build(Some(&a.stats), &scenes, &ontology)?;
            let model = Model::from_checkpoint(&load_checkpoint(&a.checkpoint, &ontology)?, &ontology)?;
            let preds = infer(&model, &scenes, &stats, a.mode)?;
            create_dir(&a.out)?;
            save_predictions(guard(&a.out, "predictions.jsonl")?, &preds)?;
            snapshot(&a.out, cmd, serde_json::json!({ "model": model.config }))?;
        }
        Command::Eval(a) => {
            let ontology = Ontology::load(&a.ontology)?;
            let scenes = load_scenes(&a.scenes, &ontology)?;
            let preds: Vec<ScenePrediction> = load_predictions(&a.predictions)?;
            let report = evaluate(&preds, &scenes, &ontology, &a.ks)?;
            create_dir(&a.out)?;
            let paths = [guard(&a.out, "report.json")?, guard(&a.out, "report.csv")?, guard(&a.out, "report.txt")?];
            write_text(&paths[0], &(report.to_json() + "\n"))?;
            write_text(&paths[1], &report.to_csv())?;
            write_text(&paths[2], &report.to_text())?;
            snapshot(&a.out, cmd, serde_json::json!({}))?;
            print!("{}", report.to_text());
        }
        Command::Ablate(a) => {
            let ontology = Ontology::load(&a.ontology)?;
            let scenes = load_scenes(&a.scenes, &ontology)?;
            let test = load_scenes(&a.test_scenes, &ontology)?;
            let stats = load_stats_or_build(a.stats.as_ref(), &scenes, &ontology)?;
            let model_cfg = a.train.model_config(a.pairs.config(), &scenes)?;
            let train_cfg = a.train.train_config();
            create_dir(&a.out)?;
            let csv_path = guard(&a.out, "ablation.csv")?;
            let txt_path = guard(&a.out, "ablation.txt")?;
            let rows = run_ablation(&model_cfg, &ontology, &scenes, &test, &stats, &train_cfg)?;
            let csv = ablation_csv(&rows);
            write_text(&csv_path, &csv)?;
            write_text(&txt_path, &format!("{ABLATION_LEGEND}{}", align_csv(&csv)))?;
            snapshot(&a.out, cmd, serde_json::json!({ "model": model_cfg, "train": train_cfg }))?;
            print!("{ABLATION_LEGEND}{}", align_csv(&csv));
        }
        Command::PairselBench(a) => {
            let ontology = Ontology::load(&a.ontology)?;
            let scenes = load_scenes(&a.scenes, &ontology)?;
            let stats = load_stats_or_build(a.stats.as_ref(), &scenes, &ontology)?;
            let model = match &a.checkpoint {
                Some(p) => Model::from_checkpoint(&load_checkpoint(p, &ontology)?, &ontology)?,
                None => Model::new(ModelConfig::default(), &ontology, a.seed)?,
            };
            let embeddings = label_embeddings(&model.params, &model.encoder);
            let base = PairSelectionConfig { iou_min: a.iou_min, sim_min: a.sim_min, ..a.pairs.config() };
            create_dir(&a.out)?;
            let csv_path = guard(&a.out, "pairsel.csv")?;
            let txt_path = guard(&a.out, "pairsel.txt")?;
            let rows = pairsel_bench(&scenes, &stats, &ontology, &base, &embeddings, a.mode)?;
            let csv = pairsel_csv(&rows);
            write_text(&csv_path, &csv)?;
            write_text(&txt_path, &align_csv(&csv))?;
            snapshot(&a.out, cmd, serde_json::json!({ "pair_selection": base }))?;
            print!("{}", align_csv(&csv));
        }
        Command::DistribReport(a) => {
            let ontology = Ontology::load(&a.ontology)?;
            let scenes = load_scenes(&a.scenes, &ontology)?;
            let rows = distribution_ratio_report(&scenes, &ontology)?;
            create_dir(&a.out)?;
            let csv = ratio_rows_csv(&rows);
            write_text(&guard(&a.out, "distribution.csv")?, &csv)?;
            write_text(&guard(&a.out, "distribution.txt")?, &align_csv(&csv))?;
            snapshot(&a.out, cmd, serde_json::json!({}))?;
            print!("{}", align_csv(&csv));
        }
    }
    Ok(())
}

/// Process exit code for a command result: 0 ok, 2 usage error, 1 otherwise.
pub fn exit_code(result: &Result<()>) -> i32 {
    match result {
        Ok(()) => 0,
        Err(e) if e.is_usage() => 2,
        Err(_) => 1,
    }
}
