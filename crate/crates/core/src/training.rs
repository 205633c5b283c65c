//! Losses and the mini-batch SGD loop.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Tape, Var};
use crate::data::{CooccurrenceStats, OptimizerState};
use crate::error::{Error, Result};
use crate::eval::{evaluate, MetricReport};
use crate::inference::{edge_targets, infer, prepare_scene, Mode, PreparedScene};
use crate::message_passing::Trace;
use crate::model::{Forward, Model, Prediction};
use crate::params::ParamGrads;
use crate::scene::Scene;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossMode {
    /// Per-class binary cross entropy on softmax outputs, averaged over classes.
    BceOnSoftmax,
    CrossEntropy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Scenes per SGD step.
    pub batch_size: usize,
    pub weight_decay: f64,
    pub epochs: usize,
    pub seed: u64,
    pub loss_mode: LossMode,
    pub mode: Mode,
    /// Weight of the pre-classifier loss against the same relation targets.
    pub pre_loss_weight: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.008,
            batch_size: 5,
            weight_decay: 1e-5,
            epochs: 30,
            seed: 0,
            loss_mode: LossMode::BceOnSoftmax,
            mode: Mode::PredCls,
            pre_loss_weight: 1.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning rate must be non-negative, got {}", self.learning_rate)));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::Config(format!("weight decay must be non-negative, got {}", self.weight_decay)));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be positive".into()));
        }
        Ok(())
    }
}

/// Class targets for every object and every selected edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Targets {
    pub objects: Vec<usize>,
    pub relations: Vec<usize>,
}

fn bce_plain(p: &[f64], target: usize) -> f64 {
    const FLOOR: f64 = 1e-12;
    p.iter()
        .enumerate()
        .map(|(c, &pc)| {
            let pc = pc.clamp(FLOOR, 1.0 - FLOOR);
            if c == target {
                -pc.ln()
            } else {
                -(1.0 - pc).ln()
            }
        })
        .sum::<f64>()
        / p.len() as f64
}

fn term_plain(p: &[f64], target: usize, mode: LossMode) -> f64 {
    match mode {
        LossMode::BceOnSoftmax => bce_plain(p, target),
        LossMode::CrossEntropy => -p[target].max(f64::MIN_POSITIVE).ln(),
    }
}

fn mean_or_zero(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// `L_obj + L_rel`: per-node and per-edge losses, each averaged over its set.
pub fn total_loss(pred: &Prediction, targets: &Targets, mode: LossMode) -> f64 {
    let l_obj = mean_or_zero(pred.object_probs.iter().zip(&targets.objects).map(|(p, &t)| term_plain(p, t, mode)));
    let l_rel = mean_or_zero(pred.relation_probs.iter().zip(&targets.relations).map(|(p, &t)| term_plain(p, t, mode)));
    l_obj + l_rel
}

fn mean_terms(tape: &mut Tape, probs: &[Var], logits: &[Var], targets: &[usize], mode: LossMode) -> Option<Var> {
    if targets.is_empty() {
        return None;
    }
    let terms: Vec<Var> = targets
        .iter()
        .enumerate()
        .map(|(k, &t)| match mode {
            LossMode::BceOnSoftmax => tape.bce(probs[k], t),
            LossMode::CrossEntropy => tape.cross_entropy(logits[k], t),
        })
        .collect();
    let s = tape.sum(&terms);
    Some(tape.scale_const(s, 1.0 / targets.len() as f64))
}

/// Training objective on the tape: `L_obj + L_rel + w * L_pre`.
pub fn scene_loss(tape: &mut Tape, f: &Forward, targets: &Targets, cfg: &TrainConfig) -> Option<Var> {
    let mut parts = Vec::new();
    parts.extend(mean_terms(tape, &f.object_probs, &f.object_logits, &targets.objects, cfg.loss_mode));
    parts.extend(mean_terms(tape, &f.relation_probs, &f.relation_logits, &targets.relations, cfg.loss_mode));
    if cfg.pre_loss_weight != 0.0 {
        if let Some(l) = mean_terms(tape, &f.pre_probs, &f.pre_logits, &targets.relations, cfg.loss_mode) {
            parts.push(tape.scale_const(l, cfg.pre_loss_weight));
        }
    }
    if parts.is_empty() {
        None
    } else {
        Some(tape.sum(&parts))
    }
}

/// Forward pass plus targets for a prepared scene.
fn forward_with_targets(
    model: &Model,
    tape: &mut Tape,
    prepared: &PreparedScene,
    stats: &CooccurrenceStats,
) -> Result<(Forward, Targets)> {
    let f = model.forward(tape, &prepared.scene, stats, &mut Trace::disabled())?;
    let targets = Targets { objects: prepared.object_targets.clone(), relations: edge_targets(prepared, &f.edges) };
    Ok((f, targets))
}

/// Loss of one scene and, if `grads` is given, its gradient.
pub fn scene_objective(
    model: &Model,
    prepared: &PreparedScene,
    stats: &CooccurrenceStats,
    cfg: &TrainConfig,
    grads: Option<&mut ParamGrads>,
) -> Result<Option<f64>> {
    let mut tape = Tape::new();
    let (f, targets) = forward_with_targets(model, &mut tape, prepared, stats)?;
    let Some(loss) = scene_loss(&mut tape, &f, &targets, cfg) else { return Ok(None) };
    if let Some(g) = grads {
        tape.backward(loss, g);
    }
    Ok(Some(tape.scalar(loss)))
}

/// Mean objective over scenes that have at least one object.
pub fn dataset_loss(model: &Model, scenes: &[PreparedScene], stats: &CooccurrenceStats, cfg: &TrainConfig) -> Result<f64> {
    let losses = scenes
        .par_iter()
        .map(|s| scene_objective(model, s, stats, cfg, None))
        .collect::<Result<Vec<_>>>()?;
    Ok(mean_or_zero(losses.into_iter().flatten()))
}

/// One line of the metrics log. `train_loss` of epoch 0 is the initial model's
/// loss over the training set; later epochs report the mean loss of the
/// scenes seen during the epoch's steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: Option<f64>,
    pub r50: Option<f64>,
    pub r100: Option<f64>,
    pub mr50: Option<f64>,
    pub mr100: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    /// Parameters after the last completed step.
    pub model: Model,
    pub optimizer: OptimizerState,
    pub log: Vec<EpochRecord>,
    /// Set when training stopped on a non-finite loss or gradient.
    pub aborted: Option<String>,
}

pub fn prepare_all(scenes: &[Scene], mode: Mode) -> Result<Vec<PreparedScene>> {
    scenes
        .iter()
        .map(|s| {
            if !s.has_gt() {
                return Err(Error::Usage(format!("scene {}: training needs ground-truth triplets", s.scene_id)));
            }
            prepare_scene(s, mode)
        })
        .collect()
}

/// SGD step: `theta <- theta * (1 - lr * wd) - lr * g`.
pub fn sgd_step(model: &mut Model, grads: &ParamGrads, lr: f64, weight_decay: f64) {
    let shrink = 1.0 - lr * weight_decay;
    let ids: Vec<_> = model.params.iter().map(|(id, _)| id).collect();
    for id in ids {
        let g = grads.get(id);
        for (w, gi) in model.params.get_mut(id).data.iter_mut().zip(g) {
            *w = *w * shrink - lr * gi;
        }
    }
}

fn epoch_record(
    epoch: usize,
    model: &Model,
    train_loss: f64,
    val_raw: &[Scene],
    val: &[PreparedScene],
    stats: &CooccurrenceStats,
    cfg: &TrainConfig,
) -> Result<EpochRecord> {
    let mut rec = EpochRecord { epoch, train_loss, val_loss: None, r50: None, r100: None, mr50: None, mr100: None };
    if !val.is_empty() {
        rec.val_loss = Some(dataset_loss(model, val, stats, cfg)?);
        let preds = infer(model, val_raw, stats, cfg.mode)?;
        let report: MetricReport = evaluate(&preds, val_raw, model.ontology(), &[50, 100])?;
        rec.r50 = report.r_at.get(&50).copied();
        rec.r100 = report.r_at.get(&100).copied();
        rec.mr50 = report.mr_at.get(&50).map(|m| m.mean);
        rec.mr100 = report.mr_at.get(&100).map(|m| m.mean);
    }
    Ok(rec)
}

/// Trains `model` in place of a copy. Record 0 describes the initial model;
/// `on_epoch` sees every record as it is produced.
pub fn train(
    model: &Model,
    train_scenes: &[Scene],
    val_scenes: &[Scene],
    stats: &CooccurrenceStats,
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<TrainOutput> {
    cfg.validate()?;
    model.check_inputs(train_scenes, stats)?;
    model.check_inputs(val_scenes, stats)?;
    let train = prepare_all(train_scenes, cfg.mode)?;
    let val = prepare_all(val_scenes, cfg.mode)?;
    let mut model = model.clone();
    let mut optimizer = OptimizerState::default();
    let mut log = Vec::new();

    let initial_loss = dataset_loss(&model, &train, stats, cfg)?;
    let first = epoch_record(0, &model, initial_loss, val_scenes, &val, stats, cfg)?;
    on_epoch(&first);
    log.push(first);

    let mut order: Vec<usize> = (0..train.len()).collect();
    for epoch in 1..=cfg.epochs {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(epoch as u64));
        order.shuffle(&mut rng);
        let (mut epoch_loss, mut epoch_scenes) = (0.0, 0usize);
        for batch in order.chunks(cfg.batch_size) {
            let results = batch
                .par_iter()
                .map(|&s| {
                    let mut g = model.params.zero_grads();
                    scene_objective(&model, &train[s], stats, cfg, Some(&mut g)).map(|l| l.map(|l| (l, g)))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut total = model.params.zero_grads();
            let mut n = 0usize;
            let mut loss_sum = 0.0;
            for (l, g) in results.into_iter().flatten() {
                total.add_assign(&g);
                loss_sum += l;
                n += 1;
            }
            if n == 0 {
                continue;
            }
            if !loss_sum.is_finite() || !total.all_finite() {
                let reason = format!("non-finite loss or gradient at epoch {epoch}, step {}", optimizer.step);
                log::error!("{reason}; keeping the last good parameters");
                return Ok(TrainOutput { model, optimizer, log, aborted: Some(reason) });
            }
            epoch_loss += loss_sum;
            epoch_scenes += n;
            total.scale(1.0 / n as f64);
            sgd_step(&mut model, &total, cfg.learning_rate, cfg.weight_decay);
            optimizer.step += 1;
        }
        optimizer.epoch = epoch as u64;
        let train_loss = if epoch_scenes == 0 { 0.0 } else { epoch_loss / epoch_scenes as f64 };
        let rec = epoch_record(epoch, &model, train_loss, val_scenes, &val, stats, cfg)?;
        log::info!("epoch {epoch}: train loss {:.5}", rec.train_loss);
        on_epoch(&rec);
        log.push(rec);
    }
    Ok(TrainOutput { model, optimizer, log, aborted: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_two_class_bce_is_ln2() {
        let pred = Prediction {
            edges: vec![],
            edge_types: vec![],
            object_probs: vec![vec![0.5, 0.5]],
            relation_probs: vec![],
        };
        let t = Targets { objects: vec![1], relations: vec![] };
        assert!((total_loss(&pred, &t, LossMode::BceOnSoftmax) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn near_perfect_prediction_has_near_zero_loss() {
        let pred = Prediction {
            edges: vec![(0, 1)],
            edge_types: vec![],
            object_probs: vec![vec![1.0 - 1e-9, 1e-9]; 2],
            relation_probs: vec![vec![1e-9, 1.0 - 1e-9]],
        };
        let t = Targets { objects: vec![0, 0], relations: vec![1] };
        assert!(total_loss(&pred, &t, LossMode::BceOnSoftmax) < 1e-8);
    }
}
