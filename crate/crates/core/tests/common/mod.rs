//! Random instance generators and dense-loop reference implementations shared
//! by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sgg_core::geometry::BBox;
use sgg_core::graph::{HeterogeneousGraph, PairMatrix, PairScores};
use sgg_core::message_passing::{InterParams, IntraParams};
use sgg_core::ontology::RelationType;
use sgg_core::params::{ParamId, ParamStore};
use sgg_core::scene::{GtTriplet, Scene, ScenePrediction, Triplet};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Scores drawn from a coarse grid so ties are common.
pub fn random_pair_scores(rng: &mut impl Rng, n: usize) -> PairScores {
    let mut grid = |levels: u32, scale: f64| {
        let vals: Vec<f64> = (0..n * n).map(|_| rng.gen_range(0..levels) as f64 * scale).collect();
        PairMatrix::from_fn(n, |i, j| vals[i * n + j])
    };
    let distance = grid(8, 100.0);
    let confidence = grid(5, 0.25);
    let existence = grid(4, 0.1);
    PairScores { distance, confidence, existence }
}

/// Conjunction of the three predicates; a pair is in the top-k when fewer
/// than k pairs beat it (higher score, or equal score and smaller `(i, j)`).
pub fn brute_force_select(s: &PairScores, s_b: f64, s_l: f64, k: usize) -> Vec<(usize, usize)> {
    let n = s.size();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j).collect();
    let mut out = Vec::new();
    for &(i, j) in &pairs {
        let c = s.confidence.get(i, j);
        let better = pairs
            .iter()
            .filter(|&&(a, b)| {
                let d = s.confidence.get(a, b);
                d > c || (d == c && (a, b) < (i, j))
            })
            .count();
        if s.distance.get(i, j) < s_b && s.existence.get(i, j) > s_l && better < k {
            out.push((i, j));
        }
    }
    out
}

/// Random distinct ordered pairs over `n` objects with random types.
pub fn random_graph(rng: &mut impl Rng, n: usize) -> HeterogeneousGraph {
    let density: f64 = rng.gen_range(0.0..1.0);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.gen_bool(density) {
                edges.push((i, j));
            }
        }
    }
    // shuffle so edge order is unrelated to object order
    for k in (1..edges.len()).rev() {
        let m = rng.gen_range(0..=k);
        edges.swap(k, m);
    }
    let edge_types = edges
        .iter()
        .map(|_| if rng.gen_bool(0.5) { RelationType::Interactive } else { RelationType::NonInteractive })
        .collect();
    HeterogeneousGraph { num_objects: n, edges, edge_types, pre_distribution: Vec::new() }
}

/// Exhaustive line graph: `(a, b, smallest shared endpoint)` for a < b.
pub fn brute_force_dual(edges: &[(usize, usize)]) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for a in 0..edges.len() {
        for b in a + 1..edges.len() {
            let ea: BTreeSet<usize> = [edges[a].0, edges[a].1].into();
            let eb: BTreeSet<usize> = [edges[b].0, edges[b].1].into();
            if let Some(&shared) = ea.intersection(&eb).next() {
                out.push((a, b, shared));
            }
        }
    }
    out
}

pub fn gaussian_vec(rng: &mut impl Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Fills every parameter with uniform values in `[-scale, scale]`.
pub fn randomize(store: &mut ParamStore, rng: &mut impl Rng, scale: f64) {
    let ids: Vec<ParamId> = store.iter().map(|(id, _)| id).collect();
    for id in ids {
        for v in &mut store.get_mut(id).data {
            *v = rng.gen_range(-scale..scale);
        }
    }
}

pub fn mat(store: &ParamStore, id: ParamId) -> Vec<Vec<f64>> {
    let p = store.get(id);
    (0..p.rows).map(|r| p.row(r).to_vec()).collect()
}

pub fn matvec(m: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    m.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn relu(v: Vec<f64>) -> Vec<f64> {
    v.into_iter().map(|x| x.max(0.0)).collect()
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn softmax(x: &[f64]) -> Vec<f64> {
    let m = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = x.iter().map(|v| (v - m).exp()).collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|v| v / z).collect()
}

/// `sum_k alpha_k * messages_k` with `alpha = softmax(logits)`.
fn attend(logits: &[f64], messages: &[Vec<f64>]) -> Vec<f64> {
    let alpha = softmax(logits);
    let mut out = vec![0.0; messages[0].len()];
    for (a, m) in alpha.iter().zip(messages) {
        for (o, x) in out.iter_mut().zip(m) {
            *o += a * x;
        }
    }
    out
}

/// One pairwise-attention residual update with neighbors found by `adjacent`.
fn pairwise_reference(
    feats: &[Vec<f64>],
    w: &[Vec<f64>],
    att_c: &[f64],
    att_n: &[f64],
    adjacent: impl Fn(usize, usize) -> bool,
) -> Vec<Vec<f64>> {
    (0..feats.len())
        .map(|c| {
            let nb: Vec<usize> = (0..feats.len()).filter(|&k| k != c && adjacent(c, k)).collect();
            if nb.is_empty() {
                return feats[c].clone();
            }
            let logits: Vec<f64> = nb.iter().map(|&k| dot(att_c, &feats[c]) + dot(att_n, &feats[k])).collect();
            let msgs: Vec<Vec<f64>> = nb.iter().map(|&k| matvec(w, &feats[k])).collect();
            add(&feats[c], &relu(attend(&logits, &msgs)))
        })
        .collect()
}

pub fn intra_relation_reference(
    store: &ParamStore,
    p: &IntraParams,
    edges: &[(usize, usize)],
    rels: &[Vec<f64>],
) -> Vec<Vec<f64>> {
    let shares = |a: usize, b: usize| {
        let (x, y) = (edges[a], edges[b]);
        x.0 == y.0 || x.0 == y.1 || x.1 == y.0 || x.1 == y.1
    };
    pairwise_reference(rels, &mat(store, p.w_rel), &mat(store, p.att_rel.0)[0], &mat(store, p.att_rel.1)[0], shares)
}

pub fn intra_object_reference(
    store: &ParamStore,
    p: &IntraParams,
    edges: &[(usize, usize)],
    objs: &[Vec<f64>],
) -> Vec<Vec<f64>> {
    let linked = |a: usize, b: usize| edges.iter().any(|&(s, o)| (s, o) == (a, b) || (s, o) == (b, a));
    pairwise_reference(objs, &mat(store, p.w_obj), &mat(store, p.att_obj.0)[0], &mat(store, p.att_obj.1)[0], linked)
}

pub fn inter_relation_reference(
    store: &ParamStore,
    p: &InterParams,
    edges: &[(usize, usize)],
    slots: &[usize],
    objs: &[Vec<f64>],
    rels: &[Vec<f64>],
) -> Vec<Vec<f64>> {
    let att = &mat(store, p.att_rel)[0];
    (0..rels.len())
        .map(|e| {
            let (i, j) = edges[e];
            let t = &p.types[slots[e]];
            let ms = matvec(&mat(store, t.subj_to_rel), &objs[i]);
            let mo = matvec(&mat(store, t.obj_to_rel), &objs[j]);
            let agg = attend(&[dot(att, &objs[i]), dot(att, &objs[j])], &[ms, mo]);
            add(&rels[e], &relu(agg))
        })
        .collect()
}

pub fn inter_object_reference(
    store: &ParamStore,
    p: &InterParams,
    edges: &[(usize, usize)],
    slots: &[usize],
    objs: &[Vec<f64>],
    rels: &[Vec<f64>],
) -> Vec<Vec<f64>> {
    let n_types = p.types.len();
    (0..objs.len())
        .map(|o| {
            let mut total = vec![0.0; objs[o].len()];
            let mut any = false;
            for (slot, t) in p.types.iter().enumerate() {
                let inc: Vec<usize> =
                    (0..edges.len()).filter(|&e| slots[e] == slot && (edges[e].0 == o || edges[e].1 == o)).collect();
                if inc.is_empty() {
                    continue;
                }
                any = true;
                let att = &mat(store, t.att)[0];
                let logits: Vec<f64> = inc.iter().map(|&e| dot(att, &rels[e])).collect();
                let msgs: Vec<Vec<f64>> = inc
                    .iter()
                    .map(|&e| {
                        let w = if edges[e].0 == o { t.out_to_obj } else { t.in_to_obj };
                        matvec(&mat(store, w), &rels[e])
                    })
                    .collect();
                total = add(&total, &relu(attend(&logits, &msgs)));
            }
            if !any {
                return objs[o].clone();
            }
            let mean: Vec<f64> = total.iter().map(|x| x / n_types as f64).collect();
            add(&objs[o], &mean)
        })
        .collect()
}

pub fn max_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| {
            assert_eq!(x.len(), y.len());
            x.iter().zip(y).map(|(p, q)| (p - q).abs())
        })
        .fold(0.0, f64::max)
}

pub fn random_box(rng: &mut impl Rng, size: f64) -> BBox {
    let x = rng.gen_range(0.0..size * 0.8);
    let y = rng.gen_range(0.0..size * 0.8);
    let w = rng.gen_range(5.0..size * 0.2);
    let h = rng.gen_range(5.0..size * 0.2);
    BBox::new(x, y, x + w, y + h)
}

/// A scene with only GT (no detections), `n_objects` objects and random triplets.
pub fn random_gt_scene(rng: &mut impl Rng, id: usize, n_classes: usize, n_rel: usize) -> Scene {
    let n_objects = rng.gen_range(2..6);
    let objs: Vec<(BBox, usize)> = (0..n_objects).map(|_| (random_box(rng, 100.0), rng.gen_range(0..n_classes))).collect();
    let n_gt = rng.gen_range(0..6);
    let gt = (0..n_gt)
        .map(|_| {
            let s = rng.gen_range(0..n_objects);
            let o = (s + rng.gen_range(1..n_objects)) % n_objects;
            GtTriplet { s_box: objs[s].0, s_label: objs[s].1, rel: rng.gen_range(1..n_rel), o_box: objs[o].0, o_label: objs[o].1 }
        })
        .collect();
    Scene { scene_id: format!("r{id}"), width: 100.0, height: 100.0, objects: Vec::new(), gt_triplets: Some(gt) }
}

/// Predictions that mix exact GT copies, relabeled copies, and unrelated pairs.
pub fn random_predictions(rng: &mut impl Rng, scene: &Scene, n_classes: usize, n_rel: usize) -> ScenePrediction {
    let n = rng.gen_range(0..12);
    let gt = scene.gt();
    let triplets = (0..n)
        .map(|_| {
            let score = rng.gen_range(0..5) as f64 / 4.0;
            if !gt.is_empty() && rng.gen_bool(0.7) {
                let t = &gt[rng.gen_range(0..gt.len())];
                let relation = if rng.gen_bool(0.5) { t.rel } else { rng.gen_range(1..n_rel) };
                Triplet {
                    subject_idx: 0,
                    object_idx: 1,
                    relation,
                    score,
                    s_box: t.s_box,
                    o_box: t.o_box,
                    s_label: t.s_label,
                    o_label: t.o_label,
                }
            } else {
                Triplet {
                    subject_idx: 0,
                    object_idx: 1,
                    relation: rng.gen_range(1..n_rel),
                    score,
                    s_box: random_box(rng, 100.0),
                    o_box: random_box(rng, 100.0),
                    s_label: rng.gen_range(0..n_classes),
                    o_label: rng.gen_range(0..n_classes),
                }
            }
        })
        .collect();
    ScenePrediction { scene_id: scene.scene_id.clone(), triplets }
}
