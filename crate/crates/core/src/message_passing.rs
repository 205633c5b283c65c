//! Attention-weighted message passing over the dual graph (intra stage) and
//! the typed heterogeneous graph (inter stage).
//!
//! Every update is residual: `f <- f + ReLU(aggregate)`. Neighborhoods are
//! summed in ascending index order and an empty neighborhood aggregates to
//! zero, so isolated nodes keep their features.

use serde::{Deserialize, Serialize};

use crate::autodiff::{Tape, Var};
use crate::error::{Error, Result};
use crate::graph::{build_dual_graph, object_neighbors, DualGraph, HeterogeneousGraph};
use crate::ontology::RelationType;
use crate::params::{ParamId, ParamStore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessagePassingConfig {
    pub layers_intra: usize,
    pub layers_inter: usize,
    /// Separate weights per relation type; when false every edge uses one shared set.
    pub typed: bool,
}

impl Default for MessagePassingConfig {
    fn default() -> Self {
        MessagePassingConfig { layers_intra: 2, layers_inter: 2, typed: true }
    }
}

/// One intra-stage layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntraParams {
    /// `W_r^d`, relation message transform.
    pub w_rel: ParamId,
    /// `W_o^d`, object message transform.
    pub w_obj: ParamId,
    /// Attention over `[f_center ; f_neighbor]` for relations, stored as its
    /// center half and neighbor half (`1 x D` each).
    pub att_rel: (ParamId, ParamId),
    pub att_obj: (ParamId, ParamId),
}

/// Inter-stage weights of one relation type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TypeWeights {
    /// Subject to relation transform.
    pub subj_to_rel: ParamId,
    /// Object to relation transform.
    pub obj_to_rel: ParamId,
    /// Outgoing relation to its subject.
    pub out_to_obj: ParamId,
    /// Incoming relation to its object.
    pub in_to_obj: ParamId,
    /// `1 x D` attention over incident relations of this type.
    pub att: ParamId,
}

/// One inter-stage layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterParams {
    /// Indexed by [`RelationType::index`], or a single entry when untyped.
    pub types: Vec<TypeWeights>,
    /// `1 x D` attention between subject and object of a relation.
    pub att_rel: ParamId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessagePassingParams {
    pub config: MessagePassingConfig,
    pub intra: Vec<IntraParams>,
    pub inter: Vec<InterParams>,
}

impl MessagePassingParams {
    pub fn register(store: &mut ParamStore, hidden: usize, config: MessagePassingConfig) -> Self {
        let intra = (0..config.layers_intra)
            .map(|l| IntraParams {
                w_rel: store.add(format!("intra{l}.w_rel"), hidden, hidden),
                w_obj: store.add(format!("intra{l}.w_obj"), hidden, hidden),
                att_rel: (
                    store.add(format!("intra{l}.att_rel.center"), 1, hidden),
                    store.add(format!("intra{l}.att_rel.neighbor"), 1, hidden),
                ),
                att_obj: (
                    store.add(format!("intra{l}.att_obj.center"), 1, hidden),
                    store.add(format!("intra{l}.att_obj.neighbor"), 1, hidden),
                ),
            })
            .collect();
        let n_types = if config.typed { RelationType::ALL.len() } else { 1 };
        let inter = (0..config.layers_inter)
            .map(|l| InterParams {
                types: (0..n_types)
                    .map(|t| TypeWeights {
                        subj_to_rel: store.add(format!("inter{l}.t{t}.subj_to_rel"), hidden, hidden),
                        obj_to_rel: store.add(format!("inter{l}.t{t}.obj_to_rel"), hidden, hidden),
                        out_to_obj: store.add(format!("inter{l}.t{t}.out_to_obj"), hidden, hidden),
                        in_to_obj: store.add(format!("inter{l}.t{t}.in_to_obj"), hidden, hidden),
                        att: store.add(format!("inter{l}.t{t}.att"), 1, hidden),
                    })
                    .collect(),
                att_rel: store.add(format!("inter{l}.att_rel"), 1, hidden),
            })
            .collect();
        MessagePassingParams { config, intra, inter }
    }

    /// Number of relation types seen by the inter stage.
    pub fn num_types(&self) -> usize {
        if self.config.typed {
            RelationType::ALL.len()
        } else {
            1
        }
    }

    pub fn attention_ids(&self) -> Vec<ParamId> {
        let mut ids = Vec::new();
        for p in &self.intra {
            ids.extend([p.att_rel.0, p.att_rel.1, p.att_obj.0, p.att_obj.1]);
        }
        for p in &self.inter {
            ids.push(p.att_rel);
            ids.extend(p.types.iter().map(|t| t.att));
        }
        ids
    }

    pub fn transform_ids(&self) -> Vec<ParamId> {
        let mut ids = Vec::new();
        for p in &self.intra {
            ids.extend([p.w_rel, p.w_obj]);
        }
        for p in &self.inter {
            for t in &p.types {
                ids.extend([t.subj_to_rel, t.obj_to_rel, t.out_to_obj, t.in_to_obj]);
            }
        }
        ids
    }
}

/// Graph structure consumed by message passing.
#[derive(Debug, Clone)]
pub struct PropagationGraph {
    pub num_objects: usize,
    pub edges: Vec<(usize, usize)>,
    /// Weight-set slot of each edge.
    pub slots: Vec<usize>,
    pub dual: DualGraph,
    pub object_adjacency: Vec<Vec<usize>>,
    pub num_types: usize,
}

impl PropagationGraph {
    pub fn new(het: &HeterogeneousGraph, typed: bool) -> Self {
        let slots = if typed { het.edge_types.iter().map(|t| t.index()).collect() } else { vec![0; het.edges.len()] };
        PropagationGraph {
            num_objects: het.num_objects,
            edges: het.edges.clone(),
            slots,
            dual: build_dual_graph(het),
            object_adjacency: object_neighbors(het.num_objects, &het.edges),
            num_types: if typed { RelationType::ALL.len() } else { 1 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    IntraRelation,
    IntraObject,
    InterRelation,
    InterObject,
}

/// Attention weights of one node at one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionRecord {
    pub stage: Stage,
    pub layer: usize,
    pub node: usize,
    /// Relation type slot for inter-stage records, 0 otherwise.
    pub slot: usize,
    /// Neighbor indices the weights refer to (objects for inter-relation records).
    pub neighbors: Vec<usize>,
    pub weights: Vec<f64>,
}

/// Optional collector of attention weights.
#[derive(Debug, Default)]
pub struct Trace {
    enabled: bool,
    pub records: Vec<AttentionRecord>,
}

impl Trace {
    pub fn disabled() -> Self {
        Trace::default()
    }

    pub fn enabled() -> Self {
        Trace { enabled: true, records: Vec::new() }
    }

    #[allow(clippy::too_many_arguments)]
    fn record(&mut self, tape: &Tape, stage: Stage, layer: usize, node: usize, slot: usize, neighbors: &[usize], alpha: Var) {
        if self.enabled {
            self.records.push(AttentionRecord {
                stage,
                layer,
                node,
                slot,
                neighbors: neighbors.to_vec(),
                weights: tape.value(alpha).to_vec(),
            });
        }
    }
}

/// Softmax-weighted sum of `messages` under `logits`; returns `(aggregate, weights)`.
fn attend(tape: &mut Tape, logits: &[Var], messages: &[Var]) -> (Var, Var) {
    let stacked = tape.stack(logits);
    let alpha = tape.softmax(stacked);
    let weighted: Vec<Var> = messages
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            let a = tape.pick(alpha, k);
            tape.scale(m, a)
        })
        .collect();
    (tape.sum(&weighted), alpha)
}

fn residual(tape: &mut Tape, f: Var, aggregate: Var) -> Var {
    let r = tape.relu(aggregate);
    tape.add(f, r)
}

/// Pairwise attention over `[center ; neighbor]` followed by a residual update.
#[allow(clippy::too_many_arguments)]
fn pairwise_update(
    tape: &mut Tape,
    store: &ParamStore,
    transform: ParamId,
    attention: (ParamId, ParamId),
    features: &[Var],
    neighbors: &[Vec<usize>],
    stage: Stage,
    layer: usize,
    trace: &mut Trace,
) -> Vec<Var> {
    let w = tape.param(store, transform);
    let att_c = tape.param(store, attention.0);
    let att_n = tape.param(store, attention.1);
    let messages: Vec<Var> = features.iter().map(|&f| tape.matvec(w, f)).collect();
    // att . [f_c ; f_n] = att_c . f_c + att_n . f_n
    let as_center: Vec<Var> = features.iter().map(|&f| tape.matvec(att_c, f)).collect();
    let as_neighbor: Vec<Var> = features.iter().map(|&f| tape.matvec(att_n, f)).collect();
    features
        .iter()
        .enumerate()
        .map(|(node, &f)| {
            let nb = &neighbors[node];
            if nb.is_empty() {
                return f;
            }
            let logits: Vec<Var> = nb.iter().map(|&k| tape.add(as_center[node], as_neighbor[k])).collect();
            let msgs: Vec<Var> = nb.iter().map(|&k| messages[k]).collect();
            let (agg, alpha) = attend(tape, &logits, &msgs);
            trace.record(tape, stage, layer, node, 0, nb, alpha);
            residual(tape, f, agg)
        })
        .collect()
}

/// Relation features updated from their dual-graph neighbors.
pub fn intra_relation_update(
    tape: &mut Tape,
    store: &ParamStore,
    p: &IntraParams,
    relations: &[Var],
    dual: &DualGraph,
    layer: usize,
    trace: &mut Trace,
) -> Vec<Var> {
    pairwise_update(tape, store, p.w_rel, p.att_rel, relations, &dual.neighbors, Stage::IntraRelation, layer, trace)
}

/// Object features updated from objects they share a relation with.
pub fn intra_object_update(
    tape: &mut Tape,
    store: &ParamStore,
    p: &IntraParams,
    objects: &[Var],
    adjacency: &[Vec<usize>],
    layer: usize,
    trace: &mut Trace,
) -> Vec<Var> {
    pairwise_update(tape, store, p.w_obj, p.att_obj, objects, adjacency, Stage::IntraObject, layer, trace)
}

/// Each relation mixes messages from its subject and object, weighted by a two-way softmax.
pub fn inter_relation_update(
    tape: &mut Tape,
    store: &ParamStore,
    p: &InterParams,
    objects: &[Var],
    relations: &[Var],
    graph: &PropagationGraph,
    layer: usize,
    trace: &mut Trace,
) -> Vec<Var> {
    let att = tape.param(store, p.att_rel);
    let scores: Vec<Var> = objects.iter().map(|&f| tape.matvec(att, f)).collect();
    // messages depend only on (object, type), so each is computed once
    let mut as_subject: Vec<Vec<Option<Var>>> = vec![vec![None; p.types.len()]; objects.len()];
    let mut as_object = as_subject.clone();
    relations
        .iter()
        .enumerate()
        .map(|(e, &f)| {
            let (i, j) = graph.edges[e];
            let slot = graph.slots[e];
            let tw = &p.types[slot];
            let ms = *as_subject[i][slot].get_or_insert_with(|| {
                let w = tape.param(store, tw.subj_to_rel);
                tape.matvec(w, objects[i])
            });
            let mo = *as_object[j][slot].get_or_insert_with(|| {
                let w = tape.param(store, tw.obj_to_rel);
                tape.matvec(w, objects[j])
            });
            let (agg, alpha) = attend(tape, &[scores[i], scores[j]], &[ms, mo]);
            trace.record(tape, Stage::InterRelation, layer, e, graph.slots[e], &[i, j], alpha);
            residual(tape, f, agg)
        })
        .collect()
}

/// Each object attends, per relation type, over its incident relations and
/// averages the rectified per-type aggregates over all types.
pub fn inter_object_update(
    tape: &mut Tape,
    store: &ParamStore,
    p: &InterParams,
    objects: &[Var],
    relations: &[Var],
    graph: &PropagationGraph,
    layer: usize,
    trace: &mut Trace,
) -> Vec<Var> {
    let n_types = graph.num_types;
    // incident[obj][slot] = edges in ascending order
    let mut incident = vec![vec![Vec::new(); n_types]; objects.len()];
    for (e, &(i, j)) in graph.edges.iter().enumerate() {
        incident[i][graph.slots[e]].push(e);
        incident[j][graph.slots[e]].push(e);
    }
    let inv_types = 1.0 / n_types as f64;
    objects
        .iter()
        .enumerate()
        .map(|(obj, &f)| {
            let mut parts = Vec::new();
            for slot in 0..n_types {
                let edges = &incident[obj][slot];
                if edges.is_empty() {
                    continue;
                }
                let tw = &p.types[slot];
                let att = tape.param(store, tw.att);
                let w_out = tape.param(store, tw.out_to_obj);
                let w_in = tape.param(store, tw.in_to_obj);
                let logits: Vec<Var> = edges.iter().map(|&e| tape.matvec(att, relations[e])).collect();
                let msgs: Vec<Var> = edges
                    .iter()
                    .map(|&e| {
                        let w = if graph.edges[e].0 == obj { w_out } else { w_in };
                        tape.matvec(w, relations[e])
                    })
                    .collect();
                let (agg, alpha) = attend(tape, &logits, &msgs);
                trace.record(tape, Stage::InterObject, layer, obj, slot, edges, alpha);
                parts.push(tape.relu(agg));
            }
            if parts.is_empty() {
                return f;
            }
            let total = tape.sum(&parts);
            let mean = tape.scale_const(total, inv_types);
            tape.add(f, mean)
        })
        .collect()
}

/// Features of every object and relation on a tape.
#[derive(Debug, Clone)]
pub struct TapeState {
    pub objects: Vec<Var>,
    pub relations: Vec<Var>,
}

/// All intra layers, then all inter layers.
pub fn propagate(
    tape: &mut Tape,
    store: &ParamStore,
    params: &MessagePassingParams,
    graph: &PropagationGraph,
    state: TapeState,
    trace: &mut Trace,
) -> TapeState {
    let TapeState { mut objects, mut relations } = state;
    for (l, p) in params.intra.iter().enumerate() {
        let new_rel = intra_relation_update(tape, store, p, &relations, &graph.dual, l, trace);
        let new_obj = intra_object_update(tape, store, p, &objects, &graph.object_adjacency, l, trace);
        relations = new_rel;
        objects = new_obj;
    }
    for (l, p) in params.inter.iter().enumerate() {
        relations = inter_relation_update(tape, store, p, &objects, &relations, graph, l, trace);
        objects = inter_object_update(tape, store, p, &objects, &relations, graph, l, trace);
    }
    TapeState { objects, relations }
}

/// Plain feature vectors of every object and relation.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerState {
    pub objects: Vec<Vec<f64>>,
    pub relations: Vec<Vec<f64>>,
}

impl LayerState {
    fn check(&self, graph: &PropagationGraph) -> Result<()> {
        if self.objects.len() != graph.num_objects || self.relations.len() != graph.edges.len() {
            return Err(Error::Config(format!(
                "state has {} objects and {} relations, graph has {} and {}",
                self.objects.len(),
                self.relations.len(),
                graph.num_objects,
                graph.edges.len()
            )));
        }
        Ok(())
    }

    fn load(&self, tape: &mut Tape) -> TapeState {
        TapeState {
            objects: self.objects.iter().map(|f| tape.input(f.clone())).collect(),
            relations: self.relations.iter().map(|f| tape.input(f.clone())).collect(),
        }
    }

    fn read(tape: &Tape, s: &TapeState) -> Self {
        LayerState {
            objects: s.objects.iter().map(|&v| tape.value(v).to_vec()).collect(),
            relations: s.relations.iter().map(|&v| tape.value(v).to_vec()).collect(),
        }
    }
}

/// Runs the full propagation on plain values, returning final features and attention weights.
pub fn run_message_passing(
    store: &ParamStore,
    params: &MessagePassingParams,
    graph: &PropagationGraph,
    state: &LayerState,
) -> Result<(LayerState, Vec<AttentionRecord>)> {
    state.check(graph)?;
    let mut tape = Tape::new();
    let s = state.load(&mut tape);
    let mut trace = Trace::enabled();
    let out = propagate(&mut tape, store, params, graph, s, &mut trace);
    Ok((LayerState::read(&tape, &out), trace.records))
}

/// One intra layer on plain values.
pub fn intra_step(
    store: &ParamStore,
    p: &IntraParams,
    graph: &PropagationGraph,
    state: &LayerState,
) -> Result<LayerState> {
    state.check(graph)?;
    let mut tape = Tape::new();
    let s = state.load(&mut tape);
    let mut trace = Trace::disabled();
    let relations = intra_relation_update(&mut tape, store, p, &s.relations, &graph.dual, 0, &mut trace);
    let objects = intra_object_update(&mut tape, store, p, &s.objects, &graph.object_adjacency, 0, &mut trace);
    Ok(LayerState::read(&tape, &TapeState { objects, relations }))
}

/// One inter layer on plain values.
pub fn inter_step(
    store: &ParamStore,
    p: &InterParams,
    graph: &PropagationGraph,
    state: &LayerState,
) -> Result<LayerState> {
    state.check(graph)?;
    if p.types.len() != graph.num_types {
        return Err(Error::Config("weight sets do not match the graph's relation types".into()));
    }
    let mut tape = Tape::new();
    let s = state.load(&mut tape);
    let mut trace = Trace::disabled();
    let relations = inter_relation_update(&mut tape, store, p, &s.objects, &s.relations, graph, 0, &mut trace);
    let objects = inter_object_update(&mut tape, store, p, &s.objects, &relations, graph, 0, &mut trace);
    Ok(LayerState::read(&tape, &TapeState { objects, relations }))
}
