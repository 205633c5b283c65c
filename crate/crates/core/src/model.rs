//! Full model: encoders, relation typing, message passing and classifier heads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Tape, Var};
use crate::data::{Checkpoint, CooccurrenceStats, OptimizerState};
use crate::encoding::{label_embeddings, ClassEncoding, EncoderDims, EncoderParams};
use crate::error::{Error, Result};
use crate::graph::{select_pairs_variant, HeterogeneousGraph, PairSelectionConfig, TypeGroups};
use crate::message_passing::{propagate, MessagePassingConfig, MessagePassingParams, PropagationGraph, TapeState, Trace};
use crate::ontology::{Ontology, RelationType};
use crate::params::{ParamId, ParamStore};
use crate::scene::Scene;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    /// Input visual feature size `D_v`.
    pub visual_dim: usize,
    pub visual_proj_dim: usize,
    pub box_dim: usize,
    pub class_dim: usize,
    pub hidden_dim: usize,
    pub class_encoding: ClassEncoding,
    pub message_passing: MessagePassingConfig,
    pub pair_selection: PairSelectionConfig,
    /// Scale of the uniform Glorot bound used at initialization.
    pub init_gain: f64,
    /// Triplets kept per scene at inference.
    pub max_triplets: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            visual_dim: 128,
            visual_proj_dim: 128,
            box_dim: 32,
            class_dim: 64,
            hidden_dim: 256,
            class_encoding: ClassEncoding::Embedding,
            message_passing: MessagePassingConfig::default(),
            pair_selection: PairSelectionConfig::default(),
            init_gain: 1.0,
            max_triplets: 100,
        }
    }
}

/// Output layers. `w_pre` is the relation pre-classifier used for typing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeadParams {
    pub w_obj: ParamId,
    pub w_rel: ParamId,
    pub w_pre: ParamId,
}

#[derive(Debug, Clone)]
pub struct Model {
    pub config: ModelConfig,
    pub params: ParamStore,
    pub encoder: EncoderParams,
    pub message_passing: MessagePassingParams,
    pub heads: HeadParams,
    ontology: Ontology,
    groups: Option<TypeGroups>,
}

/// Tape nodes produced by one forward pass over a scene.
#[derive(Debug, Clone)]
pub struct Forward {
    pub edges: Vec<(usize, usize)>,
    pub edge_types: Vec<RelationType>,
    pub object_logits: Vec<Var>,
    pub object_probs: Vec<Var>,
    pub relation_logits: Vec<Var>,
    pub relation_probs: Vec<Var>,
    pub pre_logits: Vec<Var>,
    pub pre_probs: Vec<Var>,
}

/// Plain-value model outputs for a scene.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub edges: Vec<(usize, usize)>,
    pub edge_types: Vec<RelationType>,
    pub object_probs: Vec<Vec<f64>>,
    pub relation_probs: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct ConfigEnvelope<T> {
    model: ModelConfig,
    #[serde(flatten)]
    rest: T,
}

impl Model {
    fn layout(config: ModelConfig, ontology: &Ontology) -> Result<Self> {
        let c = &config;
        if c.hidden_dim == 0 || c.visual_dim == 0 || c.visual_proj_dim == 0 || c.box_dim == 0 {
            return Err(Error::Config("model dimensions must be positive".into()));
        }
        if c.class_encoding == ClassEncoding::Embedding && c.class_dim == 0 {
            return Err(Error::Config("class embedding dimension must be positive".into()));
        }
        let groups = if c.message_passing.typed { Some(TypeGroups::new(ontology)?) } else { None };
        let mut params = ParamStore::new();
        let encoder = EncoderParams::register(
            &mut params,
            EncoderDims {
                visual: c.visual_dim,
                visual_proj: c.visual_proj_dim,
                box_proj: c.box_dim,
                class: c.class_dim,
                hidden: c.hidden_dim,
                num_classes: ontology.num_object_classes(),
                class_encoding: c.class_encoding,
            },
        );
        let message_passing = MessagePassingParams::register(&mut params, c.hidden_dim, c.message_passing);
        let heads = HeadParams {
            w_obj: params.add("head.w_obj", ontology.num_object_classes(), c.hidden_dim),
            w_rel: params.add("head.w_rel", ontology.num_relation_classes(), c.hidden_dim),
            w_pre: params.add("head.w_pre", ontology.num_relation_classes(), c.hidden_dim),
        };
        Ok(Model { config, params, encoder, message_passing, heads, ontology: ontology.clone(), groups })
    }

    /// Fresh model with Glorot-initialized weights drawn from `seed`.
    pub fn new(config: ModelConfig, ontology: &Ontology, seed: u64) -> Result<Self> {
        let mut model = Self::layout(config, ontology)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ids: Vec<ParamId> = model.params.iter().map(|(id, _)| id).collect();
        for id in ids {
            model.params.init_glorot(id, config.init_gain, &mut rng);
        }
        Ok(model)
    }

    pub fn ontology(&self) -> &Ontology {
        &self.ontology
    }

    /// Snapshot with `extra` merged into the stored configuration JSON.
    pub fn to_checkpoint<T: Serialize>(&self, optimizer: OptimizerState, extra: &T) -> Result<Checkpoint> {
        let config = serde_json::to_string(&ConfigEnvelope { model: self.config, rest: extra })?;
        Ok(Checkpoint {
            params: self.params.clone(),
            optimizer,
            ontology_hash: self.ontology.content_hash(),
            config,
        })
    }

    pub fn from_checkpoint(ckpt: &Checkpoint, ontology: &Ontology) -> Result<Self> {
        ckpt.check_ontology(ontology)?;
        let env: ConfigEnvelope<serde_json::Value> = serde_json::from_str(&ckpt.config)
            .map_err(|e| Error::Format(format!("checkpoint configuration: {e}")))?;
        let mut model = Self::layout(env.model, ontology)?;
        model.params.copy_from(&ckpt.params)?;
        Ok(model)
    }

    /// Checks that scenes and statistics fit this model.
    pub fn check_inputs(&self, scenes: &[Scene], stats: &CooccurrenceStats) -> Result<()> {
        stats.check_dims(&self.ontology)?;
        for s in scenes {
            if let Some(o) = s.objects.iter().find(|o| o.visual_feature.len() != self.config.visual_dim) {
                return Err(Error::Config(format!(
                    "scene {}: visual feature dimension {} but the model expects {}",
                    s.scene_id,
                    o.visual_feature.len(),
                    self.config.visual_dim
                )));
            }
        }
        Ok(())
    }

    pub fn select_edges(&self, scene: &Scene, stats: &CooccurrenceStats) -> Result<Vec<(usize, usize)>> {
        let emb = label_embeddings(&self.params, &self.encoder);
        select_pairs_variant(&self.config.pair_selection, scene, stats, Some(&emb))
    }

    /// Encodes, types, propagates and classifies every object and selected pair.
    pub fn forward(&self, tape: &mut Tape, scene: &Scene, stats: &CooccurrenceStats, trace: &mut Trace) -> Result<Forward> {
        let edges = self.select_edges(scene, stats)?;
        self.forward_with_edges(tape, scene, edges, trace)
    }

    pub fn forward_with_edges(
        &self,
        tape: &mut Tape,
        scene: &Scene,
        edges: Vec<(usize, usize)>,
        trace: &mut Trace,
    ) -> Result<Forward> {
        let image = (scene.width, scene.height);
        let objects = scene
            .objects
            .iter()
            .map(|o| self.encoder.encode_object(tape, &self.params, o, image))
            .collect::<Result<Vec<_>>>()?;
        let relations = edges
            .iter()
            .map(|&(i, j)| {
                let union = scene.objects[i].bbox.union(&scene.objects[j].bbox);
                self.encoder.encode_relation(tape, &self.params, objects[i], objects[j], &union, image)
            })
            .collect::<Result<Vec<_>>>()?;

        let w_pre = tape.param(&self.params, self.heads.w_pre);
        let pre_logits: Vec<Var> = relations.iter().map(|&f| tape.matvec(w_pre, f)).collect();
        let pre_probs: Vec<Var> = pre_logits.iter().map(|&l| tape.softmax(l)).collect();
        let edge_types: Vec<RelationType> = match &self.groups {
            Some(g) => pre_probs.iter().map(|&p| g.type_of(tape.value(p))).collect(),
            None => vec![RelationType::Interactive; edges.len()],
        };
        let het = HeterogeneousGraph {
            num_objects: objects.len(),
            edges: edges.clone(),
            edge_types: edge_types.clone(),
            pre_distribution: Vec::new(),
        };
        let graph = PropagationGraph::new(&het, self.config.message_passing.typed);
        let state = propagate(tape, &self.params, &self.message_passing, &graph, TapeState { objects, relations }, trace);

        let w_obj = tape.param(&self.params, self.heads.w_obj);
        let w_rel = tape.param(&self.params, self.heads.w_rel);
        let object_logits: Vec<Var> = state.objects.iter().map(|&f| tape.matvec(w_obj, f)).collect();
        let relation_logits: Vec<Var> = state.relations.iter().map(|&f| tape.matvec(w_rel, f)).collect();
        let object_probs = object_logits.iter().map(|&l| tape.softmax(l)).collect();
        let relation_probs = relation_logits.iter().map(|&l| tape.softmax(l)).collect();
        Ok(Forward {
            edges,
            edge_types,
            object_logits,
            object_probs,
            relation_logits,
            relation_probs,
            pre_logits,
            pre_probs,
        })
    }

    pub fn predict(&self, scene: &Scene, stats: &CooccurrenceStats) -> Result<Prediction> {
        let mut tape = Tape::new();
        let f = self.forward(&mut tape, scene, stats, &mut Trace::disabled())?;
        Ok(Prediction {
            object_probs: f.object_probs.iter().map(|&v| tape.value(v).to_vec()).collect(),
            relation_probs: f.relation_probs.iter().map(|&v| tape.value(v).to_vec()).collect(),
            edges: f.edges,
            edge_types: f.edge_types,
        })
    }
}
