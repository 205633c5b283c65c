use crate::autodiff::softmax;
use crate::error::{Error, Result};
use crate::ontology::{Ontology, RelationType};
use crate::params::Param;

/// Objects as nodes and selected ordered pairs as edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InitialGraph {
    pub num_objects: usize,
    pub edges: Vec<(usize, usize)>,
}

impl InitialGraph {
    pub fn new(num_objects: usize, edges: Vec<(usize, usize)>) -> Self {
        debug_assert!(edges.iter().all(|&(i, j)| i != j && i < num_objects && j < num_objects));
        InitialGraph { num_objects, edges }
    }
}

/// Initial graph whose edges carry a relation type and the pre-classifier distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct HeterogeneousGraph {
    pub num_objects: usize,
    pub edges: Vec<(usize, usize)>,
    pub edge_types: Vec<RelationType>,
    pub pre_distribution: Vec<Vec<f64>>,
}

impl HeterogeneousGraph {
    /// Every edge typed `ty`, no pre-classifier output.
    pub fn uniform(graph: &InitialGraph, ty: RelationType) -> Self {
        HeterogeneousGraph {
            num_objects: graph.num_objects,
            edges: graph.edges.clone(),
            edge_types: vec![ty; graph.edges.len()],
            pre_distribution: Vec::new(),
        }
    }
}

/// Groups of relation classes for each relation type, checked non-empty.
#[derive(Debug, Clone)]
pub struct TypeGroups {
    interactive: Vec<usize>,
    non_interactive: Vec<usize>,
}

impl TypeGroups {
    pub fn new(ontology: &Ontology) -> Result<Self> {
        let interactive = ontology.relations_of_type(RelationType::Interactive);
        let non_interactive = ontology.relations_of_type(RelationType::NonInteractive);
        if interactive.is_empty() || non_interactive.is_empty() {
            return Err(Error::Config(
                "relation typing needs at least one class of each relation type".into(),
            ));
        }
        Ok(TypeGroups { interactive, non_interactive })
    }

    /// Type whose classes have the larger mean probability; ties go to interactive.
    pub fn type_of(&self, distribution: &[f64]) -> RelationType {
        let mean = |idx: &[usize]| idx.iter().map(|&r| distribution[r]).sum::<f64>() / idx.len() as f64;
        if mean(&self.interactive) >= mean(&self.non_interactive) {
            RelationType::Interactive
        } else {
            RelationType::NonInteractive
        }
    }
}

/// Pre-classifies each relation feature with `pre_classifier` (`|R| x D_h`)
/// and types the edge by comparing the per-type mean class probability.
pub fn assign_relation_types(
    graph: &InitialGraph,
    relation_features: &[Vec<f64>],
    pre_classifier: &Param,
    ontology: &Ontology,
) -> Result<HeterogeneousGraph> {
    if pre_classifier.rows != ontology.num_relation_classes() {
        return Err(Error::Config(format!(
            "pre-classifier has {} outputs, ontology has {} relation classes",
            pre_classifier.rows,
            ontology.num_relation_classes()
        )));
    }
    let groups = TypeGroups::new(ontology)?;
    let mut edge_types = Vec::with_capacity(graph.edges.len());
    let mut pre_distribution = Vec::with_capacity(graph.edges.len());
    for f in relation_features {
        if f.len() != pre_classifier.cols {
            return Err(Error::Config("relation feature dimension mismatch".into()));
        }
        let logits: Vec<f64> = (0..pre_classifier.rows)
            .map(|r| pre_classifier.row(r).iter().zip(f).map(|(a, b)| a * b).sum())
            .collect();
        let p = softmax(&logits);
        edge_types.push(groups.type_of(&p));
        pre_distribution.push(p);
    }
    Ok(HeterogeneousGraph {
        num_objects: graph.num_objects,
        edges: graph.edges.clone(),
        edge_types,
        pre_distribution,
    })
}
