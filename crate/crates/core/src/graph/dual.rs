use std::collections::BTreeMap;

use crate::graph::hetero::HeterogeneousGraph;

/// An undirected edge between two relations sharing an object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct DualEdge {
    /// Smaller relation (heterogeneous edge) index.
    pub a: usize,
    pub b: usize,
    /// Object shared by both relations; the smaller one when they share both endpoints.
    pub shared: usize,
}

/// Relations as nodes, shared objects as edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualGraph {
    /// Endpoints `(subject, object)` of each dual node's underlying relation.
    pub relations: Vec<(usize, usize)>,
    /// Sorted by `(a, b)`.
    pub edges: Vec<DualEdge>,
    /// Neighbor relations of each dual node, ascending.
    pub neighbors: Vec<Vec<usize>>,
}

impl DualGraph {
    pub fn num_nodes(&self) -> usize {
        self.relations.len()
    }

    pub fn degree(&self, node: usize) -> usize {
        self.neighbors[node].len()
    }
}

pub fn build_dual_graph(het: &HeterogeneousGraph) -> DualGraph {
    build_dual_from_edges(het.num_objects, &het.edges)
}

pub fn build_dual_from_edges(num_objects: usize, relations: &[(usize, usize)]) -> DualGraph {
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); num_objects];
    for (r, &(s, o)) in relations.iter().enumerate() {
        incident[s].push(r);
        if o != s {
            incident[o].push(r);
        }
    }
    // objects visited in ascending order, so the first insertion holds the smallest shared index
    let mut found: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (obj, rels) in incident.iter().enumerate() {
        for (x, &ra) in rels.iter().enumerate() {
            for &rb in &rels[x + 1..] {
                let key = (ra.min(rb), ra.max(rb));
                found.entry(key).or_insert(obj);
            }
        }
    }
    let mut neighbors = vec![Vec::new(); relations.len()];
    let edges: Vec<DualEdge> = found
        .into_iter()
        .map(|((a, b), shared)| {
            neighbors[a].push(b);
            neighbors[b].push(a);
            DualEdge { a, b, shared }
        })
        .collect();
    for n in &mut neighbors {
        n.sort_unstable();
    }
    DualGraph { relations: relations.to_vec(), edges, neighbors }
}

/// Objects adjacent to each object through at least one relation (either direction), ascending.
pub fn object_neighbors(num_objects: usize, relations: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); num_objects];
    for &(s, o) in relations {
        out[s].push(o);
        out[o].push(s);
    }
    for n in &mut out {
        n.sort_unstable();
        n.dedup();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_has_one_dual_edge() {
        let d = build_dual_from_edges(3, &[(0, 1), (1, 2)]);
        assert_eq!(d.edges, vec![DualEdge { a: 0, b: 1, shared: 1 }]);
    }

    #[test]
    fn star_becomes_triangle() {
        let d = build_dual_from_edges(4, &[(0, 1), (0, 2), (0, 3)]);
        assert_eq!(d.edges.len(), 3);
        assert!(d.edges.iter().all(|e| e.shared == 0));
        assert_eq!(d.neighbors, vec![vec![1, 2], vec![0, 2], vec![0, 1]]);
    }

    #[test]
    fn reciprocal_relations_share_smaller_index() {
        let d = build_dual_from_edges(5, &[(4, 2), (2, 4)]);
        assert_eq!(d.edges, vec![DualEdge { a: 0, b: 1, shared: 2 }]);
    }

    #[test]
    fn empty_graph() {
        let d = build_dual_from_edges(3, &[]);
        assert_eq!(d.num_nodes(), 0);
        assert!(d.edges.is_empty());
    }

    #[test]
    fn object_adjacency_is_symmetric_and_deduplicated() {
        let n = object_neighbors(3, &[(0, 1), (1, 0), (2, 1)]);
        assert_eq!(n, vec![vec![1], vec![0, 2], vec![1]]);
    }
}
