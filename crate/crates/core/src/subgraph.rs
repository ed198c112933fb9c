use serde::Serialize;

use crate::graph::{AttributedGraph, EdgeId, NodeId};
use crate::sampler::SamplerKind;

/// One step of a walk: the sampler moved from `from` to `to` over `edge`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Traversal {
    pub from: NodeId,
    pub to: NodeId,
    pub edge: EdgeId,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SampleMeta {
    /// `None` for subgraphs built directly from a node set.
    pub kind: Option<SamplerKind>,
    pub budget: usize,
    pub seed: u64,
    /// Sampling plus building the induced subgraph.
    pub wall_time_s: f64,
    /// Node selection alone.
    pub walk_time_s: f64,
    /// Jumps to a fresh uniform node after a walk got stuck.
    pub teleports: usize,
    /// Candidate weights evaluated (hypothesis-aware samplers only).
    pub weight_evals: u64,
    pub max_weight_evals_per_step: u64,
}

/// Node-induced subgraph `S = (V_S, E_S)` plus the traversal sequence that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSubgraph {
    nodes: Vec<NodeId>,
    member: Vec<bool>,
    edges: Vec<EdgeId>,
    pub traversal: Vec<Traversal>,
    pub meta: SampleMeta,
}

impl SampledSubgraph {
    /// Builds the induced subgraph of `nodes` (duplicates ignored).
    pub fn induced(
        g: &AttributedGraph,
        nodes: impl IntoIterator<Item = NodeId>,
        traversal: Vec<Traversal>,
        meta: SampleMeta,
    ) -> Self {
        let mut member = vec![false; g.node_count()];
        for v in nodes {
            member[v as usize] = true;
        }
        let nodes: Vec<NodeId> = member
            .iter()
            .enumerate()
            .filter(|(_, m)| **m)
            .map(|(v, _)| v as NodeId)
            .collect();
        let mut edges = Vec::new();
        for &v in &nodes {
            for a in g.adjacency(v) {
                if a.outgoing && member[a.neighbor as usize] {
                    edges.push(a.edge);
                }
            }
        }
        edges.sort_unstable();
        Self {
            nodes,
            member,
            edges,
            traversal,
            meta,
        }
    }

    /// Sampled nodes in id order.
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    /// Induced edges in id order.
    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.member.get(v as usize).copied().unwrap_or(false)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Degree of `v` counting only induced edges.
    pub fn induced_degree(&self, g: &AttributedGraph, v: NodeId) -> usize {
        g.adjacency(v)
            .iter()
            .filter(|a| self.member[a.neighbor as usize])
            .count()
    }

    pub(crate) fn membership(&self) -> &[bool] {
        &self.member
    }
}

/// `E_S` = every edge of `g` whose endpoints both lie in `node_set`.
pub fn induced_subgraph(
    g: &AttributedGraph,
    node_set: impl IntoIterator<Item = NodeId>,
) -> SampledSubgraph {
    SampledSubgraph::induced(g, node_set, Vec::new(), SampleMeta::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{GraphBuilder, Schema};

    fn path4() -> AttributedGraph {
        let schema = Schema::parse_json(
            r#"{"node_types":[{"name":"v"}],"edge_types":[{"name":"e","src":"v","dst":"v"}]}"#,
        )
        .unwrap();
        let mut b = GraphBuilder::new(schema).unwrap();
        for k in ["a", "b", "c", "d"] {
            b.add_node(k, "v", &[]).unwrap();
        }
        b.add_edge("a", "b", "e", &[]).unwrap();
        b.add_edge("b", "c", "e", &[]).unwrap();
        b.add_edge("c", "d", "e", &[]).unwrap();
        b.add_edge("c", "c", "e", &[]).unwrap();
        b.build(false).unwrap()
    }

    #[test]
    fn full_set_is_whole_graph() {
        let g = path4();
        let s = induced_subgraph(&g, 0..4);
        assert_eq!(s.edges(), &[0, 1, 2, 3]);
        for v in 0..4 {
            assert_eq!(s.induced_degree(&g, v), g.degree(v));
        }
    }

    #[test]
    fn pairs_and_gaps() {
        let g = path4();
        assert_eq!(induced_subgraph(&g, [0, 1]).edges(), &[0]);
        assert!(induced_subgraph(&g, [0, 3]).edges().is_empty());
        assert!(induced_subgraph(&g, []).edges().is_empty());
        assert_eq!(induced_subgraph(&g, [2, 2]).edges(), &[3]);
    }

    #[test]
    fn monotone_in_node_set() {
        let g = path4();
        let small = induced_subgraph(&g, [1, 2]);
        let big = induced_subgraph(&g, [0, 1, 2]);
        assert!(small.edges().iter().all(|e| big.edges().contains(e)));
    }
}
